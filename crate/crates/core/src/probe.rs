//! Boundary-behaviour probes on computed solutions: power-law fits, traces of
//! `v/δ^{2s−1}`, the weighted-gradient relation, Neumann difference quotients,
//! Hölder seminorms and the comparison with the classical problem as `s → 1`.

use crate::constants::{FracOrder, Regime};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::galerkin::{assemble, BoundaryCondition, SolveResult};
use crate::mesh::GradedMesh;
use crate::quadrature::{gauss_legendre, integrate_with_breaks, QuadOptions};

/// Minimum number of samples for any fit.
pub const MIN_SAMPLES: usize = 6;

/// Nodes counted from an end below which the discrete layer pollutes the data.
const LAYER_NODES: usize = 20;

/// Log–log least-squares fit `value ≈ constant · δ^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub constant: f64,
    pub window: (f64, f64),
    /// Largest relative deviation of the data from the fitted law.
    pub residual: f64,
    pub points: usize,
}

/// Fits a power law to `(δ, |value|)` pairs; zero values (at most 10%) are dropped.
pub fn fit_boundary_rate(samples: &[(f64, f64)]) -> Result<RateFit> {
    if samples.iter().any(|&(d, v)| !(d > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("samples need δ > 0 and finite values".into()));
    }
    let zeros = samples.iter().filter(|s| s.1 == 0.0).count();
    if zeros * 10 > samples.len() {
        return Err(Error::InvalidArgument(format!(
            "{zeros} of {} samples vanish; at most 10% may be zero",
            samples.len()
        )));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.1 != 0.0)
        .map(|&(d, v)| (d.ln(), v.abs().ln()))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all samples share one δ".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = pts
        .iter()
        .map(|p| ((p.1 - intercept - exponent * p.0).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    Ok(RateFit {
        exponent,
        constant: intercept.exp(),
        window: (lo, hi),
        residual,
        points: pts.len(),
    })
}

/// `[δ of the 20th node from an end, 0.1·half-length]`. On a uniform mesh the
/// lower end is `20·h_min`.
pub fn probe_window(mesh: &GradedMesh) -> (f64, f64) {
    let half = mesh.n_elements() / 2;
    let (a, b) = mesh.bounds();
    let lo = mesh.node_delta(LAYER_NODES.min(half)).max(LAYER_NODES as f64 * mesh.h_min());
    (lo, 0.1 * 0.5 * (b - a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Global node index of the `j`-th node counted inward from this end.
    fn node(self, mesh: &GradedMesh, j: usize) -> usize {
        match self {
            Side::Left => j,
            Side::Right => mesh.n_elements() - j,
        }
    }
}

/// Inward node counts `j` in the window whose δ are closest to `hi·2^{−k}`.
fn dyadic_nodes(mesh: &GradedMesh, window: (f64, f64)) -> Vec<usize> {
    let half = mesh.n_elements() / 2;
    let inside: Vec<usize> = (1..=half)
        .filter(|&j| {
            let d = mesh.node_delta(j);
            d >= window.0 && d <= window.1
        })
        .collect();
    let mut out: Vec<usize> = Vec::new();
    if inside.is_empty() {
        return out;
    }
    let mut target = window.1;
    while target >= window.0 * 0.999 {
        let best = *inside
            .iter()
            .min_by(|&&p, &&q| {
                let dp = (mesh.node_delta(p) / target).ln().abs();
                let dq = (mesh.node_delta(q) / target).ln().abs();
                dp.total_cmp(&dq)
            })
            .expect("nonempty");
        if out.last() != Some(&best) {
            out.push(best);
        }
        target *= 0.5;
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn window_nodes(mesh: &GradedMesh) -> Result<(Vec<usize>, (f64, f64))> {
    let window = probe_window(mesh);
    let js = dyadic_nodes(mesh, window);
    if js.len() < MIN_SAMPLES {
        return Err(Error::WindowTooThin {
            lo: window.0,
            hi: window.1,
            count: js.len(),
            needed: MIN_SAMPLES,
        });
    }
    Ok((js, window))
}

/// Value at `δ → 0` of `r(δ) ≈ L + C δ^e` by least squares, with the spread
/// against the fit restricted to the smaller half of the samples as error.
pub fn extrapolate_to_boundary(points: &[(f64, f64)], e: f64) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: points.len(),
        });
    }
    let fit = |pts: &[(f64, f64)]| -> Option<f64> {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0.powf(e)).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0.powf(e) - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0.powf(e) - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return Some(my);
        }
        let c = sxy / sxx;
        let l = my - c * mx;
        l.is_finite().then_some(l)
    };
    let mut sorted = points.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    let all = fit(&sorted).ok_or_else(|| Error::Extrapolation("degenerate samples".into()))?;
    let lower = &sorted[..(sorted.len() / 2 + 1).max(3).min(sorted.len())];
    let part = fit(lower).ok_or_else(|| Error::Extrapolation("degenerate samples".into()))?;
    Ok((all, (all - part).abs()))
}

/// Endpoint limit of `v/δ^{2s−1}` and the decay of `|r − limit|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointTrace {
    pub trace: f64,
    pub error: f64,
    /// `None` when `r` is constant on the window (nothing to certify).
    pub flatness: Option<RateFit>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRatio {
    pub left: EndpointTrace,
    pub right: EndpointTrace,
    pub window: (f64, f64),
}

impl BoundaryRatio {
    /// `|left − right| / max(|left|, |right|)`, zero when both vanish.
    pub fn asymmetry(&self) -> f64 {
        let m = self.left.trace.abs().max(self.right.trace.abs());
        if m == 0.0 {
            0.0
        } else {
            (self.left.trace - self.right.trace).abs() / m
        }
    }
}

fn require_supercritical(s: FracOrder) -> Result<()> {
    if s.regime() != Regime::Supercritical {
        return Err(Error::Domain {
            name: "s",
            value: s.get(),
            range: "(1/2, 1)".into(),
        });
    }
    Ok(())
}

fn trace_at(v: &SolveResult, side: Side, js: &[usize]) -> Result<EndpointTrace> {
    let mesh = &v.mesh;
    let g = v.s.boundary_exponent();
    let pts: Vec<(f64, f64)> = js
        .iter()
        .map(|&j| {
            let d = mesh.node_delta(j);
            (d, v.values[side.node(mesh, j)] / d.powf(g))
        })
        .collect();
    let (trace, error) = extrapolate_to_boundary(&pts, 1.0)?;
    let deviations: Vec<(f64, f64)> = pts.iter().map(|&(d, r)| (d, (r - trace).abs())).collect();
    let flatness = if deviations.iter().all(|p| p.1 == 0.0) {
        None
    } else {
        fit_boundary_rate(&deviations).ok()
    };
    Ok(EndpointTrace { trace, error, flatness })
}

/// Traces of `v/δ^{2s−1}` at both endpoints of a censored Dirichlet solution.
pub fn dirichlet_boundary_ratio(v: &SolveResult) -> Result<BoundaryRatio> {
    require_supercritical(v.s)?;
    let (js, window) = window_nodes(&v.mesh)?;
    Ok(BoundaryRatio {
        left: trace_at(v, Side::Left, &js)?,
        right: trace_at(v, Side::Right, &js)?,
        window,
    })
}

/// Power-law fit of `|v|` against δ near one end.
pub fn solution_rate(v: &SolveResult, side: Side) -> Result<RateFit> {
    let (js, _) = window_nodes(&v.mesh)?;
    let samples: Vec<(f64, f64)> = js
        .iter()
        .map(|&j| (v.mesh.node_delta(j), v.values[side.node(&v.mesh, j)].abs()))
        .collect();
    fit_boundary_rate(&samples)
}

/// Outcome of the weighted-gradient relation at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientRelation {
    /// `|δ^{2−2s} v′ − (2s−1)·trace| / |(2s−1)·trace|` with both limits.
    Ratio {
        weighted_gradient: f64,
        scaled_trace: f64,
        residual: f64,
    },
    /// The trace vanishes; the relation carries no information.
    ZeroTrace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedGradient {
    pub left: GradientRelation,
    pub right: GradientRelation,
}

impl GradientRelation {
    pub fn residual(&self) -> Option<f64> {
        match self {
            GradientRelation::Ratio { residual, .. } => Some(*residual),
            GradientRelation::ZeroTrace => None,
        }
    }
}

/// Point in `(δ0, δ1)` where `(δ^γ)′` equals the secant slope of `δ^γ`, so that
/// difference quotients of a pure power are exact there.
fn power_midpoint(d0: f64, d1: f64, g: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        return 0.5 * (d0 + d1);
    }
    let secant = (d1.powf(g) - d0.powf(g)) / (d1 - d0);
    (secant / g).powf(1.0 / (g - 1.0))
}

fn gradient_at(v: &SolveResult, side: Side, js: &[usize], trace: &EndpointTrace) -> Result<GradientRelation> {
    let g = v.s.boundary_exponent();
    let scaled = g * trace.trace;
    if trace.trace == 0.0 || scaled.abs() < 1e-14 * v.max_abs().max(f64::MIN_POSITIVE) {
        return Ok(GradientRelation::ZeroTrace);
    }
    let mesh = &v.mesh;
    let half = mesh.n_elements() / 2;
    let pts: Vec<(f64, f64)> = js
        .iter()
        .filter(|&&j| j < half)
        .map(|&j| {
            let (d0, d1) = (mesh.node_delta(j), mesh.node_delta(j + 1));
            let slope = (v.values[side.node(mesh, j + 1)] - v.values[side.node(mesh, j)]) / (d1 - d0);
            let dm = power_midpoint(d0, d1, g);
            (dm, dm.powf(1.0 - g) * slope)
        })
        .collect();
    let (weighted, _) = extrapolate_to_boundary(&pts, 1.0)?;
    Ok(GradientRelation::Ratio {
        weighted_gradient: weighted,
        scaled_trace: scaled,
        residual: (weighted - scaled).abs() / scaled.abs(),
    })
}

/// Checks `δ^{2−2s} v′ = (2s−1)·(v/δ^{2s−1})` at both endpoints, derivatives
/// taken inward by difference quotients on consecutive graded nodes.
pub fn dirichlet_weighted_gradient(v: &SolveResult) -> Result<WeightedGradient> {
    let ratio = dirichlet_boundary_ratio(v)?;
    let (js, _) = window_nodes(&v.mesh)?;
    Ok(WeightedGradient {
        left: gradient_at(v, Side::Left, &js, &ratio.left)?,
        right: gradient_at(v, Side::Right, &js, &ratio.right)?,
    })
}

/// Limit of a boundary difference quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuotientLimit {
    Limit { value: f64, error: f64 },
    /// The quotient grows like `t^exponent`, `exponent < 0`.
    Divergent { exponent: f64 },
}

impl QuotientLimit {
    pub fn value(&self) -> Option<f64> {
        match self {
            QuotientLimit::Limit { value, .. } => Some(*value),
            QuotientLimit::Divergent { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannEndpoint {
    /// Fit of `|u(σ+t) − u(σ)|` in `t`; `None` when the increments vanish.
    pub increment: Option<RateFit>,
    /// `(u(σ+t) − u(σ))/t`.
    pub first: QuotientLimit,
    /// `(u(σ+t) − u(σ))/t^{2s−1}`.
    pub second: QuotientLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannQuotients {
    pub left: NeumannEndpoint,
    pub right: NeumannEndpoint,
    pub window: (f64, f64),
}

/// Exponents within this distance of zero are treated as a bounded quotient.
const FLAT_EXPONENT: f64 = 0.02;

fn quotient_limit(samples: &[(f64, f64)], alpha: f64, p: f64) -> Result<QuotientLimit> {
    let e = alpha - p;
    if e < -FLAT_EXPONENT {
        return Ok(QuotientLimit::Divergent { exponent: e });
    }
    let q: Vec<(f64, f64)> = samples.iter().map(|&(t, du)| (t, du / t.powf(p))).collect();
    if e <= FLAT_EXPONENT {
        let mut sorted = q.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spread = sorted.iter().map(|x| (x.1 - sorted[0].1).abs()).fold(0.0, f64::max);
        return Ok(QuotientLimit::Limit {
            value: sorted[0].1,
            error: spread,
        });
    }
    let (value, error) = extrapolate_to_boundary(&q, e)?;
    Ok(QuotientLimit::Limit { value, error })
}

fn neumann_at(u: &SolveResult, side: Side, js: &[usize]) -> Result<NeumannEndpoint> {
    let mesh = &u.mesh;
    let p2 = u.s.boundary_exponent();
    let base = u.values[side.node(mesh, 0)];
    let samples: Vec<(f64, f64)> = js
        .iter()
        .map(|&j| (mesh.node_delta(j), u.values[side.node(mesh, j)] - base))
        .collect();
    if samples.iter().all(|s| s.1 == 0.0) {
        let zero = QuotientLimit::Limit { value: 0.0, error: 0.0 };
        return Ok(NeumannEndpoint {
            increment: None,
            first: zero,
            second: zero,
        });
    }
    let abs: Vec<(f64, f64)> = samples.iter().map(|&(t, d)| (t, d.abs())).collect();
    let fit = fit_boundary_rate(&abs)?;
    Ok(NeumannEndpoint {
        increment: Some(fit),
        first: quotient_limit(&samples, fit.exponent, 1.0)?,
        second: quotient_limit(&samples, fit.exponent, p2)?,
    })
}

/// Boundary difference quotients of a Neumann solution (or any nodal data).
pub fn neumann_normal_derivative(u: &SolveResult) -> Result<NeumannQuotients> {
    require_supercritical(u.s)?;
    let (js, window) = window_nodes(&u.mesh)?;
    Ok(NeumannQuotients {
        left: neumann_at(u, Side::Left, &js)?,
        right: neumann_at(u, Side::Right, &js)?,
        window,
    })
}

/// `max_{i≠j} |u_i − u_j| / |x_i − x_j|^α` over all node pairs.
pub fn holder_estimate(nodes: &[f64], values: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            range: "(0, 1]".into(),
        });
    }
    if nodes.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    let mut best = 0.0f64;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let d = (nodes[i] - nodes[j]).abs();
            if d > 0.0 {
                best = best.max((values[i] - values[j]).abs() / d.powf(alpha));
            }
        }
    }
    Ok(best)
}

/// Nodal values of the classical solution of `−u″ = f`: zero boundary values
/// (Dirichlet) or zero flux with zero mean (Neumann). Piecewise-linear Galerkin
/// with exact load is nodally exact in 1D; the tridiagonal system is solved by
/// the Thomas algorithm.
pub fn classical_solution(mesh: &GradedMesh, f: &ScalarField, bc: BoundaryCondition) -> Result<Vec<f64>> {
    let b = crate::galerkin::load(mesh, f)?;
    let n = mesh.n_elements();
    let h: Vec<f64> = (0..n).map(|k| mesh.element_size(k)).collect();
    // Unknowns: Dirichlet 1..n-1; Neumann 1..n with u_0 pinned to 0.
    let (first, last) = match bc {
        BoundaryCondition::Dirichlet => (1, n - 1),
        BoundaryCondition::Neumann => (1, n),
    };
    let m = last - first + 1;
    let mut diag = vec![0.0; m];
    let mut lower = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for (r, i) in (first..=last).enumerate() {
        let left = 1.0 / h[i - 1];
        let right = if i < n { 1.0 / h[i] } else { 0.0 };
        diag[r] = left + right;
        lower[r] = -left;
        upper[r] = -right;
        rhs[r] = b[i];
    }
    // Thomas algorithm.
    for r in 1..m {
        let w = lower[r] / diag[r - 1];
        diag[r] -= w * upper[r - 1];
        rhs[r] -= w * rhs[r - 1];
    }
    let mut x = vec![0.0; m];
    x[m - 1] = rhs[m - 1] / diag[m - 1];
    for r in (0..m - 1).rev() {
        x[r] = (rhs[r] - upper[r] * x[r + 1]) / diag[r];
    }
    let mut u = vec![0.0; n + 1];
    u[first..=last].copy_from_slice(&x);
    if bc == BoundaryCondition::Neumann {
        let masses = crate::galerkin::hat_masses(mesh);
        let (a, bnd) = mesh.bounds();
        let mean = masses.iter().zip(&u).map(|(w, v)| w * v).sum::<f64>() / (bnd - a);
        for v in u.iter_mut() {
            *v -= mean;
        }
    }
    Ok(u)
}

/// `L²` distance between the piecewise-linear interpolants of two nodal vectors.
pub fn l2_distance(mesh: &GradedMesh, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != mesh.n_nodes() || v.len() != mesh.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_nodes(),
            got: u.len().min(v.len()),
        });
    }
    let mut total = 0.0;
    for k in 0..mesh.n_elements() {
        let e0 = u[k] - v[k];
        let e1 = u[k + 1] - v[k + 1];
        total += mesh.element_size(k) * (e0 * e0 + e0 * e1 + e1 * e1) / 3.0;
    }
    Ok(total.sqrt())
}

/// `L²` distance between nodal data and a function, element-wise Gauss.
pub fn l2_distance_to(mesh: &GradedMesh, u: &[f64], exact: &dyn Fn(f64) -> f64) -> Result<f64> {
    if u.len() != mesh.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_nodes(),
            got: u.len(),
        });
    }
    let rule = gauss_legendre(8);
    let mut total = 0.0;
    for k in 0..mesh.n_elements() {
        let (x0, x1) = mesh.element(k);
        total += rule.integrate(
            |x| {
                let t = (x - x0) / (x1 - x0);
                let e = u[k] * (1.0 - t) + u[k + 1] * t - exact(x);
                e * e
            },
            x0,
            x1,
        );
    }
    Ok(total.sqrt())
}

/// One row of the `s → 1` comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub s: f64,
    pub l2_error: f64,
    pub classical_l2: f64,
}

/// Solves the fractional problem for each `s` on a fixed mesh and reports the
/// `L²` distance to the classical solution with matching boundary conditions.
pub fn s_to_one_comparison(
    f: &ScalarField,
    bc: BoundaryCondition,
    s_list: &[f64],
    mesh: &GradedMesh,
) -> Result<Vec<LimitRow>> {
    let classical = classical_solution(mesh, f, bc)?;
    let zero = vec![0.0; mesh.n_nodes()];
    let classical_l2 = l2_distance(mesh, &classical, &zero)?;
    let mut rows = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let s = FracOrder::new(s)?;
        let u = assemble(mesh, s, bc)?.solve(f)?;
        rows.push(LimitRow {
            s: s.get(),
            l2_error: l2_distance(mesh, &u.values, &classical)?,
            classical_l2,
        });
    }
    Ok(rows)
}

/// `∫_a^b f`, used to check Neumann compatibility of named data.
pub fn integral(f: &ScalarField, a: f64, b: f64) -> Result<f64> {
    Ok(integrate_with_breaks(|x| f.eval(x), a, b, f.breakpoints(), QuadOptions::default())?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::graded_mesh;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let samples: Vec<(f64, f64)> = (0..10).map(|k| {
            let d = 1e-3 * 1.7f64.powi(k);
            (d, 3.0 * d.sqrt())
        }).collect();
        let fit = fit_boundary_rate(&samples).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-12);
        assert!((fit.constant - 3.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
        let linear: Vec<(f64, f64)> = samples.iter().map(|&(d, _)| (d, d)).collect();
        assert!((fit_boundary_rate(&linear).unwrap().exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perturbed_power_law() {
        let samples: Vec<(f64, f64)> = (0..12).map(|k| {
            let d = 1e-3 * 10f64.powf(k as f64 / 11.0);
            (d, d.sqrt() * (1.0 + 0.1 * d))
        }).collect();
        assert!((fit_boundary_rate(&samples).unwrap().exponent - 0.5).abs() < 0.01);
    }

    #[test]
    fn too_few_or_too_many_zeros() {
        let few: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 1.0)).collect();
        assert!(matches!(fit_boundary_rate(&few), Err(Error::InsufficientSamples { .. })));
        let mut zeros: Vec<(f64, f64)> = (1..10).map(|k| (k as f64, 1.0)).collect();
        zeros[0].1 = 0.0;
        zeros[1].1 = 0.0;
        assert!(fit_boundary_rate(&zeros).is_err());
    }

    #[test]
    fn synthetic_dirichlet_layer_has_unit_trace() {
        let s = order(0.75);
        let mesh = graded_mesh(-1.0, 1.0, 256, 4.0).unwrap();
        let g = s.boundary_exponent();
        let values: Vec<f64> = (0..=256).map(|j| mesh.node_delta(j).powf(g)).collect();
        let v = SolveResult::from_nodal(&mesh, s, BoundaryCondition::Dirichlet, values).unwrap();
        let r = dirichlet_boundary_ratio(&v).unwrap();
        assert!((r.left.trace - 1.0).abs() < 1e-12 && (r.right.trace - 1.0).abs() < 1e-12);
        let w = dirichlet_weighted_gradient(&v).unwrap();
        assert!(w.left.residual().unwrap() < 1e-10);
        assert!(w.right.residual().unwrap() < 1e-10);
    }

    #[test]
    fn zero_solution_reports_zero_trace() {
        let s = order(0.75);
        let mesh = graded_mesh(-1.0, 1.0, 256, 4.0).unwrap();
        let v = SolveResult::from_nodal(&mesh, s, BoundaryCondition::Dirichlet, vec![0.0; 257]).unwrap();
        let r = dirichlet_boundary_ratio(&v).unwrap();
        assert_eq!(r.left.trace, 0.0);
        assert!(r.left.flatness.is_none());
        let w = dirichlet_weighted_gradient(&v).unwrap();
        assert_eq!(w.left, GradientRelation::ZeroTrace);
    }

    #[test]
    fn thin_window_is_reported() {
        let s = order(0.75);
        let mesh = graded_mesh(-1.0, 1.0, 16, 1.0).unwrap();
        let v = SolveResult::from_nodal(&mesh, s, BoundaryCondition::Dirichlet, vec![0.0; 17]).unwrap();
        assert!(matches!(dirichlet_boundary_ratio(&v), Err(Error::WindowTooThin { .. })));
    }

    #[test]
    fn neumann_quotients_of_synthetic_data() {
        let s = order(0.8);
        let mesh = graded_mesh(-1.0, 1.0, 1024, 2.0).unwrap();
        let constant = SolveResult::from_nodal(&mesh, s, BoundaryCondition::Neumann, vec![2.0; 1025]).unwrap();
        let q = neumann_normal_derivative(&constant).unwrap();
        assert_eq!(q.left.first.value(), Some(0.0));
        assert_eq!(q.right.second.value(), Some(0.0));

        let g = s.boundary_exponent();
        let layer: Vec<f64> = (0..=1024).map(|j| mesh.node_delta(j).powf(g)).collect();
        let u = SolveResult::from_nodal(&mesh, s, BoundaryCondition::Neumann, layer).unwrap();
        let q = neumann_normal_derivative(&u).unwrap();
        match q.left.first {
            QuotientLimit::Divergent { exponent } => assert!((exponent - (2.0 * 0.8 - 2.0)).abs() < 1e-9),
            other => panic!("expected divergence, got {other:?}"),
        }
        let second = q.left.second.value().unwrap();
        assert!((second - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holder_examples() {
        let x: Vec<f64> = (0..=50).map(|k| k as f64 / 50.0).collect();
        assert!((holder_estimate(&x, &x, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(holder_estimate(&x, &vec![4.0; 51], 0.7).unwrap(), 0.0);
        let sq: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
        assert!((holder_estimate(&x, &sq, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(holder_estimate(&x, &x, 0.0).is_err());
    }

    #[test]
    fn classical_oracle_matches_closed_forms() {
        let mesh = graded_mesh(-1.0, 1.0, 64, 2.0).unwrap();
        let u = classical_solution(&mesh, &ScalarField::constant(1.0), BoundaryCondition::Dirichlet).unwrap();
        for (x, v) in mesh.nodes().iter().zip(&u) {
            assert!((v - 0.5 * (1.0 - x * x)).abs() < 1e-12);
        }
        let u = classical_solution(&mesh, &ScalarField::new(|x| x), BoundaryCondition::Neumann).unwrap();
        let err = l2_distance_to(&mesh, &u, &|x| (3.0 * x - x * x * x) / 6.0).unwrap();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn zero_data_gives_zero_limit_errors() {
        let mesh = graded_mesh(-1.0, 1.0, 16, 2.0).unwrap();
        let rows = s_to_one_comparison(&ScalarField::constant(0.0), BoundaryCondition::Dirichlet, &[0.9, 0.99], &mesh).unwrap();
        assert!(rows.iter().all(|r| r.l2_error == 0.0));
    }
}
