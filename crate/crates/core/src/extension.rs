//! Harmonic extension to the upper half-plane for the weight `t^{1−2s}`:
//!
//! `w(x, t) = b_s t^{2s} ∫ u(y) ((x−y)² + t²)^{−(1+2s)/2} dy`,
//!
//! evaluated in the subtracted form `w = c + b_s t^{2s} ∫ (u(y) − c) K dy` with
//! `c = u(x)`, folded around `x`, and closed-form power tails beyond `R`.

use crate::constants::{b_s, FracOrder};
use crate::error::{Error, Result};
use crate::field::{omega_gamma, PowerLaw, ScalarField};
use crate::operator::cluster_toward;
use crate::quadrature::{geometric_breaks, integrate_with_breaks, Estimate, JacobiRule, QuadOptions};

/// Radius beyond which declared power tails are used.
pub const EXTENSION_RADIUS: f64 = 1e4;

const TAIL_POINTS: usize = 24;
const FD_STEP: f64 = 0.01;
const FLUX_LEVELS: std::ops::RangeInclusive<i32> = 3..=12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub t: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite() && x.is_finite()) {
            return Err(Error::InvalidArgument(format!("half-plane point needs t > 0, got ({x}, {t})")));
        }
        Ok(Self { x, t })
    }

    /// `(r cos θ, r sin θ)` with `θ ∈ (0, π)`.
    pub fn polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(r * theta.cos(), r * theta.sin())
    }
}

/// Tolerances for `∫ (u − c) K`; the absolute floor is the rounding level of
/// `u(x ± h) − c` against a kernel of total mass `t^{−2s}/b_s`.
fn options(c: f64, t: f64, s: FracOrder) -> QuadOptions {
    let floor = 256.0 * f64::EPSILON * c.abs() * t.powf(-2.0 * s.get()) / b_s(s);
    QuadOptions {
        abs_tol: floor.max(1e-15),
        rel_tol: 1e-12,
        max_intervals: 8000,
    }
}

fn tail_for(u: &ScalarField, side: &'static str, s: FracOrder) -> Result<Option<PowerLaw>> {
    let (lo, hi) = u.support();
    let unbounded = if side == "right" { hi > EXTENSION_RADIUS } else { lo < -EXTENSION_RADIUS };
    if !unbounded {
        return Ok(None);
    }
    let law = if side == "right" { u.right_tail() } else { u.left_tail() };
    let law = law.ok_or(Error::TailMissing { side })?;
    if law.coef != 0.0 && law.exponent >= 2.0 * s.get() {
        return Err(Error::DivergentTail {
            exponent: law.exponent,
            limit: 2.0 * s.get(),
        });
    }
    Ok(Some(law))
}

/// `∫_R^∞ (C y^γ − c) ((y − x)² + t²)^{−(1+2s)/2} dy` with `v = R/y`.
fn power_tail(law: Option<PowerLaw>, c: f64, x: f64, t: f64, s: FracOrder) -> Result<f64> {
    let r = EXTENSION_RADIUS;
    let two_s = 2.0 * s.get();
    let p = 0.5 * (1.0 + two_s);
    let g = |v: f64| {
        let a = 1.0 - x * v / r;
        let b = t * v / r;
        (a * a + b * b).powf(-p)
    };
    let law = law.unwrap_or(PowerLaw::new(0.0, 0.0));
    if law.coef != 0.0 && law.exponent == 0.0 {
        let rule = JacobiRule::new(TAIL_POINTS, two_s - 1.0)?;
        return Ok((law.coef - c) * r.powf(-two_s) * rule.integrate_weighted(g, 1.0));
    }
    let mut total = 0.0;
    if law.coef != 0.0 {
        let rule = JacobiRule::new(TAIL_POINTS, two_s - 1.0 - law.exponent)?;
        total += law.coef * r.powf(law.exponent - two_s) * rule.integrate_weighted(g, 1.0);
    }
    if c != 0.0 {
        let rule = JacobiRule::new(TAIL_POINTS, two_s - 1.0)?;
        total -= c * r.powf(-two_s) * rule.integrate_weighted(g, 1.0);
    }
    Ok(total)
}

/// `b_s t^{2s} ∫ (u(y) − c) ((x−y)² + t²)^{−(1+2s)/2} dy`.
fn offset(u: &ScalarField, x: f64, t: f64, c: f64, s: FracOrder) -> Result<Estimate> {
    let r = EXTENSION_RADIUS;
    if !(4.0 * x.abs() < r && 4.0 * t < r) {
        return Err(Error::InvalidArgument(format!(
            "point ({x}, {t}) must lie well inside the tail radius {r}"
        )));
    }
    let right = tail_for(u, "right", s)?;
    let left = tail_for(u, "left", s)?;
    let p = 0.5 * (1.0 + 2.0 * s.get());
    let kernel = move |h: f64| (h * h + t * t).powf(-p);
    let opts = options(c, t, s);
    let breaks: Vec<f64> = u.breakpoints().iter().copied().filter(|b| b.is_finite()).collect();

    let rho = 0.5 * r;
    let mut pts = geometric_breaks(t / 256.0, rho);
    pts.push(t);
    for &b in &breaks {
        cluster_toward(0.0, rho, (b - x).abs(), &mut pts);
    }
    let mut total = integrate_with_breaks(
        |h| (u.eval(x + h) + u.eval(x - h) - 2.0 * c) * kernel(h),
        0.0,
        rho,
        &pts,
        opts,
    )?;
    for (a, b) in [(x + rho, r), (-r, x - rho)] {
        let mut pts = Vec::new();
        for &q in &breaks {
            cluster_toward(a, b, q, &mut pts);
        }
        total += integrate_with_breaks(|y| (u.eval(y) - c) * kernel(y - x), a, b, &pts, opts)?;
    }
    total += Estimate::exact(power_tail(right, c, x, t, s)?);
    total += Estimate::exact(power_tail(left, c, -x, t, s)?);
    Ok(total.scale(b_s(s) * t.powf(2.0 * s.get())))
}

/// The extension `w(x, t)`; tails must be declared for unbounded support and
/// grow slower than `|y|^{2s}`.
pub fn poisson_extend(u: &ScalarField, p: HalfPlanePoint, s: FracOrder) -> Result<Estimate> {
    let c = u.eval(p.x);
    let d = offset(u, p.x, p.t, c, s)?;
    Ok(Estimate::new(c + d.value, d.error))
}

/// Extension of `ω_γ = y^γ 1_{(0,∞)}`, `−1 < γ < 2s`.
pub fn w_gamma(gamma: f64, p: HalfPlanePoint, s: FracOrder) -> Result<Estimate> {
    if !(gamma > -1.0 && gamma < 2.0 * s.get()) {
        return Err(Error::Domain {
            name: "gamma",
            value: gamma,
            range: format!("(-1, {})", 2.0 * s.get()),
        });
    }
    poisson_extend(&omega_gamma(gamma), p, s)
}

/// Extrapolated weighted normal derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxEstimate {
    /// `lim_{t→0} t^{1−2s} ∂_t w(x₀, t)`.
    pub value: f64,
    pub error: f64,
    /// Exponent of the leading correction removed first.
    pub first_correction: f64,
    /// `(t, t^{1−2s} ∂_t w)` before extrapolation.
    pub samples: Vec<(f64, f64)>,
}

/// `lim t^{1−2s} ∂_t w(x₀, t)` from central differences with step `t/100` on
/// `t = 2^{−k}`, `k = 3..12`, Richardson-extrapolated in the exponents
/// `2−2s`, `2`, `4−2s`. The quotients are divided by the exact difference
/// factor of `t^{2s}` so the leading behaviour carries no step bias.
pub fn extension_flux(u: &ScalarField, x0: f64, s: FracOrder) -> Result<FluxEstimate> {
    let two_s = 2.0 * s.get();
    let c = u.eval(x0);
    let bias = ((1.0 + FD_STEP).powf(two_s) - (1.0 - FD_STEP).powf(two_s)) / (2.0 * FD_STEP * two_s);
    let mut samples = Vec::new();
    for k in FLUX_LEVELS.rev() {
        let t = 2f64.powi(-k);
        let h = FD_STEP * t;
        let plus = offset(u, x0, t + h, c, s)?.value;
        let minus = offset(u, x0, t - h, c, s)?.value;
        samples.push((t, t.powf(1.0 - two_s) * (plus - minus) / (2.0 * h) / bias));
    }
    // samples[i] is at t_i = 2^{-12+i}; coarser entries sit later.
    let mut column: Vec<f64> = samples.iter().map(|p| p.1).collect();
    let mut error = f64::INFINITY;
    for e in [2.0 - two_s, 2.0, 4.0 - two_s] {
        let f = 2f64.powf(e);
        let next: Vec<f64> = column.windows(2).map(|w| (f * w[0] - w[1]) / (f - 1.0)).collect();
        error = (next[0] - next[1]).abs();
        column = next;
    }
    let value = column[0];
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Extrapolation("non-finite flux samples".into()));
    }
    if error > 1e-2 * value.abs().max(1e-12) {
        return Err(Error::Extrapolation(format!(
            "flux extrapolation did not settle: value {value}, spread {error}"
        )));
    }
    Ok(FluxEstimate {
        value,
        error,
        first_correction: 2.0 - two_s,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::w0_angular_profile;
    use crate::constants::{hardy_constant, kappa_bar};
    use crate::operator::{full_flap, QuadSpec};

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    fn bump() -> ScalarField {
        ScalarField::new(|y| (-y * y).exp())
            .with_second_derivative(|y| (4.0 * y * y - 2.0) * (-y * y).exp())
            .with_left_tail(PowerLaw::new(0.0, 0.0))
            .with_right_tail(PowerLaw::new(0.0, 0.0))
    }

    #[test]
    fn constant_extends_to_itself() {
        let s = order(0.6);
        for (x, t) in [(0.0, 1.0), (3.0, 0.01), (-2.0, 50.0)] {
            let w = poisson_extend(&ScalarField::constant(1.0), HalfPlanePoint::new(x, t).unwrap(), s).unwrap();
            assert!((w.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_has_unit_mass() {
        // A compactly supported 1 on a huge interval approximates the constant.
        let s = order(0.75);
        let u = ScalarField::compact(|_| 1.0, -1e3, 1e3);
        let w = poisson_extend(&u, HalfPlanePoint::new(0.0, 1.0).unwrap(), s).unwrap();
        let missing = 2.0 * b_s(s) * 1e3f64.powf(-1.5) / 1.5;
        assert!((w.value - (1.0 - missing)).abs() < 1e-6);
    }

    #[test]
    fn odd_data_vanish_on_the_axis() {
        let s = order(0.7);
        let u = ScalarField::new(|y| y * (-y * y).exp())
            .with_left_tail(PowerLaw::new(0.0, 0.0))
            .with_right_tail(PowerLaw::new(0.0, 0.0));
        let w = poisson_extend(&u, HalfPlanePoint::new(0.0, 0.3).unwrap(), s).unwrap();
        assert!(w.value.abs() < 1e-14);
    }

    #[test]
    fn indicator_extension_is_angular() {
        for s in [0.3, 0.75] {
            let s = order(s);
            for theta in [0.3, 1.2, 2.5] {
                let w = w_gamma(0.0, HalfPlanePoint::polar(1.0, theta).unwrap(), s).unwrap().value;
                let w2 = w_gamma(0.0, HalfPlanePoint::polar(7.0, theta).unwrap(), s).unwrap().value;
                let profile = w0_angular_profile(theta, s).unwrap();
                assert!((w - profile).abs() < 1e-8, "{w} vs {profile}");
                assert!((w - w2).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn w_gamma_is_homogeneous() {
        let s = order(0.75);
        let gamma = 0.25;
        for (x, t) in [(0.5, 0.2), (-0.3, 1.0)] {
            let base = w_gamma(gamma, HalfPlanePoint::new(x, t).unwrap(), s).unwrap().value;
            for l in [2.0, 5.0] {
                let scaled = w_gamma(gamma, HalfPlanePoint::new(l * x, l * t).unwrap(), s).unwrap().value;
                assert!((scaled - l.powf(gamma) * base).abs() < 1e-9 * scaled.abs().max(1.0));
            }
        }
    }

    #[test]
    fn w_gamma_trace() {
        let s = order(0.75);
        let w = w_gamma(0.25, HalfPlanePoint::new(2.0, 1e-6).unwrap(), s).unwrap().value;
        assert!((w - 2f64.powf(0.25)).abs() < 1e-6);
        assert!(w_gamma(1.5, HalfPlanePoint::new(1.0, 1.0).unwrap(), s).is_err());
    }

    #[test]
    fn tail_errors() {
        let s = order(0.6);
        let p = HalfPlanePoint::new(0.0, 1.0).unwrap();
        let untailed = ScalarField::new(|y| (-y * y).exp());
        assert!(matches!(poisson_extend(&untailed, p, s), Err(Error::TailMissing { .. })));
        let steep = ScalarField::new(|y| y.abs().powf(1.5))
            .with_left_tail(PowerLaw::new(1.0, 1.5))
            .with_right_tail(PowerLaw::new(1.0, 1.5));
        assert!(matches!(poisson_extend(&steep, p, s), Err(Error::DivergentTail { .. })));
        assert!(HalfPlanePoint::new(0.0, 0.0).is_err());
    }

    #[test]
    fn flux_of_constant_is_zero() {
        let f = extension_flux(&ScalarField::constant(2.0), 0.3, order(0.7)).unwrap();
        assert_eq!(f.value, 0.0);
    }

    #[test]
    fn flux_matches_fractional_laplacian() {
        for s in [0.6, 0.75, 0.8] {
            let s = order(s);
            let flux = extension_flux(&bump(), 0.0, s).unwrap();
            let flap = full_flap(&bump(), 0.0, s, &QuadSpec::default()).unwrap().value;
            let expected = -kappa_bar(s) * flap;
            assert!((flux.value - expected).abs() < 1e-4 * expected.abs(), "{} vs {expected}", flux.value);
        }
    }

    #[test]
    fn flux_of_hardy_power() {
        let s = order(0.75);
        let flux = extension_flux(&omega_gamma(s.get() - 0.5), 1.0, s).unwrap();
        let expected = -kappa_bar(s) * hardy_constant(s);
        assert!((flux.value - expected).abs() < 1e-4 * expected.abs(), "{} vs {expected}", flux.value);
    }
}
