//! Galerkin discretization of the regional bilinear form
//! `C(u, v) = c_{1,s}/2 ∫_Ω∫_Ω (u(x)−u(y))(v(x)−v(y))|x−y|^{−1−2s}`
//! on continuous piecewise-linear hats, with the Neumann (full space, mean-zero)
//! and censored Dirichlet (interior hats) problems.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::constants::{c_ns, FracOrder, Regime};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::GradedMesh;
use crate::quadrature::{gauss_legendre, integrate, integrate_with_breaks, QuadOptions};

/// Which variational problem a system or solution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCondition::Neumann => write!(f, "neumann"),
            BoundaryCondition::Dirichlet => write!(f, "dirichlet"),
        }
    }
}

/// Dense stiffness of the form over all nodal hats, plus an optional load.
#[derive(Debug, Clone)]
pub struct NonlocalSystem {
    pub mesh: GradedMesh,
    pub s: FracOrder,
    pub bc: BoundaryCondition,
    pub stiffness: DMatrix<f64>,
    pub load: Option<DVector<f64>>,
    pub assembly_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    /// Relative residual of the solved linear system.
    pub solver_residual: f64,
    /// Dirichlet: largest endpoint magnitude; Neumann: |mean of the interpolant|.
    pub constraint_residual: f64,
}

/// Nodal values of a discrete solution together with its provenance.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub values: Vec<f64>,
    pub bc: BoundaryCondition,
    pub s: FracOrder,
    pub mesh: GradedMesh,
    pub diagnostics: Diagnostics,
}

impl SolveResult {
    /// Wraps externally supplied nodal data (synthetic probes, tests).
    pub fn from_nodal(mesh: &GradedMesh, s: FracOrder, bc: BoundaryCondition, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: mesh.n_nodes(),
                got: values.len(),
            });
        }
        Ok(Self {
            values,
            bc,
            s,
            mesh: mesh.clone(),
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Mean of the piecewise-linear interpolant over the interval.
    pub fn mean(&self) -> f64 {
        let m = hat_masses(&self.mesh);
        let (a, b) = self.mesh.bounds();
        m.iter().zip(&self.values).map(|(w, v)| w * v).sum::<f64>() / (b - a)
    }
}

/// `∫ φ_i` for every nodal hat.
pub fn hat_masses(mesh: &GradedMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.n_nodes()];
    for k in 0..mesh.n_elements() {
        let h = mesh.element_size(k);
        m[k] += 0.5 * h;
        m[k + 1] += 0.5 * h;
    }
    m
}

/// Target relative accuracy of each element-pair contribution.
const PAIR_TOL: f64 = 1e-13;

/// Gauss order for a well-separated pair: the kernel is analytic in a Bernstein
/// ellipse of parameter `ρ = a + √(a²−1)`, `a = 1 + 2·gap/size`.
fn separated_order(gap: f64, size: f64) -> usize {
    let a = 1.0 + 2.0 * gap / size;
    let rho = a + (a * a - 1.0).sqrt();
    let q = ((1.0 / PAIR_TOL).ln() / (2.0 * rho.ln())).ceil() as usize;
    q.clamp(2, 16)
}

/// `∫_I∫_J d dᵀ |x−y|^{−p}`, `I` left of `J`, accumulated into `acc` (upper 4×4).
#[allow(clippy::too_many_arguments)]
fn separated_block(
    k: (f64, f64),
    l: (f64, f64),
    i: (f64, f64),
    j: (f64, f64),
    p: f64,
    acc: &mut [[f64; 4]; 4],
) {
    let (hi, hj) = (i.1 - i.0, j.1 - j.0);
    let gap = j.0 - i.1;
    if gap < hi.max(hj) {
        if hi >= hj {
            let m = 0.5 * (i.0 + i.1);
            separated_block(k, l, (i.0, m), j, p, acc);
            separated_block(k, l, (m, i.1), j, p, acc);
        } else {
            let m = 0.5 * (j.0 + j.1);
            separated_block(k, l, i, (j.0, m), p, acc);
            separated_block(k, l, i, (m, j.1), p, acc);
        }
        return;
    }
    let rule = gauss_legendre(separated_order(gap, hi.max(hj)));
    let (hk, hl) = (k.1 - k.0, l.1 - l.0);
    let (ci, ri) = (0.5 * (i.0 + i.1), 0.5 * hi);
    let (cj, rj) = (0.5 * (j.0 + j.1), 0.5 * hj);
    for (&xn, &wx) in rule.nodes.iter().zip(&rule.weights) {
        let x = ci + ri * xn;
        let d0 = (k.1 - x) / hk;
        let d1 = (x - k.0) / hk;
        for (&yn, &wy) in rule.nodes.iter().zip(&rule.weights) {
            let y = cj + rj * yn;
            let w = wx * wy * ri * rj * (y - x).powf(-p);
            let d = [d0, d1, -(l.1 - y) / hl, -(y - l.0) / hl];
            for a in 0..4 {
                let wa = w * d[a];
                for b in a..4 {
                    acc[a][b] += wa * d[b];
                }
            }
        }
    }
}

/// `∫_0^r t^b (1+t)^{−p} dt`.
fn ratio_moment(b: i32, r: f64, p: f64) -> Result<f64> {
    let opts = QuadOptions::new(0.0, 1e-13);
    let f = |t: f64| t.powi(b) * (1.0 + t).powf(-p);
    if r <= 1.0 {
        return Ok(integrate(f, 0.0, r, opts)?.value);
    }
    let mut breaks = Vec::new();
    let mut q = 1.0;
    while q < r {
        breaks.push(q);
        q *= 2.0;
    }
    Ok(integrate_with_breaks(f, 0.0, r, &breaks, opts)?.value)
}

/// Local 3×3 block of two elements sharing a node: Duffy split of the square
/// `[0,h1]×[0,h2]` in the distances `ξ, η` from the shared node.
fn touching_block(h1: f64, h2: f64, s: f64) -> Result<[[f64; 3]; 3]> {
    let p = 1.0 + 2.0 * s;
    let e = 3.0 - 2.0 * s;
    let r = h2 / h1;
    let f1 = h1.powf(e) / e;
    let f2 = h2.powf(e) / e;
    // J_ab = ∫∫ ξ^a η^b (ξ+η)^{−p}, a + b = 2.
    let j20 = f1 * ratio_moment(0, r, p)? + f2 * ratio_moment(2, 1.0 / r, p)?;
    let j11 = f1 * ratio_moment(1, r, p)? + f2 * ratio_moment(1, 1.0 / r, p)?;
    let j02 = f1 * ratio_moment(2, r, p)? + f2 * ratio_moment(0, 1.0 / r, p)?;
    let a = j20 / (h1 * h1);
    let m = j11 / (h1 * h2);
    let c = j02 / (h2 * h2);
    Ok([
        [a, m - a, -m],
        [m - a, c - 2.0 * m + a, m - c],
        [-m, m - c, c],
    ])
}

enum PairBlock {
    Same(f64),
    Touching([[f64; 3]; 3]),
    Separated([[f64; 4]; 4]),
}

/// Contributions of element `k` paired with every element `l ≥ k`, without the
/// constant `c_{1,s}`. The form's factor 1/2 cancels against the two orderings
/// of an off-diagonal pair and is kept only in the diagonal block.
fn element_row(mesh: &GradedMesh, k: usize, s: FracOrder) -> Result<Vec<PairBlock>> {
    let sv = s.get();
    let p = s.kernel_power();
    let n = mesh.n_elements();
    let ek = mesh.element(k);
    let hk = ek.1 - ek.0;
    let mut out = Vec::with_capacity(n - k);
    out.push(PairBlock::Same(
        hk.powf(1.0 - 2.0 * sv) / ((2.0 - 2.0 * sv) * (3.0 - 2.0 * sv)),
    ));
    if k + 1 < n {
        out.push(PairBlock::Touching(touching_block(hk, mesh.element_size(k + 1), sv)?));
    }
    for l in k + 2..n {
        let el = mesh.element(l);
        let mut acc = [[0.0; 4]; 4];
        separated_block(ek, el, ek, el, p, &mut acc);
        for a in 0..4 {
            for b in 0..a {
                acc[a][b] = acc[b][a];
            }
        }
        out.push(PairBlock::Separated(acc));
    }
    Ok(out)
}

/// Assembles the stiffness over all nodal hats. Element pairs are computed in
/// parallel; the scatter runs in a fixed order, so the result is bitwise
/// reproducible for any thread count.
pub fn assemble(mesh: &GradedMesh, s: FracOrder, bc: BoundaryCondition) -> Result<NonlocalSystem> {
    if bc == BoundaryCondition::Dirichlet && s.regime() != Regime::Supercritical {
        return Err(Error::DirichletOrder(s.get()));
    }
    let start = Instant::now();
    let n = mesh.n_elements();
    let c = c_ns(1, s);
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    let batch = 8 * rayon::current_num_threads().max(1);
    let elements: Vec<usize> = (0..n).collect();
    for chunk in elements.chunks(batch) {
        let rows: Vec<Vec<PairBlock>> = chunk
            .par_iter()
            .map(|&k| element_row(mesh, k, s))
            .collect::<Result<_>>()?;
        for (&k, row) in chunk.iter().zip(rows) {
            for (offset, block) in row.into_iter().enumerate() {
                let l = k + offset;
                match block {
                    PairBlock::Same(v) => {
                        a[(k, k)] += c * v;
                        a[(k + 1, k + 1)] += c * v;
                        a[(k, k + 1)] -= c * v;
                        a[(k + 1, k)] -= c * v;
                    }
                    PairBlock::Touching(m) => {
                        let dofs = [k, k + 1, k + 2];
                        for (ia, &i) in dofs.iter().enumerate() {
                            for (ib, &j) in dofs.iter().enumerate() {
                                a[(i, j)] += c * m[ia][ib];
                            }
                        }
                    }
                    PairBlock::Separated(m) => {
                        let dofs = [k, k + 1, l, l + 1];
                        for (ia, &i) in dofs.iter().enumerate() {
                            for (ib, &j) in dofs.iter().enumerate() {
                                a[(i, j)] += c * m[ia][ib];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(NonlocalSystem {
        mesh: mesh.clone(),
        s,
        bc,
        stiffness: a,
        load: None,
        assembly_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `∫_Ω f φ_i` for every nodal hat, element by element with adaptive Gauss–Kronrod.
pub fn load(mesh: &GradedMesh, f: &ScalarField) -> Result<DVector<f64>> {
    let mut b = DVector::<f64>::zeros(mesh.n_nodes());
    let breaks = f.breakpoints();
    for k in 0..mesh.n_elements() {
        let (x0, x1) = mesh.element(k);
        let h = x1 - x0;
        let opts = QuadOptions::new(1e-14 * h, 1e-12);
        let left = integrate_with_breaks(|x| f.eval(x) * (x1 - x) / h, x0, x1, breaks, opts)?;
        let right = integrate_with_breaks(|x| f.eval(x) * (x - x0) / h, x0, x1, breaks, opts)?;
        b[k] += left.value;
        b[k + 1] += right.value;
    }
    Ok(b)
}

/// `(∫_Ω f, ∫_Ω |f|)` by per-element adaptive quadrature.
fn integral_and_l1(mesh: &GradedMesh, f: &ScalarField) -> Result<(f64, f64)> {
    let mut total = 0.0;
    let mut l1 = 0.0;
    for k in 0..mesh.n_elements() {
        let (x0, x1) = mesh.element(k);
        let opts = QuadOptions::new(1e-15 * (x1 - x0), 1e-13);
        total += integrate_with_breaks(|x| f.eval(x), x0, x1, f.breakpoints(), opts)?.value;
        l1 += integrate_with_breaks(|x| f.eval(x).abs(), x0, x1, f.breakpoints(), opts)?.value;
    }
    Ok((total, l1))
}

/// `uᵀ A v`, the discrete form.
pub fn energy(sys: &NonlocalSystem, u: &[f64], v: &[f64]) -> Result<f64> {
    let n = sys.stiffness.nrows();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += sys.stiffness[(i, j)] * v[j];
        }
        total += u[i] * row;
    }
    Ok(total)
}

impl NonlocalSystem {
    pub fn with_load(mut self, f: &ScalarField) -> Result<Self> {
        self.load = Some(load(&self.mesh, f)?);
        Ok(self)
    }

    /// Solves the problem selected by `bc` with right-hand side `f`.
    pub fn solve(&self, f: &ScalarField) -> Result<SolveResult> {
        match self.bc {
            BoundaryCondition::Dirichlet => self.solve_dirichlet_load(&load(&self.mesh, f)?),
            BoundaryCondition::Neumann => {
                let (integral, l1) = integral_and_l1(&self.mesh, f)?;
                if integral.abs() > 1e-8 * l1 {
                    return Err(Error::Compatibility { integral, l1_norm: l1 });
                }
                self.solve_neumann_load(&load(&self.mesh, f)?)
            }
        }
    }

    /// Interior-hat Cholesky solve; endpoint values are exactly zero.
    pub fn solve_dirichlet_load(&self, b: &DVector<f64>) -> Result<SolveResult> {
        if self.s.regime() != Regime::Supercritical {
            return Err(Error::DirichletOrder(self.s.get()));
        }
        let start = Instant::now();
        let n = self.stiffness.nrows();
        let m = n - 2;
        let a = self.stiffness.view((1, 1), (m, m)).into_owned();
        let rhs = b.rows(1, m).into_owned();
        let chol = a
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SingularSystem("interior stiffness is not positive definite".into()))?;
        let mut x = chol.solve(&rhs);
        let r = &rhs - &a * &x;
        x += chol.solve(&r);
        let residual = relative_residual(&a, &x, &rhs);
        let mut values = vec![0.0; n];
        values[1..n - 1].copy_from_slice(x.as_slice());
        Ok(SolveResult {
            values,
            bc: BoundaryCondition::Dirichlet,
            s: self.s,
            mesh: self.mesh.clone(),
            diagnostics: Diagnostics {
                assembly_seconds: self.assembly_seconds,
                solve_seconds: start.elapsed().as_secs_f64(),
                solver_residual: residual,
                constraint_residual: 0.0,
            },
        })
    }

    /// Full-hat solve with the mean-zero constraint as a bordered system.
    pub fn solve_neumann_load(&self, b: &DVector<f64>) -> Result<SolveResult> {
        let start = Instant::now();
        let n = self.stiffness.nrows();
        let masses = hat_masses(&self.mesh);
        let mut k = DMatrix::<f64>::zeros(n + 1, n + 1);
        k.view_mut((0, 0), (n, n)).copy_from(&self.stiffness);
        for (i, &w) in masses.iter().enumerate() {
            k[(i, n)] = w;
            k[(n, i)] = w;
        }
        let mut rhs = DVector::<f64>::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(b);
        let lu = k.clone().lu();
        let mut x = lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("bordered Neumann system is singular".into()))?;
        let r = &rhs - &k * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
        let residual = relative_residual(&k, &x, &rhs);
        let values: Vec<f64> = x.rows(0, n).iter().copied().collect();
        let (lo, hi) = self.mesh.bounds();
        let mean = masses.iter().zip(&values).map(|(w, v)| w * v).sum::<f64>() / (hi - lo);
        Ok(SolveResult {
            values,
            bc: BoundaryCondition::Neumann,
            s: self.s,
            mesh: self.mesh.clone(),
            diagnostics: Diagnostics {
                assembly_seconds: self.assembly_seconds,
                solve_seconds: start.elapsed().as_secs_f64(),
                solver_residual: residual,
                constraint_residual: mean.abs(),
            },
        })
    }
}

fn relative_residual(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = b - a * x;
    let scale = b.norm().max(a.norm() * x.norm());
    if scale == 0.0 {
        0.0
    } else {
        r.norm() / scale
    }
}

/// Censored Dirichlet problem `(−Δ)^s_Ω v = f`, `v = 0` on `∂Ω`, for `s > 1/2`.
pub fn solve_dirichlet(mesh: &GradedMesh, s: FracOrder, f: &ScalarField) -> Result<SolveResult> {
    assemble(mesh, s, BoundaryCondition::Dirichlet)?.solve(f)
}

/// Regional Neumann problem with compatible data, normalized to mean zero.
pub fn solve_neumann(mesh: &GradedMesh, s: FracOrder, f: &ScalarField) -> Result<SolveResult> {
    let (integral, l1) = integral_and_l1(mesh, f)?;
    if integral.abs() > 1e-8 * l1 {
        return Err(Error::Compatibility { integral, l1_norm: l1 });
    }
    assemble(mesh, s, BoundaryCondition::Neumann)?.solve(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::graded_mesh;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn constants_lie_in_the_kernel() {
        let mesh = graded_mesh(0.0, 1.0, 4, 1.0).unwrap();
        let sys = assemble(&mesh, order(0.75), BoundaryCondition::Neumann).unwrap();
        for i in 0..5 {
            let row: f64 = (0..5).map(|j| sys.stiffness[(i, j)]).sum();
            assert!(row.abs() < 1e-12, "row {i}: {row}");
        }
        let one = vec![1.0; 5];
        assert!(energy(&sys, &one, &one).unwrap().abs() < 1e-12);
    }

    #[test]
    fn stiffness_is_exactly_symmetric() {
        let mesh = graded_mesh(-1.0, 1.0, 16, 2.5).unwrap();
        let sys = assemble(&mesh, order(0.6), BoundaryCondition::Neumann).unwrap();
        assert_eq!(sys.stiffness, sys.stiffness.transpose());
    }

    #[test]
    fn energy_of_linear_function_matches_closed_form_and_double_quadrature() {
        let s = order(0.6);
        let mesh = graded_mesh(0.0, 1.0, 8, 1.5).unwrap();
        let sys = assemble(&mesh, s, BoundaryCondition::Neumann).unwrap();
        let u: Vec<f64> = mesh.nodes().to_vec();
        let e = energy(&sys, &u, &u).unwrap();
        let c = c_ns(1, s);
        // c/2 ∫∫ |x−y|^{1−2s} over the unit square.
        let closed = c / ((2.0 - 1.2) * (3.0 - 1.2));
        // Brute-force nested quadrature of the defining double integral.
        let opts = QuadOptions::new(1e-13, 1e-12);
        let outer = integrate(
            |x| {
                integrate_with_breaks(|y| if y == x { 0.0 } else { (x - y).abs().powf(-0.2) }, 0.0, 1.0, &[x], opts)
                    .unwrap()
                    .value
            },
            0.0,
            1.0,
            opts,
        )
        .unwrap();
        let brute = 0.5 * c * outer.value;
        assert!((e - closed).abs() < 1e-10 * closed, "{e} vs {closed}");
        assert!((e - brute).abs() < 1e-6 * brute, "{e} vs {brute}");
    }

    #[test]
    fn touching_block_rows_sum_to_zero() {
        let t = touching_block(0.3, 0.05, 0.7).unwrap();
        for row in t {
            let sum: f64 = row.iter().sum();
            assert!(sum.abs() < 1e-13 * row[0].abs().max(1.0));
        }
    }

    #[test]
    fn load_examples() {
        let mesh = graded_mesh(0.0, 1.0, 4, 1.0).unwrap();
        let b = load(&mesh, &ScalarField::constant(0.0)).unwrap();
        assert!(b.iter().all(|v| *v == 0.0));
        let b = load(&mesh, &ScalarField::constant(1.0)).unwrap();
        let h = 0.25;
        assert!((b[0] - h / 2.0).abs() < 1e-15 && (b[4] - h / 2.0).abs() < 1e-15);
        for i in 1..4 {
            assert!((b[i] - h).abs() < 1e-15);
        }
        // f(x) = x: ∫ x φ_i = h·x_i for interior nodes, h²/6 and h/2 − h²/6 at the ends.
        let b = load(&mesh, &ScalarField::new(|x| x)).unwrap();
        assert!((b[0] - h * h / 6.0).abs() < 1e-15);
        assert!((b[2] - h * 0.5).abs() < 1e-15);
        assert!((b[4] - (h / 2.0 - h * h / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_rejects_low_order() {
        let mesh = graded_mesh(0.0, 1.0, 4, 1.0).unwrap();
        for s in [0.3, 0.5] {
            assert!(matches!(
                assemble(&mesh, order(s), BoundaryCondition::Dirichlet),
                Err(Error::DirichletOrder(_))
            ));
        }
    }

    #[test]
    fn zero_data_gives_zero_solutions() {
        let mesh = graded_mesh(-1.0, 1.0, 16, 2.0).unwrap();
        let zero = ScalarField::constant(0.0);
        let v = solve_dirichlet(&mesh, order(0.75), &zero).unwrap();
        assert!(v.values.iter().all(|x| *x == 0.0));
        let u = solve_neumann(&mesh, order(0.4), &zero).unwrap();
        assert!(u.max_abs() == 0.0);
    }

    #[test]
    fn neumann_rejects_incompatible_data() {
        let mesh = graded_mesh(-1.0, 1.0, 8, 1.0).unwrap();
        assert!(matches!(
            solve_neumann(&mesh, order(0.75), &ScalarField::constant(1.0)),
            Err(Error::Compatibility { .. })
        ));
    }

    #[test]
    fn neumann_odd_data_gives_odd_mean_zero_solution() {
        let mesh = graded_mesh(-1.0, 1.0, 32, 2.0).unwrap();
        let u = solve_neumann(&mesh, order(0.75), &ScalarField::new(|x| x)).unwrap();
        let n = u.values.len();
        for i in 0..n {
            assert!((u.values[i] + u.values[n - 1 - i]).abs() < 1e-10 * u.max_abs());
        }
        assert!(u.diagnostics.constraint_residual < 1e-12);
        assert!(u.diagnostics.solver_residual < 1e-12);
    }

    #[test]
    fn dirichlet_solution_of_positive_data_is_positive() {
        let mesh = graded_mesh(-1.0, 1.0, 32, 4.0).unwrap();
        let v = solve_dirichlet(&mesh, order(0.75), &ScalarField::constant(1.0)).unwrap();
        let n = v.values.len();
        assert_eq!(v.values[0], 0.0);
        assert_eq!(v.values[n - 1], 0.0);
        assert!(v.values[1..n - 1].iter().all(|x| *x > 0.0));
        assert!(v.diagnostics.solver_residual < 1e-12);
    }
}
