//! Weighted Sturm–Liouville problem on `(0, π)` with weight `sin^{1−2s}θ`:
//!
//! `−(w ψ′)′ + ((1−2s)²/4) w ψ = λ w ψ`, `−lim_{θ→0} w ψ′ = b_s ψ(0)`, `ψ(π) = 0`,
//!
//! discretized by piecewise-linear elements on a grid graded toward both ends.
//! The weak form is `∫ w ψ′φ′ + ((1−2s)²/4) ∫ w ψφ − b_s ψ(0)φ(0) = λ ∫ w ψφ`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::constants::{b_s, FracOrder};
use crate::error::{Error, Result};
use crate::mesh::graded_mesh;
use crate::quadrature::{gauss_legendre, JacobiRule};

/// Grid grading toward `0` and `π`.
pub const ANGULAR_GRADING: f64 = 2.0;

/// Default grid size used by [`gap_check`].
pub const DEFAULT_ANGULAR_N: usize = 512;

const JACOBI_POINTS: usize = 24;
const LEGENDRE_POINTS: usize = 16;

#[derive(Debug, Clone)]
pub struct AngularProblem {
    pub s: FracOrder,
    /// Nodes `0 = θ_0 < … < θ_n = π`.
    pub grid: Vec<f64>,
    /// `κ̄_s a_s = b_s`.
    pub flux_constant: f64,
    /// `(1−2s)²/4`.
    pub zeroth_order: f64,
    /// Pencil on the nodes `θ_0 … θ_{n−1}` (the Dirichlet node at `π` is removed).
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    /// Nodal values on the full grid, `ψ(π) = 0`, `∫ w ψ² = 1`, `ψ(0) ≥ 0`.
    pub psi: Vec<f64>,
}

/// `∫_{lo}^{hi} sin(u)^e h(u) du` for `0 ≤ lo < hi ≤ π/2`.
fn sine_weighted<H: Fn(f64) -> f64>(lo: f64, hi: f64, e: f64, jac: &JacobiRule, h: H) -> f64 {
    let smooth = |u: f64| {
        let r = if u == 0.0 { 1.0 } else { u.sin() / u };
        r.powf(e) * h(u)
    };
    if lo < hi - lo {
        let upper = jac.integrate_weighted(smooth, hi);
        let lower = if lo > 0.0 {
            jac.integrate_weighted(smooth, lo)
        } else {
            0.0
        };
        upper - lower
    } else {
        gauss_legendre(LEGENDRE_POINTS).integrate(|u| u.sin().powf(e) * h(u), lo, hi)
    }
}

/// `[∫ w, ∫ w t, ∫ w t²]` over `[a, b]` with `t = (θ−a)/(b−a)`.
fn element_moments(a: f64, b: f64, e: f64, jac: &JacobiRule) -> [f64; 3] {
    let len = b - a;
    let mut out = [0.0; 3];
    for (k, m) in out.iter_mut().enumerate() {
        *m = if b <= FRAC_PI_2 + 1e-15 {
            sine_weighted(a, b.min(FRAC_PI_2), e, jac, |u| ((u - a) / len).powi(k as i32))
        } else {
            // Mirror: u = π − θ.
            sine_weighted((PI - b).max(0.0), PI - a, e, jac, |u| ((PI - u - a) / len).powi(k as i32))
        };
    }
    out
}

/// Assembles the angular pencil on `n` elements.
pub fn assemble_angular(s: FracOrder, n: usize) -> Result<AngularProblem> {
    if n < 32 {
        return Err(Error::InvalidArgument(format!("angular grid needs n >= 32, got {n}")));
    }
    let n = n + n % 2;
    let grid = graded_mesh(0.0, PI, n, ANGULAR_GRADING)?.nodes().to_vec();
    let e = 1.0 - 2.0 * s.get();
    let zeroth = e * e / 4.0;
    let flux = b_s(s);
    let jac = JacobiRule::new(JACOBI_POINTS, e)?;

    let mut k_full = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut m_full = DMatrix::<f64>::zeros(n + 1, n + 1);
    for k in 0..n {
        let (a, b) = (grid[k], grid[k + 1]);
        let h = b - a;
        let [m0, m1, m2] = element_moments(a, b, e, &jac);
        let mass = [[m0 - 2.0 * m1 + m2, m1 - m2], [m1 - m2, m2]];
        let stiff = m0 / (h * h);
        for i in 0..2 {
            for j in 0..2 {
                let sign = if i == j { 1.0 } else { -1.0 };
                m_full[(k + i, k + j)] += mass[i][j];
                k_full[(k + i, k + j)] += sign * stiff + zeroth * mass[i][j];
            }
        }
    }
    k_full[(0, 0)] -= flux;
    Ok(AngularProblem {
        s,
        grid,
        flux_constant: flux,
        zeroth_order: zeroth,
        stiffness: k_full.view((0, 0), (n, n)).into_owned(),
        mass: m_full.view((0, 0), (n, n)).into_owned(),
    })
}

impl AngularProblem {
    pub fn n_elements(&self) -> usize {
        self.grid.len() - 1
    }

    fn reduced(&self, psi: &[f64]) -> Result<DVector<f64>> {
        if psi.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                got: psi.len(),
            });
        }
        Ok(DVector::from_column_slice(&psi[..psi.len() - 1]))
    }

    /// `ψᵀKψ / ψᵀMψ` for nodal data vanishing at `π`.
    pub fn rayleigh_quotient(&self, psi: &[f64]) -> Result<f64> {
        let v = self.reduced(psi)?;
        Ok(v.dot(&(&self.stiffness * &v)) / v.dot(&(&self.mass * &v)))
    }

}

/// First `k` eigenpairs in ascending order.
pub fn eigenpairs(problem: &AngularProblem, k: usize) -> Result<Vec<EigenPair>> {
    let n = problem.n_elements();
    if k == 0 || k > n / 4 {
        return Err(Error::InvalidArgument(format!("k must lie in 1..={}, got {k}", n / 4)));
    }
    let chol = problem.mass.clone().cholesky().ok_or_else(|| Error::Eigen("mass matrix not positive definite".into()))?;
    let l = chol.l();
    let a = l.solve_lower_triangular(&problem.stiffness).ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let c = l.solve_lower_triangular(&a.transpose()).ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, 0).ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    order
        .into_iter()
        .take(k)
        .map(|i| {
            let y = eig.eigenvectors.column(i).into_owned();
            let v = lt.solve_upper_triangular(&y).ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
            // Back-substitution through the graded mass matrix loses a few
            // digits; the Rayleigh quotient of the recovered vector does not.
            let norm = v.dot(&(&problem.mass * &v)).sqrt();
            let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
            let mut psi: Vec<f64> = v.iter().map(|x| sign * x / norm).collect();
            psi.push(0.0);
            Ok(EigenPair {
                lambda: problem.rayleigh_quotient(&psi)?,
                psi,
            })
        })
        .collect()
}

/// Outcome of `(2s−1)/2 + √λ₂ ≥ 2s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCheck {
    pub lambda1: f64,
    pub lambda2: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Evaluates the spectral gap inequality at the default resolution.
pub fn gap_check(s: FracOrder) -> Result<GapCheck> {
    gap_check_with(s, DEFAULT_ANGULAR_N)
}

pub fn gap_check_with(s: FracOrder, n: usize) -> Result<GapCheck> {
    let pairs = eigenpairs(&assemble_angular(s, n)?, 2)?;
    let sv = s.get();
    let margin = (2.0 * sv - 1.0) / 2.0 + pairs[1].lambda.max(0.0).sqrt() - 2.0 * sv;
    Ok(GapCheck {
        lambda1: pairs[0].lambda,
        lambda2: pairs[1].lambda,
        margin,
        holds: margin >= 0.0,
    })
}

/// `∫_0^L sin^{2s−1}` for `L ∈ [0, π]`.
fn sine_power_integral(len: f64, s: FracOrder, jac: &JacobiRule) -> f64 {
    let e = 2.0 * s.get() - 1.0;
    let piece = |l: f64| {
        if l <= 0.0 {
            return 0.0;
        }
        jac.integrate_weighted(|u| if u == 0.0 { 1.0 } else { (u.sin() / u).powf(e) }, l)
    };
    if len <= FRAC_PI_2 {
        piece(len)
    } else {
        1.0 / b_s(s) - piece(PI - len)
    }
}

/// `ŵ₀(θ) = b_s ∫_θ^π sin^{2s−1}`, the angular profile of the extension of the
/// indicator of the positive half-line; equal to 1 at `θ=0` and 0 at `θ=π`.
pub fn w0_angular_profile(theta: f64, s: FracOrder) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain {
            name: "theta",
            value: theta,
            range: "[0, π]".into(),
        });
    }
    if theta == 0.0 {
        return Ok(1.0);
    }
    if theta == PI {
        return Ok(0.0);
    }
    let jac = JacobiRule::new(30, 2.0 * s.get() - 1.0)?;
    Ok(b_s(s) * sine_power_integral(PI - theta, s, &jac))
}

/// `ŵ₀′(θ) = −b_s sin^{2s−1}θ`.
pub fn w0_angular_derivative(theta: f64, s: FracOrder) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain {
            name: "theta",
            value: theta,
            range: "(0, π)".into(),
        });
    }
    Ok(-b_s(s) * theta.sin().powf(2.0 * s.get() - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn pencil_is_symmetric_and_mass_definite() {
        for s in [0.3, 0.5, 0.75] {
            let p = assemble_angular(order(s), 64).unwrap();
            assert_eq!(p.stiffness, p.stiffness.transpose());
            assert_eq!(p.mass, p.mass.transpose());
            assert!(p.mass.clone().cholesky().is_some());
        }
    }

    #[test]
    fn half_order_has_unit_weight() {
        let p = assemble_angular(order(0.5), 32).unwrap();
        assert!((p.flux_constant - 1.0 / PI).abs() < 1e-15);
        assert_eq!(p.zeroth_order, 0.0);
        let total: f64 = p.mass.iter().sum::<f64>();
        // Σ M_ij = ∫ (1 − φ_n)² = π − 2h/3 with h the last element.
        let h_last = p.grid[32] - p.grid[31];
        assert!((total - (PI - 2.0 * h_last / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn first_eigenvalue_matches_closed_form() {
        for s in [0.3, 0.75, 0.9] {
            let pairs = eigenpairs(&assemble_angular(order(s), 256).unwrap(), 2).unwrap();
            let expected = (2.0 * s - 1.0f64).powi(2) / 4.0;
            assert!((pairs[0].lambda - expected).abs() < 1e-3, "s={s}: {}", pairs[0].lambda);
            assert!(pairs[1].lambda > pairs[0].lambda);
        }
    }

    #[test]
    fn half_order_spectrum() {
        let p = assemble_angular(order(0.5), 256).unwrap();
        let pairs = eigenpairs(&p, 2).unwrap();
        assert!(pairs[0].lambda.abs() < 1e-6);
        let psi = &pairs[0].psi;
        let ratio = psi[0] / PI;
        for (t, v) in p.grid.iter().zip(psi) {
            assert!((v - ratio * (PI - t)).abs() < 1e-8);
        }
        assert!((pairs[1].lambda.sqrt() - 1.430_296_653_124_202_8).abs() < 1e-3);
    }

    #[test]
    fn eigenvectors_are_normalized() {
        let p = assemble_angular(order(0.75), 128).unwrap();
        for pair in eigenpairs(&p, 3).unwrap() {
            let v = DVector::from_column_slice(&pair.psi[..128]);
            assert!((v.dot(&(&p.mass * &v)) - 1.0).abs() < 1e-10);
            assert_eq!(*pair.psi.last().unwrap(), 0.0);
            let rq = p.rayleigh_quotient(&pair.psi).unwrap();
            assert!((rq - pair.lambda).abs() < 1e-10, "{rq} {}", pair.lambda);
        }
    }

    #[test]
    fn argument_checks() {
        assert!(assemble_angular(order(0.75), 16).is_err());
        let p = assemble_angular(order(0.75), 32).unwrap();
        assert!(eigenpairs(&p, 9).is_err());
    }

    #[test]
    fn w0_profile_values() {
        for s in [0.3, 0.5, 0.75] {
            let s = order(s);
            assert!((w0_angular_profile(FRAC_PI_2, s).unwrap() - 0.5).abs() < 1e-13);
            assert_eq!(w0_angular_profile(0.0, s).unwrap(), 1.0);
            assert_eq!(w0_angular_profile(PI, s).unwrap(), 0.0);
            assert!((w0_angular_profile(1e-9, s).unwrap() - 1.0).abs() < 1e-5);
            assert!(w0_angular_profile(PI - 1e-9, s).unwrap() < 1e-5);
            let a = w0_angular_profile(0.7, s).unwrap();
            let b = w0_angular_profile(PI - 0.7, s).unwrap();
            assert!((a + b - 1.0).abs() < 1e-13);
        }
        assert!(w0_angular_profile(-0.1, order(0.5)).is_err());
    }

    #[test]
    fn w0_derivative_by_differences() {
        let s = order(0.8);
        let h = 1e-4;
        let mut t = 0.1;
        while t < PI - 0.1 {
            let fd = (w0_angular_profile(t + h, s).unwrap() - w0_angular_profile(t - h, s).unwrap()) / (2.0 * h);
            assert!((fd - w0_angular_derivative(t, s).unwrap()).abs() < 1e-6);
            t += 0.1;
        }
    }

    #[test]
    fn w0_rayleigh_quotient_converges() {
        for s in [0.3, 0.75] {
            let s = order(s);
            let lambda = (2.0 * s.get() - 1.0).powi(2) / 4.0;
            let mut prev = f64::INFINITY;
            for n in [64, 128, 256] {
                let p = assemble_angular(s, n).unwrap();
                let w: Vec<f64> = p.grid.iter().map(|&t| w0_angular_profile(t, s).unwrap()).collect();
                let gap = (p.rayleigh_quotient(&w).unwrap() - lambda).abs();
                assert!(gap < prev);
                prev = gap;
            }
            assert!(prev < 1e-3, "{prev}");
        }
    }
}
