//! Normalizing constants of the one-dimensional fractional Laplacian and the
//! half-line power multiplier `mu(gamma, s)`.
//!
//! Gamma is evaluated with `statrs` (Lanczos approximation, ~1e-15 relative).
//! `mu` is computed by exact term-wise integration of convergent series on the
//! two halves of (0, 1), so the zeros at `gamma = 0` and `gamma = 2s - 1` hold to
//! rounding.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// A fractional order `s` strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

/// Position of `s` relative to the critical value 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// s < 1/2: `H^s = H^s_0` on bounded intervals.
    Subcritical,
    /// s = 1/2.
    Critical,
    /// s > 1/2: censored Dirichlet problem is well posed, boundary rate `2s - 1`.
    Supercritical,
}

impl FracOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s < 1.0 {
            Ok(Self(s))
        } else {
            Err(Error::InvalidOrder(s))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn regime(self) -> Regime {
        if self.0 < 0.5 {
            Regime::Subcritical
        } else if self.0 > 0.5 {
            Regime::Supercritical
        } else {
            Regime::Critical
        }
    }

    /// The Dirichlet boundary exponent `2s - 1`.
    #[inline]
    pub fn boundary_exponent(self) -> f64 {
        2.0 * self.0 - 1.0
    }

    /// Kernel exponent `1 + 2s` in one dimension.
    #[inline]
    pub(crate) fn kernel_power(self) -> f64 {
        1.0 + 2.0 * self.0
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl std::fmt::Display for FracOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `c_{N,s} = s 4^s Γ(N/2 + s) / (π^{N/2} Γ(1 - s))`.
pub fn c_ns(dim: u32, s: FracOrder) -> f64 {
    assert!(dim >= 1, "dimension must be positive");
    let s = s.get();
    let n2 = dim as f64 / 2.0;
    s * 4f64.powf(s) * gamma(n2 + s) / (PI.powf(n2) * gamma(1.0 - s))
}

/// Killing amplitude `a_s = c_{1,s} / (2s)`.
pub fn a_s(s: FracOrder) -> f64 {
    c_ns(1, s) / (2.0 * s.get())
}

/// Poisson-kernel normalizer `b_s = Γ(s + 1/2) / (√π Γ(s))`, the reciprocal of
/// `∫_R (1 + u²)^{-(1+2s)/2} du`.
pub fn b_s(s: FracOrder) -> f64 {
    let s = s.get();
    gamma(s + 0.5) / (PI.sqrt() * gamma(s))
}

/// Extension flux constant, fixed as `b_s / a_s`.
pub fn kappa_bar(s: FracOrder) -> f64 {
    b_s(s) / a_s(s)
}

/// Sharp half-line Hardy constant `Γ((2s+1)/2)² / π`.
pub fn hardy_constant(s: FracOrder) -> f64 {
    let g = gamma(s.get() + 0.5);
    g * g / PI
}

/// `γ_N`: the value of `c_{N,s} |B_1| / (2(1 - s))` at `s = 1 - 1e-8`.
///
/// `Γ(1 - s)(1 - s)` is rewritten as `Γ(2 - s)` to avoid the pole.
pub fn gamma_n_limit(dim: u32) -> f64 {
    assert!(dim >= 1, "dimension must be positive");
    let s = 1.0 - 1e-8;
    let n2 = dim as f64 / 2.0;
    let c_over = s * 4f64.powf(s) * gamma(n2 + s) / (PI.powf(n2) * gamma(2.0 - s));
    let ball = PI.powf(n2) / gamma(n2 + 1.0);
    c_over * ball / 2.0
}

const SERIES_TOL: f64 = 1e-18;
const SERIES_MAX_TERMS: usize = 400;

/// `μ(γ, s) = c_{1,s} ∫_0^1 (t^γ - 1)(1 - t^{2s-1-γ}) / (1 - t)^{1+2s} dt` for `γ ∈ (-1, 2s)`.
///
/// On [0, 1/2] the integrand is `(t^γ - t^{2s-1} - 1 + t^β)` times the binomial
/// series of `(1 - t)^{-1-2s}`; on [1/2, 1] the substitution `u = 1 - t` turns the
/// numerator into a power series in `u` starting at `u²`. Both series are
/// integrated term by term and converge like `2^{-k}`.
pub fn mu(gamma_exp: f64, s: FracOrder) -> Result<f64> {
    let sv = s.get();
    if !(gamma_exp > -1.0 && gamma_exp < 2.0 * sv) {
        return Err(Error::Domain {
            name: "gamma",
            value: gamma_exp,
            range: format!("(-1, {})", 2.0 * sv),
        });
    }
    Ok(c_ns(1, s) * (mu_head(gamma_exp, sv) + mu_tail(gamma_exp, sv)))
}

/// `∫_0^{1/2} (t^γ - t^{2s-1} - 1 + t^β)(1 - t)^{-1-2s} dt`.
fn mu_head(g: f64, s: f64) -> f64 {
    let beta = 2.0 * s - 1.0 - g;
    let powers = [(g, 1.0), (2.0 * s - 1.0, -1.0), (0.0, -1.0), (beta, 1.0)];
    let p = 1.0 + 2.0 * s;
    let mut coef = 1.0; // (p)_k / k!
    let mut sum = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let mut term = 0.0;
        for &(e, sign) in &powers {
            let q = e + kf + 1.0;
            term += sign * 0.5f64.powf(q) / q;
        }
        term *= coef;
        sum += term;
        if k > 4 && term.abs() <= SERIES_TOL * sum.abs().max(1.0) {
            break;
        }
        coef *= (p + kf) / (kf + 1.0);
    }
    sum
}

/// `∫_0^{1/2} N(u) u^{-1-2s} du` with `N(u) = (1-u)^γ - (1-u)^{2s-1} - 1 + (1-u)^β`.
fn mu_tail(g: f64, s: f64) -> f64 {
    let beta = 2.0 * s - 1.0 - g;
    let a1 = 2.0 * s - 1.0;
    // Generalized binomial coefficients C(e, k), advanced in lockstep.
    let mut cg = 1.0;
    let mut ca = 1.0;
    let mut cb = 1.0;
    let mut sum = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        if k >= 2 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let n_k = sign * (cg - ca + cb);
            let q = kf - 2.0 * s;
            let term = n_k * 0.5f64.powf(q) / q;
            sum += term;
            if k > 6 && term.abs() <= SERIES_TOL * sum.abs().max(1.0) {
                break;
            }
        }
        cg *= (g - kf) / (kf + 1.0);
        ca *= (a1 - kf) / (kf + 1.0);
        cb *= (beta - kf) / (kf + 1.0);
    }
    sum
}

/// Every scalar constant for one `(N, s)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsBundle {
    pub dim: u32,
    pub s: FracOrder,
    pub c_ns: f64,
    pub a_s: f64,
    pub b_s: f64,
    pub kappa_bar: f64,
    pub hardy: f64,
}

impl ConstantsBundle {
    pub fn new(dim: u32, s: FracOrder) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let a = a_s(s);
        let b = b_s(s);
        Ok(Self {
            dim,
            s,
            c_ns: c_ns(dim, s),
            a_s: a,
            b_s: b,
            kappa_bar: b / a,
            hardy: hardy_constant(s),
        })
    }

    /// `μ((2s-1)/2, s)`, the half-line Hardy multiplier.
    pub fn mu_mid(&self) -> f64 {
        mu(self.s.boundary_exponent() / 2.0, self.s).expect("midpoint exponent is admissible")
    }

    /// `|a_s - μ((2s-1)/2, s) - Γ((2s+1)/2)²/π|`.
    pub fn identity_residual(&self) -> f64 {
        (self.a_s - self.mu_mid() - self.hardy).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_with_breaks, QuadOptions};
    use approx::assert_relative_eq;

    fn fo(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn order_rejects_endpoints() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(FracOrder::new(bad).is_err(), "{bad}");
        }
        assert_eq!(fo(0.3).regime(), Regime::Subcritical);
        assert_eq!(fo(0.5).regime(), Regime::Critical);
        assert_eq!(fo(0.7).regime(), Regime::Supercritical);
    }

    // Reference values from a 30-digit evaluation of the Gamma formulas.
    #[test]
    fn c_ns_reference_values() {
        assert_relative_eq!(c_ns(1, fo(0.5)), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(c_ns(2, fo(0.5)), 0.5 / PI, max_relative = 1e-13);
        assert_relative_eq!(c_ns(1, fo(0.75)), 0.299206710301074508, max_relative = 1e-13);
        assert_relative_eq!(c_ns(1, fo(0.3)), 0.230096381681632105, max_relative = 1e-13);
    }

    #[test]
    fn c_ns_over_one_minus_s_tends_to_two() {
        let s = 1.0 - 1e-6;
        let ratio = c_ns(1, fo(s)) / (1.0 - s);
        assert!((ratio - 2.0).abs() < 1e-5, "{ratio}");
    }

    #[test]
    fn a_b_kappa_reference_values() {
        assert_relative_eq!(a_s(fo(0.5)), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(a_s(fo(0.75)), 0.199471140200716339, max_relative = 1e-13);
        assert_relative_eq!(b_s(fo(0.5)), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(b_s(fo(0.75)), 0.417313420837036593, max_relative = 1e-13);
        assert_relative_eq!(kappa_bar(fo(0.5)), 1.0, max_relative = 1e-13);
        assert_relative_eq!(kappa_bar(fo(0.75)), 2.09209924010620330, max_relative = 1e-13);
        for s in [0.1, 0.3, 0.6, 0.9] {
            let s = fo(s);
            assert!(a_s(s) > 0.0);
            assert!((kappa_bar(s) * a_s(s) - b_s(s)).abs() <= 1e-15 * b_s(s));
        }
    }

    #[test]
    fn b_s_normalizes_poisson_kernel() {
        // ∫_R (1+u²)^{-(1+2s)/2} du via u = tan(φ) equals 2∫_0^{π/2} cos^{2s-1} φ dφ.
        for s in [0.3, 0.6, 0.9] {
            // ∫_0^{π/2} sin^e(u) du with u = v^m, m(e + 1) = 4.
            let e = 2.0 * s - 1.0;
            let m = 4.0 / (e + 1.0);
            let half = integrate_with_breaks(
                |v: f64| v.powf(m).sin().powf(e) * m * v.powf(m - 1.0),
                0.0,
                (PI / 2.0).powf(1.0 / m),
                &[],
                QuadOptions::new(1e-13, 1e-13),
            )
            .unwrap();
            assert_relative_eq!(b_s(fo(s)) * 2.0 * half.value, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn hardy_reference_values() {
        assert_relative_eq!(hardy_constant(fo(0.5)), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(hardy_constant(fo(0.75)), 0.261512405013275412, max_relative = 1e-13);
        let near_one = hardy_constant(fo(1.0 - 1e-9));
        assert!((near_one - 0.25).abs() < 1e-8);
    }

    #[test]
    fn mu_reference_values() {
        let m = mu(0.25, fo(0.75)).unwrap();
        assert_relative_eq!(m, -0.0620412648125590731, max_relative = 1e-11);
        let m = mu(0.3, fo(0.75)).unwrap();
        assert_relative_eq!(m, -0.0595963008296008743, max_relative = 1e-11);
        let m = mu(-0.5, fo(0.6)).unwrap();
        assert_relative_eq!(m, 0.436373723392907678, max_relative = 1e-11);
        let m = mu(-0.4, fo(0.3)).unwrap();
        assert_relative_eq!(m, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn mu_rejects_outside_window() {
        assert!(mu(-1.0, fo(0.6)).is_err());
        assert!(mu(1.2, fo(0.6)).is_err());
        assert!(mu(1.19, fo(0.6)).is_ok());
    }

    /// Independent route: adaptive Gauss–Kronrod on the defining integral, split at
    /// 1/2, with `t = v^m` near 0 and `t = 1 - τ²` near 1.
    fn mu_by_quadrature(g: f64, s: f64) -> f64 {
        let beta = 2.0 * s - 1.0 - g;
        let f = |t: f64| (t.powf(g) - 1.0) * (1.0 - t.powf(beta)) / (1.0 - t).powf(1.0 + 2.0 * s);
        let pmin = g.min(beta).min(0.0);
        let m = (4.0 / (pmin + 1.0)).max(1.0);
        let opts = QuadOptions::new(1e-13, 1e-13);
        let head = integrate_with_breaks(
            |v: f64| {
                if v == 0.0 {
                    return 0.0;
                }
                let t = v.powf(m);
                f(t) * m * v.powf(m - 1.0)
            },
            0.0,
            0.5f64.powf(1.0 / m),
            &[],
            opts,
        )
        .unwrap();
        // In u = 1 - t = τ², written without forming 1 - u.
        let near_one = |u: f64| {
            let l = (-u).ln_1p();
            (g * l).exp_m1() * -(beta * l).exp_m1() / u.powf(1.0 + 2.0 * s)
        };
        let tail = integrate_with_breaks(
            |tau: f64| {
                if tau == 0.0 {
                    return 0.0;
                }
                near_one(tau * tau) * 2.0 * tau
            },
            0.0,
            0.5f64.sqrt(),
            &[],
            opts,
        )
        .unwrap();
        c_ns(1, fo(s)) * (head.value + tail.value)
    }

    #[test]
    fn mu_series_matches_quadrature_oracle() {
        for &(g, s) in &[
            (0.25, 0.75),
            (0.3, 0.75),
            (-0.5, 0.6),
            (0.9, 0.6),
            (-0.2, 0.3),
            (0.1, 0.9),
            (1.5, 0.9),
        ] {
            let series = mu(g, fo(s)).unwrap();
            let oracle = mu_by_quadrature(g, s);
            assert!((series - oracle).abs() < 1e-9, "g={g} s={s}: {series} vs {oracle}");
        }
    }

    #[test]
    fn mu_zeros_on_fine_grid() {
        for i in 0..50 {
            let s = 0.01 + 0.98 * (i as f64 + 0.5) / 50.0;
            let s = fo(s);
            assert!(mu(0.0, s).unwrap().abs() <= 1e-8);
            assert!(mu(s.boundary_exponent(), s).unwrap().abs() <= 1e-8);
        }
    }

    #[test]
    fn mu_mid_sign() {
        assert!(mu(0.0, fo(0.5)).unwrap().abs() < 1e-14);
        for s in [0.2, 0.4, 0.6, 0.8, 0.95] {
            let s = fo(s);
            assert!(-ConstantsBundle::new(1, s).unwrap().mu_mid() > 0.0);
        }
        assert!(ConstantsBundle::new(1, fo(0.5)).unwrap().mu_mid().abs() < 1e-14);
    }

    #[test]
    fn gamma_n_limit_is_two() {
        for n in 1..=3 {
            assert!((gamma_n_limit(n) - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn bundle_identity() {
        for s in [0.3, 0.5, 0.6, 0.75, 0.9] {
            let b = ConstantsBundle::new(1, fo(s)).unwrap();
            assert!(b.identity_residual() <= 1e-8, "s={s}: {}", b.identity_residual());
        }
    }
}
