//! Pointwise principal-value evaluation of the regional fractional Laplacian on
//! an interval or the half-line, and of the full fractional Laplacian on ℝ.
//!
//! The singular part `|y − x| < ε` is removed symmetrically and restored by a
//! Taylor expansion; the rest is split into a paired region (both sides folded
//! together), one-sided remainders, and closed-form power tails beyond `R`.

use crate::constants::{a_s, c_ns, FracOrder};
use crate::error::{Error, Result};
use crate::field::{PowerLaw, ScalarField};
use crate::mesh::Domain1D;
use crate::quadrature::{geometric_breaks, integrate_with_breaks, Estimate, QuadOptions};

pub use crate::field::omega_gamma;

const DEFAULT_EXCISION: f64 = 1e-3;
const CLUSTER_LEVELS: i32 = 24;

/// Numerical parameters of the principal-value quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    /// Excision radius; `None` selects `min(1e-3, dist/8)`.
    pub epsilon: Option<f64>,
    /// Absolute tolerance of each adaptive region.
    pub tol: f64,
    /// Radius beyond which declared power tails are integrated in closed form.
    pub tail_radius: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            epsilon: None,
            tol: 1e-11,
            tail_radius: 1e4,
        }
    }
}

impl QuadSpec {
    fn options(&self) -> QuadOptions {
        QuadOptions {
            abs_tol: self.tol,
            rel_tol: 1e-12,
            max_intervals: 8000,
        }
    }
}

/// `(−Δ)^s_Ω u(x) = c_{1,s} p.v.∫_Ω (u(x) − u(y))|x − y|^{−1−2s} dy`.
pub fn regional_flap(
    u: &ScalarField,
    dom: &Domain1D,
    x: f64,
    s: FracOrder,
    q: &QuadSpec,
) -> Result<Estimate> {
    let (lo, hi) = dom.bounds();
    if !(x > lo && x < hi) {
        return Err(Error::NearBoundary {
            x,
            distance: dom.delta(x).unwrap_or(0.0),
            required: 0.0,
        });
    }
    if let (Domain1D::Interval { a, b }, Some(eps)) = (dom, q.epsilon) {
        if eps >= 0.25 * (b - a) {
            return Err(Error::InvalidArgument(format!(
                "excision radius {eps} must be below a quarter of the domain length"
            )));
        }
    }
    Ok(pv_integral(u, lo, hi, x, s, q)?.scale(c_ns(1, s)))
}

/// Full fractional Laplacian `c_{1,s} p.v.∫_ℝ (u(x) − u(y))|x − y|^{−1−2s} dy`.
/// Unbounded support requires tail descriptors.
pub fn full_flap(u: &ScalarField, x: f64, s: FracOrder, q: &QuadSpec) -> Result<Estimate> {
    Ok(pv_integral(u, f64::NEG_INFINITY, f64::INFINITY, x, s, q)?.scale(c_ns(1, s)))
}

/// Full fractional Laplacian of the zero extension `u·1_{(0,∞)}` at `x > 0`.
///
/// The region `y < 0` is integrated numerically as part of the full-line
/// integral, so the result is independent of the closed-form killing term.
pub fn full_flap_zero_ext(u: &ScalarField, x: f64, s: FracOrder, q: &QuadSpec) -> Result<Estimate> {
    if !(x > 0.0) {
        return Err(Error::NearBoundary {
            x,
            distance: x.max(0.0),
            required: 0.0,
        });
    }
    if let Some(eps) = q.epsilon {
        if x < 4.0 * eps {
            return Err(Error::NearBoundary {
                x,
                distance: x,
                required: 4.0 * eps,
            });
        }
    }
    full_flap(&u.zero_extended(), x, s, q)
}

/// The killing potential `a_s x^{−2s}` of the half-line.
pub fn killing_potential(x: f64, s: FracOrder) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            range: "(0, inf)".into(),
        });
    }
    Ok(a_s(s) * x.powf(-2.0 * s.get()))
}

/// Break points clustering geometrically toward `p` inside `[lo, hi]`.
pub(crate) fn cluster_toward(lo: f64, hi: f64, p: f64, out: &mut Vec<f64>) {
    if !(p >= lo && p <= hi) {
        return;
    }
    for k in 1..=CLUSTER_LEVELS {
        let f = 0.5f64.powi(k);
        if p > lo {
            out.push(p - (p - lo) * f);
        }
        if p < hi {
            out.push(p + (hi - p) * f);
        }
    }
    if p > lo && p < hi {
        out.push(p);
    }
}

/// `p.v.∫_{lo}^{hi} (u(x) − u(y))|x − y|^{−1−2s} dy` without the normalizing constant.
fn pv_integral(u: &ScalarField, lo: f64, hi: f64, x: f64, s: FracOrder, q: &QuadSpec) -> Result<Estimate> {
    let two_s = 2.0 * s.get();
    let power = s.kernel_power();
    let r = q.tail_radius;
    if !(x.is_finite() && 4.0 * x.abs() < r) {
        return Err(Error::InvalidArgument(format!(
            "evaluation point {x} must lie well inside the tail radius {r}"
        )));
    }
    let dist_boundary = (x - lo).min(hi - x);
    if !(dist_boundary > 0.0) {
        return Err(Error::NearBoundary {
            x,
            distance: dist_boundary.max(0.0),
            required: 0.0,
        });
    }
    if let Some(eps) = q.epsilon {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("excision radius must be positive, got {eps}")));
        }
        if dist_boundary < 4.0 * eps {
            return Err(Error::NearBoundary {
                x,
                distance: dist_boundary,
                required: 4.0 * eps,
            });
        }
    }
    let field_breaks: Vec<f64> = u
        .breakpoints()
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p >= lo && *p <= hi)
        .collect();
    let dist_break = field_breaks
        .iter()
        .map(|p| (p - x).abs())
        .fold(f64::INFINITY, f64::min);
    if dist_break == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "evaluation point {x} coincides with a break point of the field"
        )));
    }
    let eps = q
        .epsilon
        .unwrap_or(DEFAULT_EXCISION)
        .min(dist_boundary / 8.0)
        .min(dist_break / 8.0);
    let opts = q.options();
    let ux = u.eval(x);

    // Paired region: h in [eps, rho], both sides folded.
    let rho = (x - lo).min(hi - x).min(0.5 * r);
    let mut pts = geometric_breaks(eps, rho);
    for &p in &field_breaks {
        cluster_toward(eps, rho, (p - x).abs(), &mut pts);
    }
    if rho == x - lo && lo.is_finite() {
        cluster_toward(eps, rho, rho, &mut pts);
    }
    if rho == hi - x && hi.is_finite() {
        cluster_toward(eps, rho, rho, &mut pts);
    }
    let mut total = integrate_with_breaks(
        |h| (2.0 * ux - u.eval(x + h) - u.eval(x - h)) * h.powf(-power),
        eps,
        rho,
        &pts,
        opts,
    )?;

    // Excised ball: -u'' e^{2-2s}/(2-2s) - u'''' e^{4-2s}/(12(4-2s)).
    let samples = [
        u.eval(x - 2.0 * eps),
        u.eval(x - eps),
        ux,
        u.eval(x + eps),
        u.eval(x + 2.0 * eps),
    ];
    let d2 = u.second_derivative(x).unwrap_or_else(|| {
        (-samples[0] + 16.0 * samples[1] - 30.0 * samples[2] + 16.0 * samples[3] - samples[4])
            / (12.0 * eps * eps)
    });
    let d4 = (samples[0] - 4.0 * samples[1] + 6.0 * samples[2] - 4.0 * samples[3] + samples[4])
        / eps.powi(4);
    let t2 = -d2 * eps.powf(2.0 - two_s) / (2.0 - two_s);
    let t4 = -d4 * eps.powf(4.0 - two_s) / (12.0 * (4.0 - two_s));
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rounding = 64.0 * f64::EPSILON * scale * eps.powf(-two_s);
    total += Estimate::new(t2 + t4, 0.1 * t4.abs() + rounding);

    // One-sided remainders inside the tail radius.
    let right_end = hi.min(r);
    if x + rho < right_end {
        let a = x + rho;
        let mut pts: Vec<f64> = geometric_breaks(rho, right_end - x).iter().map(|d| x + d).collect();
        for &p in &field_breaks {
            cluster_toward(a, right_end, p, &mut pts);
        }
        if hi.is_finite() {
            cluster_toward(a, right_end, right_end, &mut pts);
        }
        total += integrate_with_breaks(
            |y| (ux - u.eval(y)) * (y - x).powf(-power),
            a,
            right_end,
            &pts,
            opts,
        )?;
    }
    let left_end = lo.max(-r);
    if x - rho > left_end {
        let b = x - rho;
        let mut pts: Vec<f64> = geometric_breaks(rho, x - left_end).iter().map(|d| x - d).collect();
        for &p in &field_breaks {
            cluster_toward(left_end, b, p, &mut pts);
        }
        if lo.is_finite() {
            cluster_toward(left_end, b, left_end, &mut pts);
        }
        total += integrate_with_breaks(
            |y| (ux - u.eval(y)) * (x - y).powf(-power),
            left_end,
            b,
            &pts,
            opts,
        )?;
    }

    // Closed-form tails beyond the radius.
    if hi > r {
        let law = tail_law(u, "right", u.support().1 > r, u.right_tail())?;
        total += power_tail(ux, x, r, s, law)?;
    }
    if lo < -r {
        let law = tail_law(u, "left", u.support().0 < -r, u.left_tail())?;
        total += power_tail(ux, -x, r, s, law)?;
    }
    Ok(total)
}

fn tail_law(
    _u: &ScalarField,
    side: &'static str,
    unbounded: bool,
    law: Option<PowerLaw>,
) -> Result<PowerLaw> {
    if !unbounded {
        return Ok(PowerLaw::new(0.0, 0.0));
    }
    law.ok_or(Error::TailMissing { side })
}

/// `∫_R^∞ (u_x − C y^γ)(y − x)^{−1−2s} dy` with the binomial series of the kernel.
fn power_tail(ux: f64, x: f64, r: f64, s: FracOrder, law: PowerLaw) -> Result<Estimate> {
    let two_s = 2.0 * s.get();
    let gamma = law.exponent;
    let constant = ux * (r - x).powf(-two_s) / two_s;
    if law.coef == 0.0 {
        return Ok(Estimate::new(constant, f64::EPSILON * constant.abs()));
    }
    if gamma >= two_s {
        return Err(Error::DivergentTail {
            exponent: gamma,
            limit: two_s,
        });
    }
    let ratio = x / r;
    let p = s.kernel_power();
    let mut coef = 1.0;
    let mut sum = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        if k > 0 {
            coef *= (p + kf - 1.0) / kf * ratio;
        }
        let term = coef / (two_s + kf - gamma);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    let power = law.coef * r.powf(gamma - two_s) * sum;
    let value = constant - power;
    Ok(Estimate::new(value, 4.0 * f64::EPSILON * (constant.abs() + power.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{hardy_constant, mu};

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn constant_field_is_annihilated() {
        let s = order(0.6);
        let q = QuadSpec::default();
        let one = ScalarField::constant(1.0);
        let dom = Domain1D::interval(-1.0, 2.0).unwrap();
        assert!(regional_flap(&one, &dom, 0.3, s, &q).unwrap().value.abs() < 1e-14);
        assert!(regional_flap(&one, &Domain1D::HalfLine, 3.0, s, &q).unwrap().value.abs() < 1e-12);
        assert!(full_flap(&one, 0.5, s, &q).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn harmonic_power_on_half_line() {
        let s = order(0.75);
        let u = omega_gamma(2.0 * s.get() - 1.0);
        let v = regional_flap(&u, &Domain1D::HalfLine, 1.0, s, &QuadSpec::default()).unwrap();
        assert!(v.value.abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn power_multiplier_on_half_line() {
        let s = order(0.75);
        let u = omega_gamma(0.3);
        let v = regional_flap(&u, &Domain1D::HalfLine, 2.0, s, &QuadSpec::default()).unwrap();
        let expected = -mu(0.3, s).unwrap() * 2f64.powf(0.3 - 1.5);
        assert!((v.value - expected).abs() < 1e-8, "{} vs {expected}", v.value);
    }

    #[test]
    fn killing_of_the_indicator() {
        for s in [0.3, 0.5, 0.8] {
            let s = order(s);
            let v = full_flap_zero_ext(&omega_gamma(0.0), 2.0, s, &QuadSpec::default()).unwrap();
            let expected = a_s(s) * 2f64.powf(-2.0 * s.get());
            assert!((v.value - expected).abs() < 1e-9, "{} vs {expected}", v.value);
        }
    }

    #[test]
    fn hardy_power_has_hardy_multiplier() {
        for s in [0.3, 0.75] {
            let s = order(s);
            let u = omega_gamma(s.get() - 0.5);
            let v = full_flap_zero_ext(&u, 1.0, s, &QuadSpec::default()).unwrap();
            assert!((v.value - hardy_constant(s)).abs() < 1e-8, "{} vs {}", v.value, hardy_constant(s));
        }
    }

    #[test]
    fn far_from_support_is_a_plain_integral() {
        let s = order(0.6);
        let u = ScalarField::compact(|y| (y - 1.0) * (2.0 - y), 1.0, 2.0);
        let v = full_flap_zero_ext(&u, 10.0, s, &QuadSpec::default()).unwrap();
        let direct = crate::quadrature::integrate(
            |y| (y - 1.0) * (2.0 - y) * (10.0 - y).powf(-2.2),
            1.0,
            2.0,
            QuadOptions::default(),
        )
        .unwrap();
        let expected = -c_ns(1, s) * direct.value;
        assert!((v.value - expected).abs() < 1e-12);
    }

    #[test]
    fn gaussian_has_closed_form() {
        // (−Δ)^s e^{−x²} at 0 equals 4^s Γ(s+1/2)/√π.
        let cases = [(0.6, 1.23310975212464880), (0.8, 1.53494682149731255)];
        for (s, expected) in cases {
            let u = ScalarField::new(|y| (-y * y).exp())
                .with_second_derivative(|y| (4.0 * y * y - 2.0) * (-y * y).exp())
                .with_left_tail(PowerLaw::new(0.0, 0.0))
                .with_right_tail(PowerLaw::new(0.0, 0.0));
            let v = full_flap(&u, 0.0, order(s), &QuadSpec::default()).unwrap();
            assert!((v.value - expected).abs() < 1e-8, "{} vs {expected}", v.value);
        }
    }

    #[test]
    fn refuses_near_boundary() {
        let s = order(0.6);
        let dom = Domain1D::interval(0.0, 1.0).unwrap();
        let q = QuadSpec {
            epsilon: Some(1e-3),
            ..QuadSpec::default()
        };
        let u = ScalarField::constant(1.0);
        assert!(matches!(
            regional_flap(&u, &dom, 0.002, s, &q),
            Err(Error::NearBoundary { .. })
        ));
        assert!(regional_flap(&u, &dom, 0.0, s, &QuadSpec::default()).is_err());
    }

    #[test]
    fn missing_or_divergent_tail() {
        let s = order(0.6);
        let u = ScalarField::new(|y: f64| y.cos());
        assert!(matches!(
            regional_flap(&u, &Domain1D::HalfLine, 1.0, s, &QuadSpec::default()),
            Err(Error::TailMissing { .. })
        ));
        let u = omega_gamma(1.5);
        assert!(matches!(
            regional_flap(&u, &Domain1D::HalfLine, 1.0, s, &QuadSpec::default()),
            Err(Error::DivergentTail { .. })
        ));
    }

    #[test]
    fn killing_potential_examples() {
        let s = order(0.5);
        assert!((killing_potential(2.0, s).unwrap() - 0.5 / std::f64::consts::PI).abs() < 1e-15);
        let s = order(0.7);
        assert!((killing_potential(1.0, s).unwrap() - a_s(s)).abs() < 1e-15);
        assert!(killing_potential(0.0, s).is_err());
    }
}
