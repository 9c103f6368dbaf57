//! Scalar fields on the real line, as consumed by the pointwise operators, the
//! Galerkin load assembly and the half-plane extension.

use std::fmt;
use std::sync::Arc;

type Callback = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Far-field law `u(y) = coef · |y|^exponent`, assumed exact beyond the tail radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn new(coef: f64, exponent: f64) -> Self {
        Self { coef, exponent }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coef * y.abs().powf(self.exponent)
    }
}

/// A re-entrant callback `x ↦ u(x)` with the metadata the quadratures need:
/// the support (the field vanishes outside it), points where it is not smooth,
/// an optional exact second derivative, and far-field laws for unbounded support.
#[derive(Clone)]
pub struct ScalarField {
    eval: Callback,
    second_derivative: Option<Callback>,
    support: (f64, f64),
    breakpoints: Vec<f64>,
    left_tail: Option<PowerLaw>,
    right_tail: Option<PowerLaw>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .field("left_tail", &self.left_tail)
            .field("right_tail", &self.right_tail)
            .field("has_second_derivative", &self.second_derivative.is_some())
            .finish()
    }
}

impl ScalarField {
    /// Field with unbounded support and no tail information.
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            second_derivative: None,
            support: (f64::NEG_INFINITY, f64::INFINITY),
            breakpoints: Vec::new(),
            left_tail: None,
            right_tail: None,
        }
    }

    /// Field vanishing outside `[lo, hi]`; the support ends are recorded as break points.
    pub fn compact<F>(f: F, lo: f64, hi: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        assert!(lo < hi, "empty support [{lo}, {hi}]");
        let mut field = Self::new(f);
        field.support = (lo, hi);
        field.breakpoints = vec![lo, hi];
        field
    }

    /// The constant function.
    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
            .with_second_derivative(|_| 0.0)
            .with_left_tail(PowerLaw::new(c, 0.0))
            .with_right_tail(PowerLaw::new(c, 0.0))
    }

    pub fn with_second_derivative<F>(mut self, d2: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.second_derivative = Some(Arc::new(d2));
        self
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty support [{lo}, {hi}]");
        self.support = (lo, hi);
        for p in [lo, hi] {
            if p.is_finite() && !self.breakpoints.contains(&p) {
                self.breakpoints.push(p);
            }
        }
        self
    }

    pub fn with_breakpoints(mut self, pts: &[f64]) -> Self {
        for &p in pts {
            if !self.breakpoints.contains(&p) {
                self.breakpoints.push(p);
            }
        }
        self
    }

    pub fn with_left_tail(mut self, law: PowerLaw) -> Self {
        self.left_tail = Some(law);
        self
    }

    pub fn with_right_tail(mut self, law: PowerLaw) -> Self {
        self.right_tail = Some(law);
        self
    }

    /// `u(x)`, zero outside the declared support.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            0.0
        } else {
            (self.eval)(x)
        }
    }

    pub fn second_derivative(&self, x: f64) -> Option<f64> {
        self.second_derivative.as_ref().map(|d| d(x))
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn left_tail(&self) -> Option<PowerLaw> {
        self.left_tail
    }

    pub fn right_tail(&self) -> Option<PowerLaw> {
        self.right_tail
    }

    /// Product with the indicator of `(0, ∞)`.
    pub fn zero_extended(&self) -> Self {
        let inner = self.clone();
        let lo = self.support.0.max(0.0);
        let mut out = ScalarField::new(move |y| if y > 0.0 { inner.eval(y) } else { 0.0 });
        out.support = (lo, self.support.1);
        out.breakpoints = self.breakpoints.iter().copied().filter(|&p| p > 0.0).collect();
        out.breakpoints.push(lo);
        if let Some(d2) = self.second_derivative.clone() {
            out.second_derivative = Some(d2);
        }
        out.right_tail = self.right_tail;
        out
    }

    /// `y ↦ α u(y) + β v(y)`; supports and break points are merged.
    pub fn linear_combination(alpha: f64, u: &ScalarField, beta: f64, v: &ScalarField) -> Self {
        let (uu, vv) = (u.clone(), v.clone());
        let mut out = ScalarField::new(move |y| alpha * uu.eval(y) + beta * vv.eval(y));
        out.support = (u.support.0.min(v.support.0), u.support.1.max(v.support.1));
        out.breakpoints = u.breakpoints.clone();
        for &p in &v.breakpoints {
            if !out.breakpoints.contains(&p) {
                out.breakpoints.push(p);
            }
        }
        if let (Some(du), Some(dv)) = (u.second_derivative.clone(), v.second_derivative.clone()) {
            out.second_derivative = Some(Arc::new(move |y| alpha * du(y) + beta * dv(y)));
        }
        out.left_tail = combine_tails(alpha, u.left_tail, u.support.0, beta, v.left_tail, v.support.0);
        out.right_tail =
            combine_tails(alpha, u.right_tail, -u.support.1, beta, v.right_tail, -v.support.1);
        out
    }

    /// `y ↦ u(y / λ)`, the dilation by `λ > 0`.
    pub fn dilated(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0);
        let inner = self.clone();
        let mut out = ScalarField::new(move |y| inner.eval(y / lambda));
        out.support = (self.support.0 * lambda, self.support.1 * lambda);
        out.breakpoints = self.breakpoints.iter().map(|p| p * lambda).collect();
        if let Some(d2) = self.second_derivative.clone() {
            out.second_derivative = Some(Arc::new(move |y| d2(y / lambda) / (lambda * lambda)));
        }
        let scale = |law: PowerLaw| PowerLaw::new(law.coef * lambda.powf(-law.exponent), law.exponent);
        out.left_tail = self.left_tail.map(scale);
        out.right_tail = self.right_tail.map(scale);
        out
    }
}

/// Tail of a linear combination. `bound` is `-inf` when the side is unbounded.
fn combine_tails(
    alpha: f64,
    a: Option<PowerLaw>,
    a_bound: f64,
    beta: f64,
    b: Option<PowerLaw>,
    b_bound: f64,
) -> Option<PowerLaw> {
    let a_unbounded = a_bound == f64::NEG_INFINITY;
    let b_unbounded = b_bound == f64::NEG_INFINITY;
    match (a_unbounded.then_some(a), b_unbounded.then_some(b)) {
        (None, None) => None,
        (Some(Some(la)), None) => Some(PowerLaw::new(alpha * la.coef, la.exponent)),
        (None, Some(Some(lb))) => Some(PowerLaw::new(beta * lb.coef, lb.exponent)),
        (Some(Some(la)), Some(Some(lb))) if la.exponent == lb.exponent => {
            Some(PowerLaw::new(alpha * la.coef + beta * lb.coef, la.exponent))
        }
        _ => None,
    }
}

/// `ω_γ(x) = x^γ 1_{(0,∞)}(x)`, γ > -1, with its exact second derivative and power tail.
pub fn omega_gamma(gamma: f64) -> ScalarField {
    assert!(gamma > -1.0, "omega_gamma requires gamma > -1, got {gamma}");
    ScalarField::new(move |x| if x > 0.0 { x.powf(gamma) } else { 0.0 })
        .with_support(0.0, f64::INFINITY)
        .with_second_derivative(move |x| {
            if x > 0.0 {
                gamma * (gamma - 1.0) * x.powf(gamma - 2.0)
            } else {
                0.0
            }
        })
        .with_right_tail(PowerLaw::new(1.0, gamma))
}
