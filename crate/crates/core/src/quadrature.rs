//! Quadrature building blocks: fixed Gauss–Legendre and Gauss–Jacobi rules and a
//! globally adaptive Gauss–Kronrod (10/21) integrator with QUADPACK-style error
//! estimation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign};
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// A value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn scale(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.abs(),
        }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        self.value += rhs.value;
        self.error += rhs.error;
    }
}

/// Nodes and weights of an interpolatory rule on a reference interval.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies a rule defined on [-1, 1] to the interval [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

const MAX_CACHED_ORDER: usize = 64;

fn legendre_cache() -> &'static Vec<GaussRule> {
    static CACHE: OnceLock<Vec<GaussRule>> = OnceLock::new();
    CACHE.get_or_init(|| (0..=MAX_CACHED_ORDER).map(compute_gauss_legendre).collect())
}

/// Gauss–Legendre rule with `n` points on [-1, 1]. Rules up to order 64 are cached.
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    assert!(
        (1..=MAX_CACHED_ORDER).contains(&n),
        "Gauss-Legendre order {n} outside 1..={MAX_CACHED_ORDER}"
    );
    &legendre_cache()[n]
}

fn compute_gauss_legendre(n: usize) -> GaussRule {
    if n == 0 {
        return GaussRule {
            nodes: vec![],
            weights: vec![],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Jacobi rule on [0, 1] for the weight `x^alpha`, alpha > -1, via Golub–Welsch.
///
/// `integrate_weighted` then approximates `∫_0^L x^alpha g(x) dx`.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    pub alpha: f64,
    rule: GaussRule,
}

impl JacobiRule {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if alpha <= -1.0 || !alpha.is_finite() {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                range: "(-1, inf)".into(),
            });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("Gauss-Jacobi order must be positive".into()));
        }
        // Jacobi weight (1-x)^a (1+x)^b on [-1,1] with a = 0, b = alpha.
        let a = 0.0;
        let b = alpha;
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let diag = if k == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                let t = 2.0 * kf + a + b;
                (b * b - a * a) / (t * (t + 2.0))
            };
            jm[(k, k)] = diag;
            if k + 1 < n {
                let k1 = kf + 1.0;
                let t = 2.0 * k1 + a + b;
                let beta = if k == 0 {
                    4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
                } else {
                    4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b)
                        / (t * t * (t + 1.0) * (t - 1.0))
                };
                let off = beta.sqrt();
                jm[(k, k + 1)] = off;
                jm[(k + 1, k)] = off;
            }
        }
        let eig = SymmetricEigen::new(jm);
        // mu0 = ∫_{-1}^{1} (1+x)^b dx = 2^{b+1}/(b+1); mapping to [0,1] divides by 2^{b+1}.
        let mu0_unit = 1.0 / (b + 1.0);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let x = eig.eigenvalues[i];
                let v0 = eig.eigenvectors[(0, i)];
                (0.5 * (x + 1.0), mu0_unit * v0 * v0)
            })
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        Ok(Self {
            alpha,
            rule: GaussRule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            },
        })
    }

    /// Approximates `∫_0^len x^alpha g(x) dx`.
    pub fn integrate_weighted<F: FnMut(f64) -> f64>(&self, mut g: F, len: f64) -> f64 {
        let scale = len.powf(self.alpha + 1.0);
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(&t, &w)| w * g(len * t))
            .sum::<f64>()
            * scale
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.rule.weights
    }
}

/// Stopping criteria for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// One application of the 21-point Kronrod rule with its embedded 10-point Gauss rule.
pub fn gauss_kronrod_21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        err = f64::INFINITY;
    }
    Estimate { value, error: err }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`, starting from the given
/// interior break points (which need not be sorted; points outside are ignored).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::exact(0.0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut edges = Vec::with_capacity(pts.len() + 2);
    edges.push(lo);
    edges.extend(pts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = Estimate::default();
    for w in edges.windows(2) {
        let est = gauss_kronrod_21(&mut f, w[0], w[1]);
        if !est.value.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                a: w[0],
                b: w[1],
                value: est.value,
                error: f64::INFINITY,
                intervals: 0,
            });
        }
        total += est;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            est,
        });
    }
    // Segments too narrow to bisect further keep their error here.
    let mut frozen = Estimate::default();
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.value.abs());
        if total.error <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                a,
                b,
                value: total.value * sign,
                error: total.error,
                intervals: heap.len(),
            });
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 4.0 * f64::EPSILON * mid.abs() {
            frozen += worst.est;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = gauss_kronrod_21(&mut f, worst.a, mid);
        let right = gauss_kronrod_21(&mut f, mid, worst.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::QuadratureNonConvergence {
                a: worst.a,
                b: worst.b,
                value: left.value + right.value,
                error: f64::INFINITY,
                intervals: heap.len(),
            });
        }
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            est: right,
        });
    }
    // Re-sum in a fixed order so the result does not depend on heap history.
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = frozen.value;
    let mut error = frozen.error;
    for s in &segs {
        value += s.est.value;
        error += s.est.error;
    }
    if !value.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            a,
            b,
            value,
            error,
            intervals: segs.len(),
        });
    }
    Ok(Estimate::new(sign * value, error))
}

/// Globally adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Estimate> {
    integrate_with_breaks(f, a, b, &[], opts)
}

/// Split points `lo, lo*2, lo*4, ...` up to `hi` (both positive) for integrands
/// that vary on a scale proportional to the distance from the origin.
pub fn geometric_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    if !(lo > 0.0 && hi > lo) {
        return pts;
    }
    let mut p = lo * 2.0;
    while p < hi {
        pts.push(p);
        p *= 2.0;
    }
    pts
}
