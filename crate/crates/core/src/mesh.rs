//! Computational domains, boundary distance and boundary-graded 1D meshes.

use crate::constants::FracOrder;
use crate::error::{Error, Result};

/// An interval `(a, b)` or the half-line `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain1D {
    Interval { a: f64, b: f64 },
    HalfLine,
}

impl Domain1D {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("empty or unbounded interval ({a}, {b})")));
        }
        Ok(Domain1D::Interval { a, b })
    }

    /// Lower and upper end; `b = +inf` for the half-line.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Domain1D::Interval { a, b } => (a, b),
            Domain1D::HalfLine => (0.0, f64::INFINITY),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (a, b) = self.bounds();
        x > a && x < b
    }

    /// Distance to the boundary, defined on the closure of the domain.
    pub fn delta(&self, x: f64) -> Result<f64> {
        let (a, b) = self.bounds();
        if !(x >= a && x <= b) {
            return Err(Error::Domain {
                name: "x",
                value: x,
                range: format!("[{a}, {b}]"),
            });
        }
        Ok((x - a).min(b - x))
    }
}

/// `δ(x) = dist(x, ∂Ω)`.
pub fn delta(dom: &Domain1D, x: f64) -> Result<f64> {
    dom.delta(x)
}

/// Nodes of a continuous piecewise-linear space on an interval, clustered
/// symmetrically toward both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMesh {
    a: f64,
    b: f64,
    grading: f64,
    nodes: Vec<f64>,
}

/// Builds `n` elements on `[a, b]`; node `j ≤ n/2` sits at `a + (b−a)/2·(2j/n)^β`
/// and the right half is the mirror image.
pub fn graded_mesh(a: f64, b: f64, n: usize, grading: f64) -> Result<GradedMesh> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidArgument(format!("empty or unbounded interval ({a}, {b})")));
    }
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "element count must be even and at least 4, got {n}"
        )));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::Domain {
            name: "grading",
            value: grading,
            range: "[1, inf)".into(),
        });
    }
    let half = n / 2;
    let half_len = 0.5 * (b - a);
    let mut nodes = vec![0.0; n + 1];
    for j in 0..=half {
        let r = (j as f64 / half as f64).powf(grading);
        nodes[j] = a + half_len * r;
        nodes[n - j] = b - half_len * r;
    }
    nodes[0] = a;
    nodes[n] = b;
    nodes[half] = 0.5 * (a + b);
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "grading {grading} with {n} elements underflows the node spacing"
        )));
    }
    Ok(GradedMesh {
        a,
        b,
        grading,
        nodes,
    })
}

/// Grading that resolves a `δ^{2s−1}` boundary layer: `2/(2s−1)` clamped to `[1, 4]`.
pub fn default_grading(s: FracOrder) -> f64 {
    let e = 2.0 * s.get() - 1.0;
    if e <= 0.0 {
        4.0
    } else {
        (2.0 / e).clamp(1.0, 4.0)
    }
}

impl GradedMesh {
    pub fn domain(&self) -> Domain1D {
        Domain1D::Interval { a: self.a, b: self.b }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn element(&self, k: usize) -> (f64, f64) {
        (self.nodes[k], self.nodes[k + 1])
    }

    pub fn element_size(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n_elements())
            .map(|k| self.element_size(k))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n_elements())
            .map(|k| self.element_size(k))
            .fold(0.0, f64::max)
    }

    /// Boundary distance of node `j`, computed from the index so that nodes next
    /// to an end keep full relative precision.
    pub fn node_delta(&self, j: usize) -> f64 {
        let n = self.n_elements();
        let half = n / 2;
        let half_len = 0.5 * (self.b - self.a);
        let k = j.min(n - j);
        if k == half {
            return half_len;
        }
        half_len * (k as f64 / half as f64).powf(self.grading)
    }

    pub fn delta(&self, x: f64) -> Result<f64> {
        self.domain().delta(x)
    }

    /// Same node pattern mapped affinely onto `[λa, λb]`.
    pub fn scaled(&self, lambda: f64) -> Result<GradedMesh> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain {
                name: "lambda",
                value: lambda,
                range: "(0, inf)".into(),
            });
        }
        Ok(GradedMesh {
            a: self.a * lambda,
            b: self.b * lambda,
            grading: self.grading,
            nodes: self.nodes.iter().map(|x| x * lambda).collect(),
        })
    }

    /// Value at `x` of the piecewise-linear interpolant of nodal data.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let n = self.n_elements();
        let k = match self.nodes.partition_point(|&p| p <= x) {
            0 => 0,
            i => (i - 1).min(n - 1),
        };
        let (x0, x1) = self.element(k);
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        values[k] * (1.0 - t) + values[k + 1] * t
    }
}
