//! Clockwise rectangular contours around a real interval and their quadrature
//! nodes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss-Legendre points per panel.
const PANEL_ORDER: usize = 16;

/// The rectangle `[a - margin, b + margin] x [-half_height, half_height]`,
/// traversed clockwise: rightward along the top edge, down the right edge,
/// leftward along the bottom, up the left edge.
///
/// With this orientation `(1/2πi) ∮ A (p - z)^{-1} dz = A` for a real pole `p`
/// strictly inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub a: f64,
    pub b: f64,
    pub half_height: f64,
    pub margin: f64,
}

/// A quadrature node `z` with complex weight `w`, so `∮ f dz ≈ Σ w f(z)`.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub z: Complex64,
    pub w: Complex64,
}

impl Contour {
    pub fn new(a: f64, b: f64, half_height: f64, margin: f64) -> Result<Self> {
        let all_finite = [a, b, half_height, margin].iter().all(|v| v.is_finite());
        if !all_finite || a >= b || half_height <= 0.0 || margin <= 0.0 {
            return Err(Error::invalid(format!(
                "contour needs a < b and positive half_height/margin, got a={a}, b={b}, \
                 half_height={half_height}, margin={margin}"
            )));
        }
        Ok(Self {
            a,
            b,
            half_height,
            margin,
        })
    }

    /// Contour hugging `[lo, hi]` with the given padding on every side.
    pub fn around(lo: f64, hi: f64, padding: f64) -> Result<Self> {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Self::new(lo, hi, padding, padding)
    }

    pub fn left(&self) -> f64 {
        self.a - self.margin
    }

    pub fn right(&self) -> f64 {
        self.b + self.margin
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.right() - self.left()) + 4.0 * self.half_height
    }

    /// Whether a real point lies in the open region bounded by the contour.
    pub fn encloses_real(&self, x: f64) -> bool {
        x > self.left() && x < self.right()
    }

    /// Euclidean distance from `z` to the rectangle boundary.
    pub fn distance(&self, z: Complex64) -> f64 {
        let corners = self.corners();
        (0..4)
            .map(|i| segment_distance(z, corners[i], corners[(i + 1) % 4]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest allowed distance between a singularity and the contour for a
    /// rule with `n_points` nodes.
    pub fn min_clearance(&self, n_points: usize) -> f64 {
        1e-3 * self.perimeter() / n_points as f64
    }

    /// Fails when a real singularity sits closer to the contour than
    /// [`Contour::min_clearance`].
    pub fn check_clearance(&self, x: f64, n_points: usize) -> Result<()> {
        let required = self.min_clearance(n_points);
        let distance = self.distance(Complex64::new(x, 0.0));
        if distance < required {
            return Err(Error::ContourClearance {
                point: Complex64::new(x, 0.0),
                distance,
                required,
            });
        }
        Ok(())
    }

    fn corners(&self) -> [Complex64; 4] {
        let (l, r, h) = (self.left(), self.right(), self.half_height);
        [
            Complex64::new(l, h),
            Complex64::new(r, h),
            Complex64::new(r, -h),
            Complex64::new(l, -h),
        ]
    }

    /// Composite Gauss-Legendre nodes, about `n_points` in total, with panels
    /// distributed over the four edges in proportion to edge length.
    pub fn nodes(&self, n_points: usize) -> Vec<Node> {
        let (gl_x, gl_w) = gauss_legendre(PANEL_ORDER);
        let corners = self.corners();
        let perimeter = self.perimeter();
        let mut out = Vec::with_capacity(n_points + 4 * PANEL_ORDER);
        for i in 0..4 {
            let (start, end) = (corners[i], corners[(i + 1) % 4]);
            let len = (end - start).norm();
            let panels = ((n_points as f64 * len / perimeter / PANEL_ORDER as f64).round() as usize).max(1);
            let step = (end - start) / panels as f64;
            for p in 0..panels {
                let p0 = start + step * p as f64;
                for (x, w) in gl_x.iter().zip(&gl_w) {
                    out.push(Node {
                        z: p0 + step * (0.5 * (x + 1.0)),
                        w: step * (0.5 * w),
                    });
                }
            }
        }
        out
    }

    /// `(1/2πi) ∮ f(z) dz` over the clockwise contour.
    pub fn integrate<F>(&self, n_points: usize, f: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64,
    {
        let sum: Complex64 = self.nodes(n_points).iter().map(|n| f(n.z) * n.w).sum();
        sum / Complex64::new(0.0, 2.0 * PI)
    }
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((z - a).re * d.re + (z - a).im * d.im) / d.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut root = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, root);
            dp = d;
            let delta = p / d;
            root -= delta;
            if delta.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, root);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - root * root) * dp * dp);
        x[i] = -root;
        x[n - 1 - i] = root;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    (x, w)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
