use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::hypgeo::{GeometryContext, RadialPoint};
use crate::quad::{GL3, GL6};

/// Quadrature node inside one grid cell, with its hyperbolic geometry.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    /// Cell index into [`Grid::cells`].
    pub cell: usize,
    /// Local parameter in `[0, 1]` along `ln s`.
    pub tau: f64,
    /// Weight for `ds`.
    pub weight: f64,
    pub point: RadialPoint,
}

/// Knots in the volume coordinate.
///
/// Knots are nondecreasing. A knot may appear twice in a row; the pair is a
/// break point across which the second derivative of a profile may jump.
#[derive(Debug)]
pub struct Grid {
    ctx: GeometryContext,
    knots: Vec<f64>,
    logs: Vec<f64>,
    cells: Vec<usize>,
    nodes6: OnceLock<std::result::Result<Vec<Node>, Error>>,
    nodes3: OnceLock<std::result::Result<Vec<Node>, Error>>,
}

impl Clone for Grid {
    fn clone(&self) -> Self {
        Self::build(self.ctx, self.knots.clone())
    }
}

impl Grid {
    pub fn from_knots(ctx: GeometryContext, knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Domain("a grid needs at least two knots".into()));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if !(w[0] > 0.0 && w[0].is_finite() && w[1].is_finite()) {
                return Err(Error::Domain(format!("grid knot {i} is not a positive finite number")));
            }
            if w[1] < w[0] {
                return Err(Error::Domain(format!("grid not increasing at knot {}", i + 1)));
            }
            if w[1] > w[0] && w[1].ln() - w[0].ln() < 1e-12 {
                return Err(Error::Domain(format!("knots {} and {} are too close to form a cell", w[0], w[1])));
            }
            if i + 2 < knots.len() && w[0] == w[1] && knots[i + 2] == w[1] {
                return Err(Error::Domain(format!("knot {} repeated more than twice", w[0])));
            }
        }
        if knots[0] == knots[1] || knots[knots.len() - 2] == knots[knots.len() - 1] {
            return Err(Error::Domain("break knots must be interior".into()));
        }
        Ok(Self::build(ctx, knots))
    }

    fn build(ctx: GeometryContext, knots: Vec<f64>) -> Self {
        let logs = knots.iter().map(|s| s.ln()).collect();
        let cells = (0..knots.len() - 1).filter(|&i| knots[i] < knots[i + 1]).collect();
        Self { ctx, knots, logs, cells, nodes6: OnceLock::new(), nodes3: OnceLock::new() }
    }

    /// `n` log-spaced knots on `[lo, hi]`.
    pub fn log_spaced(ctx: GeometryContext, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || n < 2 {
            return Err(Error::Domain(format!("bad log grid [{lo}, {hi}] with {n} knots")));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let mut k: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        k[0] = lo;
        k[n - 1] = hi;
        Self::from_knots(ctx, k)
    }

    /// Log-spaced knots with each interior break point inserted twice.
    pub fn log_spaced_with_breaks(
        ctx: GeometryContext,
        lo: f64,
        hi: f64,
        per_decade: f64,
        breaks: &[f64],
    ) -> Result<Self> {
        let mut edges = vec![lo];
        let mut bs: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
        bs.sort_by(f64::total_cmp);
        bs.dedup();
        edges.extend(&bs);
        edges.push(hi);
        let mut knots = Vec::new();
        // each segment pushes both of its ends, so interior breaks appear twice
        for w in edges.windows(2) {
            let decades = (w[1] / w[0]).log10();
            let m = ((decades * per_decade).ceil() as usize).max(2);
            let (a, b) = (w[0].ln(), w[1].ln());
            for i in 0..=m {
                let s = if i == 0 {
                    w[0]
                } else if i == m {
                    w[1]
                } else {
                    (a + (b - a) * i as f64 / m as f64).exp()
                };
                knots.push(s);
            }
        }
        Self::from_knots(ctx, knots)
    }

    /// Every cell split in two at its geometric midpoint.
    pub fn refined(&self) -> Self {
        let mut k = Vec::with_capacity(2 * self.knots.len());
        for i in 0..self.knots.len() - 1 {
            k.push(self.knots[i]);
            if self.knots[i] < self.knots[i + 1] {
                k.push(((self.logs[i] + self.logs[i + 1]) * 0.5).exp());
            }
        }
        k.push(*self.knots.last().unwrap());
        Self::build(self.ctx, k)
    }

    #[inline]
    pub fn ctx(&self) -> &GeometryContext {
        &self.ctx
    }

    #[inline]
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    #[inline]
    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    /// Left-knot indices of the nondegenerate cells.
    #[inline]
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn is_break(&self, i: usize) -> bool {
        (i + 1 < self.knots.len() && self.knots[i + 1] == self.knots[i])
            || (i > 0 && self.knots[i - 1] == self.knots[i])
    }

    /// Index `i` of the nondegenerate cell `[s_i, s_{i+1}]` holding `s`.
    pub fn locate(&self, s: f64) -> Option<usize> {
        let n = self.knots.len();
        if !(s >= self.knots[0] && s <= self.knots[n - 1]) {
            return None;
        }
        let mut i = self.knots.partition_point(|&k| k <= s).saturating_sub(1);
        if i >= n - 1 {
            i = n - 2;
        }
        while i > 0 && self.knots[i] == self.knots[i + 1] {
            i -= 1;
        }
        Some(i)
    }

    fn make_nodes(&self, rule: &[(f64, f64)]) -> std::result::Result<Vec<Node>, Error> {
        let mut out = Vec::with_capacity(self.cells.len() * rule.len());
        for (c, &i) in self.cells.iter().enumerate() {
            let (x0, h) = (self.logs[i], self.logs[i + 1] - self.logs[i]);
            for &(xi, w) in rule {
                let s = (x0 + h * xi).exp();
                let point = self.ctx.point(s)?;
                out.push(Node { cell: c, tau: xi, weight: h * w * s, point });
            }
        }
        Ok(out)
    }

    /// Six-point Gauss nodes of every cell, computed once.
    pub fn nodes6(&self) -> Result<&[Node]> {
        match self.nodes6.get_or_init(|| self.make_nodes(&GL6)) {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    /// Three-point nodes used for the error estimate.
    pub fn nodes3(&self) -> Result<&[Node]> {
        match self.nodes3.get_or_init(|| self.make_nodes(&GL3)) {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }
}
