//! The regression corpus: seeded smooth radial profiles with compact support.
//!
//! Each member is `A · cut(x) · (1 + ramp(x) · Σ a_k B_k(x))` in `x = ln s`,
//! constant near the origin, with random support and spline coefficients.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extremal::smooth_step;
use crate::hypgeo::GeometryContext;
use crate::jet::Jet;
use crate::profile::{DecayClass, Grid, RadialProfile};

pub const DEFAULT_SIZE: usize = 20;
pub const DEFAULT_SEED: u64 = 20_240_917;

const COEFFS: usize = 10;
const PER_DECADE: f64 = 60.0;

/// Parameters of one corpus member, kept so a member can be described in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberSpec {
    pub index: usize,
    pub amplitude: f64,
    /// `ln s` where the variable part starts.
    pub x_start: f64,
    /// `ln s` of the end of the support.
    pub x_end: f64,
    pub coeffs: Vec<f64>,
}

impl MemberSpec {
    fn draw(index: usize, rng: &mut ChaCha8Rng) -> Self {
        let ln10 = std::f64::consts::LN_10;
        let x_start = rng.random_range(-4.0..0.5) * ln10;
        let x_end = x_start + rng.random_range(1.5..4.5) * ln10;
        let amplitude = rng.random_range(0.5..2.0);
        let coeffs = (0..COEFFS).map(|_| rng.random_range(-0.6..0.6)).collect();
        Self { index, amplitude, x_start, x_end, coeffs }
    }

    /// The member as a jet in `x = ln s`.
    fn eval_x(&self, x: f64) -> Jet {
        let w = self.x_end - self.x_start;
        if x >= self.x_end {
            return Jet::constant(0.0);
        }
        if x <= self.x_start {
            return Jet::constant(self.amplitude);
        }
        let xj = Jet::var(x);
        let t = (xj - self.x_start) / w;
        // cutoff over the last 30% of the support, ramp over the first 15%
        let cut = smooth_step((t - 0.7) / 0.3);
        let ramp = 1.0 - smooth_step(t / 0.15);
        let h = 1.0 / (COEFFS - 3) as f64;
        let mut sp = Jet::constant(0.0);
        for (k, a) in self.coeffs.iter().enumerate() {
            let c = (k as f64 - 1.0) * h;
            let u = (t - c) / h;
            sp = sp + *a * cubic_bspline(u);
        }
        self.amplitude * cut * (1.0 + ramp * sp)
    }
}

fn cubic_bspline(u: Jet) -> Jet {
    let a = u.v.abs();
    if a >= 2.0 {
        return Jet::constant(0.0);
    }
    let au = if u.v < 0.0 { -u } else { u };
    if a >= 1.0 {
        let r = 2.0 - au;
        r * r * r / 6.0
    } else {
        2.0 / 3.0 - au * au + au * au * au / 2.0
    }
}

/// Member specs for `count` profiles under `seed`.
pub fn member_specs(count: usize, seed: u64) -> Vec<MemberSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| MemberSpec::draw(i, &mut rng)).collect()
}

pub fn member_profile(ctx: GeometryContext, spec: &MemberSpec) -> Result<RadialProfile> {
    let ln10 = std::f64::consts::LN_10;
    let lo = (spec.x_start - 3.0 * ln10).exp();
    let hi = spec.x_end.exp();
    let m = ((spec.x_end - spec.x_start) / ln10 + 3.0) * PER_DECADE;
    let g = Arc::new(Grid::log_spaced(ctx, lo, hi, m.ceil() as usize)?);
    RadialProfile::from_fn(g, DecayClass::CompactSupport, |s| {
        // chain rule from ln s to s
        let j = spec.eval_x(s.v.ln());
        Jet::new(j.v, j.d1 / s.v, (j.d2 - j.d1) / (s.v * s.v))
    })
}

/// The smooth corpus in dimension `n`: same members for every `n`.
pub fn smooth_corpus(n: u32, count: usize, seed: u64) -> Result<Vec<RadialProfile>> {
    let ctx = GeometryContext::new(n)?;
    member_specs(count, seed).iter().map(|s| member_profile(ctx, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_compact() {
        let a = smooth_corpus(5, DEFAULT_SIZE, DEFAULT_SEED).unwrap();
        let b = smooth_corpus(5, DEFAULT_SIZE, DEFAULT_SEED).unwrap();
        assert_eq!(a.len(), 20);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.values(), q.values());
            assert_eq!(*p.values().last().unwrap(), 0.0);
            assert!(p.max_abs() > 0.1);
        }
        let c = smooth_corpus(5, DEFAULT_SIZE, DEFAULT_SEED + 1).unwrap();
        assert_ne!(a[0].values(), c[0].values());
    }

    #[test]
    fn chain_rule_against_differences() {
        let spec = &member_specs(3, 7)[2];
        let x = 0.5 * (spec.x_start + spec.x_end);
        let h = 1e-5;
        let j = spec.eval_x(x);
        let fd1 = (spec.eval_x(x + h).v - spec.eval_x(x - h).v) / (2.0 * h);
        let fd2 = (spec.eval_x(x + h).v - 2.0 * j.v + spec.eval_x(x - h).v) / (h * h);
        assert!((j.d1 - fd1).abs() < 1e-7 * (1.0 + fd1.abs()));
        assert!((j.d2 - fd2).abs() < 1e-4 * (1.0 + fd2.abs()));
    }

    #[test]
    fn energies_are_finite() {
        for p in smooth_corpus(6, 5, 3).unwrap() {
            let e = p.energy_hyp().unwrap().value;
            assert!(e.is_finite() && e > 0.0);
        }
    }
}
