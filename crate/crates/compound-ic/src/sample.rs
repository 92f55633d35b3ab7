//! Seeded random instances for the property suites.

use crate::channel::{CompoundChannel, RxState, C64};
use crate::constraints::ConstraintSystem;
use crate::error::Result;
use crate::polytope::{support_value, HalfspaceSystem};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gain with `|h|^2` log-uniform in `[-20, 20]` dB and uniform phase.
pub fn random_gain<R: Rng>(rng: &mut R) -> C64 {
    let db: f64 = rng.random_range(-20.0..=20.0);
    C64::from_polar(10f64.powf(db / 20.0), rng.random_range(0.0..TAU))
}

/// Power log-uniform in `[0, 30]` dB.
pub fn random_power<R: Rng>(rng: &mut R) -> f64 {
    10f64.powf(rng.random_range(0.0..=30.0) / 10.0)
}

/// Channel with `n_states` independent states per receiver.
pub fn random_channel<R: Rng>(rng: &mut R, n_states: usize) -> CompoundChannel {
    let mut rx = || (0..n_states).map(|_| RxState::new(random_gain(rng), random_gain(rng))).collect::<Vec<_>>();
    let (rx1, rx2) = (rx(), rx());
    let (p1, p2) = (random_power(rng), random_power(rng));
    CompoundChannel::new(rx1, rx2, p1, p2).expect("random channel is valid")
}

/// A single-state channel written as two identical states.
pub fn random_duplicated_channel<R: Rng>(rng: &mut R) -> CompoundChannel {
    let r1 = RxState::new(random_gain(rng), random_gain(rng));
    let r2 = RxState::new(random_gain(rng), random_gain(rng));
    let (p1, p2) = (random_power(rng), random_power(rng));
    CompoundChannel::new(vec![r1; 2], vec![r2; 2], p1, p2).expect("random channel is valid")
}

/// Grid for exactly representable rate vectors.
pub const DYADIC: f64 = 1.0 / (1u64 << 30) as f64;

/// A point of the lifted polytope with per-user-sum nonnegativity, on the
/// dyadic grid, with at least one negative component. Built from two LP
/// vertices in random directions; `None` when the draw does not qualify.
pub fn random_projected_point<R: Rng>(rng: &mut R, sys: &ConstraintSystem, rhs: &[f64]) -> Result<Option<Vec<f64>>> {
    let hs = HalfspaceSystem::from_constraints(sys, rhs)?;
    let vertex = |rng: &mut R| -> Result<Vec<f64>> {
        let w: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        Ok(support_value(&hs, &w)?.1)
    };
    let (v, u) = (vertex(rng)?, vertex(rng)?);
    let t: f64 = rng.random_range(0.0..1.0);
    let x: Vec<f64> = v
        .iter()
        .zip(&u)
        .map(|(p, q)| ((0.999 * (t * p + (1.0 - t) * q)) / DYADIC).round() * DYADIC)
        .collect();
    if hs.max_violation(&x) > 0.0 || !x.iter().any(|&c| c < 0.0) {
        return Ok(None);
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_channels_repeat() {
        let a = random_channel(&mut rng(42), 3);
        let b = random_channel(&mut rng(42), 3);
        assert_eq!(a, b);
        assert_eq!(a.n_states(), 3);
    }

    #[test]
    fn gain_and_power_ranges() {
        let mut r = rng(1);
        for _ in 0..1000 {
            let g = random_gain(&mut r).norm_sqr();
            assert!((0.01 - 1e-12..=100.0 + 1e-9).contains(&g));
            let p = random_power(&mut r);
            assert!((1.0..=1000.0 + 1e-9).contains(&p));
        }
    }
}
