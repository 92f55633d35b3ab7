//! Outer-bound values under finite-constellation inputs, to compare with
//! the Gaussian-input values. Output entropies of the resulting Gaussian
//! mixtures are computed by Gauss-Hermite quadrature.

use crate::bounds::{c_out, evaluate_gaussian, gaussian_setup, outer_entropies, EvaluatedSystem};
use crate::channel::{CompoundChannel, C64};
use crate::constraints::ConstraintSystem;
use crate::error::{Error, Result};
use crate::gaussian::GaussianSystem;
use crate::info::{clamp_mi, InfoMeasure, MiSpec, VarId};
use crate::polytope::{dual_min_prime, DualCertificate};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{E, PI, TAU};

/// Quadrature nodes per real dimension.
pub const GH_NODES: usize = 64;
/// Allowed excess of the constellation value over the Gaussian value.
pub const DOMINANCE_TOL: f64 = 1e-3;

/// Gauss-Hermite rule for the weight `exp(-x^2)` (Golub-Welsch).
#[derive(Clone, Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        let j = DMatrix::from_fn(n, n, |r, c| {
            if r + 1 == c || c + 1 == r {
                ((r.max(c)) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let e = SymmetricEigen::new(j);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (e.eigenvalues[i], PI.sqrt() * e.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        GaussHermite { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    /// `E[f(Z)]` for a standard normal `Z`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(2f64.sqrt() * x)).sum::<f64>() / PI.sqrt()
    }
}

/// Real amplitudes `t` on a line of angle `phase`: symbols `e^{i phase} t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    pub points: Vec<f64>,
    pub probs: Vec<f64>,
    pub phase: f64,
}

impl Constellation {
    pub fn power(&self) -> f64 {
        self.points.iter().zip(&self.probs).map(|(t, p)| p * t * t).sum()
    }

    /// Rescales the amplitudes to power `p`.
    pub fn with_power(mut self, p: f64) -> Self {
        let cur = self.power();
        if cur > 0.0 {
            let s = (p / cur).sqrt();
            self.points.iter_mut().for_each(|t| *t *= s);
        }
        self
    }

    /// Symmetric two-point input `+-sqrt(p)`.
    pub fn antipodal(p: f64) -> Self {
        Constellation { points: vec![-p.sqrt(), p.sqrt()], probs: vec![0.5, 0.5], phase: 0.0 }
    }

    /// Two to four points with random amplitudes, masses and phase, scaled
    /// to power `p`.
    pub fn random<R: Rng>(rng: &mut R, p: f64) -> Self {
        let n = rng.random_range(2..=4);
        let points: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let c = Constellation { points, probs: raw.iter().map(|r| r / s).collect(), phase: rng.random_range(0.0..TAU) };
        c.with_power(p)
    }
}

/// Entropy cache keyed by variable set and which inputs are conditioned on.
type EntropyCache = RefCell<HashMap<(Vec<VarId>, [bool; 2]), f64>>;

/// The model with finite-constellation inputs and the Gaussian noises of
/// the degraded chain.
pub struct MixtureSystem<'a> {
    g: &'a GaussianSystem,
    inputs: [Constellation; 2],
    gh: GaussHermite,
    cache: EntropyCache,
}

impl<'a> MixtureSystem<'a> {
    pub fn new(g: &'a GaussianSystem, inputs: [Constellation; 2]) -> Self {
        MixtureSystem { g, inputs, gh: GaussHermite::new(GH_NODES), cache: RefCell::new(HashMap::new()) }
    }

    /// Joint entropy of `vars` with the inputs of the users in `active`
    /// random and the others fixed (the entropy is translation invariant).
    fn joint(&self, vars: &[VarId], active: [bool; 2]) -> Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        let key = (vars.to_vec(), active);
        if let Some(&h) = self.cache.borrow().get(&key) {
            return Ok(h);
        }
        let h = self.joint_uncached(vars, active)?;
        self.cache.borrow_mut().insert(key, h);
        Ok(h)
    }

    fn joint_uncached(&self, vars: &[VarId], active: [bool; 2]) -> Result<f64> {
        let d = vars.len();
        let var = self.g.source_variances();
        let rows: Vec<&[C64]> = vars.iter().map(|&v| self.g.coefficients(v)).collect::<Result<_>>()?;
        // Real representation of the noise covariance.
        let c = DMatrix::from_fn(d, d, |i, j| {
            (2..var.len()).map(|s| rows[i][s] * rows[j][s].conj() * var[s]).sum::<C64>()
        });
        let r = DMatrix::from_fn(2 * d, 2 * d, |i, j| {
            let (bi, bj) = (i / d, j / d);
            let z = c[(i % d, j % d)];
            0.5 * match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (0, 1) => -z.im,
                _ => z.im,
            }
        });
        let chol = r
            .cholesky()
            .ok_or_else(|| Error::Degenerate(format!("noise covariance of {vars:?} is singular")))?;
        let l = chol.l();
        let log_det_l: f64 = (0..2 * d).map(|i| l[(i, i)].ln()).sum::<f64>() / 2f64.ln();
        // Whitened mean directions of the active users.
        let mut dirs: Vec<(usize, DVector<f64>)> = Vec::new();
        for k in 0..2 {
            if !active[k] {
                continue;
            }
            let rot = C64::from_polar(1.0, self.inputs[k].phase);
            let m = DVector::from_fn(2 * d, |i, _| {
                let z = rows[i % d][k] * rot;
                if i < d {
                    z.re
                } else {
                    z.im
                }
            });
            let w = l.solve_lower_triangular(&m).ok_or_else(|| Error::Degenerate("whitening failed".into()))?;
            dirs.push((k, w));
        }
        // Orthonormal basis of the span of the mean directions.
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for (_, w) in &dirs {
            let mut v = w.clone();
            for b in &basis {
                v -= b * b.dot(&v);
            }
            let n = v.norm();
            if n > 1e-10 * (1.0 + w.norm()) {
                basis.push(v / n);
            }
        }
        let rank = basis.len();
        // Mixture components in basis coordinates.
        let mut comps: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; rank], 1.0)];
        for (k, w) in &dirs {
            let coord: Vec<f64> = basis.iter().map(|b| b.dot(w)).collect();
            let inp = &self.inputs[*k];
            let mut next = Vec::with_capacity(comps.len() * inp.points.len());
            for (mu, p) in &comps {
                for (t, q) in inp.points.iter().zip(&inp.probs) {
                    if *q == 0.0 {
                        continue;
                    }
                    let m: Vec<f64> = mu.iter().zip(&coord).map(|(a, c)| a + c * t).collect();
                    next.push((m, p * q));
                }
            }
            comps = next;
        }
        let l2pe = (2.0 * PI * E).log2();
        Ok((2 * d - rank) as f64 / 2.0 * l2pe + log_det_l + self.mixture_entropy(&comps, rank))
    }

    /// Differential entropy in bits of `sum_j p_j N(mu_j, I_r)`.
    fn mixture_entropy(&self, comps: &[(Vec<f64>, f64)], r: usize) -> f64 {
        if r == 0 {
            return 0.0;
        }
        let neg_log_p = |y: &[f64]| -> f64 {
            let e: Vec<f64> = comps
                .iter()
                .map(|(mu, p)| p.ln() - 0.5 * mu.iter().zip(y).map(|(m, v)| (v - m) * (v - m)).sum::<f64>())
                .collect();
            let mx = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = mx + e.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
            (r as f64 / 2.0 * (2.0 * PI).ln() - lse) / 2f64.ln()
        };
        let s2 = 2f64.sqrt();
        let gh = &self.gh;
        let mut total = 0.0;
        for (mu, p) in comps {
            let mut acc = 0.0;
            if r == 1 {
                for (x, w) in gh.nodes.iter().zip(&gh.weights) {
                    acc += w * neg_log_p(&[mu[0] + s2 * x]);
                }
                acc /= PI.sqrt();
            } else {
                for (x, wx) in gh.nodes.iter().zip(&gh.weights) {
                    for (y, wy) in gh.nodes.iter().zip(&gh.weights) {
                        let w = wx * wy;
                        if w < 1e-18 {
                            continue;
                        }
                        acc += w * neg_log_p(&[mu[0] + s2 * x, mu[1] + s2 * y]);
                    }
                }
                acc /= PI;
            }
            total += p * acc;
        }
        total
    }
}

impl InfoMeasure for MixtureSystem<'_> {
    fn entropy(&self, targets: &[VarId], given: &[VarId]) -> Result<f64> {
        if targets.iter().any(|v| matches!(v, VarId::X(_))) {
            return Err(Error::InvalidInput("inputs are discrete; their differential entropy is undefined".into()));
        }
        let mut active = [true, true];
        let mut g: Vec<VarId> = Vec::new();
        for &v in given {
            match v {
                VarId::X(k) => active[k - 1] = false,
                other => g.push(other),
            }
        }
        g.sort();
        g.dedup();
        let mut all = g.clone();
        all.extend_from_slice(targets);
        all.sort();
        all.dedup();
        if all == g {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.joint(&all, active)? - self.joint(&g, active)?)
    }

    fn mi(&self, spec: &MiSpec) -> Result<f64> {
        spec.validate()?;
        let mut g2 = spec.given.clone();
        g2.extend_from_slice(&spec.subjects);
        clamp_mi(self.entropy(&spec.targets, &spec.given)? - self.entropy(&spec.targets, &g2)?, spec)
    }

    fn n_states(&self) -> usize {
        self.g.n_states()
    }
}

/// `sum_i lambda_i (h(Y|V_i) - h(S_i|X_o))` under an arbitrary source.
pub fn outer_value(cert: &DualCertificate, sys: &ConstraintSystem, info: &dyn InfoMeasure) -> Result<f64> {
    if !cert.is_prime() {
        return Err(Error::Precondition("outer value needs an omega-free certificate".into()));
    }
    let (hy, hs) = outer_entropies(sys, info)?;
    Ok(cert.lambda.iter().enumerate().filter(|(_, l)| **l != 0.0).map(|(i, l)| l * (hy[i] - hs[i])).sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominanceReport {
    pub inputs: usize,
    pub certificates: usize,
    /// Largest `c_out(constellation) - c_out(Gaussian)`.
    pub max_excess: f64,
    pub passed: bool,
}

/// Outer-optimal omega-free certificates of the Gaussian-input system at
/// random directions.
pub fn sample_certificates<R: Rng>(rng: &mut R, ev: &EvaluatedSystem, count: usize) -> Result<Vec<DualCertificate>> {
    let outer = ev.outer();
    (0..count)
        .map(|_| {
            let t: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            dual_min_prime(&ev.sys, &outer, t.cos(), t.sin())
        })
        .collect()
}

/// Compares constellation inputs against Gaussian inputs on sampled
/// certificates of one channel.
pub fn gaussian_dominance_check<R: Rng>(
    rng: &mut R,
    ch: &CompoundChannel,
    inputs: usize,
    certificates: usize,
) -> Result<DominanceReport> {
    if inputs < 1 {
        return Err(Error::InvalidInput("at least one trial is needed".into()));
    }
    let (sys, g) = gaussian_setup(ch)?;
    let ev = evaluate_gaussian(ch)?;
    let certs = sample_certificates(rng, &ev, certificates)?;
    let gauss: Vec<f64> = certs.iter().map(|c| c_out(c, &ev)).collect::<Result<_>>()?;
    let ch = ch.canonicalize()?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..inputs {
        let inp = [Constellation::random(rng, ch.power(1)), Constellation::random(rng, ch.power(2))];
        let m = MixtureSystem::new(&g, inp);
        let (hy, hs) = outer_entropies(&sys, &m)?;
        for (c, gv) in certs.iter().zip(&gauss) {
            let v: f64 = c.lambda.iter().enumerate().filter(|(_, l)| **l != 0.0).map(|(i, l)| l * (hy[i] - hs[i])).sum();
            worst = worst.max(v - gv);
        }
    }
    Ok(DominanceReport { inputs, certificates, max_excess: worst, passed: worst <= DOMINANCE_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::log2_pi_e;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn hermite_rule_moments() {
        let gh = GaussHermite::new(GH_NODES);
        assert!((gh.expect(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((gh.expect(|x| x * x) - 1.0).abs() < 1e-12);
        assert!((gh.expect(|x| x.powi(4)) - 3.0).abs() < 1e-11);
    }

    #[test]
    fn zero_power_input_is_gaussian_noise() {
        let ch = CompoundChannel::single(c(1.0), c(0.5), c(0.5), c(1.0), 0.0, 0.0).unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        let m = MixtureSystem::new(&g, [Constellation::antipodal(0.0), Constellation::antipodal(0.0)]);
        let h = m.entropy(&[VarId::Y(1, 1)], &[]).unwrap();
        assert!((h - g.cond_entropy(&[VarId::Y(1, 1)], &[]).unwrap()).abs() < 1e-12);
        assert!((h - log2_pi_e()).abs() < 1e-12);
    }

    #[test]
    fn well_separated_binary_input_adds_one_bit() {
        let ch = CompoundChannel::single(c(1.0), c(0.0), c(0.0), c(1.0), 1e4, 0.0).unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        let m = MixtureSystem::new(&g, [Constellation::antipodal(1e4), Constellation::antipodal(0.0)]);
        let h = m.entropy(&[VarId::Y(1, 1)], &[]).unwrap();
        assert!((h - 1.0 - log2_pi_e()).abs() < 1e-9);
        let i = m.mi(&MiSpec::new(vec![VarId::X(1)], vec![VarId::Y(1, 1)], vec![])).unwrap();
        assert!((i - 1.0).abs() < 1e-9);
    }

    #[test]
    fn binary_input_mi_matches_one_dimensional_integral() {
        // Real BPSK over a complex channel: the imaginary noise is
        // irrelevant, so I = 1 - E[log2(1 + exp(-2 s (s + n)))] with
        // n ~ N(0, 1/2), s = sqrt(P).
        let p = 0.7;
        let ch = CompoundChannel::single(c(1.0), c(0.0), c(0.0), c(1.0), p, 0.0).unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        let m = MixtureSystem::new(&g, [Constellation::antipodal(p), Constellation::antipodal(0.0)]);
        let i = m.mi(&MiSpec::new(vec![VarId::X(1)], vec![VarId::Y(1, 1)], vec![])).unwrap();
        let s = p.sqrt();
        let gh = GaussHermite::new(GH_NODES);
        let want = 1.0 - gh.expect(|z| (1.0 + (-4.0 * s * (s + z / 2f64.sqrt())).exp()).log2());
        assert!((i - want).abs() < 1e-9, "{i} {want}");
    }

    #[test]
    fn gaussian_value_of_itself() {
        let ch = CompoundChannel::single(c(1.2), c(0.7), c(0.4), c(0.9), 3.0, 2.0).unwrap();
        let (sys, g) = gaussian_setup(&ch).unwrap();
        let ev = EvaluatedSystem::new(sys.clone(), &g).unwrap();
        let cert = dual_min_prime(&ev.sys, &ev.outer(), 1.0, 0.5).unwrap();
        assert!((outer_value(&cert, &sys, &g).unwrap() - c_out(&cert, &ev).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn antipodal_and_scaled_inputs_are_dominated() {
        let ch = CompoundChannel::single(c(1.0), c(0.8), c(0.6), c(1.0), 1.0, 1.0).unwrap();
        let (sys, g) = gaussian_setup(&ch).unwrap();
        let ev = EvaluatedSystem::new(sys.clone(), &g).unwrap();
        for (a, b) in [(1.0, 0.0), (0.6, 0.8), (0.0, 1.0)] {
            let cert = dual_min_prime(&ev.sys, &ev.outer(), a, b).unwrap();
            let gv = c_out(&cert, &ev).unwrap();
            let m = MixtureSystem::new(&g, [Constellation::antipodal(1.0), Constellation::antipodal(1.0)]);
            assert!(outer_value(&cert, &sys, &m).unwrap() <= gv + DOMINANCE_TOL);
            let m = MixtureSystem::new(&g, [Constellation::antipodal(0.25), Constellation::antipodal(0.25)]);
            assert!(outer_value(&cert, &sys, &m).unwrap() <= gv + DOMINANCE_TOL);
        }
    }
}
