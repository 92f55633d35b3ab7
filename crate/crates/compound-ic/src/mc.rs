//! Monte-Carlo mutual information: simulates the degraded chain sample by
//! sample and applies the Gaussian log-det formula to sample covariances.

use crate::channel::{DegradedChain, C64};
use crate::error::{Error, Result};
use crate::info::{MiSpec, VarId};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of the mean over batches.
    pub se: f64,
    pub batches: usize,
    pub per_batch: usize,
}

/// Circularly-symmetric complex normal with variance `v`.
fn cn<R: Rng>(rng: &mut R, v: f64) -> C64 {
    let s = (v / 2.0).sqrt();
    C64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
}

/// One joint draw of every model variable.
struct Draw {
    x: [C64; 2],
    /// `s[k][n]`, `u[k][n]` with 0-based user and state.
    s: [Vec<C64>; 2],
    u: [Vec<C64>; 2],
}

fn draw<R: Rng>(chain: &DegradedChain, rng: &mut R) -> Draw {
    let n = chain.n_states();
    let x = [cn(rng, chain.p[0]), cn(rng, chain.p[1])];
    let mut s = [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]];
    let mut u = s.clone();
    for k in 0..2 {
        let c = &chain.users[k];
        for out in [&mut s[k], &mut u[k]] {
            out[0] = c.cross[0] * x[k] + cn(rng, 1.0);
            for m in 1..n {
                out[m] = c.ratio[m] * out[m - 1] + cn(rng, 1.0) * c.residual[m];
            }
        }
    }
    Draw { x, s, u }
}

fn value(chain: &DegradedChain, d: &Draw, v: VarId) -> C64 {
    match v {
        VarId::X(k) => d.x[k - 1],
        VarId::S(k, n) => d.s[k - 1][n - 1],
        VarId::U(k, n) => d.u[k - 1][n - 1],
        VarId::Y(k, n) => chain.users[k - 1].direct[n - 1] * d.x[k - 1] + d.s[2 - k][n - 1],
    }
}

fn log2_det(m: &DMatrix<C64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
    sub.determinant().re.log2()
}

/// Plug-in estimate from `batches` independent batches.
pub fn monte_carlo_mi<R: Rng>(
    chain: &DegradedChain,
    spec: &MiSpec,
    rng: &mut R,
    batches: usize,
    per_batch: usize,
) -> Result<McEstimate> {
    spec.validate()?;
    if batches < 2 || per_batch < 2 {
        return Err(Error::InvalidInput("need at least two batches of two samples".into()));
    }
    for v in spec.subjects.iter().chain(&spec.targets).chain(&spec.given) {
        v.validate(chain.n_states())?;
    }
    let vars: Vec<VarId> = spec.targets.iter().chain(&spec.subjects).chain(&spec.given).copied().collect();
    let (nt, ns) = (spec.targets.len(), spec.subjects.len());
    let t: Vec<usize> = (0..nt).collect();
    let s: Vec<usize> = (nt..nt + ns).collect();
    let g: Vec<usize> = (nt + ns..vars.len()).collect();
    let cat = |a: &[usize], b: &[usize]| [a, b].concat();
    let mut est = Vec::with_capacity(batches);
    let d = vars.len();
    for _ in 0..batches {
        let mut acc = DMatrix::<C64>::zeros(d, d);
        let mut mean = vec![C64::new(0.0, 0.0); d];
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for _ in 0..per_batch {
            let dr = draw(chain, rng);
            for (i, &v) in vars.iter().enumerate() {
                buf[i] = value(chain, &dr, v);
                mean[i] += buf[i];
            }
            for i in 0..d {
                for j in 0..d {
                    acc[(i, j)] += buf[i] * buf[j].conj();
                }
            }
        }
        let nf = per_batch as f64;
        let cov = DMatrix::from_fn(d, d, |i, j| (acc[(i, j)] - mean[i] * mean[j].conj() / nf) / (nf - 1.0));
        let i = log2_det(&cov, &cat(&t, &g)) + log2_det(&cov, &cat(&s, &g))
            - log2_det(&cov, &g)
            - log2_det(&cov, &cat(&cat(&t, &s), &g));
        est.push(i);
    }
    let b = batches as f64;
    let mean = est.iter().sum::<f64>() / b;
    let var = est.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (b - 1.0);
    Ok(McEstimate { mean, se: (var / b).sqrt(), batches, per_batch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_degraded_chain, CompoundChannel};
    use crate::gaussian::GaussianSystem;
    use crate::sample::rng;

    #[test]
    fn awgn_one_bit() {
        let ch = CompoundChannel::single(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), 1.0, 1.0)
            .unwrap()
            .canonicalize()
            .unwrap();
        let chain = build_degraded_chain(&ch).unwrap();
        let spec = MiSpec::new(vec![VarId::X(1)], vec![VarId::Y(1, 1)], vec![]);
        let e = monte_carlo_mi(&chain, &spec, &mut rng(3), 10, 20_000).unwrap();
        assert!((e.mean - 1.0).abs() < 4.0 * e.se + 1e-3, "{e:?}");
    }

    #[test]
    fn matches_covariance_engine() {
        let mut r = rng(11);
        let ch = crate::sample::random_channel(&mut r, 2).canonicalize().unwrap();
        let chain = build_degraded_chain(&ch).unwrap();
        let g = GaussianSystem::build(&chain).unwrap();
        let spec = MiSpec::new(vec![VarId::X(1), VarId::U(2, 2)], vec![VarId::Y(1, 2)], vec![VarId::U(1, 1)]);
        let e = monte_carlo_mi(&chain, &spec, &mut r, 10, 20_000).unwrap();
        let a = g.cond_mi(&spec).unwrap();
        assert!((e.mean - a).abs() < 4.0 * e.se, "{e:?} vs {a}");
    }
}
