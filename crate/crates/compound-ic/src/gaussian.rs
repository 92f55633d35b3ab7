//! Joint covariance of all model variables under circularly-symmetric
//! Gaussian inputs, and conditional entropies via Schur complements.

use crate::channel::{build_degraded_chain, CompoundChannel, DegradedChain, C64};
use crate::error::{Error, Result};
use crate::info::{clamp_mi, InfoMeasure, MiSpec, VarId};
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

/// Eigenvalues below this fraction of the trace are treated as zero.
pub const EIG_FLOOR: f64 = 1e-12;

/// `log2(pi e)`, the entropy of a unit-variance complex Gaussian.
pub fn log2_pi_e() -> f64 {
    (PI * E).log2()
}

/// Every model variable as a linear combination of independent sources.
///
/// Source layout: `0 = X1`, `1 = X2`, then for each state `n` (0-based)
/// four unit-variance noises `Zs1, Zu1, Zs2, Zu2` at `2 + 4n ..`.
#[derive(Clone, Debug)]
pub struct GaussianSystem {
    n: usize,
    var: Vec<f64>,
    rows: BTreeMap<VarId, Vec<C64>>,
    ids: Vec<VarId>,
    index: BTreeMap<VarId, usize>,
    cov: DMatrix<C64>,
}

/// `which`: 0 for the S chain, 1 for the U chain.
fn noise_slot(which: usize, user: usize, stage: usize) -> usize {
    2 + 4 * stage + 2 * (user - 1) + which
}

impl GaussianSystem {
    pub fn from_channel(ch: &CompoundChannel) -> Result<Self> {
        let ch = ch.canonicalize()?;
        Self::build(&build_degraded_chain(&ch)?)
    }

    /// Builds the covariance for the given chain and its powers.
    pub fn build(chain: &DegradedChain) -> Result<Self> {
        let n = chain.n_states();
        for &p in &chain.p {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidInput(format!("power must be >= 0, got {p}")));
            }
        }
        let src = 2 + 4 * n;
        let mut var = vec![1.0; src];
        var[0] = chain.p[0];
        var[1] = chain.p[1];
        let zero = C64::new(0.0, 0.0);
        let mut rows: BTreeMap<VarId, Vec<C64>> = BTreeMap::new();
        for k in 1..=2usize {
            let mut x = vec![zero; src];
            x[k - 1] = C64::new(1.0, 0.0);
            rows.insert(VarId::X(k), x);
        }
        for k in 1..=2usize {
            let u = chain.user(k);
            for which in 0..2 {
                let make = |k, m| if which == 0 { VarId::S(k, m) } else { VarId::U(k, m) };
                let mut cur = vec![zero; src];
                cur[k - 1] = u.cross[0];
                cur[noise_slot(which, k, 0)] = C64::new(1.0, 0.0);
                rows.insert(make(k, 1), cur.clone());
                for m in 1..n {
                    for c in cur.iter_mut() {
                        *c *= u.ratio[m];
                    }
                    cur[noise_slot(which, k, m)] += C64::new(u.residual[m], 0.0);
                    rows.insert(make(k, m + 1), cur.clone());
                }
            }
        }
        for k in 1..=2usize {
            let o = 3 - k;
            for m in 1..=n {
                let mut y = rows[&VarId::S(o, m)].clone();
                y[k - 1] += chain.user(k).direct[m - 1];
                rows.insert(VarId::Y(k, m), y);
            }
        }
        let ids: Vec<VarId> = rows.keys().copied().collect();
        let index: BTreeMap<VarId, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let a = DMatrix::from_fn(ids.len(), src, |i, j| rows[&ids[i]][j]);
        let d = DMatrix::from_fn(src, src, |i, j| {
            if i == j {
                C64::new(var[i], 0.0)
            } else {
                zero
            }
        });
        let cov = &a * d * a.adjoint();
        Ok(GaussianSystem { n, var, rows, ids, index, cov })
    }

    pub fn ids(&self) -> &[VarId] {
        &self.ids
    }

    /// Coefficients of `v` over the independent sources.
    pub fn coefficients(&self, v: VarId) -> Result<&[C64]> {
        self.rows
            .get(&v)
            .map(|r| r.as_slice())
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable {v}")))
    }

    pub fn source_variances(&self) -> &[f64] {
        &self.var
    }

    fn idx(&self, v: &[VarId]) -> Result<Vec<usize>> {
        v.iter()
            .map(|x| {
                self.index
                    .get(x)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("unknown variable {x}")))
            })
            .collect()
    }

    /// Covariance block of the listed variables.
    pub fn cov(&self, v: &[VarId]) -> Result<DMatrix<C64>> {
        let ix = self.idx(v)?;
        Ok(DMatrix::from_fn(ix.len(), ix.len(), |i, j| self.cov[(ix[i], ix[j])]))
    }

    /// Source coefficients of `ix` scaled by the source standard deviations,
    /// one column per variable.
    fn whitened(&self, ix: &[usize]) -> DMatrix<C64> {
        let sd: Vec<f64> = self.var.iter().map(|v| v.sqrt()).collect();
        DMatrix::from_fn(self.var.len(), ix.len(), |s, j| self.rows[&self.ids[ix[j]]][s].conj() * sd[s])
    }

    /// Covariance of `targets` given `given`. Works in the source domain:
    /// the whitened target columns are projected off the span of the
    /// whitened conditioning columns, which avoids the cancellation of a
    /// covariance-level Schur complement at high SNR.
    pub fn cond_cov(&self, targets: &[VarId], given: &[VarId]) -> Result<DMatrix<C64>> {
        let ti = self.idx(targets)?;
        let gi = self.idx(given)?;
        if gi.is_empty() {
            return self.cov(targets);
        }
        let m = self.whitened(&ti);
        let b = self.whitened(&gi);
        let svd = b.svd(true, false);
        let u = svd.u.ok_or_else(|| Error::Degenerate("singular value decomposition failed".into()))?;
        let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i].powi(2) > EIG_FLOOR * total)
            .collect();
        let q = u.select_columns(&keep);
        let r = &m - &q * (q.adjoint() * &m);
        let mut out = r.adjoint() * r;
        hermitize(&mut out);
        Ok(out)
    }

    /// `h(targets | given)` in bits; negative infinity when the conditional
    /// covariance is singular.
    pub fn cond_entropy(&self, targets: &[VarId], given: &[VarId]) -> Result<f64> {
        if targets.is_empty() {
            return Err(Error::InvalidInput("entropy needs at least one target".into()));
        }
        let c = self.cond_cov(targets, given)?;
        let scale = trace_re(&self.cov(targets)?).max(f64::MIN_POSITIVE);
        let eig = SymmetricEigen::new(c).eigenvalues;
        let mut s = 0.0;
        for &l in eig.iter() {
            if l < -1e-10 * scale {
                return Err(Error::Degenerate(format!(
                    "conditional covariance has eigenvalue {l} (trace {scale})"
                )));
            }
            if l <= EIG_FLOOR * scale {
                return Ok(f64::NEG_INFINITY);
            }
            s += l.log2();
        }
        Ok(targets.len() as f64 * log2_pi_e() + s)
    }

    /// `I(subjects; targets | given)` in bits, computed on the part of the
    /// target space that is not already determined by `given`.
    pub fn cond_mi(&self, spec: &MiSpec) -> Result<f64> {
        spec.validate()?;
        let c1 = self.cond_cov(&spec.targets, &spec.given)?;
        let scale = trace_re(&self.cov(&spec.targets)?);
        if scale <= f64::MIN_POSITIVE {
            return Ok(0.0);
        }
        let e1 = SymmetricEigen::new(c1);
        let keep: Vec<usize> = (0..e1.eigenvalues.len())
            .filter(|&i| e1.eigenvalues[i] > EIG_FLOOR * scale)
            .collect();
        if keep.is_empty() {
            return Ok(0.0);
        }
        let b = DMatrix::from_fn(e1.eigenvectors.nrows(), keep.len(), |i, j| e1.eigenvectors[(i, keep[j])]);
        let ld1: f64 = keep.iter().map(|&i| e1.eigenvalues[i].log2()).sum();
        let mut given2 = spec.given.clone();
        given2.extend_from_slice(&spec.subjects);
        let c2 = self.cond_cov(&spec.targets, &given2)?;
        let mut m2 = b.adjoint() * c2 * &b;
        hermitize(&mut m2);
        let e2 = SymmetricEigen::new(m2).eigenvalues;
        let mut ld2 = 0.0;
        for &l in e2.iter() {
            if l <= EIG_FLOOR * scale {
                return Ok(f64::INFINITY);
            }
            ld2 += l.log2();
        }
        clamp_mi(ld1 - ld2, spec)
    }
}

impl InfoMeasure for GaussianSystem {
    fn entropy(&self, targets: &[VarId], given: &[VarId]) -> Result<f64> {
        self.cond_entropy(targets, given)
    }

    fn mi(&self, spec: &MiSpec) -> Result<f64> {
        self.cond_mi(spec)
    }

    fn n_states(&self) -> usize {
        self.n
    }
}

fn trace_re(m: &DMatrix<C64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

fn hermitize(m: &mut DMatrix<C64>) {
    let h = (m.clone() + m.adjoint()) * C64::new(0.5, 0.0);
    *m = h;
}

/// `I(X_k; S_{k,n} | U_{k,n})` in closed form, `log2((2g+1)/(g+1))` with
/// `g = |cross|^2 P`.
pub fn gap_term_closed_form(g: f64) -> f64 {
    ((2.0 * g + 1.0) / (g + 1.0)).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RxState;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn two_state() -> GaussianSystem {
        let ch = CompoundChannel::new(
            vec![RxState::new(c(1.3), c(0.9)), RxState::new(C64::new(0.4, 0.7), c(0.5))],
            vec![RxState::new(c(0.8), C64::new(1.1, -0.2)), RxState::new(c(1.7), c(0.3))],
            2.5,
            4.0,
        )
        .unwrap();
        GaussianSystem::from_channel(&ch).unwrap()
    }

    #[test]
    fn unit_noise_entropy() {
        let ch = CompoundChannel::single(c(1.0), c(0.0), c(0.0), c(1.0), 0.0, 0.0).unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        let h = g.cond_entropy(&[VarId::Y(1, 1)], &[]).unwrap();
        assert!((h - 3.094_191).abs() < 1e-6);
        assert!((h - log2_pi_e()).abs() < 1e-14);
    }

    #[test]
    fn zero_power_covariance() {
        let ch = CompoundChannel::single(c(1.0), c(0.5), c(0.5), c(1.0), 0.0, 0.0).unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        let m = g.cov(&[VarId::X(1), VarId::S(1, 1), VarId::U(1, 1), VarId::Y(2, 1)]).unwrap();
        let expect = [[0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]];
        for i in 0..4 {
            for j in 0..4 {
                assert!((m[(i, j)] - c(expect[i][j])).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn self_conditioning_is_degenerate() {
        let g = two_state();
        assert_eq!(g.cond_entropy(&[VarId::Y(1, 2)], &[VarId::Y(1, 2)]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn output_variance_matches_expansion() {
        let g = two_state();
        // rx1 state 2 (weaker cross gain): h11 = 0.4+0.7i, h21 = 0.5.
        let v = g.cov(&[VarId::Y(1, 2)]).unwrap()[(0, 0)].re;
        let expect = (0.16 + 0.49) * 2.5 + 0.25 * 4.0 + 1.0;
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn s_u_couple_only_through_x() {
        let g = two_state();
        let m = g.cov(&[VarId::S(1, 1), VarId::U(1, 1)]).unwrap();
        let h = C64::new(1.1, -0.2);
        assert!((m[(0, 1)].re - h.norm_sqr() * 2.5).abs() < 1e-12);
        assert!(m[(0, 1)].im.abs() < 1e-12);
        let m = g.cov(&[VarId::S(1, 2), VarId::U(2, 1)]).unwrap();
        assert!(m[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn schur_entropy_closed_form() {
        // h(Y_{1,2} | U_{1,1}, U_{2,2}) - log2(pi e)
        //   = log2(|h11|^2 P1 / (|h12,1|^2 P1 + 1) + 1 + |h21,2|^2 P2 / (|h21,2|^2 P2 + 1))
        let g = two_state();
        let h = g.cond_entropy(&[VarId::Y(1, 2)], &[VarId::U(1, 1), VarId::U(2, 2)]).unwrap();
        let (p1, p2) = (2.5, 4.0);
        let h11 = 0.16 + 0.49;
        let g12 = C64::new(1.1, -0.2).norm_sqr() * p1;
        let g21 = 0.25 * p2;
        let expect = (h11 * p1 / (g12 + 1.0) + 1.0 + g21 / (g21 + 1.0)).log2();
        assert!((h - log2_pi_e() - expect).abs() < 1e-12);
    }

    #[test]
    fn awgn_one_bit() {
        let ch = CompoundChannel::single(c(1.0), c(0.0), c(0.0), c(1.0), 1.0, 1.0).unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        let i = g.cond_mi(&MiSpec::new(vec![VarId::X(1)], vec![VarId::Y(1, 1)], vec![])).unwrap();
        assert!((i - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_term_matches_closed_form() {
        for g_val in [1.0f64, 0.01, 7.5, 300.0] {
            let h = g_val.sqrt();
            let ch = CompoundChannel::single(c(1.0), c(0.0), c(h), c(1.0), 1.0, 1.0).unwrap();
            let g = GaussianSystem::from_channel(&ch).unwrap();
            let i = g
                .cond_mi(&MiSpec::new(vec![VarId::X(1)], vec![VarId::S(1, 1)], vec![VarId::U(1, 1)]))
                .unwrap();
            assert!((i - gap_term_closed_form(g_val)).abs() < 1e-10, "g={g_val}");
        }
        assert!((gap_term_closed_form(1.0) - 0.584962500721156).abs() < 1e-12);
        assert!(gap_term_closed_form(1e12) < 1.0);
        assert!(1.0 - gap_term_closed_form(1e6) < 1e-5);
    }

    #[test]
    fn duplicate_states_handled_by_pinv() {
        let s = RxState::new(c(1.0), c(0.8));
        let ch = CompoundChannel::new(vec![s, s], vec![s, s], 3.0, 3.0).unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        // U_{2,1} = U_{2,2}; conditioning on both equals conditioning on one.
        let a = g
            .cond_mi(&MiSpec::new(vec![VarId::X(1)], vec![VarId::Y(1, 1)], vec![VarId::U(2, 1), VarId::U(2, 2)]))
            .unwrap();
        let b = g
            .cond_mi(&MiSpec::new(vec![VarId::X(1)], vec![VarId::Y(1, 1)], vec![VarId::U(2, 1)]))
            .unwrap();
        assert!((a - b).abs() < 1e-9);
        // Targets already determined by the conditioning contribute nothing.
        let z = g
            .cond_mi(&MiSpec::new(vec![VarId::X(2)], vec![VarId::U(2, 1)], vec![VarId::U(2, 2)]))
            .unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn overlapping_spec_rejected() {
        let g = two_state();
        let spec = MiSpec::new(vec![VarId::X(1)], vec![VarId::X(1)], vec![]);
        assert!(g.cond_mi(&spec).is_err());
    }
}
