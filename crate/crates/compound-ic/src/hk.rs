//! Compact Han-Kobayashi evaluator for a single-state Gaussian interference
//! channel with the common message carried by an independent copy of the
//! interference seen at the other receiver. Used as an independent check of
//! the general generator on duplicated-state channels.

use crate::channel::CompoundChannel;
use crate::error::{Error, Result};
use crate::polytope::{support_value, HalfspaceSystem};

/// Per-receiver mutual information constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HkTerms {
    /// I(Y;X|U_own,U_other)
    pub a: f64,
    /// I(Y;X,U_other|U_own)
    pub b: f64,
    /// I(Y;X|U_other)
    pub c: f64,
    /// I(Y;X,U_other)
    pub d: f64,
}

fn terms(s: f64, g_own: f64, g_other: f64) -> HkTerms {
    let v = 1.0 + g_other / (g_other + 1.0);
    let private = s / (1.0 + g_own);
    HkTerms {
        a: ((private + v) / v).log2(),
        b: ((private + g_other + 1.0) / v).log2(),
        c: ((s + v) / v).log2(),
        d: ((s + g_other + 1.0) / v).log2(),
    }
}

/// Terms for both receivers; the channel must have a single distinct state.
pub fn hk_terms(ch: &CompoundChannel) -> Result<[HkTerms; 2]> {
    ch.validate()?;
    let distinct = |v: &[crate::channel::RxState]| v.iter().all(|s| *s == v[0]);
    if !distinct(&ch.rx1) || !distinct(&ch.rx2) {
        return Err(Error::InvalidInput("compact evaluator needs a single distinct state".into()));
    }
    let (r1, r2) = (ch.rx1[0], ch.rx2[0]);
    // g_k: power of X_k at the other receiver.
    let g1 = r2.cross.norm_sqr() * ch.p1;
    let g2 = r1.cross.norm_sqr() * ch.p2;
    let s1 = r1.direct.norm_sqr() * ch.p1;
    let s2 = r2.direct.norm_sqr() * ch.p2;
    Ok([terms(s1, g1, g2), terms(s2, g2, g1)])
}

/// The seven-inequality region in (R1, R2) with nonnegativity.
pub fn hk_region(ch: &CompoundChannel) -> Result<HalfspaceSystem> {
    let [t1, t2] = hk_terms(ch)?;
    let mut hs = HalfspaceSystem::new(vec!["R1".into(), "R2".into()]);
    hs.add_le(vec![1.0, 0.0], t1.c)
        .add_le(vec![0.0, 1.0], t2.c)
        .add_le(vec![1.0, 1.0], t1.a + t2.d)
        .add_le(vec![1.0, 1.0], t1.b + t2.b)
        .add_le(vec![1.0, 1.0], t2.a + t1.d)
        .add_le(vec![1.0, 2.0], t2.a + t1.b + t2.d)
        .add_le(vec![2.0, 1.0], t1.a + t2.b + t1.d)
        .add_ge(vec![1.0, 0.0], 0.0)
        .add_ge(vec![0.0, 1.0], 0.0);
    Ok(hs)
}

pub fn hk_support(ch: &CompoundChannel, a: f64, b: f64) -> Result<f64> {
    Ok(support_value(&hk_region(ch)?, &[a, b])?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_degraded_chain;
    use crate::gaussian::GaussianSystem;
    use crate::info::{MiSpec, VarId};
    use crate::sample::{random_channel, rng};

    #[test]
    fn closed_forms_match_covariance_engine() {
        let mut r = rng(5);
        for _ in 0..20 {
            let ch = random_channel(&mut r, 1).canonicalize().unwrap();
            let g = GaussianSystem::build(&build_degraded_chain(&ch).unwrap()).unwrap();
            let t = hk_terms(&ch).unwrap();
            for k in 1..=2usize {
                let o = 3 - k;
                let (x, y, uk, uo) = (VarId::X(k), VarId::Y(k, 1), VarId::U(k, 1), VarId::U(o, 1));
                let mi = |s: Vec<VarId>, c: Vec<VarId>| g.cond_mi(&MiSpec::new(s, vec![y], c)).unwrap();
                let tk = t[k - 1];
                assert!((tk.a - mi(vec![x], vec![uk, uo])).abs() < 1e-9);
                assert!((tk.b - mi(vec![x, uo], vec![uk])).abs() < 1e-9);
                assert!((tk.c - mi(vec![x], vec![uo])).abs() < 1e-9);
                assert!((tk.d - mi(vec![x, uo], vec![])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn duplicated_states_reduce_to_compact_region() {
        let mut r = rng(8);
        for _ in 0..10 {
            let ch = crate::sample::random_duplicated_channel(&mut r);
            let ev = crate::bounds::evaluate_gaussian(&ch.canonicalize().unwrap()).unwrap();
            for (a, b) in crate::polytope::direction_fan(9) {
                let g = crate::bounds::inner_support(&ev, a, b).unwrap().0;
                let h = hk_support(&ch, a, b).unwrap();
                assert!((g - h).abs() < 1e-7, "({a},{b}) {g} vs {h}");
            }
        }
    }

    #[test]
    fn rejects_two_distinct_states() {
        let ch = random_channel(&mut rng(1), 2);
        assert!(hk_terms(&ch).is_err());
    }
}
