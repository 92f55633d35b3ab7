//! Gap constants and the certification of the bounded gap between the
//! inner and outer regions.

use crate::bounds::{bound_value, evaluate_gaussian, inner_region, outer_region, EvaluatedSystem};
use crate::channel::CompoundChannel;
use crate::error::Result;
use crate::info::{InfoMeasure, MiSpec, VarId};
use crate::polytope::{dual_min_prime, Region2D};

/// Tolerance of the per-direction and vertex checks.
pub const GAP_TOL: f64 = 1e-6;

/// `(Delta1, Delta2)` with `Delta1 = max_n I(X2; S_{2,n} | U_{2,n})` and
/// `Delta2` symmetric.
pub fn compute_delta(info: &dyn InfoMeasure) -> Result<[f64; 2]> {
    let mut d = [0.0f64; 2];
    for (k, slot) in d.iter_mut().enumerate() {
        let o = 2 - k;
        for n in 1..=info.n_states() {
            let v = info.mi(&MiSpec::new(vec![VarId::X(o)], vec![VarId::S(o, n)], vec![VarId::U(o, n)]))?;
            *slot = slot.max(v);
        }
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub delta1: f64,
    pub delta2: f64,
    /// Largest `(c_out - c_in) / (a + b)` over the sampled directions, both
    /// values taken on the same outer-optimal certificate.
    pub per_direction_max_gap: f64,
    /// Largest `c_out - c_in - (a Delta1 + b Delta2)` on those certificates.
    pub certificate_excess: f64,
    /// Largest normalized difference of the two support functions.
    pub support_gap: f64,
    /// Largest violation of the inner region by an outer vertex shifted by
    /// `(Delta1, Delta2)` and clipped at zero.
    pub shrink_violation: f64,
    /// Largest violation, by an outer vertex shifted by `(Delta1, Delta2)`
    /// without clipping, of the inner halfspaces carried by omega-free
    /// certificates.
    pub shifted_violation: f64,
    pub directions: usize,
    pub certified: bool,
}

impl GapReport {
    pub fn max_delta(&self) -> f64 {
        self.delta1.max(self.delta2)
    }

    /// Human-readable summary with six decimals.
    pub fn render(&self) -> String {
        format!(
            "delta1={:.6}\ndelta2={:.6}\nper_direction_max_gap={:.6}\ncertificate_excess={:.3e}\nsupport_gap={:.6}\nshrink_violation={:.3e}\nshifted_violation={:.3e}\ndirections={}\ncertified={}\n",
            self.delta1,
            self.delta2,
            self.per_direction_max_gap,
            self.certificate_excess,
            self.support_gap,
            self.shrink_violation,
            self.shifted_violation,
            self.directions,
            self.certified
        )
    }
}

/// The inner and outer regions used by a report.
#[derive(Clone, Debug)]
pub struct GapRun {
    pub report: GapReport,
    pub inner: Region2D,
    pub outer: Region2D,
}

/// Runs every gap check on an evaluated system.
pub fn certify_evaluated(ev: &EvaluatedSystem, directions: usize) -> Result<GapRun> {
    let [d1, d2] = ev.deltas();
    let inner = inner_region(ev, directions, true)?;
    let outer = outer_region(ev, directions, true)?;
    let mut per_dir: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    let mut support_gap: f64 = 0.0;
    for &(a, b, co) in &outer.samples {
        let bv = bound_value(ev, a, b)?;
        let s = a + b;
        per_dir = per_dir.max((bv.c_out - bv.c_in) / s);
        excess = excess.max(bv.c_out - bv.c_in - (a * d1 + b * d2));
        let ci = inner.samples.iter().find(|x| x.0 == a && x.1 == b).map(|x| x.2);
        let ci = match ci {
            Some(v) => v,
            None => crate::bounds::inner_support(ev, a, b)?.0,
        };
        support_gap = support_gap.max((co - ci) / s);
    }
    let mut shrink: f64 = 0.0;
    for v in &outer.vertices {
        let p = [(v[0] - d1).max(0.0), (v[1] - d2).max(0.0)];
        shrink = shrink.max(inner.violation(p));
    }
    let mut shifted: f64 = 0.0;
    let prime: Vec<(f64, f64, f64)> = inner
        .samples
        .iter()
        .map(|&(a, b, _)| dual_min_prime(&ev.sys, &ev.inner, a, b).map(|c| (a, b, c.objective(&ev.inner))))
        .collect::<Result<_>>()?;
    for v in &outer.vertices {
        for &(a, b, c) in &prime {
            shifted = shifted.max(a * (v[0] - d1) + b * (v[1] - d2) - c);
        }
    }
    let excess = excess.max(0.0);
    let certified = d1 < 1.0
        && d2 < 1.0
        && per_dir <= d1.max(d2) + GAP_TOL
        && excess <= GAP_TOL
        && shrink <= GAP_TOL;
    let report = GapReport {
        delta1: d1,
        delta2: d2,
        per_direction_max_gap: per_dir,
        certificate_excess: excess,
        support_gap,
        shrink_violation: shrink,
        shifted_violation: shifted,
        directions: outer.samples.len(),
        certified,
    };
    Ok(GapRun { report, inner, outer })
}

/// Gap certification of a Gaussian channel with Gaussian inputs.
pub fn certify(ch: &CompoundChannel, directions: usize) -> Result<GapReport> {
    Ok(certify_evaluated(&evaluate_gaussian(ch)?, directions)?.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{RxState, C64};
    use crate::gaussian::{gap_term_closed_form, GaussianSystem};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn zero_cross_gains_give_zero_delta() {
        let ch = CompoundChannel::single(c(1.0), c(0.0), c(0.0), c(2.0), 5.0, 7.0).unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        assert_eq!(compute_delta(&g).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn unit_snr_binding_state() {
        // |h21|^2 P2 = 1 in the strongest state.
        let ch = CompoundChannel::new(
            vec![RxState::new(c(1.0), c(0.5)), RxState::new(c(1.0), c(0.25))],
            vec![RxState::new(c(1.0), c(0.1)), RxState::new(c(1.0), c(0.1))],
            1.0,
            4.0,
        )
        .unwrap();
        let g = GaussianSystem::from_channel(&ch).unwrap();
        let d = compute_delta(&g).unwrap();
        assert!((d[0] - 1.5f64.log2()).abs() < 1e-10);
        assert!((d[1] - gap_term_closed_form(0.01)).abs() < 1e-10);
        let ev = evaluate_gaussian(&ch).unwrap();
        let e = ev.deltas();
        assert!((e[0] - d[0]).abs() < 1e-12 && (e[1] - d[1]).abs() < 1e-12);
    }

    #[test]
    fn two_state_instance_report() {
        let ch = CompoundChannel::new(
            vec![RxState::new(c(1.3), C64::new(0.9, 0.4)), RxState::new(c(0.7), c(0.2))],
            vec![RxState::new(c(0.8), C64::new(1.1, -0.2)), RxState::new(c(1.7), c(0.3))],
            2.5,
            4.0,
        )
        .unwrap();
        let r = certify(&ch, 19).unwrap();
        assert!(r.max_delta() < 1.0);
        assert!(r.per_direction_max_gap <= r.max_delta() + GAP_TOL);
        assert!(r.certificate_excess <= GAP_TOL);
        assert!(r.shifted_violation <= GAP_TOL, "{}", r.render());
        assert!(r.render().contains("certified="));
    }
}
