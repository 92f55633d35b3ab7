//! Finite-state compound Gaussian interference channels and their
//! canonical degraded-chain form.

use crate::error::{Error, Result};
use nalgebra::Complex;
use std::cmp::Ordering;

pub type C64 = Complex<f64>;

/// One joint state. `h21` is the Tx2 -> Rx1 gain and `h12` the Tx1 -> Rx2
/// gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainState {
    pub h11: C64,
    pub h21: C64,
    pub h12: C64,
    pub h22: C64,
}

/// The pair of gains seen at one receiver in one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RxState {
    /// Gain of the desired transmitter.
    pub direct: C64,
    /// Gain of the interfering transmitter.
    pub cross: C64,
}

impl RxState {
    pub fn new(direct: C64, cross: C64) -> Self {
        RxState { direct, cross }
    }
}

/// Per-receiver state lists plus transmit powers (linear scale).
///
/// `rx1` holds `(h11, h21)` pairs and `rx2` holds `(h22, h12)` pairs, each
/// stored as `direct`/`cross`. The compound channel is the product of the
/// two lists: every receiver must decode under each of its own states.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundChannel {
    pub rx1: Vec<RxState>,
    pub rx2: Vec<RxState>,
    pub p1: f64,
    pub p2: f64,
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn state_order(x: &RxState, y: &RxState) -> Ordering {
    let key = |s: &RxState| (s.cross.norm(), s.direct.norm(), s.cross.arg(), s.direct.arg());
    let (a, b) = (key(x), key(y));
    b.0.total_cmp(&a.0)
        .then(b.1.total_cmp(&a.1))
        .then(a.2.total_cmp(&b.2))
        .then(a.3.total_cmp(&b.3))
}

impl CompoundChannel {
    pub fn new(rx1: Vec<RxState>, rx2: Vec<RxState>, p1: f64, p2: f64) -> Result<Self> {
        let ch = CompoundChannel { rx1, rx2, p1, p2 };
        ch.validate()?;
        Ok(ch)
    }

    /// Single-state (noncompound) channel.
    pub fn single(h11: C64, h21: C64, h12: C64, h22: C64, p1: f64, p2: f64) -> Result<Self> {
        Self::new(vec![RxState::new(h11, h21)], vec![RxState::new(h22, h12)], p1, p2)
    }

    /// Builds the per-receiver lists from joint 4-tuples. Only the marginal
    /// pairs matter for the capacity region, so the joint set is replaced by
    /// the product of its two projections.
    pub fn from_joint(states: &[GainState], p1: f64, p2: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("empty state list".into()));
        }
        let mut rx1: Vec<RxState> = Vec::new();
        let mut rx2: Vec<RxState> = Vec::new();
        for s in states {
            let a = RxState::new(s.h11, s.h21);
            let b = RxState::new(s.h22, s.h12);
            if !rx1.contains(&a) {
                rx1.push(a);
            }
            if !rx2.contains(&b) {
                rx2.push(b);
            }
        }
        Self::new(rx1, rx2, p1, p2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rx1.is_empty() || self.rx2.is_empty() {
            return Err(Error::InvalidInput("empty state list".into()));
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {p}")));
            }
        }
        for s in self.rx1.iter().chain(self.rx2.iter()) {
            if !finite(s.direct) || !finite(s.cross) {
                return Err(Error::InvalidInput("gains must be finite".into()));
            }
        }
        Ok(())
    }

    /// Sorts each receiver's list by decreasing cross-gain magnitude (ties:
    /// decreasing direct magnitude, then argument) and pads the shorter list
    /// by repeating its last state.
    pub fn canonicalize(&self) -> Result<Self> {
        self.validate()?;
        let mut rx1 = self.rx1.clone();
        let mut rx2 = self.rx2.clone();
        rx1.sort_by(state_order);
        rx2.sort_by(state_order);
        let n = rx1.len().max(rx2.len());
        for list in [&mut rx1, &mut rx2] {
            let last = *list.last().expect("nonempty");
            list.resize(n, last);
        }
        Ok(CompoundChannel { rx1, rx2, p1: self.p1, p2: self.p2 })
    }

    pub fn is_canonical(&self) -> bool {
        self.rx1.len() == self.rx2.len()
            && [&self.rx1, &self.rx2]
                .iter()
                .all(|l| l.windows(2).all(|w| state_order(&w[0], &w[1]) != Ordering::Greater))
    }

    /// Number of states after canonicalization.
    pub fn n_states(&self) -> usize {
        self.rx1.len().max(self.rx2.len())
    }

    pub fn power(&self, user: usize) -> f64 {
        if user == 1 {
            self.p1
        } else {
            self.p2
        }
    }

    /// State list of the receiver of `user`.
    pub fn rx(&self, user: usize) -> &[RxState] {
        if user == 1 {
            &self.rx1
        } else {
            &self.rx2
        }
    }
}

/// Degradation coefficients for the interference signal of one user.
///
/// `S_{k,1} = cross(1) X_k + Z_1` and for `n >= 2`
/// `S_{k,n} = ratio(n) S_{k,n-1} + residual(n) Z_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct UserChain {
    /// Gain of this user's signal at the other receiver, per state.
    pub cross: Vec<C64>,
    /// `ratio[0]` is unused and kept at zero.
    pub ratio: Vec<C64>,
    /// `residual[0]` is 1 (the first stage carries a full unit noise).
    pub residual: Vec<f64>,
    /// Gain of this user's signal at its own receiver, per state.
    pub direct: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegradedChain {
    pub users: [UserChain; 2],
    pub p: [f64; 2],
}

impl DegradedChain {
    pub fn n_states(&self) -> usize {
        self.users[0].cross.len()
    }

    pub fn user(&self, k: usize) -> &UserChain {
        &self.users[k - 1]
    }

    /// Variance of `S_{k,n}` obtained by propagating the recursion.
    pub fn stage_variance(&self, k: usize, n: usize) -> f64 {
        let u = self.user(k);
        let mut v = u.cross[0].norm_sqr() * self.p[k - 1] + 1.0;
        for m in 1..n {
            let r2 = u.ratio[m].norm_sqr();
            v = r2 * v + u.residual[m] * u.residual[m];
        }
        v
    }
}

/// Builds the degraded chain of a canonical channel.
pub fn build_degraded_chain(ch: &CompoundChannel) -> Result<DegradedChain> {
    ch.validate()?;
    if !ch.is_canonical() {
        return Err(Error::Precondition("channel is not canonical".into()));
    }
    let make = |own: &[RxState], other: &[RxState]| -> Result<UserChain> {
        let n = own.len();
        let cross: Vec<C64> = other.iter().map(|s| s.cross).collect();
        let direct: Vec<C64> = own.iter().map(|s| s.direct).collect();
        let mut ratio = vec![C64::new(0.0, 0.0); n];
        let mut residual = vec![1.0; n];
        for m in 1..n {
            let r = if cross[m - 1].norm() == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                cross[m] / cross[m - 1]
            };
            let r2 = r.norm_sqr();
            if r2 > 1.0 + 1e-12 {
                return Err(Error::Invariant(format!("degradation ratio |r|^2 = {r2} exceeds 1")));
            }
            ratio[m] = r;
            residual[m] = (1.0 - r2).max(0.0).sqrt();
        }
        Ok(UserChain { cross, ratio, residual, direct })
    };
    // User 1's interference is seen at receiver 2 through rx2's cross gains.
    let u1 = make(&ch.rx1, &ch.rx2)?;
    let u2 = make(&ch.rx2, &ch.rx1)?;
    Ok(DegradedChain { users: [u1, u2], p: [ch.p1, ch.p2] })
}
