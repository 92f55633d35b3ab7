//! Inner and genie-aided outer bounds: per-constraint constants, their
//! certificate-weighted sums, and the two-dimensional regions.

use crate::channel::CompoundChannel;
use crate::constraints::{gen_nstate, ConstraintSystem};
use crate::error::{Error, Result};
use crate::gaussian::GaussianSystem;
use crate::info::{InfoMeasure, MiSpec, VarId};
use crate::polytope::{
    dual_min_prime, lifted_support, sweep_region, user_totals, DualCertificate, Point, Region2D,
};

/// Constants of every inequality of a constraint system under one input
/// distribution.
#[derive(Clone, Debug)]
pub struct EvaluatedSystem {
    pub sys: ConstraintSystem,
    /// Inner-bound right-hand sides `I(...)`.
    pub inner: Vec<f64>,
    /// `h(Y | V)` with the genie set `V` of each inequality.
    pub h_out: Vec<f64>,
    /// `h(S_{o,n} | X_o)` for the interferer `o` and state `n` of each
    /// inequality.
    pub h_noise: Vec<f64>,
    /// `I(X_o; S_{o,n} | U_{o,n})` per inequality.
    pub gap: Vec<f64>,
}

impl EvaluatedSystem {
    pub fn new(sys: ConstraintSystem, info: &dyn InfoMeasure) -> Result<Self> {
        let inner = sys.evaluate(info)?;
        let (h_out, h_noise) = outer_entropies(&sys, info)?;
        let mut gap = Vec::with_capacity(sys.constraints.len());
        for c in &sys.constraints {
            let (k, n) = c.receiver;
            let o = 3 - k;
            gap.push(info.mi(&MiSpec::new(vec![VarId::X(o)], vec![VarId::S(o, n)], vec![VarId::U(o, n)]))?);
        }
        Ok(EvaluatedSystem { sys, inner, h_out, h_noise, gap })
    }

    /// Outer-bound right-hand sides `h(Y | V) - h(S_{o,n} | X_o)`.
    pub fn outer(&self) -> Vec<f64> {
        self.h_out.iter().zip(&self.h_noise).map(|(a, b)| a - b).collect()
    }

    pub fn n_states(&self) -> usize {
        self.sys.n_states
    }

    /// `(Delta1, Delta2)`: the largest gap term among the inequalities of
    /// each receiver, that is the largest `I(X_o; S_{o,n} | U_{o,n})`
    /// over states for the user `o` interfering at receiver `k`.
    pub fn deltas(&self) -> [f64; 2] {
        let mut d = [0.0f64; 2];
        for (c, g) in self.sys.constraints.iter().zip(&self.gap) {
            d[c.receiver.0 - 1] = d[c.receiver.0 - 1].max(*g);
        }
        d
    }
}

/// `(h(Y | V), h(S_{o,n} | X_o))` for every inequality.
pub fn outer_entropies(sys: &ConstraintSystem, info: &dyn InfoMeasure) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut hy = Vec::with_capacity(sys.constraints.len());
    let mut hs = Vec::with_capacity(sys.constraints.len());
    for c in &sys.constraints {
        let (k, n) = c.receiver;
        let o = 3 - k;
        hy.push(info.entropy(&[VarId::Y(k, n)], c.genie())?);
        hs.push(info.entropy(&[VarId::S(o, n)], &[VarId::X(o)])?);
    }
    Ok((hy, hs))
}

/// Constraint system and Gaussian-input covariance of a channel.
pub fn gaussian_setup(ch: &CompoundChannel) -> Result<(ConstraintSystem, GaussianSystem)> {
    let g = GaussianSystem::from_channel(ch)?;
    let sys = gen_nstate(g.n_states())?;
    Ok((sys, g))
}

pub fn evaluate_gaussian(ch: &CompoundChannel) -> Result<EvaluatedSystem> {
    let (sys, g) = gaussian_setup(ch)?;
    EvaluatedSystem::new(sys, &g)
}

/// `sum_i lambda_i I_i`.
pub fn c_in(cert: &DualCertificate, ev: &EvaluatedSystem) -> f64 {
    cert.objective(&ev.inner)
}

/// The genie-aided value of an omega-free certificate: weighted output
/// entropies minus, per receiver, the summed weights times the interferer's
/// noise entropy.
pub fn c_out(cert: &DualCertificate, ev: &EvaluatedSystem) -> Result<f64> {
    if !cert.is_prime() {
        return Err(Error::Precondition("outer value needs an omega-free certificate".into()));
    }
    let mut total = 0.0;
    for (i, &l) in cert.lambda.iter().enumerate() {
        if l != 0.0 {
            total += l * ev.h_out[i];
        }
    }
    // Group the subtracted noise entropies per receiver.
    let mut per_rx: Vec<((usize, usize), f64, f64)> = Vec::new();
    for (i, c) in ev.sys.constraints.iter().enumerate() {
        match per_rx.iter_mut().find(|e| e.0 == c.receiver) {
            Some(e) => e.1 += cert.lambda[i],
            None => per_rx.push((c.receiver, cert.lambda[i], ev.h_noise[i])),
        }
    }
    for (_, w, h) in per_rx {
        if w != 0.0 {
            total -= w * h;
        }
    }
    Ok(total)
}

/// Inner and outer values of one certificate in one direction.
#[derive(Clone, Debug)]
pub struct BoundValue {
    pub a: f64,
    pub b: f64,
    pub certificate: DualCertificate,
    pub c_in: f64,
    pub c_out: f64,
}

/// Evaluates both bounds on the omega-free certificate minimizing the
/// outer value in direction `(a, b)`.
pub fn bound_value(ev: &EvaluatedSystem, a: f64, b: f64) -> Result<BoundValue> {
    let cert = dual_min_prime(&ev.sys, &ev.outer(), a, b)?;
    bound_value_for(ev, cert)
}

pub fn bound_value_for(ev: &EvaluatedSystem, cert: DualCertificate) -> Result<BoundValue> {
    Ok(BoundValue { a: cert.a, b: cert.b, c_in: c_in(&cert, ev), c_out: c_out(&cert, ev)?, certificate: cert })
}

/// Support of the inner region and a supporting point.
pub fn inner_support(ev: &EvaluatedSystem, a: f64, b: f64) -> Result<(f64, Point)> {
    let (c, x) = lifted_support(&ev.sys, &ev.inner, a, b)?;
    Ok((c, user_totals(ev.n_states(), &x)))
}

/// Support of the outer region (the genie constants with nonnegative
/// user rates) and a supporting point.
pub fn outer_support(ev: &EvaluatedSystem, a: f64, b: f64) -> Result<(f64, Point)> {
    let (c, x) = lifted_support(&ev.sys, &ev.outer(), a, b)?;
    Ok((c, user_totals(ev.n_states(), &x)))
}

pub fn inner_region(ev: &EvaluatedSystem, directions: usize, refine: bool) -> Result<Region2D> {
    sweep_region(|a, b| inner_support(ev, a, b), directions, refine)
}

pub fn outer_region(ev: &EvaluatedSystem, directions: usize, refine: bool) -> Result<Region2D> {
    sweep_region(|a, b| outer_support(ev, a, b), directions, refine)
}

/// Inner region of a Gaussian channel with Gaussian inputs.
pub fn region_inner(ch: &CompoundChannel, directions: usize) -> Result<Region2D> {
    inner_region(&evaluate_gaussian(ch)?, directions, true)
}

/// Outer region of a Gaussian channel with Gaussian inputs.
pub fn region_outer(ch: &CompoundChannel, directions: usize) -> Result<Region2D> {
    outer_region(&evaluate_gaussian(ch)?, directions, true)
}
