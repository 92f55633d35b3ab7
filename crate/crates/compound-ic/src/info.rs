//! Variable identifiers and the entropy interface shared by the Gaussian
//! engine and the discrete (deterministic-channel) engine.

use crate::error::{Error, Result};
use std::fmt;

/// A model variable. User indices are 1 or 2; state indices run from 1 to N
/// with state 1 the strongest interference.
///
/// `S(k, n)` is user `k`'s signal as observed (with noise) at the other
/// receiver in state `n`; `U(k, n)` is an independent copy of it given
/// `X_k`; `Y(k, n)` is receiver `k`'s output in state `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    X(usize),
    U(usize, usize),
    S(usize, usize),
    Y(usize, usize),
}

impl VarId {
    pub fn user(&self) -> usize {
        match *self {
            VarId::X(k) | VarId::U(k, _) | VarId::S(k, _) | VarId::Y(k, _) => k,
        }
    }

    pub fn state(&self) -> Option<usize> {
        match *self {
            VarId::X(_) => None,
            VarId::U(_, n) | VarId::S(_, n) | VarId::Y(_, n) => Some(n),
        }
    }

    pub fn validate(&self, n_states: usize) -> Result<()> {
        let k = self.user();
        if k != 1 && k != 2 {
            return Err(Error::InvalidInput(format!("{self}: user must be 1 or 2")));
        }
        if let Some(n) = self.state() {
            if n == 0 || n > n_states {
                return Err(Error::InvalidInput(format!(
                    "{self}: state index must be in 1..={n_states}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarId::X(k) => write!(f, "X{k}"),
            VarId::U(k, n) => write!(f, "U{k}.{n}"),
            VarId::S(k, n) => write!(f, "S{k}.{n}"),
            VarId::Y(k, n) => write!(f, "Y{k}.{n}"),
        }
    }
}

/// `I(subjects; targets | given)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MiSpec {
    pub subjects: Vec<VarId>,
    pub targets: Vec<VarId>,
    pub given: Vec<VarId>,
}

impl MiSpec {
    pub fn new(subjects: Vec<VarId>, targets: Vec<VarId>, given: Vec<VarId>) -> Self {
        MiSpec { subjects, targets, given }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subjects.is_empty() || self.targets.is_empty() {
            return Err(Error::InvalidInput("MI spec needs nonempty subjects and targets".into()));
        }
        let overlap = |a: &[VarId], b: &[VarId]| a.iter().any(|x| b.contains(x));
        if overlap(&self.subjects, &self.targets)
            || overlap(&self.subjects, &self.given)
            || overlap(&self.targets, &self.given)
        {
            return Err(Error::InvalidInput(format!("MI spec sets overlap: {self}")));
        }
        Ok(())
    }
}

fn join(v: &[VarId]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for MiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I({};{}", join(&self.targets), join(&self.subjects))?;
        if !self.given.is_empty() {
            write!(f, "|{}", join(&self.given))?;
        }
        write!(f, ")")
    }
}

/// Entropy and mutual information in bits.
pub trait InfoMeasure {
    /// `h(targets | given)`. May return negative infinity for a target that
    /// is a deterministic function of the conditioning.
    fn entropy(&self, targets: &[VarId], given: &[VarId]) -> Result<f64>;

    fn mi(&self, spec: &MiSpec) -> Result<f64>;

    fn n_states(&self) -> usize;
}

/// Clamp applied to mutual-information values: tiny negative round-off is
/// mapped to zero, anything below `-MI_TOL` is an error.
pub const MI_TOL: f64 = 1e-9;

pub(crate) fn clamp_mi(value: f64, spec: &MiSpec) -> Result<f64> {
    if value.is_nan() {
        return Err(Error::Degenerate(format!("{spec} evaluated to NaN")));
    }
    if value < -MI_TOL {
        return Err(Error::Degenerate(format!("{spec} = {value} is negative")));
    }
    Ok(value.max(0.0))
}
