//! Exact evaluation for compound deterministic interference channels with
//! finite alphabets. Entropies are computed by enumerating the joint table
//! of the two independent inputs.

use crate::bounds::{inner_support, outer_support, EvaluatedSystem};
use crate::constraints::gen_nstate;
use crate::error::{Error, Result};
use crate::gap::{certify_evaluated, GapReport};
use crate::info::{clamp_mi, InfoMeasure, MiSpec, VarId};
use crate::polytope::direction_fan;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest admissible alphabet.
pub const MAX_ALPHABET: usize = 8;
/// Largest joint table that is enumerated.
pub const MAX_CELLS: usize = 10_000_000;

/// One user's maps. States are numbered from 1 (strongest interference).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetUser {
    /// Input alphabet size.
    pub x_size: usize,
    /// `s_1 = s_first[x]`, the interference this user causes in state 1.
    pub s_first: Vec<usize>,
    /// `s_{n+1} = degrade[n-1][s_n]`.
    #[serde(default)]
    pub degrade: Vec<Vec<usize>>,
    /// Output of this user's receiver in state `n`:
    /// `y = out[n-1][x][s]` with `s` the other user's state-`n` signal.
    pub out: Vec<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetChannel {
    pub user1: DetUser,
    pub user2: DetUser,
}

fn alphabet(values: &[usize]) -> usize {
    values.iter().copied().max().map_or(0, |m| m + 1)
}

impl DetChannel {
    pub fn user(&self, k: usize) -> &DetUser {
        if k == 1 {
            &self.user1
        } else {
            &self.user2
        }
    }

    pub fn n_states(&self) -> usize {
        self.user1.degrade.len() + 1
    }

    /// `s_{k,n}` for input `x` of user `k`.
    pub fn s(&self, k: usize, n: usize, x: usize) -> usize {
        let u = self.user(k);
        let mut s = u.s_first[x];
        for d in &u.degrade[..n - 1] {
            s = d[s];
        }
        s
    }

    /// Size of the state-`n` interference alphabet of user `k`.
    pub fn s_size(&self, k: usize, n: usize) -> usize {
        alphabet(&(0..self.user(k).x_size).map(|x| self.s(k, n, x)).collect::<Vec<_>>())
    }

    pub fn y(&self, k: usize, n: usize, xk: usize, so: usize) -> usize {
        self.user(k).out[n - 1][xk][so]
    }

    /// Checks shapes, alphabet sizes, and invertibility of every output map
    /// in its interference argument.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        let n = self.n_states();
        if self.user2.degrade.len() + 1 != n {
            return bad("both users need the same number of states".into());
        }
        for k in 1..=2 {
            let u = self.user(k);
            if u.x_size == 0 || u.x_size > MAX_ALPHABET {
                return bad(format!("user {k}: input alphabet must have 1..={MAX_ALPHABET} symbols"));
            }
            if u.s_first.len() != u.x_size {
                return bad(format!("user {k}: s_first needs {} entries", u.x_size));
            }
            let mut size = alphabet(&u.s_first);
            if size > MAX_ALPHABET {
                return bad(format!("user {k}: interference alphabet exceeds {MAX_ALPHABET}"));
            }
            for (i, d) in u.degrade.iter().enumerate() {
                if d.len() < size {
                    return bad(format!("user {k}: degrade[{i}] needs {size} entries"));
                }
                size = alphabet(d);
                if size > MAX_ALPHABET {
                    return bad(format!("user {k}: interference alphabet exceeds {MAX_ALPHABET}"));
                }
            }
            if u.out.len() != n {
                return bad(format!("user {k}: out needs {n} state tables"));
            }
        }
        for k in 1..=2 {
            let o = 3 - k;
            let u = self.user(k);
            for st in 1..=n {
                let table = &u.out[st - 1];
                let ss = self.s_size(o, st);
                if table.len() != u.x_size {
                    return bad(format!("user {k}: out[{}] needs {} rows", st - 1, u.x_size));
                }
                for (x, row) in table.iter().enumerate() {
                    if row.len() < ss {
                        return bad(format!("user {k}: out[{}][{x}] needs {ss} entries", st - 1));
                    }
                    if row.iter().any(|&y| y >= MAX_ALPHABET) {
                        return bad(format!("user {k}: output alphabet exceeds {MAX_ALPHABET}"));
                    }
                    let mut seen = row[..ss].to_vec();
                    seen.sort_unstable();
                    seen.dedup();
                    if seen.len() != ss {
                        return bad(format!("user {k}: out[{}][{x}] is not invertible in the interference", st - 1));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Independent input distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteDist {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl DiscreteDist {
    pub fn uniform(ch: &DetChannel) -> Self {
        let u = |n: usize| vec![1.0 / n as f64; n];
        DiscreteDist { p1: u(ch.user1.x_size), p2: u(ch.user2.x_size) }
    }

    pub fn validate(&self, ch: &DetChannel) -> Result<()> {
        for (k, p) in [(1, &self.p1), (2, &self.p2)] {
            if p.len() != ch.user(k).x_size {
                return Err(Error::InvalidInput(format!("p{k} needs {} entries", ch.user(k).x_size)));
            }
            if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidInput(format!("p{k} has a negative or non-finite entry")));
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("p{k} sums to {s}")));
            }
        }
        Ok(())
    }
}

/// A deterministic channel with an input distribution, as an information
/// source. `U` variables coincide with the corresponding `S` variables.
#[derive(Clone, Debug)]
pub struct DetSystem {
    ch: DetChannel,
    dist: DiscreteDist,
}

impl DetSystem {
    pub fn new(ch: DetChannel, dist: DiscreteDist) -> Result<Self> {
        ch.validate()?;
        dist.validate(&ch)?;
        if ch.user1.x_size * ch.user2.x_size > MAX_CELLS {
            return Err(Error::ResourceLimit("joint table too large".into()));
        }
        Ok(DetSystem { ch, dist })
    }

    pub fn channel(&self) -> &DetChannel {
        &self.ch
    }

    fn value(&self, v: VarId, x: [usize; 2]) -> usize {
        match v {
            VarId::X(k) => x[k - 1],
            VarId::U(k, n) | VarId::S(k, n) => self.ch.s(k, n, x[k - 1]),
            VarId::Y(k, n) => {
                let o = 3 - k;
                self.ch.y(k, n, x[k - 1], self.ch.s(o, n, x[o - 1]))
            }
        }
    }

    /// Joint entropy of a canonical variable set.
    fn joint(&self, vars: &[VarId]) -> f64 {
        if vars.is_empty() {
            return 0.0;
        }
        let mut table: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (x1, &q1) in self.dist.p1.iter().enumerate() {
            for (x2, &q2) in self.dist.p2.iter().enumerate() {
                let p = q1 * q2;
                if p == 0.0 {
                    continue;
                }
                let key: Vec<usize> = vars.iter().map(|&v| self.value(v, [x1, x2])).collect();
                *table.entry(key).or_insert(0.0) += p;
            }
        }
        table.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }
}

/// Maps `U` to `S`, sorts and removes duplicates.
fn canonical(vars: &[VarId]) -> Vec<VarId> {
    let mut v: Vec<VarId> = vars
        .iter()
        .map(|&x| match x {
            VarId::U(k, n) => VarId::S(k, n),
            other => other,
        })
        .collect();
    v.sort();
    v.dedup();
    v
}

impl InfoMeasure for DetSystem {
    fn entropy(&self, targets: &[VarId], given: &[VarId]) -> Result<f64> {
        for v in targets.iter().chain(given) {
            v.validate(self.n_states())?;
        }
        let mut all = targets.to_vec();
        all.extend_from_slice(given);
        let (a, g) = (canonical(&all), canonical(given));
        if a == g {
            return Ok(0.0);
        }
        Ok(self.joint(&a) - self.joint(&g))
    }

    fn mi(&self, spec: &MiSpec) -> Result<f64> {
        spec.validate()?;
        let mut g2 = spec.given.clone();
        g2.extend_from_slice(&spec.subjects);
        let h1 = self.entropy(&spec.targets, &spec.given)?;
        let h2 = self.entropy(&spec.targets, &g2)?;
        clamp_mi(h1 - h2, spec)
    }

    fn n_states(&self) -> usize {
        self.ch.n_states()
    }
}

/// Evaluated constraint system of a deterministic channel.
pub fn evaluate_det(sys: &DetSystem) -> Result<EvaluatedSystem> {
    EvaluatedSystem::new(gen_nstate(sys.n_states())?, sys)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetReport {
    pub gap: GapReport,
    /// Largest `|outer support - inner support|` over the direction fan.
    pub max_support_diff: f64,
    pub certified: bool,
}

/// Tolerance of the support comparison.
pub const DET_TOL: f64 = 1e-9;

/// Compares inner and outer supports on a fan of directions and runs the
/// gap checks; certified when the supports agree and both gaps are zero.
pub fn det_certify(sys: &DetSystem, directions: usize) -> Result<DetReport> {
    let ev = evaluate_det(sys)?;
    let mut diff: f64 = 0.0;
    for (a, b) in direction_fan(directions) {
        let (ci, _) = inner_support(&ev, a, b)?;
        let (co, _) = outer_support(&ev, a, b)?;
        diff = diff.max((co - ci).abs());
    }
    let gap = certify_evaluated(&ev, directions)?.report;
    let certified = diff <= DET_TOL && gap.delta1 == 0.0 && gap.delta2 == 0.0 && gap.certified;
    Ok(DetReport { gap, max_support_diff: diff, certified })
}

/// Fixture channels with modulo-arithmetic interference maps.
pub mod fixtures {
    use super::*;

    fn table(x_size: usize, s_size: usize, f: impl Fn(usize, usize) -> usize) -> Vec<Vec<usize>> {
        (0..x_size).map(|x| (0..s_size).map(|s| f(x, s)).collect()).collect()
    }

    /// Binary, one state: `Y_k = X_k xor X_o`.
    pub fn xor() -> DetChannel {
        let u = DetUser { x_size: 2, s_first: vec![0, 1], degrade: vec![], out: vec![table(2, 2, |x, s| x ^ s)] };
        DetChannel { user1: u.clone(), user2: u }
    }

    /// No interference: the interference alphabet has a single symbol.
    pub fn noninterfering() -> DetChannel {
        let u1 = DetUser { x_size: 4, s_first: vec![0; 4], degrade: vec![vec![0]], out: vec![table(4, 1, |x, _| x); 2] };
        let u2 = DetUser { x_size: 3, s_first: vec![0; 3], degrade: vec![vec![0]], out: vec![table(3, 1, |x, _| x); 2] };
        DetChannel { user1: u1, user2: u2 }
    }

    /// Two states: `s_1 = x mod 4`, `s_2 = s_1 mod 2`, `Y = (x + s) mod 8`.
    pub fn modulo_two_state() -> DetChannel {
        let u = DetUser {
            x_size: 8,
            s_first: (0..8).map(|x| x % 4).collect(),
            degrade: vec![(0..4).map(|s| s % 2).collect()],
            out: vec![table(8, 4, |x, s| (x + s) % 8), table(8, 2, |x, s| (x + s) % 8)],
        };
        DetChannel { user1: u.clone(), user2: u }
    }

    /// Two states with a shifted direct map: `Y = (2x + s) mod 8`.
    pub fn shifted_two_state() -> DetChannel {
        let u1 = DetUser {
            x_size: 4,
            s_first: (0..4).collect(),
            degrade: vec![(0..4).map(|s| s / 2).collect()],
            out: vec![table(4, 4, |x, s| (2 * x + s) % 8), table(4, 2, |x, s| (2 * x + s) % 8)],
        };
        let u2 = DetUser {
            x_size: 6,
            s_first: (0..6).map(|x| x % 3).collect(),
            degrade: vec![vec![0, 1, 1]],
            out: vec![table(6, 4, |x, s| (x + s) % 8), table(6, 2, |x, s| (x + 3 * s) % 8)],
        };
        DetChannel { user1: u1, user2: u2 }
    }

    /// Three states: `s_1 = x`, `s_2 = s_1 mod 4`, `s_3 = s_2 mod 2`.
    pub fn modulo_three_state() -> DetChannel {
        let u = DetUser {
            x_size: 8,
            s_first: (0..8).collect(),
            degrade: vec![(0..8).map(|s| s % 4).collect(), (0..4).map(|s| s % 2).collect()],
            out: vec![
                table(8, 8, |x, s| (x + s) % 8),
                table(8, 4, |x, s| (x + s) % 8),
                table(8, 2, |x, s| (x + s) % 8),
            ],
        };
        DetChannel { user1: u.clone(), user2: u }
    }

    /// Asymmetric one-state channel with a ternary user.
    pub fn asymmetric() -> DetChannel {
        let u1 = DetUser { x_size: 3, s_first: vec![0, 1, 1], degrade: vec![], out: vec![table(3, 2, |x, s| (x + 3 * s) % 8)] };
        let u2 = DetUser { x_size: 2, s_first: vec![0, 1], degrade: vec![], out: vec![table(2, 2, |x, s| 2 * x + s)] };
        DetChannel { user1: u1, user2: u2 }
    }

    pub fn all() -> Vec<(&'static str, DetChannel)> {
        vec![
            ("xor", xor()),
            ("noninterfering", noninterfering()),
            ("modulo-two-state", modulo_two_state()),
            ("shifted-two-state", shifted_two_state()),
            ("modulo-three-state", modulo_three_state()),
            ("asymmetric", asymmetric()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn uniform(ch: DetChannel) -> DetSystem {
        let d = DiscreteDist::uniform(&ch);
        DetSystem::new(ch, d).unwrap()
    }

    #[test]
    fn fixtures_validate() {
        for (name, ch) in all() {
            ch.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn non_invertible_output_rejected() {
        let mut ch = xor();
        ch.user1.out[0][1] = vec![0, 0];
        assert!(matches!(ch.validate(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn mi_of_function_is_its_entropy() {
        let s = uniform(modulo_two_state());
        let h = s.entropy(&[VarId::S(1, 1)], &[]).unwrap();
        let i = s.mi(&MiSpec::new(vec![VarId::X(1)], vec![VarId::S(1, 1)], vec![])).unwrap();
        assert_eq!(h, 2.0);
        assert_eq!(i, h);
    }

    #[test]
    fn xor_interference_known_to_receiver() {
        let s = uniform(xor());
        let i = s.mi(&MiSpec::new(vec![VarId::X(1)], vec![VarId::Y(1, 1)], vec![VarId::U(2, 1)])).unwrap();
        assert_eq!(i, 1.0);
    }

    #[test]
    fn gap_terms_vanish_exactly() {
        for (_, ch) in all() {
            let s = uniform(ch);
            for k in 1..=2 {
                for n in 1..=s.n_states() {
                    let spec = MiSpec::new(vec![VarId::X(k)], vec![VarId::S(k, n)], vec![VarId::U(k, n)]);
                    assert_eq!(s.mi(&spec).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn noninterfering_region_is_rectangle() {
        let s = uniform(noninterfering());
        let r = det_certify(&s, 7).unwrap();
        assert!(r.certified, "{r:?}");
        let ev = evaluate_det(&s).unwrap();
        let reg = crate::bounds::inner_region(&ev, 7, true).unwrap();
        assert!((reg.area() - 2.0 * 3f64.log2()).abs() < 1e-9, "{:?}", reg.vertices);
    }

    #[test]
    fn xor_bounds_coincide() {
        let r = det_certify(&uniform(xor()), 9).unwrap();
        assert!(r.certified && r.max_support_diff <= DET_TOL, "{r:?}");
    }

    #[test]
    fn nonuniform_inputs() {
        let ch = modulo_two_state();
        let d = DiscreteDist { p1: vec![0.3, 0.1, 0.05, 0.05, 0.2, 0.1, 0.1, 0.1], p2: vec![0.125; 8] };
        let r = det_certify(&DetSystem::new(ch, d).unwrap(), 9).unwrap();
        assert!(r.certified, "{r:?}");
    }

    #[test]
    fn bad_distribution_rejected() {
        let ch = xor();
        let d = DiscreteDist { p1: vec![0.5, 0.6], p2: vec![0.5, 0.5] };
        assert!(DetSystem::new(ch, d).is_err());
    }
}
