//! Linear constraint systems of the inner bound: the hand-written 2-state
//! table and the general N-state enumerator.

use crate::error::{Error, Result};
use crate::info::{InfoMeasure, MiSpec, VarId};
use std::collections::BTreeMap;
use std::fmt;

/// Rate of one superposition layer. `level` 0 is the private layer; level
/// `n >= 1` is the layer the other receiver decodes in states `1..=n`, so
/// level N is the fully public one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RateComponent {
    pub user: usize,
    pub level: usize,
}

impl RateComponent {
    pub fn new(user: usize, level: usize) -> Self {
        RateComponent { user, level }
    }

    /// Position in the flat rate vector `(R1_0..R1_N, R2_0..R2_N)`.
    pub fn index(&self, n_states: usize) -> usize {
        (self.user - 1) * (n_states + 1) + self.level
    }
}

impl fmt::Display for RateComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            write!(f, "R{}p", self.user)
        } else {
            write!(f, "R{}.{}", self.user, self.level)
        }
    }
}

/// One inner-bound inequality `sum(lhs) <= I(...)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub tag: String,
    /// Receiver `(user, state)`.
    pub receiver: (usize, usize),
    pub lhs: Vec<RateComponent>,
    /// `subjects` are what the receiver decodes in error (its own input and
    /// possibly the innermost wrongly decoded interference layer);
    /// `targets` is the receiver output; `given` the correctly decoded
    /// layers.
    pub mi: MiSpec,
    /// The inequality is only enforced when the guard components sum to a
    /// positive value (conditional system).
    pub guard: Vec<RateComponent>,
}

impl ConstraintSpec {
    /// Innermost in-error layer of the interferer, when any.
    pub fn interferer_start(&self) -> Option<usize> {
        let o = 3 - self.receiver.0;
        self.lhs.iter().filter(|c| c.user == o).map(|c| c.level).min()
    }

    /// Side information handed to the receiver in the outer bound.
    pub fn genie(&self) -> &[VarId] {
        &self.mi.given
    }
}

/// Which nonnegativity closes the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nonneg {
    /// Per-user sums are nonnegative; guards are ignored.
    UserSums,
    /// Every component is nonnegative; guards are active.
    Components,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub n_states: usize,
    pub constraints: Vec<ConstraintSpec>,
    pub nonneg: Nonneg,
}

impl ConstraintSystem {
    pub fn dim(&self) -> usize {
        2 * (self.n_states + 1)
    }

    pub fn components(&self) -> Vec<RateComponent> {
        let mut v = Vec::with_capacity(self.dim());
        for k in 1..=2 {
            for l in 0..=self.n_states {
                v.push(RateComponent::new(k, l));
            }
        }
        v
    }

    /// Dense 0/1 row of constraint `i`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut r = vec![0.0; self.dim()];
        for c in &self.constraints[i].lhs {
            r[c.index(self.n_states)] = 1.0;
        }
        r
    }

    pub fn with_nonneg(mut self, nonneg: Nonneg) -> Self {
        self.nonneg = nonneg;
        self
    }

    pub fn position(&self, tag: &str) -> Option<usize> {
        self.constraints.iter().position(|c| c.tag == tag)
    }

    /// Evaluates every right-hand side with the given information measure.
    pub fn evaluate(&self, info: &dyn InfoMeasure) -> Result<Vec<f64>> {
        if info.n_states() != self.n_states {
            return Err(Error::InvalidInput(format!(
                "system has {} states, information source has {}",
                self.n_states,
                info.n_states()
            )));
        }
        self.constraints.iter().map(|c| info.mi(&c.mi)).collect()
    }

    /// Structured-text dump, one constraint per line.
    pub fn dump(&self) -> String {
        let mut s = format!(
            "system states={} dim={} nonneg={}\n",
            self.n_states,
            self.dim(),
            match self.nonneg {
                Nonneg::UserSums => "user-sums",
                Nonneg::Components => "components",
            }
        );
        let list = |v: &[RateComponent]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("+");
        for c in &self.constraints {
            s.push_str(&format!(
                "{} rx=({},{}) lhs={} mi={} guard={}\n",
                c.tag,
                c.receiver.0,
                c.receiver.1,
                list(&c.lhs),
                c.mi,
                list(&c.guard)
            ));
        }
        s
    }

    /// Genie side-information set of every constraint, keyed by tag.
    pub fn genie_table(&self) -> BTreeMap<String, Vec<VarId>> {
        self.constraints.iter().map(|c| (c.tag.clone(), c.genie().to_vec())).collect()
    }
}

/// General enumerator. For receiver `(k, n)`: the own in-error run covers
/// levels `0..=m` for `m` in `0..=N`; the interferer in-error run covers
/// levels `n..=j` for `j` in `n-1..=N` (`j = n-1` is empty). Correct layers
/// are summarised by the innermost correct `U` of each user.
pub fn gen_nstate(n_states: usize) -> Result<ConstraintSystem> {
    if n_states < 1 {
        return Err(Error::InvalidInput("number of states must be >= 1".into()));
    }
    let big_n = n_states;
    let mut constraints = Vec::new();
    for k in 1..=2usize {
        let o = 3 - k;
        for n in (1..=big_n).rev() {
            let mut idx = 0;
            for m in 0..=big_n {
                let own: Vec<RateComponent> = (0..=m).map(|l| RateComponent::new(k, l)).collect();
                for j in (n - 1)..=big_n {
                    idx += 1;
                    let intf: Vec<RateComponent> = (n..=j).map(|l| RateComponent::new(o, l)).collect();
                    let mut subjects = vec![VarId::X(k)];
                    if j >= n {
                        subjects.push(VarId::U(o, n));
                    }
                    let mut given = Vec::new();
                    if m < big_n {
                        given.push(VarId::U(k, m + 1));
                    }
                    if j < big_n {
                        given.push(VarId::U(o, j + 1));
                    }
                    let mut lhs = own.clone();
                    lhs.extend(intf);
                    lhs.sort();
                    constraints.push(ConstraintSpec {
                        tag: tag_for(big_n, k, n, idx),
                        receiver: (k, n),
                        lhs,
                        mi: MiSpec::new(subjects, vec![VarId::Y(k, n)], given),
                        guard: own.clone(),
                    });
                }
            }
        }
    }
    Ok(ConstraintSystem { n_states, constraints, nonneg: Nonneg::UserSums })
}

/// Tags follow the classic two-state naming (`g` for the weak state, `d`
/// for the strong one) when N = 2, and `c{k}.{n}.{i}` otherwise.
fn tag_for(n_states: usize, k: usize, n: usize, i: usize) -> String {
    match (n_states, n) {
        (2, 2) => format!("g{k}{i}"),
        (2, 1) => format!("d{k}{i}"),
        _ => format!("c{k}.{n}.{i}"),
    }
}

/// Which two-state system to emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoStateVariant {
    /// Guards ignored, per-user-sum nonnegativity.
    Projected,
    /// Guards active, per-component nonnegativity.
    Conditional,
}

/// The 30 two-state inequalities written out by hand. Level 1 is the
/// strong-state (`a`) layer and level 2 the weak-state (`b`) layer.
pub fn gen_2state(variant: TwoStateVariant) -> ConstraintSystem {
    use VarId::{U, X, Y};
    // (tag, receiver state, own levels, interferer levels, extra subject, given)
    type Row = (&'static str, usize, &'static [usize], &'static [usize], bool, &'static [(usize, usize)]);
    // given entries are (user-relative: 0 = own, 1 = other, state)
    #[rustfmt::skip]
    let table: [Row; 15] = [
        ("g1", 2, &[0],       &[],     false, &[(0, 1), (1, 2)]),
        ("g2", 2, &[0],       &[2],    true,  &[(0, 1)]),
        ("g3", 2, &[0, 1],    &[],     false, &[(0, 2), (1, 2)]),
        ("g4", 2, &[0, 1],    &[2],    true,  &[(0, 2)]),
        ("g5", 2, &[0, 1, 2], &[],     false, &[(1, 2)]),
        ("g6", 2, &[0, 1, 2], &[2],    true,  &[]),
        ("d1", 1, &[0],       &[],     false, &[(0, 1), (1, 1)]),
        ("d2", 1, &[0],       &[1],    true,  &[(0, 1), (1, 2)]),
        ("d3", 1, &[0],       &[1, 2], true,  &[(0, 1)]),
        ("d4", 1, &[0, 1],    &[],     false, &[(0, 2), (1, 1)]),
        ("d5", 1, &[0, 1],    &[1],    true,  &[(0, 2), (1, 2)]),
        ("d6", 1, &[0, 1],    &[1, 2], true,  &[(0, 2)]),
        ("d7", 1, &[0, 1, 2], &[],     false, &[(1, 1)]),
        ("d8", 1, &[0, 1, 2], &[1],    true,  &[(1, 2)]),
        ("d9", 1, &[0, 1, 2], &[1, 2], true,  &[]),
    ];
    let mut constraints = Vec::new();
    for k in 1..=2usize {
        let o = 3 - k;
        for state in [2usize, 1] {
            for (name, n, own, intf, extra, given) in table.iter().filter(|r| r.1 == state) {
                let (letter, idx) = name.split_at(1);
                let own_c: Vec<RateComponent> = own.iter().map(|&l| RateComponent::new(k, l)).collect();
                let mut lhs = own_c.clone();
                lhs.extend(intf.iter().map(|&l| RateComponent::new(o, l)));
                lhs.sort();
                let mut subjects = vec![X(k)];
                if *extra {
                    subjects.push(U(o, *n));
                }
                let given = given
                    .iter()
                    .map(|&(who, s)| if who == 0 { U(k, s) } else { U(o, s) })
                    .collect();
                constraints.push(ConstraintSpec {
                    tag: format!("{letter}{k}{idx}"),
                    receiver: (k, *n),
                    lhs,
                    mi: MiSpec::new(subjects, vec![Y(k, *n)], given),
                    guard: own_c,
                });
            }
        }
    }
    let nonneg = match variant {
        TwoStateVariant::Projected => Nonneg::UserSums,
        TwoStateVariant::Conditional => Nonneg::Components,
    };
    ConstraintSystem { n_states: 2, constraints, nonneg }
}

#[cfg(test)]
mod tests {
    use super::*;
    use VarId::{U, X, Y};

    fn rc(u: usize, l: usize) -> RateComponent {
        RateComponent::new(u, l)
    }

    #[test]
    fn two_state_counts() {
        let s = gen_2state(TwoStateVariant::Projected);
        assert_eq!(s.constraints.len(), 30);
        assert_eq!(s.constraints.iter().filter(|c| c.receiver == (1, 2)).count(), 6);
        assert_eq!(s.constraints.iter().filter(|c| c.receiver == (1, 1)).count(), 9);
    }

    #[test]
    fn weak_state_second_row() {
        // R2b + R1p <= I(Y1b; X1, U2b | U1a)
        let s = gen_2state(TwoStateVariant::Projected);
        let c = &s.constraints[s.position("g12").unwrap()];
        assert_eq!(c.lhs, vec![rc(1, 0), rc(2, 2)]);
        assert_eq!(c.mi, MiSpec::new(vec![X(1), U(2, 2)], vec![Y(1, 2)], vec![U(1, 1)]));
    }

    #[test]
    fn strong_state_seventh_row_user_two() {
        // R2b + R2a + R2p <= I(Y2a; X2 | U1a)
        let s = gen_2state(TwoStateVariant::Projected);
        let c = &s.constraints[s.position("d27").unwrap()];
        assert_eq!(c.lhs, vec![rc(2, 0), rc(2, 1), rc(2, 2)]);
        assert_eq!(c.mi, MiSpec::new(vec![X(2)], vec![Y(2, 1)], vec![U(1, 1)]));
    }

    #[test]
    fn nstate_two_matches_table() {
        let a = gen_nstate(2).unwrap();
        let b = gen_2state(TwoStateVariant::Projected);
        assert_eq!(a, b);
    }

    #[test]
    fn nstate_one_is_the_noncompound_list() {
        let s = gen_nstate(1).unwrap();
        assert_eq!(s.constraints.len(), 8);
        let rows: Vec<(Vec<RateComponent>, MiSpec)> =
            s.constraints.iter().filter(|c| c.receiver.0 == 1).map(|c| (c.lhs.clone(), c.mi.clone())).collect();
        let expect = vec![
            (vec![rc(1, 0)], MiSpec::new(vec![X(1)], vec![Y(1, 1)], vec![U(1, 1), U(2, 1)])),
            (vec![rc(1, 0), rc(2, 1)], MiSpec::new(vec![X(1), U(2, 1)], vec![Y(1, 1)], vec![U(1, 1)])),
            (vec![rc(1, 0), rc(1, 1)], MiSpec::new(vec![X(1)], vec![Y(1, 1)], vec![U(2, 1)])),
            (vec![rc(1, 0), rc(1, 1), rc(2, 1)], MiSpec::new(vec![X(1), U(2, 1)], vec![Y(1, 1)], vec![])),
        ];
        assert_eq!(rows, expect);
    }

    #[test]
    fn per_receiver_counts() {
        for n in 1..=5 {
            let s = gen_nstate(n).unwrap();
            for k in 1..=2 {
                for st in 1..=n {
                    let cnt = s.constraints.iter().filter(|c| c.receiver == (k, st)).count();
                    assert_eq!(cnt, (n + 1) * (n - st + 2));
                }
            }
        }
        assert!(gen_nstate(0).is_err());
    }

    #[test]
    fn genie_sets() {
        let s = gen_2state(TwoStateVariant::Projected);
        let g = s.genie_table();
        assert_eq!(g["g11"], vec![U(1, 1), U(2, 2)]);
        assert!(g["d19"].is_empty());
        assert_eq!(g["g25"], vec![U(1, 2)]);
    }

    #[test]
    fn specs_are_disjoint_and_guarded() {
        for n in 1..=4 {
            let s = gen_nstate(n).unwrap();
            for c in &s.constraints {
                c.mi.validate().unwrap();
                assert!(c.lhs.contains(&rc(c.receiver.0, 0)));
                assert!(c.guard.iter().all(|g| c.lhs.contains(g) && g.user == c.receiver.0));
            }
        }
    }

    #[test]
    fn dump_is_line_per_constraint() {
        let s = gen_2state(TwoStateVariant::Conditional);
        let d = s.dump();
        assert_eq!(d.lines().count(), 31);
        assert!(d.contains("g12 rx=(1,2) lhs=R1p+R2.2 mi=I(Y1.2;X1,U2.2|U1.1) guard=R1p"));
    }
}
