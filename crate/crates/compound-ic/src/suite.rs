//! The numbered verification criteria, shared by the acceptance tests and
//! the `verify` command. Every criterion is seeded and deterministic.

use crate::bounds::{evaluate_gaussian, inner_region, inner_support};
use crate::constraints::{gen_2state, gen_nstate, ConstraintSystem, TwoStateVariant};
use crate::det::{det_certify, fixtures, DetSystem, DiscreteDist};
use crate::dominance::gaussian_dominance_check;
use crate::error::Result;
use crate::gap::{certify_evaluated, GAP_TOL};
use crate::gaussian::GaussianSystem;
use crate::hk::hk_support;
use crate::info::{MiSpec, VarId};
use crate::mc::monte_carlo_mi;
use crate::polytope::{
    check_prop1, check_prop1_two_state, direction_fan, dual_min, dual_min_prime, hausdorff, lifted_support,
    polygon_from_halfspaces, project_to_totals, DualCertificate, HalfspaceSystem,
};
use crate::rebalance::{check_conditional, rebalance, CHECK_TOL};
use crate::sample::{random_channel, random_duplicated_channel, random_projected_point, rng};
use rand::Rng;
use std::fmt;
use std::time::Instant;

pub const DUALITY_TOL: f64 = 1e-7;
pub const HAUSDORFF_TOL: f64 = 1e-6;
pub const PROP1_TOL: f64 = 1e-8;
pub const HK_TOL: f64 = 1e-7;
pub const IDENTITY_TOL: f64 = 1e-9;
pub const DUALITY_BUDGET_SECS: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} criterion {:>2} {:<14} {}", self.id, self.name, self.detail)
    }
}

/// Omega-free optimal certificates gathered along the way, with the system
/// each belongs to.
#[derive(Default)]
pub struct CertPool {
    pub systems: Vec<ConstraintSystem>,
    pub certs: Vec<(usize, DualCertificate)>,
}

impl CertPool {
    fn add_system(&mut self, sys: &ConstraintSystem) -> usize {
        if let Some(i) = self.systems.iter().position(|s| s == sys) {
            return i;
        }
        self.systems.push(sys.clone());
        self.systems.len() - 1
    }

    fn add(&mut self, sys: &ConstraintSystem, cert: DualCertificate) {
        if cert.is_prime() {
            let i = self.add_system(sys);
            self.certs.push((i, cert));
        }
    }
}

/// Primal support versus dual minimum on random two-state channels.
pub fn duality(seed: u64, channels: usize, directions: usize, pool: &mut CertPool) -> Result<Outcome> {
    let start = Instant::now();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for i in 0..channels {
        let ev = evaluate_gaussian(&random_channel(&mut r, 2))?;
        for (a, b) in direction_fan(directions) {
            let primal = lifted_support(&ev.sys, &ev.inner, a, b)?.0;
            let cert = dual_min(&ev.sys, &ev.inner, a, b)?;
            let gap = (primal - cert.objective(&ev.inner)).abs();
            if gap > worst {
                worst = gap;
                at = format!(" (channel {i}, direction {a:.4},{b:.4})");
            }
            pool.add(&ev.sys, cert);
            pool.add(&ev.sys, dual_min_prime(&ev.sys, &ev.inner, a, b)?);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        id: 1,
        name: "duality",
        passed: worst <= DUALITY_TOL && secs < DUALITY_BUDGET_SECS,
        detail: format!("max |primal - dual| = {worst:.3e}{at}, {secs:.1} s"),
    })
}

/// Fourier-Motzkin polygon versus swept polygon.
pub fn projection(seed: u64, instances: usize, directions: usize) -> Result<Outcome> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let ev = evaluate_gaussian(&random_channel(&mut r, 2))?;
        let hs = HalfspaceSystem::from_constraints(&ev.sys, &ev.inner)?;
        let fm = polygon_from_halfspaces(&project_to_totals(&hs, 2)?)?;
        let sweep = inner_region(&ev, directions, true)?;
        worst = worst.max(hausdorff(&fm, &sweep.vertices));
    }
    Ok(Outcome {
        id: 2,
        name: "projection",
        passed: worst <= HAUSDORFF_TOL,
        detail: format!("max Hausdorff distance = {worst:.3e} over {instances} instances"),
    })
}

/// Gap below one bit per user and the shrunk outer region inside the inner
/// one, on channels with one to three states.
pub fn one_bit(seed: u64, instances: usize, directions: usize, pool: &mut CertPool) -> Result<Outcome> {
    let mut r = rng(seed);
    let (mut delta_fail, mut shrink_fail, mut shifted_fail) = (0, 0, 0);
    let (mut max_delta, mut max_shrink, mut max_shifted): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..instances {
        let n = r.random_range(1..=3);
        let ev = evaluate_gaussian(&random_channel(&mut r, n))?;
        let run = certify_evaluated(&ev, directions)?;
        let rep = &run.report;
        max_delta = max_delta.max(rep.max_delta());
        max_shrink = max_shrink.max(rep.shrink_violation);
        max_shifted = max_shifted.max(rep.shifted_violation);
        delta_fail += usize::from(rep.delta1 >= 1.0 || rep.delta2 >= 1.0);
        shrink_fail += usize::from(rep.shrink_violation > GAP_TOL);
        shifted_fail += usize::from(rep.shifted_violation > GAP_TOL);
        let outer = ev.outer();
        for (a, b) in direction_fan(5) {
            pool.add(&ev.sys, dual_min_prime(&ev.sys, &outer, a, b)?);
        }
    }
    Ok(Outcome {
        id: 3,
        name: "one-bit",
        passed: delta_fail == 0 && shrink_fail == 0,
        detail: format!(
            "max delta = {max_delta:.6}, delta >= 1 on {delta_fail}/{instances}; clipped shrink violated on \
             {shrink_fail}/{instances} (max {max_shrink:.3e}); unclipped shift violated on {shifted_fail}/{instances} \
             (max {max_shifted:.3e})"
        ),
    })
}

/// Deterministic fixtures: identical bounds and a zero gap.
pub fn deterministic(directions: usize) -> Result<Outcome> {
    let all = fixtures::all();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, ch) in &all {
        let dist = DiscreteDist::uniform(ch);
        let rep = det_certify(&DetSystem::new(ch.clone(), dist)?, directions)?;
        worst = worst.max(rep.max_support_diff);
        if !rep.certified || rep.gap.delta1 != 0.0 || rep.gap.delta2 != 0.0 {
            bad.push(*name);
        }
    }
    Ok(Outcome {
        id: 4,
        name: "deterministic",
        passed: all.len() >= 5 && bad.is_empty(),
        detail: format!("{} fixtures, max support difference {worst:.3e}, failing: {bad:?}", all.len()),
    })
}

/// Consecutive-level column-sum identities on every pooled certificate.
pub fn prop1(pool: &CertPool) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut hand: f64 = 0.0;
    for (i, cert) in &pool.certs {
        let sys = &pool.systems[*i];
        worst = check_prop1(cert, sys)?.into_iter().map(f64::abs).fold(worst, f64::max);
        if sys.n_states == 2 {
            hand = check_prop1_two_state(cert)?.into_iter().map(f64::abs).fold(hand, f64::max);
        }
    }
    let worst = worst.max(hand);
    Ok(Outcome {
        id: 5,
        name: "prop1",
        passed: !pool.certs.is_empty() && worst <= PROP1_TOL,
        detail: format!("max residual {worst:.3e} over {} certificates", pool.certs.len()),
    })
}

/// Rebalancing random projected points with negative components.
pub fn rebalance_suite(seed: u64, vectors: usize) -> Result<Outcome> {
    let mut r = rng(seed);
    let (mut done, mut failures, mut attempts) = (0usize, Vec::new(), 0usize);
    while done < vectors && attempts < 200 * vectors {
        attempts += 1;
        let n = r.random_range(1..=3);
        let ch = random_channel(&mut r, n);
        let ev = evaluate_gaussian(&ch)?;
        let Some(x) = random_projected_point(&mut r, &ev.sys, &ev.inner)? else { continue };
        done += 1;
        let y = rebalance(&x, n)?;
        let m = n + 1;
        let sums_equal = (0..2).all(|k| {
            x[k * m..(k + 1) * m].iter().sum::<f64>() == y[k * m..(k + 1) * m].iter().sum::<f64>()
        });
        if let Err(e) = check_conditional(&y, &ev.sys, &ev.inner, CHECK_TOL) {
            failures.push(e.to_string());
        } else if !sums_equal {
            failures.push("user sum changed".into());
        }
    }
    let passed = done == vectors && failures.is_empty();
    Ok(Outcome {
        id: 6,
        name: "rebalance",
        passed,
        detail: format!("{done} vectors ({attempts} draws), {} failures {:?}", failures.len(), failures.first()),
    })
}

/// Duplicated-state channels against the compact single-state evaluator.
pub fn noncompound(seed: u64, instances: usize, directions: usize) -> Result<Outcome> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let ch = random_duplicated_channel(&mut r);
        let ev = evaluate_gaussian(&ch)?;
        for (a, b) in direction_fan(directions) {
            worst = worst.max((inner_support(&ev, a, b)?.0 - hk_support(&ch, a, b)?).abs());
        }
    }
    Ok(Outcome {
        id: 7,
        name: "noncompound",
        passed: worst <= HK_TOL,
        detail: format!("max support difference {worst:.3e} over {instances} channels"),
    })
}

/// Discrete inputs never beat Gaussian inputs on the outer value.
pub fn dominance(seed: u64, channels: usize, inputs: usize, certificates: usize) -> Result<Outcome> {
    let mut r = rng(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut failed = 0;
    for _ in 0..channels {
        let n = r.random_range(1..=2);
        let ch = random_channel(&mut r, n);
        let rep = gaussian_dominance_check(&mut r, &ch, inputs, certificates)?;
        worst = worst.max(rep.max_excess);
        failed += usize::from(!rep.passed);
    }
    Ok(Outcome {
        id: 8,
        name: "dominance",
        passed: failed == 0,
        detail: format!("max c_out excess {worst:.3e}, {failed}/{channels} channels failed"),
    })
}

fn all_vars(n: usize) -> Vec<VarId> {
    let mut v = vec![VarId::X(1), VarId::X(2)];
    for k in 1..=2 {
        for s in 1..=n {
            v.extend([VarId::S(k, s), VarId::U(k, s), VarId::Y(k, s)]);
        }
    }
    v
}

/// Analytic mutual information against simulation, plus chain-rule and
/// data-processing identities.
pub fn mi_engine(seed: u64, specs: usize, batches: usize, per_batch: usize) -> Result<Outcome> {
    let mut r = rng(seed);
    let (mut worst_z, mut worst_id): (f64, f64) = (0.0, 0.0);
    let mut outside = 0;
    for _ in 0..specs {
        let n = r.random_range(1..=3);
        let ch = random_channel(&mut r, n).canonicalize()?;
        let chain = crate::channel::build_degraded_chain(&ch)?;
        let g = GaussianSystem::build(&chain)?;
        let sys = gen_nstate(n)?;
        let spec = sys.constraints[r.random_range(0..sys.constraints.len())].mi.clone();
        let analytic = g.cond_mi(&spec)?;
        let est = monte_carlo_mi(&chain, &spec, &mut r, batches, per_batch)?;
        let z = (est.mean - analytic).abs() / est.se;
        worst_z = worst_z.max(z);
        outside += usize::from(z > 3.0);

        // Chain rule with one extra subject.
        let used: Vec<VarId> = spec.subjects.iter().chain(&spec.targets).chain(&spec.given).copied().collect();
        let free: Vec<VarId> = all_vars(n).into_iter().filter(|v| !used.contains(v)).collect();
        let extra = free[r.random_range(0..free.len())];
        let mut both = spec.clone();
        both.subjects.push(extra);
        let mut given = spec.given.clone();
        given.extend(&spec.subjects);
        let tail = g.cond_mi(&MiSpec::new(vec![extra], spec.targets.clone(), given))?;
        worst_id = worst_id.max((g.cond_mi(&both)? - analytic - tail).abs());

        // Degradation: X -> S_n -> S_{n+1} and the same for the copy.
        for k in 1..=2 {
            for s in 1..n {
                for (a, b) in [(VarId::S(k, s), VarId::S(k, s + 1)), (VarId::U(k, s), VarId::U(k, s + 1))] {
                    let markov = g.cond_mi(&MiSpec::new(vec![VarId::X(k)], vec![b], vec![a]))?;
                    let near = g.cond_mi(&MiSpec::new(vec![VarId::X(k)], vec![a], vec![]))?;
                    let far = g.cond_mi(&MiSpec::new(vec![VarId::X(k)], vec![b], vec![]))?;
                    worst_id = worst_id.max(markov.abs()).max(far - near);
                }
            }
        }
    }
    Ok(Outcome {
        id: 9,
        name: "mi-engine",
        passed: outside == 0 && worst_id <= IDENTITY_TOL,
        detail: format!(
            "{outside}/{specs} beyond 3 SE (max |z| = {worst_z:.2}), max identity residual {worst_id:.3e}"
        ),
    })
}

/// Generated systems against the hand-written two-state table and the
/// single-state count.
pub fn generator() -> Result<Outcome> {
    let two = gen_nstate(2)? == gen_2state(TwoStateVariant::Projected);
    let one = gen_nstate(1)?.constraints.len();
    Ok(Outcome {
        id: 10,
        name: "generator",
        passed: two && one == 8,
        detail: format!("two-state table equal: {two}, single-state rows: {one}"),
    })
}

/// Sizes and seed of a full run.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub directions: usize,
    /// Include the one-bit gap criterion.
    pub gap: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 42, directions: 37, gap: true }
    }
}

/// Every criterion in order. Each uses its own seed offset so that they can
/// also run independently with identical results.
pub fn run_all(cfg: SuiteConfig) -> Result<Vec<Outcome>> {
    let s = cfg.seed;
    let d = cfg.directions;
    let mut pool = CertPool::default();
    let mut out = vec![duality(s, 50, d, &mut pool)?, projection(s + 2, 20, d)?];
    if cfg.gap {
        out.push(one_bit(s + 3, 100, d, &mut pool)?);
    }
    out.push(deterministic(d)?);
    out.push(prop1(&pool)?);
    out.push(rebalance_suite(s + 6, 1000)?);
    out.push(noncompound(s + 7, 20, d)?);
    out.push(dominance(s + 8, 10, 20, 10)?);
    out.push(mi_engine(s + 9, 20, 20, 50_000)?);
    out.push(generator()?);
    Ok(out)
}
