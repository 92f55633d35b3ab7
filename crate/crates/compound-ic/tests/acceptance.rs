//! One line per numbered criterion: `PASS` or `FAIL` with the measured
//! figures. Every test uses the default seed so results are reproducible.

use compound_ic::suite::{self, CertPool, Outcome, SuiteConfig};

const CFG: SuiteConfig = SuiteConfig { seed: 42, directions: 37, gap: true };

fn report(o: compound_ic::Result<Outcome>) {
    let o = o.expect("criterion ran to completion");
    println!("{o}");
    assert!(o.passed, "{o}");
}

#[test]
fn criterion_01_duality() {
    report(suite::duality(CFG.seed, 50, CFG.directions, &mut CertPool::default()));
}

#[test]
fn criterion_02_projection() {
    report(suite::projection(CFG.seed + 2, 20, CFG.directions));
}

#[test]
fn criterion_03_one_bit() {
    report(suite::one_bit(CFG.seed + 3, 100, CFG.directions, &mut CertPool::default()));
}

#[test]
fn criterion_04_deterministic() {
    report(suite::deterministic(CFG.directions));
}

#[test]
fn criterion_05_prop1() {
    let mut pool = CertPool::default();
    suite::duality(CFG.seed, 50, CFG.directions, &mut pool).unwrap();
    suite::one_bit(CFG.seed + 3, 100, CFG.directions, &mut pool).unwrap();
    report(suite::prop1(&pool));
}

#[test]
fn criterion_06_rebalance() {
    report(suite::rebalance_suite(CFG.seed + 6, 1000));
}

#[test]
fn criterion_07_noncompound() {
    report(suite::noncompound(CFG.seed + 7, 20, CFG.directions));
}

#[test]
fn criterion_08_dominance() {
    report(suite::dominance(CFG.seed + 8, 10, 20, 10));
}

#[test]
fn criterion_09_mi_engine() {
    report(suite::mi_engine(CFG.seed + 9, 20, 20, 50_000));
}

#[test]
fn criterion_10_generator() {
    report(suite::generator());
}
