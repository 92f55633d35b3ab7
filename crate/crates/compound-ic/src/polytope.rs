//! Linear-inequality machinery: halfspace systems, Fourier-Motzkin
//! projection, support-function LPs, dual certificates and the sampled
//! two-dimensional regions built from them.

use crate::constraints::ConstraintSystem;
use crate::constraints::Nonneg;
use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram};
use std::f64::consts::FRAC_PI_2;

/// Absolute tolerance for redundancy and feasibility decisions.
pub const TOL: f64 = 1e-9;
/// Default intermediate-row cap of the projection.
pub const FM_ROW_CAP: usize = 1_000_000;
/// Vertices closer than this are merged.
pub const MERGE_RADIUS: f64 = 1e-8;
/// Vertices violating a sampled halfspace by more than this are dropped.
pub const VERTEX_SLACK: f64 = 1e-7;

/// `coeffs . x <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfspaceSystem {
    pub names: Vec<String>,
    pub rows: Vec<Halfspace>,
}

impl HalfspaceSystem {
    pub fn new(names: Vec<String>) -> Self {
        HalfspaceSystem { names, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.dim(), "row length");
        self.rows.push(Halfspace { coeffs, rhs });
        self
    }

    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add_le(coeffs.into_iter().map(|c| -c).collect(), -rhs)
    }

    /// The lifted rate polytope of `sys` with right-hand sides `rhs`.
    /// Activity guards are not linear and are ignored here.
    pub fn from_constraints(sys: &ConstraintSystem, rhs: &[f64]) -> Result<Self> {
        if rhs.len() != sys.constraints.len() {
            return Err(Error::InvalidInput(format!(
                "{} right-hand sides for {} constraints",
                rhs.len(),
                sys.constraints.len()
            )));
        }
        let names = sys.components().iter().map(|c| c.to_string()).collect();
        let mut hs = HalfspaceSystem::new(names);
        for (i, &v) in rhs.iter().enumerate() {
            hs.add_le(sys.row(i), v);
        }
        let d = sys.dim();
        match sys.nonneg {
            Nonneg::UserSums => {
                for k in 0..2 {
                    let mut r = vec![0.0; d];
                    r[k * (sys.n_states + 1)..(k + 1) * (sys.n_states + 1)].fill(1.0);
                    hs.add_ge(r, 0.0);
                }
            }
            Nonneg::Components => {
                for j in 0..d {
                    let mut r = vec![0.0; d];
                    r[j] = 1.0;
                    hs.add_ge(r, 0.0);
                }
            }
        }
        Ok(hs)
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|h| dot(&h.coeffs, x) - h.rhs).fold(0.0, f64::max)
    }

    fn lp(&self, objective: &[f64]) -> LinearProgram {
        let mut lp = LinearProgram::new(self.dim());
        lp.set_objective(objective).set_all_free();
        for h in &self.rows {
            lp.add_row(&h.coeffs, Cmp::Le, h.rhs);
        }
        lp
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum of `w . x` over the system and a maximizer.
pub fn support_value(hs: &HalfspaceSystem, w: &[f64]) -> Result<(f64, Vec<f64>)> {
    if w.len() != hs.dim() {
        return Err(Error::InvalidInput("direction length differs from dimension".into()));
    }
    let s = hs.lp(w).maximize()?;
    Ok((s.value, s.x))
}

/// Lifted objective: weight `a` on every user-1 layer, `b` on user 2.
pub fn lifted_weights(n_states: usize, a: f64, b: f64) -> Vec<f64> {
    let mut w = vec![a; n_states + 1];
    w.extend(std::iter::repeat_n(b, n_states + 1));
    w
}

/// Per-user totals of a lifted rate vector.
pub fn user_totals(n_states: usize, x: &[f64]) -> [f64; 2] {
    let m = n_states + 1;
    [x[..m].iter().sum(), x[m..2 * m].iter().sum()]
}

/// Support of the projection of the lifted polytope onto the user totals.
pub fn lifted_support(sys: &ConstraintSystem, rhs: &[f64], a: f64, b: f64) -> Result<(f64, Vec<f64>)> {
    let hs = HalfspaceSystem::from_constraints(sys, rhs)?;
    support_value(&hs, &lifted_weights(sys.n_states, a, b))
}

// ---------------------------------------------------------------------------
// Fourier-Motzkin projection

/// Rewrites a lifted system in the coordinates
/// `(R1_0..R1_{N-1}, R1, R2_0..R2_{N-1}, R2)` where `Rk` is the user total.
pub fn to_user_totals(hs: &HalfspaceSystem, n_states: usize) -> Result<HalfspaceSystem> {
    let m = n_states + 1;
    if hs.dim() != 2 * m {
        return Err(Error::InvalidInput("system is not a lifted rate system".into()));
    }
    let mut names = hs.names.clone();
    names[m - 1] = "R1".into();
    names[2 * m - 1] = "R2".into();
    let mut out = HalfspaceSystem::new(names);
    for h in &hs.rows {
        // R_{k,N} = R_k - sum_{l<N} R_{k,l}
        let mut c = h.coeffs.clone();
        for k in 0..2 {
            let top = h.coeffs[k * m + m - 1];
            for l in 0..m - 1 {
                c[k * m + l] -= top;
            }
        }
        out.add_le(c, h.rhs);
    }
    Ok(out)
}

/// Projects onto the user totals `(R1, R2)`.
pub fn project_to_totals(hs: &HalfspaceSystem, n_states: usize) -> Result<HalfspaceSystem> {
    let t = to_user_totals(hs, n_states)?;
    let m = n_states + 1;
    fm_project(&t, &[m - 1, 2 * m - 1], FM_ROW_CAP)
}

/// Eliminates every dimension not in `keep`. The result is expressed over
/// `keep` in the given order and is free of redundant rows.
pub fn fm_project(hs: &HalfspaceSystem, keep: &[usize], row_cap: usize) -> Result<HalfspaceSystem> {
    for &k in keep {
        if k >= hs.dim() {
            return Err(Error::InvalidInput(format!("dimension {k} out of range")));
        }
    }
    let mut rows = normalize_all(hs.rows.clone())?;
    for j in 0..hs.dim() {
        if keep.contains(&j) {
            continue;
        }
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for h in rows {
            let c = h.coeffs[j];
            if c > TOL {
                pos.push(h);
            } else if c < -TOL {
                neg.push(h);
            } else {
                let mut h = h;
                h.coeffs[j] = 0.0;
                zero.push(h);
            }
        }
        if pos.len() * neg.len() + zero.len() > row_cap {
            return Err(Error::ResourceLimit(format!(
                "projection would create {} rows (cap {row_cap})",
                pos.len() * neg.len() + zero.len()
            )));
        }
        for p in &pos {
            for n in &neg {
                let (cp, cn) = (p.coeffs[j], -n.coeffs[j]);
                let coeffs: Vec<f64> = p.coeffs.iter().zip(&n.coeffs).map(|(x, y)| cn * x + cp * y).collect();
                let mut h = Halfspace { coeffs, rhs: cn * p.rhs + cp * n.rhs };
                h.coeffs[j] = 0.0;
                zero.push(h);
            }
        }
        rows = normalize_all(zero)?;
        rows = prune_redundant(rows, hs.dim())?;
    }
    let names = keep.iter().map(|&k| hs.names[k].clone()).collect();
    let mut out = HalfspaceSystem::new(names);
    for h in rows {
        out.add_le(keep.iter().map(|&k| h.coeffs[k]).collect(), h.rhs);
    }
    Ok(out)
}

/// Scales rows to unit max-norm, drops trivial rows and duplicates.
fn normalize_all(rows: Vec<Halfspace>) -> Result<Vec<Halfspace>> {
    let mut out: Vec<Halfspace> = Vec::with_capacity(rows.len());
    for h in rows {
        let s = h.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if s <= TOL {
            if h.rhs < -TOL {
                return Err(Error::Infeasible);
            }
            continue;
        }
        let coeffs: Vec<f64> = h.coeffs.iter().map(|c| if (c / s).abs() < 1e-13 { 0.0 } else { c / s }).collect();
        let rhs = h.rhs / s;
        match out.iter_mut().find(|o| o.coeffs.iter().zip(&coeffs).all(|(x, y)| (x - y).abs() <= 1e-12)) {
            Some(o) => o.rhs = o.rhs.min(rhs),
            None => out.push(Halfspace { coeffs, rhs }),
        }
    }
    Ok(out)
}

/// Removes rows implied by the others, one at a time.
pub fn prune_redundant(mut rows: Vec<Halfspace>, dim: usize) -> Result<Vec<Halfspace>> {
    let mut i = 0;
    while i < rows.len() {
        let mut lp = LinearProgram::new(dim);
        lp.set_objective(&rows[i].coeffs).set_all_free();
        for (r, h) in rows.iter().enumerate() {
            if r != i {
                lp.add_row(&h.coeffs, Cmp::Le, h.rhs);
            }
        }
        let redundant = match lp.maximize() {
            Ok(s) => s.value <= rows[i].rhs + TOL * (1.0 + rows[i].rhs.abs()),
            Err(Error::Unbounded) => false,
            Err(Error::Infeasible) => false,
            Err(e) => return Err(e),
        };
        if redundant {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Dual certificates

/// Multipliers of the lifted support LP: one weight per inequality and one
/// per user-sum nonnegativity row.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub n_states: usize,
    pub a: f64,
    pub b: f64,
    pub tags: Vec<String>,
    pub lambda: Vec<f64>,
    pub omega: [f64; 2],
}

impl DualCertificate {
    /// The all-zero certificate, feasible for the zero direction only.
    pub fn zero(sys: &ConstraintSystem) -> Self {
        DualCertificate {
            n_states: sys.n_states,
            a: 0.0,
            b: 0.0,
            tags: sys.constraints.iter().map(|c| c.tag.clone()).collect(),
            lambda: vec![0.0; sys.constraints.len()],
            omega: [0.0; 2],
        }
    }

    pub fn weight(&self, tag: &str) -> Option<f64> {
        self.tags.iter().position(|t| t == tag).map(|i| self.lambda[i])
    }

    pub fn set_weight(&mut self, tag: &str, v: f64) -> Result<()> {
        let i = self
            .tags
            .iter()
            .position(|t| t == tag)
            .ok_or_else(|| Error::InvalidInput(format!("unknown tag {tag}")))?;
        self.lambda[i] = v;
        Ok(())
    }

    /// `sum lambda_i rhs_i`.
    pub fn objective(&self, rhs: &[f64]) -> f64 {
        self.lambda.iter().zip(rhs).map(|(l, v)| if *l == 0.0 { 0.0 } else { l * v }).sum()
    }

    pub fn is_prime(&self) -> bool {
        self.omega[0].abs() <= TOL && self.omega[1].abs() <= TOL
    }

    /// Column sums `sum_i lambda_i A_ic` per lifted component.
    pub fn column_sums(&self, sys: &ConstraintSystem) -> Vec<f64> {
        let mut s = vec![0.0; sys.dim()];
        for (i, c) in sys.constraints.iter().enumerate() {
            for r in &c.lhs {
                s[r.index(sys.n_states)] += self.lambda[i];
            }
        }
        s
    }

    /// Largest violation of the dual feasibility conditions.
    pub fn residual(&self, sys: &ConstraintSystem) -> f64 {
        let m = sys.n_states + 1;
        let sums = self.column_sums(sys);
        let mut worst: f64 = 0.0;
        for (c, s) in sums.iter().enumerate() {
            let (w, om) = if c < m { (self.a, self.omega[0]) } else { (self.b, self.omega[1]) };
            worst = worst.max((s - om - w).abs());
        }
        for v in self.lambda.iter().chain(&self.omega) {
            worst = worst.max(-v);
        }
        worst
    }

    /// Absorbs the nonnegativity multipliers into the direction. The result
    /// is omega-free with an identical objective, for the direction
    /// `(a + omega1, b + omega2)`.
    pub fn to_prime(&self) -> DualCertificate {
        DualCertificate {
            a: self.a + self.omega[0],
            b: self.b + self.omega[1],
            omega: [0.0; 2],
            ..self.clone()
        }
    }
}

fn check_direction(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("direction ({a}, {b}) must be finite and nonnegative")));
    }
    Ok(())
}

fn dual_lp(sys: &ConstraintSystem, a: f64, b: f64, with_omega: bool) -> LinearProgram {
    let mc = sys.constraints.len();
    let nv = mc + if with_omega { 2 } else { 0 };
    let m = sys.n_states + 1;
    let mut lp = LinearProgram::new(nv);
    for c in 0..sys.dim() {
        let mut row = vec![0.0; nv];
        for (i, spec) in sys.constraints.iter().enumerate() {
            if spec.lhs.iter().any(|r| r.index(sys.n_states) == c) {
                row[i] = 1.0;
            }
        }
        if with_omega {
            row[mc + c / m] = -1.0;
        }
        lp.add_row(&row, Cmp::Eq, if c < m { a } else { b });
    }
    lp
}

fn solve_dual(sys: &ConstraintSystem, rhs: &[f64], a: f64, b: f64, with_omega: bool) -> Result<DualCertificate> {
    check_direction(a, b)?;
    let mc = sys.constraints.len();
    if rhs.len() != mc {
        return Err(Error::InvalidInput("right-hand side length differs from constraint count".into()));
    }
    let mut lp = dual_lp(sys, a, b, with_omega);
    let mut obj = rhs.to_vec();
    if with_omega {
        obj.extend([0.0, 0.0]);
    }
    lp.set_objective(&obj);
    let first = lp.minimize()?;
    let mut x = first.x;
    if with_omega {
        // Among optimal certificates prefer the one with least omega.
        lp.add_row(&obj, Cmp::Le, first.value + 1e-10 * (1.0 + first.value.abs()));
        let mut sec = vec![0.0; mc + 2];
        sec[mc] = 1.0;
        sec[mc + 1] = 1.0;
        lp.set_objective(&sec);
        x = lp.minimize()?.x;
    }
    let clean = |v: f64| if v.abs() < 1e-13 { 0.0 } else { v };
    Ok(DualCertificate {
        n_states: sys.n_states,
        a,
        b,
        tags: sys.constraints.iter().map(|c| c.tag.clone()).collect(),
        lambda: x[..mc].iter().map(|&v| clean(v)).collect(),
        omega: if with_omega { [clean(x[mc]), clean(x[mc + 1])] } else { [0.0; 2] },
    })
}

/// Minimizes `sum lambda_i rhs_i` over all dual-feasible certificates,
/// preferring certificates with small nonnegativity multipliers.
pub fn dual_min(sys: &ConstraintSystem, rhs: &[f64], a: f64, b: f64) -> Result<DualCertificate> {
    solve_dual(sys, rhs, a, b, true)
}

/// Minimizes `sum lambda_i rhs_i` over omega-free certificates only.
pub fn dual_min_prime(sys: &ConstraintSystem, rhs: &[f64], a: f64, b: f64) -> Result<DualCertificate> {
    solve_dual(sys, rhs, a, b, false)
}

/// Differences of the dual rows of consecutive layers, `(k, l) - (k, l+1)`
/// for each user and `l = 0..N-1`. All vanish on omega-free certificates.
pub fn check_prop1(cert: &DualCertificate, sys: &ConstraintSystem) -> Result<Vec<f64>> {
    if !cert.is_prime() {
        return Err(Error::Precondition(format!(
            "certificate has nonzero omega ({}, {})",
            cert.omega[0], cert.omega[1]
        )));
    }
    let m = sys.n_states + 1;
    let s = cert.column_sums(sys);
    let mut out = Vec::with_capacity(2 * sys.n_states);
    for k in 0..2 {
        for l in 0..sys.n_states {
            out.push(s[k * m + l] - s[k * m + l + 1]);
        }
    }
    Ok(out)
}

/// The four two-state identities written out over the `g`/`d` tags.
pub fn check_prop1_two_state(cert: &DualCertificate) -> Result<[f64; 4]> {
    if !cert.is_prime() {
        return Err(Error::Precondition("certificate has nonzero omega".into()));
    }
    if cert.n_states != 2 {
        return Err(Error::Precondition("two-state identities need N = 2".into()));
    }
    let w = |t: &str| cert.weight(t).ok_or_else(|| Error::InvalidInput(format!("missing tag {t}")));
    let sum = |tags: &[&str]| -> Result<f64> { tags.iter().map(|t| w(t)).sum() };
    let mut r = [0.0; 4];
    for (k, o) in [(1usize, 2usize), (2, 1)] {
        let d = |i: usize| format!("d{k}{i}");
        let g = |i: usize| format!("g{k}{i}");
        let od = |i: usize| format!("d{o}{i}");
        let og = |i: usize| format!("g{o}{i}");
        let names = |f: &dyn Fn(usize) -> String, ix: &[usize]| ix.iter().map(|&i| f(i)).collect::<Vec<_>>();
        let refs = |v: &[String]| -> Result<f64> { sum(&v.iter().map(|s| s.as_str()).collect::<Vec<_>>()) };
        let lhs1 = refs(&names(&d, &[1, 2, 3]))? + refs(&names(&g, &[1, 2]))?;
        let rhs1 = refs(&names(&od, &[2, 3, 5, 6, 8, 9]))?;
        let lhs2 = refs(&names(&d, &[4, 5, 6]))? + refs(&names(&od, &[2, 5, 8]))? + refs(&names(&g, &[3, 4]))?;
        let rhs2 = refs(&names(&og, &[2, 4, 6]))?;
        let base = if k == 1 { 0 } else { 2 };
        r[base] = lhs1 - rhs1;
        r[base + 1] = lhs2 - rhs2;
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Two-dimensional regions

pub type Point = [f64; 2];

/// Support samples `(a, b, c)` of a region in the nonnegative quadrant and
/// the polygon they cut out of it.
#[derive(Clone, Debug, PartialEq)]
pub struct Region2D {
    pub samples: Vec<(f64, f64, f64)>,
    pub vertices: Vec<Point>,
}

impl Region2D {
    /// Region `{x >= 0 : a x1 + b x2 <= c for every sample}`.
    pub fn from_samples(mut samples: Vec<(f64, f64, f64)>) -> Self {
        samples.sort_by(|p, q| angle(p.0, p.1).total_cmp(&angle(q.0, q.1)));
        let hs: Vec<(Point, f64)> = samples.iter().map(|&(a, b, c)| ([a, b], c)).collect();
        let vertices = clip_quadrant(&hs);
        Region2D { samples, vertices }
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    /// Largest violation of the sampled halfspaces and the quadrant by `p`.
    pub fn violation(&self, p: Point) -> f64 {
        let mut v = (-p[0]).max(-p[1]).max(0.0);
        for &(a, b, c) in &self.samples {
            v = v.max(a * p[0] + b * p[1] - c);
        }
        v
    }

    /// Support of the polygon in direction `(a, b)`.
    pub fn polygon_support(&self, a: f64, b: f64) -> f64 {
        self.vertices.iter().map(|p| a * p[0] + b * p[1]).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn angle(a: f64, b: f64) -> f64 {
    b.atan2(a)
}

/// Uniform fan of `n >= 2` unit directions from `(1, 0)` to `(0, 1)`.
pub fn direction_fan(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let t = FRAC_PI_2 * i as f64 / (n - 1) as f64;
            if i == 0 {
                (1.0, 0.0)
            } else if i == n - 1 {
                (0.0, 1.0)
            } else {
                (t.cos(), t.sin())
            }
        })
        .collect()
}

/// Samples a support function with points on a uniform fan of `directions`
/// directions. With `refine`, the chord normal between adjacent distinct
/// support points is inserted until every chord is confirmed as a facet,
/// which recovers the polygon exactly.
pub fn sweep_region<F>(mut support: F, directions: usize, refine: bool) -> Result<Region2D>
where
    F: FnMut(f64, f64) -> Result<(f64, Point)>,
{
    if directions < 3 {
        return Err(Error::InvalidInput("at least 3 directions are needed".into()));
    }
    let mut pts: Vec<(f64, f64, f64, Point)> = Vec::new();
    for (a, b) in direction_fan(directions) {
        let (c, p) = support(a, b)?;
        pts.push((a, b, c, p));
    }
    if refine {
        let mut i = 0;
        let mut inserted = 0;
        while i + 1 < pts.len() {
            let (p, q) = (pts[i].3, pts[i + 1].3);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = dx.hypot(dy);
            if len <= MERGE_RADIUS {
                i += 1;
                continue;
            }
            // Outward normal of the chord: the fan runs counterclockwise, so
            // the tangent is rotated clockwise.
            let (a, b) = (dy / len, -dx / len);
            let (a, b) = (a.max(0.0), b.max(0.0));
            let nrm = a.hypot(b);
            if nrm == 0.0 {
                i += 1;
                continue;
            }
            let (a, b) = (a / nrm, b / nrm);
            let between = angle(a, b) > angle(pts[i].0, pts[i].1) + 1e-12
                && angle(a, b) < angle(pts[i + 1].0, pts[i + 1].1) - 1e-12;
            if !between {
                i += 1;
                continue;
            }
            if inserted > 10_000 {
                break;
            }
            let (c, r) = support(a, b)?;
            let chord = a * p[0] + b * p[1];
            pts.insert(i + 1, (a, b, c, r));
            inserted += 1;
            // A confirmed facet is kept as a sample; the polygon is cut from
            // the samples, not from the support points.
            if c <= chord + TOL * (1.0 + chord.abs()) {
                i += 2;
            }
        }
    }
    Ok(Region2D::from_samples(pts.into_iter().map(|(a, b, c, _)| (a, b, c)).collect()))
}

/// The polygon cut out of the nonnegative quadrant by halfspaces
/// `n . x <= c`. Every halfspace normal must be nonnegative and the two
/// axis directions must be present, so the result is bounded.
pub fn clip_quadrant(hs: &[(Point, f64)]) -> Vec<Point> {
    let xmax = hs.iter().filter(|h| h.0[1] == 0.0 && h.0[0] > 0.0).map(|h| h.1 / h.0[0]).fold(f64::INFINITY, f64::min);
    let ymax = hs.iter().filter(|h| h.0[0] == 0.0 && h.0[1] > 0.0).map(|h| h.1 / h.0[1]).fold(f64::INFINITY, f64::min);
    if !xmax.is_finite() || !ymax.is_finite() {
        return Vec::new();
    }
    if xmax < -VERTEX_SLACK || ymax < -VERTEX_SLACK {
        return Vec::new();
    }
    let (x, y) = (xmax.max(0.0) + 1.0, ymax.max(0.0) + 1.0);
    let mut poly = vec![[0.0, 0.0], [x, 0.0], [x, y], [0.0, y]];
    for &(n, c) in hs {
        poly = clip(&poly, n, c);
        if poly.is_empty() {
            return poly;
        }
    }
    let poly = simplify(poly);
    poly.into_iter().filter(|p| hs.iter().all(|&(n, c)| n[0] * p[0] + n[1] * p[1] <= c + VERTEX_SLACK)).collect()
}

/// Polygon of a bounded two-dimensional halfspace system intersected with
/// the nonnegative quadrant.
pub fn polygon_from_halfspaces(hs: &HalfspaceSystem) -> Result<Vec<Point>> {
    if hs.dim() != 2 {
        return Err(Error::InvalidInput("polygon needs a two-dimensional system".into()));
    }
    let mut box_hs = Vec::new();
    for w in [[1.0, 0.0], [0.0, 1.0]] {
        let (c, _) = support_value(hs, &w)?;
        box_hs.push((w, c));
    }
    let mut all = box_hs;
    all.extend(hs.rows.iter().map(|h| ([h.coeffs[0], h.coeffs[1]], h.rhs)));
    // Rows with a negative normal component are applied after the box.
    let (axes, rest): (Vec<_>, Vec<_>) = all.into_iter().partition(|h| h.0[0] >= 0.0 && h.0[1] >= 0.0);
    let mut poly = clip_quadrant(&axes);
    for (n, c) in rest {
        poly = clip(&poly, n, c);
    }
    Ok(simplify(poly))
}

/// Sutherland-Hodgman clip of a convex polygon by `n . x <= c`.
fn clip(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let eps = 1e-12 * (1.0 + c.abs());
    let val = |p: &Point| n[0] * p[0] + n[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (vp, vq) = (val(&p), val(&q));
        if vp <= eps {
            out.push(p);
        }
        if (vp <= eps) != (vq <= eps) && (vp - vq).abs() > 0.0 {
            let t = vp / (vp - vq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Merges near-duplicate vertices and removes collinear midpoints.
fn simplify(poly: Vec<Point>) -> Vec<Point> {
    let mut v: Vec<Point> = Vec::with_capacity(poly.len());
    for p in poly {
        if v.last().is_none_or(|q: &Point| dist(*q, p) > MERGE_RADIUS) {
            v.push(p);
        }
    }
    while v.len() > 1 && dist(v[0], *v.last().unwrap()) <= MERGE_RADIUS {
        v.pop();
    }
    loop {
        let n = v.len();
        if n < 3 {
            break;
        }
        let drop = (0..n).find(|&i| {
            let (p, q, r) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            let cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
            cross.abs() <= 1e-12 * (1.0 + dist(p, r).powi(2))
        });
        match drop {
            Some(i) => {
                v.remove(i);
            }
            None => break,
        }
    }
    for p in &mut v {
        for c in p.iter_mut() {
            if c.abs() < 1e-13 {
                *c = 0.0;
            }
        }
    }
    v
}

fn dist(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let s: f64 = (0..n).map(|i| {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        p[0] * q[1] - q[0] * p[1]
    }).sum();
    0.5 * s.abs()
}

fn point_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}

/// Distance from `p` to a convex polygon (zero inside).
pub fn point_polygon_distance(p: Point, poly: &[Point]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => dist(p, poly[0]),
        2 => point_segment(p, poly[0], poly[1]),
        n => {
            let orient = if signed_area(poly) >= 0.0 { 1.0 } else { -1.0 };
            let inside = (0..n).all(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                orient * ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) >= -1e-15
            });
            if inside {
                0.0
            } else {
                (0..n).map(|i| point_segment(p, poly[i], poly[(i + 1) % n])).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]).sum::<f64>()
}

/// Hausdorff distance between two convex polygons.
pub fn hausdorff(p: &[Point], q: &[Point]) -> f64 {
    let one = |x: &[Point], y: &[Point]| x.iter().map(|&v| point_polygon_distance(v, y)).fold(0.0, f64::max);
    one(p, q).max(one(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{gen_2state, gen_nstate, TwoStateVariant};
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn project_simple_triangle() {
        let mut hs = HalfspaceSystem::new(names(2));
        hs.add_le(vec![1.0, 0.0], 1.0).add_le(vec![0.0, 1.0], 1.0).add_le(vec![1.0, 1.0], 1.5);
        let p = fm_project(&hs, &[0], FM_ROW_CAP).unwrap();
        assert_eq!(p.rows, vec![Halfspace { coeffs: vec![1.0], rhs: 1.0 }]);
    }

    #[test]
    fn projection_row_cap() {
        let mut hs = HalfspaceSystem::new(names(3));
        for i in 0..10 {
            let s = i as f64;
            hs.add_le(vec![s, 1.0, 1.0], 1.0).add_le(vec![s, -1.0, 1.0], 1.0);
        }
        assert!(matches!(fm_project(&hs, &[0, 2], 50), Err(Error::ResourceLimit(_))));
        assert!(fm_project(&hs, &[0, 2], 200).is_ok());
    }

    #[test]
    fn box_support_six_dims() {
        let mut hs = HalfspaceSystem::new(names(6));
        for j in 0..6 {
            let mut r = vec![0.0; 6];
            r[j] = 1.0;
            hs.add_le(r.clone(), 1.0);
            hs.add_ge(r, 0.0);
        }
        assert_eq!(support_value(&hs, &lifted_weights(2, 0.0, 0.0)).unwrap().0, 0.0);
        assert!((support_value(&hs, &lifted_weights(2, 1.0, 1.0)).unwrap().0 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn box_region_exact() {
        for n in [3, 4, 7, 361] {
            let r = sweep_region(
                |a, b| Ok((a * 1.0 + b * 2.0, [1.0, 2.0])),
                n,
                false,
            )
            .unwrap();
            assert_eq!(r.vertices.len(), 4, "{:?}", r.vertices);
            assert!((r.area() - 2.0).abs() < 1e-12);
            for v in &r.vertices {
                assert!([[0.0, 0.0], [1.0, 0.0], [1.0, 2.0], [0.0, 2.0]].iter().any(|w| dist(*v, *w) < 1e-12));
            }
        }
    }

    #[test]
    fn point_region() {
        let r = sweep_region(|_, _| Ok((0.0, [0.0, 0.0])), 5, true).unwrap();
        assert_eq!(r.vertices, vec![[0.0, 0.0]]);
    }

    fn unit_system() -> (ConstraintSystem, Vec<f64>) {
        let sys = gen_2state(TwoStateVariant::Projected);
        let rhs = vec![1.0; sys.constraints.len()];
        (sys, rhs)
    }

    #[test]
    fn unit_constants_fm_matches_sweep() {
        let (sys, rhs) = unit_system();
        let hs = HalfspaceSystem::from_constraints(&sys, &rhs).unwrap();
        let proj = project_to_totals(&hs, 2).unwrap();
        let poly = polygon_from_halfspaces(&proj).unwrap();
        let reg = sweep_region(
            |a, b| {
                let (c, x) = support_value(&hs, &lifted_weights(2, a, b))?;
                Ok((c, user_totals(2, &x)))
            },
            9,
            true,
        )
        .unwrap();
        assert!(hausdorff(&poly, &reg.vertices) < 1e-9, "{poly:?} {:?}", reg.vertices);
    }

    #[test]
    fn zero_direction_dual() {
        let (sys, rhs) = unit_system();
        let c = dual_min(&sys, &rhs, 0.0, 0.0).unwrap();
        assert_eq!(c.objective(&rhs), 0.0);
        assert!(c.lambda.iter().all(|&l| l == 0.0));
        assert_eq!(check_prop1(&c, &sys).unwrap(), vec![0.0; 4]);
        assert_eq!(check_prop1_two_state(&c).unwrap(), [0.0; 4]);
    }

    #[test]
    fn negative_direction_rejected() {
        let (sys, rhs) = unit_system();
        assert!(matches!(dual_min(&sys, &rhs, -1.0, 1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn omega_certificate_maps_to_prime() {
        let (sys, rhs) = unit_system();
        let mut c = DualCertificate::zero(&sys);
        // Weight 2 on the row covering every user-1 layer, omega absorbs 1.
        let full1 = sys.constraints.iter().position(|s| s.receiver.0 == 1 && s.lhs.iter().all(|r| r.user == 1) && s.lhs.len() == 3).unwrap();
        c.lambda[full1] = 2.0;
        c.a = 1.0;
        c.omega = [1.0, 0.0];
        assert!(c.residual(&sys) < 1e-15);
        assert!(check_prop1(&c, &sys).is_err());
        let p = c.to_prime();
        assert_eq!((p.a, p.b), (2.0, 0.0));
        assert!(p.residual(&sys) < 1e-15);
        assert_eq!(p.objective(&rhs), c.objective(&rhs));
    }

    #[test]
    fn perturbed_certificate_flags_residual() {
        let (sys, rhs) = unit_system();
        let mut c = dual_min_prime(&sys, &rhs, 1.0, 1.0).unwrap();
        let w = c.weight("d11").unwrap();
        c.set_weight("d11", w + 0.25).unwrap();
        let r = check_prop1_two_state(&c).unwrap();
        assert!((r[0] - 0.25).abs() < 1e-12);
        let g = check_prop1(&c, &sys).unwrap();
        assert!((g[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn nstate_projection_is_bounded() {
        let sys = gen_nstate(3).unwrap();
        let rhs: Vec<f64> = (0..sys.constraints.len()).map(|i| 1.0 + (i % 5) as f64 * 0.3).collect();
        let (c, _) = lifted_support(&sys, &rhs, 1.0, 1.0).unwrap();
        let d = dual_min(&sys, &rhs, 1.0, 1.0).unwrap();
        let p = dual_min_prime(&sys, &rhs, 1.0, 1.0).unwrap();
        assert!((c - d.objective(&rhs)).abs() < 1e-8);
        assert!((c - p.objective(&rhs)).abs() < 1e-8);
    }

    #[test]
    fn refinement_recovers_unsampled_facet() {
        // Facet normal (1, 2) lies strictly between fan directions.
        let mut hs = HalfspaceSystem::new(vec!["R1".into(), "R2".into()]);
        hs.add_le(vec![1.0, 0.0], 1.0).add_le(vec![0.0, 1.0], 1.0).add_le(vec![1.0, 2.0], 2.2);
        hs.add_ge(vec![1.0, 0.0], 0.0).add_ge(vec![0.0, 1.0], 0.0);
        let exact = polygon_from_halfspaces(&hs).unwrap();
        let support = |a: f64, b: f64| -> Result<(f64, Point)> {
            let (c, x) = support_value(&hs, &[a, b])?;
            Ok((c, [x[0], x[1]]))
        };
        let coarse = sweep_region(support, 3, false).unwrap();
        assert!(hausdorff(&exact, &coarse.vertices) > 1e-2);
        let fine = sweep_region(support, 3, true).unwrap();
        assert!(hausdorff(&exact, &fine.vertices) < 1e-12, "{:?}", fine.vertices);
    }

    #[test]
    fn hausdorff_basics() {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(hausdorff(&sq, &sq), 0.0);
        let big = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        assert!((hausdorff(&sq, &big) - 1.0).abs() < 1e-15);
        assert_eq!(point_polygon_distance([0.5, 0.5], &sq), 0.0);
        assert!((polygon_area(&big) - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn strong_duality_and_homogeneity(
            vals in proptest::collection::vec(0.1f64..3.0, 30),
            a in 0.0f64..2.0,
            b in 0.0f64..2.0,
            t in 0.1f64..5.0,
        ) {
            let sys = gen_2state(TwoStateVariant::Projected);
            let (c, _) = lifted_support(&sys, &vals, a, b).unwrap();
            let d = dual_min(&sys, &vals, a, b).unwrap();
            prop_assert!(d.residual(&sys) < 1e-9);
            prop_assert!((c - d.objective(&vals)).abs() < 1e-8);
            let (ct, _) = lifted_support(&sys, &vals, t * a, t * b).unwrap();
            prop_assert!((ct - t * c).abs() < 1e-8 * (1.0 + ct.abs()));
        }

        #[test]
        fn prime_certificates_satisfy_identities(
            vals in proptest::collection::vec(0.1f64..3.0, 30),
            a in 0.0f64..2.0,
            b in 0.0f64..2.0,
        ) {
            let sys = gen_2state(TwoStateVariant::Projected);
            let d = dual_min_prime(&sys, &vals, a, b).unwrap();
            let g = check_prop1(&d, &sys).unwrap();
            let h = check_prop1_two_state(&d).unwrap();
            for (x, y) in g.iter().zip(h.iter()) {
                prop_assert!(x.abs() < 1e-9 && y.abs() < 1e-9);
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
