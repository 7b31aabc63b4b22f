//! Vectors over `N`, linear and semilinear sets, and minimal solutions of
//! linear Diophantine equations.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type IntVector = Vec<i64>;

pub fn norm_inf(x: &[i64]) -> i64 {
    x.iter().map(|v| v.abs()).max().unwrap_or(0)
}

pub fn norm_1(x: &[i64]) -> i64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn dot(u: &[i64], x: &[i64]) -> i64 {
    u.iter().zip(x).map(|(a, b)| a * b).sum()
}

pub fn add(x: &[i64], y: &[i64]) -> IntVector {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn unit(k: usize, i: usize) -> IntVector {
    let mut v = vec![0; k];
    v[i] = 1;
    v
}

/// `x ≤ y` componentwise.
pub fn leq(x: &[i64], y: &[i64]) -> bool {
    x.iter().zip(y).all(|(a, b)| a <= b)
}

/// `base + periods^⊕`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearSet {
    pub base: IntVector,
    #[serde(default)]
    pub periods: Vec<IntVector>,
}

impl LinearSet {
    pub fn new(base: IntVector, periods: Vec<IntVector>) -> Self {
        let mut l = LinearSet { base, periods };
        l.normalize();
        l
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Drops zero periods and duplicates, sorting what remains.
    pub fn normalize(&mut self) {
        self.periods.retain(|p| p.iter().any(|&v| v != 0));
        self.periods.sort();
        self.periods.dedup();
    }

    pub fn magnitude(&self) -> i64 {
        self.periods.iter().map(|p| norm_inf(p)).fold(norm_inf(&self.base), i64::max)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let r: IntVector = x.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        if r.iter().any(|&v| v < 0) {
            return false;
        }
        let periods: Vec<&IntVector> = self.periods.iter().filter(|p| p.iter().any(|&v| v != 0)).collect();
        let mut failed = HashSet::new();
        in_cone(&periods, 0, r, &mut failed)
    }
}

fn in_cone(periods: &[&IntVector], i: usize, r: IntVector, failed: &mut HashSet<(usize, IntVector)>) -> bool {
    if r.iter().all(|&v| v == 0) {
        return true;
    }
    if i == periods.len() {
        return false;
    }
    if failed.contains(&(i, r.clone())) {
        return false;
    }
    let p = periods[i];
    let max = p
        .iter()
        .zip(&r)
        .filter(|(pv, _)| **pv > 0)
        .map(|(pv, rv)| rv / pv)
        .min()
        .unwrap_or(0);
    let mut cur = r.clone();
    for c in 0..=max {
        if c > 0 {
            for (a, b) in cur.iter_mut().zip(p.iter()) {
                *a -= b;
            }
        }
        if cur.iter().any(|&v| v < 0) {
            break;
        }
        if in_cone(periods, i + 1, cur.clone(), failed) {
            return true;
        }
    }
    failed.insert((i, r));
    false
}

/// A finite union of linear sets in `N^dim`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemilinearSet {
    #[serde(default)]
    pub dim: usize,
    pub components: Vec<LinearSet>,
}

impl SemilinearSet {
    pub fn empty(dim: usize) -> Self {
        SemilinearSet { dim, components: Vec::new() }
    }

    /// All of `N^dim`.
    pub fn full(dim: usize) -> Self {
        SemilinearSet { dim, components: vec![LinearSet::new(vec![0; dim], (0..dim).map(|i| unit(dim, i)).collect())] }
    }

    pub fn singleton(x: IntVector) -> Self {
        SemilinearSet { dim: x.len(), components: vec![LinearSet::new(x, Vec::new())] }
    }

    pub fn from_components(dim: usize, components: Vec<LinearSet>) -> Self {
        let mut s = SemilinearSet { dim, components };
        s.normalize();
        s
    }

    pub fn normalize(&mut self) {
        for c in &mut self.components {
            c.normalize();
        }
        self.components.sort_by(|a, b| (&a.base, &a.periods).cmp(&(&b.base, &b.periods)));
        self.components.dedup();
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn magnitude(&self) -> i64 {
        magnitude(self)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        semilinear_member(self, x)
    }

    pub fn union(&self, other: &SemilinearSet) -> SemilinearSet {
        let mut c = self.components.clone();
        c.extend(other.components.iter().cloned());
        SemilinearSet::from_components(self.dim, c)
    }

    /// `{ x + y : x ∈ self, y ∈ other }`.
    pub fn minkowski_sum(&self, other: &SemilinearSet) -> SemilinearSet {
        let mut out = Vec::new();
        for a in &self.components {
            for b in &other.components {
                let mut periods = a.periods.clone();
                periods.extend(b.periods.iter().cloned());
                out.push(LinearSet::new(add(&a.base, &b.base), periods));
            }
        }
        SemilinearSet::from_components(self.dim, out)
    }

    /// All members with every entry at most `bound`.
    pub fn enumerate_box(&self, bound: i64) -> BTreeSet<IntVector> {
        let mut out = BTreeSet::new();
        for c in &self.components {
            if c.base.iter().any(|&v| v > bound) {
                continue;
            }
            let mut seen = HashSet::new();
            let mut stack = vec![c.base.clone()];
            seen.insert(c.base.clone());
            while let Some(x) = stack.pop() {
                for p in &c.periods {
                    let y = add(&x, p);
                    if y.iter().all(|&v| v <= bound) && seen.insert(y.clone()) {
                        stack.push(y);
                    }
                }
                out.insert(x);
            }
        }
        out
    }
}

/// Largest `‖y‖` over all bases and periods; 0 for the empty set.
pub fn magnitude(s: &SemilinearSet) -> i64 {
    s.components.iter().map(LinearSet::magnitude).max().unwrap_or(0)
}

pub fn semilinear_member(s: &SemilinearSet, x: &[i64]) -> bool {
    s.components.iter().any(|c| c.contains(x))
}

// ---------------------------------------------------------------------------
// Minimal solutions

/// All `x ∈ N^k` with `‖x‖₁ = total`, in lexicographic order.
pub fn compositions(total: i64, parts: usize) -> Vec<IntVector> {
    let mut out = Vec::new();
    let mut cur = vec![0; parts];
    fn rec(i: usize, left: i64, cur: &mut IntVector, out: &mut Vec<IntVector>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
        cur[i] = 0;
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

fn minimal_by_enumeration(u: &[i64], b: i64, homogeneous: bool) -> Vec<IntVector> {
    let bound = 1 + norm_1(u) + b.abs();
    let mut found: Vec<IntVector> = Vec::new();
    let start = if homogeneous { 1 } else { 0 };
    for total in start..=bound {
        for x in compositions(total, u.len()) {
            if dot(u, &x) == b && !found.iter().any(|y| leq(y, &x)) {
                found.push(x);
            }
        }
    }
    found.sort();
    found
}

/// Minimal nontrivial `x ∈ N^k` with `uᵀx = 0`, by exhaustive enumeration up
/// to `‖x‖₁ ≤ 1 + ‖u‖₁`.
pub fn minimal_solutions_homogeneous_exhaustive(u: &[i64]) -> Vec<IntVector> {
    minimal_by_enumeration(u, 0, true)
}

/// Minimal `x ∈ N^k` with `uᵀx = b`, by exhaustive enumeration up to
/// `‖x‖₁ ≤ 1 + ‖u‖₁ + |b|`.
pub fn minimal_solutions_inhom_exhaustive(u: &[i64], b: i64) -> Vec<IntVector> {
    minimal_by_enumeration(u, b, false)
}

/// Minimal solutions of `A x = b` over `N` by completion in the style of
/// Contejean and Devie: from a non-solution `x` only coordinates `j` with
/// `⟨Ax − b, Ae_j⟩ < 0` are incremented, and nodes above a known solution are
/// cut. For `b = 0` the trivial solution is excluded.
///
/// `columns[j]` is the `j`-th column of `A`. The search visits at most
/// `node_cap` vectors.
pub fn minimal_solutions_system(
    columns: &[IntVector],
    b: &[i64],
    node_cap: usize,
) -> Result<Vec<IntVector>> {
    let k = columns.len();
    let rows = b.len();
    let homogeneous = b.iter().all(|&v| v == 0);
    let residual = |x: &IntVector| -> IntVector {
        let mut r: IntVector = b.iter().map(|v| -v).collect();
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0 {
                for i in 0..rows {
                    r[i] += columns[j][i] * xj;
                }
            }
        }
        r
    };
    if !homogeneous && k == 0 {
        return Ok(Vec::new());
    }
    let mut found: Vec<IntVector> = Vec::new();
    let mut level: Vec<IntVector> = if homogeneous {
        (0..k).map(|i| unit(k, i)).collect()
    } else {
        vec![vec![0; k]]
    };
    let cutoff = pottier_cutoff(columns, b);
    let mut visited = 0usize;
    let mut depth = if homogeneous { 1u128 } else { 0 };
    while !level.is_empty() && depth <= cutoff {
        let mut next = HashSet::new();
        let mut solved = Vec::new();
        for x in level {
            visited += 1;
            if visited > node_cap {
                return Err(Error::ResourceExhausted(format!(
                    "minimal solution search exceeded {node_cap} nodes"
                )));
            }
            let r = residual(&x);
            if r.iter().all(|&v| v == 0) {
                solved.push(x);
                continue;
            }
            for j in 0..k {
                let d: i64 = (0..rows).map(|i| r[i] * columns[j][i]).sum();
                if d < 0 {
                    let mut y = x.clone();
                    y[j] += 1;
                    if !found.iter().any(|s| leq(s, &y)) && !solved.iter().any(|s| leq(s, &y)) {
                        next.insert(y);
                    }
                }
            }
        }
        found.extend(solved);
        let mut v: Vec<IntVector> = next.into_iter().filter(|y| !found.iter().any(|s| leq(s, y))).collect();
        v.sort();
        level = v;
        depth += 1;
    }
    found.sort();
    found.dedup();
    Ok(found)
}

/// `(1 + ‖(A | −b)‖_{1,∞})^rows`, an upper bound on `‖x‖₁` of minimal solutions.
fn pottier_cutoff(columns: &[IntVector], b: &[i64]) -> u128 {
    let rows = b.len();
    let row_norm = (0..rows)
        .map(|i| columns.iter().map(|c| c[i].unsigned_abs() as u128).sum::<u128>() + b[i].unsigned_abs() as u128)
        .max()
        .unwrap_or(0);
    let mut bound: u128 = 1;
    for _ in 0..rows.max(1) {
        bound = bound.saturating_mul(1 + row_norm);
    }
    bound
}

const SEARCH_CAP: usize = 50_000_000;

/// Minimal nontrivial `x ∈ N^k` with `uᵀx = 0`. Each has `‖x‖₁ ≤ 1 + ‖u‖₁`.
pub fn minimal_solutions_homogeneous(u: &[i64]) -> Vec<IntVector> {
    let cols: Vec<IntVector> = u.iter().map(|&v| vec![v]).collect();
    minimal_solutions_system(&cols, &[0], SEARCH_CAP).expect("single equation search is bounded")
}

/// Minimal `x ∈ N^k` with `uᵀx = b`; `{0}` when `b = 0`.
pub fn minimal_solutions_inhom(u: &[i64], b: i64) -> Vec<IntVector> {
    if b == 0 {
        return vec![vec![0; u.len()]];
    }
    let cols: Vec<IntVector> = u.iter().map(|&v| vec![v]).collect();
    minimal_solutions_system(&cols, &[b], SEARCH_CAP).expect("single equation search is bounded")
}

/// `{x ∈ N^k : uᵀx = b}` as minimal solutions plus homogeneous periods.
pub fn decompose_hyperplane_solutions(u: &[i64], b: i64) -> SemilinearSet {
    let k = u.len();
    let periods = minimal_solutions_homogeneous(u);
    let comps = minimal_solutions_inhom(u, b)
        .into_iter()
        .map(|c| LinearSet::new(c, periods.clone()))
        .collect();
    SemilinearSet::from_components(k, comps)
}

/// Every `x ∈ N^k` with `Sx = y`, where `owner[i]` is the row of `S` holding
/// coordinate `i`.
fn fiber(y: &[i64], owner: &[usize], k: usize) -> Vec<IntVector> {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); y.len()];
    for (i, &o) in owner.iter().enumerate() {
        groups[o].push(i);
    }
    let mut out = vec![vec![0; k]];
    for (j, &yj) in y.iter().enumerate() {
        if yj == 0 {
            continue;
        }
        if groups[j].is_empty() {
            return Vec::new();
        }
        let parts = compositions(yj, groups[j].len());
        let mut next = Vec::with_capacity(out.len() * parts.len());
        for x in &out {
            for p in &parts {
                let mut z = x.clone();
                for (t, &i) in groups[j].iter().enumerate() {
                    z[i] = p[t];
                }
                next.push(z);
            }
        }
        out = next;
    }
    out
}

/// The same set as [`decompose_hyperplane_solutions`], built by solving
/// `vᵀy = b` for `v = (−M, …, M)` and pulling the result back along the
/// map collapsing equal coefficients of `u`. Bases and period columns have
/// `‖·‖₁ ≤ 1 + (M + 2)M`.
pub fn decompose_onedim_bounded(u: &[i64], b: i64, m: i64) -> Result<SemilinearSet> {
    if m < 0 || norm_inf(u) > m || b.abs() > m {
        return Err(Error::BoundViolation(format!("‖u‖ and |b| must be at most M = {m}")));
    }
    let k = u.len();
    let v: IntVector = (-m..=m).collect();
    let owner: Vec<usize> = u.iter().map(|&x| (x + m) as usize).collect();
    let bases = minimal_solutions_inhom(&v, b);
    let columns = minimal_solutions_homogeneous(&v);
    let mut periods: Vec<IntVector> = Vec::new();
    for c in &columns {
        periods.extend(fiber(c, &owner, k));
    }
    let mut comps = Vec::new();
    for c in &bases {
        for x in fiber(c, &owner, k) {
            comps.push(LinearSet::new(x, periods.clone()));
        }
    }
    let limit = 1 + (m + 2) * m;
    for c in &comps {
        if norm_1(&c.base) > limit || c.periods.iter().any(|p| norm_1(p) > limit) {
            return Err(Error::BoundViolation(format!("component exceeds 1 + (M+2)M = {limit}")));
        }
    }
    Ok(SemilinearSet::from_components(k, comps))
}

/// `{x ∈ L : uᵀx = b}` for `L = a + A·N^n`, by solving `(uᵀA) y = b − uᵀa`
/// and mapping back. The magnitude stays within `2M + M(m+kmM)(m+kmM+2)`.
pub fn intersect_linear_with_hyperplane(l: &LinearSet, u: &[i64], b: i64, m: i64) -> Result<SemilinearSet> {
    let k = l.dim();
    if u.len() != k {
        return Err(Error::Precondition("dimension mismatch".into()));
    }
    if norm_inf(u) > m || b.abs() > m {
        return Err(Error::BoundViolation(format!("‖u‖ and |b| must be at most m = {m}")));
    }
    let big_m = l.magnitude();
    let a = &l.base;
    let ua: IntVector = l.periods.iter().map(|p| dot(u, p)).collect();
    let rhs = b - dot(u, a);
    if l.periods.is_empty() {
        return Ok(if rhs == 0 { SemilinearSet::singleton(a.clone()) } else { SemilinearSet::empty(k) });
    }
    let mm = norm_inf(&ua).max(rhs.abs());
    let ys = decompose_onedim_bounded(&ua, rhs, mm)?;
    let apply = |y: &[i64]| -> IntVector {
        let mut x = vec![0; k];
        for (j, &yj) in y.iter().enumerate() {
            if yj != 0 {
                for i in 0..k {
                    x[i] += l.periods[j][i] * yj;
                }
            }
        }
        x
    };
    let comps: Vec<LinearSet> = ys
        .components
        .iter()
        .map(|c| LinearSet::new(add(a, &apply(&c.base)), c.periods.iter().map(|p| apply(p)).collect()))
        .collect();
    let out = SemilinearSet::from_components(k, comps);
    let kk = k as i64;
    let mprime = m + kk * m * big_m;
    let limit = 2 * big_m + big_m * mprime * (mprime + 2);
    if out.magnitude() > limit {
        return Err(Error::BoundViolation(format!("magnitude {} exceeds {limit}", out.magnitude())));
    }
    Ok(out)
}

/// Intersection of a semilinear set with a hyperplane, component by component.
pub fn intersect_with_hyperplane(s: &SemilinearSet, u: &[i64], b: i64, m: i64) -> Result<SemilinearSet> {
    let mut comps = Vec::new();
    for c in &s.components {
        comps.extend(intersect_linear_with_hyperplane(c, u, b, m)?.components);
    }
    Ok(SemilinearSet::from_components(s.dim, comps))
}
