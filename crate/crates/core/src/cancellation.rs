//! Cancellations of block factorizations in a free product `G₀ * G₁`:
//! verification, construction, mixed periods and their insertion and
//! removal, and the local semilinear cover of a solution.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::alphabet::{decompose, DecompositionTree, IndependenceAlphabet};
use crate::error::{Error, Result};
use crate::group::{is_identity, reduce_word, syllables, FreeSplit, GroupWord, Syllable};
use crate::knapsack::{self, hyperplane_of, preprocess, q_bound, restrict, ExponentEquation};
use crate::semilinear::{self, intersect_with_hyperplane, LinearSet, SemilinearSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Partition,
    Consistent,
    Cancelling,
    WellNested,
    Maximal,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Partition => "partition",
            Axiom::Consistent => "consistent",
            Axiom::Cancelling => "cancelling",
            Axiom::WellNested => "well-nested",
            Axiom::Maximal => "maximal",
        };
        f.write_str(s)
    }
}

/// Where a block comes from. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockTag {
    /// Syllable `syllable` of the constant `v_index`.
    Const { index: usize, syllable: usize },
    /// Syllable `syllable` of copy `power` of the cycle `u_index`.
    Cycle { index: usize, power: usize, syllable: usize },
    /// Unspecified origin, for hand-built sequences.
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub word: GroupWord,
    pub side: u8,
    pub tag: BlockTag,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockSequence {
    pub blocks: Vec<Block>,
}

impl BlockSequence {
    /// Blocks of untagged origin, each lying in one factor.
    pub fn from_words(words: &[GroupWord], split: &FreeSplit) -> Result<Self> {
        let mut blocks = Vec::with_capacity(words.len());
        for w in words {
            let sylls = syllables(w, split);
            if sylls.len() != 1 {
                return Err(Error::Precondition("every block must be a nonempty word over one factor".into()));
            }
            blocks.push(Block { word: w.clone(), side: sylls[0].side, tag: BlockTag::Free });
        }
        Ok(BlockSequence { blocks })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn concat(&self) -> GroupWord {
        let mut w = GroupWord::new();
        for b in &self.blocks {
            w.extend(&b.word);
        }
        w
    }

    /// The cycle a block belongs to, if any.
    pub fn cycle_of(&self, p: usize) -> Option<usize> {
        match self.blocks[p].tag {
            BlockTag::Cycle { index, .. } => Some(index),
            _ => None,
        }
    }

    /// Positions of the blocks of cycle `i`, in order.
    pub fn cycle_blocks(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.cycle_of(p) == Some(i)).collect()
    }
}

/// Set of edges partitioning the blocks; 0-based, each edge sorted, edges
/// ordered by their least element.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cancellation {
    pub edges: Vec<Vec<usize>>,
}

impl Cancellation {
    pub fn new(mut edges: Vec<Vec<usize>>) -> Self {
        for e in &mut edges {
            e.sort_unstable();
        }
        edges.sort();
        Cancellation { edges }
    }

    /// From 1-based index lists.
    pub fn from_one_based(edges: &[Vec<usize>]) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for e in edges {
            let mut v = Vec::with_capacity(e.len());
            for &i in e {
                if i == 0 {
                    return Err(Error::Parse("block indices are 1-based".into()));
                }
                v.push(i - 1);
            }
            out.push(v);
        }
        Ok(Cancellation::new(out))
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|e| e.iter().map(|i| i + 1).collect()).collect()
    }

    /// Edge index of every block.
    fn owner(&self, m: usize) -> Vec<usize> {
        let mut o = vec![usize::MAX; m];
        for (k, e) in self.edges.iter().enumerate() {
            for &i in e {
                if i < m {
                    o[i] = k;
                }
            }
        }
        o
    }

    /// The edge containing block `p`.
    pub fn edge_of(&self, p: usize) -> Option<&Vec<usize>> {
        self.edges.iter().find(|e| e.binary_search(&p).is_ok())
    }
}

impl Serialize for Cancellation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cancellation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<usize>> = Vec::deserialize(d)?;
        Cancellation::from_one_based(&raw).map_err(serde::de::Error::custom)
    }
}

/// Checks the five axioms in order and reports the first that fails.
pub fn verify_cancellation(
    seq: &BlockSequence,
    alpha: &IndependenceAlphabet,
    c: &Cancellation,
) -> std::result::Result<(), Axiom> {
    let m = seq.len();
    let mut seen = vec![false; m];
    for e in &c.edges {
        if e.is_empty() {
            return Err(Axiom::Partition);
        }
        for &i in e {
            if i >= m || seen[i] {
                return Err(Axiom::Partition);
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Axiom::Partition);
    }
    for e in &c.edges {
        let side = seq.blocks[e[0]].side;
        if e.iter().any(|&i| seq.blocks[i].side != side) {
            return Err(Axiom::Consistent);
        }
    }
    for e in &c.edges {
        let mut w = GroupWord::new();
        let mut sorted = e.clone();
        sorted.sort_unstable();
        for i in sorted {
            w.extend(&seq.blocks[i].word);
        }
        if !is_identity(&w, alpha) {
            return Err(Axiom::Cancelling);
        }
    }
    if !well_nested(&c.edges) {
        return Err(Axiom::WellNested);
    }
    let owner = c.owner(m);
    for i in 1..m {
        if seq.blocks[i - 1].side == seq.blocks[i].side && owner[i - 1] != owner[i] {
            return Err(Axiom::Maximal);
        }
    }
    Ok(())
}

/// No `i₁ < j₁ < i₂ < j₂` with `i₁, i₂ ∈ I` and `j₁, j₂ ∈ J`. Relative to
/// each edge `I`, the elements of another edge must fall into one gap of
/// `I` or only into the two outer gaps.
fn well_nested(edges: &[Vec<usize>]) -> bool {
    let sorted: Vec<Vec<usize>> = edges
        .iter()
        .map(|e| {
            let mut v = e.clone();
            v.sort_unstable();
            v
        })
        .collect();
    for (a, ea) in sorted.iter().enumerate() {
        for (b, eb) in sorted.iter().enumerate() {
            if a == b {
                continue;
            }
            let gaps: Vec<usize> = eb.iter().map(|j| ea.partition_point(|i| i < j)).collect();
            let first = gaps[0];
            if gaps.iter().all(|&g| g == first) {
                continue;
            }
            if gaps.iter().all(|&g| g == 0 || g == ea.len()) {
                continue;
            }
            return false;
        }
    }
    true
}

/// A cancellation, if the concatenation equals 1: repeatedly removes the
/// leftmost maximal same-factor run that equals 1.
pub fn find_cancellation(seq: &BlockSequence, alpha: &IndependenceAlphabet) -> Option<Cancellation> {
    let mut alive: Vec<usize> = (0..seq.len()).collect();
    let mut edges = Vec::new();
    while !alive.is_empty() {
        let mut found = None;
        let mut start = 0;
        while start < alive.len() {
            let side = seq.blocks[alive[start]].side;
            let mut end = start;
            while end + 1 < alive.len() && seq.blocks[alive[end + 1]].side == side {
                end += 1;
            }
            let mut w = GroupWord::new();
            for &i in &alive[start..=end] {
                w.extend(&seq.blocks[i].word);
            }
            if is_identity(&w, alpha) {
                found = Some((start, end));
                break;
            }
            start = end + 1;
        }
        let (s, e) = found?;
        edges.push(alive[s..=e].to_vec());
        alive.drain(s..=e);
    }
    Some(Cancellation::new(edges))
}

/// The words of `eq` must be geodesic and every cycle cyclically reduced
/// with respect to `split`.
fn check_format(eq: &ExponentEquation, split: &FreeSplit) -> Result<()> {
    let alpha = &eq.alphabet;
    for w in eq.constants.iter().chain(&eq.cycles) {
        if !split.covers(w) {
            return Err(Error::InvalidSplit("word uses generators outside the split".into()));
        }
        if reduce_word(w, alpha).len() != w.len() {
            return Err(Error::Precondition("instance is not preprocessed: word not reduced".into()));
        }
    }
    for g in &eq.cycles {
        if !crate::group::is_cyclically_reduced(g, split, alpha) {
            return Err(Error::Precondition("instance is not preprocessed: cycle not cyclically reduced".into()));
        }
    }
    Ok(())
}

/// The coarsest common refinement of `v₀ u₁^{x₁} v₁ ⋯ u_k^{x_k} v_k` and the
/// syllable factorization, with each copy of a cycle split separately.
pub fn block_factorize(eq: &ExponentEquation, split: &FreeSplit, x: &[u64]) -> Result<BlockSequence> {
    check_format(eq, split)?;
    let k = eq.k();
    if x.len() != k {
        return Err(Error::Precondition(format!("expected {k} exponents")));
    }
    let mut blocks = Vec::new();
    for i in 0..=k {
        for (s, syl) in syllables(&eq.constants[i], split).into_iter().enumerate() {
            blocks.push(Block { word: syl.word, side: syl.side, tag: BlockTag::Const { index: i, syllable: s } });
        }
        if i < k {
            let sylls = syllables(&eq.cycles[i], split);
            for p in 0..x[i] as usize {
                for (s, syl) in sylls.iter().enumerate() {
                    blocks.push(Block {
                        word: syl.word.clone(),
                        side: syl.side,
                        tag: BlockTag::Cycle { index: i, power: p, syllable: s },
                    });
                }
            }
        }
    }
    Ok(BlockSequence { blocks })
}

/// `‖u_j‖ e_i + ‖u_i‖ e_j` for mixed cycles `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MixedPeriod {
    pub i: usize,
    pub j: usize,
    pub vector: Vec<u64>,
}

fn syllable_counts(eq: &ExponentEquation, split: &FreeSplit) -> Vec<usize> {
    eq.cycles.iter().map(|g| crate::group::syllable_count(g, split)).collect()
}

/// Indices of the mixed cycles.
pub fn mixed_cycles(eq: &ExponentEquation, split: &FreeSplit) -> Vec<usize> {
    syllable_counts(eq, split).iter().enumerate().filter(|(_, &c)| c >= 2).map(|(i, _)| i).collect()
}

/// `max` of `x` over the mixed cycles.
pub fn mixed_norm(eq: &ExponentEquation, split: &FreeSplit, x: &[u64]) -> u64 {
    mixed_cycles(eq, split).into_iter().map(|i| x[i]).max().unwrap_or(0)
}

pub fn mixed_periods(eq: &ExponentEquation, split: &FreeSplit) -> Vec<MixedPeriod> {
    let counts = syllable_counts(eq, split);
    let mixed = mixed_cycles(eq, split);
    let k = eq.k();
    let mut out = Vec::new();
    for (a, &i) in mixed.iter().enumerate() {
        for &j in &mixed[a + 1..] {
            let mut v = vec![0u64; k];
            v[i] = counts[j] as u64;
            v[j] = counts[i] as u64;
            out.push(MixedPeriod { i, j, vector: v });
        }
    }
    out
}

/// Rotates by `t` syllables to the left.
fn rotate_syllables(sylls: &[Syllable], t: usize) -> GroupWord {
    let n = sylls.len();
    let mut w = GroupWord::new();
    for s in 0..n {
        w.extend(&sylls[(s + t) % n].word);
    }
    w
}

/// `λ^{p−r}(u_i^{‖u_j‖}) ρ^{s−q}(u_j^{‖u_i‖})` for blocks `p` of `u_i`, `q` of `u_j`.
fn rotation_word(eq: &ExponentEquation, split: &FreeSplit, seq: &BlockSequence, period: &MixedPeriod, p: usize, q: usize) -> GroupWord {
    let (i, j) = (period.i, period.j);
    let ni = period.vector[j] as usize;
    let nj = period.vector[i] as usize;
    let r = seq.cycle_blocks(i)[0];
    let s = *seq.cycle_blocks(j).last().unwrap();
    let left = syllables(&eq.cycles[i].pow(nj), split);
    let right = syllables(&eq.cycles[j].pow(ni), split);
    let len = right.len();
    let mut w = rotate_syllables(&left, (p - r) % left.len());
    w.extend(&rotate_syllables(&right, (len - (s - q) % len) % len));
    w
}

/// Edges `{p, q}` witnessing compatibility of `period` with `(x, C)`.
fn compatibility_witness(
    eq: &ExponentEquation,
    split: &FreeSplit,
    seq: &BlockSequence,
    c: &Cancellation,
    period: &MixedPeriod,
) -> Option<(usize, usize)> {
    for e in &c.edges {
        if e.len() != 2 {
            continue;
        }
        let (p, q) = (e[0], e[1]);
        if seq.cycle_of(p) != Some(period.i) || seq.cycle_of(q) != Some(period.j) {
            continue;
        }
        if is_identity(&rotation_word(eq, split, seq, period, p, q), &eq.alphabet) {
            return Some((p, q));
        }
    }
    None
}

/// `P(x, C)`: the mixed periods that can be added to `x`.
pub fn compatible_periods(eq: &ExponentEquation, split: &FreeSplit, x: &[u64], c: &Cancellation) -> Result<Vec<MixedPeriod>> {
    let seq = block_factorize(eq, split, x)?;
    verify_cancellation(&seq, &eq.alphabet, c).map_err(Error::InvalidCancellation)?;
    Ok(mixed_periods(eq, split)
        .into_iter()
        .filter(|pi| compatibility_witness(eq, split, &seq, c, pi).is_some())
        .collect())
}

fn certified(eq: &ExponentEquation, split: &FreeSplit, x: &[u64], c: &Cancellation) -> Result<BlockSequence> {
    let seq = block_factorize(eq, split, x)?;
    verify_cancellation(&seq, &eq.alphabet, c).map_err(Error::InvalidCancellation)?;
    Ok(seq)
}

/// Adds a compatible mixed period: inserts `‖u_i‖‖u_j‖` blocks left of `p`
/// and right of `q` and pairs them up from the inside out.
pub fn grow(
    eq: &ExponentEquation,
    split: &FreeSplit,
    x: &[u64],
    c: &Cancellation,
    period: &MixedPeriod,
) -> Result<(Vec<u64>, Cancellation)> {
    let seq = certified(eq, split, x, c)?;
    let (p, q) = compatibility_witness(eq, split, &seq, c, period)
        .ok_or_else(|| Error::Precondition("period is not compatible".into()))?;
    let l = (period.vector[period.i] * period.vector[period.j]) as usize;
    let shift = |t: usize| {
        if t < p {
            t
        } else if t <= q {
            t + l
        } else {
            t + 2 * l
        }
    };
    let mut edges: Vec<Vec<usize>> = c.edges.iter().map(|e| e.iter().map(|&t| shift(t)).collect()).collect();
    for t in 0..l {
        edges.push(vec![p + t, q + l + l - t]);
    }
    let x2: Vec<u64> = x.iter().zip(&period.vector).map(|(a, b)| a + b).collect();
    let c2 = Cancellation::new(edges);
    certified(eq, split, &x2, &c2)?;
    Ok((x2, c2))
}

/// One removal step: a mixed pair with more than `‖u_i‖‖u_j‖` standard
/// edges loses `‖u_i‖‖u_j‖` blocks on both sides. `None` if no pair has
/// enough standard edges.
pub fn shrink_once(
    eq: &ExponentEquation,
    split: &FreeSplit,
    x: &[u64],
    c: &Cancellation,
) -> Result<Option<(MixedPeriod, Vec<u64>, Cancellation)>> {
    let seq = certified(eq, split, x, c)?;
    let m = seq.len();
    let mut partner = vec![usize::MAX; m];
    for e in &c.edges {
        if e.len() == 2 {
            partner[e[0]] = e[1];
            partner[e[1]] = e[0];
        }
    }
    for period in mixed_periods(eq, split) {
        let (i, j) = (period.i, period.j);
        let l = (period.vector[i] * period.vector[j]) as usize;
        let bi: Vec<usize> = seq
            .cycle_blocks(i)
            .into_iter()
            .filter(|&p| partner[p] != usize::MAX && seq.cycle_of(partner[p]) == Some(j))
            .collect();
        if bi.len() < l + 1 {
            continue;
        }
        let p = *bi.last().unwrap();
        let q = partner[p];
        for t in 0..=l {
            if p < t || partner[p - t] != q + t {
                return Err(Error::BoundViolation("standard edges between two cycles are not consecutive".into()));
            }
        }
        let removed = |t: usize| (p - l..p).contains(&t) || (q + 1..=q + l).contains(&t);
        let map = |t: usize| {
            if t < p - l {
                t
            } else if t <= q {
                t - l
            } else {
                t - 2 * l
            }
        };
        let edges: Vec<Vec<usize>> = c
            .edges
            .iter()
            .filter(|e| !e.iter().any(|&t| removed(t)))
            .map(|e| e.iter().map(|&t| map(t)).collect())
            .collect();
        let x2: Vec<u64> = x.iter().zip(&period.vector).map(|(a, b)| a - b).collect();
        let c2 = Cancellation::new(edges);
        certified(eq, split, &x2, &c2)?;
        return Ok(Some((period, x2, c2)));
    }
    Ok(None)
}

/// `q(n) = (n + 3k + 1) + k n²` for the instance.
pub fn threshold(eq: &ExponentEquation) -> BigUint {
    q_bound(eq.size(), eq.k())
}

/// Removes one mixed period when `‖x‖_mixed > q(n)`; `None` below the
/// threshold.
pub fn shrink(
    eq: &ExponentEquation,
    split: &FreeSplit,
    x: &[u64],
    c: &Cancellation,
) -> Result<Option<(MixedPeriod, Vec<u64>, Cancellation)>> {
    if BigUint::from(mixed_norm(eq, split, x)) <= threshold(eq) {
        return Ok(None);
    }
    match shrink_once(eq, split, x, c)? {
        Some(r) => Ok(Some(r)),
        None => Err(Error::BoundViolation("no removable mixed period above the threshold".into())),
    }
}

/// Shrinks until `‖x‖_mixed ≤ q(n)`; returns the certified solution reached
/// and the removed periods.
pub fn shrink_to_threshold(
    eq: &ExponentEquation,
    split: &FreeSplit,
    x: &[u64],
    c: &Cancellation,
) -> Result<(Vec<u64>, Cancellation, Vec<MixedPeriod>)> {
    let mut x = x.to_vec();
    let mut c = c.clone();
    let mut removed = Vec::new();
    while let Some((pi, x2, c2)) = shrink(eq, split, &x, &c)? {
        removed.push(pi);
        x = x2;
        c = c2;
    }
    Ok((x, c, removed))
}

/// A certified solution for `x`, or `NotASolution`.
pub fn certify(eq: &ExponentEquation, split: &FreeSplit, x: &[u64]) -> Result<(BlockSequence, Cancellation)> {
    let seq = block_factorize(eq, split, x)?;
    let c = find_cancellation(&seq, &eq.alphabet).ok_or(Error::NotASolution)?;
    Ok((seq, c))
}

/// A semilinear set `S'` with `x ∈ S' ⊆ S` for a preprocessed free-product
/// instance: `y + S₁ + ⋯ + S_t + P(x′, C′)^⊕`.
pub fn local_semilinear_cover(eq: &ExponentEquation, split: &FreeSplit, x: &[u64]) -> Result<SemilinearSet> {
    if !eq.is_knapsack_shape() {
        return Err(Error::Precondition("the cover needs pairwise distinct variables".into()));
    }
    let k = eq.k();
    let (_, c0) = certify(eq, split, x)?;
    let (x1, c1, _) = shrink_to_threshold(eq, split, x, &c0)?;
    let periods = compatible_periods(eq, split, &x1, &c1)?;
    let seq = block_factorize(eq, split, &x1)?;
    let counts = syllable_counts(eq, split);

    // Simple cycles with blocks, grouped by the edge holding them.
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut y: Vec<i64> = x1.iter().map(|&v| v as i64).collect();
    for i in 0..k {
        if counts[i] != 1 {
            continue;
        }
        y[i] = 0;
        let blocks = seq.cycle_blocks(i);
        let Some(&first) = blocks.first() else { continue };
        let e = c1.edges.iter().position(|e| e.binary_search(&first).is_ok()).unwrap();
        match groups.iter_mut().find(|(g, _)| *g == e) {
            Some((_, v)) => v.push(i),
            None => groups.push((e, vec![i])),
        }
    }

    let mut cover = SemilinearSet::singleton(y);
    for (e, cycles) in &groups {
        let edge = &c1.edges[*e];
        let side = seq.blocks[edge[0]].side;
        let mut consts = vec![GroupWord::new(); cycles.len() + 1];
        let mut seg = 0;
        for &b in edge {
            match seq.cycle_of(b) {
                Some(i) if cycles.contains(&i) => seg = cycles.iter().position(|&c| c == i).unwrap() + 1,
                _ => consts[seg].extend(&seq.blocks[b].word),
            }
        }
        let sub = ExponentEquation {
            alphabet: eq.alphabet.clone(),
            constants: consts,
            cycles: cycles.iter().map(|&i| eq.cycles[i].clone()).collect(),
            variables: cycles.iter().map(|&i| eq.variables[i].clone()).collect(),
            mode: eq.mode,
        };
        let sub = restrict(&sub, &split.gens(side))?;
        let z: Vec<u64> = cycles.iter().map(|&i| x1[i]).collect();
        let tree = decompose(&sub.alphabet)?;
        let s = cover_rec(&sub, &tree, &z)?;
        cover = cover.minkowski_sum(&embed(&s, cycles, k));
    }
    let pset = LinearSet::new(vec![0; k], periods.iter().map(|p| p.vector.iter().map(|&v| v as i64).collect()).collect());
    cover = cover.minkowski_sum(&SemilinearSet::from_components(k, vec![pset]));
    Ok(cover)
}

fn embed(s: &SemilinearSet, coords: &[usize], k: usize) -> SemilinearSet {
    let f = |v: &[i64]| {
        let mut out = vec![0; k];
        for (t, &c) in coords.iter().enumerate() {
            out[c] = v[t];
        }
        out
    };
    let comps = s.components.iter().map(|c| LinearSet::new(f(&c.base), c.periods.iter().map(|p| f(p)).collect())).collect();
    SemilinearSet::from_components(k, comps)
}

fn cover_rec(eq: &ExponentEquation, tree: &DecompositionTree, x: &[u64]) -> Result<SemilinearSet> {
    let k = eq.k();
    if !eq.is_solution_at(x) {
        return Err(Error::NotASolution);
    }
    match tree {
        DecompositionTree::Trivial => Ok(SemilinearSet::full(k)),
        DecompositionTree::DirectZ { apex, child } => {
            let sub = restrict(eq, &child.generators())?;
            let sub_tree = decompose(&sub.alphabet)?;
            let inner = cover_rec(&sub, &sub_tree, x)?;
            let (u, b) = hyperplane_of(eq, *apex);
            let m = semilinear::norm_inf(&u).max(b.abs());
            intersect_with_hyperplane(&inner, &u, b, m)
        }
        DecompositionTree::FreeProduct(children) => {
            let split = FreeSplit::from_children(&eq.alphabet, children)?;
            let pre = preprocess(eq, Some(&split))?;
            let xp: Vec<u64> = pre.kept.iter().map(|&p| x[p]).collect();
            let s = local_semilinear_cover(&pre.eq, &split, &xp)?;
            Ok(pre.lift_set(&s))
        }
    }
}

/// A semilinear set containing the solution `x` (exponents per position)
/// and contained in the solution set, of magnitude within the tameness
/// bound.
pub fn solution_cover(eq: &ExponentEquation, tree: &DecompositionTree, x: &[u64]) -> Result<SemilinearSet> {
    if !tree.matches(&eq.alphabet) {
        return Err(Error::TreeMismatch);
    }
    if !eq.is_knapsack_shape() {
        return Err(Error::Precondition("the cover needs pairwise distinct variables".into()));
    }
    let s = cover_rec(eq, tree, x)?;
    let xi: Vec<i64> = x.iter().map(|&v| v as i64).collect();
    if !s.contains(&xi) {
        return Err(Error::BoundViolation("cover does not contain the solution".into()));
    }
    let bound = knapsack::tameness_bound(eq, tree)?.value;
    if BigUint::from(s.magnitude().max(0) as u64) > bound {
        return Err(Error::BoundViolation(format!("cover magnitude {} exceeds {bound}", s.magnitude())));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::{brute_force_solutions, tameness_bound};

    fn f2() -> (IndependenceAlphabet, FreeSplit) {
        let a = IndependenceAlphabet::free(&["a", "b"]);
        let s = FreeSplit::new(&a, &[0], &[1]).unwrap();
        (a, s)
    }

    fn w(alpha: &IndependenceAlphabet, s: &str) -> GroupWord {
        GroupWord::parse_str(alpha, s).unwrap()
    }

    fn seq(alpha: &IndependenceAlphabet, split: &FreeSplit, words: &[&str]) -> BlockSequence {
        let ws: Vec<GroupWord> = words.iter().map(|s| w(alpha, s)).collect();
        BlockSequence::from_words(&ws, split).unwrap()
    }

    #[test]
    fn blocks_of_a_mixed_cycle() {
        let (a, s) = f2();
        let eq = ExponentEquation::knapsack(a.clone(), vec![w(&a, "a b")], &GroupWord::new());
        let bs = block_factorize(&eq, &s, &[2]).unwrap();
        let words: Vec<String> = bs.blocks.iter().map(|b| b.word.display(&a).to_string()).collect();
        assert_eq!(words, ["a", "b", "a", "b"]);
        assert_eq!(bs.blocks[1].tag, BlockTag::Cycle { index: 0, power: 0, syllable: 1 });
        assert!(block_factorize(&eq, &s, &[0]).unwrap().is_empty());
    }

    #[test]
    fn axioms() {
        let (a, s) = f2();
        let good = seq(&a, &s, &["a", "b", "b^-1", "a^-1"]);
        let c = Cancellation::from_one_based(&[vec![2, 3], vec![1, 4]]).unwrap();
        assert_eq!(verify_cancellation(&good, &a, &c), Ok(()));
        let crossing = seq(&a, &s, &["a", "b", "a^-1", "b^-1"]);
        let c = Cancellation::from_one_based(&[vec![1, 3], vec![2, 4]]).unwrap();
        assert_eq!(verify_cancellation(&crossing, &a, &c), Err(Axiom::WellNested));
        let c = Cancellation::from_one_based(&[vec![2, 3]]).unwrap();
        assert_eq!(verify_cancellation(&good, &a, &c), Err(Axiom::Partition));
        let c = Cancellation::from_one_based(&[vec![1, 2, 3, 4]]).unwrap();
        assert_eq!(verify_cancellation(&good, &a, &c), Err(Axiom::Consistent));
        let c = Cancellation::from_one_based(&[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(verify_cancellation(&seq(&a, &s, &["a", "a", "a^-1", "a^-1"]), &a, &c), Err(Axiom::Cancelling));
        let c = Cancellation::from_one_based(&[vec![1, 4], vec![2, 3]]).unwrap();
        assert_eq!(verify_cancellation(&seq(&a, &s, &["a", "a", "a^-1", "a^-1"]), &a, &c), Err(Axiom::Maximal));
    }

    #[test]
    fn finding() {
        let (a, s) = f2();
        let c = find_cancellation(&seq(&a, &s, &["a", "a^-1"]), &a).unwrap();
        assert_eq!(c.to_one_based(), vec![vec![1, 2]]);
        assert!(find_cancellation(&seq(&a, &s, &["a", "b"]), &a).is_none());
        let bs = seq(&a, &s, &["a", "b", "b^-1", "a^-1"]);
        let c = find_cancellation(&bs, &a).unwrap();
        assert_eq!(verify_cancellation(&bs, &a, &c), Ok(()));
        assert_eq!(serde_json::to_string(&c).unwrap(), "[[1,4],[2,3]]");
    }

    #[test]
    fn periods() {
        let (a, s) = f2();
        let eq = ExponentEquation::knapsack(a.clone(), vec![w(&a, "a b"), w(&a, "a b a^-1 b")], &GroupWord::new());
        let p = mixed_periods(&eq, &s);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].vector, vec![4, 2]);
        let eq = ExponentEquation::knapsack(a.clone(), vec![w(&a, "a b")], &GroupWord::new());
        assert!(mixed_periods(&eq, &s).is_empty());
        let eq = ExponentEquation::knapsack(a.clone(), vec![w(&a, "a"), w(&a, "b")], &GroupWord::new());
        assert!(mixed_periods(&eq, &s).is_empty());
    }

    #[test]
    fn grow_and_shrink() {
        let (a, s) = f2();
        let eq = ExponentEquation::knapsack(a.clone(), vec![w(&a, "a b"), w(&a, "b^-1 a^-1")], &GroupWord::new());
        let (_, c) = certify(&eq, &s, &[1, 1]).unwrap();
        let p = compatible_periods(&eq, &s, &[1, 1], &c).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].vector, vec![2, 2]);
        let (x2, c2) = grow(&eq, &s, &[1, 1], &c, &p[0]).unwrap();
        assert_eq!(x2, vec![3, 3]);
        assert!(eq.is_solution_at(&x2));
        assert!(compatible_periods(&eq, &s, &x2, &c2).unwrap().contains(&p[0]));
        let (x3, c3) = grow(&eq, &s, &x2, &c2, &p[0]).unwrap();
        assert_eq!(x3, vec![5, 5]);
        let (pi, x4, c4) = shrink_once(&eq, &s, &x3, &c3).unwrap().unwrap();
        assert_eq!(pi, p[0]);
        assert_eq!(x4, x2);
        let bs = block_factorize(&eq, &s, &x4).unwrap();
        assert_eq!(verify_cancellation(&bs, &a, &c4), Ok(()));
        assert!(shrink(&eq, &s, &x3, &c3).unwrap().is_none());
    }

    #[test]
    fn shrink_above_threshold() {
        let (a, s) = f2();
        let eq = ExponentEquation::knapsack(a.clone(), vec![w(&a, "a b"), w(&a, "b^-1 a^-1")], &GroupWord::new());
        let q = threshold(&eq);
        assert_eq!(q, BigUint::from(4u32 + 7 + 2 * 16));
        let (_, mut c) = certify(&eq, &s, &[1, 1]).unwrap();
        let mut x = vec![1, 1];
        let p = compatible_periods(&eq, &s, &x, &c).unwrap()[0].clone();
        while BigUint::from(x[0]) <= q {
            let (x2, c2) = grow(&eq, &s, &x, &c, &p).unwrap();
            x = x2;
            c = c2;
        }
        let (x2, c2, removed) = shrink_to_threshold(&eq, &s, &x, &c).unwrap();
        assert!(!removed.is_empty());
        assert!(BigUint::from(x2[0]) <= q);
        assert!(eq.is_solution_at(&x2));
        assert!(compatible_periods(&eq, &s, &x2, &c2).unwrap().contains(&p));
    }

    #[test]
    fn cover_of_simple_cycles() {
        let (a, _) = f2();
        let eq = ExponentEquation::knapsack(a.clone(), vec![w(&a, "a"), w(&a, "b")], &w(&a, "a a b b"));
        let tree = decompose(&a).unwrap();
        let s = solution_cover(&eq, &tree, &[2, 2]).unwrap();
        assert!(s.contains(&[2, 2]));
        for v in s.enumerate_box(6) {
            let x: Vec<u64> = v.iter().map(|&t| t as u64).collect();
            assert!(eq.is_solution_at(&x));
        }
    }

    #[test]
    fn cover_with_mixed_cycles() {
        let (a, _) = f2();
        let eq = ExponentEquation::knapsack(a.clone(), vec![w(&a, "a b"), w(&a, "b^-1 a^-1"), w(&a, "a")], &w(&a, "a a"));
        let tree = decompose(&a).unwrap();
        let bound = tameness_bound(&eq, &tree).unwrap();
        let sols = brute_force_solutions(&eq, 4, 1 << 20).unwrap();
        assert!(!sols.is_empty());
        for x in &sols {
            let s = solution_cover(&eq, &tree, x).unwrap();
            assert!(BigUint::from(s.magnitude() as u64) <= bound.value);
            for v in s.enumerate_box(5) {
                let y: Vec<u64> = v.iter().map(|&t| t as u64).collect();
                assert!(eq.is_solution_at(&y), "{y:?} from cover of {x:?}");
            }
        }
    }
}
