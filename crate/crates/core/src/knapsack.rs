//! Exponent equations `h₀ g₁^{x₁} h₁ ⋯ g_k^{x_k} h_k = 1` over graph groups:
//! preprocessing, the tameness bound, brute-force oracles, the reduction to
//! acyclic automata and the dispatching solver.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::alphabet::{classify, decompose, DecompositionTree, Gen, GraphClass, IndependenceAlphabet};
use crate::automata::{free_group_membership_one, membership_one, MembershipConfig, WordAutomaton};
use crate::error::{Error, Result};
use crate::group::{cyclically_reduce, is_identity, canonicalize, reduce_product_raw, reduce_word, FreeSplit, GroupWord, Letter};
use crate::semilinear::{self, SemilinearSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Knapsack,
    Subsetsum,
    Integer,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knapsack" => Ok(Mode::Knapsack),
            "subsetsum" => Ok(Mode::Subsetsum),
            "integer" => Ok(Mode::Integer),
            _ => Err(Error::Parse(format!("unknown mode `{s}`"))),
        }
    }
}

/// `h₀ g₁^{x₁} h₁ ⋯ g_k^{x_k} h_k = 1`. Variables may repeat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentEquation {
    pub alphabet: IndependenceAlphabet,
    /// `h₀ … h_k`
    pub constants: Vec<GroupWord>,
    /// `g₁ … g_k`
    pub cycles: Vec<GroupWord>,
    pub variables: Vec<String>,
    pub mode: Mode,
}

impl ExponentEquation {
    pub fn new(
        alphabet: IndependenceAlphabet,
        constants: Vec<GroupWord>,
        cycles: Vec<GroupWord>,
        variables: Vec<String>,
    ) -> Result<Self> {
        let eq = ExponentEquation { alphabet, constants, cycles, variables, mode: Mode::Knapsack };
        eq.validate()?;
        Ok(eq)
    }

    /// `g₁^{x₁} ⋯ g_k^{x_k} = target` with variables `x1 … xk`.
    pub fn knapsack(alphabet: IndependenceAlphabet, cycles: Vec<GroupWord>, target: &GroupWord) -> Self {
        let k = cycles.len();
        let mut constants = vec![GroupWord::new(); k + 1];
        constants[k] = target.inverse();
        let variables = (1..=k).map(|i| format!("x{i}")).collect();
        ExponentEquation { alphabet, constants, cycles, variables, mode: Mode::Knapsack }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.cycles.len();
        if self.constants.len() != k + 1 {
            return Err(Error::InvalidInstance(format!("expected {} constants, got {}", k + 1, self.constants.len())));
        }
        if self.variables.len() != k {
            return Err(Error::InvalidInstance(format!("expected {k} variables, got {}", self.variables.len())));
        }
        if self.variables.iter().any(|v| v.is_empty()) {
            return Err(Error::InvalidInstance("empty variable name".into()));
        }
        let n = self.alphabet.len();
        if self.constants.iter().chain(&self.cycles).any(|w| w.letters().iter().any(|l| l.gen >= n)) {
            return Err(Error::InvalidInstance("letter outside the alphabet".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.cycles.len()
    }

    /// `Σ|hᵢ| + Σ|gᵢ|` with geodesic lengths.
    pub fn size(&self) -> usize {
        self.constants.iter().chain(&self.cycles).map(|w| reduce_word(w, &self.alphabet).len()).sum()
    }

    /// `true` iff all variables are pairwise distinct.
    pub fn is_knapsack_shape(&self) -> bool {
        let set: HashSet<&String> = self.variables.iter().collect();
        set.len() == self.variables.len()
    }

    /// Distinct variables in order of first appearance.
    pub fn distinct_variables(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.variables.iter().filter(|v| seen.insert(v.as_str())).cloned().collect()
    }

    /// For every position, the index of its variable among the distinct ones.
    pub fn variable_slots(&self) -> Vec<usize> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        self.variables
            .iter()
            .map(|v| {
                let next = index.len();
                *index.entry(v.as_str()).or_insert(next)
            })
            .collect()
    }

    /// Expands an assignment of the distinct variables to positions.
    pub fn positions(&self, values: &[u64]) -> Vec<u64> {
        self.variable_slots().into_iter().map(|s| values[s]).collect()
    }

    /// `h₀ g₁^{x₁} ⋯ g_k^{x_k} h_k` for exponents given per position.
    pub fn word_at(&self, exps: &[u64]) -> GroupWord {
        let mut w = self.constants[0].clone();
        for (i, &e) in exps.iter().enumerate() {
            w.extend(&self.cycles[i].pow(e as usize));
            w.extend(&self.constants[i + 1]);
        }
        w
    }

    pub fn is_solution_at(&self, exps: &[u64]) -> bool {
        is_identity(&self.word_at(exps), &self.alphabet)
    }

    /// Checks an assignment of the distinct variables.
    pub fn is_solution(&self, values: &[u64]) -> bool {
        self.is_solution_at(&self.positions(values))
    }

    pub fn assignment_map(&self, values: &[u64]) -> BTreeMap<String, i64> {
        self.distinct_variables().into_iter().zip(values).map(|(v, &x)| (v, x as i64)).collect()
    }

    fn reduced(&self) -> ExponentEquation {
        let r = |w: &GroupWord| reduce_word(w, &self.alphabet);
        ExponentEquation {
            alphabet: self.alphabet.clone(),
            constants: self.constants.iter().map(r).collect(),
            cycles: self.cycles.iter().map(r).collect(),
            variables: self.variables.clone(),
            mode: self.mode,
        }
    }

    /// Deletes every letter outside `keep`. Graph groups retract onto the
    /// subgroup generated by any subset of generators, so solutions survive.
    pub fn project(&self, keep: &[Gen]) -> ExponentEquation {
        let mut mask = vec![false; self.alphabet.len()];
        for &g in keep {
            mask[g] = true;
        }
        let f = |w: &GroupWord| -> GroupWord { w.letters().iter().copied().filter(|l| mask[l.gen]).collect() };
        ExponentEquation {
            alphabet: self.alphabet.clone(),
            constants: self.constants.iter().map(f).collect(),
            cycles: self.cycles.iter().map(f).collect(),
            variables: self.variables.clone(),
            mode: self.mode,
        }
    }

    /// Treats every position as its own variable.
    pub fn relaxed(&self) -> ExponentEquation {
        let mut e = self.clone();
        e.variables = (1..=self.k()).map(|i| format!("p{i}")).collect();
        e
    }
}

/// Result of [`preprocess`]: the reduced equation together with the map
/// back to the original positions.
#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub eq: ExponentEquation,
    /// Original position of every remaining cycle.
    pub kept: Vec<usize>,
    /// Original positions whose cycle was trivial.
    pub free: Vec<usize>,
    pub original_k: usize,
}

impl Preprocessed {
    /// Lifts exponents of the remaining positions, setting free ones to `fill`.
    pub fn lift(&self, exps: &[u64], fill: u64) -> Vec<u64> {
        let mut out = vec![fill; self.original_k];
        for (i, &p) in self.kept.iter().enumerate() {
            out[p] = exps[i];
        }
        out
    }

    /// Lifts a set over the remaining positions; free positions become
    /// unconstrained.
    pub fn lift_set(&self, s: &SemilinearSet) -> SemilinearSet {
        let k = self.original_k;
        let embed = |v: &[i64]| -> Vec<i64> {
            let mut out = vec![0; k];
            for (i, &p) in self.kept.iter().enumerate() {
                out[p] = v[i];
            }
            out
        };
        let comps = s
            .components
            .iter()
            .map(|c| {
                let mut periods: Vec<Vec<i64>> = c.periods.iter().map(|p| embed(p)).collect();
                periods.extend(self.free.iter().map(|&f| semilinear::unit(k, f)));
                semilinear::LinearSet::new(embed(&c.base), periods)
            })
            .collect();
        SemilinearSet::from_components(k, comps)
    }
}

/// Reduces all words and drops trivial cycles. With a free-product split,
/// every cycle is also cyclically reduced, moving conjugators into the
/// neighbouring constants.
pub fn preprocess(eq: &ExponentEquation, split: Option<&FreeSplit>) -> Result<Preprocessed> {
    eq.validate()?;
    let alpha = &eq.alphabet;
    let r = eq.reduced();
    let mut constants = vec![r.constants[0].clone()];
    let mut cycles = Vec::new();
    let mut variables = Vec::new();
    let mut kept = Vec::new();
    let mut free = Vec::new();
    for i in 0..r.k() {
        let g = &r.cycles[i];
        if g.is_empty() {
            free.push(i);
            let last = constants.pop().unwrap();
            constants.push(reduce_word(&last.concat(&r.constants[i + 1]), alpha));
            continue;
        }
        let (f, core) = match split {
            Some(s) => cyclically_reduce(g, s, alpha)?,
            None => (GroupWord::new(), g.clone()),
        };
        let last = constants.pop().unwrap();
        constants.push(reduce_word(&last.concat(&f.inverse()), alpha));
        cycles.push(core);
        variables.push(r.variables[i].clone());
        kept.push(i);
        constants.push(reduce_word(&f.concat(&r.constants[i + 1]), alpha));
    }
    let out = ExponentEquation { alphabet: alpha.clone(), constants, cycles, variables, mode: eq.mode };
    Ok(Preprocessed { eq: out, kept, free, original_k: eq.k() })
}

// ---------------------------------------------------------------------------
// Tameness bound

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeBound {
    pub node: String,
    /// Instance size fed into this node.
    pub n: usize,
    #[serde(serialize_with = "ser_big")]
    pub value: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TamenessBound {
    #[serde(serialize_with = "ser_big")]
    pub value: BigUint,
    pub n_raw: usize,
    pub n_effective: usize,
    pub k: usize,
    /// Post-order list of per-node magnitudes.
    pub nodes: Vec<NodeBound>,
}

pub(crate) fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// `(n + 3k + 1) + k n²`, the threshold above which a mixed period can be
/// removed.
pub fn q_bound(n: usize, k: usize) -> BigUint {
    let n = BigUint::from(n);
    let k = BigUint::from(k);
    &n + BigUint::from(3u32) * &k + BigUint::one() + &k * &n * &n
}

/// `2M + M(m + kmM)(m + kmM + 2)`.
pub fn direct_z_bound(big_m: &BigUint, m: usize, k: usize) -> BigUint {
    let m = BigUint::from(m);
    let k = BigUint::from(k);
    let mm = &m + &k * &m * big_m;
    BigUint::from(2u32) * big_m + big_m * &mm * (&mm + BigUint::from(2u32))
}

/// Evaluates the magnitude recurrence at a fixed size `n` on every level.
pub fn tameness_bound_formula(tree: &DecompositionTree, n: usize, k: usize) -> BigUint {
    let mut nodes = Vec::new();
    bound_rec(tree, n, k, false, &mut nodes, None)
}

fn bound_rec(
    tree: &DecompositionTree,
    n: usize,
    k: usize,
    inflate_free: bool,
    nodes: &mut Vec<NodeBound>,
    alpha: Option<&IndependenceAlphabet>,
) -> BigUint {
    let (label, n_used, value) = match tree {
        DecompositionTree::Trivial => ("1".to_string(), n, BigUint::zero()),
        DecompositionTree::DirectZ { child, .. } if **child == DecompositionTree::Trivial => {
            ("Z".to_string(), n, BigUint::from(1 + 2 * n))
        }
        DecompositionTree::DirectZ { child, .. } => {
            let m = bound_rec(child, n, k, true, nodes, alpha);
            ("x Z".to_string(), n, direct_z_bound(&m, n, k))
        }
        DecompositionTree::FreeProduct(children) => {
            let n_in = if inflate_free { 3 * n } else { n };
            let first = &children[0];
            let rest = rest_tree(children);
            let p0 = bound_rec(first, n_in, k, true, nodes, alpha);
            let p1 = bound_rec(&rest, n_in, k, true, nodes, alpha);
            ("*".to_string(), n_in, q_bound(n_in, k) + p0 + p1 + BigUint::from(n_in))
        }
    };
    let node = match alpha {
        Some(a) => tree.display(a),
        None => label,
    };
    nodes.push(NodeBound { node, n: n_used, value: value.clone() });
    value
}

/// The factor `G₁` of a split `G₀ * G₁` taken at a free-product node.
pub fn rest_tree(children: &[DecompositionTree]) -> DecompositionTree {
    if children.len() == 2 {
        children[1].clone()
    } else {
        DecompositionTree::FreeProduct(children[1..].to_vec())
    }
}

/// Bound on the magnitude of the solution set of `eq`. The size is taken
/// after preprocessing for the root split; nested free-product levels
/// assume the worst-case growth `n ↦ 3n` of their own cyclic reduction.
pub fn tameness_bound(eq: &ExponentEquation, tree: &DecompositionTree) -> Result<TamenessBound> {
    if !tree.matches(&eq.alphabet) {
        return Err(Error::TreeMismatch);
    }
    let split = root_split(&eq.alphabet, tree)?;
    let pre = preprocess(eq, split.as_ref())?;
    let n_eff = pre.eq.size();
    let k = pre.eq.k();
    let mut nodes = Vec::new();
    let value = bound_rec(tree, n_eff, k, false, &mut nodes, Some(&eq.alphabet));
    Ok(TamenessBound { value, n_raw: eq.size(), n_effective: n_eff, k, nodes })
}

pub fn root_split(alpha: &IndependenceAlphabet, tree: &DecompositionTree) -> Result<Option<FreeSplit>> {
    match tree {
        DecompositionTree::FreeProduct(children) => Ok(Some(FreeSplit::from_children(alpha, children)?)),
        _ => Ok(None),
    }
}

// ---------------------------------------------------------------------------
// Bounded search

/// Incremental evaluation of the equation along positions.
struct Evaluator<'a> {
    eq: &'a ExponentEquation,
    slots: Vec<usize>,
    /// Remaining-letter bound after position `i` (constants `h_i..h_k` plus cycles `> i`).
    exp_lo: Vec<Vec<i64>>,
    exp_hi: Vec<Vec<i64>>,
    rem_len: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    fn new(eq: &'a ExponentEquation, bounds: &[u64]) -> Self {
        let k = eq.k();
        let ng = eq.alphabet.len();
        let slots = eq.variable_slots();
        let cycle_sums: Vec<Vec<i64>> = eq.cycles.iter().map(|g| g.exponent_sums(ng)).collect();
        let const_sums: Vec<Vec<i64>> = eq.constants.iter().map(|h| h.exponent_sums(ng)).collect();
        // After position p the rest is cycles p+1.. and constants p+2..
        let mut exp_lo = vec![vec![0i64; ng]; k + 1];
        let mut exp_hi = vec![vec![0i64; ng]; k + 1];
        let mut rem_len = vec![0usize; k + 1];
        for p in (0..k).rev() {
            let next = p + 1;
            let mut lo = exp_lo[next].clone();
            let mut hi = exp_hi[next].clone();
            let mut len = rem_len[next];
            if next < k {
                let b = bounds[slots[next]] as i64;
                for g in 0..ng {
                    let s = cycle_sums[next][g] * b;
                    lo[g] += s.min(0);
                    hi[g] += s.max(0);
                    lo[g] += const_sums[next + 1][g];
                    hi[g] += const_sums[next + 1][g];
                }
                len += eq.cycles[next].len() * b as usize + eq.constants[next + 1].len();
            }
            exp_lo[p] = lo;
            exp_hi[p] = hi;
            rem_len[p] = len;
        }
        Evaluator { eq, slots, exp_lo, exp_hi, rem_len }
    }

    /// Whether the reduced prefix ending with constant `p+1` can still be
    /// cancelled by the rest.
    fn feasible(&self, p: usize, prefix: &GroupWord) -> bool {
        if prefix.len() > self.rem_len[p] {
            return false;
        }
        let ng = self.eq.alphabet.len();
        let es = prefix.exponent_sums(ng);
        (0..ng).all(|g| self.exp_lo[p][g] <= -es[g] && -es[g] <= self.exp_hi[p][g])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: usize,
}

/// Lexicographically least assignment of the distinct variables with
/// `values[v] ≤ bounds[v]` solving `eq`, if any.
pub fn search_box(eq: &ExponentEquation, bounds: &[u64], node_cap: usize) -> Result<Option<Vec<u64>>> {
    search_box_with(eq, bounds, node_cap, true).map(|(r, _)| r)
}

pub fn search_box_with(
    eq: &ExponentEquation,
    bounds: &[u64],
    node_cap: usize,
    prune: bool,
) -> Result<(Option<Vec<u64>>, SearchStats)> {
    let d = eq.distinct_variables().len();
    if bounds.len() != d {
        return Err(Error::Precondition(format!("expected {d} bounds")));
    }
    let alpha = &eq.alphabet;
    let ev = Evaluator::new(eq, bounds);
    let k = eq.k();
    // Later positions sharing a variable: a failure memo key must include
    // the values of variables that are still to be used.
    let mut used_later: Vec<Vec<usize>> = vec![Vec::new(); k];
    for p in 0..k {
        let mut v: Vec<usize> = (p + 1..k).map(|q| ev.slots[q]).filter(|&s| (0..=p).any(|r| ev.slots[r] == s)).collect();
        v.sort_unstable();
        v.dedup();
        used_later[p] = v;
    }
    let mut stats = SearchStats::default();
    let mut failed: HashSet<(usize, GroupWord, Vec<u64>)> = HashSet::new();
    let mut values: Vec<Option<u64>> = vec![None; d];
    let start = reduce_word(&eq.constants[0], alpha);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        p: usize,
        prefix: &GroupWord,
        eq: &ExponentEquation,
        ev: &Evaluator,
        bounds: &[u64],
        values: &mut Vec<Option<u64>>,
        used_later: &[Vec<usize>],
        failed: &mut HashSet<(usize, GroupWord, Vec<u64>)>,
        stats: &mut SearchStats,
        node_cap: usize,
        prune: bool,
    ) -> Result<bool> {
        let k = eq.k();
        if p == k {
            return Ok(prefix.is_empty());
        }
        stats.nodes += 1;
        if stats.nodes > node_cap {
            return Err(Error::ResourceExhausted(format!("search exceeded {node_cap} nodes")));
        }
        let alpha = &eq.alphabet;
        let slot = ev.slots[p];
        let key_vals: Vec<u64> = used_later[p].iter().map(|&s| values[s].unwrap_or(u64::MAX)).collect();
        let (lo, hi, fresh) = match values[slot] {
            Some(v) => (v, v, false),
            None => (0, bounds[slot], true),
        };
        let memo_key = (p, prefix.clone(), key_vals);
        if fresh && failed.contains(&memo_key) {
            return Ok(false);
        }
        let g = &eq.cycles[p];
        let h = &eq.constants[p + 1];
        let mut cur = prefix.clone();
        for _ in 0..lo {
            cur = reduce_product_raw(&cur, g.letters(), alpha);
        }
        let mut x = lo;
        loop {
            let next = canonicalize(&reduce_product_raw(&cur, h.letters(), alpha), alpha);
            if !prune || ev.feasible(p, &next) {
                if fresh {
                    values[slot] = Some(x);
                }
                let found = rec(p + 1, &next, eq, ev, bounds, values, used_later, failed, stats, node_cap, prune)?;
                if found {
                    return Ok(true);
                }
                if fresh {
                    values[slot] = None;
                }
            }
            if x >= hi {
                break;
            }
            x += 1;
            cur = reduce_product_raw(&cur, g.letters(), alpha);
        }
        if fresh {
            let key_vals: Vec<u64> = used_later[p].iter().map(|&s| values[s].unwrap_or(u64::MAX)).collect();
            failed.insert((p, prefix.clone(), key_vals));
        }
        Ok(false)
    }

    if k == 0 {
        return Ok((start.is_empty().then(Vec::new), stats));
    }
    let found = rec(0, &start, eq, &ev, bounds, &mut values, &used_later, &mut failed, &mut stats, node_cap, prune)?;
    if found {
        Ok((Some(values.into_iter().map(|v| v.unwrap_or(0)).collect()), stats))
    } else {
        Ok((None, stats))
    }
}

/// All assignments of the distinct variables in `[0, bound]` that solve
/// `eq`, in lexicographic order. Requires `(bound+1)^d ≤ cap`.
pub fn brute_force_solutions(eq: &ExponentEquation, bound: u64, cap: u64) -> Result<Vec<Vec<u64>>> {
    let d = eq.distinct_variables().len();
    let total = (bound as u128 + 1).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(Error::CapExceeded { what: "assignments", value: total, cap: cap as u128 });
    }
    let mut out = Vec::new();
    if eq.is_knapsack_shape() {
        // Depth-first in lexicographic order, extending reduced prefixes.
        fn rec(eq: &ExponentEquation, p: usize, prefix: &GroupWord, bound: u64, vals: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            let alpha = &eq.alphabet;
            if p == eq.k() {
                if prefix.is_empty() {
                    out.push(vals.clone());
                }
                return;
            }
            let mut cur = prefix.clone();
            for x in 0..=bound {
                vals[p] = x;
                rec(eq, p + 1, &reduce_product_raw(&cur, eq.constants[p + 1].letters(), alpha), bound, vals, out);
                if x < bound {
                    cur = reduce_product_raw(&cur, eq.cycles[p].letters(), alpha);
                }
            }
        }
        let start = reduce_product_raw(&GroupWord::new(), eq.constants[0].letters(), &eq.alphabet);
        rec(eq, 0, &start, bound, &mut vec![0; d], &mut out);
        return Ok(out);
    }
    let mut vals = vec![0u64; d];
    loop {
        if eq.is_solution(&vals) {
            out.push(vals.clone());
        }
        // odometer, last variable fastest
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if vals[i] < bound {
                vals[i] += 1;
                for v in vals.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Reduction to acyclic automata

/// Chain automaton on `(k+2)(B+1)` states accepting `v₀ u₁^{x₁} v₁ ⋯` for
/// all `x ≤ B`. State `(i, j)` is numbered `i(B+1) + j`.
pub fn knapsack_to_automaton(eq: &ExponentEquation, bound: usize) -> Result<WordAutomaton> {
    if !eq.is_knapsack_shape() {
        return Err(Error::Precondition("the automaton reduction needs pairwise distinct variables".into()));
    }
    let k = eq.k();
    let w = bound + 1;
    let st = |i: usize, j: usize| i * w + j;
    let mut a = WordAutomaton::new((k + 2) * w, st(0, 0), vec![st(k + 1, 0)]);
    a.add(st(0, 0), st(1, 0), eq.constants[0].clone());
    for i in 1..=k {
        for j in 0..bound {
            a.add(st(i, j), st(i, j + 1), eq.cycles[i - 1].clone());
            a.add(st(i, j), st(i, j + 1), GroupWord::new());
        }
        a.add(st(i, bound), st(i + 1, 0), eq.constants[i].clone());
    }
    Ok(a)
}

/// Reads the exponents off an accepting path of [`knapsack_to_automaton`].
pub fn decode_automaton_path(k: usize, bound: usize, path: &[usize]) -> Vec<u64> {
    let mut x = vec![0u64; k];
    let block = 2 * bound + 1;
    for &t in path {
        if t == 0 {
            continue;
        }
        let i = (t - 1) / block;
        let off = (t - 1) % block;
        if off < 2 * bound && off % 2 == 0 {
            x[i] += 1;
        }
    }
    x
}

/// The loop automaton `v₀ (u₁)* v₁ ⋯ (u_k)* v_k` on `k + 2` states.
pub fn knapsack_loop_automaton(eq: &ExponentEquation) -> WordAutomaton {
    let k = eq.k();
    let mut a = WordAutomaton::new(k + 2, 0, vec![k + 1]);
    a.add(0, 1, eq.constants[0].clone());
    for i in 1..=k {
        a.add(i, i, eq.cycles[i - 1].clone());
        a.add(i, i + 1, eq.constants[i].clone());
    }
    a
}

/// Restriction to the generators in `keep`, as an equation over the induced
/// sub-alphabet.
pub fn restrict(eq: &ExponentEquation, keep: &[Gen]) -> Result<ExponentEquation> {
    let alpha = &eq.alphabet;
    let mut keep: Vec<Gen> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let mut new_index = vec![usize::MAX; alpha.len()];
    for (i, &g) in keep.iter().enumerate() {
        new_index[g] = i;
    }
    let names: Vec<&str> = keep.iter().map(|&g| alpha.name(g)).collect();
    let edges: Vec<(&str, &str)> = alpha
        .edges()
        .into_iter()
        .filter(|&(a, b)| new_index[a] != usize::MAX && new_index[b] != usize::MAX)
        .map(|(a, b)| (alpha.name(a), alpha.name(b)))
        .collect();
    let sub = crate::alphabet::validate_alphabet(&names, &edges)?;
    let f = |w: &GroupWord| -> GroupWord {
        w.letters()
            .iter()
            .filter(|l| new_index[l.gen] != usize::MAX)
            .map(|l| Letter { gen: new_index[l.gen], inv: l.inv })
            .collect()
    };
    Ok(ExponentEquation {
        alphabet: sub,
        constants: eq.constants.iter().map(f).collect(),
        cycles: eq.cycles.iter().map(f).collect(),
        variables: eq.variables.clone(),
        mode: eq.mode,
    })
}

// ---------------------------------------------------------------------------
// Solving

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Solvable,
    Unsolvable,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Automaton,
    Search,
}

/// Why an equation has no solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Every assignment with all exponents at most `bound` was excluded, and
    /// `bound` is the tameness bound of the instance.
    TamenessSweep { bound: String, method: SweepMethod },
    /// The image in the abelianization `Z^m` has no solution over `N`.
    Abelianization { papadimitriou: String },
    /// Saturation of the loop automaton over a free group.
    FreeGroupSaturation,
    /// The retraction onto the generators `kept` is already unsolvable.
    Projection { kept: Vec<String>, inner: Box<Certificate> },
    /// The equation with all variables made distinct is unsolvable.
    Relaxation { inner: Box<Certificate> },
    /// All of `{0,1}^k` was checked.
    SubsetSumExhaustive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveOutcome {
    pub status: Status,
    pub assignment: Option<BTreeMap<String, i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(serialize_with = "ser_opt_big")]
    pub bound: Option<BigUint>,
    /// Largest per-variable exponent budget covered by a completed search.
    pub budget: u64,
}

fn ser_opt_big<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_str(&b.to_string()),
        None => s.serialize_none(),
    }
}

impl SolveOutcome {
    fn solvable(eq: &ExponentEquation, values: &[u64], bound: Option<BigUint>, budget: u64) -> Self {
        SolveOutcome {
            status: Status::Solvable,
            assignment: Some(eq.assignment_map(values)),
            certificate: None,
            bound,
            budget,
        }
    }

    fn unsolvable(cert: Certificate, bound: Option<BigUint>, budget: u64) -> Self {
        SolveOutcome { status: Status::Unsolvable, assignment: None, certificate: Some(cert), bound, budget }
    }

    fn unknown(bound: Option<BigUint>, budget: u64) -> Self {
        SolveOutcome { status: Status::Unknown, assignment: None, certificate: None, bound, budget }
    }

    /// Exit code for the command line: 0 when decided, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Unknown => 2,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Largest tameness bound that is swept exhaustively.
    pub ceiling: u64,
    /// The automaton reduction is used up to this many states.
    pub automaton_state_limit: usize,
    /// Node budget of a single search.
    pub node_cap: usize,
    /// Maximum number of subset-sum assignments.
    pub subset_cap: u64,
    /// Small budgets tried with `probe_node_cap` before any full sweep.
    pub probe_budget: u64,
    pub probe_node_cap: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            ceiling: 4096, automaton_state_limit: 100_000, node_cap: 300_000, subset_cap: 1 << 22,
            probe_budget: 4,
            probe_node_cap: 20_000,
        }
    }
}

pub fn solve(eq: &ExponentEquation) -> Result<SolveOutcome> {
    solve_with(eq, &SolveConfig::default())
}

/// Dispatches on `eq.mode`.
pub fn solve_with(eq: &ExponentEquation, cfg: &SolveConfig) -> Result<SolveOutcome> {
    eq.validate()?;
    match eq.mode {
        Mode::Knapsack => solve_knapsack(eq, cfg, true),
        Mode::Subsetsum => solve_subset_sum(eq, cfg),
        Mode::Integer => solve_integer_valued(eq, cfg),
    }
}

/// Iterative deepening with budgets `0, 1, 2, 4, …` up to `limit`. Returns
/// the lexicographically least solution at the first successful budget and
/// the last budget that was searched completely.
fn deepen(eq: &ExponentEquation, limit: u64, cfg: &SolveConfig) -> Result<(Option<Vec<u64>>, Option<u64>)> {
    let d = eq.distinct_variables().len();
    let mut budget = 0u64;
    let mut done = None;
    loop {
        match search_box(eq, &vec![budget; d], cfg.node_cap) {
            Ok(Some(x)) => return Ok((Some(x), Some(budget))),
            Ok(None) => done = Some(budget),
            Err(Error::ResourceExhausted(_)) => return Ok((None, done)),
            Err(e) => return Err(e),
        }
        if budget >= limit || d == 0 {
            return Ok((None, done));
        }
        budget = if budget == 0 { 1 } else { (budget * 2).min(limit) };
    }
}

fn solve_knapsack(eq: &ExponentEquation, cfg: &SolveConfig, full: bool) -> Result<SolveOutcome> {
    match classify(&eq.alphabet) {
        GraphClass::Complete => solve_abelian(eq, cfg, full),
        GraphClass::TransitiveForestNotComplete => solve_forest(eq, cfg, full),
        GraphClass::General { .. } => {
            if !full {
                return Ok(SolveOutcome::unknown(None, 0));
            }
            let (x, done) = deepen(eq, cfg.ceiling, cfg)?;
            Ok(match x {
                Some(x) => SolveOutcome::solvable(eq, &x, None, done.unwrap_or(0)),
                None => SolveOutcome::unknown(None, done.unwrap_or(0)),
            })
        }
    }
}

/// `A x = b` over `N` in the abelianization: one column per distinct
/// variable, `b` from the constants.
pub fn abelianize(eq: &ExponentEquation) -> (Vec<Vec<i64>>, Vec<i64>) {
    let m = eq.alphabet.len();
    let d = eq.distinct_variables().len();
    let mut columns = vec![vec![0i64; m]; d];
    for (p, &s) in eq.variable_slots().iter().enumerate() {
        for (c, e) in columns[s].iter_mut().zip(eq.cycles[p].exponent_sums(m)) {
            *c += e;
        }
    }
    let mut b = vec![0i64; m];
    for h in &eq.constants {
        for (bi, e) in b.iter_mut().zip(h.exponent_sums(m)) {
            *bi -= e;
        }
    }
    (columns, b)
}

/// `t = n (m a)^{2m+1}` with `n` variables, `m` rows and `a` the largest
/// absolute entry of `(A | b)`.
pub fn papadimitriou_bound(columns: &[Vec<i64>], b: &[i64]) -> BigUint {
    let n = columns.len();
    let m = b.len();
    let a = columns.iter().flatten().chain(b).map(|v| v.unsigned_abs()).max().unwrap_or(0);
    BigUint::from(n) * (BigUint::from(m as u64) * BigUint::from(a)).pow(2 * m as u32 + 1)
}

fn smallest(sols: &[Vec<i64>]) -> Option<Vec<i64>> {
    sols.iter().min_by_key(|x| (semilinear::norm_1(x), (*x).clone())).cloned()
}

/// Exact decision in the abelianization. `Ok(None)` when the search cap
/// was hit.
fn abelian_decision(eq: &ExponentEquation, cfg: &SolveConfig) -> Result<Option<(Option<Vec<u64>>, BigUint)>> {
    let (columns, b) = abelianize(eq);
    let t = papadimitriou_bound(&columns, &b);
    let d = columns.len();
    if b.iter().all(|&v| v == 0) {
        return Ok(Some((Some(vec![0; d]), t)));
    }
    match semilinear::minimal_solutions_system(&columns, &b, cfg.node_cap.saturating_mul(10)) {
        Ok(sols) => {
            let x = smallest(&sols).map(|x| x.into_iter().map(|v| v as u64).collect());
            Ok(Some((x, t)))
        }
        Err(Error::ResourceExhausted(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn solve_abelian(eq: &ExponentEquation, cfg: &SolveConfig, full: bool) -> Result<SolveOutcome> {
    match abelian_decision(eq, cfg)? {
        Some((Some(x), t)) => {
            let big = x.iter().copied().max().unwrap_or(0);
            if BigUint::from(big) > t {
                return Err(Error::BoundViolation(format!("solution entry {big} exceeds {t}")));
            }
            if !eq.is_solution(&x) {
                return Err(Error::BoundViolation("abelian witness does not verify".into()));
            }
            Ok(SolveOutcome::solvable(eq, &x, Some(t), big))
        }
        Some((None, t)) => {
            let cert = Certificate::Abelianization { papadimitriou: t.to_string() };
            Ok(SolveOutcome::unsolvable(cert, Some(t), 0))
        }
        None if full => {
            let (x, done) = deepen(eq, cfg.ceiling, cfg)?;
            Ok(match x {
                Some(x) => SolveOutcome::solvable(eq, &x, None, done.unwrap_or(0)),
                None => SolveOutcome::unknown(None, done.unwrap_or(0)),
            })
        }
        None => Ok(SolveOutcome::unknown(None, 0)),
    }
}

fn abelian_certificate(eq: &ExponentEquation, cfg: &SolveConfig) -> Result<Option<Certificate>> {
    Ok(match abelian_decision(eq, cfg)? {
        Some((None, t)) => Some(Certificate::Abelianization { papadimitriou: t.to_string() }),
        _ => None,
    })
}

/// Tries the retractions onto the factors of the root node.
fn projection_certificate(eq: &ExponentEquation, tree: &DecompositionTree, cfg: &SolveConfig) -> Result<Option<Certificate>> {
    let parts: Vec<Vec<Gen>> = match tree {
        DecompositionTree::DirectZ { child, .. } => vec![child.generators()],
        DecompositionTree::FreeProduct(children) => children.iter().map(|c| c.generators()).collect(),
        DecompositionTree::Trivial => Vec::new(),
    };
    for keep in parts {
        if keep.is_empty() {
            continue;
        }
        let sub = restrict(eq, &keep)?;
        let out = solve_knapsack(&sub, cfg, false)?;
        if let (Status::Unsolvable, Some(c)) = (out.status, out.certificate) {
            let kept = keep.iter().map(|&g| eq.alphabet.name(g).to_string()).collect();
            return Ok(Some(Certificate::Projection { kept, inner: Box::new(c) }));
        }
    }
    Ok(None)
}

fn solve_forest(eq: &ExponentEquation, cfg: &SolveConfig, full: bool) -> Result<SolveOutcome> {
    let tree = decompose(&eq.alphabet)?;
    let tb = tameness_bound(eq, &tree)?;
    let bound = tb.value.clone();
    if !eq.is_knapsack_shape() {
        return solve_repeated(eq, &tree, bound, cfg, full);
    }
    let k = eq.k();
    let limit = bound.to_u64().unwrap_or(u64::MAX);
    let probe_cfg = SolveConfig { node_cap: cfg.probe_node_cap, ..cfg.clone() };
    let (x, done) = deepen(eq, cfg.probe_budget.min(limit), &probe_cfg)?;
    if let Some(x) = x {
        return Ok(SolveOutcome::solvable(eq, &x, Some(bound), done.unwrap_or(0)));
    }
    if let Some(d) = done.filter(|&d| d >= limit) {
        let cert = Certificate::TamenessSweep { bound: bound.to_string(), method: SweepMethod::Search };
        return Ok(SolveOutcome::unsolvable(cert, Some(bound), d));
    }
    let free = eq.alphabet.is_edgeless();
    if free && !free_group_membership_one(&knapsack_loop_automaton(eq), &eq.alphabet)? {
        return Ok(SolveOutcome::unsolvable(Certificate::FreeGroupSaturation, Some(bound), 0));
    }
    let small = bound.to_u64().filter(|&b| b <= cfg.ceiling);
    if let Some(b) = small {
        let states = (k as u128 + 2) * (b as u128 + 1);
        if states <= cfg.automaton_state_limit as u128 {
            let aut = knapsack_to_automaton(eq, b as usize)?;
            let mc = MembershipConfig { node_cap: cfg.node_cap, ..MembershipConfig::default() };
            match membership_one(&aut, &eq.alphabet, &mc) {
                Ok(Some(path)) => {
                    let x = decode_automaton_path(k, b as usize, &path);
                    return Ok(SolveOutcome::solvable(eq, &x, Some(bound), b));
                }
                Ok(None) => {
                    let cert = Certificate::TamenessSweep { bound: bound.to_string(), method: SweepMethod::Automaton };
                    return Ok(SolveOutcome::unsolvable(cert, Some(bound), b));
                }
                Err(Error::ResourceExhausted(_)) => {}
                Err(e) => return Err(e),
            }
        }
        match search_box(eq, &vec![b; k], cfg.node_cap) {
            Ok(Some(x)) => return Ok(SolveOutcome::solvable(eq, &x, Some(bound), b)),
            Ok(None) => {
                let cert = Certificate::TamenessSweep { bound: bound.to_string(), method: SweepMethod::Search };
                return Ok(SolveOutcome::unsolvable(cert, Some(bound), b));
            }
            Err(Error::ResourceExhausted(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if free {
        if !full {
            return Ok(SolveOutcome::unknown(Some(bound), 0));
        }
        let (x, done) = deepen(eq, limit, cfg)?;
        return Ok(match x {
            Some(x) => SolveOutcome::solvable(eq, &x, Some(bound), done.unwrap_or(0)),
            None => SolveOutcome::unknown(Some(bound), done.unwrap_or(0)),
        });
    }
    if let Some(c) = abelian_certificate(eq, cfg)? {
        return Ok(SolveOutcome::unsolvable(c, Some(bound), 0));
    }
    if let Some(c) = projection_certificate(eq, &tree, cfg)? {
        return Ok(SolveOutcome::unsolvable(c, Some(bound), 0));
    }
    if !full {
        return Ok(SolveOutcome::unknown(Some(bound), 0));
    }
    let (x, done) = deepen(eq, limit.min(cfg.ceiling), cfg)?;
    Ok(match x {
        Some(x) => SolveOutcome::solvable(eq, &x, Some(bound), done.unwrap_or(0)),
        None => SolveOutcome::unknown(Some(bound), done.unwrap_or(0)),
    })
}

/// Repeated variables: the tameness bound does not apply directly, so only
/// the relaxation and the abelianization can certify unsolvability.
fn solve_repeated(
    eq: &ExponentEquation,
    _tree: &DecompositionTree,
    bound: BigUint,
    cfg: &SolveConfig,
    full: bool,
) -> Result<SolveOutcome> {
    let relaxed = solve_knapsack(&eq.relaxed(), cfg, false)?;
    if let (Status::Unsolvable, Some(c)) = (relaxed.status, relaxed.certificate) {
        return Ok(SolveOutcome::unsolvable(Certificate::Relaxation { inner: Box::new(c) }, None, 0));
    }
    if let Some(c) = abelian_certificate(eq, cfg)? {
        return Ok(SolveOutcome::unsolvable(c, None, 0));
    }
    let _ = bound;
    if !full {
        return Ok(SolveOutcome::unknown(None, 0));
    }
    let (x, done) = deepen(eq, cfg.ceiling, cfg)?;
    Ok(match x {
        Some(x) => SolveOutcome::solvable(eq, &x, None, done.unwrap_or(0)),
        None => SolveOutcome::unknown(None, done.unwrap_or(0)),
    })
}

/// Exhaustive search over `{0,1}` for every distinct variable.
pub fn solve_subset_sum(eq: &ExponentEquation, cfg: &SolveConfig) -> Result<SolveOutcome> {
    eq.validate()?;
    let d = eq.distinct_variables().len();
    let total = 1u128.checked_shl(d as u32).unwrap_or(u128::MAX);
    if total > cfg.subset_cap as u128 {
        return Err(Error::CapExceeded { what: "subset-sum assignments", value: total, cap: cfg.subset_cap as u128 });
    }
    let mut values = vec![0u64; d];
    for mask in 0..total as u64 {
        for (i, v) in values.iter_mut().enumerate() {
            *v = (mask >> (d - 1 - i)) & 1;
        }
        if eq.is_solution(&values) {
            return Ok(SolveOutcome::solvable(eq, &values, Some(BigUint::one()), 1));
        }
    }
    Ok(SolveOutcome::unsolvable(Certificate::SubsetSumExhaustive, Some(BigUint::one()), 1))
}

/// Rewrites every `g^x` as `g^x (g⁻¹)^y` with a fresh `y`.
pub fn integer_rewrite(eq: &ExponentEquation) -> ExponentEquation {
    let names: HashSet<&String> = eq.variables.iter().collect();
    let fresh = |v: &str| {
        let mut s = format!("{v}_neg");
        while names.contains(&s) {
            s.push('_');
        }
        s
    };
    let mut constants = vec![eq.constants[0].clone()];
    let mut cycles = Vec::new();
    let mut variables = Vec::new();
    for i in 0..eq.k() {
        cycles.push(eq.cycles[i].clone());
        variables.push(eq.variables[i].clone());
        constants.push(GroupWord::new());
        cycles.push(eq.cycles[i].inverse());
        variables.push(fresh(&eq.variables[i]));
        constants.push(eq.constants[i + 1].clone());
    }
    ExponentEquation { alphabet: eq.alphabet.clone(), constants, cycles, variables, mode: Mode::Knapsack }
}

/// Solves over `Z` through [`integer_rewrite`].
pub fn solve_integer_valued(eq: &ExponentEquation, cfg: &SolveConfig) -> Result<SolveOutcome> {
    eq.validate()?;
    let rw = integer_rewrite(eq);
    let mut out = solve_knapsack(&rw, cfg, true)?;
    if let Some(a) = out.assignment.take() {
        let mut mapped = BTreeMap::new();
        for (i, v) in eq.variables.iter().enumerate() {
            let neg = &rw.variables[2 * i + 1];
            mapped.insert(v.clone(), a[v] - a[neg]);
        }
        out.assignment = Some(mapped);
    }
    Ok(out)
}

/// Checks an integer assignment by substituting inverse powers.
pub fn verify_integer_assignment(eq: &ExponentEquation, assignment: &BTreeMap<String, i64>) -> bool {
    let mut w = eq.constants[0].clone();
    for i in 0..eq.k() {
        let Some(&x) = assignment.get(&eq.variables[i]) else { return false };
        let g = if x < 0 { eq.cycles[i].inverse() } else { eq.cycles[i].clone() };
        w.extend(&g.pow(x.unsigned_abs() as usize));
        w.extend(&eq.constants[i + 1]);
    }
    is_identity(&w, &eq.alphabet)
}

/// Checks a natural-number assignment given by variable name.
pub fn verify_assignment(eq: &ExponentEquation, assignment: &BTreeMap<String, i64>) -> bool {
    let mut values = Vec::new();
    for v in eq.distinct_variables() {
        match assignment.get(&v) {
            Some(&x) if x >= 0 => values.push(x as u64),
            _ => return false,
        }
    }
    eq.is_solution(&values)
}

/// `uᵀx = b` from the exponent sums of generator `gen`.
pub(crate) fn hyperplane_of(eq: &ExponentEquation, gen: Gen) -> (Vec<i64>, i64) {
    let m = eq.alphabet.len();
    let u = eq.cycles.iter().map(|g| g.exponent_sums(m)[gen]).collect();
    let b = -eq.constants.iter().map(|h| h.exponent_sums(m)[gen]).sum::<i64>();
    (u, b)
}
