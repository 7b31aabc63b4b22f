//! Finite automata whose transitions carry group words, and the question
//! whether such an automaton accepts a word equal to 1.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::alphabet::IndependenceAlphabet;
use crate::error::{Error, Result};
use crate::group::{is_identity, reduce_product, GroupWord, Letter};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub label: GroupWord,
}

/// States are `0..states`. Self-loops are transitions with `from == to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordAutomaton {
    pub states: usize,
    pub initial: usize,
    pub finals: Vec<usize>,
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AcyclicityEvidence {
    Order(Vec<usize>),
    Cycle(Vec<usize>),
}

impl WordAutomaton {
    pub fn new(states: usize, initial: usize, finals: Vec<usize>) -> Self {
        WordAutomaton { states, initial, finals, transitions: Vec::new() }
    }

    pub fn add(&mut self, from: usize, to: usize, label: GroupWord) -> usize {
        self.transitions.push(Transition { from, to, label });
        self.transitions.len() - 1
    }

    pub fn add_state(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: usize| s >= self.states;
        if bad(self.initial) || self.finals.iter().any(|&f| bad(f)) {
            return Err(Error::InvalidAutomaton("state index out of range".into()));
        }
        if self.transitions.iter().any(|t| bad(t.from) || bad(t.to)) {
            return Err(Error::InvalidAutomaton("transition endpoint out of range".into()));
        }
        Ok(())
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals.contains(&s)
    }

    pub fn loops(&self) -> impl Iterator<Item = (usize, &Transition)> {
        self.transitions.iter().enumerate().filter(|(_, t)| t.from == t.to)
    }

    /// Concatenated label of a path given as transition indices.
    pub fn path_label(&self, path: &[usize]) -> GroupWord {
        let mut w = GroupWord::new();
        for &t in path {
            w.extend(&self.transitions[t].label);
        }
        w
    }

    /// Checks that `path` runs from the initial state to a final one.
    pub fn is_accepting_path(&self, path: &[usize]) -> bool {
        let mut s = self.initial;
        for &t in path {
            match self.transitions.get(t) {
                Some(tr) if tr.from == s => s = tr.to,
                _ => return false,
            }
        }
        self.is_final(s)
    }
}

fn topo_order(a: &WordAutomaton, skip_loops: bool, preferred: Option<&[usize]>) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; a.states];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); a.states];
    for t in &a.transitions {
        if skip_loops && t.from == t.to {
            continue;
        }
        indeg[t.to] += 1;
        succ[t.from].push(t.to);
    }
    let prio: Vec<usize> = match preferred {
        Some(p) => {
            let mut v = vec![usize::MAX; a.states];
            for (i, &s) in p.iter().enumerate() {
                v[s] = i;
            }
            v
        }
        None => (0..a.states).collect(),
    };
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..a.states).filter(|&s| indeg[s] == 0).map(|s| Reverse((prio[s], s))).collect();
    let mut order = Vec::with_capacity(a.states);
    while let Some(Reverse((_, s))) = heap.pop() {
        order.push(s);
        for &t in &succ[s] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                heap.push(Reverse((prio[t], t)));
            }
        }
    }
    (order.len() == a.states).then_some(order)
}

fn find_cycle(a: &WordAutomaton, skip_loops: bool) -> Vec<usize> {
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); a.states];
    for t in &a.transitions {
        if !(skip_loops && t.from == t.to) {
            succ[t.from].push(t.to);
        }
    }
    // 0 = unseen, 1 = on stack, 2 = done
    let mut color = vec![0u8; a.states];
    let mut stack: Vec<usize> = Vec::new();
    fn dfs(v: usize, succ: &[Vec<usize>], color: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        color[v] = 1;
        stack.push(v);
        for &w in &succ[v] {
            if color[w] == 1 {
                let pos = stack.iter().position(|&x| x == w).unwrap();
                return Some(stack[pos..].to_vec());
            }
            if color[w] == 0 {
                if let Some(c) = dfs(w, succ, color, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        color[v] = 2;
        None
    }
    for s in 0..a.states {
        if color[s] == 0 {
            if let Some(c) = dfs(s, &succ, &mut color, &mut stack) {
                return c;
            }
        }
    }
    Vec::new()
}

/// Topological order (least state first among the available ones), or a
/// cycle. A self-loop counts as a cycle.
pub fn check_acyclic(a: &WordAutomaton) -> AcyclicityEvidence {
    match topo_order(a, false, None) {
        Some(order) => AcyclicityEvidence::Order(order),
        None => AcyclicityEvidence::Cycle(find_cycle(a, false)),
    }
}

/// Accepts automata that become acyclic once self-loops are removed and that
/// carry at most one loop label per state.
pub fn check_acyclic_loop(a: &WordAutomaton) -> Result<Vec<usize>> {
    a.validate()?;
    let mut loop_label: Vec<Option<&GroupWord>> = vec![None; a.states];
    for (_, t) in a.loops() {
        match loop_label[t.from] {
            Some(l) if *l != t.label => return Err(Error::MultipleLoops { state: t.from }),
            _ => loop_label[t.from] = Some(&t.label),
        }
    }
    topo_order(a, true, None).ok_or_else(|| Error::Cyclic(find_cycle(a, true)))
}

#[derive(Clone, Debug)]
pub struct MembershipConfig {
    /// Geodesic-length and exponent-sum pruning.
    pub prune: bool,
    /// Maximum number of `(state, element)` pairs kept.
    pub node_cap: usize,
    /// Preferred topological order; must be consistent with the transitions.
    pub order: Option<Vec<usize>>,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        MembershipConfig { prune: true, node_cap: 2_000_000, order: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MembershipStats {
    pub nodes: usize,
    pub pruned: usize,
}

/// Per-state information about the suffixes leading to a final state.
struct SuffixBounds {
    reachable: Vec<bool>,
    max_len: Vec<usize>,
    /// Per state and generator, the range of exponent sums over suffixes.
    sums: Vec<Vec<(i64, i64)>>,
}

fn suffix_bounds(a: &WordAutomaton, order: &[usize], num_gens: usize) -> SuffixBounds {
    let mut reachable = vec![false; a.states];
    let mut max_len = vec![0usize; a.states];
    let mut sums = vec![vec![(i64::MAX, i64::MIN); num_gens]; a.states];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); a.states];
    for (i, t) in a.transitions.iter().enumerate() {
        out[t.from].push(i);
    }
    for &s in order.iter().rev() {
        if a.is_final(s) {
            reachable[s] = true;
            for g in 0..num_gens {
                sums[s][g] = (sums[s][g].0.min(0), sums[s][g].1.max(0));
            }
        }
        for &ti in &out[s] {
            let t = &a.transitions[ti];
            if !reachable[t.to] {
                continue;
            }
            let es = t.label.exponent_sums(num_gens);
            reachable[s] = true;
            max_len[s] = max_len[s].max(t.label.len() + max_len[t.to]);
            for g in 0..num_gens {
                let (lo, hi) = sums[t.to][g];
                sums[s][g] = (sums[s][g].0.min(lo + es[g]), sums[s][g].1.max(hi + es[g]));
            }
        }
    }
    SuffixBounds { reachable, max_len, sums }
}

/// Searches an accepting path whose label equals 1 in `G(A, I)`; returns the
/// transition indices of the first one found.
///
/// States are processed in topological order, keeping one representative
/// path per canonical group element at each state.
pub fn membership_one(
    a: &WordAutomaton,
    alpha: &IndependenceAlphabet,
    config: &MembershipConfig,
) -> Result<Option<Vec<usize>>> {
    membership_one_with_stats(a, alpha, config).map(|(w, _)| w)
}

pub fn membership_one_with_stats(
    a: &WordAutomaton,
    alpha: &IndependenceAlphabet,
    config: &MembershipConfig,
) -> Result<(Option<Vec<usize>>, MembershipStats)> {
    a.validate()?;
    let order = topo_order(a, false, config.order.as_deref()).ok_or_else(|| Error::Cyclic(find_cycle(a, false)))?;
    if let Some(p) = &config.order {
        if *p != order {
            return Err(Error::Precondition("requested order is not topological".into()));
        }
    }
    let num_gens = alpha.len();
    let bounds = suffix_bounds(a, &order, num_gens);
    let mut stats = MembershipStats::default();
    if !bounds.reachable[a.initial] {
        return Ok((None, stats));
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); a.states];
    for (i, t) in a.transitions.iter().enumerate() {
        out[t.from].push(i);
    }
    // elements[s][i] = (element, back pointer (state, index, transition))
    let mut elements: Vec<Vec<(GroupWord, Option<(usize, usize, usize)>)>> = vec![Vec::new(); a.states];
    let mut index: Vec<HashMap<GroupWord, usize>> = vec![HashMap::new(); a.states];
    elements[a.initial].push((GroupWord::new(), None));
    index[a.initial].insert(GroupWord::new(), 0);
    stats.nodes = 1;

    let witness = |elements: &Vec<Vec<(GroupWord, Option<(usize, usize, usize)>)>>, mut s: usize, mut i: usize| {
        let mut path = Vec::new();
        while let Some((ps, pi, t)) = elements[s][i].1 {
            path.push(t);
            s = ps;
            i = pi;
        }
        path.reverse();
        path
    };
    if a.is_final(a.initial) {
        return Ok((Some(Vec::new()), stats));
    }
    for &s in &order {
        let mut i = 0;
        while i < elements[s].len() {
            let elem = elements[s][i].0.clone();
            for &ti in &out[s] {
                let t = &a.transitions[ti];
                if !bounds.reachable[t.to] {
                    continue;
                }
                let next = reduce_product(&elem, t.label.letters(), alpha);
                if index[t.to].contains_key(&next) {
                    continue;
                }
                if config.prune && !admissible(&next, &bounds, t.to, num_gens) {
                    stats.pruned += 1;
                    continue;
                }
                let id = elements[t.to].len();
                let done = next.is_empty() && a.is_final(t.to);
                index[t.to].insert(next.clone(), id);
                elements[t.to].push((next, Some((s, i, ti))));
                stats.nodes += 1;
                if done {
                    return Ok((Some(witness(&elements, t.to, id)), stats));
                }
                if stats.nodes > config.node_cap {
                    return Err(Error::ResourceExhausted(format!(
                        "membership search exceeded {} nodes",
                        config.node_cap
                    )));
                }
            }
            i += 1;
        }
        // Elements at a finished state are no longer needed.
        index[s].clear();
    }
    Ok((None, stats))
}

fn admissible(elem: &GroupWord, bounds: &SuffixBounds, s: usize, num_gens: usize) -> bool {
    if elem.len() > bounds.max_len[s] {
        return false;
    }
    let es = elem.exponent_sums(num_gens);
    (0..num_gens).all(|g| {
        let (lo, hi) = bounds.sums[s][g];
        lo <= -es[g] && -es[g] <= hi
    })
}

/// Enumerates every accepting path. Fails when more than `path_cap` paths
/// (or partial paths) are visited.
pub fn membership_one_brute(a: &WordAutomaton, alpha: &IndependenceAlphabet, path_cap: usize) -> Result<bool> {
    Ok(brute_witness(a, alpha, path_cap)?.is_some())
}

pub fn brute_witness(a: &WordAutomaton, alpha: &IndependenceAlphabet, path_cap: usize) -> Result<Option<Vec<usize>>> {
    a.validate()?;
    if let AcyclicityEvidence::Cycle(c) = check_acyclic(a) {
        return Err(Error::Cyclic(c));
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); a.states];
    for (i, t) in a.transitions.iter().enumerate() {
        out[t.from].push(i);
    }
    let mut visited = 0usize;
    let mut path = Vec::new();
    fn rec(
        a: &WordAutomaton,
        alpha: &IndependenceAlphabet,
        out: &[Vec<usize>],
        s: usize,
        word: &mut Vec<Letter>,
        path: &mut Vec<usize>,
        visited: &mut usize,
        cap: usize,
    ) -> Result<bool> {
        *visited += 1;
        if *visited > cap {
            return Err(Error::CapExceeded { what: "paths", value: *visited as u128, cap: cap as u128 });
        }
        if a.is_final(s) && is_identity(&GroupWord(word.clone()), alpha) {
            return Ok(true);
        }
        for &ti in &out[s] {
            let t = &a.transitions[ti];
            let len = word.len();
            word.extend_from_slice(t.label.letters());
            path.push(ti);
            if rec(a, alpha, out, t.to, word, path, visited, cap)? {
                return Ok(true);
            }
            path.pop();
            word.truncate(len);
        }
        Ok(false)
    }
    let found = rec(a, alpha, &out, a.initial, &mut Vec::new(), &mut path, &mut visited, path_cap)?;
    Ok(found.then_some(path))
}

/// Replaces every loop by a chain allowing it at most `budget` times.
/// The result is acyclic when the input is an acyclic loop automaton.
pub fn unroll_loops(a: &WordAutomaton, budget: usize) -> Result<WordAutomaton> {
    check_acyclic_loop(a)?;
    let mut loop_label: Vec<Option<GroupWord>> = vec![None; a.states];
    for (_, t) in a.loops() {
        loop_label[t.from] = Some(t.label.clone());
    }
    let mut out = WordAutomaton::new(a.states, a.initial, Vec::new());
    // exit[s]: the copy of `s` that carries its outgoing transitions.
    let mut exit: Vec<usize> = (0..a.states).collect();
    for s in 0..a.states {
        if let (Some(label), true) = (&loop_label[s], budget > 0) {
            let first = out.states;
            let last = first + budget - 1;
            let mut prev = s;
            for _ in 0..budget {
                let c = out.add_state();
                out.add(prev, c, label.clone());
                prev = c;
            }
            // ε-edges from every earlier copy to the exit copy.
            for c in std::iter::once(s).chain(first..last) {
                out.add(c, last, GroupWord::new());
            }
            exit[s] = last;
        }
    }
    for t in &a.transitions {
        if t.from != t.to {
            out.add(exit[t.from], t.to, t.label.clone());
        }
    }
    out.finals = a.finals.iter().map(|&f| exit[f]).collect();
    Ok(out)
}

/// Decides whether an arbitrary automaton (loops and cycles allowed) over a
/// free group accepts a word equal to 1, by saturating with ε-moves for
/// every `x x⁻¹` factor.
pub fn free_group_membership_one(a: &WordAutomaton, alpha: &IndependenceAlphabet) -> Result<bool> {
    a.validate()?;
    if !alpha.is_edgeless() {
        return Err(Error::Precondition("saturation requires a free group".into()));
    }
    // Letter-level NFA.
    let mut n = a.states;
    let mut letter_edges: Vec<(usize, Letter, usize)> = Vec::new();
    let mut eps: Vec<(usize, usize)> = Vec::new();
    for t in &a.transitions {
        let letters = t.label.letters();
        if letters.is_empty() {
            eps.push((t.from, t.to));
            continue;
        }
        let mut prev = t.from;
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() {
                t.to
            } else {
                n += 1;
                n - 1
            };
            letter_edges.push((prev, l, next));
            prev = next;
        }
    }
    let words = (n + 63) / 64;
    let mut reach = vec![vec![0u64; words]; n];
    let set = |m: &mut Vec<Vec<u64>>, p: usize, q: usize| -> bool {
        let (w, b) = (q / 64, 1u64 << (q % 64));
        let fresh = m[p][w] & b == 0;
        m[p][w] |= b;
        fresh
    };
    let get = |m: &Vec<Vec<u64>>, p: usize, q: usize| m[p][q / 64] & (1u64 << (q % 64)) != 0;
    for p in 0..n {
        set(&mut reach, p, p);
    }
    for &(p, q) in &eps {
        set(&mut reach, p, q);
    }
    let close = |reach: &mut Vec<Vec<u64>>| {
        // Transitive closure by repeated relaxation.
        loop {
            let mut changed = false;
            for p in 0..n {
                for q in 0..n {
                    if p != q && get(reach, p, q) {
                        let row = reach[q].clone();
                        for (w, bits) in row.iter().enumerate() {
                            let before = reach[p][w];
                            reach[p][w] |= bits;
                            changed |= reach[p][w] != before;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    };
    close(&mut reach);
    loop {
        let mut added = false;
        for &(p, x, q) in &letter_edges {
            for &(r, y, s) in &letter_edges {
                if y == x.inverse() && get(&reach, q, r) && !get(&reach, p, s) {
                    set(&mut reach, p, s);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
        close(&mut reach);
    }
    Ok(a.finals.iter().any(|&f| get(&reach, a.initial, f)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> IndependenceAlphabet {
        IndependenceAlphabet::free(&["a", "b"])
    }

    fn w(s: &str) -> GroupWord {
        GroupWord::parse_str(&f2(), s).unwrap()
    }

    #[test]
    fn acyclicity() {
        let mut a = WordAutomaton::new(2, 0, vec![1]);
        a.add(0, 1, w("a"));
        assert_eq!(check_acyclic(&a), AcyclicityEvidence::Order(vec![0, 1]));
        let mut l = a.clone();
        l.add(1, 1, w("b"));
        assert_eq!(check_acyclic(&l), AcyclicityEvidence::Cycle(vec![1]));
        assert_eq!(check_acyclic_loop(&l).unwrap(), vec![0, 1]);
        let mut two = l.clone();
        two.add(1, 1, w("a"));
        assert_eq!(check_acyclic_loop(&two), Err(Error::MultipleLoops { state: 1 }));
        let mut back = a.clone();
        back.add(1, 0, w("b"));
        assert!(matches!(check_acyclic(&back), AcyclicityEvidence::Cycle(_)));
        assert!(matches!(check_acyclic_loop(&back), Err(Error::Cyclic(_))));
    }

    #[test]
    fn membership_examples() {
        let g = f2();
        let cfg = MembershipConfig::default();
        let mut a = WordAutomaton::new(2, 0, vec![1]);
        a.add(0, 1, w("a a^-1"));
        assert_eq!(membership_one(&a, &g, &cfg).unwrap(), Some(vec![0]));
        assert!(membership_one_brute(&a, &g, 100).unwrap());
        let mut a = WordAutomaton::new(2, 0, vec![1]);
        a.add(0, 1, w("a"));
        assert_eq!(membership_one(&a, &g, &cfg).unwrap(), None);
        assert!(!membership_one_brute(&a, &g, 100).unwrap());
        let mut d = WordAutomaton::new(3, 0, vec![2]);
        d.add(0, 1, w("a"));
        d.add(0, 1, w("b"));
        d.add(1, 2, w("a^-1"));
        assert_eq!(membership_one(&d, &g, &cfg).unwrap(), Some(vec![0, 2]));
        assert!(membership_one_brute(&d, &g, 100).unwrap());
        let mut e = WordAutomaton::new(3, 0, vec![2]);
        e.add(0, 1, GroupWord::new());
        assert!(!membership_one_brute(&e, &g, 100).unwrap());
        assert_eq!(membership_one(&e, &g, &cfg).unwrap(), None);
    }

    #[test]
    fn unrolling() {
        let g = IndependenceAlphabet::free(&["a", "b", "c"]);
        let mut a = WordAutomaton::new(2, 0, vec![1]);
        a.add(0, 1, GroupWord::parse_str(&g, "a").unwrap());
        a.add(1, 1, GroupWord::parse_str(&g, "b c").unwrap());
        let u = unroll_loops(&a, 2).unwrap();
        assert!(matches!(check_acyclic(&u), AcyclicityEvidence::Order(_)));
        let mut labels: Vec<String> = accepted(&u).into_iter().map(|x| x.display(&g).to_string()).collect();
        labels.sort();
        assert_eq!(labels, vec!["a", "a b c", "a b c b c"]);
        let u0 = unroll_loops(&a, 0).unwrap();
        assert_eq!(accepted(&u0).len(), 1);
    }

    fn accepted(a: &WordAutomaton) -> Vec<GroupWord> {
        let mut out = Vec::new();
        fn rec(a: &WordAutomaton, s: usize, cur: GroupWord, out: &mut Vec<GroupWord>) {
            if a.is_final(s) {
                out.push(cur.clone());
            }
            for t in a.transitions.iter().filter(|t| t.from == s) {
                rec(a, t.to, cur.concat(&t.label), out);
            }
        }
        rec(a, a.initial, GroupWord::new(), &mut out);
        out
    }

    #[test]
    fn saturation() {
        let g = f2();
        let mut a = WordAutomaton::new(3, 0, vec![2]);
        a.add(0, 1, w("a"));
        a.add(1, 1, w("b b b"));
        a.add(1, 2, w("b^-1 b^-1 a^-1"));
        assert!(!free_group_membership_one(&a, &g).unwrap());
        let mut c = a.clone();
        c.transitions[1].label = w("b");
        assert!(free_group_membership_one(&c, &g).unwrap());
    }
}
