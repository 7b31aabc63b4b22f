//! Hardness constructions as generators: 3-CNF to acyclic loop automata
//! over the trace monoid of P4, loop automata to knapsack over `G(P4)`, and
//! acyclic automata to knapsack over `F2`.

use rand::Rng;
use serde::Serialize;

use crate::alphabet::IndependenceAlphabet;
use crate::automata::{check_acyclic, check_acyclic_loop, AcyclicityEvidence, WordAutomaton};
use crate::error::{Error, Result};
use crate::group::{GroupWord, Letter};
use crate::knapsack::ExponentEquation;
use crate::trace::MonoidWord;

/// `[2, 3, 5, …]`, the first `n` primes.
pub fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// The path `a — b — c — d`.
pub fn p4_alphabet() -> IndependenceAlphabet {
    IndependenceAlphabet::new(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")])
}

pub fn f2_alphabet() -> IndependenceAlphabet {
    IndependenceAlphabet::free(&["a", "b"])
}

/// CNF over variables `1..=vars`; literals are signed variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    pub vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        for c in &clauses {
            if c.is_empty() {
                return Err(Error::InvalidInstance("empty clause".into()));
            }
            if let Some(&l) = c.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > vars) {
                return Err(Error::InvalidInstance(format!("literal {l} outside 1..={vars}")));
            }
        }
        Ok(CnfFormula { vars, clauses })
    }

    /// Reads the DIMACS format: comment lines `c …`, a header `p cnf V C` and
    /// zero-terminated clauses.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(Error::Parse(format!("bad header `{line}`")));
                }
                let v = parts[2].parse().map_err(|_| Error::Parse("bad variable count".into()))?;
                let c = parts[3].parse().map_err(|_| Error::Parse("bad clause count".into()))?;
                header = Some((v, c));
                continue;
            }
            if header.is_none() {
                return Err(Error::Parse("clause before header".into()));
            }
            for tok in line.split_whitespace() {
                let l: i64 = tok.parse().map_err(|_| Error::Parse(format!("bad literal `{tok}`")))?;
                if l == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(l);
                }
            }
        }
        if !current.is_empty() {
            return Err(Error::Parse("last clause is not terminated by 0".into()));
        }
        let (vars, count) = header.ok_or_else(|| Error::Parse("missing header".into()))?;
        if count != clauses.len() {
            return Err(Error::Parse(format!("header announces {count} clauses, found {}", clauses.len())));
        }
        CnfFormula::new(vars, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                s.push_str(&format!("{l} "));
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn is_satisfied_by(&self, beta: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| beta[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// A satisfying valuation by exhaustive search.
    pub fn satisfying_valuation(&self) -> Option<Vec<bool>> {
        (0u64..1 << self.vars)
            .map(|m| (0..self.vars).map(|i| m >> i & 1 == 1).collect::<Vec<_>>())
            .find(|b| self.is_satisfied_by(b))
    }
}

/// Least `N` with `N ≡ 0 mod pᵢ` iff `β(xᵢ)`.
pub fn encode_valuation(beta: &[bool]) -> u64 {
    let primes = first_primes(beta.len());
    (0..)
        .find(|&n: &u64| primes.iter().zip(beta).all(|(&p, &b)| (n % p == 0) == b))
        .unwrap()
}

fn word(alpha: &IndependenceAlphabet, names: &[&str]) -> GroupWord {
    names.iter().map(|n| Letter::pos(alpha.lookup(n).unwrap())).collect()
}

fn bc_power(alpha: &IndependenceAlphabet, n: u64) -> GroupWord {
    word(alpha, &["b", "c"]).pow(n as usize)
}

/// The two automata of the 3-CNF reduction, with a note per transition.
#[derive(Clone, Debug)]
pub struct SatAutomata {
    pub a1: WordAutomaton,
    pub a2: WordAutomaton,
    pub a1_provenance: Vec<String>,
    pub a2_provenance: Vec<String>,
    pub primes: Vec<u64>,
}

/// `A₁` accepts `∏ᵢ {a (bc)^{Nᵢ} d : Nᵢ satisfies clause i}` and `A₂`
/// accepts `b* (ad (bc)*)^{m−1} ad c*`.
pub fn sat_to_p4_automata(phi: &CnfFormula) -> SatAutomata {
    let alpha = p4_alphabet();
    let primes = first_primes(phi.vars);
    let m = phi.clauses.len();
    let mut a1 = WordAutomaton::new(m + 1, 0, vec![m]);
    let mut prov1 = Vec::new();
    let a = word(&alpha, &["a"]);
    let d = word(&alpha, &["d"]);
    for (i, clause) in phi.clauses.iter().enumerate() {
        let mut lits = clause.clone();
        lits.sort_unstable();
        lits.dedup();
        for &l in &lits {
            let v = l.unsigned_abs() as usize;
            let p = primes[v - 1];
            let offsets: Vec<u64> = if l > 0 { vec![0] } else { (1..p).collect() };
            for r in offsets {
                let u = a1.add_state();
                let tag = format!("clause {} literal {l} offset {r}", i + 1);
                a1.add(i, u, a.concat(&bc_power(&alpha, r)));
                prov1.push(format!("{tag}: enter"));
                a1.add(u, u, bc_power(&alpha, p));
                prov1.push(format!("{tag}: loop (bc)^{p}"));
                a1.add(u, i + 1, d.clone());
                prov1.push(format!("{tag}: leave"));
            }
        }
    }
    let mut a2 = WordAutomaton::new(m + 1, 0, vec![m]);
    let mut prov2 = Vec::new();
    let ad = word(&alpha, &["a", "d"]);
    for i in 0..=m {
        let label = if i == 0 {
            word(&alpha, &["b"])
        } else if i == m {
            word(&alpha, &["c"])
        } else {
            word(&alpha, &["b", "c"])
        };
        if m > 0 {
            a2.add(i, i, label);
            prov2.push(format!("block {i}: loop"));
        }
        if i < m {
            a2.add(i, i + 1, ad.clone());
            prov2.push(format!("block {i}: ad"));
        }
    }
    SatAutomata { a1, a2, a1_provenance: prov1, a2_provenance: prov2, primes }
}

/// The monoid words `(a (bc)^N d)^m` and `b^N (ad (bc)^N)^{m−1} ad c^N`.
pub fn sat_trace_identity(n: usize, m: usize) -> (MonoidWord, MonoidWord) {
    let (a, b, c, d) = (0, 1, 2, 3);
    let mut left = Vec::new();
    for _ in 0..m {
        left.push(a);
        for _ in 0..n {
            left.extend([b, c]);
        }
        left.push(d);
    }
    let mut right = vec![b; n];
    for _ in 1..m {
        right.extend([a, d]);
        for _ in 0..n {
            right.extend([b, c]);
        }
    }
    if m > 0 {
        right.extend([a, d]);
        right.extend(std::iter::repeat(c).take(n));
    }
    (left, right)
}

fn single_final(a: &WordAutomaton) -> Result<usize> {
    match a.finals.as_slice() {
        [f] => Ok(*f),
        _ => Err(Error::Precondition("automaton needs exactly one final state".into())),
    }
}

/// An automaton for `L(A₁) L(A₂)⁻¹`: `A₂` with inverted labels and reversed
/// transitions, appended to `A₁` by an ε-transition.
pub fn intersection_to_group_membership(a1: &WordAutomaton, a2: &WordAutomaton) -> Result<WordAutomaton> {
    a1.validate()?;
    a2.validate()?;
    let f1 = single_final(a1)?;
    let f2 = single_final(a2)?;
    let off = a1.states;
    let mut out = WordAutomaton::new(a1.states + a2.states, a1.initial, vec![a2.initial + off]);
    for t in &a1.transitions {
        out.add(t.from, t.to, t.label.clone());
    }
    out.add(f1, f2 + off, GroupWord::new());
    for t in &a2.transitions {
        out.add(t.to + off, t.from + off, t.label.inverse());
    }
    Ok(out)
}

/// A generated knapsack instance with one note per cycle and per-variable
/// exponent bounds within which a witness exists whenever one exists at all.
#[derive(Clone, Debug)]
pub struct GadgetInstance {
    pub equation: ExponentEquation,
    pub provenance: Vec<String>,
    pub bounds: Vec<u64>,
    pub budget: u64,
}

/// `φ(x) = x x` letterwise.
pub fn double(w: &GroupWord) -> GroupWord {
    w.letters().iter().flat_map(|&l| [l, l]).collect()
}

/// `q̃ = (ada)^q d (ada)^{−q}` over `G(P4)`.
pub fn state_marker_p4(q: usize) -> GroupWord {
    let alpha = p4_alphabet();
    let ada = word(&alpha, &["a", "d", "a"]);
    let mut w = ada.pow(q);
    w.extend(&word(&alpha, &["d"]));
    w.extend(&ada.pow(q).inverse());
    w
}

/// Knapsack over `G(P4)` with cycles `p̃ φ(w) q̃⁻¹` and target `q̃₀ q̃_f⁻¹`.
/// Transitions are ordered by the topological rank of their source, loops
/// first. Loops get the exponent bound `loop_budget`, other transitions 1.
pub fn loop_automaton_to_knapsack_p4(a: &WordAutomaton, loop_budget: u64) -> Result<GadgetInstance> {
    let order = check_acyclic_loop(a)?;
    let alpha = p4_alphabet();
    if a.transitions.iter().any(|t| t.label.letters().iter().any(|l| l.gen >= alpha.len())) {
        return Err(Error::InvalidAutomaton("labels must use the generators a, b, c, d".into()));
    }
    let f = single_final(a)?;
    let mut rank = vec![0usize; a.states];
    for (r, &s) in order.iter().enumerate() {
        rank[s] = r + 1;
    }
    let mut idx: Vec<usize> = (0..a.transitions.len()).collect();
    idx.sort_by_key(|&i| {
        let t = &a.transitions[i];
        (rank[t.from], t.from != t.to, i)
    });
    let mut cycles = Vec::new();
    let mut provenance = Vec::new();
    let mut bounds = Vec::new();
    for &i in &idx {
        let t = &a.transitions[i];
        let mut w = state_marker_p4(rank[t.from]);
        w.extend(&double(&t.label));
        w.extend(&state_marker_p4(rank[t.to]).inverse());
        cycles.push(w);
        provenance.push(format!("transition {i}: {} -> {}", rank[t.from], rank[t.to]));
        bounds.push(if t.from == t.to { loop_budget } else { 1 });
    }
    let target = state_marker_p4(rank[a.initial]).concat(&state_marker_p4(rank[f]).inverse());
    let equation = ExponentEquation::knapsack(alpha, cycles, &target);
    Ok(GadgetInstance { equation, provenance, bounds, budget: loop_budget })
}

/// The full 3-CNF chain, with loop budget `∏pᵢ + max pᵢ`.
#[derive(Clone, Debug)]
pub struct SatGadget {
    pub automata: SatAutomata,
    pub combined: WordAutomaton,
    pub instance: GadgetInstance,
}

pub fn sat_to_p4_knapsack(phi: &CnfFormula) -> Result<SatGadget> {
    let automata = sat_to_p4_automata(phi);
    let combined = intersection_to_group_membership(&automata.a1, &automata.a2)?;
    let budget = automata.primes.iter().product::<u64>() + automata.primes.iter().copied().max().unwrap_or(0);
    let instance = loop_automaton_to_knapsack_p4(&combined, budget)?;
    Ok(SatGadget { automata, combined, instance })
}

/// A witness for a satisfiable formula: exponents of the path through the
/// combined automaton that spells `(a (bc)^N d)^m` against its `A₂` copy.
pub fn sat_witness(g: &SatGadget, phi: &CnfFormula) -> Option<Vec<u64>> {
    let beta = phi.satisfying_valuation()?;
    let n = encode_valuation(&beta);
    let primes = &g.automata.primes;
    let m = phi.clauses.len();
    let a1 = &g.automata.a1;
    let mut count = vec![0u64; g.combined.transitions.len()];
    // A₁: per clause pick a literal made true by β and its offset branch.
    for (i, clause) in phi.clauses.iter().enumerate() {
        let mut lits = clause.clone();
        lits.sort_unstable();
        lits.dedup();
        let l = *lits.iter().find(|&&l| beta[l.unsigned_abs() as usize - 1] == (l > 0))?;
        let p = primes[l.unsigned_abs() as usize - 1];
        let r = n % p;
        let tag = format!("clause {} literal {l} offset {r}", i + 1);
        for (t, note) in g.automata.a1_provenance.iter().enumerate() {
            if note.starts_with(&format!("{tag}:")) {
                let is_loop = a1.transitions[t].from == a1.transitions[t].to;
                count[t] = if is_loop { (n - r) / p } else { 1 };
            }
        }
    }
    let eps = a1.transitions.len();
    count[eps] = 1;
    for (t, tr) in g.automata.a2.transitions.iter().enumerate() {
        count[eps + 1 + t] = if tr.from == tr.to { n } else { 1 };
    }
    if m == 0 {
        return None;
    }
    // Reorder to the knapsack positions.
    let order: Vec<usize> = g
        .instance
        .provenance
        .iter()
        .map(|p| p.split(':').next().unwrap().trim_start_matches("transition ").parse().unwrap())
        .collect();
    Some(order.into_iter().map(|t| count[t]).collect())
}

/// `αᵢ = aⁱ b a⁻ⁱ` over `F2`.
pub fn alpha_word(i: usize) -> GroupWord {
    let f2 = f2_alphabet();
    let a = word(&f2, &["a"]);
    let mut w = a.pow(i);
    w.extend(&word(&f2, &["b"]));
    w.extend(&a.pow(i).inverse());
    w
}

/// Knapsack over `F2` with cycles `α_p φ(w) α_q⁻¹`, `φ(a) = α_{n+1}`,
/// `φ(b) = α_{n+2}` and target `α₁ α_n⁻¹`. States are numbered with the
/// initial state first and the final state last.
pub fn acyclic_automaton_to_knapsack_f2(a: &WordAutomaton) -> Result<GadgetInstance> {
    a.validate()?;
    let order = match check_acyclic(a) {
        AcyclicityEvidence::Order(o) => o,
        AcyclicityEvidence::Cycle(c) => return Err(Error::Cyclic(c)),
    };
    if a.transitions.iter().any(|t| t.label.letters().iter().any(|l| l.gen >= 2)) {
        return Err(Error::InvalidAutomaton("labels must use the generators a, b".into()));
    }
    let f = single_final(a)?;
    let n = a.states;
    let mut number = vec![0usize; n];
    let mut next = 2;
    for &s in &order {
        if s == a.initial {
            number[s] = 1;
        } else if s == f {
            number[s] = n;
        } else {
            number[s] = next;
            next += 1;
        }
    }
    let mut rank = vec![0usize; n];
    for (r, &s) in order.iter().enumerate() {
        rank[s] = r;
    }
    let mut idx: Vec<usize> = (0..a.transitions.len()).collect();
    idx.sort_by_key(|&i| (rank[a.transitions[i].from], i));
    let phi = |w: &GroupWord| -> GroupWord {
        let mut out = GroupWord::new();
        for l in w.letters() {
            let img = alpha_word(n + 1 + l.gen);
            out.extend(&if l.inv { img.inverse() } else { img });
        }
        out
    };
    let mut cycles = Vec::new();
    let mut provenance = Vec::new();
    for &i in &idx {
        let t = &a.transitions[i];
        let mut w = alpha_word(number[t.from]);
        w.extend(&phi(&t.label));
        w.extend(&alpha_word(number[t.to]).inverse());
        cycles.push(w);
        provenance.push(format!("transition {i}: {} -> {}", number[t.from], number[t.to]));
    }
    let target = alpha_word(1).concat(&alpha_word(number[f]).inverse());
    let k = cycles.len();
    let equation = ExponentEquation::knapsack(f2_alphabet(), cycles, &target);
    Ok(GadgetInstance { equation, provenance, bounds: vec![1; k], budget: 1 })
}

/// Random acyclic automaton over `F2` with initial state 0, final state
/// `states − 1` and forward transitions only.
pub fn random_acyclic_automaton<R: Rng>(rng: &mut R, states: usize, transitions: usize, max_label: usize) -> WordAutomaton {
    let states = states.max(2);
    let mut a = WordAutomaton::new(states, 0, vec![states - 1]);
    for _ in 0..transitions {
        let from = rng.gen_range(0..states - 1);
        let to = rng.gen_range(from + 1..states);
        let len = rng.gen_range(0..=max_label);
        let label: GroupWord = (0..len).map(|_| Letter { gen: rng.gen_range(0..2), inv: rng.gen_bool(0.5) }).collect();
        a.add(from, to, label);
    }
    a
}
