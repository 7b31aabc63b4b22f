//! Elements of the graph group `G(A, I)` and its word problem.
//!
//! Two independent procedures decide whether a word is trivial:
//! [`reduce_word`] computes a canonical geodesic for any graph, and
//! [`is_identity_stacked`] runs the recursive stack machine along a
//! decomposition tree, which only exists for transitive forests.

use std::fmt;

use crate::alphabet::{DecompositionTree, Gen, IndependenceAlphabet};
use crate::error::{Error, Result};
use crate::trace::foata_steps;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: Gen,
    pub inv: bool,
}

impl Letter {
    pub const fn pos(gen: Gen) -> Self {
        Letter { gen, inv: false }
    }

    pub const fn neg(gen: Gen) -> Self {
        Letter { gen, inv: true }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }

    pub fn sign(self) -> i64 {
        if self.inv {
            -1
        } else {
            1
        }
    }

    pub fn token(self, alpha: &IndependenceAlphabet) -> String {
        if self.inv {
            format!("{}^-1", alpha.name(self.gen))
        } else {
            alpha.name(self.gen).to_string()
        }
    }

    pub fn parse(alpha: &IndependenceAlphabet, token: &str) -> Result<Self> {
        let token = token.trim();
        let (name, inv) = if let Some(n) = token.strip_suffix("^-1") {
            (n, true)
        } else if let Some(n) = token.strip_suffix("⁻¹") {
            (n, true)
        } else {
            (token, false)
        };
        if name.is_empty() || name.contains(|c: char| c == '^' || c.is_whitespace()) {
            return Err(Error::MalformedLetter(token.to_string()));
        }
        Ok(Letter { gen: alpha.lookup(name)?, inv })
    }
}

/// A word over `A ∪ A⁻¹`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord(pub Vec<Letter>);

impl GroupWord {
    pub fn new() -> Self {
        GroupWord(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        GroupWord(letters)
    }

    /// Parses a list of tokens such as `["a", "b^-1"]`.
    pub fn parse<S: AsRef<str>>(alpha: &IndependenceAlphabet, tokens: &[S]) -> Result<Self> {
        tokens.iter().map(|t| Letter::parse(alpha, t.as_ref())).collect::<Result<Vec<_>>>().map(GroupWord)
    }

    /// Parses whitespace separated tokens, e.g. `"a b^-1 a^-1"`.
    pub fn parse_str(alpha: &IndependenceAlphabet, s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        Self::parse(alpha, &tokens)
    }

    pub fn tokens(&self, alpha: &IndependenceAlphabet) -> Vec<String> {
        self.0.iter().map(|l| l.token(alpha)).collect()
    }

    pub fn display<'a>(&'a self, alpha: &'a IndependenceAlphabet) -> WordDisplay<'a> {
        WordDisplay { word: self, alpha }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        GroupWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &GroupWord) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        GroupWord(v)
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut v = Vec::with_capacity(self.len() * n);
        for _ in 0..n {
            v.extend_from_slice(&self.0);
        }
        GroupWord(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn extend(&mut self, other: &GroupWord) {
        self.0.extend_from_slice(&other.0);
    }

    /// Exponent sum of every generator.
    pub fn exponent_sums(&self, num_gens: usize) -> Vec<i64> {
        let mut v = vec![0; num_gens];
        for l in &self.0 {
            v[l.gen] += l.sign();
        }
        v
    }
}

impl FromIterator<Letter> for GroupWord {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Self {
        GroupWord(iter.into_iter().collect())
    }
}

pub struct WordDisplay<'a> {
    word: &'a GroupWord,
    alpha: &'a IndependenceAlphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        let tokens = self.word.tokens(self.alpha);
        write!(f, "{}", tokens.join(" "))
    }
}

/// Appends `x` to a reduced word, cancelling it against an inverse letter
/// that can be commuted next to it.
fn push_reduced(out: &mut Vec<Letter>, x: Letter, alpha: &IndependenceAlphabet) {
    let mut i = out.len();
    while i > 0 {
        let y = out[i - 1];
        if y.gen == x.gen {
            if y.inv != x.inv {
                out.remove(i - 1);
                return;
            }
            break;
        }
        if !alpha.commute(y.gen, x.gen) {
            break;
        }
        i -= 1;
    }
    out.push(x);
}

fn canonical_order(letters: &[Letter], alpha: &IndependenceAlphabet) -> Vec<Letter> {
    let mut steps = foata_steps(alpha, letters, |l| l.gen);
    let mut out = Vec::with_capacity(letters.len());
    for step in &mut steps {
        step.sort_by_key(|l| (alpha.rank(l.gen), l.inv));
        out.extend_from_slice(step);
    }
    out
}

/// Canonical geodesic representative: empty iff `w = 1`.
pub fn reduce_word(w: &GroupWord, alpha: &IndependenceAlphabet) -> GroupWord {
    let mut out = Vec::with_capacity(w.len());
    for &x in &w.0 {
        push_reduced(&mut out, x, alpha);
    }
    GroupWord(canonical_order(&out, alpha))
}

/// Reduces the product of an already canonical word with `suffix`.
pub fn reduce_product(prefix: &GroupWord, suffix: &[Letter], alpha: &IndependenceAlphabet) -> GroupWord {
    let mut out = prefix.0.clone();
    for &x in suffix {
        push_reduced(&mut out, x, alpha);
    }
    GroupWord(canonical_order(&out, alpha))
}

/// Like [`reduce_product`] but leaves the letters in push order; the result
/// is reduced but not canonical.
pub(crate) fn reduce_product_raw(prefix: &GroupWord, suffix: &[Letter], alpha: &IndependenceAlphabet) -> GroupWord {
    let mut out = prefix.0.clone();
    for &x in suffix {
        push_reduced(&mut out, x, alpha);
    }
    GroupWord(out)
}

pub(crate) fn canonicalize(w: &GroupWord, alpha: &IndependenceAlphabet) -> GroupWord {
    GroupWord(canonical_order(&w.0, alpha))
}

pub fn is_identity(w: &GroupWord, alpha: &IndependenceAlphabet) -> bool {
    let mut out = Vec::with_capacity(w.len());
    for &x in &w.0 {
        push_reduced(&mut out, x, alpha);
    }
    out.is_empty()
}

pub fn words_equal(u: &GroupWord, v: &GroupWord, alpha: &IndependenceAlphabet) -> bool {
    is_identity(&u.concat(&v.inverse()), alpha)
}

// ---------------------------------------------------------------------------
// Stacked machine

#[derive(Clone, Debug)]
enum Node {
    Trivial,
    DirectZ { apex: Gen, child: Box<Node> },
    FreeProduct { factor_of: Vec<usize>, children: Vec<Node> },
}

impl Node {
    fn compile(tree: &DecompositionTree, n: usize) -> Node {
        match tree {
            DecompositionTree::Trivial => Node::Trivial,
            DecompositionTree::DirectZ { apex, child } => {
                Node::DirectZ { apex: *apex, child: Box::new(Node::compile(child, n)) }
            }
            DecompositionTree::FreeProduct(children) => {
                let mut factor_of = vec![usize::MAX; n];
                for (i, c) in children.iter().enumerate() {
                    for g in c.generators() {
                        factor_of[g] = i;
                    }
                }
                Node::FreeProduct {
                    factor_of,
                    children: children.iter().map(|c| Node::compile(c, n)).collect(),
                }
            }
        }
    }

    fn initial(&self) -> StackedMachineState {
        match self {
            Node::Trivial => StackedMachineState::Trivial,
            Node::DirectZ { child, .. } => {
                StackedMachineState::DirectZ { counter: 0, child: Box::new(child.initial()) }
            }
            Node::FreeProduct { .. } => StackedMachineState::FreeProduct { stack: Vec::new(), active: None },
        }
    }
}

/// Configuration of the stack machine, mirroring the decomposition tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StackedMachineState {
    Trivial,
    DirectZ { counter: i64, child: Box<StackedMachineState> },
    /// Suspended `(factor, state)` frames with alternating factors, and the
    /// factor currently being read.
    FreeProduct { stack: Vec<(usize, StackedMachineState)>, active: Option<Box<(usize, StackedMachineState)>> },
}

impl StackedMachineState {
    pub fn is_identity(&self) -> bool {
        match self {
            StackedMachineState::Trivial => true,
            StackedMachineState::DirectZ { counter, child } => *counter == 0 && child.is_identity(),
            StackedMachineState::FreeProduct { stack, active } => {
                stack.is_empty() && active.as_ref().map_or(true, |a| a.1.is_identity())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StackStats {
    pub pushes: usize,
    pub resumes: usize,
    pub max_depth: usize,
}

/// Single left-to-right pass deciding `w = 1` along a decomposition tree.
#[derive(Clone, Debug)]
pub struct StackedMachine {
    root: Node,
    num_gens: usize,
}

impl StackedMachine {
    pub fn new(alpha: &IndependenceAlphabet, tree: &DecompositionTree) -> Result<Self> {
        if !tree.matches(alpha) {
            return Err(Error::TreeMismatch);
        }
        Ok(StackedMachine { root: Node::compile(tree, alpha.len()), num_gens: alpha.len() })
    }

    pub fn initial(&self) -> StackedMachineState {
        self.root.initial()
    }

    pub fn step(&self, state: &mut StackedMachineState, x: Letter, stats: &mut StackStats) {
        debug_assert!(x.gen < self.num_gens);
        step_node(&self.root, state, x, stats, 0);
    }

    pub fn run(&self, w: &GroupWord) -> (bool, StackStats) {
        let mut state = self.initial();
        let mut stats = StackStats::default();
        for &x in &w.0 {
            self.step(&mut state, x, &mut stats);
        }
        (state.is_identity(), stats)
    }

    pub fn is_identity(&self, w: &GroupWord) -> bool {
        self.run(w).0
    }
}

fn step_node(node: &Node, state: &mut StackedMachineState, x: Letter, stats: &mut StackStats, depth: usize) {
    match (node, state) {
        (Node::DirectZ { apex, child }, StackedMachineState::DirectZ { counter, child: cs }) => {
            if x.gen == *apex {
                *counter += x.sign();
            } else {
                step_node(child, cs, x, stats, depth + 1);
            }
        }
        (Node::FreeProduct { factor_of, children }, StackedMachineState::FreeProduct { stack, active }) => {
            let f = factor_of[x.gen];
            let same = matches!(active, Some(a) if a.0 == f);
            if !same {
                // Factor switch: checkpoint the segment read so far.
                match active.take() {
                    Some(a) if !a.1.is_identity() => {
                        stack.push(*a);
                        stats.pushes += 1;
                        stats.max_depth = stats.max_depth.max(stack.len());
                        *active = Some(Box::new((f, children[f].initial())));
                    }
                    _ => {
                        if stack.last().map_or(false, |t| t.0 == f) {
                            let frame = stack.pop().unwrap();
                            stats.resumes += 1;
                            *active = Some(Box::new(frame));
                        } else {
                            *active = Some(Box::new((f, children[f].initial())));
                        }
                    }
                }
            }
            let a = active.as_mut().unwrap();
            step_node(&children[f], &mut a.1, x, stats, depth + 1);
        }
        _ => unreachable!("letter outside the decomposition tree"),
    }
}

pub fn is_identity_stacked(w: &GroupWord, alpha: &IndependenceAlphabet, tree: &DecompositionTree) -> Result<bool> {
    Ok(StackedMachine::new(alpha, tree)?.is_identity(w))
}

// ---------------------------------------------------------------------------
// Free-product splits

/// A splitting of a generator set into two non-adjacent parts `A₀ ⊎ A₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeSplit {
    /// `Some(0)` / `Some(1)` for generators in `A₀` / `A₁`, `None` outside.
    side: Vec<Option<u8>>,
}

impl FreeSplit {
    pub fn new(alpha: &IndependenceAlphabet, a0: &[Gen], a1: &[Gen]) -> Result<Self> {
        let mut side = vec![None; alpha.len()];
        for (s, part) in [(0u8, a0), (1u8, a1)] {
            for &g in part {
                if side[g].is_some() {
                    return Err(Error::InvalidSplit(format!("`{}` on both sides", alpha.name(g))));
                }
                side[g] = Some(s);
            }
        }
        for &x in a0 {
            for &y in a1 {
                if alpha.commute(x, y) {
                    return Err(Error::InvalidSplit(format!(
                        "`{}` and `{}` commute across the split",
                        alpha.name(x),
                        alpha.name(y)
                    )));
                }
            }
        }
        Ok(FreeSplit { side })
    }

    /// First factor versus the remaining factors of a free-product node.
    pub fn from_children(alpha: &IndependenceAlphabet, children: &[DecompositionTree]) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::InvalidSplit("free product needs two factors".into()));
        }
        let a0 = children[0].generators();
        let a1: Vec<Gen> = children[1..].iter().flat_map(|c| c.generators()).collect();
        Self::new(alpha, &a0, &a1)
    }

    pub fn side(&self, g: Gen) -> Option<u8> {
        self.side[g]
    }

    pub fn side_of(&self, l: Letter) -> u8 {
        self.side[l.gen].expect("letter outside the split")
    }

    pub fn covers(&self, w: &GroupWord) -> bool {
        w.0.iter().all(|l| self.side[l.gen].is_some())
    }

    pub fn gens(&self, s: u8) -> Vec<Gen> {
        (0..self.side.len()).filter(|&g| self.side[g] == Some(s)).collect()
    }
}

/// A maximal same-factor segment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub side: u8,
    pub word: GroupWord,
}

pub fn syllables(w: &GroupWord, split: &FreeSplit) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::new();
    for &l in &w.0 {
        let s = split.side_of(l);
        match out.last_mut() {
            Some(last) if last.side == s => last.word.push(l),
            _ => out.push(Syllable { side: s, word: GroupWord(vec![l]) }),
        }
    }
    out
}

/// Number of syllables `‖w‖`.
pub fn syllable_count(w: &GroupWord, split: &FreeSplit) -> usize {
    let mut count = 0;
    let mut prev = None;
    for &l in &w.0 {
        let s = split.side_of(l);
        if prev != Some(s) {
            count += 1;
            prev = Some(s);
        }
    }
    count
}

fn join(sylls: &[Syllable]) -> GroupWord {
    sylls.iter().flat_map(|s| s.word.0.iter().copied()).collect()
}

/// Writes a nontrivial `w` as `f⁻¹ g f` where `g` is reduced, cyclically
/// reduced and either lies in one factor or starts and ends in different
/// factors.
pub fn cyclically_reduce(
    w: &GroupWord,
    split: &FreeSplit,
    alpha: &IndependenceAlphabet,
) -> Result<(GroupWord, GroupWord)> {
    if !split.covers(w) {
        return Err(Error::InvalidSplit("word uses generators outside the split".into()));
    }
    let mut g = reduce_word(w, alpha);
    if g.is_empty() {
        return Err(Error::TrivialElement);
    }
    let mut f = GroupWord::new();
    loop {
        let sylls = syllables(&g, split);
        let n = sylls.len();
        if n == 1 || sylls[0].side != sylls[n - 1].side {
            return Ok((f, g));
        }
        let last = sylls[n - 1].word.clone();
        let merged = reduce_word(&last.concat(&sylls[0].word), alpha);
        // w' = last · g · last⁻¹; then g = last⁻¹ w' last.
        let peeled = merged.is_empty();
        let mut next = Vec::with_capacity(n);
        if !peeled {
            next.push(Syllable { side: sylls[0].side, word: merged });
        }
        next.extend_from_slice(&sylls[1..n - 1]);
        g = reduce_word(&join(&next), alpha);
        f = last.concat(&f);
        if peeled {
            continue;
        }
        return Ok((f, g));
    }
}

/// Whether `w` is cyclically reduced in the free product.
pub fn is_cyclically_reduced(w: &GroupWord, split: &FreeSplit, alpha: &IndependenceAlphabet) -> bool {
    let sylls = syllables(w, split);
    if sylls.iter().any(|s| is_identity(&s.word, alpha)) || sylls.is_empty() {
        return false;
    }
    let n = sylls.len();
    if sylls[0].side != sylls[n - 1].side {
        return true;
    }
    !is_identity(&sylls[n - 1].word.concat(&sylls[0].word), alpha)
}

/// Left rotation `λ` by one syllable.
pub fn rotate_left(w: &GroupWord, split: &FreeSplit) -> GroupWord {
    let sylls = syllables(w, split);
    if sylls.len() <= 1 {
        return w.clone();
    }
    let mut v = sylls[1..].to_vec();
    v.push(sylls[0].clone());
    join(&v)
}

/// Right rotation `ρ` by one syllable.
pub fn rotate_right(w: &GroupWord, split: &FreeSplit) -> GroupWord {
    let sylls = syllables(w, split);
    if sylls.len() <= 1 {
        return w.clone();
    }
    let n = sylls.len();
    let mut v = vec![sylls[n - 1].clone()];
    v.extend_from_slice(&sylls[..n - 1]);
    join(&v)
}
