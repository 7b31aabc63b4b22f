//! Independence alphabets `(A, I)`, their classification and the
//! free-product / direct-product-with-Z decomposition of transitive forests.
//!
//! A graph is a transitive forest iff it has no induced `P4` and no induced
//! `C4`. Transitive forests are exactly the graphs obtained from the empty
//! graph by disjoint unions and by adding a vertex adjacent to everything,
//! which is what [`decompose`] walks.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a generator inside its alphabet.
pub type Gen = usize;

/// A finite simple graph naming generators and their commutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceAlphabet {
    names: Vec<String>,
    index: HashMap<String, Gen>,
    adjacent: Vec<Vec<bool>>,
    /// Position of each generator in name order; used for canonical orderings.
    rank: Vec<usize>,
}

/// Raw alphabet as it appears on the wire.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAlphabet {
    pub generators: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Validates and normalizes a raw generator/edge list.
pub fn validate_alphabet<S: AsRef<str>>(
    generators: &[S],
    edges: &[(S, S)],
) -> Result<IndependenceAlphabet> {
    let mut names = Vec::with_capacity(generators.len());
    let mut index = HashMap::new();
    for g in generators {
        let g = g.as_ref();
        if !valid_name(g) {
            return Err(Error::InvalidGeneratorName(g.to_string()));
        }
        if index.insert(g.to_string(), names.len()).is_some() {
            return Err(Error::DuplicateGenerator(g.to_string()));
        }
        names.push(g.to_string());
    }
    let n = names.len();
    let mut adjacent = vec![vec![false; n]; n];
    for (x, y) in edges {
        let (x, y) = (x.as_ref(), y.as_ref());
        if x == y {
            return Err(Error::SelfLoop(x.to_string()));
        }
        let i = *index.get(x).ok_or_else(|| Error::UnknownGenerator(x.to_string()))?;
        let j = *index.get(y).ok_or_else(|| Error::UnknownGenerator(y.to_string()))?;
        adjacent[i][j] = true;
        adjacent[j][i] = true;
    }
    let mut order: Vec<Gen> = (0..n).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    let mut rank = vec![0; n];
    for (r, &g) in order.iter().enumerate() {
        rank[g] = r;
    }
    Ok(IndependenceAlphabet { names, index, adjacent, rank })
}

impl IndependenceAlphabet {
    /// Builds an alphabet from string slices, panicking on invalid input.
    /// Intended for tests and examples.
    pub fn new(generators: &[&str], edges: &[(&str, &str)]) -> Self {
        validate_alphabet(generators, edges).expect("invalid alphabet")
    }

    /// The free group on the given generators (no commutations).
    pub fn free(generators: &[&str]) -> Self {
        Self::new(generators, &[])
    }

    /// The free abelian group on the given generators.
    pub fn complete(generators: &[&str]) -> Self {
        let mut edges = Vec::new();
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                edges.push((generators[i], generators[j]));
            }
        }
        Self::new(generators, &edges)
    }

    pub fn from_raw(raw: &RawAlphabet) -> Result<Self> {
        let edges: Vec<(&str, &str)> =
            raw.edges.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        let gens: Vec<&str> = raw.generators.iter().map(String::as_str).collect();
        validate_alphabet(&gens, &edges)
    }

    pub fn to_raw(&self) -> RawAlphabet {
        RawAlphabet {
            generators: self.names.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b)| [self.names[a].clone(), self.names[b].clone()])
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Result<Gen> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    /// `true` iff `(a, b) ∈ I`. Never true for `a == b`.
    #[inline]
    pub fn commute(&self, a: Gen, b: Gen) -> bool {
        self.adjacent[a][b]
    }

    /// Rank of the generator in name order.
    #[inline]
    pub fn rank(&self, g: Gen) -> usize {
        self.rank[g]
    }

    /// Edges as ordered pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(Gen, Gen)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacent[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_edgeless(&self) -> bool {
        self.adjacent.iter().all(|row| row.iter().all(|&b| !b))
    }

    /// Connected components of the subgraph induced by `vertices`, each in
    /// input order, ordered by least member.
    pub fn components(&self, vertices: &[Gen]) -> Vec<Vec<Gen>> {
        let mut seen = vec![false; self.len()];
        let inside: Vec<bool> = {
            let mut v = vec![false; self.len()];
            for &g in vertices {
                v[g] = true;
            }
            v
        };
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        let mut comps = Vec::new();
        for &start in &sorted {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for w in 0..self.len() {
                    if inside[w] && !seen[w] && self.adjacent[v][w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }
}

impl fmt::Display for IndependenceAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({{{}}}, {{", self.names.join(","))?;
        let edges: Vec<String> = self
            .edges()
            .into_iter()
            .map(|(a, b)| format!("{}{}", self.names[a], self.names[b]))
            .collect();
        write!(f, "{}}})", edges.join(","))
    }
}

/// Induced four-vertex pattern witnessing that a graph is not a transitive forest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    P4,
    C4,
}

impl Pattern {
    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::P4 => "P4",
            Pattern::C4 => "C4",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphClass {
    Complete,
    TransitiveForestNotComplete,
    /// Vertices listed in path (resp. cycle) order.
    General { pattern: Pattern, witness: [Gen; 4] },
}

impl GraphClass {
    pub fn is_transitive_forest(&self) -> bool {
        !matches!(self, GraphClass::General { .. })
    }
}

/// Looks for an induced P4 or C4 among all 4-subsets, in lexicographic
/// order of the subsets.
pub fn find_p4_or_c4(alpha: &IndependenceAlphabet) -> Option<(Pattern, [Gen; 4])> {
    let n = alpha.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let vs = [a, b, c, d];
                    if let Some(hit) = classify_quad(alpha, vs) {
                        return Some(hit);
                    }
                }
            }
        }
    }
    None
}

fn classify_quad(alpha: &IndependenceAlphabet, vs: [Gen; 4]) -> Option<(Pattern, [Gen; 4])> {
    let mut degree = [0usize; 4];
    let mut edges = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if alpha.commute(vs[i], vs[j]) {
                degree[i] += 1;
                degree[j] += 1;
                edges += 1;
            }
        }
    }
    let pattern = match edges {
        3 if degree.iter().filter(|&&d| d == 1).count() == 2
            && degree.iter().filter(|&&d| d == 2).count() == 2 =>
        {
            Pattern::P4
        }
        4 if degree.iter().all(|&d| d == 2) => Pattern::C4,
        _ => return None,
    };
    // Walk the pattern starting from the least eligible vertex.
    let start = match pattern {
        Pattern::P4 => (0..4).find(|&i| degree[i] == 1).unwrap(),
        Pattern::C4 => 0,
    };
    let mut order = [start; 4];
    let mut used = [false; 4];
    used[start] = true;
    for step in 1..4 {
        let prev = order[step - 1];
        let next = (0..4)
            .find(|&j| !used[j] && alpha.commute(vs[prev], vs[j]))
            .expect("pattern walk");
        used[next] = true;
        order[step] = next;
    }
    Some((pattern, order.map(|i| vs[i])))
}

pub fn classify(alpha: &IndependenceAlphabet) -> GraphClass {
    if let Some((pattern, witness)) = find_p4_or_c4(alpha) {
        return GraphClass::General { pattern, witness };
    }
    let n = alpha.len();
    let complete = (0..n).all(|i| (0..n).all(|j| i == j || alpha.commute(i, j)));
    if complete {
        GraphClass::Complete
    } else {
        GraphClass::TransitiveForestNotComplete
    }
}

/// Structure of a transitive-forest graph group as nested free products and
/// direct products with Z.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DecompositionTree {
    Trivial,
    DirectZ { apex: Gen, child: Box<DecompositionTree> },
    FreeProduct(Vec<DecompositionTree>),
}

impl DecompositionTree {
    /// Generators covered by this node, apexes before their subtrees.
    pub fn generators(&self) -> Vec<Gen> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Gen>) {
        match self {
            DecompositionTree::Trivial => {}
            DecompositionTree::DirectZ { apex, child } => {
                out.push(*apex);
                child.collect(out);
            }
            DecompositionTree::FreeProduct(children) => {
                for c in children {
                    c.collect(out);
                }
            }
        }
    }

    pub fn contains(&self, g: Gen) -> bool {
        match self {
            DecompositionTree::Trivial => false,
            DecompositionTree::DirectZ { apex, child } => *apex == g || child.contains(g),
            DecompositionTree::FreeProduct(children) => children.iter().any(|c| c.contains(g)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DecompositionTree::Trivial => 0,
            DecompositionTree::DirectZ { child, .. } => 1 + child.depth(),
            DecompositionTree::FreeProduct(children) => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }

    /// Renders the tree with generator names, e.g. `Z(b; *(Z(a; 1), Z(c; 1)))`.
    pub fn display(&self, alpha: &IndependenceAlphabet) -> String {
        match self {
            DecompositionTree::Trivial => "1".into(),
            DecompositionTree::DirectZ { apex, child } => {
                format!("Z({}; {})", alpha.name(*apex), child.display(alpha))
            }
            DecompositionTree::FreeProduct(children) => {
                let parts: Vec<String> = children.iter().map(|c| c.display(alpha)).collect();
                format!("*({})", parts.join(", "))
            }
        }
    }

    /// Checks that the tree describes exactly the graph `alpha`: every
    /// generator appears once, apexes commute with their whole subtree and
    /// free-product factors are pairwise non-adjacent.
    pub fn matches(&self, alpha: &IndependenceAlphabet) -> bool {
        let gens = self.generators();
        let mut seen = vec![false; alpha.len()];
        for &g in &gens {
            if g >= alpha.len() || seen[g] {
                return false;
            }
            seen[g] = true;
        }
        seen.iter().all(|&s| s) && self.edges_match(alpha)
    }

    fn edges_match(&self, alpha: &IndependenceAlphabet) -> bool {
        match self {
            DecompositionTree::Trivial => true,
            DecompositionTree::DirectZ { apex, child } => {
                child.generators().iter().all(|&g| alpha.commute(*apex, g))
                    && child.edges_match(alpha)
            }
            DecompositionTree::FreeProduct(children) => {
                let sets: Vec<Vec<Gen>> = children.iter().map(|c| c.generators()).collect();
                for i in 0..sets.len() {
                    for j in i + 1..sets.len() {
                        for &x in &sets[i] {
                            for &y in &sets[j] {
                                if alpha.commute(x, y) {
                                    return false;
                                }
                            }
                        }
                    }
                }
                children.iter().all(|c| c.edges_match(alpha))
            }
        }
    }
}

/// Decomposes a transitive forest. Fails exactly when `classify` reports
/// `General`.
pub fn decompose(alpha: &IndependenceAlphabet) -> Result<DecompositionTree> {
    let all: Vec<Gen> = (0..alpha.len()).collect();
    decompose_subset(alpha, &all).map_err(|_| {
        let (pattern, witness) = find_p4_or_c4(alpha)
            .expect("decomposition failed on a graph without induced P4/C4");
        Error::NotTransitiveForest {
            pattern: pattern.as_str(),
            witness: witness.iter().map(|&g| alpha.name(g).to_string()).collect(),
        }
    })
}

fn decompose_subset(alpha: &IndependenceAlphabet, vertices: &[Gen]) -> std::result::Result<DecompositionTree, ()> {
    if vertices.is_empty() {
        return Ok(DecompositionTree::Trivial);
    }
    let comps = alpha.components(vertices);
    if comps.len() > 1 {
        let children = comps
            .iter()
            .map(|c| decompose_subset(alpha, c))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        return Ok(DecompositionTree::FreeProduct(children));
    }
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    let apex = sorted
        .iter()
        .copied()
        .find(|&v| sorted.iter().all(|&w| w == v || alpha.commute(v, w)))
        .ok_or(())?;
    let rest: Vec<Gen> = sorted.into_iter().filter(|&w| w != apex).collect();
    Ok(DecompositionTree::DirectZ { apex, child: Box::new(decompose_subset(alpha, &rest)?) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> IndependenceAlphabet {
        IndependenceAlphabet::new(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")])
    }

    #[test]
    fn validation_errors() {
        assert!(validate_alphabet(&["a", "b"], &[]).is_ok());
        assert_eq!(validate_alphabet(&["a"], &[("a", "a")]), Err(Error::SelfLoop("a".into())));
        assert_eq!(
            validate_alphabet(&["a", "a"], &[]),
            Err(Error::DuplicateGenerator("a".into()))
        );
        assert_eq!(
            validate_alphabet(&["a"], &[("a", "z")]),
            Err(Error::UnknownGenerator("z".into()))
        );
        assert!(matches!(validate_alphabet(&["A"], &[]), Err(Error::InvalidGeneratorName(_))));
        assert!(matches!(validate_alphabet(&["1x"], &[]), Err(Error::InvalidGeneratorName(_))));
        assert!(validate_alphabet(&["x_1"], &[]).is_ok());
        assert_eq!(p4().edges().len(), 3);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&IndependenceAlphabet::complete(&["a", "b"])), GraphClass::Complete);
        assert_eq!(
            classify(&p4()),
            GraphClass::General { pattern: Pattern::P4, witness: [0, 1, 2, 3] }
        );
        let p3 = IndependenceAlphabet::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        assert_eq!(classify(&p3), GraphClass::TransitiveForestNotComplete);
        let c4 = IndependenceAlphabet::new(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        );
        assert!(matches!(classify(&c4), GraphClass::General { pattern: Pattern::C4, .. }));
        assert_eq!(classify(&IndependenceAlphabet::free(&[])), GraphClass::Complete);
        assert_eq!(classify(&IndependenceAlphabet::free(&["a"])), GraphClass::Complete);
    }

    #[test]
    fn p4_witness_is_walked_in_path_order() {
        // Same P4 listed with scrambled names: b-d-a-c.
        let g = IndependenceAlphabet::new(&["a", "b", "c", "d"], &[("b", "d"), ("d", "a"), ("a", "c")]);
        let GraphClass::General { witness, .. } = classify(&g) else { panic!() };
        for w in witness.windows(2) {
            assert!(g.commute(w[0], w[1]));
        }
        assert!(!g.commute(witness[0], witness[2]));
        assert!(!g.commute(witness[0], witness[3]));
        assert!(!g.commute(witness[1], witness[3]));
    }

    #[test]
    fn decompose_examples() {
        use DecompositionTree::*;
        let z = |g| DirectZ { apex: g, child: Box::new(Trivial) };
        let f2 = IndependenceAlphabet::free(&["a", "b"]);
        assert_eq!(decompose(&f2).unwrap(), FreeProduct(vec![z(0), z(1)]));
        let p3 = IndependenceAlphabet::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        assert_eq!(
            decompose(&p3).unwrap(),
            DirectZ { apex: 1, child: Box::new(FreeProduct(vec![z(0), z(2)])) }
        );
        let k2 = IndependenceAlphabet::complete(&["a", "b"]);
        assert_eq!(decompose(&k2).unwrap(), DirectZ { apex: 0, child: Box::new(z(1)) });
        assert_eq!(decompose(&IndependenceAlphabet::free(&[])).unwrap(), Trivial);
        assert!(matches!(decompose(&p4()), Err(Error::NotTransitiveForest { pattern: "P4", .. })));
        assert_eq!(decompose(&p3).unwrap().display(&p3), "Z(b; *(Z(a; 1), Z(c; 1)))");
    }

    #[test]
    fn complete_graphs_are_complete() {
        let names = ["a", "b", "c", "d", "e", "f"];
        for n in 0..=6 {
            let g = IndependenceAlphabet::complete(&names[..n]);
            assert_eq!(classify(&g), GraphClass::Complete);
            assert!(decompose(&g).unwrap().matches(&g));
        }
    }
}
