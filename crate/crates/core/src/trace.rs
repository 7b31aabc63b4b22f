//! The trace monoid `M(A, I)`: words over `A` modulo commutation of
//! independent neighbours.

use crate::alphabet::{Gen, IndependenceAlphabet};
use crate::error::{Error, Result};

/// A word over the positive generators.
pub type MonoidWord = Vec<Gen>;

/// Foata normal form: maximal steps of pairwise independent letters, each
/// step sorted by generator name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceNormalForm {
    pub steps: Vec<Vec<Gen>>,
}

impl TraceNormalForm {
    /// Concatenates the steps back into a word.
    pub fn linearize(&self) -> MonoidWord {
        self.steps.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Parses generator names into a monoid word.
pub fn parse_monoid_word<S: AsRef<str>>(alpha: &IndependenceAlphabet, names: &[S]) -> Result<MonoidWord> {
    names.iter().map(|s| alpha.lookup(s.as_ref())).collect()
}

pub fn format_monoid_word(alpha: &IndependenceAlphabet, w: &[Gen]) -> Vec<String> {
    w.iter().map(|&g| alpha.name(g).to_string()).collect()
}

/// Assigns each position its Foata step: one more than the latest step of a
/// dependent letter seen before it.
pub(crate) fn foata_steps<T: Copy>(
    alpha: &IndependenceAlphabet,
    w: &[T],
    gen_of: impl Fn(T) -> Gen,
) -> Vec<Vec<T>> {
    let mut last = vec![0usize; alpha.len()];
    let mut steps: Vec<Vec<T>> = Vec::new();
    for &x in w {
        let g = gen_of(x);
        let mut s = last[g];
        for (h, &l) in last.iter().enumerate() {
            if l > s && !alpha.commute(g, h) {
                s = l;
            }
        }
        if s == steps.len() {
            steps.push(Vec::new());
        }
        steps[s].push(x);
        last[g] = s + 1;
    }
    steps
}

pub fn foata_normal_form(w: &[Gen], alpha: &IndependenceAlphabet) -> Result<TraceNormalForm> {
    if let Some(&g) = w.iter().find(|&&g| g >= alpha.len()) {
        return Err(Error::UnknownGenerator(format!("#{g}")));
    }
    let mut steps = foata_steps(alpha, w, |g| g);
    for step in &mut steps {
        step.sort_by_key(|&g| alpha.rank(g));
    }
    Ok(TraceNormalForm { steps })
}

pub fn traces_equal(u: &[Gen], v: &[Gen], alpha: &IndependenceAlphabet) -> bool {
    u.len() == v.len()
        && match (foata_normal_form(u, alpha), foata_normal_form(v, alpha)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
}

/// Subsequence of `w` keeping only the letters `x` and `y`. The pair must be
/// dependent; `x == y` projects onto a single letter.
pub fn project(w: &[Gen], x: Gen, y: Gen, alpha: &IndependenceAlphabet) -> Result<MonoidWord> {
    if x != y && alpha.commute(x, y) {
        return Err(Error::IndependentPair(alpha.name(x).into(), alpha.name(y).into()));
    }
    Ok(w.iter().copied().filter(|&g| g == x || g == y).collect())
}

/// Equality through projections onto every dependent pair and every single
/// letter. Independent of the normal form, used as an oracle.
pub fn traces_equal_by_projection(u: &[Gen], v: &[Gen], alpha: &IndependenceAlphabet) -> bool {
    for x in 0..alpha.len() {
        for y in x..alpha.len() {
            if x != y && alpha.commute(x, y) {
                continue;
            }
            if project(u, x, y, alpha).unwrap() != project(v, x, y, alpha).unwrap() {
                return false;
            }
        }
    }
    true
}
