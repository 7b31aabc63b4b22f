//! JSON wire formats for alphabets, words, instances and automata.

use serde::{Deserialize, Serialize};

use crate::alphabet::{IndependenceAlphabet, RawAlphabet};
use crate::automata::WordAutomaton;
use crate::error::{Error, Result};
use crate::group::GroupWord;
use crate::knapsack::{ExponentEquation, Mode};

pub type RawWord = Vec<String>;

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))
}

/// Accepts either a bare alphabet or any document with an `"alphabet"` key.
pub fn alphabet_from_json(text: &str) -> Result<IndependenceAlphabet> {
    let v: serde_json::Value = parse_json(text)?;
    let raw = match v.get("alphabet") {
        Some(a) => a.clone(),
        None => v,
    };
    let raw: RawAlphabet = serde_json::from_value(raw).map_err(|e| Error::Parse(e.to_string()))?;
    IndependenceAlphabet::from_raw(&raw)
}

pub fn word_from_json(alpha: &IndependenceAlphabet, text: &str) -> Result<GroupWord> {
    let raw: RawWord = parse_json(text)?;
    GroupWord::parse(alpha, &raw)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawInstance {
    pub alphabet: RawAlphabet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Vec<RawWord>>,
    pub cycles: Vec<RawWord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    /// Shorthand for `constants = [1, …, 1, target⁻¹]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<RawWord>,
    #[serde(default)]
    pub mode: Mode,
}

pub fn instance_from_raw(raw: &RawInstance) -> Result<ExponentEquation> {
    let alpha = IndependenceAlphabet::from_raw(&raw.alphabet)?;
    let cycles = raw.cycles.iter().map(|w| GroupWord::parse(&alpha, w)).collect::<Result<Vec<_>>>()?;
    let k = cycles.len();
    let constants = match (&raw.constants, &raw.target) {
        (Some(_), Some(_)) => return Err(Error::InvalidInstance("give either constants or target".into())),
        (Some(cs), None) => cs.iter().map(|w| GroupWord::parse(&alpha, w)).collect::<Result<Vec<_>>>()?,
        (None, t) => {
            let target = match t {
                Some(t) => GroupWord::parse(&alpha, t)?,
                None => GroupWord::new(),
            };
            let mut cs = vec![GroupWord::new(); k + 1];
            cs[k] = target.inverse();
            cs
        }
    };
    let variables = raw.variables.clone().unwrap_or_else(|| (1..=k).map(|i| format!("x{i}")).collect());
    Ok(ExponentEquation::new(alpha, constants, cycles, variables)?.with_mode(raw.mode))
}

pub fn instance_to_raw(eq: &ExponentEquation) -> RawInstance {
    let words = |ws: &[GroupWord]| ws.iter().map(|w| w.tokens(&eq.alphabet)).collect::<Vec<_>>();
    RawInstance {
        alphabet: eq.alphabet.to_raw(),
        constants: Some(words(&eq.constants)),
        cycles: words(&eq.cycles),
        variables: Some(eq.variables.clone()),
        target: None,
        mode: eq.mode,
    }
}

pub fn instance_from_json(text: &str) -> Result<ExponentEquation> {
    instance_from_raw(&parse_json(text)?)
}

pub fn instance_to_json(eq: &ExponentEquation) -> String {
    serde_json::to_string(&instance_to_raw(eq)).expect("serializable")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawTransition {
    pub from: usize,
    pub to: usize,
    pub label: RawWord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawLoop {
    pub state: usize,
    pub label: RawWord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawAutomaton {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<RawAlphabet>,
    pub states: usize,
    pub initial: usize,
    pub finals: Vec<usize>,
    #[serde(default)]
    pub transitions: Vec<RawTransition>,
    #[serde(default)]
    pub loops: Vec<RawLoop>,
}

/// Loops are appended after the ordinary transitions.
pub fn automaton_from_raw(raw: &RawAutomaton, alpha: &IndependenceAlphabet) -> Result<WordAutomaton> {
    let mut a = WordAutomaton::new(raw.states, raw.initial, raw.finals.clone());
    for t in &raw.transitions {
        a.add(t.from, t.to, GroupWord::parse(alpha, &t.label)?);
    }
    for l in &raw.loops {
        a.add(l.state, l.state, GroupWord::parse(alpha, &l.label)?);
    }
    a.validate()?;
    Ok(a)
}

pub fn automaton_to_raw(a: &WordAutomaton, alpha: &IndependenceAlphabet) -> RawAutomaton {
    let mut raw = RawAutomaton {
        alphabet: Some(alpha.to_raw()),
        states: a.states,
        initial: a.initial,
        finals: a.finals.clone(),
        transitions: Vec::new(),
        loops: Vec::new(),
    };
    for t in &a.transitions {
        let label = t.label.tokens(alpha);
        if t.from == t.to {
            raw.loops.push(RawLoop { state: t.from, label });
        } else {
            raw.transitions.push(RawTransition { from: t.from, to: t.to, label });
        }
    }
    raw
}

/// An automaton document; the alphabet comes from the document or from
/// `fallback`.
pub fn automaton_from_json(text: &str, fallback: Option<&IndependenceAlphabet>) -> Result<(WordAutomaton, IndependenceAlphabet)> {
    let raw: RawAutomaton = parse_json(text)?;
    let alpha = match (&raw.alphabet, fallback) {
        (Some(r), _) => IndependenceAlphabet::from_raw(r)?,
        (None, Some(a)) => a.clone(),
        (None, None) => return Err(Error::Parse("automaton has no alphabet".into())),
    };
    let a = automaton_from_raw(&raw, &alpha)?;
    Ok((a, alpha))
}
