//! Does an acyclic automaton accept a word that is trivial in the group?

use graphknap::alphabet::IndependenceAlphabet;
use graphknap::automata::{membership_one, membership_one_brute, unroll_loops, MembershipConfig, WordAutomaton};
use graphknap::group::GroupWord;

fn main() {
    let alpha = IndependenceAlphabet::new(&["a", "b", "t"], &[("a", "t"), ("b", "t")]);
    let w = |s: &str| GroupWord::parse_str(&alpha, s).unwrap();
    let mut a = WordAutomaton::new(4, 0, vec![3]);
    a.add(0, 1, w("a t"));
    a.add(0, 1, w("b"));
    a.add(1, 2, w("b^-1"));
    a.add(1, 2, w("t^-1 a^-1"));
    a.add(2, 3, w(""));
    a.add(2, 3, w("a"));
    let path = membership_one(&a, &alpha, &MembershipConfig::default()).unwrap();
    println!("witness path: {path:?}");
    assert_eq!(path.is_some(), membership_one_brute(&a, &alpha, 1000).unwrap());

    // A loop automaton: a^n (a^-1)^m with n, m bounded by 3 after unrolling.
    let mut l = WordAutomaton::new(2, 0, vec![1]);
    l.add(0, 0, w("a"));
    l.add(0, 1, w("a a^-1 a"));
    l.add(1, 1, w("a^-1"));
    let u = unroll_loops(&l, 3).unwrap();
    println!("unrolled to {} states; accepts 1: {}", u.states, membership_one(&u, &alpha, &MembershipConfig::default()).unwrap().is_some());
}
