//! Random acyclic automata over F2 against their subset-sum instances.

use graphknap::automata::membership_one_brute;
use graphknap::gadgets::{acyclic_automaton_to_knapsack_f2, f2_alphabet, random_acyclic_automaton};
use graphknap::knapsack::{solve_subset_sum, SolveConfig, Status};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f2 = f2_alphabet();
    for _ in 0..10 {
        let a = random_acyclic_automaton(&mut rng, 4, 5, 2);
        let member = membership_one_brute(&a, &f2, 10_000).unwrap();
        let g = acyclic_automaton_to_knapsack_f2(&a).unwrap();
        let out = solve_subset_sum(&g.equation, &SolveConfig::default()).unwrap();
        assert_eq!(member, out.status == Status::Solvable);
        println!("accepts 1: {member:5}  subset sum: {:?} {:?}", out.status, out.assignment.map(|m| m.into_values().collect::<Vec<_>>()));
    }
}
