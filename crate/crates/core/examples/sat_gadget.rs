//! A CNF formula through the automata over M(P4) to a knapsack instance over
//! G(P4). Reads DIMACS from the first argument if given.

use graphknap::gadgets::{sat_to_p4_knapsack, sat_witness, CnfFormula};
use graphknap::knapsack::search_box;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(p).unwrap(),
        None => "c (x1 or not x2) and x2\np cnf 2 2\n1 -2 0\n2 0\n".to_string(),
    };
    let phi = CnfFormula::parse_dimacs(&text).unwrap();
    let g = sat_to_p4_knapsack(&phi).unwrap();
    let eq = &g.instance.equation;
    println!("{} clauses -> {} cycles, loop budget {}", phi.clauses.len(), eq.k(), g.instance.budget);
    println!("satisfying valuation: {:?}", phi.satisfying_valuation());
    match sat_witness(&g, &phi) {
        Some(x) => println!("witness from the valuation solves the instance: {}", eq.is_solution(&x)),
        None => {
            let r = search_box(eq, &g.instance.bounds, 5_000_000).unwrap();
            println!("bounded search: {}", if r.is_some() { "solvable" } else { "no solution within the budget" });
        }
    }
}
