//! Minimal solutions of linear Diophantine equations and the Pottier bound
//! `‖x‖₁ ≤ 1 + ‖u‖₁ + |b|` on them.

use graphknap::semilinear::{decompose_hyperplane_solutions, minimal_solutions_inhom, minimal_solutions_system, norm_1};

fn main() {
    let (u, b) = (vec![2, -3, 1], 4);
    let sols = minimal_solutions_inhom(&u, b);
    let bound = 1 + norm_1(&u) + b.abs();
    println!("2x - 3y + z = 4: {} minimal solutions, Pottier bound {bound}", sols.len());
    for x in &sols {
        assert!(norm_1(x) <= bound);
        println!("  {x:?}");
    }
    let set = decompose_hyperplane_solutions(&u, b);
    println!("as a semilinear set: {}", serde_json::to_string(&set).unwrap());

    // x1 + x2 = 3 and x2 - x3 = 0, columns per variable.
    let columns = vec![vec![1, 0], vec![1, 1], vec![0, -1]];
    println!("system: {:?}", minimal_solutions_system(&columns, &[3, 0], 100_000).unwrap());
}
