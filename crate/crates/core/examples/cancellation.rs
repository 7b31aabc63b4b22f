//! Cancellations of a solution over Z * Z, and pumping along a mixed period.

use graphknap::alphabet::IndependenceAlphabet;
use graphknap::cancellation::{certify, compatible_periods, grow, mixed_periods, shrink_to_threshold, threshold};
use graphknap::group::{FreeSplit, GroupWord};
use graphknap::knapsack::ExponentEquation;

fn main() {
    let f2 = IndependenceAlphabet::free(&["a", "b"]);
    let split = FreeSplit::new(&f2, &[0], &[1]).unwrap();
    let w = |s: &str| GroupWord::parse_str(&f2, s).unwrap();
    let eq = ExponentEquation::knapsack(f2.clone(), vec![w("a b"), w("b^-1 a^-1")], &GroupWord::new());
    let (seq, c) = certify(&eq, &split, &[1, 1]).unwrap();
    println!("{} blocks, cancellation {}", seq.len(), serde_json::to_string(&c).unwrap());
    println!("mixed periods: {:?}", mixed_periods(&eq, &split).iter().map(|p| &p.vector).collect::<Vec<_>>());

    let periods = compatible_periods(&eq, &split, &[1, 1], &c).unwrap();
    let (mut x, mut c) = (vec![1, 1], c);
    for _ in 0..30 {
        (x, c) = grow(&eq, &split, &x, &c, &periods[0]).unwrap();
    }
    println!("grown to {x:?}; threshold q(n) = {}", threshold(&eq));
    let (y, _, removed) = shrink_to_threshold(&eq, &split, &x, &c).unwrap();
    println!("shrunk back to {y:?} after removing {} periods", removed.len());
}
