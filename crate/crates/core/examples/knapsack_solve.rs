//! Solving knapsack instances over Z^2, F2 and F2 x Z, with the bound report.

use graphknap::alphabet::{decompose, IndependenceAlphabet};
use graphknap::group::GroupWord;
use graphknap::knapsack::{solve, tameness_bound, ExponentEquation, Mode};

fn show(name: &str, eq: &ExponentEquation) {
    let out = solve(eq).unwrap();
    println!("{name}: {}", serde_json::to_string(&out).unwrap());
    if let Ok(tree) = decompose(&eq.alphabet) {
        if let Ok(b) = tameness_bound(eq, &tree) {
            println!("  tameness bound {} (n = {}, k = {})", b.value, b.n_effective, b.k);
        }
    }
}

fn main() {
    let z2 = IndependenceAlphabet::complete(&["a", "b"]);
    let w = |alpha: &IndependenceAlphabet, s: &str| GroupWord::parse_str(alpha, s).unwrap();
    let eq = ExponentEquation::knapsack(z2.clone(), vec![w(&z2, "a b"), w(&z2, "a^-1 b")], &w(&z2, "b b b b a a"));
    show("Z^2", &eq);

    let f2 = IndependenceAlphabet::free(&["a", "b"]);
    let eq = ExponentEquation::knapsack(f2.clone(), vec![w(&f2, "a"), w(&f2, "b")], &w(&f2, "b a"));
    show("F2, wrong order", &eq);
    let eq = ExponentEquation::knapsack(f2.clone(), vec![w(&f2, "a b"), w(&f2, "b")], &w(&f2, "a b a b b"));
    show("F2", &eq);

    let fz = IndependenceAlphabet::new(&["a", "b", "t"], &[("a", "t"), ("b", "t")]);
    let eq = ExponentEquation::knapsack(fz.clone(), vec![w(&fz, "a t"), w(&fz, "b t^-1")], &w(&fz, "a a b"));
    show("F2 x Z", &eq);

    let z = IndependenceAlphabet::complete(&["a"]);
    let eq = ExponentEquation::knapsack(z.clone(), vec![w(&z, "a a"), w(&z, "a a a")], &w(&z, "a")).with_mode(Mode::Integer);
    show("Z, integer exponents", &eq);
}
