//! Classifies a few small graphs and prints the decomposition of the
//! transitive forests among them.

use graphknap::alphabet::{classify, decompose, GraphClass, IndependenceAlphabet};

fn main() {
    let graphs = [
        ("Z^3", IndependenceAlphabet::complete(&["a", "b", "c"])),
        ("F3", IndependenceAlphabet::free(&["a", "b", "c"])),
        ("P3", IndependenceAlphabet::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")])),
        ("F2 x Z", IndependenceAlphabet::new(&["a", "b", "t"], &[("a", "t"), ("b", "t")])),
        ("P4", IndependenceAlphabet::new(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")])),
        ("C4", IndependenceAlphabet::new(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])),
    ];
    for (name, alpha) in &graphs {
        match classify(alpha) {
            GraphClass::General { pattern, witness } => {
                let w: Vec<&str> = witness.iter().map(|&g| alpha.name(g)).collect();
                println!("{name:8} general, induced {} on {:?}", pattern.as_str(), w);
            }
            class => {
                let tree = decompose(alpha).expect("transitive forest");
                println!("{name:8} {class:?}  {}", tree.display(alpha));
            }
        }
    }
}
