//! The word problem two ways, and trace equality with Foata normal forms.

use graphknap::alphabet::{decompose, IndependenceAlphabet};
use graphknap::group::{is_identity, is_identity_stacked, reduce_word, GroupWord};
use graphknap::trace::{foata_normal_form, format_monoid_word, parse_monoid_word, traces_equal};

fn main() {
    // F2 x Z with t central.
    let alpha = IndependenceAlphabet::new(&["a", "b", "t"], &[("a", "t"), ("b", "t")]);
    let tree = decompose(&alpha).unwrap();
    for w in ["a t a^-1 t^-1", "a b a^-1 b^-1", "t a b t^-1 b^-1 a^-1", "a a t b b^-1 t^-1"] {
        let w = GroupWord::parse_str(&alpha, w).unwrap();
        let stacked = is_identity_stacked(&w, &alpha, &tree).unwrap();
        assert_eq!(stacked, is_identity(&w, &alpha));
        println!("{:28} identity={stacked}  reduced: [{}]", w.display(&alpha).to_string(), reduce_word(&w, &alpha).display(&alpha));
    }

    let p4 = IndependenceAlphabet::new(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")]);
    let u = parse_monoid_word(&p4, &["a", "b", "c", "d"]).unwrap();
    let v = parse_monoid_word(&p4, &["b", "a", "d", "c"]).unwrap();
    let steps = |w: &[usize]| -> Vec<Vec<String>> {
        foata_normal_form(w, &p4).unwrap().steps.iter().map(|s| format_monoid_word(&p4, s)).collect()
    };
    println!("abcd ~ badc in M(P4): {}", traces_equal(&u, &v, &p4));
    println!("  {:?}\n  {:?}", steps(&u), steps(&v));
}
