// Coarse-graining a proposition and restricting its set of characters give
// the same answer. Checked exhaustively on a seeded batch of random posets.
//
//     cargo run --example isomorphism

use toposval::fixtures;
use toposval::presheaves::check_nat_iso;

pub fn run() -> toposval::Result<()> {
    let mut rng = fixtures::rng(3);
    let mut posets = vec![fixtures::fix_a()];
    posets.extend((0..10).map(|_| fixtures::standard_random_poset(&mut rng).poset));
    for p in &posets {
        let r = check_nat_iso(p)?;
        println!(
            "dim {} contexts {:2}: {:3} pairs {:4} elements  {}",
            p.dim(),
            p.len(),
            r.pairs_checked,
            r.elements_checked,
            if r.passed() { "ok" } else { "MISMATCH" }
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> toposval::Result<()> {
    run()
}
