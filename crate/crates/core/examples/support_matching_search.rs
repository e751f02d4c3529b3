// Probability-r valuations need not have supports that match under
// coarse-graining. A seeded search looks for a counterexample and replays it.
//
//     cargo run --example support_matching_search

use toposval::valuations::{search_draw, search_supportsmatch_violation, supportsmatch_violation};

pub fn run() -> toposval::Result<()> {
    let outcome = search_supportsmatch_violation(2024, 200)?;
    println!("seed {} after {} draws: {}", outcome.seed, outcome.draws_run, outcome.status);
    if let Some(f) = outcome.finding {
        println!("draw {} r = {} dim {} diag {:?}", f.draw, f.r, f.dim, f.rho_diagonal);
        println!("supports at {} and {:?} disagree ({})", f.witness.v1, f.witness.v2, f.witness.note);
        let again = supportsmatch_violation(&search_draw(2024, f.draw))?;
        println!("replay gives the same witness: {}", again.as_ref() == Some(&f.witness));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> toposval::Result<()> {
    run()
}
