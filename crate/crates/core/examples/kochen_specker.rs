// Global sections of the spectral presheaf: none over the bundled 18-ray
// set in dimension 4, at least one over any pair of qubit bases.
//
//     cargo run --example kochen_specker

use toposval::fixtures;
use toposval::ks::{global_section_search, replay_reversed, section_verify, RaySet};

pub fn run() -> toposval::Result<()> {
    let rays = RaySet::bundled();
    println!(
        "{} rays in {} bases, every ray in an even number of bases with an odd number of bases: {}",
        rays.rays().len(),
        rays.contexts().len(),
        rays.parity_obstructed()
    );
    let poset = rays.poset()?;
    let search = global_section_search(&poset)?;
    let verdict = search.verdict(&poset);
    println!("section exists: {} ({} nodes)", verdict.exists, verdict.nodes_explored);
    println!("reversed order agrees: {}", replay_reversed(&poset, &search)?);

    let qubit = fixtures::dim2_two_bases();
    let found = global_section_search(&qubit)?;
    if let Some(s) = &found.section {
        println!("qubit section {:?} verified {}", s.to_ids(&qubit), section_verify(&qubit, s)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> toposval::Result<()> {
    run()
}
