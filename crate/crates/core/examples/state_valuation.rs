// The certainty valuation of a mixed state and its probability-r variants,
// with the five valuation clauses checked on each.
//
//     cargo run --example state_valuation

use toposval::contexts::{mask_hex, Mask};
use toposval::fixtures;
use toposval::linalg::{real_diag, DensityMatrix};
use toposval::valuations::{check_definition3, nu_rho, nu_rho_r};

pub fn run() -> toposval::Result<()> {
    let poset = fixtures::fix_a();
    let rho = DensityMatrix::new(real_diag(&[0.5, 0.4, 0.1]))?;
    let nu = nu_rho(&poset, &rho)?.into_inner();
    let v1 = poset.index_of("V1")?;
    for mask in Mask::all(3) {
        let members: Vec<&str> = nu.get(v1, mask).iter().map(|&w| poset.context(w).id()).collect();
        println!("V1 {} -> {members:?}", mask_hex(mask.bits(), 3));
    }
    println!("certainty: all clauses {}", check_definition3(&poset, &nu)?.all_pass());
    for r in [0.9, 0.7, 0.5] {
        let alpha = nu_rho_r(&poset, &rho, r)?;
        let report = check_definition3(&poset, &alpha)?;
        print!("r = {r}: all clauses {}", report.all_pass());
        // at r = 0.5 the weights 0.5 and 0.4 + 0.1 tie, so both halves count
        match &report.exclusivity.witness {
            Some(w) => println!(" (exclusivity: {} {} / {:?})", w.v1, w.mask, w.other_mask),
            None => println!(),
        }
    }

    // below one half, two disjoint propositions can both be counted true
    let qubit = fixtures::dim2_diagonal_poset();
    let low = nu_rho_r(&qubit, &DensityMatrix::maximally_mixed(2), 0.3)?;
    let report = check_definition3(&qubit, &low)?;
    if let Some(w) = report.exclusivity.witness {
        println!("r = 0.3 exclusivity fails at {} {} / {:?}: {}", w.v1, w.mask, w.other_mask, w.note);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> toposval::Result<()> {
    run()
}
