// Supports and intervals of a state's valuation, both reconstructions, and
// the two theorem reports. A hand-edited table shows what a broken
// condition looks like.
//
//     cargo run --example supports

use toposval::contexts::mask_hex;
use toposval::fixtures;
use toposval::linalg::{real_diag, DensityMatrix};
use toposval::valuations::{
    intervals, nu_rho, reconstruct_from_intervals, reconstruct_from_supports, supports, theorem1_verify,
    theorem2_verify, MorphismSetValuation,
};

pub fn run() -> toposval::Result<()> {
    let poset = fixtures::fix_a();
    let rho = DensityMatrix::new(real_diag(&[0.0, 0.7, 0.3]))?;
    let nu = nu_rho(&poset, &rho)?.into_inner();
    let s = supports(&poset, &nu)?;
    let iv = intervals(&poset, &nu)?;
    for v in 0..poset.len() {
        let n = poset.context(v).atom_count();
        let sup = s[v].map_or("none".to_string(), |m| mask_hex(m.bits(), n));
        println!("{:7} support {sup}  interval {:?}", poset.context(v).id(), iv[v].iter().collect::<Vec<_>>());
    }
    let (_, from_s) = reconstruct_from_supports(&poset, &nu)?;
    let (_, from_i) = reconstruct_from_intervals(&poset, &nu)?;
    println!("rebuilt from supports {}, from intervals {}", from_s.equal, from_i.equal);
    for t in [theorem1_verify(&poset, &nu)?, theorem2_verify(&poset, &nu)?] {
        println!(
            "theorem {}: conditions {} conclusions {} contract {}",
            t.theorem,
            t.conditions_hold(),
            t.conclusions_hold(),
            t.contract_holds
        );
    }

    // drop the trivial context from one value
    let triv = poset.index_of(toposval::contexts::TRIVIAL_ID)?;
    let v1 = poset.index_of("V1")?;
    let mut table: Vec<Vec<_>> = (0..poset.len())
        .map(|v| (0..1u32 << poset.context(v).atom_count()).map(|m| nu.get(v, toposval::contexts::Mask(m)).clone()).collect())
        .collect();
    let target = table[v1].iter().position(|set| set.len() == 1).expect("a value holding only the bottom");
    table[v1][target].remove(&triv);
    let edited = MorphismSetValuation::from_table(&poset, table)?;
    let (_, report) = reconstruct_from_supports(&poset, &edited)?;
    println!("edited table: condition (i) {} rebuilt equal {}", report.condition_i, report.equal);
    if let Some(w) = report.witness {
        println!("  first difference at {} / {:?} {}", w.v1, w.v2, w.mask);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> toposval::Result<()> {
    run()
}
