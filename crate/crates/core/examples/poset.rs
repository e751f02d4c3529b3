// Build the three-context chain in dimension 3, list its order, then show how
// propositions of the finest context coarse-grain to the coarser ones.
//
//     cargo run --example poset

use toposval::contexts::{mask_hex, Context, ContextPoset, Mask};
use toposval::linalg::CVector;
use toposval::presheaves::coarse_grain;

pub fn run() -> toposval::Result<()> {
    let basis: Vec<CVector> = (0..3).map(|i| CVector::from_fn(3, |r, _| ((r == i) as u8 as f64).into())).collect();
    let fine = Context::from_partition("V1", &basis, &[vec![0], vec![1], vec![2]])?;
    let coarse = Context::from_partition("V2", &basis, &[vec![0], vec![1, 2]])?;
    let poset = ContextPoset::build(vec![fine, coarse], true)?;

    for (lo, up) in poset.covers() {
        println!("{} < {}", poset.context(lo).id(), poset.context(up).id());
    }
    let top = poset.index_of("V1")?;
    let n = poset.context(top).atom_count();
    for lower in poset.below(top).filter(|&v| v != top) {
        let m = poset.context(lower).atom_count();
        println!("coarse-graining {} -> {}", poset.context(top).id(), poset.context(lower).id());
        for mask in Mask::all(n) {
            let g = coarse_grain(&poset, lower, top, mask)?;
            println!("  {} -> {}", mask_hex(mask.bits(), n), mask_hex(g.bits(), m));
        }
    }

    // a second basis sharing one vector: its meet with V1 is a new context
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rotated: Vec<CVector> = vec![
        basis[0].clone(),
        CVector::from_vec(vec![0.0.into(), s.into(), s.into()]),
        CVector::from_vec(vec![0.0.into(), s.into(), (-s).into()]),
    ];
    let other = Context::from_partition("W", &rotated, &[vec![0], vec![1], vec![2]])?;
    let fine = poset.context(top).clone();
    let closed = ContextPoset::build(vec![fine, other], true)?.close_under_meets()?;
    let ids: Vec<&str> = closed.contexts().iter().map(|c| c.id()).collect();
    println!("closed under meets: {ids:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> toposval::Result<()> {
    run()
}
