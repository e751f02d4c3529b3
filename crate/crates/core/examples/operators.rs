// Operators related by functions B = f(A): arrows are discovered from the
// matrices, coarse-graining is computed two ways, and the certainty
// valuation is compared with its support characterisation.
//
//     cargo run --example operators

use toposval::contexts::Mask;
use toposval::linalg::{HermitianOperator, StateVector};
use toposval::ocat::{characterize_check, func_subset_check, ODecomposition, OCategory, State};

pub fn run() -> toposval::Result<()> {
    let a = HermitianOperator::diag(&[-1.0, 0.0, 1.0, 2.0]);
    let square = HermitianOperator::diag(&[1.0, 0.0, 1.0, 4.0]);
    let sign = HermitianOperator::diag(&[-1.0, 0.0, 1.0, 1.0]);
    let cat = OCategory::new(vec![
        ODecomposition::new("A", a)?,
        ODecomposition::new("A^2", square)?,
        ODecomposition::new("sgn A", sign)?,
    ])?;
    for b in 0..cat.len() {
        for t in cat.sources(b) {
            if t != b {
                println!("{} = f({}) with f = {:?}", cat.op(t).id(), cat.op(b).id(), cat.arrow(t, b).map(|f| &f.values));
            }
        }
    }
    let psi = StateVector::normalized(toposval::linalg::CVector::from_vec(vec![
        0.0.into(),
        0.0.into(),
        1.0.into(),
        1.0.into(),
    ]))?;
    let state = State::Pure(psi);
    for delta in [Mask(0b1100), Mask(0b0100), Mask(0b0011)] {
        let r = characterize_check(&state, 0, delta, &cat)?;
        println!("delta {:?}: certain at {:?}, characterisation agrees {}", cat.op(0).values(delta), r.definitional, r.equal);
    }
    println!("supports push forward exactly: {}", func_subset_check(&state, 0, &cat)?.equality_holds);
    Ok(())
}

#[allow(dead_code)]
fn main() -> toposval::Result<()> {
    run()
}
