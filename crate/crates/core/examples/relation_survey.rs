// Valuations built from a global element and a binary relation. The order
// relation gives a well-behaved valuation; other relations break some of the
// six properties, and every failure comes with a replayable witness.
//
//     cargo run --example relation_survey

use toposval::contexts::CharSet;
use toposval::fixtures;
use toposval::linalg::{real_diag, DensityMatrix};
use toposval::presheaves::{subobject_from_global_element, GlobalElement, SubobjectSigma};
use toposval::schema::{survey_properties, survey_properties_sigma, PropertyReport, Relation};
use toposval::valuations::{nu_rho, supports};

fn line(label: &str, r: &PropertyReport) {
    let cells = [
        ("sieve", r.sievehood.holds()),
        ("func", r.func.holds()),
        ("null", r.null.holds()),
        ("monotone", r.monotone.holds()),
        ("exclusive", r.exclusivity.holds()),
        ("unit", r.unit.holds()),
    ];
    let row: Vec<String> = cells.iter().map(|(k, v)| format!("{k}={}", if *v { "y" } else { "n" })).collect();
    println!("{label:24} {}", row.join(" "));
}

pub fn run() -> toposval::Result<()> {
    let poset = fixtures::fix_a();
    let rho = DensityMatrix::new(real_diag(&[0.0, 1.0, 0.0]))?;
    let nu = nu_rho(&poset, &rho)?;
    let a = GlobalElement::new(&poset, supports(&poset, &nu)?.into_iter().flatten().collect())?;
    for rel in Relation::builtins().into_iter().chain([Relation::random(&poset, 7)]) {
        line(&rel.name(), &survey_properties(&poset, &a, &rel)?);
    }

    // equality against a subobject that keeps every character at V2
    let tight = subobject_from_global_element(&poset, &a)?;
    let v2 = poset.index_of("V2")?;
    let mut values = tight.values().to_vec();
    values[v2] = CharSet::full(poset.context(v2).atom_count());
    let loose = SubobjectSigma::new(&poset, values)?;
    let report = survey_properties_sigma(&poset, &loose, &Relation::Eq)?;
    line("eq (loose subobject)", &report);
    if let Some(w) = &report.sievehood.witness {
        println!("  sievehood witness {} {:?} {}", w.v1, w.v2, w.mask);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> toposval::Result<()> {
    run()
}
