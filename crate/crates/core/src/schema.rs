//! Valuations defined from an interval assignment `a` and a binary relation
//! `R`: a stage `V2` belongs to the value of `P` at `V1` when
//! `a(V2) R (P carried down to V2)`.
//!
//! `P` is carried down either by coarse-graining (lattice elements) or by
//! restriction (character sets). The survey checks each clause of a
//! generalised valuation directly on the tabulated valuation and again through
//! its characterization in terms of `R`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use crate::contexts::{CharSet, Mask};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::ocat::OCategory;
use crate::presheaves::{GlobalElement, SubobjectSigma};
use crate::site::{pullback_members, Site};
use crate::valuations::{check_definition3, check_func, check_sievehood, Check, MorphismSetValuation, Witness, WitnessAt};

/// Random relation: one seeded boolean table per stage, indexed by
/// `(left << n) | right` for a stage with `n` atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTable {
    pub seed: u64,
    tables: Vec<(usize, Vec<bool>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    Leq,
    Geq,
    Eq,
    NonzeroProduct,
    AlwaysTrue,
    AlwaysFalse,
    Table(RelationTable),
}

impl Relation {
    pub fn builtins() -> Vec<Relation> {
        vec![
            Relation::Leq,
            Relation::Geq,
            Relation::Eq,
            Relation::NonzeroProduct,
            Relation::AlwaysTrue,
            Relation::AlwaysFalse,
        ]
    }

    pub fn parse(name: &str) -> Result<Relation> {
        Ok(match name {
            "leq" | "<=" | "subset" => Relation::Leq,
            "geq" | ">=" | "superset" => Relation::Geq,
            "eq" | "=" => Relation::Eq,
            "nonzero-product" | "meets" => Relation::NonzeroProduct,
            "always-true" => Relation::AlwaysTrue,
            "always-false" => Relation::AlwaysFalse,
            other => {
                return Err(Error::Input(format!(
                    "unknown relation `{other}` (expected leq, geq, eq, nonzero-product, always-true, always-false)"
                )))
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Relation::Leq => "leq".into(),
            Relation::Geq => "geq".into(),
            Relation::Eq => "eq".into(),
            Relation::NonzeroProduct => "nonzero-product".into(),
            Relation::AlwaysTrue => "always-true".into(),
            Relation::AlwaysFalse => "always-false".into(),
            Relation::Table(t) => format!("random-{}", t.seed),
        }
    }

    /// Seeded random table over every stage of the site.
    pub fn random<S: Site + ?Sized>(site: &S, seed: u64) -> Relation {
        let mut rng = fixtures::rng(seed);
        let tables = (0..site.stage_count())
            .map(|v| {
                let n = site.atom_count(v);
                (n, (0..1usize << (2 * n)).map(|_| rng.random_bool(0.5)).collect())
            })
            .collect();
        Relation::Table(RelationTable { seed, tables })
    }

    /// `left R right` at a stage; both arguments are bit sets of that stage.
    pub fn holds(&self, stage: usize, left: u32, right: u32) -> bool {
        match self {
            Relation::Leq => left & !right == 0,
            Relation::Geq => right & !left == 0,
            Relation::Eq => left == right,
            Relation::NonzeroProduct => left & right != 0,
            Relation::AlwaysTrue => true,
            Relation::AlwaysFalse => false,
            Relation::Table(t) => {
                let (n, table) = &t.tables[stage];
                table[((left as usize) << n) | right as usize]
            }
        }
    }
}

/// How a lattice element at `V1` is carried down to `V2 <= V1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    /// Coarse-graining of projectors.
    Lattice,
    /// Restriction of character sets.
    Spectral,
}

fn carry<S: Site + ?Sized>(site: &S, route: Route, lower: usize, upper: usize, bits: u32) -> Result<u32> {
    Ok(match route {
        Route::Lattice => site.coarse_grain(lower, upper, Mask(bits))?.bits(),
        Route::Spectral => site.restrict_chars(lower, upper, CharSet(bits))?.bits(),
    })
}

/// Value of the schema at `(v1, p)` computed pointwise.
pub fn schema_members<S: Site + ?Sized>(
    site: &S,
    a: &[u32],
    relation: &Relation,
    route: Route,
    v1: usize,
    p: Mask,
) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for v2 in site.below(v1) {
        if relation.holds(v2, a[v2], carry(site, route, v2, v1, p.bits())?) {
            out.insert(v2);
        }
    }
    Ok(out)
}

fn schema_valuation<S: Site + ?Sized>(site: &S, a: &[u32], relation: &Relation, route: Route) -> Result<MorphismSetValuation> {
    if a.len() != site.stage_count() {
        return Err(Error::AssignmentLength {
            expected: site.stage_count(),
            found: a.len(),
        });
    }
    MorphismSetValuation::from_rule(site, |v1, p| schema_members(site, a, relation, route, v1, p))
}

/// Schema over a global element of the coarse-graining presheaf.
#[allow(non_snake_case)]
pub fn alpha_a_R<S: Site + ?Sized>(site: &S, a: &GlobalElement, relation: &Relation) -> Result<MorphismSetValuation> {
    let bits: Vec<u32> = a.values().iter().map(|m| m.bits()).collect();
    schema_valuation(site, &bits, relation, Route::Lattice)
}

/// Schema over a subobject of the spectral presheaf.
#[allow(non_snake_case)]
pub fn alpha_a_R_sigma<S: Site + ?Sized>(site: &S, a: &SubobjectSigma, relation: &Relation) -> Result<MorphismSetValuation> {
    let bits: Vec<u32> = a.values().iter().map(|m| m.bits()).collect();
    schema_valuation(site, &bits, relation, Route::Spectral)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyStatus {
    /// `"holds-exhaustively"` or `"witness-of-failure"`.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// The characterization in terms of the relation agrees with the direct check.
    pub characterization_agrees: bool,
    /// The relation-level sufficient condition, where one is stated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sufficient_condition: Option<bool>,
}

impl PropertyStatus {
    pub fn holds(&self) -> bool {
        self.status == HOLDS
    }

    fn new(direct: Check, characterization: bool, sufficient: Option<bool>) -> Self {
        PropertyStatus {
            status: if direct.holds { HOLDS } else { FAILS },
            characterization_agrees: characterization == direct.holds,
            sufficient_condition: sufficient,
            witness: direct.witness,
        }
    }
}

const HOLDS: &str = "holds-exhaustively";
const FAILS: &str = "witness-of-failure";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Regularity {
    pub nonempty: bool,
    pub tight: bool,
    /// Arrows map spectra onto spectra (operator category only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectra_onto: Option<bool>,
}

impl Regularity {
    pub fn holds(&self) -> bool {
        self.nonempty && self.tight && self.spectra_onto.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyReport {
    pub relation: String,
    pub route: Route,
    pub sievehood: PropertyStatus,
    pub func: PropertyStatus,
    pub null: PropertyStatus,
    pub monotone: PropertyStatus,
    pub exclusivity: PropertyStatus,
    pub unit: PropertyStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularity: Option<Regularity>,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.statuses().iter().all(|s| s.holds())
    }

    pub fn characterizations_agree(&self) -> bool {
        self.statuses().iter().all(|s| s.characterization_agrees)
    }

    /// Every stated sufficient condition that holds is followed by its property.
    pub fn sufficient_conditions_sound(&self) -> bool {
        self.statuses()
            .iter()
            .all(|s| s.sufficient_condition != Some(true) || s.holds())
    }

    fn statuses(&self) -> [&PropertyStatus; 6] {
        [&self.sievehood, &self.func, &self.null, &self.monotone, &self.exclusivity, &self.unit]
    }
}

/// Runs `f` over every `(v1, p)` until it reports a failure.
fn all_pairs<S, F>(site: &S, mut f: F) -> Result<bool>
where
    S: Site + ?Sized,
    F: FnMut(usize, Mask) -> Result<bool>,
{
    for v1 in 0..site.stage_count() {
        for p in site.masks(v1)? {
            if !f(v1, p)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn survey<S: Site + ?Sized>(site: &S, a: &[u32], relation: &Relation, route: Route) -> Result<PropertyReport> {
    let alpha = schema_valuation(site, a, relation, route)?;
    let rel = |v: usize, l: u32, r: u32| relation.holds(v, l, r);
    let down = |lo: usize, up: usize, bits: u32| carry(site, route, lo, up, bits);
    let d3 = check_definition3(site, &alpha)?;

    // (i) stable under coarse-graining
    let sieve_char = all_pairs(site, |v1, p| {
        for v2 in site.below(v1) {
            if rel(v2, a[v2], down(v2, v1, p.bits())?) {
                for v3 in site.below(v2) {
                    if !rel(v3, a[v3], down(v3, v1, p.bits())?) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    })?;
    let mut sieve_sufficient = true;
    'suff: for v2 in 0..site.stage_count() {
        for y in site.masks(v2)? {
            if rel(v2, a[v2], y.bits()) {
                for v3 in site.below(v2) {
                    if !rel(v3, a[v3], down(v3, v2, y.bits())?) {
                        sieve_sufficient = false;
                        break 'suff;
                    }
                }
            }
        }
    }
    let sievehood = PropertyStatus::new(check_sievehood(site, &alpha)?, sieve_char, Some(sieve_sufficient));

    // (ii) FUNC; the relation-level statement is the same equation
    let func_direct = check_func(site, &alpha)?;
    let func_char = all_pairs(site, |v1, p| {
        for v2 in site.below(v1) {
            let coarse = site.coarse_grain(v2, v1, p)?;
            let lhs = schema_members(site, a, relation, route, v2, coarse)?;
            let rhs = pullback_members(site, v2, &schema_members(site, a, relation, route, v1, p)?);
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    let func = PropertyStatus::new(func_direct, func_char, None);

    // (iii) no stage relates to the null element
    let null_char = (0..site.stage_count()).all(|v| !rel(v, a[v], 0));
    let null = PropertyStatus::new(d3.null, null_char, None);

    // (iv) isotone under coarse-graining
    let mono_char = all_pairs(site, |v1, p| {
        for q in site.masks(v1)?.into_iter().filter(|&q| p.is_subset(q)) {
            for v2 in site.below(v1) {
                if rel(v2, a[v2], down(v2, v1, p.bits())?) && !rel(v2, a[v2], down(v2, v1, q.bits())?) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })?;
    let mut mono_sufficient = true;
    'mono: for v2 in 0..site.stage_count() {
        let masks = site.masks(v2)?;
        for &s in &masks {
            if !rel(v2, a[v2], s.bits()) {
                continue;
            }
            for &t in masks.iter().filter(|&&t| s.is_subset(t)) {
                if !rel(v2, a[v2], t.bits()) {
                    mono_sufficient = false;
                    break 'mono;
                }
            }
        }
    }
    let monotone = PropertyStatus::new(d3.monotone, mono_char, Some(mono_sufficient));

    // (v) exclusivity, in the relation form
    let excl_char = all_pairs(site, |v1, p| {
        let all_p = site
            .below(v1)
            .into_iter()
            .map(|v2| Ok(rel(v2, a[v2], down(v2, v1, p.bits())?)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|x| x);
        if !all_p {
            return Ok(true);
        }
        for q in site.masks(v1)?.into_iter().filter(|q| q.intersection(p).is_empty()) {
            let mut refuted = false;
            for v3 in site.below(v1) {
                if !rel(v3, a[v3], down(v3, v1, q.bits())?) {
                    refuted = true;
                    break;
                }
            }
            if !refuted {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    let exclusivity = PropertyStatus::new(d3.exclusivity, excl_char, None);

    // (vi) every stage relates to its unit element
    let unit_char = (0..site.stage_count()).all(|v| rel(v, a[v], site.full_mask(v).bits()));
    let unit = PropertyStatus::new(d3.unit, unit_char, None);

    Ok(PropertyReport {
        relation: relation.name(),
        route,
        sievehood,
        func,
        null,
        monotone,
        exclusivity,
        unit,
        regularity: None,
    })
}

/// The six-property survey for the schema over a global element.
pub fn survey_properties<S: Site + ?Sized>(site: &S, a: &GlobalElement, relation: &Relation) -> Result<PropertyReport> {
    let bits: Vec<u32> = a.values().iter().map(|m| m.bits()).collect();
    survey(site, &bits, relation, Route::Lattice)
}

/// The survey for the schema over a subobject of the spectral presheaf, with
/// the regularity conditions (nonempty, tight) reported alongside.
pub fn survey_properties_sigma<S: Site + ?Sized>(
    site: &S,
    a: &SubobjectSigma,
    relation: &Relation,
) -> Result<PropertyReport> {
    let bits: Vec<u32> = a.values().iter().map(|m| m.bits()).collect();
    let mut report = survey(site, &bits, relation, Route::Spectral)?;
    report.regularity = Some(Regularity {
        nonempty: a.values().iter().all(|s| !s.is_empty()),
        tight: a.is_tight(site)?,
        spectra_onto: None,
    });
    Ok(report)
}

/// The survey on the operator category for an assignment of eigenvalue subsets
/// (typically elementary supports), carried down by the eigenvalue maps.
pub fn survey_properties_o(cat: &OCategory, a: &[Mask], relation: &Relation) -> Result<PropertyReport> {
    let chars: Vec<CharSet> = a.iter().map(|m| CharSet(m.bits())).collect();
    let tight = crate::presheaves::restriction_violation(cat, &chars, true)?.is_none();
    let bits: Vec<u32> = a.iter().map(|m| m.bits()).collect();
    let mut report = survey(cat, &bits, relation, Route::Spectral)?;
    report.regularity = Some(Regularity {
        nonempty: a.iter().all(|m| !m.is_empty()),
        tight,
        spectra_onto: Some(cat.spectra_regular()),
    });
    Ok(report)
}

/// Which clause a witness refutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Sievehood,
    Func,
    Null,
    Monotone,
    Exclusivity,
    Unit,
}

/// Re-derives the failure a witness records, recomputing the schema values
/// pointwise instead of reading the table.
pub fn replay_witness<S: Site + ?Sized>(
    site: &S,
    a: &[u32],
    relation: &Relation,
    route: Route,
    property: Property,
    at: WitnessAt,
) -> Result<bool> {
    let members = |v: usize, m: Mask| schema_members(site, a, relation, route, v, m);
    let is_true = |v: usize, m: Mask| -> Result<bool> { Ok(members(v, m)?.len() == site.below(v).len()) };
    Ok(match property {
        Property::Sievehood => {
            let Some(missing) = at.v2 else { return Ok(false) };
            let value = members(at.v1, at.mask)?;
            !value.contains(&missing) && value.iter().any(|&m| site.leq(missing, m))
        }
        Property::Func => {
            let Some(v2) = at.v2 else { return Ok(false) };
            let coarse = site.coarse_grain(v2, at.v1, at.mask)?;
            members(v2, coarse)? != pullback_members(site, v2, &members(at.v1, at.mask)?)
        }
        Property::Null => at.mask.is_empty() && !members(at.v1, at.mask)?.is_empty(),
        Property::Monotone => {
            let Some(q) = at.other else { return Ok(false) };
            at.mask.is_subset(q) && !members(at.v1, at.mask)?.is_subset(&members(at.v1, q)?)
        }
        Property::Exclusivity => {
            let Some(q) = at.other else { return Ok(false) };
            at.mask.intersection(q).is_empty() && is_true(at.v1, at.mask)? && is_true(at.v1, q)?
        }
        Property::Unit => at.mask == site.full_mask(at.v1) && !is_true(at.v1, at.mask)?,
    })
}

impl PropertyReport {
    /// Replays every witness in the report.
    pub fn replay_all<S: Site + ?Sized>(&self, site: &S, a: &[u32], relation: &Relation) -> Result<bool> {
        let pairs = [
            (Property::Sievehood, &self.sievehood),
            (Property::Func, &self.func),
            (Property::Null, &self.null),
            (Property::Monotone, &self.monotone),
            (Property::Exclusivity, &self.exclusivity),
            (Property::Unit, &self.unit),
        ];
        for (prop, status) in pairs {
            if let Some(w) = &status.witness {
                if !replay_witness(site, a, relation, self.route, prop, w.at)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::TRIVIAL_ID;
    use crate::linalg::{real_diag, DensityMatrix};
    use crate::valuations::{alpha_from_global_element, nu_rho, supports};

    fn state_supports(p: &crate::contexts::ContextPoset, w: &[f64]) -> GlobalElement {
        let nu = nu_rho(p, &DensityMatrix::new(real_diag(w)).unwrap()).unwrap();
        let s = supports(p, &nu).unwrap().into_iter().map(Option::unwrap).collect();
        GlobalElement::new(p, s).unwrap()
    }

    #[test]
    fn leq_matches_global_element_valuation() {
        let p = fixtures::fix_a();
        let a = state_supports(&p, &[0.2, 0.3, 0.5]);
        assert_eq!(alpha_a_R(&p, &a, &Relation::Leq).unwrap(), alpha_from_global_element(&p, a.values()).unwrap());
    }

    #[test]
    fn leq_with_positive_element_has_all_properties() {
        let p = fixtures::fix_a();
        let a = state_supports(&p, &[0.0, 1.0, 0.0]);
        let r = survey_properties(&p, &a, &Relation::Leq).unwrap();
        assert!(r.all_hold() && r.characterizations_agree() && r.sufficient_conditions_sound(), "{r:?}");
    }

    #[test]
    fn equality_relation() {
        let p = fixtures::fix_a();
        let a = state_supports(&p, &[0.0, 1.0, 0.0]);
        let alpha = alpha_a_R(&p, &a, &Relation::Eq).unwrap();
        let (v1, v2) = (p.index_of("V1").unwrap(), p.index_of("V2").unwrap());
        let own = a.get(v1);
        assert_eq!(alpha.get(v1, own).len(), 3);
        // a(V1) is a single atom, so its strict enlargements miss V1 but still reach V2
        let bigger = p.full_mask(v1).intersection(Mask(!own.bits())).iter().next().map(|i| own.union(Mask::single(i))).unwrap();
        let value = alpha.get(v1, bigger);
        assert!(!value.contains(&v1));
        assert_eq!(value.contains(&v2), p.coarse_grain(v2, v1, bigger).unwrap() == a.get(v2));
        let r = survey_properties(&p, &a, &Relation::Eq).unwrap();
        assert!(r.func.holds() && r.characterizations_agree());
        // coarse-graining composes, so equality with a global element is always downward closed
        assert!(r.sievehood.holds());
    }

    #[test]
    fn equality_on_loose_subobject_breaks_sievehood() {
        let p = fixtures::fix_a();
        let (v1, v2) = (p.index_of("V1").unwrap(), p.index_of("V2").unwrap());
        let ge = state_supports(&p, &[0.0, 1.0, 0.0]);
        let mut values = crate::presheaves::subobject_from_global_element(&p, &ge).unwrap().values().to_vec();
        values[v2] = CharSet::full(p.atom_count(v2));
        let loose = SubobjectSigma::new(&p, values).unwrap();
        assert!(!loose.is_tight(&p).unwrap());
        let r = survey_properties_sigma(&p, &loose, &Relation::Eq).unwrap();
        assert!(r.func.holds());
        assert!(!r.sievehood.holds() && r.characterizations_agree());
        let w = r.sievehood.witness.as_ref().unwrap();
        assert_eq!((w.at.v1, w.at.v2), (v1, Some(v2)));
        let bits: Vec<u32> = loose.values().iter().map(|m| m.bits()).collect();
        assert!(r.replay_all(&p, &bits, &Relation::Eq).unwrap());
    }

    #[test]
    fn always_true_violates_null() {
        let p = fixtures::fix_a();
        let a = GlobalElement::unit(&p);
        let alpha = alpha_a_R(&p, &a, &Relation::AlwaysTrue).unwrap();
        for v in 0..p.len() {
            assert_eq!(alpha.get(v, Mask::EMPTY).len(), p.below(v).count());
        }
        let r = survey_properties(&p, &a, &Relation::AlwaysTrue).unwrap();
        assert!(!r.null.holds());
    }

    #[test]
    fn null_element_in_assignment_breaks_null_clause() {
        let p = fixtures::fix_a();
        let a = GlobalElement::new(&p, vec![Mask::EMPTY; 3]).unwrap();
        let r = survey_properties(&p, &a, &Relation::Leq).unwrap();
        assert!(!r.null.holds());
        assert!(r.null.characterization_agrees);
    }

    #[test]
    fn func_for_random_relations() {
        let p = fixtures::fix_a();
        let a = state_supports(&p, &[0.5, 0.5, 0.0]);
        for seed in 0..10 {
            let rel = Relation::random(&p, seed);
            let r = survey_properties(&p, &a, &rel).unwrap();
            assert!(r.func.holds());
            assert!(r.characterizations_agree());
        }
    }

    #[test]
    fn sigma_variant() {
        let p = fixtures::fix_a();
        let a = crate::presheaves::subobject_from_global_element(&p, &state_supports(&p, &[0.1, 0.0, 0.9])).unwrap();
        let r = survey_properties_sigma(&p, &a, &Relation::Leq).unwrap();
        assert!(r.all_hold() && r.regularity.as_ref().unwrap().holds(), "{r:?}");

        let mut values = a.values().to_vec();
        values[p.index_of(TRIVIAL_ID).unwrap()] = CharSet::EMPTY;
        values[p.index_of("V2").unwrap()] = CharSet::EMPTY;
        values[p.index_of("V1").unwrap()] = CharSet::EMPTY;
        let empty = SubobjectSigma::new(&p, values).unwrap();
        let r = survey_properties_sigma(&p, &empty, &Relation::Leq).unwrap();
        assert!(!r.null.holds());
    }

    #[test]
    fn operator_variant_with_supports() {
        let mut rng = fixtures::rng(17);
        for _ in 0..30 {
            let draw = crate::ocat::random_o_draw(&mut rng);
            let a = crate::ocat::support_assignment(&draw.state, &draw.category).unwrap();
            let r = survey_properties_o(&draw.category, &a, &Relation::Leq).unwrap();
            let reg = r.regularity.as_ref().unwrap();
            assert!(reg.tight && reg.nonempty);
            if reg.holds() {
                assert!(r.all_hold(), "{r:?}");
            }
            assert!(r.func.holds() && r.characterizations_agree());
        }
    }

    #[test]
    fn parse_names() {
        for r in Relation::builtins() {
            assert_eq!(Relation::parse(&r.name()).unwrap(), r);
        }
        assert!(Relation::parse("bogus").is_err());
    }
}
