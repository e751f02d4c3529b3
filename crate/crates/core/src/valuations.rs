//! Sieve-valued valuations, the state-induced valuations, truth sets,
//! supports and intervals, and exhaustive checkers for the two
//! correspondence theorems between sieve-valued and interval valuations.
//!
//! A valuation is stored as a table `stage -> mask -> set of stages below`.
//! All checks are exhaustive over the finite site.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;

use serde::Serialize;

use crate::contexts::{mask_hex, CharSet, Mask};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::linalg::{certain, DensityMatrix, CMatrix, STATE_TOL};
use crate::presheaves::matching_violation;
use crate::site::{pullback_members, sieve_violation, Sieve, Site};

/// Slack on the threshold of the probability-r valuations.
pub const THRESHOLD_SLACK: f64 = 1e-10;

/// Assignment of a set of arrows into each stage to each lattice element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismSetValuation {
    version: u64,
    table: Vec<Vec<BTreeSet<usize>>>,
}

impl MorphismSetValuation {
    /// Tabulates `rule(stage, mask)` over every lattice element; members must
    /// lie below the stage.
    pub fn from_rule<S, F>(site: &S, mut rule: F) -> Result<Self>
    where
        S: Site + ?Sized,
        F: FnMut(usize, Mask) -> Result<BTreeSet<usize>>,
    {
        let mut table = Vec::with_capacity(site.stage_count());
        for v in 0..site.stage_count() {
            let row = site
                .masks(v)?
                .into_iter()
                .map(|m| rule(v, m))
                .collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        Self::from_table(site, table)
    }

    pub fn from_table<S: Site + ?Sized>(site: &S, table: Vec<Vec<BTreeSet<usize>>>) -> Result<Self> {
        if table.len() != site.stage_count() {
            return Err(Error::AssignmentLength {
                expected: site.stage_count(),
                found: table.len(),
            });
        }
        for (v, row) in table.iter().enumerate() {
            if row.len() != 1usize << site.atom_count(v) {
                return Err(Error::Input(format!(
                    "table row for `{}` has {} entries, expected {}",
                    site.stage_name(v),
                    row.len(),
                    1usize << site.atom_count(v)
                )));
            }
            for members in row {
                if let Some(&m) = members.iter().find(|&&m| m >= site.stage_count() || !site.leq(m, v)) {
                    return Err(Error::NotIncluded {
                        lower: format!("#{m}"),
                        upper: site.stage_name(v).to_string(),
                    });
                }
            }
        }
        Ok(MorphismSetValuation {
            version: site.version(),
            table,
        })
    }

    pub fn get(&self, stage: usize, mask: Mask) -> &BTreeSet<usize> {
        &self.table[stage][mask.bits() as usize]
    }

    pub fn stage_count(&self) -> usize {
        self.table.len()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Whether the value is the principal sieve on `stage`.
    pub fn is_true<S: Site + ?Sized>(&self, site: &S, stage: usize, mask: Mask) -> bool {
        let members = self.get(stage, mask);
        members.len() == site.below(stage).len()
    }

    pub fn check_site<S: Site + ?Sized>(&self, site: &S) -> Result<()> {
        if self.version != site.version() || self.table.len() != site.stage_count() {
            return Err(Error::StaleSieve);
        }
        Ok(())
    }

    /// `{stage -> {mask -> [member names]}}`, keys in numeric mask order.
    pub fn dump<S: Site + ?Sized>(&self, site: &S) -> BTreeMap<String, BTreeMap<String, Vec<String>>> {
        let mut out = BTreeMap::new();
        for (v, row) in self.table.iter().enumerate() {
            let n = site.atom_count(v);
            let entries = row
                .iter()
                .enumerate()
                .map(|(bits, members)| {
                    (
                        mask_hex(bits as u32, n),
                        members.iter().map(|&m| site.stage_name(m).to_string()).collect(),
                    )
                })
                .collect();
            out.insert(site.stage_name(v).to_string(), entries);
        }
        out
    }
}

/// A valuation whose every value is a sieve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation {
    inner: MorphismSetValuation,
}

impl Valuation {
    pub fn new<S: Site + ?Sized>(site: &S, inner: MorphismSetValuation) -> Result<Self> {
        inner.check_site(site)?;
        for (v, row) in inner.table.iter().enumerate() {
            for (bits, members) in row.iter().enumerate() {
                if let Some((m, w)) = sieve_violation(site, v, members) {
                    return Err(Error::NotASieve {
                        stage: site.stage_name(v).to_string(),
                        reason: format!(
                            "mask {}: `{}` below member `{}` is missing",
                            mask_hex(bits as u32, site.atom_count(v)),
                            site.stage_name(w),
                            site.stage_name(m)
                        ),
                    });
                }
            }
        }
        Ok(Valuation { inner })
    }

    pub fn evaluate<S: Site + ?Sized>(&self, site: &S, stage: usize, mask: Mask) -> Result<Sieve> {
        self.inner.check_site(site)?;
        Sieve::new(site, stage, self.inner.get(stage, mask).clone())
    }

    pub fn into_inner(self) -> MorphismSetValuation {
        self.inner
    }
}

impl Deref for Valuation {
    type Target = MorphismSetValuation;

    fn deref(&self) -> &MorphismSetValuation {
        &self.inner
    }
}

fn check_state_dim<S: Site + ?Sized>(site: &S, rho: &DensityMatrix) -> Result<()> {
    if site.stage_count() > 0 {
        let dim = site.projector(0, Mask::EMPTY).dim();
        if dim != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.dim(),
            });
        }
    }
    Ok(())
}

/// Per-stage, per-mask table of a predicate on projectors.
fn tabulate<S, F>(site: &S, mut f: F) -> Result<Vec<Vec<bool>>>
where
    S: Site + ?Sized,
    F: FnMut(usize, Mask) -> Result<bool>,
{
    (0..site.stage_count())
        .map(|v| site.masks(v)?.into_iter().map(|m| f(v, m)).collect())
        .collect()
}

fn valuation_from_predicate<S: Site + ?Sized>(site: &S, holds: &[Vec<bool>]) -> Result<MorphismSetValuation> {
    MorphismSetValuation::from_rule(site, |v1, p| {
        let mut members = BTreeSet::new();
        for v2 in site.below(v1) {
            let coarse = site.coarse_grain(v2, v1, p)?;
            if holds[v2][coarse.bits() as usize] {
                members.insert(v2);
            }
        }
        Ok(members)
    })
}

/// The valuation of a state: a stage below belongs to the value of `P` when
/// the coarse-graining of `P` there has probability one.
pub fn nu_rho<S: Site + ?Sized>(site: &S, rho: &DensityMatrix) -> Result<Valuation> {
    check_state_dim(site, rho)?;
    let certain_table = tabulate(site, |v, m| certain(rho, &site.projector(v, m)))?;
    let table = valuation_from_predicate(site, &certain_table)?;
    Valuation::new(site, table)
}

/// Probability-r variant: membership when the coarse-grained probability is at
/// least `r` (with slack [`THRESHOLD_SLACK`]).
pub fn nu_rho_r<S: Site + ?Sized>(site: &S, rho: &DensityMatrix, r: f64) -> Result<MorphismSetValuation> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::ThresholdOutOfRange(r));
    }
    check_state_dim(site, rho)?;
    let table = tabulate(site, |v, m| Ok(rho.probability(&site.projector(v, m))? >= r - THRESHOLD_SLACK))?;
    valuation_from_predicate(site, &table)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruthSet {
    pub stage: usize,
    pub members: Vec<Mask>,
}

/// Lattice elements sent to the principal sieve.
pub fn truth_set<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation, stage: usize) -> Result<TruthSet> {
    alpha.check_site(site)?;
    Ok(TruthSet {
        stage,
        members: site
            .masks(stage)?
            .into_iter()
            .filter(|&m| alpha.is_true(site, stage, m))
            .collect(),
    })
}

/// Infimum of the truth set; `None` when the truth set is empty.
pub fn support<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation, stage: usize) -> Result<Option<Mask>> {
    let t = truth_set(site, alpha, stage)?;
    Ok(t.members.into_iter().reduce(Mask::intersection))
}

/// Characters sending every member of the truth set to 1. With an empty truth
/// set this is the whole spectrum.
pub fn interval<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation, stage: usize) -> Result<CharSet> {
    let t = truth_set(site, alpha, stage)?;
    Ok(t
        .members
        .into_iter()
        .fold(CharSet::full(site.atom_count(stage)), |acc, m| acc.intersection(CharSet(m.bits()))))
}

/// Support of a state at a stage read off the atoms: those with nonzero weight.
pub fn state_support<S: Site + ?Sized>(site: &S, rho: &DensityMatrix, stage: usize) -> Result<Mask> {
    let mut mask = Mask::EMPTY;
    for i in 0..site.atom_count(stage) {
        if rho.probability(&site.projector(stage, Mask::single(i)))? > STATE_TOL {
            mask.insert(i);
        }
    }
    Ok(mask)
}

pub fn supports<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation) -> Result<Vec<Option<Mask>>> {
    (0..site.stage_count()).map(|v| support(site, alpha, v)).collect()
}

pub fn intervals<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation) -> Result<Vec<CharSet>> {
    (0..site.stage_count()).map(|v| interval(site, alpha, v)).collect()
}

/// Location of a failed check. Masks are rendered for the stage they live at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub v1: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v2: Option<String>,
    pub mask: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_mask: Option<String>,
    pub note: String,
    #[serde(skip)]
    pub at: WitnessAt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WitnessAt {
    pub v1: usize,
    pub v2: Option<usize>,
    pub mask: Mask,
    pub other: Option<Mask>,
}

impl Witness {
    pub fn new<S: Site + ?Sized>(
        site: &S,
        at: WitnessAt,
        note: impl Into<String>,
    ) -> Self {
        let n = site.atom_count(at.v1);
        Witness {
            v1: site.stage_name(at.v1).to_string(),
            v2: at.v2.map(|v| site.stage_name(v).to_string()),
            mask: mask_hex(at.mask.bits(), n),
            other_mask: at.other.map(|m| mask_hex(m.bits(), n)),
            note: note.into(),
            at,
        }
    }
}

fn at(v1: usize, v2: Option<usize>, mask: Mask, other: Option<Mask>) -> WitnessAt {
    WitnessAt { v1, v2, mask, other }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Check {
    pub fn pass() -> Self {
        Check { holds: true, witness: None }
    }

    pub fn fail(witness: Witness) -> Self {
        Check {
            holds: false,
            witness: Some(witness),
        }
    }

    fn from_option(w: Option<Witness>) -> Self {
        w.map_or_else(Check::pass, Check::fail)
    }
}

/// Runs `probe` over every `(v1, mask)` and returns the first witness.
fn first_witness<S, F>(site: &S, mut probe: F) -> Result<Option<Witness>>
where
    S: Site + ?Sized,
    F: FnMut(usize, Mask) -> Result<Option<Witness>>,
{
    for v1 in 0..site.stage_count() {
        for p in site.masks(v1)? {
            if let Some(w) = probe(v1, p)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// FUNC: the value at a coarse-graining equals the pullback of the value.
pub fn check_func<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation) -> Result<Check> {
    alpha.check_site(site)?;
    let w = first_witness(site, |v1, p| {
        for v2 in site.below(v1) {
            let lhs = alpha.get(v2, site.coarse_grain(v2, v1, p)?);
            let rhs = pullback_members(site, v2, alpha.get(v1, p));
            if *lhs != rhs {
                return Ok(Some(Witness::new(
                    site,
                    at(v1, Some(v2), p, None),
                    "value at the coarse-graining differs from the pullback",
                )));
            }
        }
        Ok(None)
    })?;
    Ok(Check::from_option(w))
}

/// Every value is a down-set.
pub fn check_sievehood<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation) -> Result<Check> {
    alpha.check_site(site)?;
    let w = first_witness(site, |v1, p| {
        Ok(sieve_violation(site, v1, alpha.get(v1, p)).map(|(m, missing)| {
            Witness::new(
                site,
                at(v1, Some(missing), p, None),
                format!("below member `{}` but missing", site.stage_name(m)),
            )
        }))
    })?;
    Ok(Check::from_option(w))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Definition3Report {
    pub func: Check,
    pub null: Check,
    pub monotone: Check,
    pub exclusivity: Check,
    pub unit: Check,
}

impl Definition3Report {
    pub fn all_pass(&self) -> bool {
        [&self.func, &self.null, &self.monotone, &self.exclusivity, &self.unit]
            .iter()
            .all(|c| c.holds)
    }
}

/// The five clauses of a generalised valuation, exhaustively.
pub fn check_definition3<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation) -> Result<Definition3Report> {
    let func = check_func(site, alpha)?;

    let mut null = None;
    let mut unit = None;
    let mut monotone = None;
    let mut exclusivity = None;
    for v in 0..site.stage_count() {
        let full = site.full_mask(v);
        if null.is_none() && !alpha.get(v, Mask::EMPTY).is_empty() {
            null = Some(Witness::new(site, at(v, None, Mask::EMPTY, None), "null element has a nonempty value"));
        }
        if unit.is_none() && !alpha.is_true(site, v, full) {
            unit = Some(Witness::new(site, at(v, None, full, None), "unit element is not sent to the principal sieve"));
        }
        let masks = site.masks(v)?;
        if monotone.is_none() {
            // covering pairs suffice: inclusion of values is transitive
            'outer: for &p in &masks {
                for i in (0..site.atom_count(v)).filter(|&i| !p.contains(i)) {
                    let q = p.union(Mask::single(i));
                    if !alpha.get(v, p).is_subset(alpha.get(v, q)) {
                        monotone = Some(Witness::new(site, at(v, None, p, Some(q)), "value shrinks on a larger element"));
                        break 'outer;
                    }
                }
            }
        }
        if exclusivity.is_none() {
            let truths: Vec<Mask> = masks.iter().copied().filter(|&m| alpha.is_true(site, v, m)).collect();
            'excl: for &p in &truths {
                for &q in &truths {
                    if p.intersection(q).is_empty() {
                        exclusivity = Some(Witness::new(
                            site,
                            at(v, None, p, Some(q)),
                            "two orthogonal elements are both totally true",
                        ));
                        break 'excl;
                    }
                }
            }
        }
    }
    Ok(Definition3Report {
        func,
        null: Check::from_option(null),
        monotone: Check::from_option(monotone),
        exclusivity: Check::from_option(exclusivity),
        unit: Check::from_option(unit),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportCheck {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Stages with an empty truth set; excluded from the comparison.
    pub degenerate: Vec<String>,
}

fn degenerate_names<S: Site + ?Sized>(site: &S, s: &[Option<Mask>]) -> Vec<String> {
    s.iter()
        .enumerate()
        .filter(|(_, m)| m.is_none())
        .map(|(v, _)| site.stage_name(v).to_string())
        .collect()
}

fn support_pair_check<S, F>(site: &S, alpha: &MorphismSetValuation, mut ok: F, note: &str) -> Result<SupportCheck>
where
    S: Site + ?Sized,
    F: FnMut(usize, usize, Mask, Mask) -> Result<bool>,
{
    let s = supports(site, alpha)?;
    let mut witness = None;
    'outer: for v1 in 0..site.stage_count() {
        for v2 in site.below(v1) {
            if let (Some(s1), Some(s2)) = (s[v1], s[v2]) {
                if !ok(v2, v1, s2, s1)? {
                    witness = Some(Witness::new(site, at(v1, Some(v2), s1, None), note));
                    break 'outer;
                }
            }
        }
    }
    Ok(SupportCheck {
        holds: witness.is_none(),
        witness,
        degenerate: degenerate_names(site, &s),
    })
}

/// Supports grow under coarse-graining: the coarse support, viewed at the
/// fine stage, lies above the fine support.
pub fn check_subobject_condition<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation) -> Result<SupportCheck> {
    support_pair_check(
        site,
        alpha,
        |v2, v1, s2, s1| Ok(s1.is_subset(site.lift(v2, v1, s2)?)),
        "coarse support does not lie above the fine support",
    )
}

/// Supports form a global element of the coarse-graining presheaf.
pub fn check_global_element_condition<S: Site + ?Sized>(
    site: &S,
    alpha: &MorphismSetValuation,
) -> Result<SupportCheck> {
    support_pair_check(
        site,
        alpha,
        |v2, v1, s2, s1| Ok(site.coarse_grain(v2, v1, s1)? == s2),
        "coarse support differs from the coarse-graining of the fine support",
    )
}

/// `V2` belongs to the value of `P` at `V1` when `a(V2)` lies below the
/// coarse-graining of `P`. `a` need not satisfy the matching law.
pub fn alpha_from_global_element<S: Site + ?Sized>(site: &S, a: &[Mask]) -> Result<MorphismSetValuation> {
    if a.len() != site.stage_count() {
        return Err(Error::AssignmentLength {
            expected: site.stage_count(),
            found: a.len(),
        });
    }
    MorphismSetValuation::from_rule(site, |v1, p| {
        let mut members = BTreeSet::new();
        for v2 in site.below(v1) {
            if a[v2].is_subset(site.coarse_grain(v2, v1, p)?) {
                members.insert(v2);
            }
        }
        Ok(members)
    })
}

/// `V2` belongs to the value of `P` at `V1` when `a(V2)` lies inside the
/// restriction of the characters of `P`.
pub fn alpha_from_subobject<S: Site + ?Sized>(site: &S, a: &[CharSet]) -> Result<MorphismSetValuation> {
    if a.len() != site.stage_count() {
        return Err(Error::AssignmentLength {
            expected: site.stage_count(),
            found: a.len(),
        });
    }
    MorphismSetValuation::from_rule(site, |v1, p| {
        let mut members = BTreeSet::new();
        for v2 in site.below(v1) {
            if a[v2].is_subset(site.restrict_chars(v2, v1, CharSet(p.bits()))?) {
                members.insert(v2);
            }
        }
        Ok(members)
    })
}

/// First entry where two valuations differ.
pub fn first_difference<S: Site + ?Sized>(
    site: &S,
    left: &MorphismSetValuation,
    right: &MorphismSetValuation,
) -> Result<Option<Witness>> {
    left.check_site(site)?;
    right.check_site(site)?;
    first_witness(site, |v1, p| {
        let (l, r) = (left.get(v1, p), right.get(v1, p));
        Ok(l.symmetric_difference(r).next().map(|&v2| {
            Witness::new(
                site,
                at(v1, Some(v2), p, None),
                if l.contains(&v2) { "only in the first" } else { "only in the second" },
            )
        }))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReconstructionReport {
    /// The rebuilt valuation equals the original.
    pub equal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// The theorem's condition (i), checked pointwise.
    pub condition_i: bool,
    /// Equality holds exactly when condition (i) does.
    pub consistent: bool,
    pub degenerate: Vec<String>,
}

/// Rebuilds a valuation from its supports. `None` when some stage has an
/// empty truth set.
pub fn reconstruct_from_supports<S: Site + ?Sized>(
    site: &S,
    alpha: &MorphismSetValuation,
) -> Result<(Option<MorphismSetValuation>, ReconstructionReport)> {
    let s = supports(site, alpha)?;
    let degenerate = degenerate_names(site, &s);
    let condition_i = support_condition_i(site, alpha, &s)?.holds;
    if !degenerate.is_empty() {
        return Ok((
            None,
            ReconstructionReport {
                equal: false,
                witness: None,
                condition_i,
                consistent: !condition_i,
                degenerate,
            },
        ));
    }
    let values: Vec<Mask> = s.into_iter().map(|m| m.expect("checked above")).collect();
    let rebuilt = alpha_from_global_element(site, &values)?;
    let witness = first_difference(site, alpha, &rebuilt)?;
    let equal = witness.is_none();
    Ok((
        Some(rebuilt),
        ReconstructionReport {
            equal,
            witness,
            condition_i,
            consistent: equal == condition_i,
            degenerate,
        },
    ))
}

/// Rebuilds a valuation from its intervals.
pub fn reconstruct_from_intervals<S: Site + ?Sized>(
    site: &S,
    alpha: &MorphismSetValuation,
) -> Result<(MorphismSetValuation, ReconstructionReport)> {
    let iv = intervals(site, alpha)?;
    let condition_i = interval_condition_i(site, alpha, &iv, false)?.holds;
    let rebuilt = alpha_from_subobject(site, &iv)?;
    let witness = first_difference(site, alpha, &rebuilt)?;
    let equal = witness.is_none();
    Ok((
        rebuilt,
        ReconstructionReport {
            equal,
            witness,
            condition_i,
            consistent: equal == condition_i,
            degenerate: Vec::new(),
        },
    ))
}

/// `V2` is in the value of `P` exactly when the support at `V2` lies below
/// the coarse-graining of `P`. Fails at degenerate stages.
fn support_condition_i<S: Site + ?Sized>(
    site: &S,
    alpha: &MorphismSetValuation,
    s: &[Option<Mask>],
) -> Result<Check> {
    let w = first_witness(site, |v1, p| {
        for v2 in site.below(v1) {
            let Some(s2) = s[v2] else {
                return Ok(Some(Witness::new(site, at(v1, Some(v2), p, None), "support undefined")));
            };
            let predicted = s2.is_subset(site.coarse_grain(v2, v1, p)?);
            if predicted != alpha.get(v1, p).contains(&v2) {
                return Ok(Some(Witness::new(
                    site,
                    at(v1, Some(v2), p, None),
                    "membership disagrees with the support test",
                )));
            }
        }
        Ok(None)
    })?;
    Ok(Check::from_option(w))
}

/// Membership agrees with the interval test. With `via_iso` the restricted
/// character set is replaced by the characters of the coarse-graining.
fn interval_condition_i<S: Site + ?Sized>(
    site: &S,
    alpha: &MorphismSetValuation,
    iv: &[CharSet],
    via_iso: bool,
) -> Result<Check> {
    let w = first_witness(site, |v1, p| {
        for v2 in site.below(v1) {
            let target = if via_iso {
                CharSet(site.coarse_grain(v2, v1, p)?.bits())
            } else {
                site.restrict_chars(v2, v1, CharSet(p.bits()))?
            };
            if iv[v2].is_subset(target) != alpha.get(v1, p).contains(&v2) {
                return Ok(Some(Witness::new(
                    site,
                    at(v1, Some(v2), p, None),
                    "membership disagrees with the interval test",
                )));
            }
        }
        Ok(None)
    })?;
    Ok(Check::from_option(w))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremReport {
    pub theorem: u8,
    pub condition_i: Check,
    pub condition_ii: Check,
    /// Condition (i) evaluated through the coarse-graining/characters
    /// isomorphism instead of restriction (second theorem only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_i_via_iso: Option<Check>,
    pub sievehood: Check,
    pub func: Check,
    pub characterization: Check,
    pub degenerate: Vec<String>,
    /// Conditions (i) and (ii) imply all three conclusions.
    pub contract_holds: bool,
    /// Condition (i) alone implies FUNC.
    pub func_contract_holds: bool,
}

impl TheoremReport {
    pub fn conditions_hold(&self) -> bool {
        self.condition_i.holds && self.condition_ii.holds
    }

    pub fn conclusions_hold(&self) -> bool {
        self.sievehood.holds && self.func.holds && self.characterization.holds
    }

    fn finish(mut self) -> Self {
        self.contract_holds = !self.conditions_hold() || self.conclusions_hold();
        self.func_contract_holds = !self.condition_i.holds || self.func.holds;
        if let Some(iso) = &self.condition_i_via_iso {
            self.contract_holds &= iso.holds == self.condition_i.holds;
        }
        self
    }
}

/// Evaluates both conditions and all three conclusions of the support
/// theorem.
pub fn theorem1_verify<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation) -> Result<TheoremReport> {
    let s = supports(site, alpha)?;
    let degenerate = degenerate_names(site, &s);
    let condition_i = support_condition_i(site, alpha, &s)?;
    let condition_ii = if degenerate.is_empty() {
        let values: Vec<Mask> = s.iter().map(|m| m.expect("no degenerate stage")).collect();
        Check::from_option(matching_violation(site, &values)?.map(|(v2, v1)| {
            Witness::new(site, at(v1, Some(v2), values[v1], None), "supports do not match under coarse-graining")
        }))
    } else {
        Check::fail(Witness::new(site, at(0, None, Mask::EMPTY, None), "some truth set is empty"))
    };
    let characterization = if degenerate.is_empty() {
        let w = first_witness(site, |v1, p| {
            let s1 = s[v1].expect("no degenerate stage");
            for v2 in site.below(v1) {
                let predicted = site.coarse_grain(v2, v1, s1)?.is_subset(site.coarse_grain(v2, v1, p)?);
                if predicted != alpha.get(v1, p).contains(&v2) {
                    return Ok(Some(Witness::new(
                        site,
                        at(v1, Some(v2), p, None),
                        "value differs from the support characterization",
                    )));
                }
            }
            Ok(None)
        })?;
        Check::from_option(w)
    } else {
        Check::fail(Witness::new(site, at(0, None, Mask::EMPTY, None), "some truth set is empty"))
    };
    Ok(TheoremReport {
        theorem: 1,
        condition_i,
        condition_ii,
        condition_i_via_iso: None,
        sievehood: check_sievehood(site, alpha)?,
        func: check_func(site, alpha)?,
        characterization,
        degenerate,
        contract_holds: false,
        func_contract_holds: false,
    }
    .finish())
}

/// Evaluates both conditions and all three conclusions of the interval
/// theorem.
pub fn theorem2_verify<S: Site + ?Sized>(site: &S, alpha: &MorphismSetValuation) -> Result<TheoremReport> {
    let iv = intervals(site, alpha)?;
    let degenerate = degenerate_names(site, &supports(site, alpha)?);
    let condition_i = interval_condition_i(site, alpha, &iv, false)?;
    let condition_i_via_iso = interval_condition_i(site, alpha, &iv, true)?;
    let mut tight = None;
    'outer: for v1 in 0..site.stage_count() {
        for v2 in site.below(v1) {
            if site.restrict_chars(v2, v1, iv[v1])? != iv[v2] {
                tight = Some(Witness::new(
                    site,
                    at(v1, Some(v2), Mask(iv[v1].bits()), None),
                    "intervals do not match exactly under restriction",
                ));
                break 'outer;
            }
        }
    }
    let w = first_witness(site, |v1, p| {
        for v2 in site.below(v1) {
            let predicted = site
                .restrict_chars(v2, v1, iv[v1])?
                .is_subset(site.restrict_chars(v2, v1, CharSet(p.bits()))?);
            if predicted != alpha.get(v1, p).contains(&v2) {
                return Ok(Some(Witness::new(
                    site,
                    at(v1, Some(v2), p, None),
                    "value differs from the interval characterization",
                )));
            }
        }
        Ok(None)
    })?;
    Ok(TheoremReport {
        theorem: 2,
        condition_i,
        condition_ii: Check::from_option(tight),
        condition_i_via_iso: Some(condition_i_via_iso),
        sievehood: check_sievehood(site, alpha)?,
        func: check_func(site, alpha)?,
        characterization: Check::from_option(w),
        degenerate,
        contract_holds: false,
        func_contract_holds: false,
    }
    .finish())
}

/// Threshold values drawn by the support-matching search.
pub const SEARCH_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

/// One draw of the support-matching search: a poset, a state and a threshold.
#[derive(Debug, Clone)]
pub struct SearchDraw {
    pub index: usize,
    pub poset: crate::contexts::ContextPoset,
    pub rho: DensityMatrix,
    pub r: f64,
}

/// Regenerates draw `index` of the schedule for `seed`. Every fourth draw uses
/// the three-dimensional chain with a diagonal state.
pub fn search_draw(seed: u64, index: usize) -> SearchDraw {
    let mut rng = fixtures::rng(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64));
    use rand::Rng;
    let r = SEARCH_THRESHOLDS[rng.random_range(0..SEARCH_THRESHOLDS.len())];
    let (poset, rho) = if index.is_multiple_of(4) {
        (fixtures::fix_a(), fixtures::random_diagonal_density(&mut rng, 3))
    } else {
        let rp = fixtures::standard_random_poset(&mut rng);
        let rho = rp.random_state(&mut rng);
        (rp.poset, rho)
    };
    SearchDraw { index, poset, rho, r }
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportsMatchFinding {
    pub draw: usize,
    pub r: f64,
    pub dim: usize,
    pub contexts: usize,
    pub rho_diagonal: Vec<f64>,
    pub witness: Witness,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchOutcome {
    pub seed: u64,
    pub draws_run: usize,
    /// `"found"` or `"not found"`; absence never means the law holds.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finding: Option<SupportsMatchFinding>,
}

/// Checks one draw for a violation of the support-matching law by the
/// probability-r valuation.
pub fn supportsmatch_violation(draw: &SearchDraw) -> Result<Option<Witness>> {
    let alpha = nu_rho_r(&draw.poset, &draw.rho, draw.r)?;
    Ok(check_global_element_condition(&draw.poset, &alpha)?.witness)
}

/// Seeded schedule of `draws` draws; stops at the first violation.
pub fn search_supportsmatch_violation(seed: u64, draws: usize) -> Result<SearchOutcome> {
    for i in 0..draws {
        let d = search_draw(seed, i);
        if let Some(witness) = supportsmatch_violation(&d)? {
            let m: &CMatrix = d.rho.matrix();
            return Ok(SearchOutcome {
                seed,
                draws_run: i + 1,
                status: "found",
                finding: Some(SupportsMatchFinding {
                    draw: i,
                    r: d.r,
                    dim: d.poset.dim(),
                    contexts: d.poset.len(),
                    rho_diagonal: (0..m.nrows()).map(|k| m[(k, k)].re).collect(),
                    witness,
                }),
            });
        }
    }
    Ok(SearchOutcome {
        seed,
        draws_run: draws,
        status: "not found",
        finding: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{ContextPoset, TRIVIAL_ID};
    use crate::linalg::{real_diag, StateVector};
    use crate::presheaves::{coarse_grain, GlobalElement};

    fn fix_a_ids(p: &ContextPoset) -> (usize, usize, usize) {
        (p.index_of("V1").unwrap(), p.index_of("V2").unwrap(), p.index_of(TRIVIAL_ID).unwrap())
    }

    fn diag_state(w: &[f64]) -> DensityMatrix {
        DensityMatrix::new(real_diag(w)).unwrap()
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::pure(&fixtures::plus_state())
    }

    #[test]
    fn nu_rho_examples() {
        let p = fixtures::dim2_diagonal_poset();
        let (vd, t) = (p.index_of("V_diag").unwrap(), p.index_of(TRIVIAL_ID).unwrap());
        let nu = nu_rho(&p, &plus()).unwrap();
        for v in 0..p.len() {
            assert!(nu.evaluate(&p, v, p.full_mask(v)).unwrap().is_principal(&p).unwrap());
            assert!(nu.evaluate(&p, v, Mask::EMPTY).unwrap().is_empty());
        }
        assert_eq!(*nu.get(vd, Mask::single(0)), BTreeSet::from([t]));
    }

    #[test]
    fn nu_rho_r_examples() {
        let p = fixtures::dim2_diagonal_poset();
        let (vd, t) = (p.index_of("V_diag").unwrap(), p.index_of(TRIVIAL_ID).unwrap());
        let half = nu_rho_r(&p, &plus(), 0.5).unwrap();
        assert_eq!(*half.get(vd, Mask::single(0)), BTreeSet::from([vd, t]));
        let high = nu_rho_r(&p, &plus(), 0.9).unwrap();
        assert_eq!(*high.get(vd, Mask::single(0)), BTreeSet::from([t]));
        let one = nu_rho_r(&p, &plus(), 1.0).unwrap();
        assert_eq!(one, *nu_rho(&p, &plus()).unwrap());
        assert_eq!(nu_rho_r(&p, &plus(), 0.0), Err(Error::ThresholdOutOfRange(0.0)));
        assert_eq!(nu_rho_r(&p, &plus(), 1.5), Err(Error::ThresholdOutOfRange(1.5)));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = fixtures::fix_a();
        assert!(matches!(nu_rho(&p, &plus()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn truth_sets_supports_intervals() {
        let p = fixtures::dim2_diagonal_poset();
        let vd = p.index_of("V_diag").unwrap();
        let zero = DensityMatrix::pure(&StateVector::basis(2, 0));
        let nu = nu_rho(&p, &zero).unwrap();
        assert_eq!(truth_set(&p, &nu, vd).unwrap().members, vec![Mask(0b01), Mask(0b11)]);
        assert_eq!(support(&p, &nu, vd).unwrap(), Some(Mask::single(0)));
        assert_eq!(interval(&p, &nu, vd).unwrap(), CharSet::single(0));

        let mixed = nu_rho(&p, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(truth_set(&p, &mixed, vd).unwrap().members, vec![Mask(0b11)]);

        let plus_nu = nu_rho(&p, &plus()).unwrap();
        assert_eq!(support(&p, &plus_nu, vd).unwrap(), Some(Mask::full(2)));

        let q = ContextPoset::build(vec![fixtures::fix_a_v1().with_id("D")], true).unwrap();
        let d = q.index_of("D").unwrap();
        let half = diag_state(&[0.5, 0.5, 0.0]);
        let nu = nu_rho(&q, &half).unwrap();
        assert_eq!(support(&q, &nu, d).unwrap(), Some(Mask(0b011)));
        assert_eq!(state_support(&q, &half, d).unwrap(), Mask(0b011));

        let fa = fixtures::fix_a();
        let (_, v2, _) = fix_a_ids(&fa);
        let nu = nu_rho(&fa, &diag_state(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(interval(&fa, &nu, v2).unwrap(), CharSet::single(1));
    }

    #[test]
    fn definition3_on_states() {
        let fa = fixtures::fix_a();
        let mut rng = fixtures::rng(1);
        for _ in 0..20 {
            let rho = fixtures::random_density(&mut rng, &CMatrix::identity(3, 3));
            let r = check_definition3(&fa, &nu_rho(&fa, &rho).unwrap()).unwrap();
            assert!(r.all_pass(), "{r:?}");
            let r = check_definition3(&fa, &nu_rho_r(&fa, &rho, 0.7).unwrap()).unwrap();
            assert!(r.all_pass(), "{r:?}");
        }
    }

    #[test]
    fn exclusivity_fails_below_one_half() {
        let p = fixtures::dim2_diagonal_poset();
        let vd = p.index_of("V_diag").unwrap();
        let alpha = nu_rho_r(&p, &DensityMatrix::maximally_mixed(2), 0.3).unwrap();
        let r = check_definition3(&p, &alpha).unwrap();
        assert!(r.func.holds && r.null.holds && r.monotone.holds && r.unit.holds);
        let w = r.exclusivity.witness.unwrap();
        assert_eq!(w.at.v1, vd);
        assert_eq!(w.at.mask.intersection(w.at.other.unwrap()), Mask::EMPTY);
    }

    #[test]
    fn state_conditions_on_fix_a() {
        let fa = fixtures::fix_a();
        let rho = diag_state(&[0.5, 0.4, 0.1]);
        assert!(check_subobject_condition(&fa, &nu_rho(&fa, &rho).unwrap()).unwrap().holds);
        assert!(check_global_element_condition(&fa, &nu_rho(&fa, &rho).unwrap()).unwrap().holds);
        assert!(check_subobject_condition(&fa, &nu_rho_r(&fa, &rho, 0.8).unwrap()).unwrap().holds);
    }

    #[test]
    fn hand_found_supportsmatch_violation() {
        let fa = fixtures::fix_a();
        let (v1, v2, _) = fix_a_ids(&fa);
        let alpha = nu_rho_r(&fa, &diag_state(&[0.45, 0.45, 0.1]), 0.5).unwrap();
        assert_eq!(support(&fa, &alpha, v1).unwrap(), Some(Mask::EMPTY));
        assert_eq!(support(&fa, &alpha, v2).unwrap(), Some(Mask::single(1)));
        let c = check_global_element_condition(&fa, &alpha).unwrap();
        assert!(!c.holds);
        let t = theorem1_verify(&fa, &alpha).unwrap();
        assert!(!t.condition_ii.holds);
        assert!(t.contract_holds && t.func_contract_holds);
    }

    #[test]
    fn constant_true_valuation() {
        let fa = fixtures::fix_a();
        let alpha = MorphismSetValuation::from_rule(&fa, |v, _| Ok(fa.below(v).collect())).unwrap();
        for v in 0..fa.len() {
            assert_eq!(support(&fa, &alpha, v).unwrap(), Some(Mask::EMPTY));
        }
        assert!(check_subobject_condition(&fa, &alpha).unwrap().holds);
    }

    #[test]
    fn global_element_round_trip() {
        let fa = fixtures::fix_a();
        let unit = GlobalElement::unit(&fa);
        let alpha = alpha_from_global_element(&fa, unit.values()).unwrap();
        for v1 in 0..fa.len() {
            for p in fa.masks(v1).unwrap() {
                let expected: BTreeSet<usize> = fa
                    .below(v1)
                    .filter(|&v2| coarse_grain(&fa, v2, v1, p).unwrap() == fa.full_mask(v2))
                    .collect();
                assert_eq!(*alpha.get(v1, p), expected);
            }
        }
        for v in 0..fa.len() {
            assert_eq!(support(&fa, &alpha, v).unwrap(), Some(unit.get(v)));
        }
    }

    #[test]
    fn broken_assignment_loses_sievehood() {
        let fa = fixtures::fix_a();
        let (v1, v2, t) = fix_a_ids(&fa);
        let mut a = vec![Mask::EMPTY; 3];
        a[v1] = Mask::single(0);
        a[v2] = Mask::single(0);
        a[t] = Mask::full(1);
        // breaking the matching law at V2 by shrinking to the null element
        a[v2] = Mask::EMPTY;
        let alpha = alpha_from_global_element(&fa, &a).unwrap();
        assert!(!check_sievehood(&fa, &alpha).unwrap().holds);
    }

    #[test]
    fn reconstructions_on_states() {
        let fa = fixtures::fix_a();
        let nu = nu_rho(&fa, &diag_state(&[0.2, 0.8, 0.0])).unwrap();
        let (rebuilt, report) = reconstruct_from_supports(&fa, &nu).unwrap();
        assert!(report.equal && report.condition_i && report.consistent);
        assert_eq!(rebuilt.unwrap(), *nu);
        let (rebuilt, report) = reconstruct_from_intervals(&fa, &nu).unwrap();
        assert!(report.equal && report.condition_i && report.consistent);
        assert_eq!(rebuilt, *nu);
    }

    #[test]
    fn theorems_on_states() {
        let fa = fixtures::fix_a();
        let nu = nu_rho(&fa, &diag_state(&[0.3, 0.0, 0.7])).unwrap();
        for t in [theorem1_verify(&fa, &nu).unwrap(), theorem2_verify(&fa, &nu).unwrap()] {
            assert!(t.conditions_hold() && t.conclusions_hold(), "{t:?}");
            assert!(t.contract_holds);
        }
    }

    #[test]
    fn loosened_intervals_are_not_tight() {
        let fa = fixtures::fix_a();
        let (v1, v2, t) = fix_a_ids(&fa);
        let mut a = vec![CharSet::EMPTY; 3];
        a[v1] = CharSet::single(0);
        a[v2] = CharSet::full(2);
        a[t] = CharSet::full(1);
        let alpha = alpha_from_subobject(&fa, &a).unwrap();
        let t = theorem2_verify(&fa, &alpha).unwrap();
        assert!(!t.condition_ii.holds);
        assert!(t.contract_holds);
    }

    #[test]
    fn search_finds_violation_and_replays() {
        let out = search_supportsmatch_violation(2024, 200).unwrap();
        let f = out.finding.expect("a violation within 200 draws");
        let d = search_draw(2024, f.draw);
        assert_eq!(supportsmatch_violation(&d).unwrap(), Some(f.witness));
    }
}
