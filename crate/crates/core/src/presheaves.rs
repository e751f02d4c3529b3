//! The spectral presheaf, the coarse-graining presheaf, sieves and the
//! isomorphism between coarse-graining and clopen subsets of the spectrum.
//!
//! Every subset of a finite spectrum is clopen, so the clopen power object at
//! a context is just the set of character subsets. All maps below act on
//! masks using tables precomputed by [`ContextPoset`].

use serde::Serialize;

use crate::contexts::{CharSet, ContextPoset, Mask};
use crate::error::{Error, Result};
use crate::linalg::Projector;
use crate::site::{Sieve, Site};

impl Site for ContextPoset {
    fn stage_count(&self) -> usize {
        self.len()
    }

    fn stage_name(&self, stage: usize) -> &str {
        self.context(stage).id()
    }

    fn leq(&self, lower: usize, upper: usize) -> bool {
        ContextPoset::leq(self, lower, upper)
    }

    fn atom_count(&self, stage: usize) -> usize {
        self.context(stage).atom_count()
    }

    fn coarse_grain(&self, lower: usize, upper: usize, mask: Mask) -> Result<Mask> {
        coarse_grain(self, lower, upper, mask)
    }

    fn restrict_chars(&self, lower: usize, upper: usize, chars: CharSet) -> Result<CharSet> {
        clo_sigma_restrict(self, lower, upper, chars)
    }

    fn lift(&self, lower: usize, upper: usize, mask: Mask) -> Result<Mask> {
        ContextPoset::lift(self, lower, upper, mask)
    }

    fn projector(&self, stage: usize, mask: Mask) -> Projector {
        self.context(stage).projector(mask)
    }

    fn version(&self) -> u64 {
        ContextPoset::version(self)
    }
}

/// Restriction of the character `atom` of `upper` to `lower`.
pub fn sigma_restrict(poset: &ContextPoset, lower: usize, upper: usize, atom: usize) -> Result<usize> {
    let map = poset.restriction_map(lower, upper)?;
    map.get(atom).copied().ok_or(Error::MaskOutOfRange {
        mask: 1u32.checked_shl(atom as u32).unwrap_or(0),
        atoms: map.len(),
    })
}

/// The least element of `lower`'s lattice above `mask` (an element of `upper`'s
/// lattice): the atoms of `lower` with nonzero product with it.
pub fn coarse_grain(poset: &ContextPoset, lower: usize, upper: usize, mask: Mask) -> Result<Mask> {
    let overlaps = poset.overlap_map(lower, upper)?;
    poset.context(upper).check_mask(mask)?;
    Ok(Mask::from_indices(
        overlaps
            .iter()
            .enumerate()
            .filter(|(_, o)| !o.intersection(mask).is_empty())
            .map(|(j, _)| j),
    ))
}

/// Image of a character set of `upper` under restriction to `lower`.
pub fn clo_sigma_restrict(
    poset: &ContextPoset,
    lower: usize,
    upper: usize,
    chars: CharSet,
) -> Result<CharSet> {
    let map = poset.restriction_map(lower, upper)?;
    if !chars.is_subset(CharSet::full(map.len())) {
        return Err(Error::MaskOutOfRange {
            mask: chars.bits(),
            atoms: map.len(),
        });
    }
    Ok(CharSet::from_indices(chars.iter().map(|i| map[i])))
}

pub fn pullback(poset: &ContextPoset, lower: usize, sieve: &Sieve) -> Result<Sieve> {
    sieve.pullback(poset, lower)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoFailure {
    pub v1: String,
    pub v2: String,
    pub mask: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IsoReport {
    pub pairs_checked: usize,
    pub elements_checked: usize,
    pub failures: Vec<IsoFailure>,
    /// Stages where two lattice elements map to the same character set.
    pub non_injective: Vec<String>,
}

impl IsoReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.non_injective.is_empty()
    }
}

/// Checks, for every pair and every lattice element, that restricting the
/// element's character set agrees with the character set of its coarse-graining.
pub fn check_nat_iso(poset: &ContextPoset) -> Result<IsoReport> {
    let mut report = IsoReport {
        pairs_checked: 0,
        elements_checked: 0,
        failures: Vec::new(),
        non_injective: Vec::new(),
    };
    for (v2, v1) in poset.pairs() {
        report.pairs_checked += 1;
        let upper = poset.context(v1);
        let lower = poset.context(v2);
        for element in upper.lattice_elements()? {
            report.elements_checked += 1;
            let lhs = clo_sigma_restrict(poset, v2, v1, upper.v_of_p(&element)?)?;
            let coarse = coarse_grain(poset, v2, v1, element.mask)?;
            let rhs = lower.v_of_p(&lower.element(coarse))?;
            if lhs != rhs {
                report.failures.push(IsoFailure {
                    v1: upper.id().to_string(),
                    v2: lower.id().to_string(),
                    mask: format!("{:#x}", element.mask),
                    lhs: format!("{:#x}", lhs),
                    rhs: format!("{:#x}", rhs),
                });
            }
        }
    }
    for v in poset.contexts() {
        let mut images: Vec<CharSet> = v
            .lattice_elements()?
            .iter()
            .map(|e| v.v_of_p(e))
            .collect::<Result<_>>()?;
        let n = images.len();
        images.sort_unstable();
        images.dedup();
        if images.len() != n {
            report.non_injective.push(v.id().to_string());
        }
    }
    Ok(report)
}

/// First pair `(lower, upper)` where `values` fails the matching law.
pub fn matching_violation<S: Site + ?Sized>(site: &S, values: &[Mask]) -> Result<Option<(usize, usize)>> {
    check_length(site, values.len())?;
    for v1 in 0..site.stage_count() {
        for v2 in site.below(v1) {
            if site.coarse_grain(v2, v1, values[v1])? != values[v2] {
                return Ok(Some((v2, v1)));
            }
        }
    }
    Ok(None)
}

fn check_length<S: Site + ?Sized>(site: &S, found: usize) -> Result<()> {
    if found != site.stage_count() {
        return Err(Error::AssignmentLength {
            expected: site.stage_count(),
            found,
        });
    }
    Ok(())
}

fn check_masks<S: Site + ?Sized>(site: &S, bits: impl Iterator<Item = u32>) -> Result<()> {
    for (v, b) in bits.enumerate() {
        let n = site.atom_count(v);
        if !Mask(b).is_subset(Mask::full(n)) {
            return Err(Error::MaskOutOfRange { mask: b, atoms: n });
        }
    }
    Ok(())
}

/// A lattice element at every stage, compatible with coarse-graining.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalElement {
    values: Vec<Mask>,
}

impl GlobalElement {
    pub fn new<S: Site + ?Sized>(site: &S, values: Vec<Mask>) -> Result<Self> {
        check_length(site, values.len())?;
        check_masks(site, values.iter().map(|m| m.bits()))?;
        if let Some((lo, up)) = matching_violation(site, &values)? {
            return Err(Error::MatchingLawViolated {
                lower: site.stage_name(lo).to_string(),
                upper: site.stage_name(up).to_string(),
            });
        }
        Ok(GlobalElement { values })
    }

    /// The top element everywhere.
    pub fn unit<S: Site + ?Sized>(site: &S) -> Self {
        GlobalElement {
            values: (0..site.stage_count()).map(|v| site.full_mask(v)).collect(),
        }
    }

    pub fn values(&self) -> &[Mask] {
        &self.values
    }

    pub fn get(&self, stage: usize) -> Mask {
        self.values[stage]
    }

    pub fn is_nonzero(&self) -> bool {
        self.values.iter().all(|m| !m.is_empty())
    }
}

/// A set of characters at every stage, closed under restriction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubobjectSigma {
    values: Vec<CharSet>,
}

/// First pair `(lower, upper)` where the restriction of `values[upper]` is not
/// contained in (or, when `tight`, not equal to) `values[lower]`.
pub fn restriction_violation<S: Site + ?Sized>(
    site: &S,
    values: &[CharSet],
    tight: bool,
) -> Result<Option<(usize, usize)>> {
    check_length(site, values.len())?;
    for v1 in 0..site.stage_count() {
        for v2 in site.below(v1) {
            let image = site.restrict_chars(v2, v1, values[v1])?;
            let ok = if tight {
                image == values[v2]
            } else {
                image.is_subset(values[v2])
            };
            if !ok {
                return Ok(Some((v2, v1)));
            }
        }
    }
    Ok(None)
}

impl SubobjectSigma {
    pub fn new<S: Site + ?Sized>(site: &S, values: Vec<CharSet>) -> Result<Self> {
        check_length(site, values.len())?;
        check_masks(site, values.iter().map(|m| m.bits()))?;
        if let Some((lo, up)) = restriction_violation(site, &values, false)? {
            return Err(Error::Input(format!(
                "subobject law fails: restriction of `{}` not inside `{}`",
                site.stage_name(up),
                site.stage_name(lo)
            )));
        }
        Ok(SubobjectSigma { values })
    }

    pub fn full<S: Site + ?Sized>(site: &S) -> Self {
        SubobjectSigma {
            values: (0..site.stage_count())
                .map(|v| CharSet::full(site.atom_count(v)))
                .collect(),
        }
    }

    pub fn values(&self) -> &[CharSet] {
        &self.values
    }

    pub fn get(&self, stage: usize) -> CharSet {
        self.values[stage]
    }

    pub fn is_tight<S: Site + ?Sized>(&self, site: &S) -> Result<bool> {
        Ok(restriction_violation(site, &self.values, true)?.is_none())
    }
}

/// The subobject whose value at each stage is the characters of the global
/// element's projector there.
pub fn subobject_from_global_element<S: Site + ?Sized>(site: &S, g: &GlobalElement) -> Result<SubobjectSigma> {
    SubobjectSigma::new(site, g.values.iter().map(|m| CharSet(m.bits())).collect())
}
