//! Finite base categories that are preorders, and sieves on them.
//!
//! Both the context poset and the discrete-spectrum operator category have at
//! most one arrow between two stages, so a sieve on a stage is a down-set of
//! stages below it. Valuations and the relation survey are written against
//! [`Site`] and run unchanged on either base.

use std::collections::BTreeSet;

use crate::contexts::{CharSet, Mask, MAX_LATTICE_ATOMS};
use crate::error::{Error, Result};
use crate::linalg::Projector;

pub trait Site {
    fn stage_count(&self) -> usize;

    fn stage_name(&self, stage: usize) -> &str;

    /// Whether there is an arrow `lower -> upper`.
    fn leq(&self, lower: usize, upper: usize) -> bool;

    /// Number of atoms of the stage's Boolean lattice.
    fn atom_count(&self, stage: usize) -> usize;

    /// The lattice map along `lower -> upper`, taking an element at `upper`
    /// to an element at `lower`.
    fn coarse_grain(&self, lower: usize, upper: usize, mask: Mask) -> Result<Mask>;

    /// The spectral map along `lower -> upper`: image of a set of points of
    /// `upper` under restriction.
    fn restrict_chars(&self, lower: usize, upper: usize, chars: CharSet) -> Result<CharSet>;

    /// An element at `lower` viewed as an element at `upper`.
    fn lift(&self, lower: usize, upper: usize, mask: Mask) -> Result<Mask>;

    /// The projector represented by a lattice element.
    fn projector(&self, stage: usize, mask: Mask) -> Projector;

    /// Changes whenever the stage set changes; sieves built on an older
    /// version are rejected.
    fn version(&self) -> u64;

    fn below(&self, stage: usize) -> Vec<usize> {
        (0..self.stage_count()).filter(|&w| self.leq(w, stage)).collect()
    }

    fn full_mask(&self, stage: usize) -> Mask {
        Mask::full(self.atom_count(stage))
    }

    /// Every lattice element of a stage, or an error past the enumeration bound.
    fn masks(&self, stage: usize) -> Result<Vec<Mask>> {
        let n = self.atom_count(stage);
        if n > MAX_LATTICE_ATOMS {
            return Err(Error::TooManyAtoms {
                count: n,
                bound: MAX_LATTICE_ATOMS,
            });
        }
        Ok(Mask::all(n).collect())
    }
}

/// A down-set of stages below `apex`, stamped with the site version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sieve {
    apex: usize,
    members: BTreeSet<usize>,
    version: u64,
}

/// First pair `(member, missing)` with `missing <= member` outside `members`,
/// or a member not below the apex reported as `(member, apex)`.
pub fn sieve_violation<S: Site + ?Sized>(
    site: &S,
    apex: usize,
    members: &BTreeSet<usize>,
) -> Option<(usize, usize)> {
    for &m in members {
        if m >= site.stage_count() || !site.leq(m, apex) {
            return Some((m, apex));
        }
        for w in 0..site.stage_count() {
            if site.leq(w, m) && !members.contains(&w) {
                return Some((m, w));
            }
        }
    }
    None
}

impl Sieve {
    pub fn new<S: Site + ?Sized>(site: &S, apex: usize, members: BTreeSet<usize>) -> Result<Self> {
        if apex >= site.stage_count() {
            return Err(Error::InvalidSieve {
                apex: format!("#{apex}"),
                reason: "apex outside the site".into(),
            });
        }
        if let Some((m, w)) = sieve_violation(site, apex, &members) {
            let reason = if w == apex && !site.leq(m, apex) {
                format!("member #{m} is not below the apex")
            } else {
                format!(
                    "`{}` is below member `{}` but missing",
                    site.stage_name(w),
                    site.stage_name(m)
                )
            };
            return Err(Error::InvalidSieve {
                apex: site.stage_name(apex).to_string(),
                reason,
            });
        }
        Ok(Sieve {
            apex,
            members,
            version: site.version(),
        })
    }

    /// The principal sieve: everything below the apex.
    pub fn principal<S: Site + ?Sized>(site: &S, apex: usize) -> Self {
        Sieve {
            apex,
            members: site.below(apex).into_iter().collect(),
            version: site.version(),
        }
    }

    pub fn empty<S: Site + ?Sized>(site: &S, apex: usize) -> Self {
        Sieve {
            apex,
            members: BTreeSet::new(),
            version: site.version(),
        }
    }

    pub fn apex(&self) -> usize {
        self.apex
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, stage: usize) -> bool {
        self.members.contains(&stage)
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn is_principal<S: Site + ?Sized>(&self, site: &S) -> Result<bool> {
        self.check_version(site)?;
        Ok(self.members.len() == site.below(self.apex).len())
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Restriction of the sieve along `lower -> apex`.
    pub fn pullback<S: Site + ?Sized>(&self, site: &S, lower: usize) -> Result<Sieve> {
        self.check_version(site)?;
        if !site.leq(lower, self.apex) {
            return Err(Error::NotIncluded {
                lower: site.stage_name(lower).to_string(),
                upper: site.stage_name(self.apex).to_string(),
            });
        }
        Ok(Sieve {
            apex: lower,
            members: pullback_members(site, lower, &self.members),
            version: self.version,
        })
    }

    pub fn member_names<'a, S: Site + ?Sized>(&self, site: &'a S) -> Vec<&'a str> {
        self.members.iter().map(|&m| site.stage_name(m)).collect()
    }

    fn check_version<S: Site + ?Sized>(&self, site: &S) -> Result<()> {
        if self.version != site.version() {
            return Err(Error::StaleSieve);
        }
        Ok(())
    }
}

/// `{w in members : w <= lower}`; defined for arbitrary morphism sets.
pub fn pullback_members<S: Site + ?Sized>(
    site: &S,
    lower: usize,
    members: &BTreeSet<usize>,
) -> BTreeSet<usize> {
    members
        .iter()
        .copied()
        .filter(|&w| site.leq(w, lower))
        .collect()
}
