//! Global sections of the spectral presheaf: one character per context, all
//! related by restriction. Over a Kochen-Specker set of rays no such choice
//! exists, and the search below proves it by exhausting the tree.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::contexts::{Context, ContextPoset};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, Projector};
use crate::presheaves::sigma_restrict;

const KS_FIXTURE: &str = include_str!("../fixtures/ks_cabello18.json");

/// Inner products of rays sharing a context must vanish to this tolerance.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Values of two characters on a common element must agree to this tolerance.
pub const EVALUATION_TOL: f64 = 1e-9;

/// One atom index per context of the poset, in poset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionAssignment {
    atoms: Vec<usize>,
}

impl SectionAssignment {
    pub fn new(atoms: Vec<usize>) -> Self {
        SectionAssignment { atoms }
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn get(&self, stage: usize) -> usize {
        self.atoms[stage]
    }

    pub fn set(&mut self, stage: usize, atom: usize) {
        self.atoms[stage] = atom;
    }

    pub fn to_ids(&self, poset: &ContextPoset) -> BTreeMap<String, usize> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(v, &a)| (poset.context(v).id().to_string(), a))
            .collect()
    }

    pub fn from_ids(poset: &ContextPoset, ids: &BTreeMap<String, usize>) -> Result<Self> {
        if ids.len() != poset.len() {
            return Err(Error::AssignmentLength {
                expected: poset.len(),
                found: ids.len(),
            });
        }
        let mut atoms = vec![0; poset.len()];
        for (id, &a) in ids {
            atoms[poset.index_of(id)?] = a;
        }
        Ok(SectionAssignment { atoms })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionSearch {
    pub section: Option<SectionAssignment>,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SectionVerdict {
    pub exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, usize>>,
    pub nodes_explored: u64,
}

impl SectionSearch {
    pub fn verdict(&self, poset: &ContextPoset) -> SectionVerdict {
        SectionVerdict {
            exists: self.section.is_some(),
            witness: self.section.as_ref().map(|s| s.to_ids(poset)),
            nodes_explored: self.nodes_explored,
        }
    }
}

/// Depth-first search over the maximal contexts in poset order. The first
/// section found is the lexicographically least in that order.
pub fn global_section_search(poset: &ContextPoset) -> Result<SectionSearch> {
    global_section_search_ordered(poset, &poset.maximal())
}

/// The search with the maximal contexts visited in `order`.
pub fn global_section_search_ordered(poset: &ContextPoset, order: &[usize]) -> Result<SectionSearch> {
    let maximal = poset.maximal();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != maximal {
        return Err(Error::Input("search order must list each maximal context once".into()));
    }
    let below: Vec<Vec<(usize, Vec<usize>)>> = order
        .iter()
        .map(|&m| {
            poset
                .below(m)
                .map(|v| Ok((v, poset.restriction_map(v, m)?.to_vec())))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let mut search = Search {
        below: &below,
        atoms: order.iter().map(|&m| poset.context(m).atom_count()).collect(),
        values: vec![None; poset.len()],
        nodes: 0,
    };
    let found = search.descend(0);
    let section = found.then(|| SectionAssignment::new(search.values.iter().map(|v| v.expect("every context lies below a maximal one")).collect()));
    Ok(SectionSearch {
        section,
        nodes_explored: search.nodes,
    })
}

struct Search<'a> {
    below: &'a [Vec<(usize, Vec<usize>)>],
    atoms: Vec<usize>,
    values: Vec<Option<usize>>,
    nodes: u64,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize) -> bool {
        if depth == self.below.len() {
            return true;
        }
        for atom in 0..self.atoms[depth] {
            self.nodes += 1;
            let mut set = Vec::new();
            let mut clash = false;
            for (v, map) in &self.below[depth] {
                match self.values[*v] {
                    Some(x) if x != map[atom] => {
                        clash = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        self.values[*v] = Some(map[atom]);
                        set.push(*v);
                    }
                }
            }
            if !clash && self.descend(depth + 1) {
                return true;
            }
            for v in set {
                self.values[v] = None;
            }
        }
        false
    }
}

/// Runs the search with the maximal contexts in reverse order and reports
/// whether the existence verdict agrees with the forward search.
pub fn replay_reversed(poset: &ContextPoset, forward: &SectionSearch) -> Result<bool> {
    let mut order = poset.maximal();
    order.reverse();
    let back = global_section_search_ordered(poset, &order)?;
    if let Some(s) = &back.section {
        if !section_verify(poset, s)? {
            return Ok(false);
        }
    }
    Ok(back.section.is_some() == forward.section.is_some())
}

/// Checks a section two ways: the restriction maps, and agreement of the
/// characters' values on every atom of every smaller context.
pub fn section_verify(poset: &ContextPoset, s: &SectionAssignment) -> Result<bool> {
    if s.atoms.len() != poset.len() {
        return Ok(false);
    }
    if (0..poset.len()).any(|v| s.get(v) >= poset.context(v).atom_count()) {
        return Ok(false);
    }
    for (lo, up) in poset.pairs() {
        if sigma_restrict(poset, lo, up, s.get(up))? != s.get(lo) {
            return Ok(false);
        }
        let (lower, upper) = (poset.context(lo), poset.context(up));
        let k_lo = lower.character(s.get(lo));
        let k_up = upper.character(s.get(up));
        for q in lower.atoms() {
            let q = q.as_operator();
            if (upper.evaluate(&k_up, &q)? - lower.evaluate(&k_lo, &q)?).abs() > EVALUATION_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySetFile {
    pub dim: usize,
    /// Number of contexts each ray must belong to.
    pub sharing: usize,
    pub contexts: Vec<RayContextFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayContextFile {
    pub id: String,
    /// Real vectors; need not be normalised.
    pub vectors: Vec<Vec<f64>>,
}

/// A validated set of rays grouped into orthogonal bases.
#[derive(Debug, Clone)]
pub struct RaySet {
    dim: usize,
    rays: Vec<Projector>,
    contexts: Vec<(String, Vec<usize>)>,
}

type RayKey = Vec<i64>;

fn ray_key(p: &Projector) -> RayKey {
    p.matrix()
        .iter()
        .flat_map(|z| [(z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64])
        .collect()
}

impl RaySet {
    pub fn bundled() -> Self {
        RaySet::from_json(KS_FIXTURE).expect("bundled ray set validates")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RaySetFile = serde_json::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
        RaySet::from_file(file)
    }

    /// Validates lengths, orthogonality within each context and the declared
    /// sharing pattern.
    pub fn from_file(file: RaySetFile) -> Result<Self> {
        let bad = |msg: String| Err(Error::Fixture(msg));
        let mut rays: Vec<Projector> = Vec::new();
        let mut index: HashMap<RayKey, usize> = HashMap::new();
        let mut contexts = Vec::new();
        for ctx in &file.contexts {
            if ctx.vectors.len() != file.dim {
                return bad(format!("context `{}` has {} vectors, expected {}", ctx.id, ctx.vectors.len(), file.dim));
            }
            let mut unit = Vec::new();
            for (i, v) in ctx.vectors.iter().enumerate() {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if v.len() != file.dim || norm == 0.0 {
                    return bad(format!("vector {i} of `{}` has the wrong length or is zero", ctx.id));
                }
                unit.push(v.iter().map(|x| x / norm).collect::<Vec<_>>());
            }
            for i in 0..unit.len() {
                for j in i + 1..unit.len() {
                    let dot: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
                    if dot.abs() > ORTHOGONALITY_TOL {
                        return bad(format!("vectors {i} and {j} of `{}` have overlap {dot:.3e}", ctx.id));
                    }
                }
            }
            let mut members = Vec::new();
            for u in &unit {
                let v = CVector::from_iterator(file.dim, u.iter().map(|&x| c(x, 0.0)));
                let p = Projector::new(&v * v.adjoint())?;
                let k = *index.entry(ray_key(&p)).or_insert_with(|| {
                    rays.push(p);
                    rays.len() - 1
                });
                members.push(k);
            }
            contexts.push((ctx.id.clone(), members));
        }
        let set = RaySet {
            dim: file.dim,
            rays,
            contexts,
        };
        for r in 0..set.rays.len() {
            if set.occurrences(r) != file.sharing {
                return bad(format!("ray {r} lies in {} contexts, expected {}", set.occurrences(r), file.sharing));
            }
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Projector] {
        &self.rays
    }

    /// Context ids with the indices of their rays.
    pub fn contexts(&self) -> &[(String, Vec<usize>)] {
        &self.contexts
    }

    pub fn occurrences(&self, ray: usize) -> usize {
        self.contexts.iter().filter(|(_, m)| m.contains(&ray)).count()
    }

    /// The counting obstruction: a 0/1 colouring with exactly one ray per
    /// context would count each ray an even number of times, so an odd number
    /// of contexts with every ray shared evenly admits none.
    pub fn parity_obstructed(&self) -> bool {
        self.contexts.len() % 2 == 1 && (0..self.rays.len()).all(|r| self.occurrences(r).is_multiple_of(2))
    }

    /// The bases as maximal contexts, each ray with its complement as a
    /// two-atom context below them, and the trivial context.
    pub fn poset(&self) -> Result<ContextPoset> {
        let mut contexts = Vec::new();
        for (id, members) in &self.contexts {
            contexts.push(Context::from_atoms(id.clone(), members.iter().map(|&r| self.rays[r].clone()).collect())?);
        }
        for (r, p) in self.rays.iter().enumerate() {
            let rest = Projector::new(CMatrix::identity(self.dim, self.dim) - p.matrix())?;
            contexts.push(Context::from_atoms(format!("ray{}", r + 1), vec![p.clone(), rest])?);
        }
        ContextPoset::build(contexts, true)
    }
}
