//! Contexts (commutative algebras presented by their atoms), their projector
//! lattices and spectra, and finite posets of contexts ordered by inclusion.
//!
//! In finite dimension a commutative algebra is determined by its minimal
//! projectors. A lattice element is a subset of atoms and a character is the
//! choice of one atom, so after construction every lattice and spectrum
//! question is answered on bit masks.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{
    commutes, eig_hermitian, max_abs, max_abs_diff, projector_from_span, CMatrix,
    HermitianOperator, Projector, DEFAULT_GROUP_TOL, SUBSPACE_TOL,
};

/// Largest atom count for which `lattice_elements` will enumerate.
pub const MAX_LATTICE_ATOMS: usize = 20;

pub const TRIVIAL_ID: &str = "V_triv";

/// Zero-padded hex rendering of a bit set over `atoms` atoms, so that string
/// order agrees with numeric order.
pub fn mask_hex(bits: u32, atoms: usize) -> String {
    let width = atoms.div_ceil(4).max(1);
    format!("0x{bits:0width$x}")
}

macro_rules! atom_bitset {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
        pub struct $name(pub u32);

        impl $name {
            pub const EMPTY: $name = $name(0);

            pub fn full(atoms: usize) -> Self {
                debug_assert!(atoms <= 32);
                if atoms == 32 { $name(u32::MAX) } else { $name((1u32 << atoms) - 1) }
            }

            pub fn single(atom: usize) -> Self {
                $name(1 << atom)
            }

            pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
                $name(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
            }

            pub fn bits(self) -> u32 {
                self.0
            }

            pub fn contains(self, atom: usize) -> bool {
                atom < 32 && self.0 & (1 << atom) != 0
            }

            pub fn is_empty(self) -> bool {
                self.0 == 0
            }

            pub fn len(self) -> usize {
                self.0.count_ones() as usize
            }

            pub fn is_subset(self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            pub fn union(self, other: Self) -> Self {
                $name(self.0 | other.0)
            }

            pub fn intersection(self, other: Self) -> Self {
                $name(self.0 & other.0)
            }

            pub fn insert(&mut self, atom: usize) {
                self.0 |= 1 << atom;
            }

            pub fn iter(self) -> impl Iterator<Item = usize> {
                (0..32).filter(move |&i| self.0 & (1 << i) != 0)
            }

            /// All subsets of the full set on `atoms` atoms, in numeric order.
            pub fn all(atoms: usize) -> impl Iterator<Item = Self> {
                (0..(1u64 << atoms)).map(|b| $name(b as u32))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:#x})", stringify!($name), self.0)
            }
        }

        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_u32(self.0)
            }
        }

        impl fmt::LowerHex for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::LowerHex::fmt(&self.0, f)
            }
        }
    };
}

atom_bitset!(
    /// A projector in a context's lattice, as the set of atoms it sums.
    Mask
);
atom_bitset!(
    /// A set of characters of one context, by atom index.
    CharSet
);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeElement {
    pub context: String,
    pub mask: Mask,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character {
    pub context: String,
    pub atom: usize,
}

#[derive(Debug, Clone)]
pub struct Context {
    id: String,
    dim: usize,
    atoms: Vec<Projector>,
}

type SortKey = Vec<(i64, i64)>;

fn sort_key(p: &Projector) -> SortKey {
    p.matrix()
        .transpose()
        .iter()
        .map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64))
        .collect()
}

impl Context {
    /// Validates an orthogonal resolution of the identity and puts the atoms
    /// in canonical order (descending row-major entries).
    pub fn from_atoms(id: impl Into<String>, atoms: Vec<Projector>) -> Result<Self> {
        let id = id.into();
        let Some(first) = atoms.first() else {
            return Err(Error::InvalidAtoms(format!("context `{id}` has no atoms")));
        };
        let dim = first.dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, a) in atoms.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.dim(),
                });
            }
            if a.rank() == 0 {
                return Err(Error::InvalidAtoms(format!("atom {i} of `{id}` is zero")));
            }
            for (j, b) in atoms.iter().enumerate().skip(i + 1) {
                if !a.is_orthogonal_to(b) {
                    return Err(Error::InvalidAtoms(format!(
                        "atoms {i} and {j} of `{id}` are not orthogonal"
                    )));
                }
            }
            sum += a.matrix();
        }
        let dev = max_abs_diff(&sum, &CMatrix::identity(dim, dim));
        if dev > SUBSPACE_TOL {
            return Err(Error::InvalidAtoms(format!(
                "atoms of `{id}` sum to the identity only within {dev:.3e}"
            )));
        }
        if atoms.len() > 32 {
            return Err(Error::TooManyAtoms {
                count: atoms.len(),
                bound: 32,
            });
        }
        let mut keyed: Vec<(SortKey, Projector)> =
            atoms.into_iter().map(|a| (sort_key(&a), a)).collect();
        keyed.sort_by(|a, b| b.0.cmp(&a.0));
        Ok(Context {
            id,
            dim,
            atoms: keyed.into_iter().map(|(_, a)| a).collect(),
        })
    }

    /// Atoms as spans of blocks of a basis.
    pub fn from_partition(
        id: impl Into<String>,
        basis: &[DVector<num_complex::Complex64>],
        partition: &[Vec<usize>],
    ) -> Result<Self> {
        let atoms = partition
            .iter()
            .map(|block| {
                let vectors: Vec<_> = block
                    .iter()
                    .map(|&i| {
                        basis.get(i).cloned().ok_or_else(|| {
                            Error::Input(format!("partition index {i} outside the basis"))
                        })
                    })
                    .collect::<Result<_>>()?;
                projector_from_span(&vectors)
            })
            .collect::<Result<Vec<_>>>()?;
        Context::from_atoms(id, atoms)
    }

    pub fn trivial(dim: usize) -> Self {
        Context {
            id: TRIVIAL_ID.to_string(),
            dim,
            atoms: vec![Projector::identity(dim)],
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Projector] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.len() == 1
    }

    /// The projector represented by a mask.
    pub fn projector(&self, mask: Mask) -> Projector {
        Projector::orthogonal_sum(self.dim, mask.iter().map(|i| &self.atoms[i]))
    }

    pub fn check_mask(&self, mask: Mask) -> Result<()> {
        if !mask.is_subset(Mask::full(self.atoms.len())) {
            return Err(Error::MaskOutOfRange {
                mask: mask.bits(),
                atoms: self.atoms.len(),
            });
        }
        Ok(())
    }

    pub fn element(&self, mask: Mask) -> LatticeElement {
        LatticeElement {
            context: self.id.clone(),
            mask,
        }
    }

    pub fn character(&self, atom: usize) -> Character {
        assert!(atom < self.atoms.len(), "atom index out of range");
        Character {
            context: self.id.clone(),
            atom,
        }
    }

    pub fn characters(&self) -> Vec<Character> {
        (0..self.atoms.len()).map(|i| self.character(i)).collect()
    }

    /// Same algebra: same number of atoms, each matched by an atom of `other`.
    pub fn same_algebra(&self, other: &Context) -> bool {
        self.dim == other.dim
            && self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .all(|a| other.atoms.iter().any(|b| a.approx_eq(b)))
    }

    /// Enumerates the whole projector lattice.
    pub fn lattice_elements(&self) -> Result<Vec<LatticeElement>> {
        if self.atoms.len() > MAX_LATTICE_ATOMS {
            return Err(Error::TooManyAtoms {
                count: self.atoms.len(),
                bound: MAX_LATTICE_ATOMS,
            });
        }
        Ok(Mask::all(self.atoms.len()).map(|m| self.element(m)).collect())
    }

    /// The characters that send `p` to 1.
    pub fn v_of_p(&self, p: &LatticeElement) -> Result<CharSet> {
        self.expect_id(&p.context)?;
        self.check_mask(p.mask)?;
        Ok(CharSet(p.mask.bits()))
    }

    /// Value of the character on a self-adjoint member of the algebra
    /// (the Gelfand transform of `a` at `kappa`).
    pub fn evaluate(&self, kappa: &Character, a: &HermitianOperator) -> Result<f64> {
        self.expect_id(&kappa.context)?;
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: a.dim(),
            });
        }
        let values = self.atom_values(a)?;
        values.get(kappa.atom).copied().ok_or_else(|| Error::MaskOutOfRange {
            mask: 1 << kappa.atom.min(31),
            atoms: self.atoms.len(),
        })
    }

    /// For `a` in the algebra, its value on each atom; errors when `a` is
    /// not constant on some atom's range.
    pub fn atom_values(&self, a: &HermitianOperator) -> Result<Vec<f64>> {
        let m = a.matrix();
        self.atoms
            .iter()
            .map(|atom| {
                let am = m * atom.matrix();
                let mu = am.trace().re / atom.rank() as f64;
                let dev = max_abs_diff(&am, &(atom.matrix() * num_complex::Complex64::new(mu, 0.0)));
                let comm = max_abs(&(&am - atom.matrix() * m));
                if dev > SUBSPACE_TOL || comm > SUBSPACE_TOL {
                    Err(Error::NotInAlgebra {
                        context: self.id.clone(),
                    })
                } else {
                    Ok(mu)
                }
            })
            .collect()
    }

    /// The operator `sum_i values[i] * atom_i`.
    pub fn operator(&self, values: &[f64]) -> HermitianOperator {
        assert_eq!(values.len(), self.atoms.len());
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (v, a) in values.iter().zip(&self.atoms) {
            m += a.matrix() * num_complex::Complex64::new(*v, 0.0);
        }
        HermitianOperator::new(m).expect("real combination of atoms is Hermitian")
    }

    fn expect_id(&self, id: &str) -> Result<()> {
        if id != self.id {
            return Err(Error::ContextMismatch {
                expected: self.id.clone(),
                found: id.to_string(),
            });
        }
        Ok(())
    }
}

/// The commutative algebra generated by pairwise commuting operators; its
/// atoms are the joint eigenspaces.
pub fn context_from_operators(id: impl Into<String>, ops: &[HermitianOperator]) -> Result<Context> {
    let Some(first) = ops.first() else {
        return Err(Error::EmptyInput);
    };
    let dim = first.dim();
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate().skip(i + 1) {
            if !commutes(a, b)? {
                return Err(Error::NonCommuting {
                    first: i,
                    second: j,
                });
            }
        }
    }
    let mut atoms = vec![Projector::identity(dim)];
    for op in ops {
        let spaces = eig_hermitian(op, DEFAULT_GROUP_TOL)?;
        let mut refined = Vec::new();
        for a in &atoms {
            for s in &spaces {
                let product = a.matrix() * s.projector.matrix();
                if product.trace().re > 0.5 {
                    refined.push(Projector::new(product)?);
                }
            }
        }
        atoms = refined;
    }
    Context::from_atoms(id, atoms)
}

/// `lower <= upper`: every atom of `lower` is a sum of atoms of `upper`.
pub fn inclusion(lower: &Context, upper: &Context) -> bool {
    lower.dim == upper.dim && containment_map(lower, upper).is_some()
}

/// For `lower <= upper`, maps each atom of `upper` to the atom of `lower`
/// containing it.
fn containment_map(lower: &Context, upper: &Context) -> Option<Vec<usize>> {
    let mut map = vec![usize::MAX; upper.atoms.len()];
    for (j, coarse) in lower.atoms.iter().enumerate() {
        let mut inside = Vec::new();
        for (i, fine) in upper.atoms.iter().enumerate() {
            if fine.leq(coarse) {
                inside.push(i);
            }
        }
        let sum = Projector::orthogonal_sum(upper.dim, inside.iter().map(|&i| &upper.atoms[i]));
        if !sum.approx_eq(coarse) {
            return None;
        }
        for i in inside {
            if map[i] != usize::MAX {
                return None;
            }
            map[i] = j;
        }
    }
    map.iter().all(|&j| j != usize::MAX).then_some(map)
}

/// For each atom of `lower`, the atoms of `upper` it has nonzero product with.
fn overlap_table(lower: &Context, upper: &Context) -> Vec<Mask> {
    lower
        .atoms
        .iter()
        .map(|coarse| {
            Mask::from_indices(
                upper
                    .atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, fine)| max_abs(&(coarse.matrix() * fine.matrix())) > SUBSPACE_TOL)
                    .map(|(i, _)| i),
            )
        })
        .collect()
}

/// The largest common subalgebra of two contexts. Its atoms are the sums over
/// connected components of the "nonzero product" graph between the two atom
/// sets.
pub fn meet(a: &Context, b: &Context, id: impl Into<String>) -> Result<Context> {
    if a.dim != b.dim {
        return Err(Error::MixedDimensions {
            first: a.dim,
            second: b.dim,
        });
    }
    let n = a.atoms.len();
    let total = n + b.atoms.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for (i, pa) in a.atoms.iter().enumerate() {
        for (j, pb) in b.atoms.iter().enumerate() {
            if max_abs(&(pa.matrix() * pb.matrix())) > SUBSPACE_TOL {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, n + j));
                parent[ri] = rj;
            }
        }
    }
    let mut components: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match components.iter_mut().find(|(root, _)| *root == r) {
            Some((_, members)) => members.push(i),
            None => components.push((r, vec![i])),
        }
    }
    let atoms = components
        .into_iter()
        .map(|(_, members)| Projector::orthogonal_sum(a.dim, members.iter().map(|&i| &a.atoms[i])))
        .collect();
    Context::from_atoms(id, atoms)
}

static POSET_VERSION: AtomicU64 = AtomicU64::new(1);

/// A finite fragment of the inclusion poset of contexts.
#[derive(Debug, Clone)]
pub struct ContextPoset {
    contexts: Vec<Context>,
    /// `leq[lower][upper]`
    leq: Vec<Vec<bool>>,
    includes_trivial: bool,
    version: u64,
    restriction: HashMap<(usize, usize), Vec<usize>>,
    overlaps: HashMap<(usize, usize), Vec<Mask>>,
}

impl ContextPoset {
    /// Builds the poset, merging contexts with equal atom sets (first id wins)
    /// and optionally inserting the trivial context.
    pub fn build(contexts: Vec<Context>, add_trivial: bool) -> Result<Self> {
        Self::build_with_dim(contexts, add_trivial, None)
    }

    /// Like [`build`](Self::build), with a dimension for the case of an empty
    /// input list.
    pub fn build_with_dim(
        contexts: Vec<Context>,
        add_trivial: bool,
        dim: Option<usize>,
    ) -> Result<Self> {
        let dim = match (contexts.first(), dim) {
            (Some(c), _) => c.dim,
            (None, Some(d)) => d,
            (None, None) if !add_trivial => 0,
            (None, None) => {
                return Err(Error::Input(
                    "cannot add the trivial context without a dimension".into(),
                ))
            }
        };
        let mut merged: Vec<Context> = Vec::with_capacity(contexts.len() + 1);
        for c in contexts {
            if c.dim != dim {
                return Err(Error::MixedDimensions {
                    first: dim,
                    second: c.dim,
                });
            }
            if merged.iter().any(|m| m.same_algebra(&c)) {
                continue;
            }
            if merged.iter().any(|m| m.id == c.id) {
                return Err(Error::Input(format!("duplicate context id `{}`", c.id)));
            }
            merged.push(c);
        }
        let mut includes_trivial = merged.iter().any(Context::is_trivial);
        if add_trivial && !includes_trivial {
            if merged.iter().any(|m| m.id == TRIVIAL_ID) {
                return Err(Error::Input(format!("context id `{TRIVIAL_ID}` is reserved")));
            }
            merged.push(Context::trivial(dim));
            includes_trivial = true;
        }

        let n = merged.len();
        let mut leq = vec![vec![false; n]; n];
        let mut restriction = HashMap::new();
        let mut overlaps = HashMap::new();
        for lo in 0..n {
            for up in 0..n {
                if let Some(map) = containment_map(&merged[lo], &merged[up]) {
                    leq[lo][up] = true;
                    overlaps.insert((lo, up), overlap_table(&merged[lo], &merged[up]));
                    restriction.insert((lo, up), map);
                }
            }
        }
        Ok(ContextPoset {
            contexts: merged,
            leq,
            includes_trivial,
            version: POSET_VERSION.fetch_add(1, Ordering::Relaxed),
            restriction,
            overlaps,
        })
    }

    /// Adds the meet of every pair of contexts until no new context appears.
    pub fn close_under_meets(&self) -> Result<Self> {
        let mut contexts = self.contexts.clone();
        let mut next_id = 0usize;
        loop {
            let mut added = false;
            let n = contexts.len();
            for i in 0..n {
                for j in (i + 1)..n {
                    let m = meet(&contexts[i], &contexts[j], "")?;
                    if contexts.iter().any(|c| c.same_algebra(&m)) {
                        continue;
                    }
                    let id = if m.is_trivial() {
                        TRIVIAL_ID.to_string()
                    } else {
                        loop {
                            let candidate = format!("meet{next_id}");
                            next_id += 1;
                            if !contexts.iter().any(|c| c.id == candidate) {
                                break candidate;
                            }
                        }
                    };
                    contexts.push(m.with_id(id));
                    added = true;
                }
            }
            if !added {
                break;
            }
        }
        let dim = self.dim();
        Self::build_with_dim(contexts, self.includes_trivial, Some(dim))
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.contexts.first().map_or(0, |c| c.dim)
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context(&self, v: usize) -> &Context {
        &self.contexts[v]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.contexts
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::UnknownContext(id.to_string()))
    }

    pub fn includes_trivial(&self) -> bool {
        self.includes_trivial
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn leq(&self, lower: usize, upper: usize) -> bool {
        self.leq[lower][upper]
    }

    /// Contexts below `v`, including `v`.
    pub fn below(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&w| self.leq[w][v])
    }

    /// All pairs `(lower, upper)` with `lower <= upper`, the diagonal included.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |up| self.below(up).map(move |lo| (lo, up)))
    }

    pub fn maximal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| !(0..self.len()).any(|w| w != v && self.leq[v][w]))
            .collect()
    }

    /// Hasse edges `(lower, upper)`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (lo, up) in self.pairs() {
            if lo == up {
                continue;
            }
            let between = (0..self.len())
                .any(|m| m != lo && m != up && self.leq[lo][m] && self.leq[m][up]);
            if !between {
                edges.push((lo, up));
            }
        }
        edges
    }

    pub(crate) fn require_leq(&self, lower: usize, upper: usize) -> Result<()> {
        if lower >= self.len() || upper >= self.len() || !self.leq[lower][upper] {
            let name = |v: usize| {
                self.contexts
                    .get(v)
                    .map_or_else(|| format!("#{v}"), |c| c.id.clone())
            };
            return Err(Error::NotIncluded {
                lower: name(lower),
                upper: name(upper),
            });
        }
        Ok(())
    }

    /// Atom-containment map of the pair (upper atom index -> lower atom index).
    pub fn restriction_map(&self, lower: usize, upper: usize) -> Result<&[usize]> {
        self.require_leq(lower, upper)?;
        Ok(&self.restriction[&(lower, upper)])
    }

    /// Nonzero-product table of the pair: for each lower atom, the upper atoms it meets.
    pub fn overlap_map(&self, lower: usize, upper: usize) -> Result<&[Mask]> {
        self.require_leq(lower, upper)?;
        Ok(&self.overlaps[&(lower, upper)])
    }

    /// A lattice element of `lower` viewed in `upper`.
    pub fn lift(&self, lower: usize, upper: usize, mask: Mask) -> Result<Mask> {
        let map = self.restriction_map(lower, upper)?;
        Ok(Mask::from_indices(
            map.iter()
                .enumerate()
                .filter(|(_, &j)| mask.contains(j))
                .map(|(i, _)| i),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::{c, real_diag};

    #[test]
    fn operators_generate_joint_refinement() {
        let v = context_from_operators("a", &[HermitianOperator::diag(&[0.0, 1.0, 2.0])]).unwrap();
        assert_eq!(v.atom_count(), 3);
        for (i, atom) in v.atoms().iter().enumerate() {
            assert!(atom.approx_eq(&Projector::coordinate(3, &[i])));
        }

        let v = context_from_operators("b", &[HermitianOperator::diag(&[5.0, 5.0, 7.0])]).unwrap();
        assert_eq!(v.atom_count(), 2);
        assert!(v.atoms()[0].approx_eq(&Projector::coordinate(3, &[0, 1])));
        assert!(v.atoms()[1].approx_eq(&Projector::coordinate(3, &[2])));

        let v = context_from_operators(
            "c",
            &[
                HermitianOperator::diag(&[0.0, 1.0, 1.0]),
                HermitianOperator::diag(&[1.0, 1.0, 0.0]),
            ],
        )
        .unwrap();
        assert_eq!(v.atom_count(), 3);
        assert!(v.same_algebra(&fixtures::fix_a_v1()));
    }

    #[test]
    fn non_commuting_generators_reported() {
        let sx = HermitianOperator::new(crate::linalg::real_matrix(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let sz = HermitianOperator::diag(&[1.0, -1.0]);
        let err = context_from_operators("x", &[sz, HermitianOperator::identity(2), sx]).unwrap_err();
        assert_eq!(err, Error::NonCommuting { first: 0, second: 2 });
    }

    #[test]
    fn inclusion_on_fix_a() {
        let (v1, v2, triv) = (fixtures::fix_a_v1(), fixtures::fix_a_v2(), Context::trivial(3));
        assert!(inclusion(&triv, &v1));
        assert!(inclusion(&triv, &v2));
        assert!(inclusion(&v1, &v1));
        assert!(inclusion(&v2, &v1));
        assert!(!inclusion(&v1, &v2));
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(Context::trivial(2).lattice_elements().unwrap().len(), 2);
        assert_eq!(fixtures::fix_a_v1().lattice_elements().unwrap().len(), 8);
        let masks: Vec<u32> = fixtures::fix_a_v2()
            .lattice_elements()
            .unwrap()
            .iter()
            .map(|e| e.mask.bits())
            .collect();
        assert_eq!(masks, vec![0b00, 0b01, 0b10, 0b11]);
    }

    #[test]
    fn lattice_order_matches_projector_order() {
        let v = fixtures::fix_a_v1();
        for p in Mask::all(3) {
            for q in Mask::all(3) {
                assert_eq!(p.is_subset(q), v.projector(p).leq(&v.projector(q)));
            }
        }
    }

    #[test]
    fn too_many_atoms_rejected() {
        let v = Context::from_atoms("big", (0..21).map(|i| Projector::coordinate(21, &[i])).collect())
            .unwrap();
        assert!(matches!(v.lattice_elements(), Err(Error::TooManyAtoms { count: 21, .. })));
    }

    #[test]
    fn gelfand_evaluation() {
        let v = fixtures::fix_a_v1();
        let a = HermitianOperator::diag(&[4.0, 5.0, 6.0]);
        assert!((v.evaluate(&v.character(1), &a).unwrap() - 5.0).abs() < 1e-12);
        for k in v.characters() {
            assert!((v.evaluate(&k, &HermitianOperator::identity(3)).unwrap() - 1.0).abs() < 1e-12);
        }
        let v2 = fixtures::fix_a_v2();
        let a = HermitianOperator::diag(&[3.0, 7.0, 7.0]);
        assert!((v2.evaluate(&v2.character(1), &a).unwrap() - 7.0).abs() < 1e-12);
        // diag(4,5,6) is not constant on the rank-2 atom of V2
        assert!(matches!(
            v2.evaluate(&v2.character(1), &HermitianOperator::diag(&[4.0, 5.0, 6.0])),
            Err(Error::NotInAlgebra { .. })
        ));
        assert!(matches!(
            v2.evaluate(&v.character(0), &a),
            Err(Error::ContextMismatch { .. })
        ));
    }

    #[test]
    fn v_of_p_reads_masks() {
        let v = fixtures::fix_a_v1();
        assert_eq!(v.v_of_p(&v.element(Mask::full(3))).unwrap(), CharSet::full(3));
        assert_eq!(v.v_of_p(&v.element(Mask::EMPTY)).unwrap(), CharSet::EMPTY);
        assert_eq!(
            v.v_of_p(&v.element(Mask::from_indices([1, 2]))).unwrap(),
            CharSet::from_indices([1, 2])
        );
        let other = fixtures::fix_a_v2();
        assert!(v.v_of_p(&other.element(Mask::EMPTY)).is_err());
    }

    #[test]
    fn poset_construction() {
        let p = ContextPoset::build_with_dim(vec![], true, Some(3)).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.context(0).is_trivial());

        let p = fixtures::fix_a();
        assert_eq!(p.len(), 3);
        let (v1, v2, t) = (p.index_of("V1").unwrap(), p.index_of("V2").unwrap(), p.index_of(TRIVIAL_ID).unwrap());
        assert!(p.leq(t, v2) && p.leq(v2, v1) && p.leq(t, v1));
        assert!(!p.leq(v1, v2));
        let mut covers = p.covers();
        covers.sort();
        let mut expected = vec![(t, v2), (v2, v1)];
        expected.sort();
        assert_eq!(covers, expected);

        let p = fixtures::dim2_two_bases();
        assert_eq!(p.len(), 3);
        assert_eq!(p.covers().len(), 2);
        assert_eq!(p.maximal().len(), 2);
    }

    #[test]
    fn duplicates_merge_and_mixed_dims_fail() {
        let a = Context::from_atoms("a", vec![Projector::coordinate(2, &[0]), Projector::coordinate(2, &[1])]).unwrap();
        let b = Context::from_atoms("b", vec![Projector::coordinate(2, &[1]), Projector::coordinate(2, &[0])]).unwrap();
        let p = ContextPoset::build(vec![a.clone(), b], false).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.context(0).id(), "a");
        let err = ContextPoset::build(vec![a, fixtures::fix_a_v1()], false).unwrap_err();
        assert!(matches!(err, Error::MixedDimensions { .. }));
    }

    #[test]
    fn invalid_atoms_rejected() {
        let overlapping = vec![Projector::coordinate(2, &[0]), Projector::identity(2)];
        assert!(matches!(Context::from_atoms("x", overlapping), Err(Error::InvalidAtoms(_))));
        let incomplete = vec![Projector::coordinate(3, &[0])];
        assert!(matches!(Context::from_atoms("x", incomplete), Err(Error::InvalidAtoms(_))));
    }

    #[test]
    fn meets_of_contexts() {
        let v1 = fixtures::fix_a_v1();
        let w = Context::from_atoms("w", vec![Projector::coordinate(3, &[0, 1]), Projector::coordinate(3, &[2])]).unwrap();
        let m = meet(&fixtures::fix_a_v2(), &w, "m").unwrap();
        assert!(m.is_trivial());
        let m = meet(&v1, &w, "m").unwrap();
        assert!(m.same_algebra(&w));

        let p = fixtures::dim2_two_bases();
        let closed = p.close_under_meets().unwrap();
        assert_eq!(closed.len(), p.len());
    }

    #[test]
    fn partition_constructor() {
        let basis: Vec<_> = (0..3)
            .map(|i| {
                let mut v = DVector::from_element(3, c(0.0, 0.0));
                v[i] = c(1.0, 0.0);
                v
            })
            .collect();
        let v = Context::from_partition("p", &basis, &[vec![1, 2], vec![0]]).unwrap();
        assert!(v.same_algebra(&fixtures::fix_a_v2()));
        assert!(v.atoms()[0].approx_eq(&Projector::new(real_diag(&[1.0, 0.0, 0.0])).unwrap()));
    }
}
