//! The category of discrete-spectrum self-adjoint operators, with an arrow
//! `B -> A` whenever `B = f(A)`.
//!
//! Functions are represented only by their values on the spectrum of `A`.
//! Subsets of a spectrum are masks over the sorted distinct eigenvalues.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::contexts::{CharSet, Mask};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::linalg::{
    c, certain, eig_hermitian, max_abs_diff, CMatrix, CVector, DensityMatrix, HermitianOperator,
    Projector, StateVector, DEFAULT_GROUP_TOL, RECONSTRUCTION_TOL, STATE_TOL, SUBSPACE_TOL,
};
use crate::site::Site;

/// Threshold on `||E psi||` for an eigenvalue to carry weight in a pure state.
pub const PURE_WEIGHT_TOL: f64 = 1e-9;

/// An operator with its distinct eigenvalues (ascending) and eigenprojectors.
#[derive(Debug, Clone)]
pub struct ODecomposition {
    id: String,
    operator: HermitianOperator,
    spectrum: Vec<f64>,
    projectors: Vec<Projector>,
}

impl ODecomposition {
    pub fn new(id: impl Into<String>, operator: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(id, operator, DEFAULT_GROUP_TOL)
    }

    pub fn with_tolerance(id: impl Into<String>, operator: HermitianOperator, tol_group: f64) -> Result<Self> {
        let spaces = eig_hermitian(&operator, tol_group)?;
        let d = ODecomposition {
            id: id.into(),
            spectrum: spaces.iter().map(|s| s.value).collect(),
            projectors: spaces.into_iter().map(|s| s.projector).collect(),
            operator,
        };
        let dev = max_abs_diff(&d.reconstruct(), d.operator.matrix());
        if dev > RECONSTRUCTION_TOL {
            return Err(Error::Input(format!(
                "spectral decomposition of `{}` reconstructs only within {dev:.3e}",
                d.id
            )));
        }
        Ok(d)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    /// `sum_k lambda_k E_k`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        self.spectrum
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(n, n), |acc, (l, p)| acc + p.matrix() * c(*l, 0.0))
    }

    /// Spectral projector of a set of eigenvalues.
    pub fn projector(&self, subset: Mask) -> Projector {
        Projector::orthogonal_sum(self.dim(), subset.iter().map(|i| &self.projectors[i]))
    }

    pub fn full(&self) -> Mask {
        Mask::full(self.spectrum.len())
    }

    pub fn value_index(&self, x: f64) -> Option<usize> {
        self.spectrum.iter().position(|l| (l - x).abs() <= SUBSPACE_TOL)
    }

    /// Mask of the given eigenvalues; errors on a value outside the spectrum.
    pub fn subset(&self, values: &[f64]) -> Result<Mask> {
        values.iter().try_fold(Mask::EMPTY, |m, &x| {
            self.value_index(x)
                .map(|i| m.union(Mask::single(i)))
                .ok_or(Error::NotInSpectrum { value: x })
        })
    }

    pub fn values(&self, subset: Mask) -> Vec<f64> {
        subset.iter().map(|i| self.spectrum[i]).collect()
    }

    pub fn check_subset(&self, subset: Mask) -> Result<()> {
        if !subset.is_subset(self.full()) {
            return Err(Error::MaskOutOfRange {
                mask: subset.bits(),
                atoms: self.spectrum.len(),
            });
        }
        Ok(())
    }
}

/// A function on the spectrum of the target: `values[i] = f(lambda_i)`, with
/// `image[i]` the index of that value in the spectrum of the source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueMap {
    pub values: Vec<f64>,
    pub image: Vec<usize>,
}

impl EigenvalueMap {
    /// Image of a subset of the target's spectrum.
    pub fn apply(&self, subset: Mask) -> Mask {
        Mask::from_indices(subset.iter().map(|i| self.image[i]))
    }

    /// Preimage of a subset of the source's spectrum.
    pub fn preimage(&self, subset: Mask) -> Mask {
        Mask::from_indices((0..self.image.len()).filter(|&i| subset.contains(self.image[i])))
    }
}

/// The arrow `b -> a` if `b` is a function of `a`: `b` must act as a scalar on
/// every eigenspace of `a`.
pub fn discover_morphism(b: &ODecomposition, a: &ODecomposition) -> Option<EigenvalueMap> {
    if a.dim() != b.dim() {
        return None;
    }
    let bm = b.operator.matrix();
    let mut values = Vec::with_capacity(a.spectrum.len());
    for e in &a.projectors {
        let be = bm * e.matrix();
        let mu = be.trace().re / e.rank() as f64;
        if max_abs_diff(&be, &(e.matrix() * c(mu, 0.0))) > SUBSPACE_TOL {
            return None;
        }
        values.push(mu);
    }
    let image = values
        .iter()
        .map(|&mu| b.value_index(mu))
        .collect::<Option<Vec<_>>>()?;
    let rebuilt = values
        .iter()
        .zip(&a.projectors)
        .fold(CMatrix::zeros(a.dim(), a.dim()), |acc, (mu, e)| acc + e.matrix() * c(*mu, 0.0));
    if max_abs_diff(&rebuilt, bm) > RECONSTRUCTION_TOL {
        return None;
    }
    let f = EigenvalueMap { values, image };
    // on discrete spectra the image of the spectrum is the whole spectrum
    assert_eq!(
        f.apply(a.full()),
        b.full(),
        "image of the spectrum of `{}` misses eigenvalues of `{}`",
        a.id,
        b.id
    );
    Some(f)
}

/// Spectral projector of `f(A)` on `f(delta)`, computed twice: as the
/// projector of `A` on the preimage of `f(delta)`, and as the meet of every
/// spectral projector of `b = f(A)` above the projector of `A` on `delta`.
/// Returns the first; disagreement is an error.
pub fn o_coarse_grain(
    f: &EigenvalueMap,
    a: &ODecomposition,
    b: &ODecomposition,
    delta: Mask,
) -> Result<Projector> {
    let (direct, infimum) = o_coarse_grain_paths(f, a, b, delta)?;
    if direct != infimum {
        return Err(Error::DualPathDisagreement {
            direct: direct.bits(),
            infimum: infimum.bits(),
        });
    }
    Ok(a.projector(direct))
}

/// Both computations of [`o_coarse_grain`], as masks over the spectrum of `a`.
pub fn o_coarse_grain_paths(
    f: &EigenvalueMap,
    a: &ODecomposition,
    b: &ODecomposition,
    delta: Mask,
) -> Result<(Mask, Mask)> {
    a.check_subset(delta)?;
    if f.image.len() != a.spectrum.len() {
        return Err(Error::DimensionMismatch {
            expected: a.spectrum.len(),
            found: f.image.len(),
        });
    }
    let direct = f.preimage(f.apply(delta));

    let target = a.projector(delta);
    let n = a.dim();
    let mut meet = CMatrix::identity(n, n);
    for gamma in Mask::all(b.spectrum.len()) {
        let q = b.projector(gamma);
        if target.leq(&q) {
            meet = &meet * q.matrix();
        }
    }
    let meet = Projector::new(meet)?;
    let infimum = Mask::from_indices((0..a.spectrum.len()).filter(|&i| a.projectors[i].leq(&meet)));
    if !a.projector(infimum).approx_eq(&meet) {
        return Err(Error::Input(format!(
            "infimum over the spectral algebra of `{}` is not spectral for `{}`",
            b.id, a.id
        )));
    }
    Ok((direct, infimum))
}

#[derive(Debug, Clone)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn dim(&self) -> usize {
        match self {
            State::Pure(s) => s.dim(),
            State::Mixed(r) => r.dim(),
        }
    }

    /// Probability one for the projector.
    pub fn certain(&self, p: &Projector) -> Result<bool> {
        match self {
            State::Pure(s) => s.is_fixed_by(p),
            State::Mixed(r) => certain(r, p),
        }
    }

    /// Whether the projector carries nonzero weight.
    pub fn charges(&self, p: &Projector) -> Result<bool> {
        match self {
            State::Pure(s) => {
                if s.dim() != p.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: s.dim(),
                        found: p.dim(),
                    });
                }
                Ok((p.matrix() * s.amplitudes()).norm() > PURE_WEIGHT_TOL)
            }
            State::Mixed(r) => Ok(r.probability(p)? > STATE_TOL),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(s) => DensityMatrix::pure(s),
            State::Mixed(r) => r.clone(),
        }
    }
}

/// Least set of eigenvalues carrying probability one.
pub fn elementary_support(state: &State, a: &ODecomposition) -> Result<Mask> {
    let mut mask = Mask::EMPTY;
    for (i, e) in a.projectors.iter().enumerate() {
        if state.charges(e)? {
            mask.insert(i);
        }
    }
    Ok(mask)
}

static CATEGORY_VERSION: AtomicU64 = AtomicU64::new(1 << 40);

/// A finite full subcategory: operators with every arrow discovered.
#[derive(Debug, Clone)]
pub struct OCategory {
    ops: Vec<ODecomposition>,
    /// `arrows[b][a]` is the arrow `b -> a`.
    arrows: Vec<Vec<Option<EigenvalueMap>>>,
    version: u64,
}

impl OCategory {
    pub fn new(ops: Vec<ODecomposition>) -> Result<Self> {
        if let Some(first) = ops.first() {
            if let Some(bad) = ops.iter().find(|o| o.dim() != first.dim()) {
                return Err(Error::MixedDimensions {
                    first: first.dim(),
                    second: bad.dim(),
                });
            }
        }
        for (i, o) in ops.iter().enumerate() {
            if ops[..i].iter().any(|p| p.id == o.id) {
                return Err(Error::Input(format!("duplicate operator id `{}`", o.id)));
            }
        }
        let arrows = ops
            .iter()
            .map(|b| ops.iter().map(|a| discover_morphism(b, a)).collect())
            .collect();
        Ok(OCategory {
            ops,
            arrows,
            version: CATEGORY_VERSION.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[ODecomposition] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &ODecomposition {
        &self.ops[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.ops
            .iter()
            .position(|o| o.id == id)
            .ok_or_else(|| Error::UnknownContext(id.to_string()))
    }

    pub fn arrow(&self, b: usize, a: usize) -> Option<&EigenvalueMap> {
        self.arrows[b][a].as_ref()
    }

    /// Sources of arrows into `a`.
    pub fn sources(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.arrows[b][a].is_some()).collect()
    }

    fn require_arrow(&self, b: usize, a: usize) -> Result<&EigenvalueMap> {
        self.arrow(b, a).ok_or_else(|| Error::NotIncluded {
            lower: self.ops[b].id.clone(),
            upper: self.ops[a].id.clone(),
        })
    }

    /// First triple `(c, b, a)` with arrows `c -> b -> a` whose composite is
    /// missing or disagrees with the discovered arrow `c -> a`.
    pub fn composition_failure(&self) -> Option<(usize, usize, usize)> {
        for a in 0..self.len() {
            if self.arrow(a, a).is_none_or(|id| id.image != (0..id.image.len()).collect::<Vec<_>>()) {
                return Some((a, a, a));
            }
            for b in self.sources(a) {
                let f = self.arrow(b, a).expect("source");
                for cc in self.sources(b) {
                    let g = self.arrow(cc, b).expect("source");
                    let ok = self.arrow(cc, a).is_some_and(|h| {
                        (0..f.image.len()).all(|i| {
                            h.image[i] == g.image[f.image[i]]
                                && (h.values[i] - g.values[f.image[i]]).abs() <= SUBSPACE_TOL
                        })
                    });
                    if !ok {
                        return Some((cc, b, a));
                    }
                }
            }
        }
        None
    }

    /// Every arrow maps the spectrum of its target onto the spectrum of its
    /// source.
    pub fn spectra_regular(&self) -> bool {
        (0..self.len()).all(|a| {
            self.sources(a)
                .into_iter()
                .all(|b| self.arrows[b][a].as_ref().expect("source").apply(self.ops[a].full()) == self.ops[b].full())
        })
    }
}

impl Site for OCategory {
    fn stage_count(&self) -> usize {
        self.len()
    }

    fn stage_name(&self, stage: usize) -> &str {
        &self.ops[stage].id
    }

    fn leq(&self, lower: usize, upper: usize) -> bool {
        self.arrows[lower][upper].is_some()
    }

    fn atom_count(&self, stage: usize) -> usize {
        self.ops[stage].spectrum.len()
    }

    fn coarse_grain(&self, lower: usize, upper: usize, mask: Mask) -> Result<Mask> {
        self.ops[upper].check_subset(mask)?;
        Ok(self.require_arrow(lower, upper)?.apply(mask))
    }

    fn restrict_chars(&self, lower: usize, upper: usize, chars: CharSet) -> Result<CharSet> {
        let f = self.require_arrow(lower, upper)?;
        self.ops[upper].check_subset(Mask(chars.bits()))?;
        Ok(CharSet::from_indices(chars.iter().map(|i| f.image[i])))
    }

    fn lift(&self, lower: usize, upper: usize, mask: Mask) -> Result<Mask> {
        Ok(self.require_arrow(lower, upper)?.preimage(mask))
    }

    fn projector(&self, stage: usize, mask: Mask) -> Projector {
        self.ops[stage].projector(mask)
    }

    fn version(&self) -> u64 {
        self.version
    }
}

/// Sources `B` of arrows into `a` for which the state is certain of
/// `B in f(delta)`.
pub fn nu_psi_o(state: &State, a: usize, delta: Mask, cat: &OCategory) -> Result<BTreeSet<usize>> {
    cat.op(a).check_subset(delta)?;
    let mut out = BTreeSet::new();
    for b in cat.sources(a) {
        let f = cat.arrow(b, a).expect("source");
        if state.certain(&cat.op(b).projector(f.apply(delta)))? {
            out.insert(b);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterizeReport {
    pub anchor: String,
    pub delta: Vec<String>,
    pub support: Vec<String>,
    pub definitional: Vec<String>,
    pub characterized: Vec<String>,
    pub equal: bool,
    /// Arrows on which both coarse-graining computations were compared.
    pub dual_path_checks: usize,
}

fn fmt_values(vals: &[f64]) -> Vec<String> {
    vals.iter().map(|v| format!("{v:.6}")).collect()
}

fn names(cat: &OCategory, set: &BTreeSet<usize>) -> Vec<String> {
    set.iter().map(|&i| cat.op(i).id.clone()).collect()
}

/// Compares the definitional arrow set with the support characterization
/// `f(delta) >= f(support)`, and checks the two coarse-graining computations
/// on every arrow.
pub fn characterize_check(state: &State, a: usize, delta: Mask, cat: &OCategory) -> Result<CharacterizeReport> {
    let anchor = cat.op(a);
    let definitional = nu_psi_o(state, a, delta, cat)?;
    let s = elementary_support(state, anchor)?;
    let mut characterized = BTreeSet::new();
    let mut checks = 0;
    for b in cat.sources(a) {
        let f = cat.arrow(b, a).expect("source");
        o_coarse_grain(f, anchor, cat.op(b), delta)?;
        checks += 1;
        if f.apply(s).is_subset(f.apply(delta)) {
            characterized.insert(b);
        }
    }
    Ok(CharacterizeReport {
        anchor: anchor.id.clone(),
        delta: fmt_values(&anchor.values(delta)),
        support: fmt_values(&anchor.values(s)),
        equal: definitional == characterized,
        definitional: names(cat, &definitional),
        characterized: names(cat, &characterized),
        dual_path_checks: checks,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FuncSupportReport {
    pub anchor: String,
    pub arrows_checked: usize,
    pub subset_holds: bool,
    pub equality_holds: bool,
    /// Sources where equality fails.
    pub failures: Vec<String>,
}

/// For every arrow `f: B -> A`, compares `f(s(A))` with `s(B)`.
pub fn func_subset_check(state: &State, a: usize, cat: &OCategory) -> Result<FuncSupportReport> {
    let sa = elementary_support(state, cat.op(a))?;
    let mut report = FuncSupportReport {
        anchor: cat.op(a).id.clone(),
        arrows_checked: 0,
        subset_holds: true,
        equality_holds: true,
        failures: Vec::new(),
    };
    for b in cat.sources(a) {
        let f = cat.arrow(b, a).expect("source");
        let image = f.apply(sa);
        let sb = elementary_support(state, cat.op(b))?;
        report.arrows_checked += 1;
        report.subset_holds &= image.is_subset(sb);
        if image != sb {
            report.equality_holds = false;
            report.failures.push(cat.op(b).id.clone());
        }
    }
    Ok(report)
}

/// Elementary supports at every operator of the category.
pub fn support_assignment(state: &State, cat: &OCategory) -> Result<Vec<Mask>> {
    cat.ops().iter().map(|o| elementary_support(state, o)).collect()
}

/// One random instance: a category around an anchor, a state and a subset of
/// the anchor's spectrum.
#[derive(Debug, Clone)]
pub struct ODraw {
    pub category: OCategory,
    pub anchor: usize,
    pub state: State,
    pub delta: Mask,
}

const EIGENVALUE_POOL: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
const FUNCTION_POOL: [f64; 4] = [-1.0, 0.0, 1.0, 3.0];

fn operator_from(u: &CMatrix, diag: &[f64]) -> HermitianOperator {
    let d = crate::linalg::real_diag(diag);
    let m = u * d * u.adjoint();
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    HermitianOperator::new(m).expect("unitary conjugate of a real diagonal")
}

/// Random anchor `A` of dimension 2..=5 with eigenvalues drawn from a small
/// pool (so spectra are often degenerate), several functions of it, a
/// function of a function, and sometimes an unrelated operator.
pub fn random_o_draw(rng: &mut impl Rng) -> ODraw {
    let dim = rng.random_range(2..=5);
    let u = fixtures::random_unitary(rng, dim);
    let diag: Vec<f64> = (0..dim)
        .map(|_| EIGENVALUE_POOL[rng.random_range(0..EIGENVALUE_POOL.len())])
        .collect();
    let mut ops = vec![ODecomposition::new("A", operator_from(&u, &diag)).expect("anchor")];

    let apply = |diag: &[f64], table: &[(f64, f64)]| -> Vec<f64> {
        diag.iter()
            .map(|x| table.iter().find(|(k, _)| k == x).map(|(_, v)| *v).expect("tabulated"))
            .collect()
    };
    let random_fn = |rng: &mut dyn rand::RngCore, domain: &[f64]| -> Vec<(f64, f64)> {
        domain
            .iter()
            .map(|&x| (x, FUNCTION_POOL[rng.random_range(0..FUNCTION_POOL.len())]))
            .collect()
    };
    let functions = rng.random_range(1..=3);
    let mut derived = Vec::new();
    for k in 0..functions {
        let table = random_fn(rng, &EIGENVALUE_POOL);
        let d = apply(&diag, &table);
        ops.push(ODecomposition::new(format!("f{k}(A)"), operator_from(&u, &d)).expect("derived"));
        derived.push(d);
    }
    let squares: Vec<f64> = diag.iter().map(|x| x * x).collect();
    ops.push(ODecomposition::new("A^2", operator_from(&u, &squares)).expect("square"));
    let inner = &derived[0];
    let table = random_fn(rng, &FUNCTION_POOL);
    ops.push(ODecomposition::new("g(f0(A))", operator_from(&u, &apply(inner, &table))).expect("composite"));
    if rng.random_bool(0.3) {
        let v = fixtures::random_unitary(rng, dim);
        let other: Vec<f64> = (0..dim).map(|i| i as f64).collect();
        ops.push(ODecomposition::new("X", operator_from(&v, &other)).expect("unrelated"));
    }
    let category = OCategory::new(ops).expect("same dimension");
    let anchor_op = category.op(0);

    let mut columns: Vec<usize> = (0..dim).collect();
    if rng.random_bool(0.5) {
        // confine the state to a random union of the anchor's eigenspaces
        let k = anchor_op.spectrum().len();
        let chosen = Mask::from_indices((0..k).filter(|_| rng.random_bool(0.5)));
        let chosen = if chosen.is_empty() { Mask::single(rng.random_range(0..k)) } else { chosen };
        columns = (0..dim)
            .filter(|&j| chosen.contains(anchor_op.value_index(diag[j]).expect("eigenvalue")))
            .collect();
    }
    columns.shuffle(rng);
    let state = if rng.random_bool(0.5) {
        let mut v = CVector::zeros(dim);
        for &j in &columns {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            v += u.column(j) * c(re, im);
        }
        State::Pure(StateVector::normalized(v).unwrap_or_else(|_| {
            StateVector::new(u.column(columns[0]).into_owned()).expect("unit column")
        }))
    } else {
        State::Mixed(fixtures::random_density_in(rng, &u, &columns))
    };
    let k = anchor_op.spectrum().len();
    let delta = Mask::from_indices((0..k).filter(|_| rng.random_bool(0.5)));
    ODraw {
        category,
        anchor: 0,
        state,
        delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_diag;

    fn op(id: &str, d: &[f64]) -> ODecomposition {
        ODecomposition::new(id, HermitianOperator::diag(d)).unwrap()
    }

    fn pure(v: &[f64]) -> State {
        State::Pure(StateVector::normalized(CVector::from_iterator(v.len(), v.iter().map(|x| c(*x, 0.0)))).unwrap())
    }

    #[test]
    fn morphism_discovery_examples() {
        let a = op("A", &[1.0, 2.0, 3.0]);
        let b = op("B", &[1.0, 4.0, 9.0]);
        let f = discover_morphism(&b, &a).unwrap();
        assert_eq!(f.values, vec![1.0, 4.0, 9.0]);
        let one = op("I", &[1.0, 1.0, 1.0]);
        assert_eq!(discover_morphism(&one, &a).unwrap().values, vec![1.0; 3]);
        assert!(discover_morphism(&op("B", &[1.0, 2.0, 2.0]), &op("A", &[1.0, 1.0, 2.0])).is_none());
    }

    #[test]
    fn coarse_grain_examples() {
        let a = op("A", &[-1.0, 1.0, 2.0]);
        let b = op("B", &[1.0, 1.0, 4.0]);
        let f = discover_morphism(&b, &a).unwrap();
        let delta = a.subset(&[1.0]).unwrap();
        let p = o_coarse_grain(&f, &a, &b, delta).unwrap();
        assert!(p.approx_eq(&Projector::new(real_diag(&[1.0, 1.0, 0.0])).unwrap()));
        assert!(o_coarse_grain(&f, &a, &b, a.full()).unwrap().approx_eq(&Projector::identity(3)));
        let id = discover_morphism(&a, &a).unwrap();
        let d = a.subset(&[-1.0, 2.0]).unwrap();
        assert!(o_coarse_grain(&id, &a, &a, d).unwrap().approx_eq(&a.projector(d)));
        assert_eq!(a.subset(&[5.0]), Err(Error::NotInSpectrum { value: 5.0 }));
    }

    #[test]
    fn elementary_support_examples() {
        let a = op("A", &[1.0, 2.0, 3.0]);
        assert_eq!(elementary_support(&pure(&[0.0, 1.0, 0.0]), &a).unwrap(), a.subset(&[2.0]).unwrap());
        assert_eq!(elementary_support(&pure(&[1.0, 1.0, 0.0]), &a).unwrap(), a.subset(&[1.0, 2.0]).unwrap());
        let flat = op("F", &[4.0, 4.0]);
        let mixed = State::Mixed(DensityMatrix::maximally_mixed(2));
        assert_eq!(elementary_support(&mixed, &flat).unwrap(), flat.subset(&[4.0]).unwrap());
    }

    #[test]
    fn nu_psi_examples() {
        let cat = OCategory::new(vec![op("A", &[1.0, 2.0]), op("I", &[1.0, 1.0])]).unwrap();
        let (a, i) = (0, 1);
        let psi = pure(&[0.0, 1.0]);
        assert_eq!(nu_psi_o(&psi, a, cat.op(a).full(), &cat).unwrap(), BTreeSet::from([a, i]));
        assert!(nu_psi_o(&psi, a, Mask::EMPTY, &cat).unwrap().is_empty());
        let delta = cat.op(a).subset(&[2.0]).unwrap();
        assert_eq!(nu_psi_o(&psi, a, delta, &cat).unwrap(), BTreeSet::from([a, i]));
        let r = characterize_check(&psi, a, delta, &cat).unwrap();
        assert!(r.equal);
    }

    #[test]
    fn func_support_example() {
        let cat = OCategory::new(vec![op("A", &[-1.0, 1.0, 2.0]), op("A2", &[1.0, 1.0, 4.0])]).unwrap();
        let psi = pure(&[1.0, 1.0, 0.0]);
        assert_eq!(elementary_support(&psi, cat.op(0)).unwrap(), Mask(0b011));
        let r = func_subset_check(&psi, 0, &cat).unwrap();
        assert!(r.subset_holds && r.equality_holds);
        assert_eq!(r.arrows_checked, 2);
    }

    #[test]
    fn random_draws_are_regular() {
        let mut rng = fixtures::rng(99);
        for _ in 0..40 {
            let d = random_o_draw(&mut rng);
            assert_eq!(d.category.composition_failure(), None);
            assert!(d.category.spectra_regular());
            assert!(characterize_check(&d.state, d.anchor, d.delta, &d.category).unwrap().equal);
            assert!(func_subset_check(&d.state, d.anchor, &d.category).unwrap().equality_holds);
        }
    }
}
