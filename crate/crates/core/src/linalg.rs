//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything downstream of this module works on exact discrete encodings
//! (atom masks, context indices). Floating point comparisons happen here, each
//! against one of the fixed absolute tolerances below.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Max-abs deviation from the conjugate transpose accepted for a Hermitian operator.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Idempotence tolerance for projectors.
pub const PROJECTOR_TOL: f64 = 1e-9;
/// `|trace - rank|` bound for projectors.
pub const RANK_TOL: f64 = 1e-8;
/// Subspace relations: orthogonality, containment, equality of projector sums.
pub const SUBSPACE_TOL: f64 = 1e-8;
/// `[A, B]` max-abs bound for commuting operators.
pub const COMMUTE_TOL: f64 = 1e-9;
/// Default eigenvalue grouping tolerance.
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;
/// Gaps in `(tol, AMBIGUITY_FACTOR * tol]` are rejected as unresolvable clusters.
pub const AMBIGUITY_FACTOR: f64 = 100.0;
/// Trace and normalisation tolerance for states.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalue floor for positive semidefiniteness; also the support cut-off.
pub const PSD_FLOOR: f64 = 1e-10;
/// Reconstruction tolerance `H = sum lambda E_lambda`.
pub const RECONSTRUCTION_TOL: f64 = 1e-7;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
}

/// Real matrix given row-major.
pub fn real_matrix(n: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), n * n, "real_matrix: wrong entry count");
    CMatrix::from_fn(n, n, |i, j| c(entries[i * n + j], 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let deviation = max_abs_diff(&matrix, &matrix.adjoint());
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianOperator { matrix })
    }

    pub fn diag(values: &[f64]) -> Self {
        HermitianOperator {
            matrix: real_diag(values),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > PROJECTOR_TOL {
            return Err(Error::NotProjector(format!("not Hermitian ({herm:.3e})")));
        }
        let idem = max_abs_diff(&(&matrix * &matrix), &matrix);
        if idem > PROJECTOR_TOL {
            return Err(Error::NotProjector(format!("not idempotent ({idem:.3e})")));
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() >= RANK_TOL || rank < 0.0 {
            return Err(Error::NotProjector(format!("non-integral trace {trace}")));
        }
        Ok(Projector {
            matrix,
            rank: rank as usize,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Projector {
            matrix: CMatrix::zeros(dim, dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            matrix: CMatrix::identity(dim, dim),
            rank: dim,
        }
    }

    /// Projector onto a coordinate subset of the standard basis.
    pub fn coordinate(dim: usize, indices: &[usize]) -> Self {
        let mut d = vec![0.0; dim];
        for &i in indices {
            d[i] = 1.0;
        }
        Projector {
            matrix: real_diag(&d),
            rank: indices.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `self <= other` in the projector order, decided as `other * self == self`.
    pub fn leq(&self, other: &Projector) -> bool {
        max_abs_diff(&(&other.matrix * &self.matrix), &self.matrix) < SUBSPACE_TOL
    }

    pub fn approx_eq(&self, other: &Projector) -> bool {
        self.dim() == other.dim() && max_abs_diff(&self.matrix, &other.matrix) < SUBSPACE_TOL
    }

    pub fn is_orthogonal_to(&self, other: &Projector) -> bool {
        max_abs(&(&self.matrix * &other.matrix)) < SUBSPACE_TOL
    }

    /// Sum of mutually orthogonal projectors.
    pub fn orthogonal_sum<'a>(dim: usize, parts: impl IntoIterator<Item = &'a Projector>) -> Self {
        let mut matrix = CMatrix::zeros(dim, dim);
        let mut rank = 0;
        for p in parts {
            matrix += &p.matrix;
            rank += p.rank;
        }
        Projector { matrix, rank }
    }

    pub fn complement(&self) -> Self {
        let d = self.dim();
        Projector {
            matrix: CMatrix::identity(d, d) - &self.matrix,
            rank: d - self.rank,
        }
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalised { norm });
        }
        Ok(StateVector { amplitudes })
    }

    /// Normalises a nonzero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-12 {
            return Err(Error::ZeroVector { index: 0 });
        }
        Ok(StateVector {
            amplitudes: amplitudes / c(norm, 0.0),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        StateVector { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `P psi == psi` within [`SUBSPACE_TOL`].
    pub fn is_fixed_by(&self, p: &Projector) -> Result<bool> {
        check_dims(self.dim(), p.dim())?;
        let image = p.matrix() * &self.amplitudes;
        let dev = image
            .iter()
            .zip(self.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(dev < SUBSPACE_TOL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    support: Projector,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = check_square(&matrix)?;
        let deviation = max_abs_diff(&matrix, &matrix.adjoint());
        if deviation > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {deviation:.3e})"
            )));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} != 1")));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let mut support = CMatrix::zeros(dim, dim);
        let mut rank = 0;
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < -PSD_FLOOR {
                return Err(Error::InvalidDensity(format!("negative eigenvalue {lambda:.3e}")));
            }
            if lambda > PSD_FLOOR {
                let v = eig.eigenvectors.column(k);
                support += v * v.adjoint();
                rank += 1;
            }
        }
        let support = Projector {
            matrix: support,
            rank,
        };
        let dev = max_abs_diff(&(support.matrix() * &matrix), &matrix);
        if dev > SUBSPACE_TOL {
            return Err(Error::InvalidDensity(format!(
                "support projector does not reproduce the state ({dev:.3e})"
            )));
        }
        Ok(DensityMatrix { matrix, support })
    }

    pub fn pure(psi: &StateVector) -> Self {
        let v = psi.amplitudes();
        let matrix = v * v.adjoint();
        DensityMatrix {
            support: Projector {
                matrix: matrix.clone(),
                rank: 1,
            },
            matrix,
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(dim, dim) / c(dim as f64, 0.0),
            support: Projector::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn support(&self) -> &Projector {
        &self.support
    }

    /// Born probability `tr(rho P)`.
    pub fn probability(&self, p: &Projector) -> Result<f64> {
        check_dims(self.dim(), p.dim())?;
        Ok(trace_of_product(&self.matrix, p.matrix()))
    }
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut t = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t.re
}

/// One eigenvalue with its eigenprojector.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    pub projector: Projector,
}

/// Spectral decomposition with grouped (possibly degenerate) eigenvalues,
/// returned in strictly increasing order.
pub fn eig_hermitian(h: &HermitianOperator, tol_group: f64) -> Result<Vec<Eigenspace>> {
    assert!(tol_group > 0.0, "grouping tolerance must be positive");
    let dim = h.dim();
    let eig = SymmetricEigen::new(h.matrix().clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, &k) in order.iter().enumerate() {
        if pos == 0 {
            groups.push(vec![k]);
            continue;
        }
        let prev = eig.eigenvalues[order[pos - 1]];
        let cur = eig.eigenvalues[k];
        let gap = cur - prev;
        if gap <= tol_group {
            groups.last_mut().unwrap().push(k);
        } else if gap <= AMBIGUITY_FACTOR * tol_group {
            return Err(Error::AmbiguousCluster {
                lower: prev,
                upper: cur,
                gap,
            });
        } else {
            groups.push(vec![k]);
        }
    }

    Ok(groups
        .into_iter()
        .map(|members| {
            let value =
                members.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / members.len() as f64;
            let mut matrix = CMatrix::zeros(dim, dim);
            for &k in &members {
                let v = eig.eigenvectors.column(k);
                matrix += v * v.adjoint();
            }
            Eigenspace {
                value,
                projector: Projector {
                    matrix,
                    rank: members.len(),
                },
            }
        })
        .collect())
}

/// Orthogonal projector onto the span of linearly independent vectors.
pub fn projector_from_span(vectors: &[CVector]) -> Result<Projector> {
    let Some(first) = vectors.first() else {
        return Err(Error::EmptyInput);
    };
    let dim = first.len();
    let mut basis: Vec<CVector> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        check_dims(dim, v.len())?;
        let norm = v.norm();
        if norm < 1e-12 {
            return Err(Error::ZeroVector { index });
        }
        let mut w = v / c(norm, 0.0);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&w);
                w -= b * coeff;
            }
        }
        let residual = w.norm();
        if residual < RANK_TOL {
            return Err(Error::DependentVectors { index });
        }
        basis.push(w / c(residual, 0.0));
    }
    let mut matrix = CMatrix::zeros(dim, dim);
    for b in &basis {
        matrix += b * b.adjoint();
    }
    Ok(Projector {
        matrix,
        rank: basis.len(),
    })
}

pub fn commutes(a: &HermitianOperator, b: &HermitianOperator) -> Result<bool> {
    check_dims(a.dim(), b.dim())?;
    let comm = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    Ok(max_abs(&comm) < COMMUTE_TOL)
}

/// Probability-one test `tr(rho P) = 1`, decided as `supp(rho) <= P`.
pub fn certain(rho: &DensityMatrix, p: &Projector) -> Result<bool> {
    check_dims(rho.dim(), p.dim())?;
    Ok(rho.support().leq(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        max_abs_diff(a, b) < tol
    }

    #[test]
    fn eig_identity_is_one_eigenspace() {
        let spaces = eig_hermitian(&HermitianOperator::identity(3), DEFAULT_GROUP_TOL).unwrap();
        assert_eq!(spaces.len(), 1);
        assert!((spaces[0].value - 1.0).abs() < 1e-12);
        assert!(spaces[0].projector.approx_eq(&Projector::identity(3)));
        assert_eq!(spaces[0].projector.rank(), 3);
    }

    #[test]
    fn eig_diagonal_groups_degeneracy() {
        let spaces =
            eig_hermitian(&HermitianOperator::diag(&[0.0, 0.0, 1.0]), DEFAULT_GROUP_TOL).unwrap();
        assert_eq!(spaces.len(), 2);
        assert!(spaces[0].value.abs() < 1e-12);
        assert!(spaces[0].projector.approx_eq(&Projector::coordinate(3, &[0, 1])));
        assert!((spaces[1].value - 1.0).abs() < 1e-12);
        assert!(spaces[1].projector.approx_eq(&Projector::coordinate(3, &[2])));
    }

    #[test]
    fn eig_sigma_x() {
        let h = HermitianOperator::new(real_matrix(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let spaces = eig_hermitian(&h, DEFAULT_GROUP_TOL).unwrap();
        assert_eq!(spaces.len(), 2);
        let p_minus = real_matrix(2, &[0.5, -0.5, -0.5, 0.5]);
        let p_plus = real_matrix(2, &[0.5, 0.5, 0.5, 0.5]);
        assert!((spaces[0].value + 1.0).abs() < 1e-12);
        assert!(approx(spaces[0].projector.matrix(), &p_minus, 1e-10));
        assert!((spaces[1].value - 1.0).abs() < 1e-12);
        assert!(approx(spaces[1].projector.matrix(), &p_plus, 1e-10));
        let rebuilt = p_plus - p_minus;
        assert!(approx(&rebuilt, h.matrix(), 1e-8));
    }

    #[test]
    fn eig_rejects_ambiguous_cluster() {
        let h = HermitianOperator::diag(&[0.0, 1e-7, 1.0]);
        let err = eig_hermitian(&h, 1e-8).unwrap_err();
        assert!(matches!(err, Error::AmbiguousCluster { .. }));
        // well separated at a coarser grouping tolerance
        assert_eq!(eig_hermitian(&h, 1e-6).unwrap().len(), 2);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = real_matrix(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn span_projectors() {
        let e0 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let e1 = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let p = projector_from_span(std::slice::from_ref(&e0)).unwrap();
        assert!(p.approx_eq(&Projector::coordinate(2, &[0])));
        let p = projector_from_span(&[e0.clone(), e1.clone()]).unwrap();
        assert!(p.approx_eq(&Projector::identity(2)));
        assert_eq!(p.rank(), 2);
        let plus = (&e0 + &e1) / c(2f64.sqrt(), 0.0);
        let p = projector_from_span(&[plus]).unwrap();
        assert!(approx(p.matrix(), &real_matrix(2, &[0.5, 0.5, 0.5, 0.5]), 1e-12));
    }

    #[test]
    fn span_errors() {
        let e0 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let z = CVector::zeros(2);
        assert_eq!(projector_from_span(&[z]).unwrap_err(), Error::ZeroVector { index: 0 });
        let twice = &e0 * c(2.0, 0.0);
        assert_eq!(
            projector_from_span(&[e0, twice]).unwrap_err(),
            Error::DependentVectors { index: 1 }
        );
    }

    #[test]
    fn commutation() {
        let a = HermitianOperator::diag(&[1.0, 2.0]);
        let b = HermitianOperator::diag(&[3.0, 4.0]);
        assert!(commutes(&a, &b).unwrap());
        let sx = HermitianOperator::new(real_matrix(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let sz = HermitianOperator::diag(&[1.0, -1.0]);
        assert!(!commutes(&sx, &sz).unwrap());
        assert!(commutes(&sx, &HermitianOperator::identity(2)).unwrap());
        assert!(matches!(
            commutes(&sx, &HermitianOperator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn certainty() {
        let zero = DensityMatrix::pure(&StateVector::basis(2, 0));
        assert!(certain(&zero, &Projector::coordinate(2, &[0])).unwrap());
        assert!(!certain(&zero, &Projector::coordinate(2, &[1])).unwrap());
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(!certain(&mixed, &Projector::coordinate(2, &[0])).unwrap());
        assert!(certain(&mixed, &Projector::identity(2)).unwrap());
    }

    #[test]
    fn density_validation() {
        let bad_trace = real_diag(&[0.5, 0.4]);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidDensity(_))));
        let negative = real_diag(&[1.2, -0.2]);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::InvalidDensity(_))));
        let rho = DensityMatrix::new(real_diag(&[0.5, 0.5, 0.0])).unwrap();
        assert_eq!(rho.support().rank(), 2);
    }
}
