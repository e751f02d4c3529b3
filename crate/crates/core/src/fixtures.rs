//! Built-in fixtures and seeded random generators used by tests, examples and
//! the CLI.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::contexts::{Context, ContextPoset};
use crate::linalg::{c, CMatrix, CVector, DensityMatrix, Projector, StateVector};

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The maximal context of the three-dimensional chain: three coordinate atoms.
pub fn fix_a_v1() -> Context {
    Context::from_atoms("V1", (0..3).map(|i| Projector::coordinate(3, &[i])).collect())
        .expect("coordinate atoms")
}

/// The middle context of the chain: `{P0, P1+P2}`.
pub fn fix_a_v2() -> Context {
    Context::from_atoms(
        "V2",
        vec![Projector::coordinate(3, &[0]), Projector::coordinate(3, &[1, 2])],
    )
    .expect("coordinate atoms")
}

/// The chain `V_triv <= V2 <= V1` in dimension 3.
pub fn fix_a() -> ContextPoset {
    ContextPoset::build(vec![fix_a_v1(), fix_a_v2()], true).expect("fixture poset")
}

pub fn dim2_diagonal() -> Context {
    Context::from_atoms(
        "V_diag",
        vec![Projector::coordinate(2, &[0]), Projector::coordinate(2, &[1])],
    )
    .expect("coordinate atoms")
}

pub fn plus_state() -> StateVector {
    StateVector::normalized(CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).expect("nonzero")
}

pub fn minus_state() -> StateVector {
    StateVector::normalized(CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)])).expect("nonzero")
}

pub fn dim2_hadamard() -> Context {
    let atoms = [plus_state(), minus_state()]
        .iter()
        .map(|s| DensityMatrix::pure(s).support().clone())
        .collect();
    Context::from_atoms("V_had", atoms).expect("orthonormal basis")
}

/// `{V_diag, V_triv}`.
pub fn dim2_diagonal_poset() -> ContextPoset {
    ContextPoset::build(vec![dim2_diagonal()], true).expect("fixture poset")
}

/// Diagonal and Hadamard bases in dimension 2, plus the trivial context.
pub fn dim2_two_bases() -> ContextPoset {
    ContextPoset::build(vec![dim2_diagonal(), dim2_hadamard()], true).expect("fixture poset")
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-like random unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    g.qr().q()
}

/// Random density matrix of random rank, supported on the span of the given
/// columns of `basis`.
pub fn random_density_in(rng: &mut impl Rng, basis: &CMatrix, columns: &[usize]) -> DensityMatrix {
    let dim = basis.nrows();
    let rank = rng.random_range(1..=columns.len());
    let mut m = CMatrix::zeros(dim, dim);
    for _ in 0..rank {
        let mut v = CVector::zeros(dim);
        for &col in columns {
            v += basis.column(col) * complex_normal(rng);
        }
        m += &v * v.adjoint();
    }
    let trace = m.trace().re;
    m /= c(trace, 0.0);
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    DensityMatrix::new(m).expect("Gram matrix is a valid density")
}

/// Random density matrix: half the time generic, half the time confined to a
/// random subset of `basis` so that supports are proper.
pub fn random_density(rng: &mut impl Rng, basis: &CMatrix) -> DensityMatrix {
    let dim = basis.nrows();
    let mut columns: Vec<usize> = (0..dim).collect();
    if rng.random_bool(0.5) {
        columns.shuffle(rng);
        let keep = rng.random_range(1..=dim);
        columns.truncate(keep);
        columns.sort_unstable();
    }
    random_density_in(rng, basis, &columns)
}

/// Random density matrix diagonal in the standard basis, with some entries zeroed.
pub fn random_diagonal_density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    loop {
        let weights: Vec<f64> = (0..dim)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
            .collect();
        let total: f64 = weights.iter().sum();
        if total > 1e-3 {
            let m = crate::linalg::real_diag(&weights.iter().map(|w| w / total).collect::<Vec<_>>());
            return DensityMatrix::new(m).expect("diagonal density");
        }
    }
}

/// Random partition of `0..n` into at most `max_blocks` nonempty blocks.
pub fn random_partition(rng: &mut impl Rng, n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    let blocks = rng.random_range(1..=max_blocks.min(n));
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..blocks)).collect();
    // relabel so that every block is nonempty
    labels.iter_mut().take(blocks).enumerate().for_each(|(i, l)| *l = i);
    labels.shuffle(rng);
    let mut parts = vec![Vec::new(); blocks];
    for (i, l) in labels.into_iter().enumerate() {
        parts[l].push(i);
    }
    parts
}

/// A seeded random poset together with the bases its contexts were cut from.
#[derive(Debug, Clone)]
pub struct RandomPoset {
    pub poset: ContextPoset,
    pub bases: Vec<CMatrix>,
}

/// Random poset: dimension 2..=`max_dim`, up to `max_contexts` contexts with at
/// most `max_atoms` atoms each, cut as coarsenings of one to three random
/// orthonormal bases (so inclusions occur), plus the trivial context.
pub fn random_poset(
    rng: &mut impl Rng,
    max_dim: usize,
    max_contexts: usize,
    max_atoms: usize,
) -> RandomPoset {
    let dim = rng.random_range(2..=max_dim);
    let base_count = rng.random_range(1..=3);
    let bases: Vec<CMatrix> = (0..base_count)
        .map(|i| {
            if i == 0 && rng.random_bool(0.3) {
                CMatrix::identity(dim, dim)
            } else {
                random_unitary(rng, dim)
            }
        })
        .collect();
    let count = rng.random_range(1..=max_contexts.saturating_sub(1).max(1));
    let mut contexts = Vec::with_capacity(count);
    for k in 0..count {
        let b = &bases[rng.random_range(0..base_count)];
        let vectors: Vec<CVector> = (0..dim).map(|j| b.column(j).into_owned()).collect();
        let partition = if dim <= max_atoms && rng.random_bool(0.3) {
            (0..dim).map(|j| vec![j]).collect()
        } else {
            random_partition(rng, dim, max_atoms)
        };
        contexts.push(
            Context::from_partition(format!("C{k}"), &vectors, &partition)
                .expect("partition of an orthonormal basis"),
        );
    }
    let poset = ContextPoset::build(contexts, true).expect("random contexts share a dimension");
    RandomPoset { poset, bases }
}

/// Parameters of the random posets used throughout the checks: dimension at
/// most 6, at most 12 contexts, at most 6 atoms per context.
pub fn standard_random_poset(rng: &mut impl Rng) -> RandomPoset {
    random_poset(rng, 6, 12, 6)
}

impl RandomPoset {
    /// Random state adapted to one of the bases.
    pub fn random_state(&self, rng: &mut impl Rng) -> DensityMatrix {
        let b = &self.bases[rng.random_range(0..self.bases.len())];
        random_density(rng, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn unitaries_are_unitary() {
        let mut r = rng(7);
        for dim in 1..6 {
            let u = random_unitary(&mut r, dim);
            assert!(max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(dim, dim)) < 1e-10);
        }
    }

    #[test]
    fn random_posets_respect_bounds() {
        let mut r = rng(11);
        for _ in 0..50 {
            let rp = standard_random_poset(&mut r);
            let p = &rp.poset;
            assert!(p.len() <= 12);
            assert!(p.dim() <= 6);
            assert!(p.contexts().iter().all(|c| c.atom_count() <= 6));
            assert!(p.includes_trivial());
        }
    }

    #[test]
    fn partitions_cover() {
        let mut r = rng(3);
        for n in 1..7 {
            let parts = random_partition(&mut r, n, 4);
            let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
            assert!(parts.iter().all(|p| !p.is_empty()));
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = standard_random_poset(&mut rng(5));
        let b = standard_random_poset(&mut rng(5));
        assert_eq!(a.poset.len(), b.poset.len());
        assert!(max_abs_diff(&a.bases[0], &b.bases[0]) == 0.0);
    }
}
