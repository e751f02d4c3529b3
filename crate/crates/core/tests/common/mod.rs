//! Independent reference computations for the integration tests. They work
//! from matrices and raw data only and never call the library's
//! coarse-graining, restriction or support code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use toposval::contexts::{Context, ContextPoset, Mask};
use toposval::linalg::{CMatrix, DensityMatrix};
use toposval::valuations::MorphismSetValuation;

/// Projector comparison tolerance used by every oracle here.
pub const ORACLE_TOL: f64 = 1e-8;

pub fn atom_sum(ctx: &Context, mask: u32) -> CMatrix {
    let n = ctx.dim();
    let mut m = CMatrix::zeros(n, n);
    for (k, a) in ctx.atoms().iter().enumerate() {
        if mask >> k & 1 == 1 {
            m += a.matrix();
        }
    }
    m
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            t += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    t
}

/// `p <= q` for projectors, via `tr(qp) = tr(p)`.
pub fn proj_leq(p: &CMatrix, q: &CMatrix) -> bool {
    (trace_product(q, p) - p.trace().re).abs() < ORACLE_TOL
}

/// Least element of `lower`'s lattice above the projector `p`, found by
/// enumerating the lattice and intersecting everything above `p`. The order
/// test is `tr(qp) = tr(p)`, which is linear in `q`, so it is evaluated from
/// the per-atom traces.
pub fn infimum(lower: &Context, p: &CMatrix) -> u32 {
    let n = lower.atom_count();
    let weights: Vec<f64> = lower.atoms().iter().map(|a| trace_product(a.matrix(), p)).collect();
    let rank = p.trace().re;
    let above = |m: u32| ((0..n).filter(|k| m >> k & 1 == 1).map(|k| weights[k]).sum::<f64>() - rank).abs() < ORACLE_TOL;
    let full = (1u32 << n) - 1;
    let mut least = full;
    for m in 0..=full {
        if above(m) {
            least &= m;
        }
    }
    assert!(above(least), "lattice meet failed to stay above");
    least
}

/// Coarse-graining of `mask` from `upper` to `lower` by the infimum.
pub fn coarse_grain(poset: &ContextPoset, lower: usize, upper: usize, mask: u32) -> u32 {
    infimum(poset.context(lower), &atom_sum(poset.context(upper), mask))
}

/// `lower <= upper` decided from matrices: every atom of `lower` is a sum of
/// atoms of `upper`.
pub fn included(lower: &Context, upper: &Context) -> bool {
    lower.atoms().iter().all(|a| {
        let m = infimum(upper, a.matrix());
        (atom_sum(upper, m) - a.matrix()).iter().all(|z| z.norm() < ORACLE_TOL)
    })
}

pub fn probability(rho: &DensityMatrix, p: &CMatrix) -> f64 {
    trace_product(rho.matrix(), p)
}

/// The state's valuation from first principles: stage `V2 <= V1` belongs to
/// the value at `(V1, P)` when the coarse-grained projector has probability
/// one (or at least `r`).
pub fn state_valuation(poset: &ContextPoset, o: &OracleTables, rho: &DensityMatrix, r: Option<f64>) -> Vec<Vec<BTreeSet<usize>>> {
    (0..poset.len())
        .map(|v1| {
            o.masks(poset, v1)
                .map(|mask| {
                    o.below(v1)
                        .into_iter()
                        .filter(|&v2| {
                            let pr = probability(rho, &atom_sum(poset.context(v2), o.cg(v2, v1, mask)));
                            match r {
                                None => (pr - 1.0).abs() < ORACLE_TOL,
                                Some(r) => pr >= r - 1e-10,
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn table_of(poset: &ContextPoset, alpha: &MorphismSetValuation) -> Vec<Vec<BTreeSet<usize>>> {
    (0..poset.len())
        .map(|v| (0..1u32 << poset.context(v).atom_count()).map(|m| alpha.get(v, Mask(m)).clone()).collect())
        .collect()
}

/// Atoms carrying positive weight.
pub fn state_support(ctx: &Context, rho: &DensityMatrix) -> u32 {
    ctx.atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| probability(rho, a.matrix()) > 1e-10)
        .fold(0, |m, (k, _)| m | 1 << k)
}

/// Every value of the table is closed downward in the poset.
pub fn is_sieve_table(o: &OracleTables, table: &[Vec<BTreeSet<usize>>]) -> bool {
    table
        .iter()
        .all(|rows| rows.iter().all(|members| members.iter().all(|&m| o.below(m).is_subset(members))))
}

/// Exhaustive enumeration of all character choices, checking that the chosen
/// atom of each smaller context contains the chosen atom of each larger one.
/// Returns the number of global sections.
pub fn count_sections(poset: &ContextPoset) -> usize {
    let n = poset.len();
    let sizes: Vec<usize> = (0..n).map(|v| poset.context(v).atom_count()).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(lo, up)| lo != up && included(poset.context(lo), poset.context(up)))
        .collect();
    let mut choice = vec![0usize; n];
    let mut count = 0;
    loop {
        let ok = pairs.iter().all(|&(lo, up)| {
            let a = poset.context(up).atoms()[choice[up]].matrix();
            let b = poset.context(lo).atoms()[choice[lo]].matrix();
            proj_leq(a, b)
        });
        if ok {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            choice[i] += 1;
            if choice[i] < sizes[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Raw reading of a ray-set file: integer vectors per basis.
pub fn read_ray_file(text: &str) -> Vec<Vec<Vec<i64>>> {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    v["contexts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            c["vectors"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_array().unwrap().iter().map(|e| e.as_f64().unwrap() as i64).collect())
                .collect()
        })
        .collect()
}

/// Ray identity for integer vectors: divide out the gcd and fix the sign of
/// the first nonzero entry.
pub fn primitive(v: &[i64]) -> Vec<i64> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let g = v.iter().fold(0, |g, &x| gcd(g, x));
    let sign = v.iter().find(|&&x| x != 0).map_or(1, |x| x.signum());
    v.iter().map(|x| x / g * sign).collect()
}

/// Counting argument on raw integer data. Returns (bases pairwise orthogonal,
/// ray count, every ray in an even number of bases, number of bases is odd).
pub fn parity_oracle(bases: &[Vec<Vec<i64>>]) -> (bool, usize, bool, bool) {
    let mut orthogonal = true;
    let mut count: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for b in bases {
        for (i, u) in b.iter().enumerate() {
            for w in &b[i + 1..] {
                orthogonal &= u.iter().zip(w).map(|(x, y)| x * y).sum::<i64>() == 0;
            }
            *count.entry(primitive(u)).or_default() += 1;
        }
    }
    let even = count.values().all(|c| c % 2 == 0);
    (orthogonal, count.len(), even, bases.len() % 2 == 1)
}

/// Order and coarse-graining tables of a poset, computed once by the oracles
/// above.
pub struct OracleTables {
    /// `leq[lower][upper]`
    pub leq: Vec<Vec<bool>>,
    cg: BTreeMap<(usize, usize, u32), u32>,
}

impl OracleTables {
    pub fn new(poset: &ContextPoset) -> Self {
        let n = poset.len();
        let leq: Vec<Vec<bool>> = (0..n)
            .map(|lo| (0..n).map(|up| included(poset.context(lo), poset.context(up))).collect())
            .collect();
        let mut cg = BTreeMap::new();
        for up in 0..n {
            let upper = poset.context(up);
            for mask in 0..1u32 << upper.atom_count() {
                let p = atom_sum(upper, mask);
                for lo in (0..n).filter(|&lo| leq[lo][up]) {
                    cg.insert((lo, up, mask), infimum(poset.context(lo), &p));
                }
            }
        }
        OracleTables { leq, cg }
    }

    pub fn cg(&self, lower: usize, upper: usize, mask: u32) -> u32 {
        self.cg[&(lower, upper, mask)]
    }

    pub fn below(&self, v: usize) -> BTreeSet<usize> {
        (0..self.leq.len()).filter(|&w| self.leq[w][v]).collect()
    }

    pub fn masks(&self, poset: &ContextPoset, v: usize) -> std::ops::Range<u32> {
        0..1u32 << poset.context(v).atom_count()
    }
}

/// Conditions and conclusions of the support theorem, computed from the
/// oracle tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportTheorem {
    pub condition_i: bool,
    pub condition_ii: bool,
    pub sieve: bool,
    pub func: bool,
    pub characterization: bool,
}

impl SupportTheorem {
    pub fn contract_holds(&self) -> bool {
        let full = !(self.condition_i && self.condition_ii) || (self.sieve && self.func && self.characterization);
        full && (!self.condition_i || self.func)
    }
}

pub fn support_theorem(poset: &ContextPoset, o: &OracleTables, table: &[Vec<BTreeSet<usize>>]) -> SupportTheorem {
    let n = poset.len();
    // support: meet of every element sent to the principal sieve
    let supports: Vec<Option<u32>> = (0..n)
        .map(|v| {
            let down = o.below(v);
            o.masks(poset, v)
                .filter(|&m| table[v][m as usize] == down)
                .fold(None, |acc: Option<u32>, m| Some(acc.map_or(m, |a| a & m)))
        })
        .collect();
    let degenerate = supports.iter().any(Option::is_none);
    let mut t = SupportTheorem {
        condition_i: !degenerate,
        condition_ii: !degenerate,
        sieve: true,
        func: true,
        characterization: !degenerate,
    };
    for v1 in 0..n {
        let down1 = o.below(v1);
        for p in o.masks(poset, v1) {
            let value = &table[v1][p as usize];
            for &v2 in &down1 {
                let member = value.contains(&v2);
                let cp = o.cg(v2, v1, p);
                if let (Some(s1), Some(s2)) = (supports[v1], supports[v2]) {
                    t.condition_i &= (s2 & !cp == 0) == member;
                    t.characterization &= (o.cg(v2, v1, s1) & !cp == 0) == member;
                }
                if member {
                    t.sieve &= o.below(v2).iter().all(|w| value.contains(w));
                }
                let pulled: BTreeSet<usize> = value.intersection(&o.below(v2)).copied().collect();
                t.func &= table[v2][cp as usize] == pulled;
            }
        }
        if !degenerate {
            for &v2 in &down1 {
                t.condition_ii &= o.cg(v2, v1, supports[v1].unwrap()) == supports[v2].unwrap();
            }
        }
    }
    t
}
