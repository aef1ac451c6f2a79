//! Phase-free Pauli operators as symplectic vectors `(x | z)`, and verification that
//! the generator orbit partitions them into commuting classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::symplectic::{check_conditions, embed_c, generator, GeneratorMatrix};

/// Classes are enumerated explicitly up to this `m` (`4^m` bitmap).
pub const ENUMERATION_MAX_M: usize = 12;

/// Pairwise isotropy loops are used up to this `m`; above it the matrix identity.
const PAIRWISE_ISOTROPY_MAX_M: usize = 6;

/// Bit `i` of `x` and `z` belongs to qubit `i + 1`; the zero vector is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliVec {
    m: usize,
    x: u64,
    z: u64,
}

fn mask(m: usize) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl PauliVec {
    pub fn new(m: usize, x: u64, z: u64) -> Result<Self> {
        if m == 0 || m > 64 {
            return Err(Error::arg(format!("m = {m} outside 1..=64")));
        }
        if x & !mask(m) != 0 || z & !mask(m) != 0 {
            return Err(Error::arg("bits set beyond m"));
        }
        Ok(Self { m, x, z })
    }

    pub fn identity(m: usize) -> Self {
        Self::new(m, 0, 0).expect("valid m")
    }

    /// `X` (or `Z`) on a single 0-based qubit.
    pub fn single_x(m: usize, qubit: usize) -> Self {
        Self::new(m, 1 << qubit, 0).expect("qubit < m")
    }

    pub fn single_z(m: usize, qubit: usize) -> Self {
        Self::new(m, 0, 1 << qubit).expect("qubit < m")
    }

    /// Row `r` of an `m × 2m` matrix laid out as `(x | z)`.
    pub fn from_matrix_row(mat: &BitMatrix, r: usize) -> Result<Self> {
        let m = mat.n_rows();
        if mat.n_cols() != 2 * m {
            return Err(Error::shape("expected an m x 2m matrix"));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for c in 0..m {
            x |= (mat.get(r, c) as u64) << c;
            z |= (mat.get(r, m + c) as u64) << c;
        }
        Self::new(m, x, z)
    }

    pub fn to_row(&self) -> BitMatrix {
        BitMatrix::from_fn(1, 2 * self.m, |_, c| {
            if c < self.m {
                (self.x >> c) & 1 == 1
            } else {
                (self.z >> (c - self.m)) & 1 == 1
            }
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Operator product up to phase.
    pub fn add(&self, other: &PauliVec) -> Result<PauliVec> {
        self.same_m(other)?;
        Ok(PauliVec { m: self.m, x: self.x ^ other.x, z: self.z ^ other.z })
    }

    fn same_m(&self, other: &PauliVec) -> Result<()> {
        if self.m != other.m {
            return Err(Error::shape(format!("Pauli vectors on {} and {} qubits", self.m, other.m)));
        }
        Ok(())
    }
}

pub fn sympl_inner(a: &PauliVec, b: &PauliVec) -> Result<bool> {
    a.same_m(b)?;
    Ok(((a.z & b.x) ^ (a.x & b.z)).count_ones() % 2 == 1)
}

pub fn commute(a: &PauliVec, b: &PauliVec) -> Result<bool> {
    Ok(!sympl_inner(a, b)?)
}

impl fmt::Display for PauliVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.m {
            let ch = match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => '1',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mut x, mut z) = (0u64, 0u64);
        let mut m = 0;
        for (q, ch) in s.chars().enumerate() {
            let (xb, zb) = match ch {
                '1' | 'I' => (0, 0),
                'X' => (1, 0),
                'Z' => (0, 1),
                'Y' => (1, 1),
                other => return Err(Error::Parse(format!("invalid Pauli letter {other:?}"))),
            };
            if q >= 64 {
                return Err(Error::Parse("more than 64 qubits".into()));
            }
            x |= xb << q;
            z |= zb << q;
            m = q + 1;
        }
        PauliVec::new(m, x, z)
    }
}

/// All `2^m` vectors `c·C_j`, zero included, in Gray-code order.
pub fn class_members(cj: &GeneratorMatrix) -> Result<Vec<PauliVec>> {
    class_members_with(cj, false)
}

pub fn class_members_with(cj: &GeneratorMatrix, force: bool) -> Result<Vec<PauliVec>> {
    let m = cj.m();
    if m > ENUMERATION_MAX_M && !force {
        return Err(Error::Budget { requested: m, cap: ENUMERATION_MAX_M });
    }
    if m > 30 {
        return Err(Error::Budget { requested: m, cap: 30 });
    }
    let rows: Vec<PauliVec> =
        (0..m).map(|r| PauliVec::from_matrix_row(cj.matrix(), r)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(1 << m);
    let mut cur = PauliVec::identity(m);
    out.push(cur);
    for step in 1u64..(1 << m) {
        cur = cur.add(&rows[step.trailing_zeros() as usize])?;
        out.push(cur);
    }
    Ok(out)
}

/// Solves `c·C_j = a` by elimination.
pub fn class_contains(cj: &GeneratorMatrix, a: &PauliVec) -> Result<bool> {
    if a.m() != cj.m() {
        return Err(Error::shape("vector and class on different m"));
    }
    cj.contains_vector(&a.to_row())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    /// Every class spanned and counted in a `4^m` bitmap.
    Enumerated,
    /// Disjointness and cover inferred from the polynomial conditions on `B`.
    Algebraic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub m: usize,
    pub mode: PartitionMode,
    pub classes: u64,
    pub isotropic: bool,
    pub pairwise_disjoint: bool,
    /// Distinct non-identity vectors covered.
    pub cover_count: u64,
    pub covers: bool,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.isotropic && self.pairwise_disjoint && self.covers
    }
}

fn pairwise_isotropic(members: &[PauliVec]) -> bool {
    members
        .iter()
        .enumerate()
        .all(|(i, a)| members[i + 1..].iter().all(|b| commute(a, b).unwrap_or(false)))
}

/// The `d + 1` classes `C_1, C_1·Cᵀ, C_1·(C²)ᵀ, …`, each as its generator matrix.
pub fn orbit_generators(b: &BitMatrix) -> Result<Vec<GeneratorMatrix>> {
    let c = embed_c(b)?;
    let m = c.m();
    if m > ENUMERATION_MAX_M {
        return Err(Error::Budget { requested: m, cap: ENUMERATION_MAX_M });
    }
    let ct = c.matrix().transpose();
    let mut cur = GeneratorMatrix::first(m).matrix().clone();
    let mut out = Vec::with_capacity((1 << m) + 1);
    for _ in 0..=(1u64 << m) {
        out.push(GeneratorMatrix::new(cur.clone())?);
        cur = cur.mat_mul(&ct)?;
    }
    Ok(out)
}

pub fn partition_report(b: &BitMatrix) -> Result<PartitionReport> {
    partition_report_bounded(b, ENUMERATION_MAX_M)
}

/// Enumerates classes up to `enumerate_max_m` (at most [`ENUMERATION_MAX_M`]), and uses the
/// algebraic criterion above it.
pub fn partition_report_bounded(b: &BitMatrix, enumerate_max_m: usize) -> Result<PartitionReport> {
    let m = b.n_rows();
    if m <= enumerate_max_m.min(ENUMERATION_MAX_M) {
        enumerated_report(b)
    } else {
        algebraic_report(b)
    }
}

fn enumerated_report(b: &BitMatrix) -> Result<PartitionReport> {
    let gens = orbit_generators(b)?;
    let m = b.n_rows();
    let mut seen = vec![0u64; (1usize << (2 * m)).div_ceil(64)];
    let mut isotropic = true;
    let mut pairwise_disjoint = true;
    let mut cover_count = 0u64;
    for g in &gens {
        let members = class_members(g)?;
        isotropic &= if m <= PAIRWISE_ISOTROPY_MAX_M { pairwise_isotropic(&members) } else { g.is_isotropic() };
        for v in members.iter().filter(|v| !v.is_identity()) {
            let key = (v.x_bits() | (v.z_bits() << m)) as usize;
            let (w, bit) = (key / 64, 1u64 << (key % 64));
            if seen[w] & bit != 0 {
                pairwise_disjoint = false;
            } else {
                seen[w] |= bit;
                cover_count += 1;
            }
        }
    }
    let d = 1u64 << m;
    Ok(PartitionReport {
        m,
        mode: PartitionMode::Enumerated,
        classes: gens.len() as u64,
        isotropic,
        pairwise_disjoint,
        cover_count,
        covers: cover_count == d * d - 1,
    })
}

/// `C` symplectic and `C_1` isotropic make every class isotropic; condition ii makes
/// all pairs disjoint; `d + 1` disjoint classes of `d - 1` vectors then cover everything.
fn algebraic_report(b: &BitMatrix) -> Result<PartitionReport> {
    let m = b.n_rows();
    if m > 31 {
        return Err(Error::Budget { requested: m, cap: 31 });
    }
    let report = check_conditions(b)?;
    let isotropic = report.symplectic_ok && generator(1, b)?.is_isotropic();
    let pairwise_disjoint = report.cond_ii_ok && report.order_ok;
    let d = 1u64 << m;
    let cover_count = if pairwise_disjoint { (d + 1) * (d - 1) } else { 0 };
    Ok(PartitionReport {
        m,
        mode: PartitionMode::Algebraic,
        classes: d + 1,
        isotropic,
        pairwise_disjoint,
        cover_count,
        covers: pairwise_disjoint,
    })
}

/// Whether the orbit of `C_1` under `B`'s Clifford image partitions the non-identity Paulis.
pub fn partition_verify(b: &BitMatrix) -> bool {
    partition_report(b).map(|r| r.ok()).unwrap_or(false)
}
