//! The Clifford unitary `U = H^{⊗m}·diag(p)·g` as an exact matrix over `ℤ[ζ]/√2^s`,
//! and exact checks of cyclicity, unbiasedness and the power traces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cyclo::{Cyc8, ScaledCyc8};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::pauli::PauliVec;

/// `phase_vector` refuses larger `m`.
pub const PHASE_MAX_M: usize = 14;
/// Dense construction of `U` refuses larger `m`.
pub const DENSE_MAX_M: usize = 10;
/// The full power sweep (`d` exact matrix products) refuses larger `m`.
pub const SWEEP_MAX_M: usize = 6;

/// A `d × d` matrix with value `entries / √2^scale_exp`, kept with minimal `scale_exp`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawMatrix", into = "RawMatrix")]
pub struct Cyc8Matrix {
    dim: usize,
    scale_exp: u32,
    entries: Vec<Cyc8>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    dim: usize,
    scale_exp: u32,
    entries: Vec<Vec<Cyc8>>,
}

impl From<Cyc8Matrix> for RawMatrix {
    fn from(m: Cyc8Matrix) -> Self {
        let entries = m.entries.chunks(m.dim.max(1)).map(|r| r.to_vec()).collect();
        RawMatrix { dim: m.dim, scale_exp: m.scale_exp, entries }
    }
}

impl From<RawMatrix> for Cyc8Matrix {
    fn from(r: RawMatrix) -> Self {
        let entries: Vec<Cyc8> = r.entries.into_iter().flatten().collect();
        // A malformed payload becomes an empty matrix that `validate` rejects.
        if entries.len() != r.dim * r.dim {
            return Cyc8Matrix { dim: 0, scale_exp: 0, entries: Vec::new() };
        }
        Cyc8Matrix::new(r.dim, entries, r.scale_exp)
    }
}

impl Cyc8Matrix {
    /// Normalizes on construction. Panics if `entries.len() != dim²`.
    pub fn new(dim: usize, entries: Vec<Cyc8>, scale_exp: u32) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count must be dim^2");
        let mut m = Cyc8Matrix { dim, scale_exp, entries };
        m.normalize();
        m
    }

    pub fn from_fn(dim: usize, scale_exp: u32, mut f: impl FnMut(usize, usize) -> Cyc8) -> Self {
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self::new(dim, entries, scale_exp)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, 0, |r, c| if r == c { Cyc8::ONE } else { Cyc8::ZERO })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.entries.len() != self.dim * self.dim {
            return Err(Error::shape("matrix must be square with dim^2 entries"));
        }
        Ok(())
    }

    fn normalize(&mut self) {
        if self.entries.iter().all(Cyc8::is_zero) {
            self.scale_exp = 0;
            return;
        }
        while self.scale_exp > 0 {
            let halved: Option<Vec<Cyc8>> = self.entries.iter().map(Cyc8::div_sqrt2).collect();
            match halved {
                Some(e) => {
                    self.entries = e;
                    self.scale_exp -= 1;
                }
                None => break,
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale_exp(&self) -> u32 {
        self.scale_exp
    }

    /// Numerator of entry `(r, c)` at the matrix's common scale.
    pub fn raw(&self, r: usize, c: usize) -> Cyc8 {
        self.entries[r * self.dim + c]
    }

    pub fn get(&self, r: usize, c: usize) -> ScaledCyc8 {
        ScaledCyc8::new(self.raw(r, c), self.scale_exp)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        Cyc8Matrix { dim: d, scale_exp: self.scale_exp, entries: (0..d * d).map(|k| self.raw(k % d, k / d).conj()).collect() }
    }

    pub fn scale_by(&self, z: &ScaledCyc8) -> Result<Self> {
        let entries = self.entries.iter().map(|e| e.checked_mul(&z.value())).collect::<Result<_>>()?;
        Ok(Self::new(self.dim, entries, self.scale_exp + z.scale_exp()))
    }

    /// Exact product; accumulates in `i128` and fails on narrowing overflow.
    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::shape(format!("{0}x{0} times {1}x{1}", self.dim, other.dim)));
        }
        let d = self.dim;
        let mut out = vec![Cyc8::ZERO; d * d];
        let mut acc = vec![[0i128; 4]; d];
        for i in 0..d {
            acc.iter_mut().for_each(|a| *a = [0; 4]);
            for k in 0..d {
                let a = self.raw(i, k).coeffs();
                if a == [0; 4] {
                    continue;
                }
                for (j, slot) in acc.iter_mut().enumerate() {
                    let b = other.raw(k, j).coeffs();
                    for (p, &ap) in a.iter().enumerate() {
                        if ap == 0 {
                            continue;
                        }
                        for (q, &bq) in b.iter().enumerate() {
                            let t = ap as i128 * bq as i128;
                            if p + q < 4 {
                                slot[p + q] += t;
                            } else {
                                slot[p + q - 4] -= t;
                            }
                        }
                    }
                }
            }
            for (j, a) in acc.iter().enumerate() {
                let c: [i64; 4] = [
                    i64::try_from(a[0]).map_err(|_| Error::Overflow)?,
                    i64::try_from(a[1]).map_err(|_| Error::Overflow)?,
                    i64::try_from(a[2]).map_err(|_| Error::Overflow)?,
                    i64::try_from(a[3]).map_err(|_| Error::Overflow)?,
                ];
                out[i * d + j] = Cyc8::new(c[0], c[1], c[2], c[3]);
            }
        }
        Ok(Self::new(d, out, self.scale_exp + other.scale_exp))
    }

    pub fn trace(&self) -> Result<ScaledCyc8> {
        let mut t = Cyc8::ZERO;
        for i in 0..self.dim {
            t = t.checked_add(&self.raw(i, i))?;
        }
        Ok(ScaledCyc8::new(t, self.scale_exp))
    }

    /// `U·U† = I` exactly.
    pub fn is_unitary(&self) -> Result<bool> {
        Ok(self.mat_mul(&self.dagger())?.is_identity())
    }

    /// Every entry `z` has `|z|² = 1/d`, i.e. `|E|² = 2^{s-m}` for numerator `E` and `d = 2^m`.
    pub fn is_flat(&self) -> Result<bool> {
        let m = self.dim.trailing_zeros();
        if !self.dim.is_power_of_two() || self.scale_exp < m || self.scale_exp - m >= 62 {
            return Ok(false);
        }
        let target = Cyc8::from_int(1i64 << (self.scale_exp - m));
        for e in &self.entries {
            if e.norm_sq()? != target {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl Cyc8Matrix {
    /// Writes the matrix as `z·M` with `z` its `(0, 0)` entry, when every entry is `z`
    /// times a fourth root of unity; returns `z` and the exponents `k` of `i^k`.
    pub fn factor_fourth_roots(&self) -> Result<Option<(ScaledCyc8, Vec<u8>)>> {
        self.validate()?;
        let z = self.get(0, 0);
        if z.is_zero() {
            return Ok(None);
        }
        let n = z.norm_sq()?;
        let mut exps = Vec::with_capacity(self.entries.len());
        for k in 0..self.entries.len() {
            let ratio = self.get(k / self.dim, k % self.dim).checked_mul(&z.conj())?;
            let found = (0..4u8).find(|&e| {
                n.checked_mul(&ScaledCyc8::integral(Cyc8::i_pow(e as i64))).is_ok_and(|t| t == ratio)
            });
            match found {
                Some(e) => exps.push(e),
                None => return Ok(None),
            }
        }
        Ok(Some((z, exps)))
    }

    /// `"<prefactor> ×"` followed by rows of `±1`, `±i` when the entries factor that way,
    /// otherwise the entry-wise rendering.
    pub fn render(&self) -> String {
        match self.factor_fourth_roots() {
            Ok(Some((z, exps))) => {
                let names = ["+1", "+i", "-1", "-i"];
                let mut out = format!("{z} ×\n");
                for row in exps.chunks(self.dim) {
                    let line: Vec<&str> = row.iter().map(|&e| names[e as usize]).collect();
                    out.push_str(&line.join(" "));
                    out.push('\n');
                }
                out
            }
            _ => self.to_string(),
        }
    }
}

impl fmt::Display for Cyc8Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = (0..self.dim * self.dim).map(|k| self.get(k / self.dim, k % self.dim).to_string()).collect();
        let width = cells.iter().map(|c| c.chars().count()).max().unwrap_or(0);
        for row in cells.chunks(self.dim.max(1)) {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "{}", line.join("  "))?;
        }
        Ok(())
    }
}

pub fn unitary_pow(u: &Cyc8Matrix, k: u64) -> Result<Cyc8Matrix> {
    u.validate()?;
    let mut acc = Cyc8Matrix::identity(u.dim());
    let mut base = u.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mat_mul(&base)?;
        }
        e >>= 1;
        if e > 0 {
            base = base.mat_mul(&base)?;
        }
    }
    Ok(acc)
}

/// `p_j = i^{exps[j]}`, indexed big-endian: `j = Σ_k j_k·2^{m-k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseVector {
    pub m: usize,
    pub exps: Vec<u8>,
}

impl PhaseVector {
    pub fn new(m: usize, exps: Vec<u8>) -> Result<Self> {
        if m == 0 || m > PHASE_MAX_M {
            return Err(Error::Budget { requested: m, cap: PHASE_MAX_M });
        }
        if exps.len() != 1 << m {
            return Err(Error::shape(format!("{} phases for m = {m}", exps.len())));
        }
        if exps.iter().any(|&e| e > 3) {
            return Err(Error::arg("phase exponents live in 0..4"));
        }
        Ok(Self { m, exps })
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn phase(&self, j: usize) -> Cyc8 {
        Cyc8::i_pow(self.exps[j] as i64)
    }

    /// The same vector with `p_j` replaced by `-p_j`.
    pub fn negate(&self, j: usize) -> Self {
        let mut exps = self.exps.clone();
        exps[j] = (exps[j] + 2) % 4;
        Self { m: self.m, exps }
    }
}

/// `p_j = i^{b·j}·(-1)^{Σ_k j_k (B_k · j_{→k})}` with `b` the diagonal of `B`, `B_k` its
/// `k`-th row and `j_{→k} = (j_1, …, j_k, 0, …, 0)`.
pub fn phase_vector(b: &BitMatrix) -> Result<PhaseVector> {
    if !b.is_square() {
        return Err(Error::shape("B must be square"));
    }
    if !b.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let m = b.n_rows();
    if m > PHASE_MAX_M {
        return Err(Error::Budget { requested: m, cap: PHASE_MAX_M });
    }
    let exps = (0..1usize << m)
        .map(|j| {
            let bit = |k: usize| (j >> (m - 1 - k)) & 1 == 1;
            let mut i_exp = 0u32;
            let mut sign = false;
            for k in (0..m).filter(|&k| bit(k)) {
                i_exp += b.get(k, k) as u32;
                for l in (0..=k).filter(|&l| bit(l)) {
                    sign ^= b.get(k, l);
                }
            }
            ((i_exp + 2 * sign as u32) % 4) as u8
        })
        .collect();
    PhaseVector::new(m, exps)
}

/// The closed form: `(-1+i)/√2 = ζ³` for odd `m`, `i` for even `m`.
pub fn global_phase(m: usize) -> ScaledCyc8 {
    if m % 2 == 1 {
        ScaledCyc8::new(Cyc8::gaussian(-1, 1), 1)
    } else {
        ScaledCyc8::integral(Cyc8::I)
    }
}

/// `-tr(H^{⊗m}·diag(p*))`, which makes `tr U = -1` when it is unimodular.
pub fn global_phase_trace(p: &PhaseVector) -> Result<ScaledCyc8> {
    let mut sum = Cyc8::ZERO;
    for j in 0..p.dim() {
        let term = p.phase(j).conj();
        sum = if j.count_ones() % 2 == 0 { sum.checked_add(&term)? } else { sum.checked_sub(&term)? };
    }
    let g = ScaledCyc8::new(sum.checked_neg()?, p.m as u32);
    if !g.is_unimodular()? {
        return Err(Error::NotUnimodular);
    }
    Ok(g)
}

/// `U(r, c) = (-1)^{r·c}·p_c·g / √2^m`.
pub fn unitary_from_phases(p: &PhaseVector, g: &ScaledCyc8) -> Result<Cyc8Matrix> {
    if p.m > DENSE_MAX_M {
        return Err(Error::Budget { requested: p.m, cap: DENSE_MAX_M });
    }
    let d = p.dim();
    let cols: Vec<Cyc8> = (0..d).map(|c| p.phase(c).checked_mul(&g.value())).collect::<Result<_>>()?;
    let entries = (0..d * d)
        .map(|k| {
            let (r, c) = (k / d, k % d);
            if (r & c).count_ones() % 2 == 0 {
                Ok(cols[c])
            } else {
                cols[c].checked_neg()
            }
        })
        .collect::<Result<_>>()?;
    Ok(Cyc8Matrix::new(d, entries, p.m as u32 + g.scale_exp()))
}

/// `U` for `B` with the closed-form global phase.
pub fn build_u(b: &BitMatrix) -> Result<Cyc8Matrix> {
    let m = b.n_rows();
    if b.is_square() && m > DENSE_MAX_M {
        return Err(Error::Budget { requested: m, cap: DENSE_MAX_M });
    }
    let p = phase_vector(b)?;
    unitary_from_phases(&p, &global_phase(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicMubReport {
    pub dim: usize,
    pub unitary_ok: bool,
    /// `U^{d+1} = I`.
    pub cyclic_ok: bool,
    /// Every entry of `U^t`, `t = 1..d`, has modulus `1/√d`.
    pub unbiased_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_biased_power: Option<u64>,
}

impl CyclicMubReport {
    pub fn passed(&self) -> bool {
        self.unitary_ok && self.cyclic_ok && self.unbiased_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub dim: usize,
    /// `tr U = -1`.
    pub trace_ok: bool,
    /// `tr U^t = -1` for every `t = 1..d`.
    pub spectrum_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failing_power: Option<u64>,
}

fn sweep_guard(u: &Cyc8Matrix) -> Result<usize> {
    u.validate()?;
    let d = u.dim();
    let cap = 1usize << SWEEP_MAX_M;
    if d > cap {
        return Err(Error::Budget { requested: d.trailing_zeros() as usize, cap: SWEEP_MAX_M });
    }
    Ok(d)
}

/// Calls `visit(t, U^t)` for `t = 1..=d+1`, stopping early when it returns false.
fn for_each_power(u: &Cyc8Matrix, mut visit: impl FnMut(u64, &Cyc8Matrix) -> Result<bool>) -> Result<()> {
    let d = u.dim() as u64;
    let mut cur = u.clone();
    for t in 1..=d + 1 {
        if !visit(t, &cur)? {
            break;
        }
        if t <= d {
            cur = cur.mat_mul(u)?;
        }
    }
    Ok(())
}

pub fn verify_cyclic_mub(u: &Cyc8Matrix) -> Result<CyclicMubReport> {
    let d = sweep_guard(u)?;
    let mut first_biased_power = None;
    let mut cyclic_ok = false;
    for_each_power(u, |t, ut| {
        if t <= d as u64 {
            if first_biased_power.is_none() && !ut.is_flat()? {
                first_biased_power = Some(t);
            }
        } else {
            cyclic_ok = ut.is_identity();
        }
        Ok(true)
    })?;
    Ok(CyclicMubReport {
        dim: d,
        unitary_ok: u.is_unitary()?,
        cyclic_ok,
        unbiased_ok: first_biased_power.is_none(),
        first_biased_power,
    })
}

pub fn spectrum_check(u: &Cyc8Matrix) -> Result<SpectrumReport> {
    let d = sweep_guard(u)?;
    let minus_one = ScaledCyc8::integral(Cyc8::from_int(-1));
    let mut first_failing_power = None;
    for_each_power(u, |t, ut| {
        if t > d as u64 {
            return Ok(false);
        }
        if ut.trace()? != minus_one {
            first_failing_power = Some(t);
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(SpectrumReport {
        dim: d,
        trace_ok: u.trace()? == minus_one,
        spectrum_ok: first_failing_power.is_none(),
        first_failing_power,
    })
}

/// `X^{x}Z^{z}` as a dense matrix; qubit 1 is the most significant index bit.
pub fn pauli_matrix(v: &PauliVec) -> Result<Cyc8Matrix> {
    let m = v.m();
    if m > DENSE_MAX_M {
        return Err(Error::Budget { requested: m, cap: DENSE_MAX_M });
    }
    let to_index = |bits: u64| (0..m).fold(0usize, |acc, q| acc | ((((bits >> q) & 1) as usize) << (m - 1 - q)));
    let (x, z) = (to_index(v.x_bits()), to_index(v.z_bits()));
    Ok(Cyc8Matrix::from_fn(1 << m, 0, |r, c| {
        if r != c ^ x {
            Cyc8::ZERO
        } else if (z & c).count_ones() % 2 == 0 {
            Cyc8::ONE
        } else {
            Cyc8::from_int(-1)
        }
    }))
}
