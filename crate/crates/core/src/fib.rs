//! The polynomial family `f_k = x·f_{k-1} + f_{k-2}` over F₂ with
//! `f_{-2} = 1`, `f_{-1} = 0`, and its evaluation in quotient rings.
//!
//! The blocks of `C^n` for `C = [[B, I], [I, 0]]` are `f_n(B), f_{n-1}(B), f_{n-2}(B)`,
//! so every condition on the orbit of `C` reduces to questions about `f_k` modulo
//! the minimal polynomial of `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly2;

/// `f_k` by direct recursion. Panics for `k < -2`.
pub fn fib_poly(k: i64) -> Poly2 {
    assert!(k >= -2, "f_k is defined for k >= -2");
    let (mut prev, mut cur) = (Poly2::one(), Poly2::zero()); // f_{-2}, f_{-1}
    for _ in -1..k {
        let next = cur.shl(1).poly_add(&prev);
        prev = cur;
        cur = next;
    }
    if k == -2 {
        prev
    } else {
        cur
    }
}

/// `C(n, k) mod 2`; odd iff adding `k` and `n-k` in binary produces no carry.
pub fn binom_parity(n: u64, k: u64) -> Result<bool> {
    if k > n {
        return Err(Error::arg(format!("binomial C({n}, {k}) has k > n")));
    }
    Ok(k & (n - k) == 0)
}

/// Coefficient of `x^i` in `f_k` from the closed binomial form, without running the recursion.
pub fn fib_coeff(k: u64, i: u64) -> bool {
    if i > k || (k - i) % 2 == 1 {
        return false;
    }
    binom_parity((k + i) / 2, (k - i) / 2).expect("(k-i)/2 <= (k+i)/2")
}

/// `(f_{k-1} mod μ, f_k mod μ)` for a tracked index `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientPair {
    pub modulus: Poly2,
    pub index: u64,
    pub lo: Poly2,
    pub hi: Poly2,
}

impl QuotientPair {
    /// The pair at `k = 0`, i.e. `(f_{-1}, f_0) = (0, 1)` reduced.
    pub fn start(modulus: &Poly2) -> Result<Self> {
        match modulus.degree() {
            None => Err(Error::arg("zero modulus")),
            Some(0) => Err(Error::arg("modulus must have degree at least 1")),
            Some(_) => Ok(Self { modulus: modulus.clone(), index: 0, lo: Poly2::zero(), hi: Poly2::one() }),
        }
    }

    /// `k → k+1` via `f_{k+1} = x·f_k + f_{k-1}`.
    pub fn advance(&mut self) {
        let next = self.hi.shl(1).poly_add(&self.lo).poly_mod(&self.modulus).expect("nonzero modulus");
        self.lo = std::mem::replace(&mut self.hi, next);
        self.index += 1;
    }

    /// `k → 2k` via `f_{2k} = f_k² + f_{k-1}²` and `f_{2k-1} = x·f_{k-1}²`.
    fn double(&mut self) {
        let lo_sq = self.lo.square();
        let hi_sq = self.hi.square();
        let new_hi = hi_sq.poly_add(&lo_sq).poly_mod(&self.modulus).expect("nonzero modulus");
        let new_lo = lo_sq.shl(1).poly_mod(&self.modulus).expect("nonzero modulus");
        self.lo = new_lo;
        self.hi = new_hi;
        self.index *= 2;
    }
}

/// `(f_{k-1}, f_k)` modulo `modulus` in `O(log k)` modular squarings.
pub fn fib_pair_at(k: u64, modulus: &Poly2) -> Result<QuotientPair> {
    let mut pair = QuotientPair::start(modulus)?;
    if k == 0 {
        return Ok(pair);
    }
    for bit in (0..64 - k.leading_zeros()).rev() {
        pair.double();
        if (k >> bit) & 1 == 1 {
            pair.advance();
        }
    }
    debug_assert_eq!(pair.index, k);
    Ok(pair)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanOptions {
    /// Test only `j = 1` and even `j`. Odd `j > 1` factor as `f_{r-1}^(2^e) · x^(2^e - 1)`
    /// with `r - 1` even and smaller, so the first failing index is unchanged.
    pub skip_odd: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub k_max: u64,
    /// Smallest `j ≤ k_max` with `f_j ≡ 0` modulo one of the factors.
    pub first_failure: Option<u64>,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Runs the pair recursion `j = 1..=k_max` modulo each irreducible factor and reports
/// the first `j` for which `f_j` vanishes modulo some factor. Since the factors are the
/// distinct irreducible factors of `μ_B`, this is the first `j` with `f_j(B)` singular.
pub fn fib_scan_invertibility(factors: &[Poly2], k_max: u64, opts: ScanOptions) -> Result<ScanReport> {
    if k_max < 1 {
        return Err(Error::arg("k_max must be at least 1"));
    }
    for f in factors {
        if !f.is_irreducible() {
            return Err(Error::Reducible(f.to_string()));
        }
    }
    let mut first_failure: Option<u64> = None;
    for f in factors {
        let limit = first_failure.map_or(k_max, |j| j - 1);
        if limit == 0 {
            break;
        }
        let hit = match f.as_u64() {
            Some(bits) if f.degree().unwrap() < 64 => scan_word(bits, limit, opts),
            _ => scan_generic(f, limit, opts),
        };
        if let Some(j) = hit {
            first_failure = Some(first_failure.map_or(j, |cur| cur.min(j)));
        }
    }
    Ok(ScanReport { k_max, first_failure })
}

/// Word-sized residues: one shift, one conditional XOR and one XOR per step.
fn scan_word(modulus: u64, limit: u64, opts: ScanOptions) -> Option<u64> {
    let deg = 63 - modulus.leading_zeros();
    let top = 1u64 << deg;
    // Degree-1 modulus reduces x itself.
    let reduce = |v: u64| if v & top != 0 { v ^ modulus } else { v };
    let (mut lo, mut hi) = (0u64, reduce(1));
    for j in 1..=limit {
        let next = reduce(hi << 1) ^ lo;
        lo = hi;
        hi = next;
        if hi == 0 && (!opts.skip_odd || j == 1 || j % 2 == 0) {
            return Some(j);
        }
    }
    None
}

fn scan_generic(modulus: &Poly2, limit: u64, opts: ScanOptions) -> Option<u64> {
    let mut pair = QuotientPair::start(modulus).expect("irreducible factors have degree >= 1");
    for j in 1..=limit {
        pair.advance();
        if pair.hi.is_zero() && (!opts.skip_odd || j == 1 || j % 2 == 0) {
            return Some(j);
        }
    }
    None
}
