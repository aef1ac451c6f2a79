//! Polynomials over F₂ stored as coefficient bitsets.

use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Polynomial over F₂; bit `i` of the bitset is the coefficient of `x^i`.
///
/// The word vector never has trailing zero words, so the zero polynomial is the
/// empty vector and structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly2 {
    words: Vec<u64>,
}

/// Carry-less 64×64 → 128 bit product.
#[inline]
fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let mut a = a;
    let b = b as u128;
    while a != 0 {
        acc ^= b << a.trailing_zeros();
        a &= a - 1;
    }
    acc
}

impl Poly2 {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_u64(1)
    }

    pub fn x() -> Self {
        Self::from_u64(2)
    }

    pub fn monomial(n: usize) -> Self {
        let mut p = Self::zero();
        p.set_coeff(n, true);
        p
    }

    pub fn from_u64(bits: u64) -> Self {
        Self::from_words(vec![bits])
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        let mut p = Self { words };
        p.trim();
        p
    }

    pub fn from_exponents(exps: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exps {
            p.set_coeff(e, !p.coeff(e));
        }
        p
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Low 64 coefficients; `None` if the degree is 64 or more.
    pub fn as_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// `None` is the zero polynomial's degree.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.words == [1]
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub fn set_coeff(&mut self, i: usize, value: bool) {
        if i / 64 >= self.words.len() {
            if !value {
                return;
            }
            self.words.resize(i / 64 + 1, 0);
        }
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
            self.trim();
        }
    }

    /// Exponents with nonzero coefficient, ascending.
    pub fn exponents(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// `self += other · x^shift`.
    fn xor_shifted(&mut self, other: &Poly2, shift: usize) {
        if other.is_zero() {
            return;
        }
        let (ws, bs) = (shift / 64, shift % 64);
        let need = other.words.len() + ws + 1;
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i + ws] ^= w << bs;
            if bs != 0 {
                self.words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
        self.trim();
    }

    pub fn shl(&self, shift: usize) -> Poly2 {
        let mut out = Poly2::zero();
        out.xor_shifted(self, shift);
        out
    }

    pub fn poly_add(&self, other: &Poly2) -> Poly2 {
        let (long, short) = if self.words.len() >= other.words.len() { (self, other) } else { (other, self) };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(&short.words) {
            *w ^= s;
        }
        Poly2::from_words(words)
    }

    pub fn poly_mul(&self, other: &Poly2) -> Poly2 {
        if self.is_zero() || other.is_zero() {
            return Poly2::zero();
        }
        let mut words = vec![0u64; self.words.len() + other.words.len()];
        for (i, &a) in self.words.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.words.iter().enumerate() {
                let prod = clmul(a, b);
                words[i + j] ^= prod as u64;
                words[i + j + 1] ^= (prod >> 64) as u64;
            }
        }
        Poly2::from_words(words)
    }

    pub fn square(&self) -> Poly2 {
        self.poly_mul(self)
    }

    pub fn div_rem(&self, divisor: &Poly2) -> Result<(Poly2, Poly2)> {
        let dd = divisor.degree().ok_or_else(|| Error::arg("division by the zero polynomial"))?;
        let mut rem = self.clone();
        let mut quot = Poly2::zero();
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let shift = dr - dd;
            rem.xor_shifted(divisor, shift);
            quot.set_coeff(shift, true);
        }
        Ok((quot, rem))
    }

    pub fn poly_mod(&self, modulus: &Poly2) -> Result<Poly2> {
        Ok(self.div_rem(modulus)?.1)
    }

    pub fn divides(&self, other: &Poly2) -> Result<bool> {
        Ok(other.poly_mod(self)?.is_zero())
    }

    /// Monic gcd. Over F₂ every nonzero polynomial is monic.
    pub fn gcd(&self, other: &Poly2) -> Result<Poly2> {
        if self.is_zero() && other.is_zero() {
            return Err(Error::arg("gcd(0, 0) is undefined"));
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.poly_mod(&b)?;
            a = b;
            b = r;
        }
        Ok(a)
    }

    pub fn mul_mod(&self, other: &Poly2, modulus: &Poly2) -> Result<Poly2> {
        self.poly_mul(other).poly_mod(modulus)
    }

    pub fn derivative(&self) -> Poly2 {
        // d/dx x^i = i·x^(i-1): only odd exponents survive.
        let mut out = Poly2::zero();
        for e in self.exponents().filter(|e| e % 2 == 1) {
            out.set_coeff(e - 1, true);
        }
        out
    }

    /// Square root of a polynomial whose odd coefficients all vanish.
    pub fn sqrt(&self) -> Option<Poly2> {
        let mut out = Poly2::zero();
        for e in self.exponents() {
            if e % 2 == 1 {
                return None;
            }
            out.set_coeff(e / 2, true);
        }
        Some(out)
    }

    /// `p(x) ↦ p(x²)`.
    pub fn substitute_square(&self) -> Poly2 {
        let mut out = Poly2::zero();
        for e in self.exponents() {
            out.set_coeff(2 * e, true);
        }
        out
    }

    /// `x^(2^k) mod modulus` by `k` modular squarings.
    fn x_pow_pow2_mod(k: usize, modulus: &Poly2) -> Result<Poly2> {
        let mut acc = Poly2::x().poly_mod(modulus)?;
        for _ in 0..k {
            acc = acc.square().poly_mod(modulus)?;
        }
        Ok(acc)
    }

    /// Rabin's irreducibility test.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else { return false };
        if n == 0 {
            return false;
        }
        let x = Poly2::x();
        let full = Poly2::x_pow_pow2_mod(n, self).expect("nonzero modulus");
        if full != x.poly_mod(self).expect("nonzero modulus") {
            return false;
        }
        prime_factors(n).into_iter().all(|q| {
            let h = Poly2::x_pow_pow2_mod(n / q, self).expect("nonzero modulus").poly_add(&x);
            h.gcd(self).expect("nonzero modulus").is_one()
        })
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, b: &BitMatrix) -> Result<BitMatrix> {
        if !b.is_square() {
            return Err(Error::shape("polynomial evaluation needs a square matrix"));
        }
        let n = b.n_rows();
        let identity = BitMatrix::identity(n);
        let mut acc = BitMatrix::zeros(n, n);
        let Some(deg) = self.degree() else { return Ok(acc) };
        for i in (0..=deg).rev() {
            acc = acc.mat_mul(b)?;
            if self.coeff(i) {
                acc = acc.mat_add(&identity)?;
            }
        }
        Ok(acc)
    }

    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = format!("{:x}", self.words.last().unwrap());
        for w in self.words.iter().rev().skip(1) {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }

    pub fn from_hex(s: &str) -> Result<Poly2> {
        if s.is_empty() {
            return Err(Error::Parse("empty hex string".into()));
        }
        let mut words = Vec::new();
        let bytes = s.as_bytes();
        let mut end = bytes.len();
        while end > 0 {
            let start = end.saturating_sub(16);
            let chunk = std::str::from_utf8(&bytes[start..end]).map_err(|e| Error::Parse(e.to_string()))?;
            let w = u64::from_str_radix(chunk, 16).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
            words.push(w);
            end = start;
        }
        Ok(Poly2::from_words(words))
    }
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Minimal polynomial of a square matrix: the first linear dependency among
/// `I, B, B², …`, found by incremental elimination on the flattened powers.
pub fn min_poly(b: &BitMatrix) -> Result<Poly2> {
    if !b.is_square() {
        return Err(Error::shape("minimal polynomial needs a square matrix"));
    }
    let n = b.n_rows();
    // (reduced vector, pivot bit, combination of powers that produced it)
    let mut basis: Vec<(Vec<u64>, usize, Poly2)> = Vec::with_capacity(n + 1);
    let mut power = BitMatrix::identity(n);
    for k in 0..=n {
        let mut v = power.words().to_vec();
        let mut combo = Poly2::monomial(k);
        for (bv, pivot, bc) in &basis {
            if (v[pivot / 64] >> (pivot % 64)) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(bv) {
                    *x ^= y;
                }
                combo = combo.poly_add(bc);
            }
        }
        match v.iter().position(|&w| w != 0) {
            None => return Ok(combo),
            Some(wi) => {
                let pivot = wi * 64 + v[wi].trailing_zeros() as usize;
                basis.push((v, pivot, combo));
            }
        }
        power = power.mat_mul(b)?;
    }
    unreachable!("Cayley–Hamilton bounds the minimal polynomial degree by n")
}

/// Distinct irreducible factors of `p`, sorted by (degree, bits). Multiplicities are dropped.
pub fn factor_squarefree_irreducible(p: &Poly2) -> Result<Vec<Poly2>> {
    match p.degree() {
        None | Some(0) => return Err(Error::arg("cannot factor a constant polynomial")),
        Some(_) => {}
    }
    let mut out = Vec::new();
    collect_distinct_factors(p, &mut out)?;
    out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.words.iter().rev().cmp(b.words.iter().rev())));
    out.dedup();
    Ok(out)
}

fn collect_distinct_factors(p: &Poly2, out: &mut Vec<Poly2>) -> Result<()> {
    if p.degree().unwrap_or(0) == 0 {
        return Ok(());
    }
    let dp = p.derivative();
    if dp.is_zero() {
        let root = p.sqrt().expect("zero derivative in characteristic 2 means a perfect square");
        return collect_distinct_factors(&root, out);
    }
    let g = p.gcd(&dp)?;
    if g.is_one() {
        return distinct_degree(p, out);
    }
    // p = g · (p/g) with both factors of smaller degree; the union of their
    // factors is the factor set of p.
    let (q, _) = p.div_rem(&g)?;
    collect_distinct_factors(&g, out)?;
    collect_distinct_factors(&q, out)
}

/// Distinct-degree factorization of a squarefree polynomial.
fn distinct_degree(p: &Poly2, out: &mut Vec<Poly2>) -> Result<()> {
    let mut f = p.clone();
    let x = Poly2::x();
    let mut h = x.poly_mod(&f)?;
    let mut d = 1;
    while let Some(deg) = f.degree() {
        if deg < 2 * d {
            if deg > 0 {
                out.push(f);
            }
            return Ok(());
        }
        h = h.square().poly_mod(&f)?;
        let g = h.poly_add(&x).gcd(&f)?;
        if !g.is_one() {
            equal_degree(&g, d, out)?;
            f = f.div_rem(&g)?.0;
            h = h.poly_mod(&f)?;
        }
        d += 1;
    }
    Ok(())
}

/// Splits a squarefree product of degree-`d` irreducibles with the trace map,
/// trying the residues 2, 3, 4, … in order so the result is deterministic.
fn equal_degree(g: &Poly2, d: usize, out: &mut Vec<Poly2>) -> Result<()> {
    let n = g.degree().expect("nonzero");
    if n == d {
        out.push(g.clone());
        return Ok(());
    }
    for seed in 2u64.. {
        let a = Poly2::from_u64(seed).poly_mod(g)?;
        let mut term = a.clone();
        let mut trace = a;
        for _ in 1..d {
            term = term.square().poly_mod(g)?;
            trace = trace.poly_add(&term);
        }
        if trace.is_zero() {
            continue;
        }
        let h = trace.gcd(g)?;
        if let Some(dh) = h.degree() {
            if dh > 0 && dh < n {
                equal_degree(&h, d, out)?;
                return equal_degree(&g.div_rem(&h)?.0, d, out);
            }
        }
    }
    unreachable!()
}

impl Add for &Poly2 {
    type Output = Poly2;

    fn add(self, rhs: &Poly2) -> Poly2 {
        self.poly_add(rhs)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;

    fn mul(self, rhs: &Poly2) -> Poly2 {
        self.poly_mul(rhs)
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .exponents()
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .map(|e| match e {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{e}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly2({self})")
    }
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Poly2::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn p(exps: &[usize]) -> Poly2 {
        Poly2::from_exponents(exps)
    }

    /// Irreducibles of degree ≤ `max_deg` by sieving out products of smaller ones.
    fn irreducibles_up_to(max_deg: usize) -> Vec<Poly2> {
        let mut irr: Vec<Poly2> = Vec::new();
        for bits in 2u64..(1 << (max_deg + 1)) {
            let cand = Poly2::from_u64(bits);
            let deg = cand.degree().unwrap();
            let reducible = irr
                .iter()
                .take_while(|q| 2 * q.degree().unwrap() <= deg)
                .any(|q| q.divides(&cand).unwrap());
            if !reducible {
                irr.push(cand);
            }
        }
        irr
    }

    #[test]
    fn basic_products() {
        assert_eq!(&Poly2::x() * &Poly2::x(), p(&[2]));
        let xp1 = p(&[0, 1]);
        assert_eq!(&xp1 * &xp1, p(&[0, 2]));
        assert_eq!(Poly2::zero().degree(), None);
        assert_eq!(p(&[0, 130]).degree(), Some(130));
    }

    #[test]
    fn wide_product_matches_shift_and_add() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let a = Poly2::from_words((0..3).map(|_| rng.gen()).collect());
            let b = Poly2::from_words((0..2).map(|_| rng.gen()).collect());
            let mut expect = Poly2::zero();
            for e in a.exponents() {
                expect = expect.poly_add(&b.shl(e));
            }
            assert_eq!(&a * &b, expect);
            if let (Some(da), Some(db)) = (a.degree(), b.degree()) {
                assert_eq!((&a * &b).degree(), Some(da + db));
            }
        }
    }

    #[test]
    fn reduction() {
        assert_eq!(p(&[3]).poly_mod(&p(&[0, 1, 3])).unwrap(), p(&[0, 1]));
        assert_eq!(p(&[0, 2]).poly_mod(&p(&[5])).unwrap(), p(&[0, 2]));
        assert!(matches!(p(&[1]).poly_mod(&Poly2::zero()), Err(Error::InvalidArgument(_))));
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..100 {
            let m = Poly2::from_u64(rng.gen::<u64>() | 1 << 20);
            let q = Poly2::from_words(vec![rng.gen(), rng.gen()]);
            let r = Poly2::from_u64(rng.gen::<u64>() & ((1 << 20) - 1));
            let built = (&q * &m).poly_add(&r);
            assert_eq!(built.poly_mod(&m).unwrap(), r);
            assert_eq!(built.div_rem(&m).unwrap().0, q);
        }
    }

    #[test]
    fn gcd_cases() {
        let a = p(&[0, 3, 7]);
        assert_eq!(a.gcd(&Poly2::zero()).unwrap(), a);
        assert_eq!(p(&[0, 2]).gcd(&p(&[0, 1])).unwrap(), p(&[0, 1]));
        assert!(Poly2::zero().gcd(&Poly2::zero()).is_err());
    }

    #[test]
    fn min_poly_examples() {
        assert_eq!(min_poly(&BitMatrix::identity(3)).unwrap(), p(&[0, 1]));
        let b = BitMatrix::parse_rows(&["11", "10"]).unwrap();
        assert_eq!(min_poly(&b).unwrap(), p(&[0, 1, 2]));
        assert!(p(&[0, 1, 2]).eval_matrix(&b).unwrap().is_zero());
        assert!(Poly2::one().eval_matrix(&b).unwrap().is_identity());
        assert!(min_poly(&BitMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn min_poly_is_minimal() {
        let irr = irreducibles_up_to(8);
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let b = BitMatrix::from_fn(n, n, |_, _| rng.gen());
            let mu = min_poly(&b).unwrap();
            assert!(mu.degree().unwrap() <= n);
            assert!(mu.eval_matrix(&b).unwrap().is_zero());
            // Every maximal proper divisor mu/q must fail to annihilate.
            for q in irr.iter().filter(|q| q.divides(&mu).unwrap()) {
                let smaller = mu.div_rem(q).unwrap().0;
                assert!(!smaller.eval_matrix(&b).unwrap().is_zero(), "{mu} not minimal for {b:?}");
            }
        }
    }

    #[test]
    fn factorization_examples() {
        assert_eq!(factor_squarefree_irreducible(&p(&[0, 2])).unwrap(), vec![p(&[0, 1])]);
        let quartic = p(&[0, 1, 2, 3, 4]);
        assert_eq!(factor_squarefree_irreducible(&quartic).unwrap(), vec![quartic.clone()]);
        assert!(factor_squarefree_irreducible(&Poly2::one()).is_err());
        assert!(factor_squarefree_irreducible(&Poly2::zero()).is_err());
        // x^4 + x^2 + x^3 + 1 = (x^3 + x + 1)(x + 1)
        let f = factor_squarefree_irreducible(&p(&[0, 2, 3, 4])).unwrap();
        assert_eq!(f, vec![p(&[0, 1]), p(&[0, 1, 3])]);
    }

    #[test]
    fn factorization_against_trial_division() {
        let irr = irreducibles_up_to(12);
        let mut rng = rand::rngs::StdRng::seed_from_u64(33);
        for _ in 0..300 {
            // Random product of small irreducibles with multiplicities.
            let mut prod = Poly2::one();
            let mut expected: Vec<Poly2> = Vec::new();
            for _ in 0..rng.gen_range(1..5) {
                let q = irr[rng.gen_range(0..irr.len())].clone();
                for _ in 0..rng.gen_range(1..3) {
                    prod = &prod * &q;
                }
                expected.push(q);
            }
            expected.sort_by(|a, b| a.degree().cmp(&b.degree()).then(a.words.iter().rev().cmp(b.words.iter().rev())));
            expected.dedup();
            let got = factor_squarefree_irreducible(&prod).unwrap();
            assert_eq!(got, expected, "factoring {prod}");
            let mut radical = Poly2::one();
            for g in &got {
                assert!(g.is_irreducible());
                assert!(irr.contains(g));
                radical = &radical * g;
            }
            assert!(radical.divides(&prod).unwrap());
        }
    }

    #[test]
    fn rabin_matches_sieve() {
        let irr = irreducibles_up_to(10);
        for bits in 2u64..(1 << 11) {
            let q = Poly2::from_u64(bits);
            assert_eq!(q.is_irreducible(), irr.contains(&q), "{q}");
        }
    }

    #[test]
    fn hex_format() {
        assert_eq!(p(&[0, 1, 2]).to_hex(), "7");
        assert_eq!(Poly2::zero().to_hex(), "0");
        assert_eq!(p(&[4]).to_hex(), "10");
        assert_eq!(p(&[64]).to_hex(), "10000000000000000");
        assert_eq!(serde_json::to_string(&p(&[0, 2, 4])).unwrap(), "\"15\"");
        assert!(Poly2::from_hex("xyz").is_err());
    }

    proptest! {
        #[test]
        fn hex_round_trip(words in proptest::collection::vec(any::<u64>(), 0..4)) {
            let q = Poly2::from_words(words);
            prop_assert_eq!(Poly2::from_hex(&q.to_hex()).unwrap(), q.clone());
            let back: Poly2 = serde_json::from_str(&serde_json::to_string(&q).unwrap()).unwrap();
            prop_assert_eq!(back, q);
        }
    }
}
