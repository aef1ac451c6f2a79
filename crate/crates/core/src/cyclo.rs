//! Exact arithmetic in `ℤ[ζ]`, `ζ = e^{iπ/4}`, with an optional `√2^s` denominator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c0 + c1·ζ + c2·ζ² + c3·ζ³` with `ζ⁴ = -1`. All arithmetic is overflow-checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cyc8 {
    c: [i64; 4],
}

fn ck(v: Option<i64>) -> Result<i64> {
    v.ok_or(Error::Overflow)
}

impl Cyc8 {
    pub const ZERO: Cyc8 = Cyc8 { c: [0; 4] };
    pub const ONE: Cyc8 = Cyc8 { c: [1, 0, 0, 0] };
    pub const I: Cyc8 = Cyc8 { c: [0, 0, 1, 0] };
    /// `ζ − ζ³ = √2`.
    pub const SQRT2: Cyc8 = Cyc8 { c: [0, 1, 0, -1] };

    pub const fn new(c0: i64, c1: i64, c2: i64, c3: i64) -> Self {
        Cyc8 { c: [c0, c1, c2, c3] }
    }

    pub const fn from_int(n: i64) -> Self {
        Cyc8 { c: [n, 0, 0, 0] }
    }

    /// `a + b·i`.
    pub const fn gaussian(a: i64, b: i64) -> Self {
        Cyc8 { c: [a, 0, b, 0] }
    }

    /// `ζ^k` for any integer `k`.
    pub fn zeta_pow(k: i64) -> Self {
        let k = k.rem_euclid(8) as usize;
        let mut c = [0; 4];
        if k < 4 {
            c[k] = 1;
        } else {
            c[k - 4] = -1;
        }
        Cyc8 { c }
    }

    /// `i^k`.
    pub fn i_pow(k: i64) -> Self {
        Self::zeta_pow(2 * k.rem_euclid(4))
    }

    pub fn coeffs(&self) -> [i64; 4] {
        self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c == [0; 4]
    }

    pub fn conj(&self) -> Self {
        let [c0, c1, c2, c3] = self.c;
        Cyc8 { c: [c0, -c3, -c2, -c1] }
    }

    pub fn checked_add(&self, o: &Cyc8) -> Result<Cyc8> {
        let mut c = [0; 4];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = ck(self.c[k].checked_add(o.c[k]))?;
        }
        Ok(Cyc8 { c })
    }

    pub fn checked_sub(&self, o: &Cyc8) -> Result<Cyc8> {
        self.checked_add(&o.checked_neg()?)
    }

    pub fn checked_neg(&self) -> Result<Cyc8> {
        let mut c = [0; 4];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = ck(self.c[k].checked_neg())?;
        }
        Ok(Cyc8 { c })
    }

    pub fn checked_mul(&self, o: &Cyc8) -> Result<Cyc8> {
        let mut c = [0i64; 4];
        for i in 0..4 {
            if self.c[i] == 0 {
                continue;
            }
            for j in 0..4 {
                let t = ck(self.c[i].checked_mul(o.c[j]))?;
                let k = i + j;
                if k < 4 {
                    c[k] = ck(c[k].checked_add(t))?;
                } else {
                    c[k - 4] = ck(c[k - 4].checked_sub(t))?;
                }
            }
        }
        Ok(Cyc8 { c })
    }

    pub fn checked_scale(&self, n: i64) -> Result<Cyc8> {
        let mut c = [0; 4];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = ck(self.c[k].checked_mul(n))?;
        }
        Ok(Cyc8 { c })
    }

    /// Multiplication by `ζ^k` only permutes and negates coefficients.
    pub fn mul_zeta_pow(&self, k: i64) -> Result<Cyc8> {
        let mut out = *self;
        for _ in 0..k.rem_euclid(8) {
            let [c0, c1, c2, c3] = out.c;
            out.c = [ck(c3.checked_neg())?, c0, c1, c2];
        }
        Ok(out)
    }

    pub fn checked_pow(&self, mut e: u64) -> Result<Cyc8> {
        let mut base = *self;
        let mut acc = Cyc8::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `|z|² = z·z̄`, an element of `ℤ[√2]`.
    pub fn norm_sq(&self) -> Result<Cyc8> {
        self.checked_mul(&self.conj())
    }

    /// `(a, b)` with `z = a + b√2`, if `z` lies in `ℤ[√2]`.
    pub fn as_zsqrt2(&self) -> Option<(i64, i64)> {
        let [c0, c1, c2, c3] = self.c;
        (c2 == 0 && c1 == -c3).then_some((c0, c1))
    }

    /// `(a, b)` with `z = a + b·i`, if `z` lies in `ℤ[i]`.
    pub fn as_gaussian(&self) -> Option<(i64, i64)> {
        let [c0, c1, c2, c3] = self.c;
        (c1 == 0 && c3 == 0).then_some((c0, c2))
    }

    /// `z / √2` when it stays integral: `z·(ζ − ζ³)` must have all coefficients even.
    pub fn div_sqrt2(&self) -> Option<Cyc8> {
        let [c0, c1, c2, c3] = self.c;
        // z·(ζ − ζ³), expanded with ζ⁴ = -1.
        let p = [
            c1.checked_sub(c3)?,
            c0.checked_add(c2)?,
            c1.checked_add(c3)?,
            c2.checked_sub(c0)?,
        ];
        if p.iter().all(|v| v % 2 == 0) {
            Some(Cyc8 { c: p.map(|v| v / 2) })
        } else {
            None
        }
    }

    /// Floating-point value, for display only.
    pub fn to_complex(&self) -> (f64, f64) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let [c0, c1, c2, c3] = self.c.map(|v| v as f64);
        (c0 + h * (c1 - c3), c2 + h * (c1 + c3))
    }
}

fn fmt_gaussian(a: i64, b: i64) -> String {
    let imag = |b: i64| match b {
        1 => "i".to_string(),
        -1 => "-i".to_string(),
        _ => format!("{b}i"),
    };
    match (a, b) {
        (a, 0) => a.to_string(),
        (0, b) => imag(b),
        (a, b) if b > 0 => format!("{a}+{}", imag(b)),
        (a, b) => format!("{a}{}", imag(b)),
    }
}

impl fmt::Display for Cyc8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_gaussian() {
            Some((a, b)) => write!(f, "{}", fmt_gaussian(a, b)),
            None => write!(f, "[{}, {}, {}, {}]ζ", self.c[0], self.c[1], self.c[2], self.c[3]),
        }
    }
}

/// `value / √2^scale_exp`, always kept with minimal `scale_exp`; the minimal form is
/// unique, so structural equality is value equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawScaled", into = "RawScaled")]
pub struct ScaledCyc8 {
    value: Cyc8,
    scale_exp: u32,
}

#[derive(Serialize, Deserialize)]
struct RawScaled {
    value: Cyc8,
    scale_exp: u32,
}

impl From<ScaledCyc8> for RawScaled {
    fn from(s: ScaledCyc8) -> Self {
        RawScaled { value: s.value, scale_exp: s.scale_exp }
    }
}

impl From<RawScaled> for ScaledCyc8 {
    fn from(r: RawScaled) -> Self {
        ScaledCyc8::new(r.value, r.scale_exp)
    }
}

impl ScaledCyc8 {
    pub const ONE: ScaledCyc8 = ScaledCyc8 { value: Cyc8::ONE, scale_exp: 0 };

    pub fn new(value: Cyc8, scale_exp: u32) -> Self {
        let (mut value, mut scale_exp) = (value, scale_exp);
        if value.is_zero() {
            return ScaledCyc8 { value, scale_exp: 0 };
        }
        while scale_exp > 0 {
            match value.div_sqrt2() {
                Some(v) => {
                    value = v;
                    scale_exp -= 1;
                }
                None => break,
            }
        }
        ScaledCyc8 { value, scale_exp }
    }

    pub fn integral(value: Cyc8) -> Self {
        ScaledCyc8 { value, scale_exp: 0 }
    }

    pub fn value(&self) -> Cyc8 {
        self.value
    }

    pub fn scale_exp(&self) -> u32 {
        self.scale_exp
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn conj(&self) -> Self {
        ScaledCyc8 { value: self.value.conj(), scale_exp: self.scale_exp }
    }

    /// The numerator rescaled to a larger exponent `s`, i.e. multiplied by `√2^(s - scale_exp)`.
    pub fn numerator_at(&self, s: u32) -> Result<Cyc8> {
        if s < self.scale_exp {
            return Err(Error::arg("cannot lower the scale exponent"));
        }
        let mut v = self.value;
        let extra = s - self.scale_exp;
        v = v.checked_scale(1i64.checked_shl(extra / 2).filter(|_| extra / 2 < 63).ok_or(Error::Overflow)?)?;
        if extra % 2 == 1 {
            v = v.checked_mul(&Cyc8::SQRT2)?;
        }
        Ok(v)
    }

    pub fn checked_add(&self, o: &ScaledCyc8) -> Result<ScaledCyc8> {
        let s = self.scale_exp.max(o.scale_exp);
        Ok(ScaledCyc8::new(self.numerator_at(s)?.checked_add(&o.numerator_at(s)?)?, s))
    }

    pub fn checked_neg(&self) -> Result<ScaledCyc8> {
        Ok(ScaledCyc8 { value: self.value.checked_neg()?, scale_exp: self.scale_exp })
    }

    pub fn checked_mul(&self, o: &ScaledCyc8) -> Result<ScaledCyc8> {
        Ok(ScaledCyc8::new(self.value.checked_mul(&o.value)?, self.scale_exp + o.scale_exp))
    }

    pub fn checked_pow(&self, e: u64) -> Result<ScaledCyc8> {
        let mut acc = ScaledCyc8::ONE;
        for _ in 0..e {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> Result<ScaledCyc8> {
        self.checked_mul(&self.conj())
    }

    pub fn is_unimodular(&self) -> Result<bool> {
        Ok(self.norm_sq()? == ScaledCyc8::ONE)
    }

    /// `(a, b, k)` with the value equal to `(a + b·i) / 2^k`, if it lies in `ℤ[i][1/2]`.
    pub fn as_gaussian_over_pow2(&self) -> Option<(i64, i64, u32)> {
        let s = self.scale_exp;
        let num = if s.is_multiple_of(2) { self.value } else { self.value.checked_mul(&Cyc8::SQRT2).ok()? };
        let (a, b) = num.as_gaussian()?;
        Some((a, b, s.div_ceil(2)))
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let (re, im) = self.value.to_complex();
        let f = 2f64.sqrt().powi(self.scale_exp as i32);
        (re / f, im / f)
    }
}

impl From<Cyc8> for ScaledCyc8 {
    fn from(value: Cyc8) -> Self {
        ScaledCyc8::integral(value)
    }
}

/// `"(a+bi)/2^k"` when the value lies in `ℤ[i][1/2]`, otherwise the ζ-coefficients over `√2^s`.
impl fmt::Display for ScaledCyc8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_gaussian_over_pow2() {
            Some((a, b, 0)) => write!(f, "{}", fmt_gaussian(a, b)),
            Some((a, b, k)) if a != 0 && b != 0 => write!(f, "({})/2^{k}", fmt_gaussian(a, b)),
            Some((a, b, k)) => write!(f, "{}/2^{k}", fmt_gaussian(a, b)),
            None => {
                let [c0, c1, c2, c3] = self.value.coeffs();
                write!(f, "[{c0}, {c1}, {c2}, {c3}]ζ")?;
                if self.scale_exp > 0 {
                    write!(f, "/√2^{}", self.scale_exp)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(c0: i64, c1: i64, c2: i64, c3: i64) -> Cyc8 {
        Cyc8::new(c0, c1, c2, c3)
    }

    /// Multiplication as 8×8 negacyclic convolution over all exponents, then folded.
    fn mul_oracle(a: &Cyc8, b: &Cyc8) -> Cyc8 {
        let mut full = [0i64; 8];
        for i in 0..4 {
            for j in 0..4 {
                full[i + j] += a.c[i] * b.c[j];
            }
        }
        z(full[0] - full[4], full[1] - full[5], full[2] - full[6], full[3] - full[7])
    }

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
    }

    #[test]
    fn ring_identities() {
        let zeta = Cyc8::zeta_pow(1);
        assert_eq!(zeta.checked_mul(&Cyc8::zeta_pow(3)).unwrap(), Cyc8::from_int(-1));
        assert_eq!(Cyc8::SQRT2.checked_mul(&Cyc8::SQRT2).unwrap(), Cyc8::from_int(2));
        assert_eq!(Cyc8::I.checked_mul(&Cyc8::I).unwrap(), Cyc8::from_int(-1));
        assert_eq!(Cyc8::i_pow(3), z(0, 0, -1, 0));
        assert_eq!(Cyc8::zeta_pow(-1), z(0, 0, 0, -1));
        assert_eq!(zeta.checked_pow(8).unwrap(), Cyc8::ONE);
    }

    #[test]
    fn odd_global_phase_is_an_eighth_root() {
        let g = ScaledCyc8::new(Cyc8::gaussian(-1, 1), 1);
        assert_eq!(g.value(), Cyc8::zeta_pow(3));
        assert_eq!(g.scale_exp(), 0);
        // Repeated multiplication on the unnormalized numerator.
        let mut num = Cyc8::ONE;
        for k in 1..=8 {
            num = num.checked_mul(&Cyc8::gaussian(-1, 1)).unwrap();
            let v = ScaledCyc8::new(num, k);
            assert_eq!(v == ScaledCyc8::ONE, k == 8);
        }
        assert!(g.is_unimodular().unwrap());
    }

    #[test]
    fn overflow_is_detected() {
        let big = Cyc8::from_int(i64::MAX / 2 + 1);
        assert_eq!(big.checked_add(&big), Err(Error::Overflow));
        assert_eq!(big.checked_mul(&Cyc8::from_int(4)), Err(Error::Overflow));
        assert_eq!(Cyc8::from_int(i64::MIN).checked_neg(), Err(Error::Overflow));
        assert_eq!(Cyc8::new(0, 0, 0, i64::MIN).mul_zeta_pow(1), Err(Error::Overflow));
    }

    #[test]
    fn rendering() {
        assert_eq!(ScaledCyc8::new(Cyc8::gaussian(-1, 1), 2).to_string(), "(-1+i)/2^1");
        assert_eq!(ScaledCyc8::new(Cyc8::zeta_pow(3), 3).to_string(), "(-1+i)/2^2");
        assert_eq!(ScaledCyc8::new(Cyc8::I, 2).to_string(), "i/2^1");
        assert_eq!(ScaledCyc8::new(Cyc8::from_int(-1), 0).to_string(), "-1");
        assert_eq!(ScaledCyc8::new(Cyc8::zeta_pow(1), 0).to_string(), "[0, 1, 0, 0]ζ");
        assert_eq!(ScaledCyc8::new(Cyc8::ONE, 1).to_string(), "[1, 0, 0, 0]ζ/√2^1");
    }

    #[test]
    fn json_shapes() {
        assert_eq!(serde_json::to_string(&z(1, -2, 0, 3)).unwrap(), "[1,-2,0,3]");
        let s = ScaledCyc8::new(Cyc8::gaussian(0, 2), 2);
        let v = serde_json::to_value(s).unwrap();
        assert_eq!(v, serde_json::json!({"value": [0, 0, 1, 0], "scale_exp": 0}));
        let back: ScaledCyc8 = serde_json::from_str(r#"{"value":[2,0,0,0],"scale_exp":2}"#).unwrap();
        assert_eq!(back, ScaledCyc8::ONE);
    }

    fn small() -> impl Strategy<Value = Cyc8> {
        prop::array::uniform4(-50i64..50).prop_map(|c| Cyc8 { c })
    }

    proptest! {
        #[test]
        fn mul_matches_oracle_and_floats(a in small(), b in small()) {
            let p = a.checked_mul(&b).unwrap();
            prop_assert_eq!(p, mul_oracle(&a, &b));
            let (ar, ai) = a.to_complex();
            let (br, bi) = b.to_complex();
            prop_assert!(close(p.to_complex(), (ar * br - ai * bi, ar * bi + ai * br)));
        }

        #[test]
        fn conj_is_involutive_and_norm_is_real(a in small()) {
            prop_assert_eq!(a.conj().conj(), a);
            let n = a.norm_sq().unwrap();
            prop_assert!(n.as_zsqrt2().is_some());
            let (re, im) = a.to_complex();
            prop_assert!(close(n.to_complex(), (re * re + im * im, 0.0)));
        }

        #[test]
        fn scaled_equality_is_value_equality(a in small(), s in 0u32..6, t in 0u32..4) {
            let x = ScaledCyc8::new(a, s);
            // Same value written with t extra √2 factors in numerator and denominator.
            let mut num = a;
            for _ in 0..t {
                num = num.checked_mul(&Cyc8::SQRT2).unwrap();
            }
            let y = ScaledCyc8::new(num, s + t);
            prop_assert_eq!(x, y);
            prop_assert!(close(x.to_complex(), y.to_complex()));
        }

        #[test]
        fn scaled_add_mul_match_floats(a in small(), b in small(), s in 0u32..5, t in 0u32..5) {
            let (x, y) = (ScaledCyc8::new(a, s), ScaledCyc8::new(b, t));
            let (xr, xi) = x.to_complex();
            let (yr, yi) = y.to_complex();
            prop_assert!(close(x.checked_add(&y).unwrap().to_complex(), (xr + yr, xi + yi)));
            prop_assert!(close(x.checked_mul(&y).unwrap().to_complex(), (xr * yr - xi * yi, xr * yi + xi * yr)));
        }

        #[test]
        fn div_sqrt2_inverts_mul(a in small()) {
            prop_assert_eq!(a.checked_mul(&Cyc8::SQRT2).unwrap().div_sqrt2(), Some(a));
        }
    }
}
