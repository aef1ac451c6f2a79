//! The Clifford image `C = [[B, I], [I, 0]]`, its generator orbit, and the
//! conditions that make the orbit a partition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fib::{fib_pair_at, fib_scan_invertibility, ScanOptions};
use crate::gf2::BitMatrix;
use crate::poly::{factor_squarefree_irreducible, min_poly, Poly2};

/// Largest `m` for which `check_conditions` repeats conditions ii and iii on matrices.
pub const MATRIX_CROSS_CHECK_MAX_M: usize = 8;

/// A `2m × 2m` matrix with `Cᵀ·J·C = J` over F₂.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticMatrix {
    mat: BitMatrix,
    m: usize,
}

impl SymplecticMatrix {
    pub fn new(mat: BitMatrix) -> Result<Self> {
        if !mat.is_square() || !mat.n_rows().is_multiple_of(2) {
            return Err(Error::shape("symplectic matrices are square of even size"));
        }
        if !is_symplectic(&mat) {
            return Err(Error::arg("matrix is not symplectic"));
        }
        let m = mat.n_rows() / 2;
        Ok(Self { mat, m })
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.mat
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// `J = [[0, I], [I, 0]]`; the sign of the upper block is irrelevant over F₂.
pub fn symplectic_form(m: usize) -> BitMatrix {
    BitMatrix::from_fn(2 * m, 2 * m, |i, j| i + m == j || j + m == i)
}

pub fn is_symplectic(c: &BitMatrix) -> bool {
    if !c.is_square() || !c.n_rows().is_multiple_of(2) {
        return false;
    }
    let j = symplectic_form(c.n_rows() / 2);
    &(&c.transpose() * &j) * c == j
}

/// `[[B, I], [I, 0]]` without validation.
fn block_c(b: &BitMatrix) -> Result<BitMatrix> {
    let m = b.n_rows();
    BitMatrix::block2x2(b, &BitMatrix::identity(m), &BitMatrix::identity(m), &BitMatrix::zeros(m, m))
}

pub fn embed_c(b: &BitMatrix) -> Result<SymplecticMatrix> {
    if !b.is_square() {
        return Err(Error::shape("B must be square"));
    }
    if !b.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    SymplecticMatrix::new(block_c(b)?)
}

/// An `m × 2m` matrix whose row span is one commuting class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    mat: BitMatrix,
    m: usize,
}

impl GeneratorMatrix {
    pub fn new(mat: BitMatrix) -> Result<Self> {
        let m = mat.n_rows();
        if mat.n_cols() != 2 * m {
            return Err(Error::shape("generator matrices are m x 2m"));
        }
        if mat.rank() != m {
            return Err(Error::arg("generator matrix must have full row rank"));
        }
        Ok(Self { mat, m })
    }

    /// `C₁ = (0 | I)`.
    pub fn first(m: usize) -> Self {
        let mat = BitMatrix::zeros(m, m).hstack(&BitMatrix::identity(m)).expect("same row count");
        Self { mat, m }
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.mat
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Whether the `2m`-bit row vector lies in the span, by a rank test.
    pub fn contains_vector(&self, v: &BitMatrix) -> Result<bool> {
        if v.n_rows() != 1 || v.n_cols() != 2 * self.m {
            return Err(Error::shape("expected a 1 x 2m row vector"));
        }
        Ok(self.mat.vstack(v)?.rank() == self.m)
    }

    /// `C_j·J·C_jᵀ = 0`: every pair of span vectors has vanishing symplectic product.
    pub fn is_isotropic(&self) -> bool {
        let j = symplectic_form(self.m);
        (&(&self.mat * &j) * &self.mat.transpose()).is_zero()
    }
}

/// `C_j = C₁·(C^{j-1})ᵀ = (f_{j-2}(B) | f_{j-3}(B))`, with the blocks reduced modulo `μ_B`
/// before evaluation so large `j` stay cheap.
pub fn generator(j: u64, b: &BitMatrix) -> Result<GeneratorMatrix> {
    if j == 0 {
        return Err(Error::arg("generator index starts at 1"));
    }
    if !b.is_square() {
        return Err(Error::shape("B must be square"));
    }
    if !b.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let m = b.n_rows();
    if j == 1 {
        return Ok(GeneratorMatrix::first(m));
    }
    let mu = min_poly(b)?;
    let pair = fib_pair_at(j - 2, &mu)?;
    let left = pair.hi.eval_matrix(b)?;
    let right = pair.lo.eval_matrix(b)?;
    Ok(GeneratorMatrix { mat: left.hstack(&right)?, m })
}

/// Two classes are disjoint (apart from the identity) iff the stacked `2m × 2m`
/// matrix is invertible.
pub fn spans_disjoint(cj: &GeneratorMatrix, ck: &GeneratorMatrix) -> Result<bool> {
    if cj.m != ck.m {
        return Err(Error::shape("generator matrices for different m"));
    }
    cj.mat.vstack(&ck.mat)?.invertible()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub symmetric_ok: bool,
    pub symplectic_ok: bool,
    pub cond_ii_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failing_j: Option<u64>,
    pub cond_iii_ok: bool,
    pub order_ok: bool,
    /// Independent routes agreed: the matrix-level recomputation of ii and iii
    /// (small `m` only) and the implication (i ∧ ii ∧ iii) ⇒ `C^{d+1} = I`.
    pub consistent: bool,
}

impl ConditionReport {
    pub fn all_ok(&self) -> bool {
        self.symmetric_ok && self.symplectic_ok && self.cond_ii_ok && self.cond_iii_ok && self.order_ok
    }
}

/// Decides conditions i–iii for `B` and cross-checks them against the order of `C`.
///
/// Condition ii runs the quotient-ring scan modulo each irreducible factor of `μ_B`;
/// condition iii compares `f_{2^{m-1}}` and `f_{2^{m-1}-1}` modulo `μ_B` via index doubling.
pub fn check_conditions(b: &BitMatrix) -> Result<ConditionReport> {
    check_conditions_with(b, ScanOptions::default())
}

pub fn check_conditions_with(b: &BitMatrix, opts: ScanOptions) -> Result<ConditionReport> {
    if !b.is_square() {
        return Err(Error::shape("B must be square"));
    }
    let m = b.n_rows();
    if m > 63 {
        return Err(Error::Budget { requested: m, cap: 63 });
    }
    let half = 1u64 << (m - 1);
    let symmetric_ok = b.is_symmetric();
    let c = block_c(b)?;
    let symplectic_ok = is_symplectic(&c);

    let mu = min_poly(b)?;
    let factors = factor_squarefree_irreducible(&mu)?;
    let scan = fib_scan_invertibility(&factors, half, opts)?;
    let pair = fib_pair_at(half, &mu)?;
    let cond_iii_ok = pair.hi == pair.lo;
    let order_ok = c.pow((1u64 << m) + 1)?.is_identity();

    let mut consistent = !(symmetric_ok && scan.passed() && cond_iii_ok) || order_ok;
    if m <= MATRIX_CROSS_CHECK_MAX_M {
        let (matrix_fail, matrix_iii) = matrix_level_conditions(b, half)?;
        consistent &= matrix_fail == scan.first_failure && matrix_iii == cond_iii_ok;
    }

    Ok(ConditionReport {
        symmetric_ok,
        symplectic_ok,
        cond_ii_ok: scan.passed(),
        first_failing_j: scan.first_failure,
        cond_iii_ok,
        order_ok,
        consistent,
    })
}

/// Conditions ii and iii on matrices directly: `F_j = F_{j-1}·B + F_{j-2}`.
/// Returns the first singular `F_j` (`j ≤ k_max`) and whether `F_{k_max} = F_{k_max - 1}`.
pub fn matrix_level_conditions(b: &BitMatrix, k_max: u64) -> Result<(Option<u64>, bool)> {
    let m = b.n_rows();
    let (mut prev, mut cur) = (BitMatrix::zeros(m, m), BitMatrix::identity(m));
    let mut first_fail = None;
    for j in 1..=k_max {
        let next = cur.mat_mul(b)?.mat_add(&prev)?;
        prev = std::mem::replace(&mut cur, next);
        if first_fail.is_none() && !cur.invertible()? {
            first_fail = Some(j);
        }
    }
    Ok((first_fail, cur == prev))
}

/// `C^{2^m + 1} = I` by square-and-multiply on the `2m × 2m` matrix.
pub fn order_check(b: &BitMatrix) -> Result<bool> {
    let c = embed_c(b)?;
    Ok(c.matrix().pow((1u64 << c.m()) + 1)?.is_identity())
}

/// `f_k(B)` for `k ≥ -2`, reducing `f_k` modulo `μ_B` first.
pub fn fib_at_matrix(k: i64, b: &BitMatrix) -> Result<BitMatrix> {
    let m = b.n_rows();
    match k {
        i64::MIN..=-3 => Err(Error::arg("f_k is defined for k >= -2")),
        -2 => Ok(BitMatrix::identity(m)),
        -1 => Ok(BitMatrix::zeros(m, m)),
        _ => {
            let mu: Poly2 = min_poly(b)?;
            fib_pair_at(k as u64, &mu)?.hi.eval_matrix(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fib::fib_poly;
    use rand::{Rng, SeedableRng};

    fn m(rows: &[&str]) -> BitMatrix {
        BitMatrix::parse_rows(rows).unwrap()
    }

    fn random_symmetric(rng: &mut impl Rng, n: usize) -> BitMatrix {
        let mut b = BitMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen();
                b.set(i, j, v);
                b.set(j, i, v);
            }
        }
        b
    }

    #[test]
    fn embed_examples() {
        let c = embed_c(&m(&["1"])).unwrap();
        assert_eq!(c.matrix(), &m(&["11", "10"]));
        let c2 = embed_c(&m(&["11", "10"])).unwrap();
        assert!(is_symplectic(c2.matrix()));
        assert_eq!(c2.matrix(), &m(&["1110", "1001", "1000", "0100"]));
        assert_eq!(embed_c(&m(&["10", "11"])), Err(Error::NotSymmetric));
        let zero = embed_c(&BitMatrix::zeros(2, 2)).unwrap();
        assert!(is_symplectic(zero.matrix()));
        let report = check_conditions(&BitMatrix::zeros(2, 2)).unwrap();
        assert_eq!(report.first_failing_j, Some(1));
    }

    #[test]
    fn symplectic_checks() {
        assert!(is_symplectic(&BitMatrix::identity(6)));
        let forced = block_c(&m(&["10", "11"])).unwrap();
        assert!(!is_symplectic(&forced));
        let c = embed_c(&m(&["111", "110", "100"])).unwrap();
        assert!(is_symplectic(&(c.matrix() * c.matrix())));
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        for _ in 0..20 {
            let a = embed_c(&random_symmetric(&mut rng, 4)).unwrap();
            let b = embed_c(&random_symmetric(&mut rng, 4)).unwrap();
            assert!(is_symplectic(&(a.matrix() * b.matrix())));
        }
    }

    #[test]
    fn generator_examples() {
        let b = m(&["11", "10"]);
        assert_eq!(generator(1, &b).unwrap().matrix(), &m(&["0010", "0001"]));
        assert_eq!(generator(2, &b).unwrap().matrix(), &m(&["1000", "0100"]));
        assert_eq!(generator(3, &b).unwrap().matrix(), &m(&["1110", "1001"]));
        assert!(generator(0, &b).is_err());
        assert_eq!(generator(2, &m(&["10", "11"])), Err(Error::NotSymmetric));
    }

    #[test]
    fn generator_matches_orbit_of_c() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        for n in 1..=5 {
            let b = random_symmetric(&mut rng, n);
            let c = embed_c(&b).unwrap();
            let ct = c.matrix().transpose();
            let mut gen = GeneratorMatrix::first(n).matrix().clone();
            for j in 1..=(1u64 << n) + 3 {
                assert_eq!(generator(j, &b).unwrap().matrix(), &gen, "j={j}, B={b:?}");
                gen = &gen * &ct;
            }
        }
    }

    #[test]
    fn c_power_block_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        for n in 1..=6usize {
            let b = random_symmetric(&mut rng, n);
            let c = embed_c(&b).unwrap();
            let mut power = c.matrix().clone();
            for k in 1..=(1i64 << n) {
                let [tl, tr, bl, br] = power.split_blocks().unwrap();
                let fk = fib_poly(k).eval_matrix(&b).unwrap();
                let fk1 = fib_poly(k - 1).eval_matrix(&b).unwrap();
                let fk2 = fib_poly(k - 2).eval_matrix(&b).unwrap();
                assert_eq!((tl, tr, bl, br), (fk.clone(), fk1.clone(), fk1, fk2));
                assert_eq!(fib_at_matrix(k, &b).unwrap(), fk);
                power = &power * c.matrix();
            }
        }
    }

    #[test]
    fn disjointness_examples() {
        let c1 = GeneratorMatrix::first(3);
        let b = m(&["111", "110", "100"]);
        let c2 = generator(2, &b).unwrap();
        assert!(spans_disjoint(&c1, &c2).unwrap());
        assert!(!spans_disjoint(&c2, &c2).unwrap());
        assert!(spans_disjoint(&c1, &GeneratorMatrix::first(2)).is_err());
    }

    #[test]
    fn disjointness_follows_block_determinant() {
        let b = m(&["111", "110", "100"]);
        let gens: Vec<_> = (1..=9).map(|j| generator(j, &b).unwrap()).collect();
        for j in 1..=9usize {
            for k in j + 1..=9 {
                let stacked = spans_disjoint(&gens[j - 1], &gens[k - 1]).unwrap();
                let poly_route = fib_poly((k - j) as i64 - 1).eval_matrix(&b).unwrap().invertible().unwrap();
                assert!(stacked);
                assert_eq!(stacked, poly_route);
            }
        }
    }

    #[test]
    fn condition_examples() {
        let r = check_conditions(&m(&["11", "10"])).unwrap();
        assert!(r.all_ok() && r.consistent);
        let r = check_conditions(&m(&["111", "110", "100"])).unwrap();
        assert!(r.all_ok() && r.consistent);
        let r = check_conditions(&BitMatrix::identity(3)).unwrap();
        assert!(!r.cond_ii_ok);
        assert_eq!(r.first_failing_j, Some(2));
        assert!(r.consistent);
        let r = check_conditions(&m(&["10", "11"])).unwrap();
        assert!(!r.symmetric_ok && !r.symplectic_ok && !r.all_ok());
    }

    #[test]
    fn order_examples() {
        assert!(order_check(&m(&["1"])).unwrap());
        assert!(order_check(&m(&["11", "10"])).unwrap());
        assert!(!order_check(&BitMatrix::zeros(2, 2)).unwrap());
        assert_eq!(order_check(&m(&["10", "11"])), Err(Error::NotSymmetric));
    }

    #[test]
    fn report_json_shape() {
        let r = check_conditions(&BitMatrix::identity(3)).unwrap();
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        assert_eq!(v["first_failing_j"], 2);
        assert_eq!(v["cond_ii_ok"], false);
        let ok = check_conditions(&m(&["11", "10"])).unwrap();
        let v: serde_json::Value = serde_json::to_value(ok).unwrap();
        assert!(v.get("first_failing_j").is_none());
        let back: ConditionReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, ok);
    }

    #[test]
    fn isotropy_and_membership() {
        let b = m(&["111", "110", "100"]);
        for j in 1..=9 {
            let g = generator(j, &b).unwrap();
            assert!(g.is_isotropic());
            let row0 = BitMatrix::from_fn(1, 6, |_, c| g.matrix().get(0, c));
            assert!(g.contains_vector(&row0).unwrap());
        }
        let g = GeneratorMatrix::first(3);
        let x1 = BitMatrix::from_fn(1, 6, |_, c| c == 0);
        assert!(!g.contains_vector(&x1).unwrap());
    }
}
