//! Elementary operators on the truncated spin ⊗ oscillator space.
//!
//! Basis conventions used throughout the crate:
//!
//! * spin basis `(|e⟩, |g⟩)` at indices `(0, 1)`, so `σ_z = diag(1, -1)`;
//! * oscillator Fock states indexed from 0 up to `n_max - 1`;
//! * composite index `spin * n_max + n` (spin is the slow index), so a
//!   composite operator is a 2×2 array of `n_max × n_max` blocks.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::expm_anti_hermitian;

pub type ComplexMatrix = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Oscillator cutoff plus the number of top Fock levels excluded from
/// interior comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncationSpec {
    n_max: usize,
    guard: usize,
}

impl TruncationSpec {
    pub fn new(n_max: usize, guard: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidTruncation("n_max must be positive".into()));
        }
        if guard >= n_max {
            return Err(Error::InvalidTruncation(format!(
                "guard < n_max violated (guard = {guard}, n_max = {n_max})"
            )));
        }
        Ok(Self { n_max, guard })
    }

    /// Cutoff with no guard band.
    pub fn unguarded(n_max: usize) -> Result<Self> {
        Self::new(n_max, 0)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    /// Number of Fock levels kept by [`interior_block`].
    pub fn interior_dim(&self) -> usize {
        self.n_max - self.guard
    }

    /// Dimension of the composite spin ⊗ oscillator space.
    pub fn composite_dim(&self) -> usize {
        2 * self.n_max
    }

    pub fn with_guard(&self, guard: usize) -> Result<Self> {
        Self::new(self.n_max, guard)
    }
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self {
            n_max: 64,
            guard: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinIndex {
    Z,
    Plus,
    Minus,
    Y,
    X,
    Identity,
}

/// Which definition of `σ_y` to use.
///
/// `Standard` is the Hermitian Pauli matrix `i(σ_- - σ_+)`. `Literal` is the
/// bare combination `iσ_- - σ_+`, which is neither Hermitian nor
/// anti-Hermitian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaYConvention {
    Literal,
    Standard,
}

fn mat2(a: C64, b: C64, c: C64, d: C64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Pauli matrix in the `(|e⟩, |g⟩)` basis; `Y` uses the standard convention.
pub fn pauli(s: SpinIndex) -> ComplexMatrix {
    match s {
        SpinIndex::Z => mat2(ONE, ZERO, ZERO, -ONE),
        SpinIndex::Plus => mat2(ZERO, ONE, ZERO, ZERO),
        SpinIndex::Minus => mat2(ZERO, ZERO, ONE, ZERO),
        SpinIndex::X => mat2(ZERO, ONE, ONE, ZERO),
        SpinIndex::Y => sigma_y(SigmaYConvention::Standard),
        SpinIndex::Identity => identity(2),
    }
}

pub fn sigma_y(convention: SigmaYConvention) -> ComplexMatrix {
    let plus = pauli(SpinIndex::Plus);
    let minus = pauli(SpinIndex::Minus);
    match convention {
        SigmaYConvention::Standard => (minus - plus) * I,
        SigmaYConvention::Literal => minus * I - plus,
    }
}

/// Lowering operator `a` with `⟨n-1|a|n⟩ = √n`.
pub fn annihilation(trunc: TruncationSpec) -> ComplexMatrix {
    let n_max = trunc.n_max();
    let mut a = ComplexMatrix::zeros(n_max, n_max);
    for n in 1..n_max {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation(trunc: TruncationSpec) -> ComplexMatrix {
    dagger(&annihilation(trunc))
}

/// `diag(0, 1, ..., n_max-1)`; equals `a†a` under this truncation up to the
/// rounding of `√n·√n`.
pub fn number(trunc: TruncationSpec) -> ComplexMatrix {
    let n_max = trunc.n_max();
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_fn(n_max, |n, _| {
        C64::new(n as f64, 0.0)
    }))
}

/// Position-like quadrature `a + a†`.
pub fn quadrature(trunc: TruncationSpec) -> ComplexMatrix {
    let a = annihilation(trunc);
    &a + dagger(&a)
}

/// `D(α) = exp(α a† − α* a)` on the truncated space, via the anti-Hermitian
/// generator. Exactly unitary on the truncated space.
pub fn displacement_generator(alpha: C64, trunc: TruncationSpec) -> ComplexMatrix {
    if alpha == ZERO {
        return identity(trunc.n_max());
    }
    let a = annihilation(trunc);
    let generator = dagger(&a) * alpha - a * alpha.conj();
    expm_anti_hermitian(&generator).expect("generator is square")
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by upward recurrence.
pub(crate) fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * cur - (jf + k) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Infinite-dimensional matrix elements `⟨m|D(α)|n⟩` restricted to the
/// truncated space. Not unitary near the cutoff.
pub fn displacement_laguerre(alpha: C64, trunc: TruncationSpec) -> ComplexMatrix {
    let n_max = trunc.n_max();
    let x = alpha.norm_sqr();
    let envelope = (-x / 2.0).exp();
    ComplexMatrix::from_fn(n_max, n_max, |m, n| {
        // lower triangle carries α^{m-n}, upper triangle (−α*)^{n-m}
        let (lo, hi, base) = if m >= n {
            (n, m, alpha)
        } else {
            (m, n, -alpha.conj())
        };
        let mut coeff = ONE;
        for j in (lo + 1)..=hi {
            coeff *= base / (j as f64).sqrt();
        }
        coeff * envelope * laguerre(lo, hi - lo, x)
    })
}

/// Tensor product with the spin as the outer index: block `(i, j)` is `s[i,j]·m`.
pub fn spin_tensor_osc(s: &ComplexMatrix, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if s.nrows() != 2 || s.ncols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "spin factor must be 2x2, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "oscillator factor must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(s.kronecker(m))
}

/// Infallible variant for internal callers that build the 2×2 factor themselves.
pub(crate) fn kron(s: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    spin_tensor_osc(s, m).expect("2x2 spin factor")
}

fn check_same_square(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "expected equal square matrices, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_square(a, b)?;
    Ok(a * b - b * a)
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// Largest entry of `|A − A†|`.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_defect(a) <= tol
}

/// Largest entry of `|A A† − I|`.
pub fn unitarity_defect(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let prod = a * dagger(a);
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn is_unitary(a: &ComplexMatrix, tol: f64) -> bool {
    unitarity_defect(a) <= tol
}

/// Fock indices kept by [`interior_block`] for a matrix of dimension `dim`.
pub fn interior_indices(dim: usize, trunc: TruncationSpec) -> Result<Vec<usize>> {
    let n_max = trunc.n_max();
    let keep = trunc.interior_dim();
    if dim == n_max {
        Ok((0..keep).collect())
    } else if dim == 2 * n_max {
        Ok((0..keep).chain(n_max..n_max + keep).collect())
    } else {
        Err(Error::DimensionMismatch(format!(
            "interior block needs dimension {n_max} or {}, got {dim}",
            2 * n_max
        )))
    }
}

/// Removes rows and columns whose Fock index is `≥ n_max − guard`, in each
/// spin block for composite matrices.
pub fn interior_block(a: &ComplexMatrix, trunc: TruncationSpec) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "interior block needs a square matrix, got {:?}",
            a.shape()
        )));
    }
    let idx = interior_indices(a.nrows(), trunc)?;
    Ok(ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| {
        a[(idx[r], idx[c])]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ROUNDING: f64 = 1e-13;

    fn trunc(n: usize, g: usize) -> TruncationSpec {
        TruncationSpec::new(n, g).unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn truncation_rejects_bad_guard() {
        assert!(TruncationSpec::new(0, 0).is_err());
        assert!(TruncationSpec::new(4, 4).is_err());
        assert_eq!(TruncationSpec::new(4, 3).unwrap().interior_dim(), 1);
    }

    #[test]
    fn annihilation_small_cases() {
        let a = annihilation(trunc(3, 0));
        let s2 = 2f64.sqrt();
        let expected = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                ZERO,
                ONE,
                ZERO,
                ZERO,
                ZERO,
                C64::new(s2, 0.0),
                ZERO,
                ZERO,
                ZERO,
            ],
        );
        assert_eq!(a, expected);
        assert_eq!(annihilation(trunc(1, 0)), ComplexMatrix::zeros(1, 1));
    }

    #[test]
    fn number_is_a_dagger_a() {
        let t = trunc(7, 0);
        let a = annihilation(t);
        let n = number(t);
        // √n·√n reproduces n up to rounding only
        assert!(close(&(dagger(&a) * &a), &n, 1e-13));
        let tr: f64 = n.trace().re;
        assert_eq!(tr, (7 * 6 / 2) as f64);
        assert_eq!(
            number(trunc(3, 0)).diagonal().map(|z| z.re).as_slice(),
            &[0.0, 1.0, 2.0]
        );
    }

    #[test]
    fn pauli_commutators() {
        let z = pauli(SpinIndex::Z);
        let p = pauli(SpinIndex::Plus);
        let m = pauli(SpinIndex::Minus);
        assert_eq!(commutator(&z, &p).unwrap(), &p * C64::new(2.0, 0.0));
        assert_eq!(commutator(&z, &m).unwrap(), &m * C64::new(-2.0, 0.0));
        assert_eq!(commutator(&p, &m).unwrap(), z);
    }

    #[test]
    fn sigma_y_conventions() {
        let standard = sigma_y(SigmaYConvention::Standard);
        assert_eq!(standard, mat2(ZERO, -I, I, ZERO));
        assert!(is_hermitian(&standard, 0.0));

        // iσ_- − σ_+ evaluated literally
        let literal = sigma_y(SigmaYConvention::Literal);
        assert_eq!(literal, mat2(ZERO, -ONE, I, ZERO));
        assert!(!is_hermitian(&literal, 1e-3));
        assert!(!is_hermitian(&(&literal * I), 1e-3));
    }

    #[test]
    fn displacement_identity_and_inverse() {
        let t = trunc(24, 0);
        assert_eq!(displacement_generator(ZERO, t), identity(24));
        assert!(close(&displacement_laguerre(ZERO, t), &identity(24), 0.0));
        let alpha = C64::new(0.2, -0.4);
        let prod = displacement_generator(alpha, t) * displacement_generator(-alpha, t);
        assert!(close(&prod, &identity(24), 1e-12));
    }

    #[test]
    fn displacement_vacuum_element() {
        let eta = 0.3;
        let d = displacement_generator(C64::new(0.0, eta), trunc(40, 0));
        assert!((d[(0, 0)] - C64::new((-eta * eta / 2.0).exp(), 0.0)).norm() < 1e-9);
        assert!(is_unitary(&d, 1e-10));
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_eq!(laguerre(0, 3, x), 1.0);
        assert!((laguerre(1, 2, x) - (3.0 - x)).abs() < 1e-15);
        // L_2^{(k)}(x) = (x² − 2(k+2)x + (k+1)(k+2)) / 2
        let k = 1.0;
        let want = (x * x - 2.0 * (k + 2.0) * x + (k + 1.0) * (k + 2.0)) / 2.0;
        assert!((laguerre(2, 1, x) - want).abs() < 1e-14);
    }

    #[test]
    fn laguerre_column_zero_is_coherent_state() {
        let alpha = C64::new(0.3, 0.4);
        let d = displacement_laguerre(alpha, trunc(20, 0));
        let mut fact = 1.0;
        for n in 0..20 {
            if n > 0 {
                fact *= n as f64;
            }
            let want = alpha.powu(n as u32) * (-alpha.norm_sqr() / 2.0).exp() / fact.sqrt();
            assert!((d[(n, 0)] - want).norm() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn laguerre_matches_generator_on_interior() {
        let t = trunc(64, 16);
        for alpha in [C64::new(0.0, 0.5), C64::new(0.5, 0.0), C64::new(-0.2, 0.3)] {
            let a = interior_block(&displacement_generator(alpha, t), t).unwrap();
            let b = interior_block(&displacement_laguerre(alpha, t), t).unwrap();
            assert!(close(&a, &b, 1e-9), "alpha = {alpha}");
        }
    }

    #[test]
    fn tensor_examples() {
        let t = trunc(2, 0);
        let zn = spin_tensor_osc(&pauli(SpinIndex::Z), &number(t)).unwrap();
        let want =
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ZERO, ONE, ZERO, -ONE]));
        assert_eq!(zn, want);
        assert_eq!(
            spin_tensor_osc(&identity(2), &identity(3)).unwrap(),
            identity(6)
        );
        assert!(spin_tensor_osc(&identity(3), &identity(3)).is_err());

        let t = trunc(5, 0);
        let a = annihilation(t);
        let lhs = kron(&pauli(SpinIndex::Plus), &a) * kron(&pauli(SpinIndex::Minus), &dagger(&a));
        let rhs = kron(
            &(pauli(SpinIndex::Plus) * pauli(SpinIndex::Minus)),
            &(&a * dagger(&a)),
        );
        assert!(close(&lhs, &rhs, 1e-15));
    }

    #[test]
    fn commutator_and_interior() {
        let a = annihilation(trunc(4, 0));
        assert_eq!(commutator(&a, &a).unwrap(), ComplexMatrix::zeros(4, 4));
        assert!(commutator(&a, &identity(3)).is_err());

        let d = number(trunc(4, 1));
        let inner = interior_block(&d, trunc(4, 1)).unwrap();
        assert_eq!(inner, number(trunc(3, 0)));
        assert!(interior_block(&identity(5), trunc(4, 1)).is_err());

        let composite = kron(&pauli(SpinIndex::Z), &number(trunc(4, 0)));
        let inner = interior_block(&composite, trunc(4, 1)).unwrap();
        assert_eq!(inner, kron(&pauli(SpinIndex::Z), &number(trunc(3, 0))));
    }

    proptest! {
        #[test]
        fn ladder_commutator_interior_is_identity(n_max in 2usize..40, guard_frac in 0.0f64..1.0) {
            let guard = 1 + ((n_max - 2) as f64 * guard_frac) as usize;
            let t = trunc(n_max, guard);
            let a = annihilation(t);
            let c = commutator(&a, &dagger(&a)).unwrap();
            let inner = interior_block(&c, t).unwrap();
            prop_assert!(close(&inner, &identity(t.interior_dim()), ROUNDING));
        }

        #[test]
        fn displacement_is_unitary(re in -0.7f64..0.7, im in -0.7f64..0.7, n_max in 16usize..48) {
            let d = displacement_generator(C64::new(re, im), trunc(n_max, 0));
            prop_assert!(is_unitary(&d, 1e-10));
        }

        #[test]
        fn dagger_is_involution(entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)) {
            let m = ComplexMatrix::from_iterator(3, 3, entries.iter().map(|&(r, i)| C64::new(r, i)));
            prop_assert_eq!(dagger(&dagger(&m)), m);
        }

        #[test]
        fn tensor_mixed_product(
            entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * 4 + 2 * 16),
            n in 1usize..=4,
        ) {
            let c = |k: usize| C64::new(entries[k].0, entries[k].1);
            let s1 = ComplexMatrix::from_fn(2, 2, |i, j| c(2 * i + j));
            let s2 = ComplexMatrix::from_fn(2, 2, |i, j| c(4 + 2 * i + j));
            let m1 = ComplexMatrix::from_fn(n, n, |i, j| c(8 + n * i + j));
            let m2 = ComplexMatrix::from_fn(n, n, |i, j| c(24 + n * i + j));
            let lhs = kron(&s1, &m1) * kron(&s2, &m2);
            let rhs = kron(&(&s1 * &s2), &(&m1 * &m2));
            prop_assert!(close(&lhs, &rhs, 1e-13));
        }
    }
}
