//! Fixed-size complex linear algebra for one qubit.
//!
//! Vectorization follows the column-stacking convention: `vec(m)` lists the
//! entries column by column, `(m00, m10, m01, m11)`, so that
//! `vec(a·x·b) = (bᵀ ⊗ a)·vec(x)`. Every superoperator in this crate is
//! built against that convention.

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector, Vector2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = Matrix4<C64>;
pub type CMat8 = SMatrix<C64, 8, 8>;
pub type CVec2 = Vector2<C64>;
pub type CVec4 = SVector<C64, 4>;
pub type CVec8 = SVector<C64, 8>;

/// Real number as a complex scalar.
#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Imaginary number as a complex scalar.
#[inline]
pub fn ci(im: f64) -> C64 {
    C64::new(0.0, im)
}

/// σ₁ (Pauli X).
pub fn sigma_x() -> CMat2 {
    CMat2::new(cr(0.0), cr(1.0), cr(1.0), cr(0.0))
}

/// σ₂ (Pauli Y).
pub fn sigma_y() -> CMat2 {
    CMat2::new(cr(0.0), ci(-1.0), ci(1.0), cr(0.0))
}

/// σ₃ (Pauli Z).
pub fn sigma_z() -> CMat2 {
    CMat2::new(cr(1.0), cr(0.0), cr(0.0), cr(-1.0))
}

/// σ₊ = (σ₁ + iσ₂)/2, the raising operator.
pub fn sigma_plus() -> CMat2 {
    CMat2::new(cr(0.0), cr(1.0), cr(0.0), cr(0.0))
}

/// σ₋ = (σ₁ − iσ₂)/2, the lowering operator.
pub fn sigma_minus() -> CMat2 {
    CMat2::new(cr(0.0), cr(0.0), cr(1.0), cr(0.0))
}

/// σ_k for k ∈ {1, 2, 3}.
pub fn pauli(k: usize) -> CMat2 {
    match k {
        1 => sigma_x(),
        2 => sigma_y(),
        3 => sigma_z(),
        _ => panic!("pauli index {k} out of range 1..=3"),
    }
}

/// n·σ for the unit axis n = (sinϑ cosφ, sinϑ sinφ, cosϑ).
pub fn sigma_axis(vartheta: f64, phi: f64) -> CMat2 {
    let n = [
        vartheta.sin() * phi.cos(),
        vartheta.sin() * phi.sin(),
        vartheta.cos(),
    ];
    sigma_x() * cr(n[0]) + sigma_y() * cr(n[1]) + sigma_z() * cr(n[2])
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermiticity_error(m: &CMat2) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Column-stacked vectorization (m00, m10, m01, m11).
pub fn vectorize(m: &CMat2) -> CVec4 {
    CVec4::from([m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVec4) -> CMat2 {
    CMat2::new(v[0], v[2], v[1], v[3])
}

/// Superoperator of x ↦ a·x·b, i.e. bᵀ ⊗ a in the column-stacking convention.
pub fn sandwich_superop(a: &CMat2, b: &CMat2) -> CMat4 {
    b.transpose().kronecker(a)
}

/// Superoperator of x ↦ −i[h, x].
pub fn commutator_superop(h: &CMat2) -> CMat4 {
    let id = CMat2::identity();
    (sandwich_superop(h, &id) - sandwich_superop(&id, h)) * ci(-1.0)
}

/// Eigendecomposition of a 2×2 Hermitian matrix.
///
/// Eigenvalues are sorted descending; `vectors` holds the matching
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigH2 {
    pub eigenvalues: [f64; 2],
    pub vectors: CMat2,
}

/// Closed-form Hermitian eigendecomposition.
///
/// Only the Hermitian part of `m` is consulted (real diagonal, the (0,1)
/// entry); callers are expected to pass matrices that are Hermitian up to
/// numerical noise.
pub fn eigh2(m: &CMat2) -> EigH2 {
    let a = m[(0, 0)].re;
    let b = m[(1, 1)].re;
    let c = (m[(0, 1)] + m[(1, 0)].conj()) * cr(0.5);
    let d = 0.5 * (a - b);
    let mean = 0.5 * (a + b);
    let r = (d * d + c.norm_sqr()).sqrt();

    let v1: CVec2 = if r == 0.0 || c.norm_sqr() == 0.0 {
        if a >= b {
            CVec2::new(cr(1.0), cr(0.0))
        } else {
            CVec2::new(cr(0.0), cr(1.0))
        }
    } else if d >= 0.0 {
        // (λ₁ − b, c̄): no cancellation when the diagonal dominates from above
        CVec2::new(cr(r + d), c.conj()).normalize()
    } else {
        // (c, λ₁ − a)
        CVec2::new(c, cr(r - d)).normalize()
    };
    // orthonormal complement of v1 spans the λ₂ eigenspace
    let v2 = CVec2::new(-v1[1].conj(), v1[0].conj());

    EigH2 {
        eigenvalues: [mean + r, mean - r],
        vectors: CMat2::from_columns(&[v1, v2]),
    }
}

/// Smallest eigenvalue of a Hermitian 2×2 matrix.
pub fn min_eigenvalue(m: &CMat2) -> f64 {
    eigh2(m).eigenvalues[1]
}
