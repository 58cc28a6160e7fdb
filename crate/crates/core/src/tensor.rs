//! 2x2 matrix helpers; `A[i][j]` is row `i`, column `j`.

use crate::scalar::Real;

pub type Mat2<T> = [[T; 2]; 2];

pub fn zero<T: Real>() -> Mat2<T> {
    [[T::zero(); 2]; 2]
}

pub fn identity<T: Real>() -> Mat2<T> {
    [[T::one(), T::zero()], [T::zero(), T::one()]]
}

pub fn sym<T: Real>(a: &Mat2<T>) -> Mat2<T> {
    let off = T::lit(0.5) * (a[0][1] + a[1][0]);
    [[a[0][0], off], [off, a[1][1]]]
}

pub fn transpose<T: Real>(a: &Mat2<T>) -> Mat2<T> {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Frobenius product `A : B`.
pub fn ddot<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> T {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

pub fn norm<T: Real>(a: &Mat2<T>) -> T {
    ddot(a, a).sqrt()
}

pub fn trace<T: Real>(a: &Mat2<T>) -> T {
    a[0][0] + a[1][1]
}

pub fn scale<T: Real>(s: T, a: &Mat2<T>) -> Mat2<T> {
    [[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]]
}

pub fn add<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn sub<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

/// `u (x) v`, i.e. `(u v^T)`.
pub fn outer<T: Real>(u: [T; 2], v: [T; 2]) -> Mat2<T> {
    [[u[0] * v[0], u[0] * v[1]], [u[1] * v[0], u[1] * v[1]]]
}

pub fn mat_vec<T: Real>(a: &Mat2<T>, v: [T; 2]) -> [T; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Flattened index of entry `(r, c)`.
#[inline]
pub const fn flat(r: usize, c: usize) -> usize {
    2 * r + c
}

/// Matrix with a single unit entry at flattened position `rc`.
pub fn unit<T: Real>(rc: usize) -> Mat2<T> {
    let mut m = zero();
    m[rc / 2][rc % 2] = T::one();
    m
}
