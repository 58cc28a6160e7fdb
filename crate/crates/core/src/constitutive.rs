//! The N-function `phi(t) = int_0^t (delta + s)^(p-2) s ds`, its shifted
//! family, conjugates, and the stress laws built on it: `S`, the shifted
//! stresses `S_a`, the map `F` and the stress tangent. Modulars and
//! Luxemburg norms of fields on a mesh live here too.
//!
//! Matrix magnitudes are Frobenius norms throughout.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::scalar::Real;
use crate::tensor::{self, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConstitutiveParams<T> {
    pub p: T,
    pub delta: T,
}

impl<T: Real> ConstitutiveParams<T> {
    pub fn new(p: T, delta: T) -> Result<Self> {
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("exponent p = {p} must exceed 1")));
        }
        if !(delta >= T::zero()) {
            return Err(Error::InvalidParameter(format!("delta = {delta} must be nonnegative")));
        }
        Ok(Self { p, delta })
    }

    /// Same exponent, regularization `delta + a` (the shifted law).
    pub fn shifted(&self, a: T) -> Self {
        Self {
            p: self.p,
            delta: self.delta + a,
        }
    }

    /// Conjugate exponent `p' = p / (p - 1)`.
    pub fn conjugate_exponent(&self) -> T {
        self.p / (self.p - T::one())
    }

    pub fn phi(&self, t: T) -> Result<T> {
        check_nonneg("phi", t)?;
        Ok(phi_raw(self.p, self.delta, t))
    }

    pub fn phi_prime(&self, t: T) -> Result<T> {
        check_nonneg("phi_prime", t)?;
        Ok(phi_prime_raw(self.p, self.delta, t))
    }

    /// `phi_a(t)`; shifting by `a` only replaces `delta` by `delta + a`.
    pub fn phi_shifted(&self, a: T, t: T) -> Result<T> {
        check_nonneg("phi_shifted (shift)", a)?;
        check_nonneg("phi_shifted", t)?;
        Ok(phi_raw(self.p, self.delta + a, t))
    }

    pub fn phi_shifted_prime(&self, a: T, t: T) -> Result<T> {
        check_nonneg("phi_shifted_prime (shift)", a)?;
        check_nonneg("phi_shifted_prime", t)?;
        Ok(phi_prime_raw(self.p, self.delta + a, t))
    }

    /// `(phi_a)^*(s) = sup_t (s t - phi_a(t))`, via the maximizer
    /// `phi_a'(t*) = s` found by safeguarded Newton iteration.
    pub fn phi_conjugate(&self, a: T, s: T) -> Result<T> {
        check_nonneg("phi_conjugate (shift)", a)?;
        check_nonneg("phi_conjugate", s)?;
        if s == T::zero() {
            return Ok(T::zero());
        }
        let d = self.delta + a;
        let t = invert_phi_prime(self.p, d, s)?;
        Ok((s * t - phi_raw(self.p, d, t)).max(T::zero()))
    }

    /// `S(A) = (delta + |A^sym|)^(p-2) A^sym`.
    pub fn stress(&self, a: &Mat2<T>) -> Mat2<T> {
        stress_with(self.p, self.delta, T::lit(1.0), a)
    }

    /// `S_a(A) = phi_a'(|A^sym|) / |A^sym| A^sym`, zero at `A^sym = 0`.
    pub fn stress_shifted(&self, shift: T, a: &Mat2<T>) -> Mat2<T> {
        stress_with(self.p, self.delta + shift, T::lit(1.0), a)
    }

    /// `F(A) = (delta + |A^sym|)^((p-2)/2) A^sym`.
    pub fn f_map(&self, a: &Mat2<T>) -> Mat2<T> {
        stress_with(self.p, self.delta, T::lit(0.5), a)
    }

    /// Derivative of `S` at `A`.
    pub fn stress_tangent(&self, a: &Mat2<T>) -> StressTangent<T> {
        StressTangent::new(self.p, self.delta, a)
    }

    /// Derivative of `S_shift` at `A` (shift held fixed).
    pub fn stress_shifted_tangent(&self, shift: T, a: &Mat2<T>) -> StressTangent<T> {
        StressTangent::new(self.p, self.delta + shift, a)
    }
}

fn check_nonneg<T: Real>(what: &'static str, v: T) -> Result<()> {
    if v >= T::zero() {
        Ok(())
    } else {
        Err(Error::NegativeArgument {
            what,
            value: v.to_f64_lossy(),
        })
    }
}

fn phi_prime_raw<T: Real>(p: T, d: T, t: T) -> T {
    if t == T::zero() {
        return T::zero();
    }
    (d + t).powf(p - T::lit(2.0)) * t
}

/// Closed form of `int_0^t (d + s)^(p-2) s ds`.
fn phi_raw<T: Real>(p: T, d: T, t: T) -> T {
    if t == T::zero() {
        return T::zero();
    }
    if d == T::zero() {
        return t.powf(p) / p;
    }
    let x = t / d;
    let two = T::lit(2.0);
    if x < T::lit(0.05) {
        // d^p sum_{n>=2} binom(p-2, n-2) x^n / n
        let mut coeff = T::one();
        let mut xn = x * x;
        let mut sum = T::zero();
        for m in 0..16 {
            let n = T::of_usize(m + 2);
            sum += coeff * xn / n;
            coeff = coeff * (p - two - T::of_usize(m)) / T::of_usize(m + 1);
            xn = xn * x;
        }
        d.powf(p) * sum
    } else if x < T::lit(1e6) {
        let l = x.ln_1p();
        d.powf(p) * ((p * l).exp_m1() / p - ((p - T::one()) * l).exp_m1() / (p - T::one()))
    } else {
        let u = d + t;
        (u.powf(p) - d.powf(p)) / p - d * (u.powf(p - T::one()) - d.powf(p - T::one())) / (p - T::one())
    }
}

const ROOT_MAX_ITER: usize = 200;

/// Solves `(d + t)^(p-2) t = s` for `t >= 0`.
fn invert_phi_prime<T: Real>(p: T, d: T, s: T) -> Result<T> {
    let f = |t: T| phi_prime_raw(p, d, t) - s;
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut grow = 0;
    while f(hi) < T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
        grow += 1;
        if grow > 4000 || !hi.is_finite() {
            return Err(Error::RootFinding { iterations: grow });
        }
    }
    let mut t = T::lit(0.5) * (lo + hi);
    let tol = T::lit(1e-12);
    for it in 0..ROOT_MAX_ITER {
        let ft = f(t);
        if ft == T::zero() {
            return Ok(t);
        }
        if ft < T::zero() {
            lo = t;
        } else {
            hi = t;
        }
        // derivative of (d+t)^(p-2) t
        let dpt = (d + t).powf(p - T::lit(3.0)) * (d + (p - T::one()) * t);
        let mut next = t - ft / dpt;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = T::lit(0.5) * (lo + hi);
        }
        let step = (next - t).abs();
        t = next;
        let scale = t.abs().max(T::min_positive_value());
        if step <= T::epsilon() * T::lit(4.0) * scale || (hi - lo) <= T::epsilon() * T::lit(4.0) * scale {
            let rel = (f(t) / s).abs();
            if rel <= tol || (hi - lo) <= T::epsilon() * T::lit(8.0) * scale {
                return Ok(t);
            }
        }
        if it + 1 == ROOT_MAX_ITER {
            break;
        }
    }
    if (f(t) / s).abs() <= tol {
        Ok(t)
    } else {
        Err(Error::RootFinding {
            iterations: ROOT_MAX_ITER,
        })
    }
}

/// `(d + |A^sym|)^((p-2) * power) A^sym`, zero when `A^sym = 0`.
fn stress_with<T: Real>(p: T, d: T, power: T, a: &Mat2<T>) -> Mat2<T> {
    let s = tensor::sym(a);
    let n = tensor::norm(&s);
    if n == T::zero() {
        return tensor::zero();
    }
    tensor::scale((d + n).powf((p - T::lit(2.0)) * power), &s)
}

/// Linear map `B -> c0 B^sym + c1 (A^sym : B^sym) A^sym` representing the
/// derivative of `S` at `A`.
#[derive(Debug, Clone, Copy)]
pub struct StressTangent<T> {
    pub sym_a: Mat2<T>,
    pub c0: T,
    pub c1: T,
}

impl<T: Real> StressTangent<T> {
    fn new(p: T, d: T, a: &Mat2<T>) -> Self {
        let s = tensor::sym(a);
        let n = tensor::norm(&s);
        let two = T::lit(2.0);
        if n == T::zero() {
            let c0 = if p == two { T::one() } else { d.powf(p - two) };
            return Self {
                sym_a: s,
                c0,
                c1: T::zero(),
            };
        }
        let c0 = (d + n).powf(p - two);
        let c1 = (p - two) * (d + n).powf(p - T::lit(3.0)) / n;
        Self { sym_a: s, c0, c1 }
    }

    pub fn apply(&self, b: &Mat2<T>) -> Mat2<T> {
        let bs = tensor::sym(b);
        let proj = tensor::ddot(&self.sym_a, &bs);
        let mut out = tensor::scale(self.c0, &bs);
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += self.c1 * proj * self.sym_a[r][c];
            }
        }
        out
    }

    /// 4x4 matrix in flattened `(r, c) -> 2r + c` ordering.
    pub fn to_matrix(&self) -> [[T; 4]; 4] {
        let mut m = [[T::zero(); 4]; 4];
        for col in 0..4 {
            let out = self.apply(&tensor::unit(col));
            for row in 0..4 {
                m[row][col] = out[row / 2][row % 2];
            }
        }
        m
    }
}

/// Cell modular `int_Omega psi(x, |f(x)|) dx` by quadrature; `f` returns the
/// magnitude of the field at a physical point of an element, `psi` may
/// depend on the point (pointwise shifts).
pub fn cell_modular<T, P, F>(mesh: &Mesh<T>, rule: &TriangleRule<T>, psi: P, f: F) -> T
where
    T: Real,
    P: Fn([T; 2], T) -> T,
    F: Fn(usize, [T; 2]) -> T,
{
    let mut total = T::zero();
    for (e, g) in mesh.geometry.iter().enumerate() {
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let x = g.to_physical(*xi);
            total += *w * g.det * psi(x, f(e, x));
        }
    }
    total
}

/// Face modular `int_{Gamma_h} psi(x, |f(x)|) ds` over all faces; `f`
/// receives the face id and the physical point.
pub fn face_modular<T, P, F>(mesh: &Mesh<T>, rule: &EdgeRule<T>, psi: P, f: F) -> T
where
    T: Real,
    P: Fn([T; 2], T) -> T,
    F: Fn(usize, [T; 2]) -> T,
{
    let mut total = T::zero();
    for (id, face) in mesh.faces.iter().enumerate() {
        let a = mesh.vertices[face.vertices[0]];
        let b = mesh.vertices[face.vertices[1]];
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = [a[0] + *s * (b[0] - a[0]), a[1] + *s * (b[1] - a[1])];
            total += *w * face.length * psi(x, f(id, x));
        }
    }
    total
}

/// Luxemburg norm `inf { lambda : rho(f / lambda) <= 1 }` given
/// `scaled_modular(lambda) = rho(f / lambda)`, by bisection in `log lambda`
/// over `[1e-8, 1e8]`.
pub fn luxemburg_norm<T, M>(scaled_modular: M) -> T
where
    T: Real,
    M: Fn(T) -> T,
{
    let (mut lo, mut hi) = (T::lit(1e-8).ln(), T::lit(1e8).ln());
    if scaled_modular(lo.exp()) <= T::one() {
        return lo.exp();
    }
    if scaled_modular(hi.exp()) > T::one() {
        return hi.exp();
    }
    let tol = T::lit(1e-10);
    for _ in 0..300 {
        let mid = T::lit(0.5) * (lo + hi);
        let r = scaled_modular(mid.exp());
        if (r - T::one()).abs() <= tol {
            return mid.exp();
        }
        if r > T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (T::lit(0.5) * (lo + hi)).exp()
}
