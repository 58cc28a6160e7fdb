//! Polynomial bases on the reference triangle.

use crate::quadrature::TriangleRule;
use crate::scalar::{dense_solve, Real};

/// Monomials are taken about the reference centroid for conditioning.
const CENTER: f64 = 1.0 / 3.0;

/// Dimension of `P_k` in two variables.
pub fn poly_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Exponents `(a, b)` of the monomials `x^a y^b` spanning `P_k`, by total degree.
pub fn monomial_exponents(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(poly_dim(k));
    for d in 0..=k {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

fn powers<T: Real>(x: T, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut v = T::one();
    for _ in 0..=n {
        out.push(v);
        v *= x;
    }
    out
}

/// Polynomials stored as coefficient rows over the centered monomials
/// `(x - 1/3)^a (y - 1/3)^b` of [`monomial_exponents`].
#[derive(Debug, Clone)]
struct PolySet<T> {
    degree: usize,
    exps: Vec<(usize, usize)>,
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> PolySet<T> {
    fn values_into(&self, xi: [T; 2], out: &mut [T]) {
        let c = T::lit(CENTER);
        let px = powers(xi[0] - c, self.degree);
        let py = powers(xi[1] - c, self.degree);
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = self
                .exps
                .iter()
                .zip(c)
                .map(|(&(a, b), &cm)| cm * px[a] * py[b])
                .sum();
        }
    }

    fn gradients_into(&self, xi: [T; 2], out: &mut [[T; 2]]) {
        let c = T::lit(CENTER);
        let px = powers(xi[0] - c, self.degree);
        let py = powers(xi[1] - c, self.degree);
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            let mut g = [T::zero(); 2];
            for (&(a, b), &cm) in self.exps.iter().zip(c) {
                if a > 0 {
                    g[0] += cm * T::of_usize(a) * px[a - 1] * py[b];
                }
                if b > 0 {
                    g[1] += cm * T::of_usize(b) * px[a] * py[b - 1];
                }
            }
            *o = g;
        }
    }
}

/// Modal basis of `P_k` orthonormal in `L^2` of the reference triangle.
///
/// On a physical element `K` the mass matrix is therefore `2|K| I`, and
/// the first function is the constant `sqrt(2)`.
#[derive(Debug, Clone)]
pub struct ModalBasis<T> {
    set: PolySet<T>,
}

impl<T: Real> ModalBasis<T> {
    pub fn new(degree: usize) -> Self {
        let exps = monomial_exponents(degree);
        let n = exps.len();
        let rule = TriangleRule::<f64>::with_degree(2 * degree);
        let mono: Vec<Vec<f64>> = rule
            .points
            .iter()
            .map(|x| {
                exps.iter()
                    .map(|&(a, b)| (x[0] - CENTER).powi(a as i32) * (x[1] - CENTER).powi(b as i32))
                    .collect()
            })
            .collect();
        let gram = |p: &[f64], q: &[f64]| -> f64 {
            mono.iter()
                .zip(&rule.weights)
                .map(|(m, w)| {
                    let pv: f64 = p.iter().zip(m).map(|(a, b)| a * b).sum();
                    let qv: f64 = q.iter().zip(m).map(|(a, b)| a * b).sum();
                    w * pv * qv
                })
                .sum()
        };
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for r in &rows {
                    let c = gram(&v, r);
                    for (vm, rm) in v.iter_mut().zip(r) {
                        *vm -= c * rm;
                    }
                }
            }
            let nrm = gram(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nrm);
            rows.push(v);
        }
        let coeffs = rows
            .into_iter()
            .map(|r| r.into_iter().map(T::lit).collect())
            .collect();
        Self {
            set: PolySet {
                degree,
                exps,
                coeffs,
            },
        }
    }

    pub fn degree(&self) -> usize {
        self.set.degree
    }

    pub fn dim(&self) -> usize {
        self.set.coeffs.len()
    }

    pub fn values(&self, xi: [T; 2]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.set.values_into(xi, &mut out);
        out
    }

    /// Reference-coordinate gradients.
    pub fn gradients(&self, xi: [T; 2]) -> Vec<[T; 2]> {
        let mut out = vec![[T::zero(); 2]; self.dim()];
        self.set.gradients_into(xi, &mut out);
        out
    }
}

/// Nodal Lagrange basis of `P_k` on the reference triangle with equispaced
/// nodes: the three vertices, then `k - 1` nodes per local edge `l` running
/// from vertex `l` to vertex `(l + 1) % 3`, then interior nodes.
#[derive(Debug, Clone)]
pub struct LagrangeBasis<T> {
    set: PolySet<T>,
    nodes: Vec<[T; 2]>,
}

impl<T: Real> LagrangeBasis<T> {
    pub fn new(degree: usize) -> Self {
        let k = degree;
        let nodes_f64 = lagrange_nodes(k);
        let exps = monomial_exponents(k);
        let n = exps.len();
        // columns of V^{-1} are the coefficient vectors
        let mut coeffs = vec![vec![0.0; n]; n];
        for (i, row) in coeffs.iter_mut().enumerate() {
            let mut v = vec![0.0; n * n];
            for (r, x) in nodes_f64.iter().enumerate() {
                for (m, &(a, b)) in exps.iter().enumerate() {
                    v[r * n + m] = (x[0] - CENTER).powi(a as i32) * (x[1] - CENTER).powi(b as i32);
                }
            }
            let mut rhs = vec![0.0; n];
            rhs[i] = 1.0;
            let ok = dense_solve(n, &mut v, &mut rhs);
            assert!(ok, "Lagrange nodes are unisolvent");
            *row = rhs;
        }
        Self {
            set: PolySet {
                degree,
                exps,
                coeffs: coeffs
                    .into_iter()
                    .map(|r| r.into_iter().map(T::lit).collect())
                    .collect(),
            },
            nodes: nodes_f64.iter().map(|x| [T::lit(x[0]), T::lit(x[1])]).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.set.degree
    }

    pub fn dim(&self) -> usize {
        self.set.coeffs.len()
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn values(&self, xi: [T; 2]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.set.values_into(xi, &mut out);
        out
    }

    pub fn gradients(&self, xi: [T; 2]) -> Vec<[T; 2]> {
        let mut out = vec![[T::zero(); 2]; self.dim()];
        self.set.gradients_into(xi, &mut out);
        out
    }
}

fn lagrange_nodes(k: usize) -> Vec<[f64; 2]> {
    let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    if k == 0 {
        return vec![[1.0 / 3.0, 1.0 / 3.0]];
    }
    let mut nodes = v.to_vec();
    let kf = k as f64;
    for l in 0..3 {
        let (a, b) = (v[l], v[(l + 1) % 3]);
        for j in 1..k {
            let t = j as f64 / kf;
            nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    for j in 1..k {
        for i in 1..k - j {
            nodes.push([i as f64 / kf, j as f64 / kf]);
        }
    }
    nodes
}
