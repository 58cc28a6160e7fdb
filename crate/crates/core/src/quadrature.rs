//! Quadrature on the reference edge `[0, 1]` and the reference triangle
//! with vertices `(0,0)`, `(1,0)`, `(0,1)`.
//!
//! Triangle rules are conical products of Gauss-Legendre rules (collapsed
//! coordinates), so every weight is positive and rules of any exactness
//! degree are available. A graded variant collapses onto one vertex and
//! refines geometrically towards it; it is used on elements touching a
//! point singularity of the data.

use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one point");
    // Nodes are computed in f64 and converted, so f32 rules are as accurate
    // as the type allows.
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (
        x.into_iter().map(T::lit).collect(),
        w.into_iter().map(T::lit).collect(),
    )
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Rule on the reference edge `[0, 1]`; weights sum to 1.
#[derive(Debug, Clone)]
pub struct EdgeRule<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
    pub degree: usize,
}

impl<T: Real> EdgeRule<T> {
    /// Gauss rule integrating polynomials of degree `degree` exactly.
    pub fn with_degree(degree: usize) -> Self {
        let n = (degree + 2) / 2;
        let (x, w) = gauss_legendre::<T>(n.max(1));
        let half = T::lit(0.5);
        Self {
            points: x.iter().map(|&xi| half * (xi + T::one())).collect(),
            weights: w.iter().map(|&wi| half * wi).collect(),
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule on the reference triangle; weights sum to its area `1/2`.
#[derive(Debug, Clone)]
pub struct TriangleRule<T> {
    pub points: Vec<[T; 2]>,
    pub weights: Vec<T>,
    pub degree: usize,
    /// Reference vertex the rule is collapsed onto.
    pub anchor: usize,
    /// `points[q] - anchor` without cancellation, for mapping points that
    /// crowd the anchor vertex.
    pub offsets: Vec<[T; 2]>,
}

const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

impl<T: Real> TriangleRule<T> {
    /// Collapsed-coordinate rule exact for total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        Self::collapsed(0, degree, &[(T::zero(), T::one())], (degree + 3) / 2, (degree + 2) / 2)
    }

    /// Rule collapsed onto reference vertex `vertex`, with the radial
    /// direction split into `layers` geometrically shrinking intervals
    /// (`ratio` < 1) plus a final interval touching the vertex. Exact for
    /// total degree `degree` like [`TriangleRule::with_degree`], and accurate
    /// for integrands with an integrable singularity at that vertex.
    pub fn graded_at_vertex(vertex: usize, degree: usize, layers: usize, ratio: T) -> Self {
        assert!(vertex < 3);
        assert!(ratio > T::zero() && ratio < T::one());
        let mut intervals = Vec::with_capacity(layers + 1);
        let mut hi = T::one();
        for _ in 0..layers {
            let lo = hi * ratio;
            intervals.push((lo, hi));
            hi = lo;
        }
        intervals.push((T::zero(), hi));
        // extra angular points: the distance to the vertex is only analytic
        // in a narrow strip around the angular interval
        Self::collapsed(vertex, degree, &intervals, ((degree + 3) / 2).max(10), (degree + 2) / 2 + 14)
    }

    fn collapsed(vertex: usize, degree: usize, radial: &[(T, T)], nu: usize, nw: usize) -> Self {
        // x = V_c + u [(1-w)(V_a - V_c) + w (V_b - V_c)], dx = u du dw.
        let (xu, wu) = gauss_legendre::<T>(nu);
        let (xw, ww) = gauss_legendre::<T>(nw);
        let half = T::lit(0.5);
        let vc = REF_VERTICES[vertex];
        let va = REF_VERTICES[(vertex + 1) % 3];
        let vb = REF_VERTICES[(vertex + 2) % 3];
        let ea = [T::lit(va[0] - vc[0]), T::lit(va[1] - vc[1])];
        let eb = [T::lit(vb[0] - vc[0]), T::lit(vb[1] - vc[1])];
        let det = (ea[0] * eb[1] - ea[1] * eb[0]).abs();
        let c = [T::lit(vc[0]), T::lit(vc[1])];
        let mut points = Vec::with_capacity(radial.len() * nu * nw);
        let mut weights = Vec::with_capacity(points.capacity());
        let mut offsets = Vec::with_capacity(points.capacity());
        for &(lo, hi) in radial {
            let len = hi - lo;
            for (i, &xi) in xu.iter().enumerate() {
                let u = lo + len * half * (xi + T::one());
                let wu_i = len * half * wu[i];
                for (j, &xj) in xw.iter().enumerate() {
                    let w = half * (xj + T::one());
                    let wj = half * ww[j];
                    let dir = [
                        (T::one() - w) * ea[0] + w * eb[0],
                        (T::one() - w) * ea[1] + w * eb[1],
                    ];
                    points.push([c[0] + u * dir[0], c[1] + u * dir[1]]);
                    offsets.push([u * dir[0], u * dir[1]]);
                    weights.push(u * det * wu_i * wj);
                }
            }
        }
        Self {
            points,
            weights,
            degree,
            anchor: vertex,
            offsets,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Exact integral of `x^a y^b` over the reference triangle: `a! b! / (a+b+2)!`.
pub fn reference_monomial_integral(a: usize, b: usize) -> f64 {
    let mut num = 1.0;
    for i in 1..=a {
        num *= i as f64;
    }
    for i in 1..=b {
        num *= i as f64;
    }
    let mut den = 1.0;
    for i in 1..=(a + b + 2) {
        den *= i as f64;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_to_degree() {
        for n in 1..12 {
            let (x, w) = gauss_legendre::<f64>(n);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                assert!((got - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn edge_rule_exactness() {
        for d in [0, 1, 4, 8, 12] {
            let r = EdgeRule::<f64>::with_degree(d);
            for m in 0..=d {
                let got: f64 = r.points.iter().zip(&r.weights).map(|(s, w)| w * s.powi(m as i32)).sum();
                assert!((got - 1.0 / (m as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    fn check_triangle_rule(r: &TriangleRule<f64>, tol: f64) {
        assert!(r.weights.iter().all(|&w| w > 0.0));
        for a in 0..=r.degree {
            for b in 0..=(r.degree - a) {
                let got: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                let exact = reference_monomial_integral(a, b);
                assert!((got - exact).abs() < tol, "a={a} b={b} got={got} exact={exact}");
            }
        }
    }

    #[test]
    fn triangle_rules_are_exact() {
        for d in [1, 2, 4, 8, 12] {
            check_triangle_rule(&TriangleRule::with_degree(d), 1e-13);
        }
    }

    #[test]
    fn graded_rules_are_exact() {
        for v in 0..3 {
            check_triangle_rule(&TriangleRule::graded_at_vertex(v, 8, 6, 0.2), 1e-13);
        }
    }

    #[test]
    fn graded_rule_handles_vertex_singularity() {
        // int over ref triangle of r^{-1/2}, r = distance to (0,0):
        // int_0^{pi/2} int_0^{R(t)} r^{1/2} dr dt with R(t) = 1/(cos t + sin t).
        let r = TriangleRule::<f64>::graded_at_vertex(0, 8, 40, 0.5);
        let got: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(p, w)| w * (p[0] * p[0] + p[1] * p[1]).powf(-0.25))
            .sum();
        let line = EdgeRule::<f64>::with_degree(60);
        let half_pi = std::f64::consts::FRAC_PI_2;
        let exact: f64 = line
            .points
            .iter()
            .zip(&line.weights)
            .map(|(s, w)| {
                let t = s * half_pi;
                let rr = 1.0 / (t.cos() + t.sin());
                w * half_pi * rr.powf(1.5) / 1.5
            })
            .sum();
        assert!((got - exact).abs() < 1e-11, "{got} vs {exact}");
    }

    #[test]
    fn f32_rules_work() {
        let r = TriangleRule::<f32>::with_degree(4);
        let s: f32 = r.weights.iter().sum();
        assert!((s - 0.5).abs() < 1e-6);
    }
}
