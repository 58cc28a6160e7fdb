//! Broken polynomial spaces on a mesh, the continuous pressure space, and
//! the quadrature tabulations shared by the assembly code.
//!
//! Broken fields use the orthonormal [`ModalBasis`] on every element; the
//! coefficient of basis function `i`, component `c` on element `e` sits at
//! `(e * ncomp + c) * dim P_k + i`. Tensor components are stored row-major
//! (`c = 2 r + s` for entry `(r, s)`).

mod basis;
mod continuous;

pub use basis::{monomial_exponents, poly_dim, LagrangeBasis, ModalBasis};
pub use continuous::{ContinuousField, PressureSpace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::{EdgeRule, TriangleRule};

/// Degree of the default cell and edge rules.
pub const DEFAULT_QUADRATURE_DEGREE: usize = 8;
/// Degree of the graded rule used on elements touching a singular point.
pub const SINGULAR_QUADRATURE_DEGREE: usize = 12;
const GRADED_LAYERS: usize = 40;
const GRADED_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Scalar,
    Vector,
    Tensor,
}

impl FieldKind {
    pub fn ncomp(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => 2,
            FieldKind::Tensor => 4,
        }
    }
}

/// Element-wise polynomial field of degree `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrokenField {
    pub kind: FieldKind,
    pub degree: usize,
    pub num_elements: usize,
    pub coeffs: Vec<f64>,
}

impl BrokenField {
    pub fn zeros(kind: FieldKind, degree: usize, num_elements: usize) -> Self {
        Self {
            kind,
            degree,
            num_elements,
            coeffs: vec![0.0; num_elements * kind.ncomp() * poly_dim(degree)],
        }
    }

    pub fn from_coeffs(kind: FieldKind, degree: usize, num_elements: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = num_elements * kind.ncomp() * poly_dim(degree);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "broken field coefficients",
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            kind,
            degree,
            num_elements,
            coeffs,
        })
    }

    /// Basis functions per component and element.
    pub fn nb(&self) -> usize {
        poly_dim(self.degree)
    }

    pub fn block_len(&self) -> usize {
        self.kind.ncomp() * self.nb()
    }

    #[inline]
    pub fn index(&self, e: usize, comp: usize, i: usize) -> usize {
        (e * self.kind.ncomp() + comp) * self.nb() + i
    }

    pub fn block(&self, e: usize) -> &[f64] {
        let n = self.block_len();
        &self.coeffs[e * n..(e + 1) * n]
    }

    pub fn block_mut(&mut self, e: usize) -> &mut [f64] {
        let n = self.block_len();
        &mut self.coeffs[e * n..(e + 1) * n]
    }

    fn check_element(&self, e: usize) -> Result<()> {
        if e >= self.num_elements {
            return Err(Error::OutOfRange {
                what: "element",
                index: e,
                len: self.num_elements,
            });
        }
        Ok(())
    }
}

/// Per-element values of basis functions at the points of a rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    /// `values[q][i]`
    pub values: Vec<Vec<f64>>,
    /// Reference gradients `grads[q][i]`.
    pub grads: Vec<Vec<[f64; 2]>>,
}

impl Tabulation {
    fn modal(basis: &ModalBasis<f64>, points: &[[f64; 2]]) -> Self {
        Self {
            values: points.iter().map(|&x| basis.values(x)).collect(),
            grads: points.iter().map(|&x| basis.gradients(x)).collect(),
        }
    }

    fn lagrange(basis: &LagrangeBasis<f64>, points: &[[f64; 2]]) -> Self {
        Self {
            values: points.iter().map(|&x| basis.values(x)).collect(),
            grads: points.iter().map(|&x| basis.gradients(x)).collect(),
        }
    }
}

/// A cell rule together with the velocity and pressure tabulations at its points.
#[derive(Debug, Clone)]
pub struct CellQuadrature {
    pub rule: TriangleRule<f64>,
    pub modal: Tabulation,
    pub lagrange: Tabulation,
}

impl CellQuadrature {
    fn new(rule: TriangleRule<f64>, basis: &ModalBasis<f64>, lagrange: &LagrangeBasis<f64>) -> Self {
        Self {
            modal: Tabulation::modal(basis, &rule.points),
            lagrange: Tabulation::lagrange(lagrange, &rule.points),
            rule,
        }
    }
}

/// Trace data of one element on one face.
#[derive(Debug, Clone)]
pub struct SideTab {
    pub element: usize,
    pub outward_normal: [f64; 2],
    /// Reference points of the face quadrature nodes in this element.
    pub ref_points: Vec<[f64; 2]>,
    /// Modal basis values `values[q][i]`.
    pub values: Vec<Vec<f64>>,
}

/// Quadrature on one face: physical points and weights (including the
/// face length), plus the traces of every adjacent element (owner first).
#[derive(Debug, Clone)]
pub struct FaceTab {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub length: f64,
    pub sides: Vec<SideTab>,
}

impl FaceTab {
    pub fn is_boundary(&self) -> bool {
        self.sides.len() == 1
    }
}

/// Discrete spaces of degree `k` on a mesh: broken `V_h^k`, `X_h^k`, `Q_h^k`
/// and the continuous Lagrange pressure space.
#[derive(Debug, Clone)]
pub struct FemSpace {
    pub mesh: Mesh<f64>,
    pub degree: usize,
    pub basis: ModalBasis<f64>,
    pub pressure: PressureSpace,
    pub cell: CellQuadrature,
    /// Graded rules collapsed at reference vertex 0, 1, 2.
    graded: Vec<CellQuadrature>,
    /// Local vertex at the singular point, per element.
    singular_vertex: Vec<Option<usize>>,
    pub edge_rule: EdgeRule<f64>,
    pub faces: Vec<FaceTab>,
}

impl FemSpace {
    pub fn new(mesh: Mesh<f64>, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter("polynomial degree must be at least 1".into()));
        }
        let basis = ModalBasis::new(degree);
        let pressure = PressureSpace::new(&mesh, degree);
        let qdeg = DEFAULT_QUADRATURE_DEGREE.max(3 * degree + 2);
        let cell = CellQuadrature::new(TriangleRule::with_degree(qdeg), &basis, pressure.basis());
        let edge_rule = EdgeRule::with_degree(qdeg);
        let mut faces = Vec::with_capacity(mesh.num_faces());
        for f in 0..mesh.num_faces() {
            let g = mesh.face_geometry(f)?;
            let points = edge_rule
                .points
                .iter()
                .map(|&s| {
                    let (a, b) = (g.endpoints[0], g.endpoints[1]);
                    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
                })
                .collect();
            let weights = edge_rule.weights.iter().map(|w| w * g.length).collect();
            let sides = g
                .sides
                .iter()
                .map(|s| {
                    let ref_points: Vec<[f64; 2]> = edge_rule.points.iter().map(|&t| s.trace.at(t)).collect();
                    SideTab {
                        element: s.element,
                        outward_normal: s.outward_normal,
                        values: ref_points.iter().map(|&x| basis.values(x)).collect(),
                        ref_points,
                    }
                })
                .collect();
            faces.push(FaceTab {
                points,
                weights,
                length: g.length,
                sides,
            });
        }
        let singular_vertex = vec![None; mesh.num_elements()];
        Ok(Self {
            mesh,
            degree,
            basis,
            pressure,
            cell,
            graded: Vec::new(),
            singular_vertex,
            edge_rule,
            faces,
        })
    }

    /// Uses graded quadrature on the elements having `point` as a vertex
    /// whenever [`FemSpace::accurate_quadrature`] is requested.
    pub fn with_singular_point(mut self, point: [f64; 2]) -> Self {
        if self.graded.is_empty() {
            self.graded = (0..3)
                .map(|v| {
                    CellQuadrature::new(
                        TriangleRule::graded_at_vertex(v, SINGULAR_QUADRATURE_DEGREE, GRADED_LAYERS, GRADED_RATIO),
                        &self.basis,
                        self.pressure.basis(),
                    )
                })
                .collect();
        }
        for (e, l) in self.mesh.elements_touching(point) {
            self.singular_vertex[e] = Some(l);
        }
        self
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    /// `dim P_k`.
    pub fn nb(&self) -> usize {
        self.basis.dim()
    }

    pub fn num_velocity_dofs(&self) -> usize {
        2 * self.nb() * self.num_elements()
    }

    /// Global h used in all face scalings.
    pub fn h(&self) -> f64 {
        self.mesh.h_max
    }

    /// Rule for integrands that may be singular at the registered point.
    pub fn accurate_quadrature(&self, e: usize) -> &CellQuadrature {
        match self.singular_vertex[e] {
            Some(v) => &self.graded[v],
            None => &self.cell,
        }
    }

    /// Physical location of point `q` of `quad` on element `e`.
    pub fn quadrature_point(&self, e: usize, quad: &CellQuadrature, q: usize) -> [f64; 2] {
        let anchor = self.mesh.vertices[self.mesh.triangles[e][quad.rule.anchor]];
        self.mesh.geometry[e].offset_from(anchor, quad.rule.offsets[q])
    }

    pub fn is_singular_element(&self, e: usize) -> bool {
        self.singular_vertex[e].is_some()
    }

    pub fn zeros(&self, kind: FieldKind) -> BrokenField {
        BrokenField::zeros(kind, self.degree, self.num_elements())
    }

    /// Values of all components of `field` at reference point `xi` of element `e`.
    pub fn evaluate(&self, field: &BrokenField, e: usize, xi: [f64; 2]) -> Result<Vec<f64>> {
        field.check_element(e)?;
        let phi = self.values_for(field.degree, xi);
        Ok(component_values(field, e, &phi))
    }

    /// Physical gradients of all components at reference point `xi` of element `e`.
    pub fn evaluate_gradient(&self, field: &BrokenField, e: usize, xi: [f64; 2]) -> Result<Vec<[f64; 2]>> {
        field.check_element(e)?;
        let g = if field.degree == self.degree {
            self.basis.gradients(xi)
        } else {
            ModalBasis::<f64>::new(field.degree).gradients(xi)
        };
        let geo = &self.mesh.geometry[e];
        let nb = field.nb();
        let b = field.block(e);
        Ok((0..field.kind.ncomp())
            .map(|c| {
                let mut s = [0.0; 2];
                for (i, gi) in g.iter().enumerate() {
                    let pg = geo.physical_gradient(*gi);
                    s[0] += b[c * nb + i] * pg[0];
                    s[1] += b[c * nb + i] * pg[1];
                }
                s
            })
            .collect())
    }

    /// Evaluates at a physical point located in element `e`.
    pub fn evaluate_at(&self, field: &BrokenField, e: usize, x: [f64; 2]) -> Result<Vec<f64>> {
        field.check_element(e)?;
        let xi = self.mesh.geometry[e].to_reference(x);
        self.evaluate(field, e, xi)
    }

    fn values_for(&self, degree: usize, xi: [f64; 2]) -> Vec<f64> {
        if degree == self.degree {
            self.basis.values(xi)
        } else {
            ModalBasis::<f64>::new(degree).values(xi)
        }
    }

    /// Local `L^2` projection of `f` onto broken polynomials of `degree`.
    /// `f(e, x)` returns all components at physical point `x` of element `e`.
    pub fn l2_project<F>(&self, kind: FieldKind, degree: usize, mut f: F) -> BrokenField
    where
        F: FnMut(usize, [f64; 2]) -> Vec<f64>,
    {
        let mut out = BrokenField::zeros(kind, degree, self.num_elements());
        let other = (degree != self.degree).then(|| ModalBasis::<f64>::new(degree));
        let nb = out.nb();
        let nc = kind.ncomp();
        for e in 0..self.num_elements() {
            let quad = self.accurate_quadrature(e);
            let block = out.block_mut(e);
            for (q, (&xi, &w)) in quad.rule.points.iter().zip(&quad.rule.weights).enumerate() {
                let vals = f(e, self.quadrature_point(e, quad, q));
                let phi_owned;
                let phi: &[f64] = match &other {
                    Some(b) => {
                        phi_owned = b.values(xi);
                        &phi_owned
                    }
                    None => &quad.modal.values[q],
                };
                for c in 0..nc {
                    for i in 0..nb {
                        // mass matrix is det * I, and the det cancels
                        block[c * nb + i] += w * vals[c] * phi[i];
                    }
                }
            }
        }
        out
    }

    /// `L^2(Omega)` inner product of two fields of the same kind and degree.
    pub fn inner(&self, a: &BrokenField, b: &BrokenField) -> Result<f64> {
        if a.kind != b.kind || a.degree != b.degree || a.coeffs.len() != b.coeffs.len() {
            return Err(Error::DimensionMismatch {
                what: "inner product operands",
                expected: a.coeffs.len(),
                got: b.coeffs.len(),
            });
        }
        let n = a.block_len();
        Ok((0..a.num_elements)
            .map(|e| {
                let det = self.mesh.geometry[e].det;
                det * a.coeffs[e * n..(e + 1) * n]
                    .iter()
                    .zip(&b.coeffs[e * n..(e + 1) * n])
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
            })
            .sum())
    }

    /// Element mean of component `comp`.
    pub fn element_mean(&self, field: &BrokenField, e: usize, comp: usize) -> f64 {
        field.coeffs[field.index(e, comp, 0)] * std::f64::consts::SQRT_2
    }

    /// Elementwise mean projection `Pi_h^0`.
    pub fn mean_projection(&self, field: &BrokenField) -> BrokenField {
        let mut out = BrokenField::zeros(field.kind, 0, field.num_elements);
        for e in 0..field.num_elements {
            for c in 0..field.kind.ncomp() {
                // the degree-0 orthonormal function is the same sqrt(2)
                out.coeffs[e * field.kind.ncomp() + c] = field.coeffs[field.index(e, c, 0)];
            }
        }
        out
    }
}

/// Component values of an element block for given basis values.
pub fn component_values(field: &BrokenField, e: usize, phi: &[f64]) -> Vec<f64> {
    let nb = field.nb();
    let b = field.block(e);
    (0..field.kind.ncomp())
        .map(|c| b[c * nb..(c + 1) * nb].iter().zip(phi).map(|(x, y)| x * y).sum())
        .collect()
}
