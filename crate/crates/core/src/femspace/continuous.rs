//! Continuous Lagrange space used for the pressure.

use super::basis::LagrangeBasis;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::TriangleRule;

/// Globally continuous piecewise `P_k` field in the nodal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousField {
    pub degree: usize,
    pub coeffs: Vec<f64>,
    /// Set once the field has been normalized to zero mean.
    pub zero_mean: bool,
}

/// Degrees of freedom of the continuous `P_k` space: vertices first, then
/// `k - 1` per face ordered from the lower to the higher global vertex id,
/// then element interiors.
#[derive(Debug, Clone)]
pub struct PressureSpace {
    degree: usize,
    basis: LagrangeBasis<f64>,
    dofs: Vec<Vec<usize>>,
    num_dofs: usize,
    dof_points: Vec<[f64; 2]>,
    dof_integrals: Vec<f64>,
    geometry: Vec<crate::mesh::ElementGeometry<f64>>,
}

impl PressureSpace {
    pub fn new(mesh: &Mesh<f64>, degree: usize) -> Self {
        assert!(degree >= 1, "continuous space needs degree >= 1");
        let basis = LagrangeBasis::<f64>::new(degree);
        let k = degree;
        let nv = mesh.num_vertices();
        let nf = mesh.num_faces();
        let per_edge = k - 1;
        let per_cell = if k >= 3 { (k - 1) * (k - 2) / 2 } else { 0 };
        let num_dofs = nv + nf * per_edge + mesh.num_elements() * per_cell;
        let mut dofs = Vec::with_capacity(mesh.num_elements());
        let mut dof_points = vec![[0.0; 2]; num_dofs];
        for (e, t) in mesh.triangles.iter().enumerate() {
            let mut local = Vec::with_capacity(basis.dim());
            local.extend_from_slice(t);
            for l in 0..3 {
                let f = mesh.element_faces[e][l];
                let forward = t[l] < t[(l + 1) % 3];
                for j in 0..per_edge {
                    let jj = if forward { j } else { per_edge - 1 - j };
                    local.push(nv + f * per_edge + jj);
                }
            }
            for m in 0..per_cell {
                local.push(nv + nf * per_edge + e * per_cell + m);
            }
            let geo = mesh.geometry[e];
            for (n, &g) in local.iter().enumerate() {
                dof_points[g] = geo.to_physical(basis.nodes()[n]);
            }
            dofs.push(local);
        }
        let rule = TriangleRule::<f64>::with_degree(k);
        let mut dof_integrals = vec![0.0; num_dofs];
        let tab: Vec<Vec<f64>> = rule.points.iter().map(|&x| basis.values(x)).collect();
        for (e, local) in dofs.iter().enumerate() {
            let det = mesh.geometry[e].det;
            for (q, w) in rule.weights.iter().enumerate() {
                for (n, &g) in local.iter().enumerate() {
                    dof_integrals[g] += det * w * tab[q][n];
                }
            }
        }
        Self {
            degree,
            basis,
            dofs,
            num_dofs,
            dof_points,
            dof_integrals,
            geometry: mesh.geometry.clone(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &LagrangeBasis<f64> {
        &self.basis
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.dofs[e]
    }

    /// Physical location of each nodal degree of freedom.
    pub fn dof_points(&self) -> &[[f64; 2]] {
        &self.dof_points
    }

    /// `int_Omega psi_j dx` for every basis function.
    pub fn dof_integrals(&self) -> &[f64] {
        &self.dof_integrals
    }

    pub fn zeros(&self) -> ContinuousField {
        ContinuousField {
            degree: self.degree,
            coeffs: vec![0.0; self.num_dofs],
            zero_mean: false,
        }
    }

    pub fn from_coeffs(&self, coeffs: Vec<f64>) -> Result<ContinuousField> {
        if coeffs.len() != self.num_dofs {
            return Err(Error::DimensionMismatch {
                what: "pressure coefficients",
                expected: self.num_dofs,
                got: coeffs.len(),
            });
        }
        Ok(ContinuousField {
            degree: self.degree,
            coeffs,
            zero_mean: false,
        })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate<F: FnMut([f64; 2]) -> f64>(&self, mut f: F) -> ContinuousField {
        ContinuousField {
            degree: self.degree,
            coeffs: self.dof_points.iter().map(|&x| f(x)).collect(),
            zero_mean: false,
        }
    }

    pub fn evaluate(&self, field: &ContinuousField, e: usize, xi: [f64; 2]) -> Result<f64> {
        let local = self.dofs.get(e).ok_or(Error::OutOfRange {
            what: "element",
            index: e,
            len: self.dofs.len(),
        })?;
        let v = self.basis.values(xi);
        Ok(local.iter().zip(&v).map(|(&g, vi)| field.coeffs[g] * vi).sum())
    }

    pub fn evaluate_gradient(&self, field: &ContinuousField, e: usize, xi: [f64; 2]) -> Result<[f64; 2]> {
        let local = self.dofs.get(e).ok_or(Error::OutOfRange {
            what: "element",
            index: e,
            len: self.dofs.len(),
        })?;
        let geo = &self.geometry[e];
        let mut s = [0.0; 2];
        for (&g, gr) in local.iter().zip(self.basis.gradients(xi)) {
            let pg = geo.physical_gradient(gr);
            s[0] += field.coeffs[g] * pg[0];
            s[1] += field.coeffs[g] * pg[1];
        }
        Ok(s)
    }

    /// Values at a set of tabulated basis values (`psi[n]` for local dof `n`).
    pub fn value_from_tab(&self, field: &ContinuousField, e: usize, psi: &[f64]) -> f64 {
        self.dofs[e].iter().zip(psi).map(|(&g, p)| field.coeffs[g] * p).sum()
    }

    pub fn integral(&self, field: &ContinuousField) -> f64 {
        field.coeffs.iter().zip(&self.dof_integrals).map(|(c, m)| c * m).sum()
    }

    /// Subtracts the mean value over the domain.
    pub fn zero_mean_projection(&self, field: &ContinuousField) -> ContinuousField {
        let area: f64 = self.dof_integrals.iter().sum();
        let mean = self.integral(field) / area;
        ContinuousField {
            degree: field.degree,
            coeffs: field.coeffs.iter().map(|c| c - mean).collect(),
            zero_mean: true,
        }
    }
}
