//! Face jumps and averages, the lifting operator and the DG gradients
//! built from it, DG norms and the jump pseudo-modular.
//!
//! Jumps use `[[w (x) n]] = w+ (x) n+ + w- (x) n-` on interior faces and
//! `(w - v*) (x) n` on boundary faces, with averages weighted `1/2` inside
//! and `1` on the boundary. The lifting `R w` of degree `k` solves
//! `(R w, X) = <[[w (x) n]], {X}>` for every broken tensor `X`.

use crate::error::{Error, Result};
use crate::femspace::{component_values, BrokenField, FemSpace, FieldKind};
use crate::linalg::CsrMatrix;
use crate::tensor::{self, Mat2};

/// Values of the boundary datum `v*` at the quadrature points of every
/// boundary face (empty on interior faces).
#[derive(Debug, Clone)]
pub struct BoundaryDatum {
    values: Vec<Vec<[f64; 2]>>,
}

impl BoundaryDatum {
    pub fn zero(space: &FemSpace) -> Self {
        Self::from_fn(space, |_| [0.0, 0.0])
    }

    pub fn from_fn<F: Fn([f64; 2]) -> [f64; 2]>(space: &FemSpace, f: F) -> Self {
        let values = space
            .faces
            .iter()
            .map(|t| {
                if t.is_boundary() {
                    t.points.iter().map(|&x| f(x)).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { values }
    }

    pub fn at(&self, face: usize) -> &[[f64; 2]] {
        &self.values[face]
    }
}

/// Traces, jump and average of a vector field at the quadrature points of one face.
#[derive(Debug, Clone)]
pub struct FaceTraceData {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// One trace per adjacent element, owner first: `traces[side][q]`.
    pub traces: Vec<Vec<[f64; 2]>>,
    pub jump: Vec<Mat2<f64>>,
    pub average: Vec<[f64; 2]>,
}

pub fn jump_and_average(
    space: &FemSpace,
    w: &BrokenField,
    face: usize,
    datum: Option<&BoundaryDatum>,
) -> Result<FaceTraceData> {
    let tab = space.faces.get(face).ok_or(Error::OutOfRange {
        what: "face",
        index: face,
        len: space.faces.len(),
    })?;
    let nq = tab.points.len();
    let traces: Vec<Vec<[f64; 2]>> = tab
        .sides
        .iter()
        .map(|s| {
            s.values
                .iter()
                .map(|phi| {
                    let v = component_values(w, s.element, phi);
                    [v[0], v[1]]
                })
                .collect()
        })
        .collect();
    let mut jump = vec![tensor::zero(); nq];
    let mut average = vec![[0.0; 2]; nq];
    let weight = if tab.is_boundary() { 1.0 } else { 0.5 };
    for (s, side) in tab.sides.iter().enumerate() {
        for q in 0..nq {
            let mut t = traces[s][q];
            average[q][0] += weight * t[0];
            average[q][1] += weight * t[1];
            if let (true, Some(d)) = (tab.is_boundary(), datum) {
                let vs = d.at(face)[q];
                t = [t[0] - vs[0], t[1] - vs[1]];
            }
            jump[q] = tensor::add(&jump[q], &tensor::outer(t, side.outward_normal));
        }
    }
    Ok(FaceTraceData {
        points: tab.points.clone(),
        weights: tab.weights.clone(),
        traces,
        jump,
        average,
    })
}

/// Linear part of the DG gradient restricted to one element: the rows are
/// the `4 dim P_k` tensor coefficients on the element, the columns the
/// velocity coefficients of the element and its face neighbors.
#[derive(Debug, Clone)]
pub struct GradientBlock {
    pub cols: Vec<usize>,
    /// Broken gradient part, row-major `rows x cols.len()`.
    pub grad: Vec<f64>,
    /// Lifting part, same layout.
    pub lift: Vec<f64>,
}

impl GradientBlock {
    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Entry of `grad - lift`.
    #[inline]
    pub fn dg(&self, row: usize, col: usize) -> f64 {
        let k = row * self.cols.len() + col;
        self.grad[k] - self.lift[k]
    }
}

/// The lifting and DG gradient operators on a fixed space.
#[derive(Debug, Clone)]
pub struct DgOperator {
    blocks: Vec<GradientBlock>,
    nb: usize,
    degree: usize,
}

impl DgOperator {
    pub fn new(space: &FemSpace) -> Self {
        let nb = space.nb();
        let mesh = &space.mesh;
        let vel_index = |e: usize, r: usize, j: usize| (e * 2 + r) * nb + j;
        let rows = 4 * nb;
        let mut blocks = Vec::with_capacity(mesh.num_elements());
        for e in 0..mesh.num_elements() {
            let mut patch = vec![e];
            for &f in &mesh.element_faces[e] {
                for s in &space.faces[f].sides {
                    if s.element != e {
                        patch.push(s.element);
                    }
                }
            }
            let cols: Vec<usize> = patch
                .iter()
                .flat_map(|&el| (0..2).flat_map(move |r| (0..nb).map(move |j| vel_index(el, r, j))))
                .collect();
            let ncols = cols.len();
            let col_of = |el: usize, r: usize, j: usize| {
                let p = patch.iter().position(|&x| x == el).expect("element in patch");
                (p * 2 + r) * nb + j
            };
            let geo = mesh.geometry[e];
            let mut grad = vec![0.0; rows * ncols];
            let quad = &space.cell;
            for (q, &w) in quad.rule.weights.iter().enumerate() {
                let phi = &quad.modal.values[q];
                let dphi: Vec<[f64; 2]> = quad.modal.grads[q].iter().map(|g| geo.physical_gradient(*g)).collect();
                for r in 0..2 {
                    for c in 0..2 {
                        for i in 0..nb {
                            let row = (2 * r + c) * nb + i;
                            for j in 0..nb {
                                grad[row * ncols + col_of(e, r, j)] += w * phi[i] * dphi[j][c];
                            }
                        }
                    }
                }
            }
            let mut lift = vec![0.0; rows * ncols];
            for &f in &mesh.element_faces[e] {
                let tab = &space.faces[f];
                let omega = if tab.is_boundary() { 1.0 } else { 0.5 };
                let me = tab.sides.iter().find(|s| s.element == e).expect("element on its face");
                for side in &tab.sides {
                    let n = side.outward_normal;
                    for (q, &wq) in tab.weights.iter().enumerate() {
                        let scale = omega * wq / geo.det;
                        for r in 0..2 {
                            for c in 0..2 {
                                for i in 0..nb {
                                    let row = (2 * r + c) * nb + i;
                                    let a = scale * me.values[q][i] * n[c];
                                    for j in 0..nb {
                                        lift[row * ncols + col_of(side.element, r, j)] += a * side.values[q][j];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            blocks.push(GradientBlock { cols, grad, lift });
        }
        Self {
            blocks,
            nb,
            degree: space.degree,
        }
    }

    pub fn block(&self, e: usize) -> &GradientBlock {
        &self.blocks[e]
    }

    pub fn num_elements(&self) -> usize {
        self.blocks.len()
    }

    /// Tensor coefficients `-R(0, v*)`: the datum contribution to the DG gradient.
    pub fn datum_offset(&self, space: &FemSpace, datum: &BoundaryDatum) -> BrokenField {
        let mut out = space.zeros(FieldKind::Tensor);
        let nb = self.nb;
        for &f in &space.mesh.boundary_faces {
            let tab = &space.faces[f];
            let side = &tab.sides[0];
            let det = space.mesh.geometry[side.element].det;
            let block = out.block_mut(side.element);
            for (q, &wq) in tab.weights.iter().enumerate() {
                let vs = datum.at(f)[q];
                for r in 0..2 {
                    for c in 0..2 {
                        for i in 0..nb {
                            block[(2 * r + c) * nb + i] += wq / det * vs[r] * side.outward_normal[c] * side.values[q][i];
                        }
                    }
                }
            }
        }
        out
    }

    fn apply_parts(&self, w: &BrokenField, use_grad: bool, use_lift: bool) -> Result<BrokenField> {
        self.check(w)?;
        let rows = 4 * self.nb;
        let mut out = BrokenField::zeros(FieldKind::Tensor, self.degree, self.blocks.len());
        for (e, b) in self.blocks.iter().enumerate() {
            let nc = b.ncols();
            let dst = out.block_mut(e);
            for (row, d) in dst.iter_mut().enumerate().take(rows) {
                let mut s = 0.0;
                for (col, &g) in b.cols.iter().enumerate() {
                    let k = row * nc + col;
                    let a = if use_grad { b.grad[k] } else { 0.0 } - if use_lift { b.lift[k] } else { 0.0 };
                    s += a * w.coeffs[g];
                }
                *d = s;
            }
        }
        Ok(out)
    }

    fn check(&self, w: &BrokenField) -> Result<()> {
        let expected = self.blocks.len() * 2 * self.nb;
        if w.kind != FieldKind::Vector || w.degree != self.degree || w.coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "velocity field for DG operators",
                expected,
                got: w.coeffs.len(),
            });
        }
        Ok(())
    }

    /// Elementwise gradient `grad_h w`.
    pub fn broken_gradient(&self, w: &BrokenField) -> Result<BrokenField> {
        self.apply_parts(w, true, false)
    }

    /// `R(w, v*)`; with `datum = None` the boundary jumps are `w (x) n`.
    pub fn lifting(&self, space: &FemSpace, w: &BrokenField, datum: Option<&BoundaryDatum>) -> Result<BrokenField> {
        let mut out = self.apply_parts(w, false, true)?;
        out.coeffs.iter_mut().for_each(|x| *x = -*x);
        if let Some(d) = datum {
            let off = self.datum_offset(space, d);
            for (o, x) in out.coeffs.iter_mut().zip(&off.coeffs) {
                *o -= x;
            }
        }
        Ok(out)
    }

    /// DG gradient `grad_h w - R(w, v*)`.
    pub fn dg_gradient(&self, space: &FemSpace, w: &BrokenField, datum: Option<&BoundaryDatum>) -> Result<BrokenField> {
        let mut out = self.apply_parts(w, true, true)?;
        if let Some(d) = datum {
            let off = self.datum_offset(space, d);
            for (o, x) in out.coeffs.iter_mut().zip(&off.coeffs) {
                *o += x;
            }
        }
        Ok(out)
    }

    /// Symmetric part of the DG gradient.
    pub fn dg_sym_gradient(
        &self,
        space: &FemSpace,
        w: &BrokenField,
        datum: Option<&BoundaryDatum>,
    ) -> Result<BrokenField> {
        Ok(sym_field(&self.dg_gradient(space, w, datum)?))
    }

    /// Trace of the DG gradient.
    pub fn dg_divergence(&self, space: &FemSpace, w: &BrokenField, datum: Option<&BoundaryDatum>) -> Result<BrokenField> {
        Ok(trace_field(&self.dg_gradient(space, w, datum)?))
    }

    /// The linear map `w -> grad_h w - R(w, 0)` as a sparse matrix.
    pub fn to_csr(&self) -> CsrMatrix {
        let rows = 4 * self.nb;
        let mut t = Vec::new();
        for (e, b) in self.blocks.iter().enumerate() {
            for row in 0..rows {
                for (col, &g) in b.cols.iter().enumerate() {
                    let v = b.dg(row, col);
                    if v != 0.0 {
                        t.push((e * rows + row, g, v));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.blocks.len() * rows, self.blocks.len() * 2 * self.nb, &t)
    }

    /// Adds `G_K^T b` for every element to `out`, where `b` holds one
    /// `4 dim P_k` block per element.
    pub fn add_transpose_apply(&self, b: &[f64], out: &mut [f64]) {
        let rows = 4 * self.nb;
        for (e, blk) in self.blocks.iter().enumerate() {
            let be = &b[e * rows..(e + 1) * rows];
            for (row, &bv) in be.iter().enumerate() {
                if bv == 0.0 {
                    continue;
                }
                for (col, &g) in blk.cols.iter().enumerate() {
                    out[g] += blk.dg(row, col) * bv;
                }
            }
        }
    }
}

/// Symmetric part of every tensor value.
pub fn sym_field(t: &BrokenField) -> BrokenField {
    let mut out = t.clone();
    let nb = t.nb();
    for e in 0..t.num_elements {
        let b = out.block_mut(e);
        for i in 0..nb {
            let off = 0.5 * (b[nb + i] + b[2 * nb + i]);
            b[nb + i] = off;
            b[2 * nb + i] = off;
        }
    }
    out
}

/// Trace of every tensor value.
pub fn trace_field(t: &BrokenField) -> BrokenField {
    let nb = t.nb();
    let mut out = BrokenField::zeros(FieldKind::Scalar, t.degree, t.num_elements);
    for e in 0..t.num_elements {
        let b = t.block(e);
        let d = out.block_mut(e);
        for i in 0..nb {
            d[i] = b[i] + b[3 * nb + i];
        }
    }
    out
}

/// Pointwise Euclidean/Frobenius norm in `L^p(Omega)` of a broken field.
pub fn broken_lp_norm(space: &FemSpace, f: &BrokenField, p: f64) -> f64 {
    let mut s = 0.0;
    for e in 0..f.num_elements {
        let det = space.mesh.geometry[e].det;
        for (q, &w) in space.cell.rule.weights.iter().enumerate() {
            let v = component_values(f, e, &space.cell.modal.values[q]);
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            s += w * det * n.powf(p);
        }
    }
    s.powf(1.0 / p)
}

/// `|| h^{-1} [[(w - v*) (x) n]] ||_{L^p(Gamma_h)}`.
pub fn jump_lp_norm(space: &FemSpace, w: &BrokenField, datum: Option<&BoundaryDatum>, p: f64) -> Result<f64> {
    let h = space.h();
    let m = jump_pseudo_modular(space, w, datum, |_, t| t.powf(p))?;
    // m = h * int |h^{-1} J|^p
    Ok((m / h).powf(1.0 / p))
}

/// `h * sum_gamma int_gamma psi(gamma, |h^{-1} [[(w - v*) (x) n]]|) ds`.
pub fn jump_pseudo_modular<P>(space: &FemSpace, w: &BrokenField, datum: Option<&BoundaryDatum>, psi: P) -> Result<f64>
where
    P: Fn(usize, f64) -> f64,
{
    let h = space.h();
    let mut s = 0.0;
    for f in 0..space.faces.len() {
        let d = jump_and_average(space, w, f, datum)?;
        for (j, wq) in d.jump.iter().zip(&d.weights) {
            s += wq * psi(f, tensor::norm(j) / h);
        }
    }
    Ok(h * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormVariant {
    /// Broken gradient.
    Full,
    /// Broken symmetric gradient.
    Sym,
}

/// `||grad_h w||_p + h^{1/p} ||h^{-1} [[w (x) n]]||_{p, Gamma_h}`, or the
/// same with the symmetric broken gradient.
pub fn dg_norm(
    space: &FemSpace,
    op: &DgOperator,
    w: &BrokenField,
    datum: Option<&BoundaryDatum>,
    p: f64,
    variant: NormVariant,
) -> Result<f64> {
    let g = op.broken_gradient(w)?;
    let g = match variant {
        NormVariant::Full => g,
        NormVariant::Sym => sym_field(&g),
    };
    Ok(broken_lp_norm(space, &g, p) + space.h().powf(1.0 / p) * jump_lp_norm(space, w, datum, p)?)
}

/// `||G w||_p + h^{1/p} ||h^{-1} [[w (x) n]]||_{p, Gamma_h}` with the DG gradient.
pub fn dg_gradient_norm(
    space: &FemSpace,
    op: &DgOperator,
    w: &BrokenField,
    datum: Option<&BoundaryDatum>,
    p: f64,
) -> Result<f64> {
    let g = op.dg_gradient(space, w, datum)?;
    Ok(broken_lp_norm(space, &g, p) + space.h().powf(1.0 / p) * jump_lp_norm(space, w, datum, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    fn setup(level: usize) -> (FemSpace, DgOperator) {
        let s = FemSpace::new(build_mesh(level), 1).unwrap();
        let op = DgOperator::new(&s);
        (s, op)
    }

    #[test]
    fn continuous_field_has_no_interior_jump() {
        let (s, _) = setup(1);
        let w = s.l2_project(FieldKind::Vector, 1, |_, x| vec![x[0] + 2.0, x[1] - x[0]]);
        for &f in &s.mesh.interior_faces {
            let d = jump_and_average(&s, &w, f, None).unwrap();
            for (j, (a, x)) in d.jump.iter().zip(d.average.iter().zip(&d.points)) {
                assert!(tensor::norm(j) < 1e-12);
                assert!((a[0] - x[0] - 2.0).abs() < 1e-12);
            }
        }
        let datum = BoundaryDatum::from_fn(&s, |x| [x[0] + 2.0, x[1] - x[0]]);
        for &f in &s.mesh.boundary_faces {
            let d = jump_and_average(&s, &w, f, Some(&datum)).unwrap();
            assert!(d.jump.iter().all(|j| tensor::norm(j) < 1e-12));
        }
        assert!(jump_and_average(&s, &w, s.faces.len(), None).is_err());
    }

    #[test]
    fn lifting_of_matching_continuous_field_vanishes() {
        let (s, op) = setup(2);
        let f = |x: [f64; 2]| [3.0 * x[0] - x[1], x[0] + 0.5];
        let w = s.l2_project(FieldKind::Vector, 1, |_, x| f(x).to_vec());
        let datum = BoundaryDatum::from_fn(&s, f);
        let r = op.lifting(&s, &w, Some(&datum)).unwrap();
        assert!(r.coeffs.iter().all(|c| c.abs() < 1e-11));
        let g = op.dg_gradient(&s, &w, Some(&datum)).unwrap();
        for e in 0..s.num_elements() {
            let v = s.evaluate(&g, e, [0.25, 0.4]).unwrap();
            let want = [3.0, -1.0, 1.0, 0.0];
            for c in 0..4 {
                assert!((v[c] - want[c]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn p0_lifting_is_local() {
        let (s, op) = setup(0);
        let mut w = s.zeros(FieldKind::Vector);
        // constant e_1 on element 3: coefficient of the sqrt(2) mode
        let idx = w.index(3, 0, 0);
        w.coeffs[idx] = 1.0 / std::f64::consts::SQRT_2;
        let r = op.lifting(&s, &w, None).unwrap();
        let mut patch = vec![3];
        for &f in &s.mesh.element_faces[3] {
            patch.extend(s.faces[f].sides.iter().map(|x| x.element));
        }
        for e in 0..s.num_elements() {
            let nrm: f64 = r.block(e).iter().map(|x| x.abs()).sum();
            if patch.contains(&e) {
                assert!(nrm > 1e-3, "element {e}");
            } else {
                assert!(nrm < 1e-14, "element {e}");
            }
        }
    }

    #[test]
    fn rigid_rotation_has_zero_symmetric_gradient() {
        let (s, op) = setup(2);
        let rot = |x: [f64; 2]| [x[1], -x[0]];
        let w = s.l2_project(FieldKind::Vector, 1, |_, x| rot(x).to_vec());
        let datum = BoundaryDatum::from_fn(&s, rot);
        let d = op.dg_sym_gradient(&s, &w, Some(&datum)).unwrap();
        assert!(d.coeffs.iter().all(|c| c.abs() < 1e-11));
        let shear = |x: [f64; 2]| [x[0], -x[1]];
        let w = s.l2_project(FieldKind::Vector, 1, |_, x| shear(x).to_vec());
        let datum = BoundaryDatum::from_fn(&s, shear);
        let dv = op.dg_divergence(&s, &w, Some(&datum)).unwrap();
        assert!(dv.coeffs.iter().all(|c| c.abs() < 1e-11));
    }

    #[test]
    fn csr_and_blocks_agree() {
        let (s, op) = setup(1);
        let w = s.l2_project(FieldKind::Vector, 1, |_, x| vec![x[0].sin(), (x[1] * x[0]).cos()]);
        let g = op.dg_gradient(&s, &w, None).unwrap();
        let m = op.to_csr();
        let gm = m.mul_vec(&w.coeffs);
        for (a, b) in g.coeffs.iter().zip(&gm) {
            assert!((a - b).abs() < 1e-13);
        }
        let b: Vec<f64> = (0..gm.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut out = vec![0.0; w.coeffs.len()];
        op.add_transpose_apply(&b, &mut out);
        let want = m.transpose().mul_vec(&b);
        for (a, b) in out.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_modular_examples() {
        let (s, _) = setup(1);
        let w = s.l2_project(FieldKind::Vector, 1, |e, x| vec![(e % 3) as f64 + x[0], x[1] * (e % 2) as f64]);
        let h = s.h();
        let m2 = jump_pseudo_modular(&s, &w, None, |_, t| 0.5 * t * t).unwrap();
        let l2 = jump_lp_norm(&s, &w, None, 2.0).unwrap();
        assert!((2.0 * m2 - h * l2 * l2).abs() < 1e-10);
        let mut w2 = w.clone();
        w2.coeffs.iter_mut().for_each(|c| *c *= 2.0);
        let p = 2.7;
        let a = jump_pseudo_modular(&s, &w, None, |_, t| t.powf(p) / p).unwrap();
        let b = jump_pseudo_modular(&s, &w2, None, |_, t| t.powf(p) / p).unwrap();
        assert!((b / a - 2f64.powf(p)).abs() < 1e-9);
        let zero = s.zeros(FieldKind::Vector);
        assert_eq!(jump_pseudo_modular(&s, &zero, None, |_, t| t).unwrap(), 0.0);
    }
}
