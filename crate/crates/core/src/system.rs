//! Residual and tangent of the discrete primal problem: broken velocity,
//! continuous zero-mean pressure and one multiplier for the mean.
//!
//! Unknowns are ordered `[v | q | lambda]`. Momentum rows test with every
//! broken `z`:
//!
//! ```text
//! (S(D v) - 1/2 v (x) v - q I, D z) + 1/2 ([G v] v, z) - (g, z)
//!     + alpha < S_a(h^-1 [[(v - v*) (x) n]]), [[z (x) n]] >
//! ```
//!
//! where `G v = grad_h v - R(v, v*)` and `D v` is its symmetric part. The
//! volume term pairs through the DG gradient of `z`, so it is assembled as
//! `G^T b` with `b_i = int W phi_i` per element. Continuity rows test
//! `(tr G v, psi_j) + lambda int psi_j`, and the last row is `int q`.

use crate::constitutive::ConstitutiveParams;
use crate::dgops::{BoundaryDatum, DgOperator};
use crate::error::{Error, Result};
use crate::femspace::{component_values, BrokenField, ContinuousField, FemSpace, FieldKind};
use crate::linalg::CsrMatrix;
use crate::manufactured::{ManufacturedCase, Mode};
use crate::tensor::{self, Mat2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub params: ConstitutiveParams<f64>,
    /// Stabilization strength.
    pub alpha: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    space: FemSpace,
    op: DgOperator,
    datum: BoundaryDatum,
    /// Datum part of the DG gradient, one tensor block per element.
    offset: Vec<f64>,
    /// `(g, z)` for every velocity basis function.
    load: Vec<f64>,
    config: SystemConfig,
}

/// Per-point values shared by the residual and the tangent.
struct PointState {
    grad: Mat2<f64>,
    vel: [f64; 2],
    pres: f64,
}

impl DiscreteSystem {
    pub fn new<D, G>(space: FemSpace, config: SystemConfig, datum: D, force: G) -> Result<Self>
    where
        D: Fn([f64; 2]) -> [f64; 2],
        G: Fn([f64; 2]) -> [f64; 2],
    {
        if !(config.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", config.alpha)));
        }
        let op = DgOperator::new(&space);
        let datum = BoundaryDatum::from_fn(&space, datum);
        let offset = op.datum_offset(&space, &datum).coeffs;
        let load = space
            .l2_project(FieldKind::Vector, space.degree, |_, x| force(x).to_vec())
            .coeffs;
        let mut sys = Self {
            space,
            op,
            datum,
            offset,
            load,
            config,
        };
        // l2_project returns int f phi / det; the load needs int f phi
        let nb2 = 2 * sys.space.nb();
        for e in 0..sys.space.num_elements() {
            let det = sys.space.mesh.geometry[e].det;
            sys.load[e * nb2..(e + 1) * nb2].iter_mut().for_each(|x| *x *= det);
        }
        Ok(sys)
    }

    /// System whose exact solution is the manufactured pair: `v*` is the
    /// exact velocity and `g` the matching body force for the mode.
    pub fn for_case(space: FemSpace, config: SystemConfig, case: &ManufacturedCase) -> Result<Self> {
        let mode = config.mode;
        let space = space.with_singular_point(case.singular_point());
        Self::new(space, config, |x| case.velocity(x), |x| case.body_force(x, mode))
    }

    /// Zero datum and zero body force.
    pub fn homogeneous(space: FemSpace, config: SystemConfig) -> Result<Self> {
        Self::new(space, config, |_| [0.0, 0.0], |_| [0.0, 0.0])
    }

    pub fn space(&self) -> &FemSpace {
        &self.space
    }

    pub fn op(&self) -> &DgOperator {
        &self.op
    }

    pub fn datum(&self) -> &BoundaryDatum {
        &self.datum
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn num_velocity_dofs(&self) -> usize {
        self.space.num_velocity_dofs()
    }

    pub fn num_pressure_dofs(&self) -> usize {
        self.space.pressure.num_dofs()
    }

    pub fn num_dofs(&self) -> usize {
        self.num_velocity_dofs() + self.num_pressure_dofs() + 1
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_dofs() {
            return Err(Error::DimensionMismatch {
                what: "system state",
                expected: self.num_dofs(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Splits a state into velocity, pressure and multiplier.
    pub fn split(&self, x: &[f64]) -> Result<(BrokenField, ContinuousField, f64)> {
        self.check(x)?;
        let nv = self.num_velocity_dofs();
        let np = self.num_pressure_dofs();
        let v = BrokenField::from_coeffs(FieldKind::Vector, self.space.degree, self.space.num_elements(), x[..nv].to_vec())?;
        let q = self.space.pressure.from_coeffs(x[nv..nv + np].to_vec())?;
        Ok((v, q, x[nv + np]))
    }

    /// Joins velocity, pressure and multiplier into a state.
    pub fn join(&self, v: &BrokenField, q: &ContinuousField, lambda: f64) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.num_dofs());
        x.extend_from_slice(&v.coeffs);
        x.extend_from_slice(&q.coeffs);
        x.push(lambda);
        x
    }

    pub fn zero_state(&self) -> Vec<f64> {
        vec![0.0; self.num_dofs()]
    }

    /// Projected exact velocity, interpolated zero-mean exact pressure and
    /// a zero multiplier.
    pub fn manufactured_state(&self, case: &ManufacturedCase) -> Vec<f64> {
        let v = self
            .space
            .l2_project(FieldKind::Vector, self.space.degree, |_, x| case.velocity(x).to_vec());
        let q = self.space.pressure.interpolate(|x| {
            if x == case.singular_point() {
                // the nodal value at the singular point only needs to be finite
                0.0
            } else {
                case.pressure(x)
            }
        });
        let q = self.space.pressure.zero_mean_projection(&q);
        self.join(&v, &q, 0.0)
    }

    /// DG gradient coefficients `G v + g*` of the velocity part.
    pub fn dg_gradient(&self, v: &[f64]) -> BrokenField {
        let rows = 4 * self.space.nb();
        let mut out = self.offset.clone();
        for e in 0..self.space.num_elements() {
            let b = self.op.block(e);
            let nc = b.ncols();
            for row in 0..rows {
                let mut s = 0.0;
                for (col, &g) in b.cols.iter().enumerate() {
                    s += (b.grad[row * nc + col] - b.lift[row * nc + col]) * v[g];
                }
                out[e * rows + row] += s;
            }
        }
        BrokenField {
            kind: FieldKind::Tensor,
            degree: self.space.degree,
            num_elements: self.space.num_elements(),
            coeffs: out,
        }
    }

    /// Face shifts `{|Pi^0 D v|}` for the stabilization.
    pub fn face_shifts(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let l = self.dg_gradient(&x[..self.num_velocity_dofs()]);
        let nb = self.space.nb();
        let means: Vec<f64> = (0..self.space.num_elements())
            .map(|e| {
                let b = l.block(e);
                let m: Mat2<f64> = [[b[0], b[nb]], [b[2 * nb], b[3 * nb]]];
                std::f64::consts::SQRT_2 * tensor::norm(&tensor::sym(&m))
            })
            .collect();
        Ok(self
            .space
            .faces
            .iter()
            .map(|f| f.sides.iter().map(|s| means[s.element]).sum::<f64>() / f.sides.len() as f64)
            .collect())
    }

    fn point_state(&self, l: &BrokenField, v: &BrokenField, q: &ContinuousField, e: usize, qp: usize) -> PointState {
        let quad = &self.space.cell;
        let phi = &quad.modal.values[qp];
        let lv = component_values(l, e, phi);
        let vv = component_values(v, e, phi);
        PointState {
            grad: [[lv[0], lv[1]], [lv[2], lv[3]]],
            vel: [vv[0], vv[1]],
            pres: self.space.pressure.value_from_tab(q, e, &quad.lagrange.values[qp]),
        }
    }

    /// Volume integrand `W = S(D v) - 1/2 v (x) v - q I`.
    fn volume_flux(&self, s: &PointState) -> Mat2<f64> {
        let mut w = self.config.params.stress(&s.grad);
        if self.config.mode == Mode::NavierStokes {
            w = tensor::sub(&w, &tensor::scale(0.5, &tensor::outer(s.vel, s.vel)));
        }
        w[0][0] -= s.pres;
        w[1][1] -= s.pres;
        w
    }

    /// Residual with the stabilization shift taken from `x`.
    pub fn assemble_residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let shifts = self.face_shifts(x)?;
        self.assemble_residual_with_shifts(x, &shifts)
    }

    /// Residual with prescribed face shifts.
    pub fn assemble_residual_with_shifts(&self, x: &[f64], shifts: &[f64]) -> Result<Vec<f64>> {
        let (v, q, lambda) = self.split(x)?;
        if shifts.len() != self.space.faces.len() {
            return Err(Error::DimensionMismatch {
                what: "face shifts",
                expected: self.space.faces.len(),
                got: shifts.len(),
            });
        }
        let nv = self.num_velocity_dofs();
        let np = self.num_pressure_dofs();
        let nb = self.space.nb();
        let l = self.dg_gradient(&v.coeffs);
        let mut res = vec![0.0; self.num_dofs()];
        let mut b = vec![0.0; self.space.num_elements() * 4 * nb];
        let quad = &self.space.cell;
        let ns = self.config.mode == Mode::NavierStokes;
        for e in 0..self.space.num_elements() {
            let det = self.space.mesh.geometry[e].det;
            let pdofs = self.space.pressure.element_dofs(e);
            let be = &mut b[e * 4 * nb..(e + 1) * 4 * nb];
            for (qp, &w) in quad.rule.weights.iter().enumerate() {
                let st = self.point_state(&l, &v, &q, e, qp);
                let wd = w * det;
                let phi = &quad.modal.values[qp];
                let flux = self.volume_flux(&st);
                for rc in 0..4 {
                    let f = wd * flux[rc / 2][rc % 2];
                    for i in 0..nb {
                        be[rc * nb + i] += f * phi[i];
                    }
                }
                if ns {
                    let av = tensor::mat_vec(&st.grad, st.vel);
                    for r in 0..2 {
                        for i in 0..nb {
                            res[v.index(e, r, i)] += 0.5 * wd * av[r] * phi[i];
                        }
                    }
                }
                let tr = wd * tensor::trace(&st.grad);
                for (n, &g) in pdofs.iter().enumerate() {
                    res[nv + g] += tr * quad.lagrange.values[qp][n];
                }
            }
        }
        self.op.add_transpose_apply(&b, &mut res[..nv]);
        for (r, g) in res[..nv].iter_mut().zip(&self.load) {
            *r -= g;
        }
        self.add_stabilization_residual(&v, shifts, &mut res[..nv]);
        let m = self.space.pressure.dof_integrals();
        for j in 0..np {
            res[nv + j] += lambda * m[j];
        }
        res[nv + np] = self.space.pressure.integral(&q);
        Ok(res)
    }

    /// `h^{-1} [[(v - v*) (x) n]]` at the quadrature points of face `f`.
    fn scaled_jump(&self, v: &BrokenField, f: usize) -> Vec<Mat2<f64>> {
        let tab = &self.space.faces[f];
        let hinv = 1.0 / self.space.h();
        let mut out = vec![tensor::zero(); tab.points.len()];
        for side in &tab.sides {
            for (qp, j) in out.iter_mut().enumerate() {
                let t = component_values(v, side.element, &side.values[qp]);
                let mut t = [t[0], t[1]];
                if tab.is_boundary() {
                    let d = self.datum.at(f)[qp];
                    t = [t[0] - d[0], t[1] - d[1]];
                }
                *j = tensor::add(j, &tensor::scale(hinv, &tensor::outer(t, side.outward_normal)));
            }
        }
        out
    }

    fn add_stabilization_residual(&self, v: &BrokenField, shifts: &[f64], res: &mut [f64]) {
        let nb = self.space.nb();
        let alpha = self.config.alpha;
        for (f, tab) in self.space.faces.iter().enumerate() {
            let jumps = self.scaled_jump(v, f);
            for (qp, j) in jumps.iter().enumerate() {
                let s = self.config.params.stress_shifted(shifts[f], j);
                let wq = alpha * tab.weights[qp];
                for side in &tab.sides {
                    let sn = tensor::mat_vec(&s, side.outward_normal);
                    for r in 0..2 {
                        for i in 0..nb {
                            res[v.index(side.element, r, i)] += wq * sn[r] * side.values[qp][i];
                        }
                    }
                }
            }
        }
    }

    /// Jacobian of [`DiscreteSystem::assemble_residual`] with the face
    /// shifts held at their values in `x`.
    pub fn assemble_tangent(&self, x: &[f64]) -> Result<CsrMatrix> {
        let (v, q, _) = self.split(x)?;
        let shifts = self.face_shifts(x)?;
        let nv = self.num_velocity_dofs();
        let np = self.num_pressure_dofs();
        let nb = self.space.nb();
        let nt = 4 * nb;
        let nl = 2 * nb;
        let l = self.dg_gradient(&v.coeffs);
        let quad = &self.space.cell;
        let ns = self.config.mode == Mode::NavierStokes;
        let npk = self.space.pressure.basis().dim();
        let mut trip: Vec<(usize, usize, f64)> = Vec::new();
        for e in 0..self.space.num_elements() {
            let det = self.space.mesh.geometry[e].det;
            let pdofs = self.space.pressure.element_dofs(e);
            let blk = self.op.block(e);
            let nc = blk.ncols();
            // db/dL, db/dv_K, db/dq, d(conv)/dL, d(conv)/dv_K, d(cont)/dL
            let mut ms = vec![0.0; nt * nt];
            let mut cv = vec![0.0; nt * nl];
            let mut pq = vec![0.0; nt * npk];
            let mut al = vec![0.0; nl * nt];
            let mut bv = vec![0.0; nl * nl];
            let mut dl = vec![0.0; npk * nt];
            for (qp, &w) in quad.rule.weights.iter().enumerate() {
                let st = self.point_state(&l, &v, &q, e, qp);
                let wd = w * det;
                let phi = &quad.modal.values[qp];
                let psi = &quad.lagrange.values[qp];
                let t = self.config.params.stress_tangent(&st.grad).to_matrix();
                for a in 0..4 {
                    for i in 0..nb {
                        let fi = wd * phi[i];
                        for bb in 0..4 {
                            let tab = t[a][bb] * fi;
                            if tab == 0.0 {
                                continue;
                            }
                            for j in 0..nb {
                                ms[(a * nb + i) * nt + bb * nb + j] += tab * phi[j];
                            }
                        }
                        if a == 0 || a == 3 {
                            for n in 0..npk {
                                pq[(a * nb + i) * npk + n] -= fi * psi[n];
                                dl[n * nt + a * nb + i] += fi * psi[n];
                            }
                        }
                    }
                }
                if ns {
                    for r in 0..2 {
                        for c in 0..2 {
                            let a = 2 * r + c;
                            for i in 0..nb {
                                let fi = wd * phi[i];
                                for s in 0..2 {
                                    // -1/2 d(v_r v_c)/d v_s
                                    let coef = -0.5
                                        * (if r == s { st.vel[c] } else { 0.0 } + if c == s { st.vel[r] } else { 0.0 });
                                    if coef != 0.0 {
                                        for j in 0..nb {
                                            cv[(a * nb + i) * nl + s * nb + j] += coef * fi * phi[j];
                                        }
                                    }
                                }
                            }
                        }
                    }
                    for r in 0..2 {
                        for i in 0..nb {
                            let fi = 0.5 * wd * phi[i];
                            for c in 0..2 {
                                for j in 0..nb {
                                    al[(r * nb + i) * nt + (2 * r + c) * nb + j] += fi * st.vel[c] * phi[j];
                                }
                            }
                            for s in 0..2 {
                                for j in 0..nb {
                                    bv[(r * nb + i) * nl + s * nb + j] += fi * st.grad[r][s] * phi[j];
                                }
                            }
                        }
                    }
                }
            }
            // the element's own dofs are the first 2 nb patch columns
            let gk = |row: usize, col: usize| blk.grad[row * nc + col] - blk.lift[row * nc + col];
            // G^T (Ms G + Cv)
            let mut mg = vec![0.0; nt * nc];
            for a in 0..nt {
                for bb in 0..nt {
                    let m = ms[a * nt + bb];
                    if m == 0.0 {
                        continue;
                    }
                    for col in 0..nc {
                        mg[a * nc + col] += m * gk(bb, col);
                    }
                }
                for col in 0..nl {
                    mg[a * nc + col] += cv[a * nl + col];
                }
            }
            for ci in 0..nc {
                for cj in 0..nc {
                    let mut s = 0.0;
                    for a in 0..nt {
                        s += gk(a, ci) * mg[a * nc + cj];
                    }
                    if ns && ci < nl {
                        for a in 0..nt {
                            s += al[ci * nt + a] * gk(a, cj);
                        }
                        if cj < nl {
                            s += bv[ci * nl + cj];
                        }
                    }
                    if s != 0.0 {
                        trip.push((blk.cols[ci], blk.cols[cj], s));
                    }
                }
            }
            // pressure couplings
            for ci in 0..nc {
                for (n, &g) in pdofs.iter().enumerate() {
                    let mut s = 0.0;
                    let mut d = 0.0;
                    for a in 0..nt {
                        s += gk(a, ci) * pq[a * npk + n];
                        d += dl[n * nt + a] * gk(a, ci);
                    }
                    if s != 0.0 {
                        trip.push((blk.cols[ci], nv + g, s));
                    }
                    if d != 0.0 {
                        trip.push((nv + g, blk.cols[ci], d));
                    }
                }
            }
        }
        self.add_stabilization_tangent(&v, &shifts, &mut trip);
        let m = self.space.pressure.dof_integrals();
        for (j, &mj) in m.iter().enumerate() {
            trip.push((nv + j, nv + np, mj));
            trip.push((nv + np, nv + j, mj));
        }
        let n = self.num_dofs();
        Ok(CsrMatrix::from_triplets(n, n, &trip))
    }

    fn add_stabilization_tangent(&self, v: &BrokenField, shifts: &[f64], trip: &mut Vec<(usize, usize, f64)>) {
        let nb = self.space.nb();
        let alpha = self.config.alpha;
        let hinv = 1.0 / self.space.h();
        for (f, tab) in self.space.faces.iter().enumerate() {
            let jumps = self.scaled_jump(v, f);
            let ns = tab.sides.len();
            let mut local = vec![0.0; (ns * 2 * nb) * (ns * 2 * nb)];
            let dim = ns * 2 * nb;
            for (qp, j) in jumps.iter().enumerate() {
                let t = self.config.params.stress_shifted_tangent(shifts[f], j).to_matrix();
                let wq = alpha * tab.weights[qp];
                for (si, a) in tab.sides.iter().enumerate() {
                    for (sj, b) in tab.sides.iter().enumerate() {
                        for r in 0..2 {
                            for rp in 0..2 {
                                // sum_c sum_c' n^a_c T[rc][r'c'] n^b_c'
                                let mut k = 0.0;
                                for c in 0..2 {
                                    for cp in 0..2 {
                                        k += a.outward_normal[c] * t[2 * r + c][2 * rp + cp] * b.outward_normal[cp];
                                    }
                                }
                                if k == 0.0 {
                                    continue;
                                }
                                let k = wq * hinv * k;
                                for i in 0..nb {
                                    for jj in 0..nb {
                                        local[((si * 2 + r) * nb + i) * dim + (sj * 2 + rp) * nb + jj] +=
                                            k * a.values[qp][i] * b.values[qp][jj];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let glob = |s: usize, r: usize, i: usize| v.index(tab.sides[s].element, r, i);
            for s in 0..ns {
                for r in 0..2 {
                    for i in 0..nb {
                        let row = (s * 2 + r) * nb + i;
                        for s2 in 0..ns {
                            for r2 in 0..2 {
                                for j in 0..nb {
                                    let col = (s2 * 2 + r2) * nb + j;
                                    let val = local[row * dim + col];
                                    if val != 0.0 {
                                        trip.push((glob(s, r, i), glob(s2, r2, j), val));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// `(Div v, psi_j)` for every pressure basis function, datum included.
    pub fn divergence_constraint(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (v, _, _) = self.split(x)?;
        let l = self.dg_gradient(&v.coeffs);
        let quad = &self.space.cell;
        let mut out = vec![0.0; self.num_pressure_dofs()];
        for e in 0..self.space.num_elements() {
            let det = self.space.mesh.geometry[e].det;
            for (qp, &w) in quad.rule.weights.iter().enumerate() {
                let lv = component_values(&l, e, &quad.modal.values[qp]);
                let tr = w * det * (lv[0] + lv[3]);
                for (n, &g) in self.space.pressure.element_dofs(e).iter().enumerate() {
                    out[g] += tr * quad.lagrange.values[qp][n];
                }
            }
        }
        Ok(out)
    }

    /// `b_h(x, y, z) = 1/2 (z (x) x, G y) - 1/2 (y (x) x, G z)` with the
    /// homogeneous DG gradient.
    pub fn trilinear_bh(&self, x: &BrokenField, y: &BrokenField, z: &BrokenField) -> Result<f64> {
        let gy = self.op.dg_gradient(&self.space, y, None)?;
        let gz = self.op.dg_gradient(&self.space, z, None)?;
        let quad = &self.space.cell;
        let mut s = 0.0;
        for e in 0..self.space.num_elements() {
            let det = self.space.mesh.geometry[e].det;
            for (qp, &w) in quad.rule.weights.iter().enumerate() {
                let phi = &quad.modal.values[qp];
                let (xv, yv, zv) = (
                    component_values(x, e, phi),
                    component_values(y, e, phi),
                    component_values(z, e, phi),
                );
                let (a, b) = (component_values(&gy, e, phi), component_values(&gz, e, phi));
                let mut t = 0.0;
                for r in 0..2 {
                    for c in 0..2 {
                        t += zv[r] * xv[c] * a[2 * r + c] - yv[r] * xv[c] * b[2 * r + c];
                    }
                }
                s += 0.5 * w * det * t;
            }
        }
        Ok(s)
    }
}
