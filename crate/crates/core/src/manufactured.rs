//! Manufactured solution `v = |x|^beta (x2, -x1)`, `q = eta (|x|^gamma - <|x|^gamma>)`
//! on `(-1, 1)^2`, with the body force that makes it an exact solution.

use serde::{Deserialize, Serialize};

use crate::constitutive::ConstitutiveParams;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::tensor::Mat2;

pub const BETA: f64 = 1e-2;
const GAMMA_MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    NavierStokes,
    Stokes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseId {
    /// Pressure barely in `W^{1,p'}`.
    One,
    /// Pressure barely satisfying the shifted `L^2` gradient condition.
    Two,
}

/// Factor multiplying `(p - 2) / 2` in the case 2 exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentBase {
    /// The stabilization parameter `alpha`.
    Alpha,
    /// The velocity exponent `beta`.
    Beta,
}

/// Pressure exponent `gamma` and amplitude `eta` of a case.
pub fn case_parameters(case: CaseId, p: f64, alpha: f64, base: ExponentBase) -> Result<(f64, f64)> {
    if p <= 2.0 {
        return Err(Error::InvalidParameter(format!("experiments need p > 2, got {p}")));
    }
    Ok(match case {
        CaseId::One => {
            let p_conj = p / (p - 1.0);
            (1.0 - 2.0 / p_conj + GAMMA_MARGIN, 25.0)
        }
        CaseId::Two => {
            let factor = match base {
                ExponentBase::Alpha => alpha,
                ExponentBase::Beta => BETA,
            };
            (factor * (p - 2.0) / 2.0 + GAMMA_MARGIN, 1e3)
        }
    })
}

/// `<|x|^gamma>` over `(-1, 1)^2` with an `n`-point Gauss rule in the polar
/// angle: `2 / (gamma + 2) int_0^{pi/4} sec(t)^(gamma + 2) dt`.
pub fn mean_offset_with_order(gamma: f64, n: usize) -> Result<f64> {
    if gamma <= -2.0 {
        return Err(Error::InvalidParameter(format!("|x|^{gamma} is not integrable")));
    }
    let (x, w) = gauss_legendre::<f64>(n);
    let a = std::f64::consts::FRAC_PI_4;
    let s: f64 = x
        .iter()
        .zip(&w)
        .map(|(xi, wi)| {
            let t = 0.5 * a * (xi + 1.0);
            0.5 * a * wi * t.cos().powf(-(gamma + 2.0))
        })
        .sum();
    Ok(2.0 / (gamma + 2.0) * s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManufacturedCase {
    pub case: Option<CaseId>,
    pub params: ConstitutiveParams<f64>,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub mean_offset: f64,
}

impl ManufacturedCase {
    pub fn new(case: CaseId, params: ConstitutiveParams<f64>, alpha: f64, base: ExponentBase) -> Result<Self> {
        let (gamma, eta) = case_parameters(case, params.p, alpha, base)?;
        let mut m = Self::with_exponents(params, gamma, eta)?;
        m.case = Some(case);
        Ok(m)
    }

    /// Same fields with an arbitrary pressure exponent and amplitude.
    pub fn with_exponents(params: ConstitutiveParams<f64>, gamma: f64, eta: f64) -> Result<Self> {
        Ok(Self {
            case: None,
            params,
            beta: BETA,
            gamma,
            eta,
            mean_offset: mean_offset_with_order(gamma, 40)?,
        })
    }

    /// Point where the solution is not smooth.
    pub fn singular_point(&self) -> [f64; 2] {
        [0.0, 0.0]
    }

    pub fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        let rb = radius(x).powf(self.beta);
        [rb * x[1], -rb * x[0]]
    }

    pub fn pressure(&self, x: [f64; 2]) -> f64 {
        self.eta * (radius(x).powf(self.gamma) - self.mean_offset)
    }

    /// `grad v` with entries `d v_i / d x_j`.
    pub fn velocity_gradient(&self, x: [f64; 2]) -> Mat2<f64> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let b = self.beta;
        let rb = r2.powf(0.5 * b);
        let c = b * r2.powf(0.5 * b - 1.0);
        [
            [c * x[0] * x[1], c * x[1] * x[1] + rb],
            [-c * x[0] * x[0] - rb, -c * x[0] * x[1]],
        ]
    }

    pub fn sym_gradient(&self, x: [f64; 2]) -> Mat2<f64> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let c = self.beta * r2.powf(0.5 * self.beta - 1.0);
        let off = 0.5 * c * (x[1] * x[1] - x[0] * x[0]);
        [[c * x[0] * x[1], off], [off, -c * x[0] * x[1]]]
    }

    pub fn pressure_gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let r = radius(x);
        let c = self.eta * self.gamma * r.powf(self.gamma - 2.0);
        [c * x[0], c * x[1]]
    }

    /// `[grad v] v = -|x|^(2 beta) x`.
    pub fn convection(&self, x: [f64; 2]) -> [f64; 2] {
        let c = -radius(x).powf(2.0 * self.beta);
        [c * x[0], c * x[1]]
    }

    /// `div S(Dv)` in closed form.
    pub fn div_stress(&self, x: [f64; 2]) -> [f64; 2] {
        let (p, d, b) = (self.params.p, self.params.delta, self.beta);
        let r = radius(x);
        let rb = r.powf(b);
        let c = b / std::f64::consts::SQRT_2;
        let base = d + c * rb;
        let mu = base.powf(p - 2.0);
        // r d(mu)/dr
        let r_dmu = (p - 2.0) * base.powf(p - 3.0) * c * b * rb;
        let k = 0.5 * b * r.powf(b - 2.0) * (mu * (b + 2.0) + r_dmu);
        [k * x[1], -k * x[0]]
    }

    /// `div S(Dv)` by central differences of the stress with step `1e-6 |x|`.
    pub fn div_stress_fd(&self, x: [f64; 2]) -> [f64; 2] {
        let h = 1e-6 * radius(x);
        let s = |y: [f64; 2]| self.params.stress(&self.sym_gradient(y));
        let mut out = [0.0; 2];
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (sp, sm) = (s(xp), s(xm));
            for i in 0..2 {
                out[i] += (sp[i][j] - sm[i][j]) / (2.0 * h);
            }
        }
        out
    }

    /// `g = -div S(Dv) + [grad v] v + grad q`; the convective term is
    /// dropped in Stokes mode.
    pub fn body_force(&self, x: [f64; 2], mode: Mode) -> [f64; 2] {
        let ds = self.div_stress(x);
        let gq = self.pressure_gradient(x);
        let mut g = [gq[0] - ds[0], gq[1] - ds[1]];
        if mode == Mode::NavierStokes {
            let c = self.convection(x);
            g[0] += c[0];
            g[1] += c[1];
        }
        g
    }

    /// `F(Dv)` at `x`.
    pub fn f_of_sym_gradient(&self, x: [f64; 2]) -> Mat2<f64> {
        self.params.f_map(&self.sym_gradient(x))
    }

    /// `|Dv| = beta |x|^beta / sqrt(2)`.
    pub fn sym_gradient_norm(&self, x: [f64; 2]) -> f64 {
        self.beta * radius(x).powf(self.beta) / std::f64::consts::SQRT_2
    }
}

fn radius(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn case(p: f64, delta: f64) -> ManufacturedCase {
        ManufacturedCase::new(CaseId::One, ConstitutiveParams::new(p, delta).unwrap(), 2.5, ExponentBase::Alpha).unwrap()
    }

    fn random_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| loop {
                let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                if radius(x) > 0.05 {
                    break x;
                }
            })
            .collect()
    }

    #[test]
    fn case_parameter_arithmetic() {
        let (g, e) = case_parameters(CaseId::Two, 3.0, 2.5, ExponentBase::Alpha).unwrap();
        assert!((g - 1.2501).abs() < 1e-14 && e == 1e3);
        let (g, e) = case_parameters(CaseId::One, 2.5, 2.5, ExponentBase::Alpha).unwrap();
        assert!((g - (-0.2 + 1e-4)).abs() < 1e-14 && e == 25.0);
        let (g, _) = case_parameters(CaseId::Two, 2.5, 2.5, ExponentBase::Beta).unwrap();
        assert!((g - (0.0025 + 1e-4)).abs() < 1e-15);
        assert!(case_parameters(CaseId::One, 2.0, 2.5, ExponentBase::Alpha).is_err());
    }

    #[test]
    fn velocity_values_and_divergence() {
        let m = case(2.5, 1e-4);
        assert_eq!(m.velocity([1.0, 0.0]), [0.0, -1.0]);
        for x in random_points(20, 1) {
            let d = m.sym_gradient(x);
            assert!(tensor::trace(&d).abs() < 1e-15);
            let h = 1e-6;
            let div = (m.velocity([x[0] + h, x[1]])[0] - m.velocity([x[0] - h, x[1]])[0]) / (2.0 * h)
                + (m.velocity([x[0], x[1] + h])[1] - m.velocity([x[0], x[1] - h])[1]) / (2.0 * h);
            assert!(div.abs() < 1e-6);
            assert!((tensor::norm(&d) - m.sym_gradient_norm(x)).abs() < 1e-12);
            let g = m.velocity_gradient(x);
            let s = tensor::sym(&g);
            assert!(tensor::norm(&tensor::sub(&s, &d)) < 1e-14);
        }
    }

    #[test]
    fn convection_and_pressure_gradient() {
        let m = case(3.0, 1e-4);
        let c = m.convection([1.0, 0.0]);
        assert!((c[0] + 1.0).abs() < 1e-15 && c[1].abs() < 1e-15);
        for x in random_points(10, 2) {
            // [grad v] v by differences of v
            let h = 1e-6;
            let v = m.velocity(x);
            let mut fd = [0.0; 2];
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let (vp, vm) = (m.velocity(xp), m.velocity(xm));
                for i in 0..2 {
                    fd[i] += (vp[i] - vm[i]) / (2.0 * h) * v[j];
                }
            }
            let c = m.convection(x);
            assert!((fd[0] - c[0]).abs() < 1e-8 && (fd[1] - c[1]).abs() < 1e-8);
        }
        let gq = m.pressure_gradient([0.0, 1.0]);
        assert!(gq[0].abs() < 1e-15 && (gq[1] - m.eta * m.gamma).abs() < 1e-12);
    }

    #[test]
    fn closed_form_divergence_matches_differences() {
        for &(p, d) in &[(2.25, 1e-4), (2.5, 1e-4), (3.0, 1e-4), (3.5, 1e-4), (2.0, 0.0)] {
            let m = ManufacturedCase::with_exponents(ConstitutiveParams::new(p, d).unwrap(), 0.5, 1.0).unwrap();
            for x in random_points(50, 3) {
                let a = m.div_stress(x);
                let b = m.div_stress_fd(x);
                let scale = 1.0 + a[0].abs().max(a[1].abs());
                assert!(((a[0] - b[0]).abs() + (a[1] - b[1]).abs()) / scale < 1e-5, "p={p} {a:?} {b:?}");
            }
        }
    }

    #[test]
    fn linear_law_reduces_to_half_laplacian() {
        let m = ManufacturedCase::with_exponents(ConstitutiveParams::new(2.0, 0.0).unwrap(), 0.5, 1.0).unwrap();
        for x in random_points(10, 4) {
            let h = 1e-4;
            let mut lap = [0.0; 2];
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let (vp, v0, vm) = (m.velocity(xp), m.velocity(x), m.velocity(xm));
                for i in 0..2 {
                    lap[i] += (vp[i] - 2.0 * v0[i] + vm[i]) / (h * h);
                }
            }
            let ds = m.div_stress(x);
            assert!((ds[0] - 0.5 * lap[0]).abs() < 1e-5 && (ds[1] - 0.5 * lap[1]).abs() < 1e-5);
        }
    }

    #[test]
    fn mean_offset_matches_independent_quadrature() {
        for &gamma in &[-0.333, -0.11, 0.0026, 0.6251, 1.2501] {
            let a = mean_offset_with_order(gamma, 8).unwrap();
            let b = mean_offset_with_order(gamma, 12).unwrap();
            assert!((a - b).abs() < 1e-9);
            // dyadic squares shrinking to the corner of [0,1]^2, Gauss on each
            let (x, w) = gauss_legendre::<f64>(12);
            let square = |x0: f64, y0: f64, s: f64| -> f64 {
                let mut t = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    for (yj, wj) in x.iter().zip(&w) {
                        let px = x0 + 0.5 * s * (xi + 1.0);
                        let py = y0 + 0.5 * s * (yj + 1.0);
                        t += 0.25 * s * s * wi * wj * px.hypot(py).powf(gamma);
                    }
                }
                t
            };
            let mut total = 0.0;
            let mut s = 1.0;
            for _ in 0..60 {
                let h = 0.5 * s;
                total += square(h, 0.0, h) + square(0.0, h, h) + square(h, h, h);
                s = h;
            }
            // symmetric: the mean over [0,1]^2 equals the mean over (-1,1)^2
            assert!((total - a).abs() < 1e-10, "gamma={gamma}: {total} vs {a}");
        }
        assert!(mean_offset_with_order(-2.5, 8).is_err());
    }

    #[test]
    fn body_force_modes_differ_by_convection() {
        let m = case(2.5, 1e-4);
        let x = [0.3, -0.4];
        let a = m.body_force(x, Mode::NavierStokes);
        let b = m.body_force(x, Mode::Stokes);
        let c = m.convection(x);
        assert!((a[0] - b[0] - c[0]).abs() < 1e-14 && (a[1] - b[1] - c[1]).abs() < 1e-14);
    }
}
