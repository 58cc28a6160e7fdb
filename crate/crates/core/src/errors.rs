//! Discretization errors against the manufactured solution, convergence
//! orders and the per-level report.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::femspace::{component_values, BrokenField, CellQuadrature, ContinuousField, FemSpace};
use crate::manufactured::ManufacturedCase;
use crate::system::DiscreteSystem;
use crate::tensor::{self, Mat2};

/// `||q_h - q||_{p'}` with the graded rule on elements at the singular point.
pub fn pressure_error(space: &FemSpace, qh: &ContinuousField, case: &ManufacturedCase) -> f64 {
    let pc = case.params.conjugate_exponent();
    lp_error(space, pc, |e, q, quad| {
        let x = space.quadrature_point(e, quad, q);
        let v = space.pressure.value_from_tab(qh, e, &quad.lagrange.values[q]);
        v - case.pressure(x)
    })
}

/// `||F(D v_h) - F(D v)||_2`, with `D v_h` the symmetric DG gradient
/// including the lifting of the boundary datum stored in `system`.
pub fn f_error(system: &DiscreteSystem, vh: &BrokenField, case: &ManufacturedCase) -> Result<f64> {
    let space = system.space();
    let l = system.op().dg_gradient(space, vh, Some(system.datum()))?;
    Ok(f_error_of_gradient(space, &l, case))
}

/// `||F(sym L) - F(D v)||_2` for a materialized tensor field `L`.
pub fn f_error_of_gradient(space: &FemSpace, l: &BrokenField, case: &ManufacturedCase) -> f64 {
    lp_error(space, 2.0, |e, q, quad| {
        let x = space.quadrature_point(e, quad, q);
        let a = component_values(l, e, &quad.modal.values[q]);
        let a: Mat2<f64> = [[a[0], a[1]], [a[2], a[3]]];
        let fa = case.params.f_map(&a);
        tensor::norm(&tensor::sub(&fa, &case.f_of_sym_gradient(x)))
    })
}

fn lp_error<F>(space: &FemSpace, p: f64, mut diff: F) -> f64
where
    F: FnMut(usize, usize, &CellQuadrature) -> f64,
{
    let mut s = 0.0;
    for e in 0..space.num_elements() {
        let quad = space.accurate_quadrature(e);
        let det = space.mesh.geometry[e].det;
        for (q, &w) in quad.rule.weights.iter().enumerate() {
            s += w * det * diff(e, q, quad).abs().powf(p);
        }
    }
    s.powf(1.0 / p)
}

/// `EOC_i = log(e_i / e_{i-1}) / log(h_i / h_{i-1})`, one value per
/// consecutive pair.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() {
        return Err(Error::DimensionMismatch {
            what: "EOC inputs",
            expected: errors.len(),
            got: hs.len(),
        });
    }
    if errors.len() < 2 {
        return Err(Error::InvalidParameter("EOC needs at least two levels".into()));
    }
    if let Some(x) = errors.iter().chain(hs).find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("EOC inputs must be positive, got {x}")));
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| (e[1] / e[0]).ln() / (h[1] / h[0]).ln())
        .collect())
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_rate(errors: &[f64], hs: &[f64]) -> Result<f64> {
    eoc(errors, hs)?;
    let n = errors.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub e_q: f64,
    pub eoc_q: Option<f64>,
    pub e_f: f64,
    pub eoc_f: Option<f64>,
    pub newton_iters: usize,
    /// Wall time of assembly and solve; left out for byte-stable output.
    pub seconds: Option<f64>,
}

/// Report of one refinement series at fixed `p`. `config` is echoed
/// verbatim into the JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EocReport {
    pub p: f64,
    pub rows: Vec<LevelRow>,
    pub config: serde_json::Value,
    /// Set when a level failed to converge; rows stop before it.
    pub failure: Option<String>,
}

impl EocReport {
    pub fn new(p: f64, config: serde_json::Value) -> Self {
        Self {
            p,
            rows: Vec::new(),
            config,
            failure: None,
        }
    }

    /// Appends a level and fills in its EOC values from the previous row.
    pub fn push(&mut self, level: usize, h: f64, e_q: f64, e_f: f64, newton_iters: usize, seconds: Option<f64>) {
        let (eoc_q, eoc_f) = match self.rows.last() {
            Some(prev) => (
                eoc(&[prev.e_q, e_q], &[prev.h, h]).ok().map(|v| v[0]),
                eoc(&[prev.e_f, e_f], &[prev.h, h]).ok().map(|v| v[0]),
            ),
            None => (None, None),
        };
        self.rows.push(LevelRow {
            level,
            h,
            e_q,
            eoc_q,
            e_f,
            eoc_f,
            newton_iters,
            seconds,
        });
    }

    pub fn pressure_eocs(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.eoc_q).collect()
    }

    pub fn converged(&self) -> bool {
        self.failure.is_none()
    }
}

pub const CSV_HEADER: &str = "level,h,e_q,eoc_q,e_F,eoc_F,newton_iters,seconds";

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.6e}"))
}

/// Writes the rows of all reports as CSV with a leading `p` column.
pub fn write_csv<W: Write>(reports: &[EocReport], mut w: W) -> Result<()> {
    writeln!(w, "p,{CSV_HEADER}")?;
    for rep in reports {
        for r in &rep.rows {
            writeln!(
                w,
                "{},{},{:.6e},{:.6e},{},{:.6e},{},{},{}",
                rep.p,
                r.level,
                r.h,
                r.e_q,
                opt(r.eoc_q),
                r.e_f,
                opt(r.eoc_f),
                r.newton_iters,
                r.seconds.map_or_else(String::new, |s| format!("{s:.3}")),
            )?;
        }
    }
    Ok(())
}

pub fn write_json<W: Write>(reports: &[EocReport], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, reports)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::ConstitutiveParams;
    use crate::manufactured::{CaseId, ExponentBase};
    use crate::mesh::build_mesh;

    #[test]
    fn eoc_examples() {
        let v = eoc(&[1.0, 0.5, 0.25], &[1.0, 0.5, 0.25]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        let v = eoc(&[1.0, 0.25], &[1.0, 0.5]).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14);
        let v = eoc(&[0.3, 0.3 * 2f64.powf(-1.175)], &[0.2, 0.1]).unwrap();
        assert!((v[0] - 1.175).abs() < 1e-12);
        assert!(eoc(&[1.0, 0.0], &[1.0, 0.5]).is_err());
        assert!(eoc(&[1.0], &[1.0]).is_err());
        assert!(eoc(&[1.0, 2.0], &[1.0]).is_err());
        // invariant under scaling the errors
        let s = eoc(&[7.0, 7.0 * 2f64.powf(-1.175)], &[0.2, 0.1]).unwrap();
        assert!((s[0] - v[0]).abs() < 1e-12);
        assert!((fitted_rate(&[1.0, 0.25, 0.0625], &[1.0, 0.5, 0.25]).unwrap() - 2.0).abs() < 1e-12);
    }

    fn case1() -> ManufacturedCase {
        let params = ConstitutiveParams::new(2.5, 1e-4).unwrap();
        ManufacturedCase::new(CaseId::One, params, 2.5, ExponentBase::Alpha).unwrap()
    }

    #[test]
    fn constant_shift_error_is_shift_times_area_power() {
        let case = case1();
        let space = FemSpace::new(build_mesh(2), 1).unwrap().with_singular_point([0.0, 0.0]);
        // eta = 0 makes the exact pressure vanish
        let lin = ManufacturedCase { eta: 0.0, mean_offset: 0.0, ..case.clone() };
        let qh = space.pressure.interpolate(|_| 0.3);
        let pc = case.params.conjugate_exponent();
        let e = pressure_error(&space, &qh, &lin);
        assert!((e - 0.3 * 4f64.powf(1.0 / pc)).abs() < 1e-12, "{e}");
    }

    #[test]
    fn interpolated_pressure_error_decreases() {
        let case = case1();
        let mut prev = f64::INFINITY;
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for level in 1..=4 {
            let space = FemSpace::new(build_mesh(level), 1).unwrap().with_singular_point([0.0, 0.0]);
            let qh = space.pressure.interpolate(|x| if x == [0.0, 0.0] { -case.eta * case.mean_offset } else { case.pressure(x) });
            let e = pressure_error(&space, &qh, &case);
            assert!(e < prev);
            prev = e;
            errs.push(e);
            hs.push(space.h());
        }
        let rate = fitted_rate(&errs[1..], &hs[1..]).unwrap();
        let pc = case.params.conjugate_exponent();
        let expected = (case.gamma + 2.0 / pc).min(2.0);
        assert!(rate >= expected - 0.05, "rate {rate} vs {expected}");
    }

    #[test]
    fn report_fills_eocs_and_writes() {
        let mut r = EocReport::new(2.5, serde_json::json!({"case": 1}));
        r.push(0, 1.0, 1.0, 2.0, 3, None);
        r.push(1, 0.5, 0.5, 0.5, 4, Some(1.25));
        assert_eq!(r.rows[0].eoc_q, None);
        assert!((r.rows[1].eoc_q.unwrap() - 1.0).abs() < 1e-14);
        assert!((r.rows[1].eoc_f.unwrap() - 2.0).abs() < 1e-14);
        let mut buf = Vec::new();
        write_csv(&[r.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p,level,h,e_q,eoc_q,e_F,eoc_F,newton_iters,seconds");
        assert!(lines[1].ends_with(",3,"));
        assert!(lines[2].ends_with(",4,1.250"));
        let mut buf = Vec::new();
        write_json(&[r.clone()], &mut buf).unwrap();
        let back: Vec<EocReport> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back[0], r);
    }
}
