//! Refinement series: solve on each level and collect errors into an
//! [`EocReport`].

use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::constitutive::ConstitutiveParams;
use crate::error::{Error, Result};
use crate::errors::{f_error, pressure_error, EocReport};
use crate::femspace::{FemSpace, FieldKind};
use crate::manufactured::{CaseId, ExponentBase, ManufacturedCase, Mode};
use crate::mesh::build_mesh;
use crate::solver::{newton_solve, NewtonConfig, NewtonOutcome};
use crate::system::{DiscreteSystem, SystemConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: Vec<f64>,
    pub case: CaseId,
    pub mode: Mode,
    /// Refinement levels, ascending; level `i` has `8 * 4^i` triangles.
    pub levels: Vec<usize>,
    pub alpha: f64,
    pub delta: f64,
    pub degree: usize,
    pub case2_exponent_base: ExponentBase,
    /// Start each level from the previous level's solution.
    pub warm_start: bool,
    /// Record wall time per level (makes output nondeterministic).
    pub timing: bool,
    pub newton: NewtonConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: vec![2.5],
            case: CaseId::One,
            mode: Mode::NavierStokes,
            levels: (1..=5).collect(),
            alpha: 2.5,
            delta: 1e-4,
            degree: 1,
            case2_exponent_base: ExponentBase::Beta,
            warm_start: false,
            timing: false,
            newton: NewtonConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() || self.p.iter().any(|p| !(*p > 2.0)) {
            return Err(Error::InvalidParameter(format!("every p must exceed 2, got {:?}", self.p)));
        }
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "levels must be nonempty and strictly ascending, got {:?}",
                self.levels
            )));
        }
        if self.degree == 0 {
            return Err(Error::InvalidParameter("degree must be at least 1".into()));
        }
        if !(self.alpha > 0.0) || !(self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need alpha > 0 and delta >= 0, got {} and {}",
                self.alpha, self.delta
            )));
        }
        self.newton.validate()
    }

    pub fn manufactured_case(&self, p: f64) -> Result<ManufacturedCase> {
        let params = ConstitutiveParams::new(p, self.delta)?;
        ManufacturedCase::new(self.case, params, self.alpha, self.case2_exponent_base)
    }

    fn system(&self, p: f64, level: usize, case: &ManufacturedCase) -> Result<DiscreteSystem> {
        let space = FemSpace::new(build_mesh(level), self.degree)?;
        let config = SystemConfig {
            params: case.params,
            alpha: self.alpha,
            mode: self.mode,
        };
        debug_assert_eq!(case.params.p, p);
        DiscreteSystem::for_case(space, config, case)
    }
}

/// Solution of one level.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub system: DiscreteSystem,
    pub outcome: NewtonOutcome,
}

/// Assembles and solves a single level from `x0` (zero state if `None`).
pub fn solve_level(config: &RunConfig, p: f64, level: usize, x0: Option<Vec<f64>>) -> Result<LevelSolution> {
    let case = config.manufactured_case(p)?;
    let system = config.system(p, level, &case)?;
    let x0 = x0.unwrap_or_else(|| system.zero_state());
    let outcome = newton_solve(&system, x0, &config.newton, level)?;
    Ok(LevelSolution { system, outcome })
}

/// Prolongates a broken velocity from a red-refined parent mesh: children
/// of element `e` are `4 e .. 4 e + 3`. The pressure is interpolated.
fn prolongate(coarse: &DiscreteSystem, x: &[f64], fine: &DiscreteSystem) -> Result<Vec<f64>> {
    let (v, q, lambda) = coarse.split(x)?;
    let cs = coarse.space();
    let fs = fine.space();
    let vf = fs.l2_project(FieldKind::Vector, fs.degree, |e, xp| {
        let parent = e / 4;
        cs.evaluate_at(&v, parent, xp).expect("parent element exists")
    });
    let mut qc = vec![0.0; fs.pressure.num_dofs()];
    for e in 0..fs.num_elements() {
        let parent = e / 4;
        for &d in fs.pressure.element_dofs(e) {
            let xi = cs.mesh.geometry[parent].to_reference(fs.pressure.dof_points()[d]);
            qc[d] = cs.pressure.evaluate(&q, parent, xi)?;
        }
    }
    let qf = fs.pressure.from_coeffs(qc)?;
    Ok(fine.join(&vf, &qf, lambda))
}

/// Runs the refinement series for one `p`. Nonconvergence stops the series
/// and is recorded in the report.
pub fn run_series_for(config: &RunConfig, p: f64) -> Result<EocReport> {
    config.validate()?;
    let mut echo = serde_json::to_value(config)?;
    echo["p"] = serde_json::json!(p);
    let mut report = EocReport::new(p, echo);
    let case = config.manufactured_case(p)?;
    let mut prev: Option<(DiscreteSystem, Vec<f64>)> = None;
    for &level in &config.levels {
        let start = Instant::now();
        let system = config.system(p, level, &case)?;
        let x0 = match (&prev, config.warm_start) {
            (Some((s, x)), true) if level == s.space().mesh.level + 1 => Some(prolongate(s, x, &system)?),
            _ => None,
        }
        .unwrap_or_else(|| system.zero_state());
        let outcome = match newton_solve(&system, x0, &config.newton, level) {
            Ok(o) => o,
            Err(Error::NewtonDivergence { iterations, residual, .. }) => {
                let msg = format!("level {level}: Newton did not converge in {iterations} iterations (residual {residual:.3e})");
                warn!("p={p} {msg}");
                report.failure = Some(msg);
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        let (v, q, _) = system.split(&outcome.state)?;
        let e_q = pressure_error(system.space(), &q, &case);
        let e_f = f_error(&system, &v, &case)?;
        let seconds = config.timing.then(|| start.elapsed().as_secs_f64());
        info!(
            "p={p} level={level} h={:.4e} e_q={e_q:.6e} e_F={e_f:.6e} newton={}",
            system.space().h(),
            outcome.iterations()
        );
        report.push(level, system.space().h(), e_q, e_f, outcome.iterations(), seconds);
        prev = Some((system, outcome.state));
    }
    Ok(report)
}

/// One report per `p`, in the order given.
pub fn run_series(config: &RunConfig) -> Result<Vec<EocReport>> {
    config.validate()?;
    config.p.iter().map(|&p| run_series_for(config, p)).collect()
}
