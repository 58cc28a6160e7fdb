//! Newton iteration with optional backtracking on the residual norm.

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::linalg::linear_solve;
use crate::linalg::{norm2, CsrMatrix};
use crate::system::DiscreteSystem;

/// A square nonlinear system `R(x) = 0` with an (approximate) Jacobian.
pub trait NonlinearSystem {
    fn dim(&self) -> usize;
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn tangent(&self, x: &[f64]) -> Result<CsrMatrix>;
}

impl NonlinearSystem for DiscreteSystem {
    fn dim(&self) -> usize {
        self.num_dofs()
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.assemble_residual(x)
    }

    fn tangent(&self, x: &[f64]) -> Result<CsrMatrix> {
        self.assemble_tangent(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_iterations: usize,
    /// Backtracking by halving; `false` gives plain Newton. When no
    /// halving decreases the residual the full step is taken and flagged.
    pub damping: bool,
    pub max_halvings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol_abs: 1e-8,
            tol_rel: 1e-10,
            max_iterations: 50,
            damping: true,
            max_halvings: 10,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_abs > 0.0 && self.tol_rel > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Newton tolerances must be positive (abs {}, rel {})",
                self.tol_abs, self.tol_rel
            )));
        }
        Ok(())
    }
}

/// One row of the iteration log. Iteration 0 is the initial state and has
/// damping 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub level: usize,
    pub iteration: usize,
    pub residual: f64,
    pub damping: f64,
    /// The line search found no decrease and the full step was taken.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub state: Vec<f64>,
    pub log: Vec<IterationRecord>,
}

impl NewtonOutcome {
    /// Number of Newton steps taken.
    pub fn iterations(&self) -> usize {
        self.log.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.log.last().map_or(f64::NAN, |r| r.residual)
    }
}

/// Solves `R(x) = 0` from `x0`. `level` only tags the log.
pub fn newton_solve<S: NonlinearSystem + ?Sized>(
    system: &S,
    x0: Vec<f64>,
    config: &NewtonConfig,
    level: usize,
) -> Result<NewtonOutcome> {
    config.validate()?;
    if x0.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            what: "initial state",
            expected: system.dim(),
            got: x0.len(),
        });
    }
    let mut x = x0;
    let mut r = system.residual(&x)?;
    let mut rn = norm2(&r);
    let r0 = rn;
    let record = |iteration, residual, damping, fallback| {
        info!("level={level} iteration={iteration} residual={residual:.6e} damping={damping}");
        IterationRecord {
            level,
            iteration,
            residual,
            damping,
            fallback,
        }
    };
    let mut log = vec![record(0, rn, 1.0, false)];
    let converged = |rn: f64| rn <= config.tol_abs || rn <= config.tol_rel * r0;
    for it in 1..=config.max_iterations {
        if converged(rn) {
            return Ok(NewtonOutcome { state: x, log });
        }
        let jac = system.tangent(&x)?;
        let step = linear_solve(&jac, &r)?;
        let (mut t, mut fallback) = (1.0, false);
        let trial_at = |t: f64| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a - t * d).collect();
            let rt = system.residual(&trial)?;
            let n = norm2(&rt);
            Ok((trial, rt, n))
        };
        let (mut trial, mut rt, mut n) = trial_at(t)?;
        if config.damping {
            let mut halvings = 0;
            while !(n < rn) && halvings < config.max_halvings {
                t *= 0.5;
                halvings += 1;
                (trial, rt, n) = trial_at(t)?;
            }
            if !(n < rn) {
                // no decrease anywhere on the search path: take the full step
                warn!("level={level} iteration={it}: line search failed, taking the full Newton step");
                t = 1.0;
                fallback = true;
                (trial, rt, n) = trial_at(t)?;
            }
        }
        if !n.is_finite() {
            log.push(record(it, n, t, fallback));
            return Err(Error::NewtonDivergence {
                iterations: it,
                residual: n,
                log,
            });
        }
        x = trial;
        r = rt;
        rn = n;
        log.push(record(it, rn, t, fallback));
    }
    if converged(rn) {
        return Ok(NewtonOutcome { state: x, log });
    }
    Err(Error::NewtonDivergence {
        iterations: config.max_iterations,
        residual: rn,
        log,
    })
}
