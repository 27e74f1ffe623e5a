//! Relaxed fixed-point ("convex") iteration for the CCPB and PB problems.
//!
//! Each step solves the linear problem `eps^2 u'' = g(phi_m)` with the Robin
//! data and moves a fraction `s` toward its solution:
//! `phi_{m+1} = s u + (1 - s) phi_m`. Iteration stops once the undamped
//! correction `u - phi_m` is below `tol` in the sup norm.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::StepOperator;
use crate::grid::{trapz, Field, Grid};
use crate::ions::{BoundaryData, IonSystem, EXP_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Ccpb,
    Pb,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Ccpb => "ccpb",
            Model::Pb => "pb",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    Zero,
    /// Straight line through the two boundary potentials.
    Linear,
    Constant(f64),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Fixed relaxation; `None` uses `relax_c * eps^2` clipped to `[1e-6, 0.9]`.
    pub relax_s: Option<f64>,
    pub relax_c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub init: InitialGuess,
    /// Record the residual integral of every iterate.
    pub keep_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            relax_s: None,
            relax_c: 0.5,
            tol: 1e-6,
            max_iter: 2_000_000,
            init: InitialGuess::Linear,
            keep_history: true,
        }
    }
}

impl SolverConfig {
    pub fn relaxation(&self, eps: f64) -> Result<f64> {
        let s = match self.relax_s {
            Some(s) => s,
            None => {
                if !(self.relax_c > 0.0 && self.relax_c < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "relax_c must lie in (0, 1), got {}",
                        self.relax_c
                    )));
                }
                (self.relax_c * eps * eps).clamp(1e-6, 0.9)
            }
        };
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "relaxation must lie in (0, 1), got {s}"
            )));
        }
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: Field,
    pub model: Model,
    pub eps: f64,
    pub relax_s: f64,
    pub iterations: usize,
    pub final_delta_sup: f64,
    /// Discrete residual integral `int R(phi_m)` for `m = 0, 1, ...`: the sum
    /// of `A phi_m - b(phi_m)`. With Robin data it equals
    /// `(eps^2/eta)(phi(1) + phi(-1) - phi_plus - phi_minus)` plus the
    /// charge imbalance, so it vanishes identically for starts that already
    /// balance the two boundary values.
    pub residual_integrals: Vec<f64>,
    pub first_integral_constant: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn phi_at(&self, x: f64) -> f64 {
        self.field.value_at(x)
    }

    /// Converged report or a [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                delta: self.final_delta_sup,
            })
        }
    }
}

/// Nodal Boltzmann factors `e^{z phi}` for every species, computed from a
/// single exponential per node when valences are small integers.
struct Boltzmann {
    up: Vec<f64>,
    down: Vec<f64>,
    term: Vec<f64>,
}

impl Boltzmann {
    fn new(n: usize) -> Self {
        Self {
            up: vec![0.0; n],
            down: vec![0.0; n],
            term: vec![0.0; n],
        }
    }

    fn load(&mut self, sys: &IonSystem, phi: &[f64]) -> Result<()> {
        let zmax = sys
            .anions()
            .iter()
            .chain(sys.cations())
            .fold(0.0f64, |m, s| m.max(s.valence));
        let sup = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(zmax * sup <= EXP_CAP) {
            return Err(Error::Overflow {
                exponent: zmax * sup,
                cap: EXP_CAP,
            });
        }
        for ((u, d), &p) in self.up.iter_mut().zip(self.down.iter_mut()).zip(phi) {
            *u = p.exp();
            *d = 1.0 / *u;
        }
        Ok(())
    }

    /// Fills `term` with `e^{sign * valence * phi}`.
    fn fill(&mut self, valence: f64, sign: f64, phi: &[f64]) {
        let base = if sign > 0.0 { &self.up } else { &self.down };
        if valence.fract() == 0.0 && valence <= 8.0 {
            let k = valence as i32;
            for (t, b) in self.term.iter_mut().zip(base) {
                *t = b.powi(k);
            }
        } else {
            for (t, &p) in self.term.iter_mut().zip(phi) {
                *t = (sign * valence * p).exp();
            }
        }
    }
}

fn rhs_into(
    model: Model,
    sys: &IonSystem,
    grid: &Grid,
    phi: &[f64],
    bz: &mut Boltzmann,
    out: &mut [f64],
) -> Result<()> {
    bz.load(sys, phi)?;
    out.iter_mut().for_each(|v| *v = 0.0);
    let species = sys
        .anions()
        .iter()
        .map(|s| (s, 1.0))
        .chain(sys.cations().iter().map(|s| (s, -1.0)));
    for (sp, sign) in species {
        bz.fill(sp.valence, sign, phi);
        let coef = match model {
            Model::Ccpb => sign * sp.valence * sp.concentration / trapz(grid, &bz.term),
            Model::Pb => 0.5 * sign * sp.valence * sp.concentration,
        };
        for (o, t) in out.iter_mut().zip(&bz.term) {
            *o += coef * t;
        }
    }
    Ok(())
}

/// Nodal values of the CCPB right-hand side.
pub fn ccpb_rhs(field: &Field, sys: &IonSystem) -> Result<Vec<f64>> {
    model_rhs(field, sys, Model::Ccpb)
}

/// Nodal values of `f'(phi) / 2`.
pub fn pb_rhs(field: &Field, sys: &IonSystem) -> Result<Vec<f64>> {
    model_rhs(field, sys, Model::Pb)
}

pub fn model_rhs(field: &Field, sys: &IonSystem, model: Model) -> Result<Vec<f64>> {
    let n = field.grid().len();
    let mut out = vec![0.0; n];
    rhs_into(
        model,
        sys,
        field.grid(),
        field.values(),
        &mut Boltzmann::new(n),
        &mut out,
    )?;
    Ok(out)
}

/// One relaxed step from `field`.
pub fn convex_step(
    field: &Field,
    sys: &IonSystem,
    bd: &BoundaryData,
    eps: f64,
    cfg: &SolverConfig,
    model: Model,
) -> Result<Field> {
    let s = cfg.relaxation(eps)?;
    let op = StepOperator::new(field.grid(), eps, bd)?;
    let g = model_rhs(field, sys, model)?;
    let half = op.solve(&op.load(&g));
    let next = half
        .iter()
        .zip(field.values())
        .map(|(h, p)| s * h + (1.0 - s) * p)
        .collect();
    Field::new(field.grid_arc().clone(), next)
}

/// Discrete residual `b(phi) - A phi` of the nonlinear system at `field`.
pub fn discrete_residual(
    field: &Field,
    sys: &IonSystem,
    bd: &BoundaryData,
    eps: f64,
    model: Model,
) -> Result<Vec<f64>> {
    let op = StepOperator::new(field.grid(), eps, bd)?;
    let g = model_rhs(field, sys, model)?;
    let b = op.load(&g);
    let ax = op.apply(field.values());
    Ok(b.iter().zip(&ax).map(|(b, a)| b - a).collect())
}

/// Divergence threshold on the sup norm of an iterate.
pub fn divergence_limit(bd: &BoundaryData) -> f64 {
    10.0 * (bd.phi_plus.abs() + bd.phi_minus.abs() + 10.0)
}

fn initial_values(init: &InitialGuess, grid: &Arc<Grid>, bd: &BoundaryData) -> Result<Vec<f64>> {
    Ok(match init {
        InitialGuess::Zero => vec![0.0; grid.len()],
        InitialGuess::Constant(v) => vec![*v; grid.len()],
        InitialGuess::Linear => Field::linear_interpolant(grid.clone(), bd).into_values(),
        InitialGuess::Values(v) => Field::new(grid.clone(), v.clone())?.into_values(),
    })
}

/// Runs the relaxed iteration to convergence or `max_iter`.
///
/// Running out of iterations is reported through `converged = false`;
/// blow-up past [`divergence_limit`] and exponent overflow are errors.
pub fn solve(
    sys: &IonSystem,
    bd: &BoundaryData,
    eps: f64,
    grid: Arc<Grid>,
    cfg: &SolverConfig,
    model: Model,
) -> Result<SolveReport> {
    cfg.validate()?;
    let s = cfg.relaxation(eps)?;
    let op = StepOperator::new(&grid, eps, bd)?;
    let n = grid.len();
    let limit = divergence_limit(bd);

    let mut phi = initial_values(&cfg.init, &grid, bd)?;
    let mut g = vec![0.0; n];
    let mut bz = Boltzmann::new(n);
    let mut history = Vec::new();
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iter {
        rhs_into(model, sys, &grid, &phi, &mut bz, &mut g)?;
        let load = op.load(&g);
        if cfg.keep_history {
            let ax = op.apply(&phi);
            history.push(load.iter().zip(&ax).map(|(b, a)| a - b).sum::<f64>());
        }
        let half = op.solve(&load);
        delta = 0.0;
        let mut sup = 0.0f64;
        for (p, h) in phi.iter_mut().zip(&half) {
            delta = f64::max(delta, (h - *p).abs());
            *p = s * h + (1.0 - s) * *p;
            sup = sup.max(p.abs());
        }
        iterations += 1;
        if !(sup <= limit) {
            return Err(Error::Diverged {
                iteration: iterations,
                sup_norm: sup,
                limit,
            });
        }
        if delta <= cfg.tol {
            converged = true;
            break;
        }
    }

    let field = Field::new(grid, phi)?;
    let first_integral_constant = median(&first_integral_profile(&field, sys, eps, model)?);
    Ok(SolveReport {
        field,
        model,
        eps,
        relax_s: s,
        iterations,
        final_delta_sup: delta,
        residual_integrals: history,
        first_integral_constant,
        converged,
    })
}

/// The first-integral expression at each interior node.
///
/// CCPB: `(eps^2/2) phi'^2 - sum alpha e^{a phi}/int e^{a phi} - sum beta e^{-b phi}/int e^{-b phi}`.
/// PB: `(eps^2/2) phi'^2 - f(phi)/2`.
/// For an exact solution both are constant in `x`.
pub fn first_integral_profile(
    field: &Field,
    sys: &IonSystem,
    eps: f64,
    model: Model,
) -> Result<Vec<f64>> {
    let phi = field.values();
    let n = phi.len();
    let grid = field.grid();
    let mut bz = Boltzmann::new(n);
    bz.load(sys, phi)?;
    let mut pot = vec![0.0; n];
    let species = sys
        .anions()
        .iter()
        .map(|s| (s, 1.0))
        .chain(sys.cations().iter().map(|s| (s, -1.0)));
    for (sp, sign) in species {
        bz.fill(sp.valence, sign, phi);
        let coef = match model {
            Model::Ccpb => sp.concentration / trapz(grid, &bz.term),
            Model::Pb => 0.5 * sp.concentration,
        };
        for (p, t) in pot.iter_mut().zip(&bz.term) {
            *p += coef * t;
        }
    }
    let d = field.derivative();
    Ok((1..n - 1)
        .map(|i| 0.5 * eps * eps * d[i] * d[i] - pot[i])
        .collect())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// The starts used by [`uniqueness_probe`], in order.
pub fn probe_starts(grid: &Grid, bd: &BoundaryData, seed: u64) -> Vec<InitialGuess> {
    let bound = bd.phi_plus.abs().max(bd.phi_minus.abs()).max(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = (0..grid.len())
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    vec![
        InitialGuess::Zero,
        InitialGuess::Linear,
        InitialGuess::Constant(0.5),
        InitialGuess::Constant(-0.5),
        InitialGuess::Values(random),
    ]
}

pub const PROBE_SEED: u64 = 0x5eed_cc9b;

/// Solves from `n_starts` different initial fields and returns the largest
/// pairwise sup distance between the converged solutions.
pub fn uniqueness_probe(
    sys: &IonSystem,
    bd: &BoundaryData,
    eps: f64,
    grid: Arc<Grid>,
    cfg: &SolverConfig,
    model: Model,
    n_starts: usize,
) -> Result<f64> {
    uniqueness_probe_with(Execution::default(), sys, bd, eps, grid, cfg, model, n_starts)
}

#[allow(clippy::too_many_arguments)]
pub fn uniqueness_probe_with(
    exec: Execution,
    sys: &IonSystem,
    bd: &BoundaryData,
    eps: f64,
    grid: Arc<Grid>,
    cfg: &SolverConfig,
    model: Model,
    n_starts: usize,
) -> Result<f64> {
    let starts = probe_starts(&grid, bd, PROBE_SEED);
    if n_starts < 2 || n_starts > starts.len() {
        return Err(Error::InvalidParameter(format!(
            "n_starts must be between 2 and {}, got {n_starts}",
            starts.len()
        )));
    }
    let fields = exec.try_map(&starts[..n_starts], |init| {
        let cfg = SolverConfig {
            init: init.clone(),
            keep_history: false,
            ..cfg.clone()
        };
        solve(sys, bd, eps, grid.clone(), &cfg, model)?
            .require_converged()
            .map(|r| r.field.into_values())
    })?;
    let mut dist = 0.0f64;
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            for (a, b) in fields[i].iter().zip(&fields[j]) {
                dist = dist.max((a - b).abs());
            }
        }
    }
    Ok(dist)
}

/// One independent solve in a batch.
#[derive(Debug, Clone)]
pub struct SolveJob {
    pub sys: IonSystem,
    pub bd: BoundaryData,
    pub eps: f64,
    pub grid: Arc<Grid>,
    pub cfg: SolverConfig,
    pub model: Model,
}

impl SolveJob {
    pub fn run(&self) -> Result<SolveReport> {
        solve(&self.sys, &self.bd, self.eps, self.grid.clone(), &self.cfg, self.model)
    }
}

/// Runs every job, in parallel when `exec` allows, keeping job order.
pub fn solve_batch(exec: Execution, jobs: &[SolveJob]) -> Vec<Result<SolveReport>> {
    exec.map(jobs, SolveJob::run)
}
