use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duhamel::{graded_times, uniform_times, Timeline};
use crate::error::{Error, Result};
use crate::exponents::{Regime, Theorem1Family};
use crate::field::{divergence, gradient, Shape};
use crate::monitor::{delta_u, node_norms, spacetime_norm, state_norms, NormContext, NormLedger, SpaceTimeNormSpec};
use crate::scalar::Real;

use super::data::{eta, InitialData, SmallnessReport};
use super::stokes::{linear_stokes_solve_with, StokesOptions};
use super::transport::{transport_step_with, TransportOptions};
use super::viscosity::ViscosityLaw;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub horizon: f64,
    pub intervals: usize,
    pub graded: bool,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { horizon: 4.0, intervals: 32, graded: true }
    }
}

impl TimeSpec {
    pub fn nodes(&self) -> Result<Vec<f64>> {
        if self.graded {
            graded_times(self.horizon, self.intervals)
        } else {
            uniform_times(self.horizon, self.intervals)
        }
    }
}

/// Surrogate constants of `λ = (4C)^{4r}(C̄₂‖ū^d‖ + C̄₃)^{2r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConstants {
    pub c: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for LambdaConstants {
    fn default() -> Self {
        Self { c: 0.05, c2: 1.0, c3: 0.5 }
    }
}

pub fn lambda_recipe(ud_besov: f64, r: f64, k: &LambdaConstants) -> f64 {
    (4.0 * k.c).powf(4.0 * r) * (k.c2 * ud_besov + k.c3).powf(2.0 * r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub regime: Regime,
    pub p: f64,
    pub r: f64,
    /// Diffusivity added to the transport equation.
    pub eps: f64,
    /// Damping parameter; `None` applies the recipe.
    pub lambda: Option<f64>,
    pub lambda_constants: LambdaConstants,
    pub c_r: f64,
    pub c_0: f64,
    pub time: TimeSpec,
    pub tol_outer: f64,
    pub max_outer: usize,
    pub stokes: StokesOptions,
    pub transport: TransportOptions,
    /// Regularity shift of the increment norms.
    pub shift: f64,
    /// Relative slack of the maximum principle; `None` is `1e−6` for
    /// `eps > 0` and `1e−3` otherwise.
    pub max_principle_slack: Option<f64>,
    /// `δU` above this is treated as blow-up.
    pub blowup: f64,
    /// Number of trailing iterates kept with their fields.
    pub keep_states: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            regime: Regime::Theorem1,
            p: 1.2,
            r: 2.0,
            eps: 0.1,
            lambda: None,
            lambda_constants: LambdaConstants::default(),
            c_r: 1.0,
            c_0: 0.05,
            time: TimeSpec::default(),
            tol_outer: 1e-7,
            max_outer: 40,
            stokes: StokesOptions::default(),
            transport: TransportOptions::default(),
            shift: 0.1,
            max_principle_slack: None,
            blowup: 1e8,
            keep_states: 2,
        }
    }
}

impl SolverConfig {
    pub fn slack(&self) -> f64 {
        self.max_principle_slack.unwrap_or(if self.eps > 0.0 { 1e-6 } else { 1e-3 })
    }

    pub fn context(&self, dim: usize) -> Result<NormContext> {
        NormContext::new(self.regime, dim, self.p, self.r)?.with_shift(self.shift)
    }

    /// Every violated requirement, evaluated.
    pub fn problems(&self, dim: usize) -> Vec<String> {
        let mut errs = Vec::new();
        let adm = crate::exponents::admissibility(self.regime, dim, self.p, self.r);
        errs.extend(adm.violations());
        if !(self.eps >= 0.0) {
            errs.push(format!("eps = {} must be >= 0", self.eps));
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) || !l.is_finite() {
                errs.push(format!("lambda = {l} must be finite and >= 0"));
            }
        }
        if !(self.tol_outer > 0.0) {
            errs.push(format!("tol_outer = {} must be > 0", self.tol_outer));
        }
        if self.max_outer == 0 {
            errs.push("max_outer must be >= 1".into());
        }
        if !(self.stokes.tol > 0.0) || self.stokes.max_iter == 0 {
            errs.push("stokes tolerance and iteration cap must be positive".into());
        }
        if !(self.transport.cfl > 0.0 && self.transport.cfl <= 1.0) || self.transport.max_substeps == 0 {
            errs.push(format!("transport cfl {} must lie in (0, 1]", self.transport.cfl));
        }
        if !(self.time.horizon > 0.0) || self.time.intervals == 0 {
            errs.push(format!("time grid needs T > 0 and M > 0 (T={}, M={})", self.time.horizon, self.time.intervals));
        }
        let lim = (1.0 / (2.0 * self.r)).min(1.0 - 1.0 / self.r);
        if !(self.shift > 0.0 && self.shift < lim) {
            errs.push(format!("shift {} must lie in (0, {lim:.6})", self.shift));
        }
        if self.keep_states == 0 {
            errs.push("keep_states must be >= 1".into());
        }
        errs
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let e = self.problems(dim);
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Inadmissible(e))
        }
    }
}

/// One Picard iterate `(θ_n, u_n, Π_n)` and its monitors.
#[derive(Clone, Debug)]
pub struct SolverState<T: Real> {
    pub n: usize,
    pub theta: Timeline<T>,
    pub u: Timeline<T>,
    pub pi: Timeline<T>,
    pub norm_ledger: NormLedger,
    /// Undamped `δU` against the previous iterate.
    pub delta_u: Option<f64>,
}

impl<T: Real> SolverState<T> {
    pub fn zero(times: Vec<f64>, grid: &crate::field::Grid<T>) -> Result<Self> {
        Ok(Self {
            n: 0,
            theta: Timeline::zeros(times.clone(), grid, Shape::Scalar)?,
            u: Timeline::zeros(times.clone(), grid, Shape::Vector)?,
            pi: Timeline::zeros(times, grid, Shape::Scalar)?,
            norm_ledger: NormLedger::new(),
            delta_u: None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIterations,
    Diverged,
}

impl RunStatus {
    pub fn tag(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::Diverged => "diverged",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceHistory {
    pub status: RunStatus,
    pub iterations: usize,
    pub lambda: f64,
    pub eps: f64,
    pub eta: SmallnessReport,
    /// Undamped `δU_n` for `n = 0, 1, …`; drives the stopping test.
    pub delta_u: Vec<f64>,
    /// `δU_{n,λ}` with the damping built from `u_n^d`.
    pub delta_u_damped: Vec<f64>,
    /// `δU_n / δU_{n−1}`, undamped.
    pub ratios: Vec<f64>,
    /// `‖δU_n(·)‖_{L^{4/ε}(0,T)}` and `‖δU_n(·)‖_{L^{2/ε}(0,T)}` with `ε` the shift.
    pub gronwall_4: Vec<f64>,
    pub gronwall_2: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    /// Largest undamped inner contraction factor past the first step.
    pub inner_max_factor: Vec<f64>,
    /// Same in the `h_λ`-damped norm.
    pub inner_max_damped_factor: Vec<f64>,
    pub transport_substeps: Vec<usize>,
    /// `max_t ‖θ_n(t)‖_∞` per iterate, refined between lattice points.
    pub theta_sup: Vec<f64>,
    pub theta_bound: f64,
    pub max_principle_slack: f64,
    pub max_principle_ok: bool,
    /// Largest `‖div u‖₂/‖∇u‖₂` over nodes and iterates.
    pub max_divergence: f64,
    pub ledgers: Vec<NormLedger>,
    pub message: Option<String>,
}

#[derive(Clone, Debug)]
pub struct PicardRun<T: Real> {
    /// Trailing iterates, oldest first.
    pub states: Vec<SolverState<T>>,
    pub history: ConvergenceHistory,
}

impl<T: Real> PicardRun<T> {
    pub fn final_state(&self) -> &SolverState<T> {
        self.states.last().expect("at least the initial state")
    }
}

/// `max_t ‖θ(t)‖_∞`, refining only near the bound.
pub fn timeline_sup<T: Real>(theta: &Timeline<T>, bound: f64) -> Result<f64> {
    let v = theta
        .snapshots()
        .par_iter()
        .map(|s| {
            let coarse = s.to_physical().lp_norm(f64::INFINITY)?.to64();
            if coarse >= 0.5 * bound {
                Ok(s.sup_norm_refined()?.to64().max(coarse))
            } else {
                Ok(coarse)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

fn max_relative_divergence<T: Real>(u: &Timeline<T>) -> Result<f64> {
    let v = u
        .snapshots()
        .par_iter()
        .map(|s| {
            let div = divergence(s)?.energy().to64().sqrt();
            let grad = gradient(s)?.energy().to64().sqrt();
            Ok(if grad == 0.0 { div } else { div / grad })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

fn is_breakdown(e: &Error) -> bool {
    matches!(e, Error::CflFailure { .. } | Error::NonFinite(_) | Error::InnerStagnation { .. })
}

/// Outer iteration from `(0, 0, 0)`: transport, linear Stokes solve and
/// pressure recovery until `δU_n < tol_outer` or `max_outer` iterates.
pub fn picard_solve<T: Real>(data: &InitialData<T>, law: &ViscosityLaw, cfg: &SolverConfig) -> Result<PicardRun<T>> {
    let grid = data.grid().clone();
    let dim = grid.dim();
    cfg.validate(dim)?;
    law.validate()?;
    let ctx = cfg.context(dim)?;
    let eta_report = eta(data, law, cfg.p, cfg.r, cfg.regime, cfg.c_r, cfg.c_0)?;
    if !eta_report.below_threshold {
        log::warn!("smallness eta = {:.4e} exceeds c0 = {:.4e}", eta_report.eta, eta_report.c_0);
    }
    let lambda = cfg.lambda.unwrap_or_else(|| lambda_recipe(eta_report.ud_besov, cfg.r, &cfg.lambda_constants));
    let times = cfg.time.nodes()?;
    let slack = cfg.slack();
    let bound = data.theta_sup * (1.0 + slack);
    let mut history = ConvergenceHistory {
        status: RunStatus::MaxIterations,
        iterations: 0,
        lambda,
        eps: cfg.eps,
        eta: eta_report,
        delta_u: Vec::new(),
        delta_u_damped: Vec::new(),
        ratios: Vec::new(),
        gronwall_4: Vec::new(),
        gronwall_2: Vec::new(),
        inner_iterations: Vec::new(),
        inner_max_factor: Vec::new(),
        inner_max_damped_factor: Vec::new(),
        transport_substeps: Vec::new(),
        theta_sup: Vec::new(),
        theta_bound: data.theta_sup,
        max_principle_slack: slack,
        max_principle_ok: true,
        max_divergence: 0.0,
        ledgers: Vec::new(),
        message: None,
    };
    let mut states = vec![SolverState::zero(times.clone(), &grid)?];
    for n in 0..cfg.max_outer {
        let prev = states.last().expect("nonempty");
        let step = (|| -> Result<_> {
            let (theta, ts) = transport_step_with(&data.theta0, &prev.u, cfg.eps, &cfg.transport)?;
            let out = linear_stokes_solve_with(&prev.u, &theta, data, law, lambda, &ctx, &cfg.stokes, Some(&prev.u))?;
            Ok((theta, ts, out))
        })();
        let (theta, ts, out) = match step {
            Ok(v) => v,
            Err(e) if n > 0 && is_breakdown(&e) => {
                history.status = RunStatus::Diverged;
                history.message = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let du = delta_u(&prev.u, &out.u, 0.0, &ctx)?;
        history.delta_u_damped.push(delta_u(&prev.u, &out.u, lambda, &ctx)?);
        let profile = ctx.delta_profile(&out.u.sub(&prev.u)?, Some(&ctx.damping(&prev.u, lambda)?))?;
        history.gronwall_4.push(crate::monitor::time_norm(&times, &profile, 4.0 / ctx.shift, 0.0));
        history.gronwall_2.push(crate::monitor::time_norm(&times, &profile, 2.0 / ctx.shift, 0.0));
        if let Some(&last) = history.delta_u.last() {
            let last: f64 = last;
            history.ratios.push(if last == 0.0 { 0.0 } else { du / last });
        }
        history.delta_u.push(du);
        history.inner_iterations.push(out.iterations);
        history.inner_max_factor.push(out.factors.iter().skip(1).cloned().fold(0.0, f64::max));
        history.inner_max_damped_factor.push(out.damped_factors.iter().skip(1).cloned().fold(0.0, f64::max));
        history.transport_substeps.push(ts.substeps);
        let sup = timeline_sup(&theta, bound)?;
        history.theta_sup.push(sup);
        if sup > bound {
            history.max_principle_ok = false;
        }
        history.max_divergence = history.max_divergence.max(max_relative_divergence(&out.u)?);
        let ledger = state_norms(&theta, &out.u, &out.pi, &ctx)?;
        history.ledgers.push(ledger.clone());
        history.iterations = n + 1;
        states.push(SolverState { n: n + 1, theta, u: out.u, pi: out.pi, norm_ledger: ledger, delta_u: Some(du) });
        if states.len() > cfg.keep_states.max(1) {
            states.remove(0);
        }
        if !du.is_finite() || du > cfg.blowup {
            history.status = RunStatus::Diverged;
            history.message = Some(format!("increment {du:.3e} exceeds blow-up threshold {:.3e}", cfg.blowup));
            break;
        }
        if du < cfg.tol_outer {
            history.status = RunStatus::Converged;
            break;
        }
    }
    if history.status == RunStatus::Converged && !history.max_principle_ok {
        let observed = history.theta_sup.iter().cloned().fold(0.0, f64::max);
        return Err(Error::MaximumPrinciple { observed, bound });
    }
    Ok(PicardRun { states, history })
}

/// Pairwise differences of successive runs of an `ε`-sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub eps: Vec<f64>,
    pub statuses: Vec<RunStatus>,
    pub iterations: Vec<usize>,
    /// `‖u_{ε_i} − u_{ε_{i+1}}‖_{L^{2r}_t L^{dr/(r−1)}_x}`.
    pub u_differences: Vec<f64>,
    /// `sup_t ‖θ_{ε_i} − θ_{ε_{i+1}}‖_{L²}`.
    pub theta_differences: Vec<f64>,
    pub monotone: bool,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn epsilon_sweep<T: Real>(
    data: &InitialData<T>,
    law: &ViscosityLaw,
    cfg: &SolverConfig,
    eps_list: &[f64],
) -> Result<SweepReport> {
    if eps_list.len() < 2 {
        return Err(Error::InvalidArgument("sweep needs at least two values".into()));
    }
    if eps_list.iter().any(|e| !(*e >= 0.0)) || eps_list.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument(format!("eps list {eps_list:?} must be non-increasing and >= 0")));
    }
    let runs = eps_list
        .par_iter()
        .map(|&e| {
            let c = SolverConfig { eps: e, keep_states: 1, ..cfg.clone() };
            picard_solve(data, law, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = data.grid().dim();
    let q = Theorem1Family::new(dim, cfg.r).q_velocity;
    let spec = SpaceTimeNormSpec::unweighted(2.0 * cfg.r, q)?;
    let mut ud = Vec::new();
    let mut td = Vec::new();
    for w in runs.windows(2) {
        let (a, b) = (w[0].final_state(), w[1].final_state());
        ud.push(spacetime_norm(&a.u.sub(&b.u)?, &spec)?);
        let diff = a.theta.sub(&b.theta)?;
        td.push(node_norms(&diff, 2.0)?.into_iter().fold(0.0, f64::max));
    }
    let monotone = strictly_decreasing(&ud) && strictly_decreasing(&td);
    Ok(SweepReport {
        eps: eps_list.to_vec(),
        statuses: runs.iter().map(|r| r.history.status).collect(),
        iterations: runs.iter().map(|r| r.history.iterations).collect(),
        u_differences: ud,
        theta_differences: td,
        monotone,
    })
}
