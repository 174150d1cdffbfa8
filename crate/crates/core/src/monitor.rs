//! Space-time norms, damped increments and inequality ledgers.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duhamel::{DampingWeight, Timeline};
use crate::error::{Error, Result};
use crate::exponents::{admissibility, conj, Regime, Theorem1Family, Theorem2Family, WeightExponents};
use crate::field::{gradient, SpectralField};
use crate::scalar::Real;
use crate::solver::{split_velocity, SmallnessReport};

/// `‖t^a f‖_{L^ρ(0,T; L^q_x)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeNormSpec {
    pub time_exponent: f64,
    pub space_exponent: f64,
    pub weight: f64,
}

impl SpaceTimeNormSpec {
    pub fn new(time_exponent: f64, space_exponent: f64, weight: f64) -> Result<Self> {
        let s = Self { time_exponent, space_exponent, weight };
        s.validate()?;
        Ok(s)
    }

    pub fn unweighted(time_exponent: f64, space_exponent: f64) -> Result<Self> {
        Self::new(time_exponent, space_exponent, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.time_exponent >= 1.0) {
            errs.push(format!("time exponent {} < 1", self.time_exponent));
        }
        if !(self.space_exponent >= 1.0) {
            errs.push(format!("space exponent {} < 1", self.space_exponent));
        }
        if !(self.weight >= 0.0) {
            errs.push(format!("weight exponent {} < 0", self.weight));
        }
        if self.weight > 0.0 && self.time_exponent.is_finite() {
            let lhs = self.weight * conj(self.time_exponent);
            if !(lhs < 1.0) {
                errs.push(format!("a rho' < 1 violated: {:.6} * {:.6} = {lhs:.6}", self.weight, conj(self.time_exponent)));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Inadmissible(errs))
        }
    }

    pub fn label(&self) -> String {
        let rho = if self.time_exponent.is_infinite() { "inf".to_string() } else { format!("{:.4}", self.time_exponent) };
        let q = if self.space_exponent.is_infinite() { "inf".to_string() } else { format!("{:.4}", self.space_exponent) };
        if self.weight == 0.0 {
            format!("L^{rho}_t L^{q}_x")
        } else {
            format!("t^{:.4} L^{rho}_t L^{q}_x", self.weight)
        }
    }
}

/// Time quadrature of `(t^a v(t))^ρ` from per-node values, linear in `v^ρ`
/// between nodes and exact in the weight `t^{aρ}`; supremum for `ρ = ∞`.
pub fn time_norm(times: &[f64], values: &[f64], rho: f64, a: f64) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    if rho.is_infinite() {
        return times
            .iter()
            .zip(values)
            .map(|(&t, &v)| if a == 0.0 { v } else { t.powf(a) * v })
            .fold(0.0, f64::max);
    }
    let top = values.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 || !top.is_finite() {
        return top;
    }
    let y: Vec<f64> = values.iter().map(|v| (v / top).powf(rho)).collect();
    let b = a * rho;
    let mut acc = 0.0;
    for i in 0..times.len() - 1 {
        let (t0, t1) = (times[i], times[i + 1]);
        let h = t1 - t0;
        if b == 0.0 {
            acc += 0.5 * h * (y[i] + y[i + 1]);
        } else {
            let i0 = (t1.powf(b + 1.0) - t0.powf(b + 1.0)) / (b + 1.0);
            let i1 = (t1.powf(b + 2.0) - t0.powf(b + 2.0)) / (b + 2.0);
            acc += y[i] * i0 + (y[i + 1] - y[i]) * (i1 - t0 * i0) / h;
        }
    }
    top * acc.max(0.0).powf(1.0 / rho)
}

/// Per-node `‖f(t_i)‖_{L^q}`.
pub fn node_norms<T: Real>(f: &Timeline<T>, q: f64) -> Result<Vec<f64>> {
    f.snapshots().iter().map(|s| s.lp_norm(q).map(|v| v.to64())).collect()
}

/// `‖t^a f‖_{L^ρ_t L^q_x}` on the timeline's window.
pub fn spacetime_norm<T: Real>(f: &Timeline<T>, spec: &SpaceTimeNormSpec) -> Result<f64> {
    spec.validate()?;
    let v = node_norms(f, spec.space_exponent)?;
    Ok(time_norm(f.times(), &v, spec.time_exponent, spec.weight))
}

/// `‖t^a f‖_{L^ρ(0,t_i; ·)}` for every node `t_i`, from per-node values.
pub fn time_norm_cumulative(times: &[f64], values: &[f64], rho: f64, a: f64) -> Vec<f64> {
    (0..times.len())
        .map(|i| if i == 0 { 0.0 } else { time_norm(&times[..=i], &values[..=i], rho, a) })
        .collect()
}

/// Per-node values multiplied by `h(0, t_i)`.
fn damped(values: &[f64], damping: Option<&DampingWeight>) -> Vec<f64> {
    match damping {
        Some(w) => values.iter().enumerate().map(|(i, v)| v * w.h(0, i)).collect(),
        None => values.to_vec(),
    }
}

/// Per-node `‖∇f(t_i)‖_{L^q}`.
pub fn gradient_node_norms<T: Real>(f: &Timeline<T>, q: f64) -> Result<Vec<f64>> {
    f.snapshots().iter().map(|s| gradient(s)?.lp_norm(q).map(|v| v.to64())).collect()
}

/// Exponents and regime shared by the solver's norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormContext {
    pub regime: Regime,
    pub dim: usize,
    pub p: f64,
    pub r: f64,
    /// Regularity shift in the exponents of the increment norms.
    pub shift: f64,
}

/// One monitored norm: `‖t^a (∇)f‖_{L^ρ_t L^q_x}`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Term {
    name: &'static str,
    gradient: bool,
    spec: SpaceTimeNormSpec,
}

impl NormContext {
    pub fn new(regime: Regime, dim: usize, p: f64, r: f64) -> Result<Self> {
        admissibility(regime, dim, p, r).into_result()?;
        Ok(Self { regime, dim, p, r, shift: 0.1 })
    }

    pub fn with_shift(mut self, shift: f64) -> Result<Self> {
        let lim = (1.0 / (2.0 * self.r)).min(1.0 - 1.0 / self.r);
        if !(shift > 0.0 && shift < lim) {
            return Err(Error::Inadmissible(vec![format!("shift {shift} must lie in (0, {lim:.6})")]));
        }
        self.shift = shift;
        Ok(self)
    }

    fn s(rho: f64, q: f64, a: f64) -> SpaceTimeNormSpec {
        SpaceTimeNormSpec { time_exponent: rho, space_exponent: q, weight: a }
    }

    /// Norms of the inner linear-solve space `Y`.
    fn inner_terms(&self) -> Vec<Term> {
        let rr = 2.0 * self.r;
        match self.regime {
            Regime::Theorem1 => {
                let f = Theorem1Family::new(self.dim, self.r);
                vec![
                    Term { name: "u", gradient: false, spec: Self::s(rr, f.q_velocity, 0.0) },
                    Term { name: "grad u", gradient: true, spec: Self::s(rr, f.q_gradient, 0.0) },
                ]
            }
            Regime::Theorem2 => {
                let f = Theorem2Family::spatial(self.dim, self.p);
                let w = WeightExponents::new(self.dim, self.p, self.r);
                vec![
                    Term { name: "u", gradient: false, spec: Self::s(rr, f.p3, w.gamma1) },
                    Term { name: "grad u", gradient: true, spec: Self::s(rr, f.p2, w.beta) },
                ]
            }
        }
    }

    /// Norms summed in the increment `δU`.
    fn delta_terms(&self) -> Result<Vec<Term>> {
        let rr = 2.0 * self.r;
        Ok(match self.regime {
            Regime::Theorem1 => {
                let f = Theorem1Family::new(self.dim, self.r);
                let qv = Theorem1Family::q_velocity_eps(self.dim, self.r, self.shift)?;
                let qg = Theorem1Family::q_gradient_eps(self.dim, self.r, self.shift)?;
                vec![
                    Term { name: "du", gradient: false, spec: Self::s(rr, f.q_velocity, 0.0) },
                    Term { name: "du shifted", gradient: false, spec: Self::s(rr, qv, 0.0) },
                    Term { name: "grad du", gradient: true, spec: Self::s(rr, f.q_gradient, 0.0) },
                    Term { name: "grad du shifted", gradient: true, spec: Self::s(rr, qg, 0.0) },
                ]
            }
            Regime::Theorem2 => {
                let f = Theorem2Family::spatial(self.dim, self.p);
                let w = WeightExponents::new(self.dim, self.p, self.r);
                vec![
                    Term { name: "du", gradient: false, spec: Self::s(rr, f.p3, w.gamma1) },
                    Term { name: "du sup", gradient: false, spec: Self::s(f64::INFINITY, f.p3, w.gamma2) },
                    Term { name: "grad du", gradient: true, spec: Self::s(rr, f.p2, w.beta) },
                ]
            }
        })
    }

    /// Left-hand norms of the regime's velocity display.
    fn display_terms(&self) -> Vec<Term> {
        let (r, rr) = (self.r, 2.0 * self.r);
        match self.regime {
            Regime::Theorem1 => {
                let f = Theorem1Family::new(self.dim, r);
                vec![
                    Term { name: "grad u L^r", gradient: true, spec: Self::s(r, f.q_pressure, 0.0) },
                    Term { name: "grad u L^2r", gradient: true, spec: Self::s(rr, f.q_gradient, 0.0) },
                    Term { name: "u L^2r", gradient: false, spec: Self::s(rr, f.q_velocity, 0.0) },
                ]
            }
            Regime::Theorem2 => {
                let f = Theorem2Family::spatial(self.dim, self.p);
                let w = WeightExponents::new(self.dim, self.p, r);
                vec![
                    Term { name: "t^alpha grad u", gradient: true, spec: Self::s(rr, f.p_star, w.alpha) },
                    Term { name: "t^beta grad u", gradient: true, spec: Self::s(rr, f.p2, w.beta) },
                    Term { name: "t^gamma1 u", gradient: false, spec: Self::s(rr, f.p3, w.gamma1) },
                    Term { name: "t^gamma2 u", gradient: false, spec: Self::s(f64::INFINITY, f.p3, w.gamma2) },
                ]
            }
        }
    }

    pub fn pressure_spec(&self) -> SpaceTimeNormSpec {
        match self.regime {
            Regime::Theorem1 => Self::s(self.r, Theorem1Family::new(self.dim, self.r).q_pressure, 0.0),
            Regime::Theorem2 => Self::s(
                self.r,
                Theorem2Family::spatial(self.dim, self.p).p_star,
                WeightExponents::new(self.dim, self.p, self.r).alpha,
            ),
        }
    }

    fn node_values<T: Real>(&self, f: &Timeline<T>, terms: &[Term]) -> Result<Vec<Vec<f64>>> {
        let grads: Option<Vec<SpectralField<T>>> = if terms.iter().any(|t| t.gradient) {
            Some(f.snapshots().par_iter().map(gradient).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        terms
            .iter()
            .map(|t| {
                let src: &[SpectralField<T>] = if t.gradient { grads.as_ref().expect("gradients") } else { f.snapshots() };
                src.par_iter()
                    .map(|s| s.lp_norm(t.spec.space_exponent).map(|x| x.to64()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    }

    fn eval_terms<T: Real>(
        &self,
        f: &Timeline<T>,
        terms: &[Term],
        damping: Option<&DampingWeight>,
    ) -> Result<Vec<(String, f64)>> {
        let vals = self.node_values(f, terms)?;
        Ok(terms
            .iter()
            .zip(vals)
            .map(|(t, v)| {
                let v = damped(&v, damping);
                (t.name.to_string(), time_norm(f.times(), &v, t.spec.time_exponent, t.spec.weight))
            })
            .collect())
    }

    /// Per-node damping integrand from the vertical component of `u`.
    pub fn damping_integrand<T: Real>(&self, u: &Timeline<T>) -> Result<Vec<f64>> {
        let d = self.dim;
        let vert = u.map(|s| s.component(d - 1))?;
        let rr = 2.0 * self.r;
        let (qv, qg, av, ag) = match self.regime {
            Regime::Theorem1 => {
                let f = Theorem1Family::new(d, self.r);
                (f.q_velocity, f.q_gradient, 0.0, 0.0)
            }
            Regime::Theorem2 => {
                let f = Theorem2Family::spatial(d, self.p);
                let w = WeightExponents::new(d, self.p, self.r);
                (f.p3, f.p2, w.gamma1, w.beta)
            }
        };
        let nv = node_norms(&vert, qv)?;
        let ng = gradient_node_norms(&vert, qg)?;
        Ok(u
            .times()
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let wv = if av == 0.0 { 1.0 } else { t.powf(rr * av) };
                let wg = if ag == 0.0 { 1.0 } else { t.powf(rr * ag) };
                wv * nv[i].powf(rr) + wg * ng[i].powf(rr)
            })
            .collect())
    }

    /// `h_λ(s,t)` built from the vertical component of `u`.
    pub fn damping<T: Real>(&self, u: &Timeline<T>, lambda: f64) -> Result<DampingWeight> {
        if lambda == 0.0 {
            return Ok(DampingWeight::undamped(u.times()));
        }
        DampingWeight::new(u.times(), &self.damping_integrand(u)?, lambda)
    }

    /// Damped norm of the inner linear-solve space.
    pub fn y_norm<T: Real>(&self, w: &Timeline<T>, damping: Option<&DampingWeight>) -> Result<f64> {
        Ok(self.eval_terms(w, &self.inner_terms(), damping)?.iter().map(|x| x.1).sum())
    }

    /// Undamped and damped inner norms from one pass over the nodes.
    pub fn y_norms<T: Real>(&self, w: &Timeline<T>, damping: &DampingWeight) -> Result<(f64, f64)> {
        let terms = self.inner_terms();
        let vals = self.node_values(w, &terms)?;
        let (mut a, mut b) = (0.0, 0.0);
        for (t, v) in terms.iter().zip(vals) {
            a += time_norm(w.times(), &v, t.spec.time_exponent, t.spec.weight);
            b += time_norm(w.times(), &damped(&v, Some(damping)), t.spec.time_exponent, t.spec.weight);
        }
        Ok((a, b))
    }

    /// The regime's damped increment norms, individually.
    pub fn delta_norms<T: Real>(&self, du: &Timeline<T>, damping: Option<&DampingWeight>) -> Result<Vec<(String, f64)>> {
        self.eval_terms(du, &self.delta_terms()?, damping)
    }

    /// `δU(t_i)` on `[0, t_i]` for every node.
    pub fn delta_profile<T: Real>(&self, du: &Timeline<T>, damping: Option<&DampingWeight>) -> Result<Vec<f64>> {
        let times = du.times();
        let terms = self.delta_terms()?;
        let mut acc = vec![0.0; times.len()];
        for (t, v) in terms.iter().zip(self.node_values(du, &terms)?) {
            let v = damped(&v, damping);
            for (a, c) in acc.iter_mut().zip(time_norm_cumulative(times, &v, t.spec.time_exponent, t.spec.weight)) {
                *a += c;
            }
        }
        Ok(acc)
    }

    /// Left-hand norms of the velocity display for `u`.
    pub fn display_norms<T: Real>(&self, u: &Timeline<T>) -> Result<Vec<(String, f64)>> {
        self.eval_terms(u, &self.display_terms(), None)
    }

    pub fn pressure_norm<T: Real>(&self, pi: &Timeline<T>) -> Result<f64> {
        spacetime_norm(pi, &self.pressure_spec())
    }
}

/// `δU_λ` between consecutive iterates, damped with `h_λ` from `prev`'s
/// vertical velocity.
pub fn delta_u<T: Real>(prev: &Timeline<T>, next: &Timeline<T>, lambda: f64, ctx: &NormContext) -> Result<f64> {
    if prev.grid() != next.grid() {
        return Err(Error::GridMismatch);
    }
    if !prev.same_nodes(next) {
        return Err(Error::InvalidArgument("iterates on different time nodes".into()));
    }
    let du = next.sub(prev)?;
    let w = ctx.damping(prev, lambda)?;
    Ok(ctx.delta_norms(&du, Some(&w))?.iter().map(|x| x.1).sum())
}

/// All monitored norms of one iterate, by name.
pub type NormLedger = BTreeMap<String, f64>;

/// Display norms of `(θ, u, Π)` split into horizontal and vertical parts.
pub fn state_norms<T: Real>(
    theta: &Timeline<T>,
    u: &Timeline<T>,
    pi: &Timeline<T>,
    ctx: &NormContext,
) -> Result<NormLedger> {
    let mut out = NormLedger::new();
    let h = u.map(|s| split_velocity(s).0)?;
    let v = u.map(|s| split_velocity(s).1)?;
    for (tag, f) in [("h", &h), ("d", &v)] {
        let mut total = 0.0;
        for (name, val) in ctx.display_norms(f)? {
            total += val;
            out.insert(format!("{tag}: {name}"), val);
        }
        out.insert(format!("{tag}: total"), total);
    }
    out.insert("pressure".into(), ctx.pressure_norm(pi)?);
    let th = node_norms(theta, f64::INFINITY)?;
    out.insert("theta sup".into(), th.into_iter().fold(0.0, f64::max));
    Ok(out)
}

/// One monitored inequality `lhs ≤ C · scale` with the minimal `C` inferred.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: Vec<(String, f64)>,
    pub lhs_total: f64,
    pub rhs_shape: String,
    pub rhs_scale: f64,
    pub inferred_constant: f64,
    pub regime: Regime,
    pub status: String,
}

fn infer(lhs: f64, scale: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        lhs / scale
    }
}

/// Inequalities of the active regime for one iterate's ledger.
pub fn theorem_report(ledger: &NormLedger, eta: &SmallnessReport, theta_sup0: f64, status: &str) -> Vec<InequalityReport> {
    let pick = |prefix: &str| -> Vec<(String, f64)> {
        ledger
            .iter()
            .filter(|(k, _)| k.starts_with(prefix) && !k.ends_with("total"))
            .map(|(k, v)| (k.clone(), *v))
            .collect()
    };
    let mk = |name: &str, lhs: Vec<(String, f64)>, shape: &str, scale: f64| {
        let total: f64 = lhs.iter().map(|x| x.1).sum();
        InequalityReport {
            name: name.into(),
            lhs,
            lhs_total: total,
            rhs_shape: shape.into(),
            rhs_scale: scale,
            inferred_constant: infer(total, scale),
            regime: eta.regime,
            status: status.into(),
        }
    };
    let p = ledger.get("pressure").copied().unwrap_or(0.0);
    let th = ledger.get("theta sup").copied().unwrap_or(0.0);
    vec![
        mk("horizontal velocity", pick("h: "), "C1*eta", eta.eta),
        mk("vertical velocity", pick("d: "), "C2*|ud| (C3=0)", eta.ud_besov),
        mk("pressure", vec![("pressure".into(), p)], "C4*eta", eta.eta),
        mk("temperature", vec![("theta sup".into(), th)], "|theta0|_inf", theta_sup0),
    ]
}

/// One row of the cross-run constant ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub run_id: String,
    pub inequality: String,
    pub lhs: f64,
    pub rhs_shape: String,
    pub inferred_c: f64,
}

pub fn ledger_rows(run_id: &str, reports: &[InequalityReport]) -> Vec<LedgerRow> {
    reports
        .iter()
        .map(|r| LedgerRow {
            run_id: run_id.into(),
            inequality: r.name.clone(),
            lhs: r.lhs_total,
            rhs_shape: r.rhs_shape.clone(),
            inferred_c: r.inferred_constant,
        })
        .collect()
}

pub fn write_ledger_csv<W: std::io::Write>(rows: &[LedgerRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}
