//! Exponent families and admissibility checks shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Unweighted critical framework, smallness with power `4r`.
    Theorem1,
    /// Time-weighted framework, smallness with power `2r`.
    Theorem2,
}

impl Regime {
    /// Power of `‖ū^d‖` in the smallness exponential.
    pub fn smallness_power(self, r: f64) -> f64 {
        match self {
            Regime::Theorem1 => 4.0 * r,
            Regime::Theorem2 => 2.0 * r,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Regime::Theorem1 => "theorem1",
            Regime::Theorem2 => "theorem2",
        }
    }
}

/// One strict inequality `lhs < rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Constraint {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.to_string(), lhs, rhs }
    }

    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn describe(&self) -> String {
        format!(
            "{}: {:.6} < {:.6} {} (margin {:+.6})",
            self.name,
            self.lhs,
            self.rhs,
            if self.holds() { "holds" } else { "VIOLATED" },
            self.margin()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub regime: Regime,
    pub constraints: Vec<Constraint>,
}

impl Admissibility {
    pub fn ok(&self) -> bool {
        self.constraints.iter().all(Constraint::holds)
    }

    pub fn violations(&self) -> Vec<String> {
        self.constraints.iter().filter(|c| !c.holds()).map(Constraint::describe).collect()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.ok() {
            Ok(self)
        } else {
            Err(Error::Inadmissible(self.violations()))
        }
    }
}

/// Every inequality the regime imposes on `(d, p, r)`.
pub fn admissibility(regime: Regime, dim: usize, p: f64, r: f64) -> Admissibility {
    let d = dim as f64;
    let mut c = vec![Constraint::new("1 < r", 1.0, r), Constraint::new("r < inf", r, f64::INFINITY)];
    match regime {
        Regime::Theorem1 => {
            c.push(Constraint::new("1 < p", 1.0, p));
            c.push(Constraint::new("p < dr/(2r-1)", p, d * r / (2.0 * r - 1.0)));
        }
        Regime::Theorem2 => {
            c.push(Constraint::new("2d/3 < p", 2.0 * d / 3.0, p));
            c.push(Constraint::new("p < d", p, d));
            c.push(Constraint::new("2/3 - d/(6p) < 1/2 - 1/(2r)", 2.0 / 3.0 - d / (6.0 * p), 0.5 - 0.5 / r));
            c.push(Constraint::new("1/r < (d/p - 1)/3", 1.0 / r, (d / p - 1.0) / 3.0));
            c.push(Constraint::new("1/r < 4/3 - d/p", 1.0 / r, 4.0 / 3.0 - d / p));
            if p < d {
                let w = WeightExponents::new(dim, p, r);
                let rr = 2.0 * r;
                c.push(Constraint::new("0 < alpha", 0.0, w.alpha));
                c.push(Constraint::new("alpha < 1 - 1/(2r)", w.alpha, 1.0 - 1.0 / rr));
                c.push(Constraint::new("alpha (2r)' < 1", w.alpha * conj(rr), 1.0));
                c.push(Constraint::new("beta (2r)' < 1", w.beta * conj(rr), 1.0));
                c.push(Constraint::new("alpha r' < 1", w.alpha * conj(r), 1.0));
                c.push(Constraint::new("0 < gamma1", 0.0, w.gamma1));
            }
        }
    }
    Admissibility { regime, constraints: c }
}

/// Hölder conjugate `q/(q−1)`.
pub fn conj(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// `dp/(d−p)`.
pub fn sobolev_star(dim: usize, p: f64) -> f64 {
    let d = dim as f64;
    d * p / (d - p)
}

/// Target of the gradient operator bound: `1/q = 1/p − (r−1)/(dr)`.
pub fn gradient_gain_exponent(dim: usize, p: f64, r: f64) -> f64 {
    1.0 / (1.0 / p - (r - 1.0) / (dim as f64 * r))
}

/// Target of the plain operator bound: `1/q = 1/p − (2r−1)/(dr)`.
pub fn plain_gain_exponent(dim: usize, p: f64, r: f64) -> f64 {
    1.0 / (1.0 / p - (2.0 * r - 1.0) / (dim as f64 * r))
}

/// Spatial exponents of the unweighted framework.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Family {
    /// `dr/(r−1)`: velocity in `L^{2r}_t`.
    pub q_velocity: f64,
    /// `dr/(2r−1)`: velocity gradient in `L^{2r}_t`.
    pub q_gradient: f64,
    /// `dr/(2(r−1))`: gradient and pressure in `L^r_t`.
    pub q_pressure: f64,
}

impl Theorem1Family {
    pub fn new(dim: usize, r: f64) -> Self {
        let d = dim as f64;
        Self {
            q_velocity: d * r / (r - 1.0),
            q_gradient: d * r / (2.0 * r - 1.0),
            q_pressure: d * r / (2.0 * (r - 1.0)),
        }
    }

    /// `2dr/((2−ε)r−2)`, the velocity exponent of the regularized increment.
    pub fn q_velocity_eps(dim: usize, r: f64, eps: f64) -> Result<f64> {
        let den = (2.0 - eps) * r - 2.0;
        if !(den > 0.0) {
            return Err(Error::Inadmissible(vec![format!("(2-eps)r - 2 = {den:.6} must be positive")]));
        }
        Ok(2.0 * dim as f64 * r / den)
    }

    /// `2dr/((4−ε)r−2)`, the gradient exponent of the regularized increment.
    pub fn q_gradient_eps(dim: usize, r: f64, eps: f64) -> Result<f64> {
        let den = (4.0 - eps) * r - 2.0;
        if !(den > 0.0) {
            return Err(Error::Inadmissible(vec![format!("(4-eps)r - 2 = {den:.6} must be positive")]));
        }
        Ok(2.0 * dim as f64 * r / den)
    }
}

/// Time weights `t^α, t^β, t^{γ₁}, t^{γ₂}` of the weighted framework.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightExponents {
    pub alpha: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl WeightExponents {
    /// The index written `p₁` in the definition of `α` is taken to be `p`.
    pub fn new(dim: usize, p: f64, r: f64) -> Self {
        let d = dim as f64;
        let fam = Theorem2Family::spatial(dim, p);
        Self {
            alpha: 0.5 * (3.0 - d / p) - 1.0 / r,
            beta: 0.5 * (2.0 - d / fam.p2) - 0.5 / r,
            gamma1: 0.5 * (1.0 - d / fam.p3) - 0.5 / r,
            gamma2: 0.5 * (1.0 - d / fam.p3),
        }
    }
}

/// Spatial exponents and weights of the weighted framework.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Family {
    pub p_star: f64,
    pub p2: f64,
    pub p3: f64,
}

impl Theorem2Family {
    pub fn spatial(dim: usize, p: f64) -> Self {
        let d = dim as f64;
        Self {
            p_star: d * p / (d - p),
            p2: 3.0 * p * d / (2.0 * p + d),
            p3: 3.0 * p * d / (2.0 * d - 2.0 * p),
        }
    }

    pub fn weights(dim: usize, p: f64, r: f64) -> WeightExponents {
        WeightExponents::new(dim, p, r)
    }
}
