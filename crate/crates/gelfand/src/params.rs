//! Operator triple (α, β, γ) for the radial operator
//! L(u) = r^{-γ} (r^α |u'|^β u')', its derived exponents, and the
//! oscillatory/non-intersecting regime classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance of an operator triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Origin {
    /// k-Hessian in dimension d: α = d−k, β = k−1, γ = d−1.
    KHessian { d: u32, k: u32 },
    /// p-Laplacian in dimension d: α = d−1, β = p−2, γ = d−1.
    PLaplacian { d: u32, p: f64 },
    /// Raw exponents supplied directly.
    Raw,
}

/// Exponent triple of the operator L(u) = r^{-γ} (r^α |u'|^β u')'.
///
/// Valid triples satisfy α > β + 1, β ≥ 0 and θ = γ + 2 + β − α > 0.
/// Derived exponents are always recomputed from the stored triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperatorParams")]
pub struct OperatorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub origin: Origin,
}

#[derive(Deserialize)]
struct RawOperatorParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    #[serde(default = "raw_origin")]
    origin: Origin,
}

fn raw_origin() -> Origin {
    Origin::Raw
}

impl TryFrom<RawOperatorParams> for OperatorParams {
    type Error = Error;

    fn try_from(raw: RawOperatorParams) -> Result<Self> {
        let p = OperatorParams {
            alpha: raw.alpha,
            beta: raw.beta,
            gamma: raw.gamma,
            origin: raw.origin,
        };
        p.validate()?;
        Ok(p)
    }
}

impl OperatorParams {
    /// k-Hessian operator in dimension `d` of order `k`; requires d > 2k, k ≥ 1.
    pub fn khessian(d: u32, k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::Domain(format!("k-Hessian order k = {k} must be ≥ 1")));
        }
        if d <= 2 * k {
            return Err(Error::Domain(format!(
                "k-Hessian requires d > 2k (got d = {d}, k = {k}); α > β+1 fails otherwise"
            )));
        }
        let p = OperatorParams {
            alpha: f64::from(d - k),
            beta: f64::from(k - 1),
            gamma: f64::from(d - 1),
            origin: Origin::KHessian { d, k },
        };
        p.validate()?;
        Ok(p)
    }

    /// p-Laplacian operator in dimension `d` with exponent `p`; requires 2 ≤ p < d.
    pub fn plaplacian(d: u32, p: f64) -> Result<Self> {
        if !(2.0..).contains(&p) {
            return Err(Error::Domain(format!("p-Laplacian requires p ≥ 2 (got p = {p})")));
        }
        if p >= f64::from(d) {
            return Err(Error::Domain(format!(
                "p-Laplacian requires p < d (got p = {p}, d = {d})"
            )));
        }
        let params = OperatorParams {
            alpha: f64::from(d - 1),
            beta: p - 2.0,
            gamma: f64::from(d - 1),
            origin: Origin::PLaplacian { d, p },
        };
        params.validate()?;
        Ok(params)
    }

    /// Raw exponent triple; accepts non-integer values for boundary studies.
    pub fn raw(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = OperatorParams {
            alpha,
            beta,
            gamma,
            origin: Origin::Raw,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()) {
            return Err(Error::Domain("operator exponents must be finite".into()));
        }
        if self.beta < 0.0 {
            return Err(Error::Domain(format!("β = {} must be ≥ 0", self.beta)));
        }
        if self.alpha <= self.beta + 1.0 {
            return Err(Error::Domain(format!(
                "α = {} must exceed β + 1 = {}",
                self.alpha,
                self.beta + 1.0
            )));
        }
        if self.theta() <= 0.0 {
            return Err(Error::Domain(format!("θ = {} must be positive", self.theta())));
        }
        Ok(())
    }

    /// Scaling exponent θ = γ + 2 + β − α (2k for k-Hessian, p for p-Laplacian).
    pub fn theta(&self) -> f64 {
        self.gamma + 2.0 + self.beta - self.alpha
    }

    /// α̂ = α / (β+1).
    pub fn alpha_hat(&self) -> f64 {
        self.alpha / (self.beta + 1.0)
    }

    /// θ̂ = θ / (β+1).
    pub fn theta_hat(&self) -> f64 {
        self.theta() / (self.beta + 1.0)
    }

    /// δ = α − β − 1, the trace of the phase-plane linearization.
    pub fn delta(&self) -> f64 {
        self.alpha - self.beta - 1.0
    }

    /// κ₀ = (β+1)^{1/θ}, the log-radius normalization for L(u) + e^{f(u)} = 0.
    pub fn kappa0(&self) -> f64 {
        (self.beta + 1.0).powf(1.0 / self.theta())
    }

    /// λ* = θ^{β+1} (α − β − 1), exact for the nonlinearity f(u) = u.
    pub fn lambda_star_exact(&self) -> f64 {
        self.theta().powf(self.beta + 1.0) * self.delta()
    }

    /// Classify the operator by the phase-plane discriminant bands.
    pub fn classify_regime(&self) -> Regime {
        let delta = self.delta();
        let focus_threshold = 4.0 * self.theta() / (self.beta + 1.0);
        let node_threshold = 4.0 * self.theta() * (self.beta + 1.0);
        let tag = if delta >= node_threshold {
            RegimeTag::NonIntersecting
        } else if delta < focus_threshold {
            RegimeTag::Oscillatory
        } else {
            RegimeTag::Intermediate
        };
        Regime {
            tag,
            delta,
            focus_threshold,
            node_threshold,
        }
    }
}

/// Dynamical regime of the regular/singular solution pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    /// δ < 4θ/(β+1): unstable focus; intersection counts diverge.
    Oscillatory,
    /// 4θ/(β+1) ≤ δ < 4θ(β+1): open band with no proven count.
    Intermediate,
    /// δ ≥ 4θ(β+1): regular and singular solutions never intersect.
    NonIntersecting,
}

/// Regime tag plus the thresholds it was decided against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub delta: f64,
    pub focus_threshold: f64,
    pub node_threshold: f64,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeTag::Oscillatory => write!(f, "Oscillatory"),
            RegimeTag::Intermediate => write!(f, "Intermediate"),
            RegimeTag::NonIntersecting => write!(f, "NonIntersecting"),
        }
    }
}
