//! Singular solutions: the exact log solution for f(u) = u, asymptotic
//! expansions near the origin for general f, numeric singular trajectories
//! seeded from those asymptotics, and the tail-integral transform that maps
//! regular solutions onto the canonical limit problem L(w) + e^w = 0.

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::ode::{self, OdeOptions, OdeSolution};
use crate::params::OperatorParams;
use crate::quad;
use crate::solver::{RadialTrajectory, EXP_GUARD};

/// How a singular solution is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularKind {
    /// Closed form u*(r) = −θ ln r with λ* = θ^{β+1}(α−β−1); f(u) = u only.
    ExactIdentity,
    /// Integrated outward from an asymptotic seed at a small radius.
    AsymptoticSeededNumeric,
}

/// A singular solution, blowing up at the origin.
///
/// Two evaluation frames are exposed: `eval_canonical` solves
/// L(u) + e^{f(u)} = 0 (zero at radius λ*^{1/θ}), while `eval_scaled`
/// solves L(u) + λ* e^{f(u)} = 0 (zero at radius 1 for the identity).
#[derive(Debug, Clone)]
pub struct SingularSolution {
    pub kind: SingularKind,
    pub lambda_star: f64,
    pub params: OperatorParams,
    pub nonlinearity: NonlinearitySpec,
    /// Seed radius of the numeric construction.
    pub seed_radius: Option<f64>,
    /// Fitted remainder exponent q of the (ln 1/r)^{-q} gap to the
    /// asymptotics, when measurable above the solver noise floor.
    pub remainder_order_estimate: Option<f64>,
    backing: Backing,
}

#[derive(Debug, Clone)]
enum Backing {
    Exact,
    Numeric(NumericCore),
}

#[derive(Debug, Clone)]
struct NumericCore {
    params: OperatorParams,
    nl: NonlinearitySpec,
    /// Seed log-time; the asymptotic form continues the solution above it.
    t0: f64,
    /// Marches t downward from t0.
    sol: OdeSolution<2>,
}

impl NumericCore {
    fn v_at(&self, t: f64) -> Result<f64> {
        if t > self.t0 {
            // Asymptotic continuation beyond the seed.
            return Ok(leading_v(&self.params, &self.nl, t)?.0);
        }
        if t < self.sol.t_end - 1e-9 * self.sol.t_end.abs().max(1.0) {
            return Err(Error::Domain(format!(
                "t = {t} below the integrated range (ends at {})",
                self.sol.t_end
            )));
        }
        Ok(self.sol.eval(t.max(self.sol.t_end))[0])
    }

    fn vprime_at(&self, t: f64) -> Result<f64> {
        if t > self.t0 {
            return Ok(leading_v(&self.params, &self.nl, t)?.1);
        }
        let [_, sigma] = self.sol.eval(t.max(self.sol.t_end));
        let x = (self.params.alpha_hat() - 1.0) * t + sigma / (self.params.beta + 1.0);
        Ok(x.exp())
    }
}

impl SingularSolution {
    /// Zero radius of the canonical frame, λ*^{1/θ}.
    pub fn r_zero(&self) -> f64 {
        self.lambda_star.powf(1.0 / self.params.theta())
    }

    /// u*(r) solving L(u) + e^{f(u)} = 0.
    pub fn eval_canonical(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::Domain(format!("r = {r} must be positive")));
        }
        match &self.backing {
            Backing::Exact => {
                Ok(self.lambda_star.ln() - self.params.theta() * r.ln())
            }
            Backing::Numeric(core) => {
                let t = self.params.kappa0().ln() - r.ln();
                core.v_at(t)
            }
        }
    }

    /// d/dr of the canonical frame.
    pub fn eval_canonical_uprime(&self, r: f64) -> Result<f64> {
        match &self.backing {
            Backing::Exact => Ok(-self.params.theta() / r),
            Backing::Numeric(core) => {
                let t = self.params.kappa0().ln() - r.ln();
                Ok(-core.vprime_at(t)? / r)
            }
        }
    }

    /// u*_{λ*}(r) solving L(u) + λ* e^{f(u)} = 0 (−θ ln r for the identity).
    pub fn eval_scaled(&self, r: f64) -> Result<f64> {
        match &self.backing {
            Backing::Exact => Ok(-self.params.theta() * r.ln()),
            Backing::Numeric(_) => {
                let factor = self.lambda_star.powf(1.0 / self.params.theta());
                self.eval_canonical(r * factor)
            }
        }
    }

    /// Canonical singular solution of the identity problem,
    /// w*(s) = ln{θ^{β+1}(α−β−1)} − θ ln s.
    pub fn w_star(&self, s: f64) -> f64 {
        self.params.lambda_star_exact().ln() - self.params.theta() * s.ln()
    }
}

/// Exact singular pair (u*, λ*) for f(u) = u: u*(r) = −θ ln r.
pub fn exact_singular(params: &OperatorParams) -> SingularSolution {
    SingularSolution {
        kind: SingularKind::ExactIdentity,
        lambda_star: params.lambda_star_exact(),
        params: *params,
        nonlinearity: NonlinearitySpec::identity(),
        seed_radius: None,
        remainder_order_estimate: None,
        backing: Backing::Exact,
    }
}

/// Pointwise relative residual of u* = −θ ln r in L(u) + λ* e^u = 0,
/// evaluated with the same floating operations a trajectory check would use.
pub fn exact_singular_residual(params: &OperatorParams, r: f64) -> f64 {
    let (alpha, beta, gamma, theta) = (params.alpha, params.beta, params.gamma, params.theta());
    let lambda = params.lambda_star_exact();
    let u = -theta * r.ln();
    let up = -theta / r;
    let upp = theta / (r * r);
    // (r^α |u'|^β u')' = α r^{α−1}|u'|^β u' + (β+1) r^α |u'|^β u''.
    let d = alpha * r.powf(alpha - 1.0) * up.abs().powf(beta) * up
        + (beta + 1.0) * r.powf(alpha) * up.abs().powf(beta) * upp;
    let lu = r.powf(-gamma) * d;
    let src = lambda * u.exp();
    ((lu + src) / src).abs()
}

/// W(τ) = g'(τ) + (β+1) g''(τ) ln g'(τ) and its logarithmic derivative data.
fn w_terms(params: &OperatorParams, nl: &NonlinearitySpec, tau: f64) -> Result<(f64, f64)> {
    let beta1 = params.beta + 1.0;
    let j = nl.g_jet(tau);
    if !(j.d1.is_finite() && j.d2.is_finite() && j.d3.is_finite()) || j.d1 <= 0.0 {
        return Err(Error::Domain(format!(
            "g-derivatives unavailable at τ = {tau}; radius outside the asymptotic regime"
        )));
    }
    let lg = j.d1.ln();
    let w = j.d1 + beta1 * j.d2 * lg;
    if w <= 0.0 {
        return Err(Error::Domain(format!(
            "correction bracket g' + (β+1) g'' ln g' = {w} ≤ 0 at τ = {tau}"
        )));
    }
    // W'(τ) = g'' + (β+1)(g''' ln g' + g''²/g').
    let wp = j.d2 + beta1 * (j.d3 * lg + j.d2 * j.d2 / j.d1);
    Ok((w, wp))
}

/// Asymptotic exponent Z(r) of the singular solution near the origin and
/// the matching value u ≈ g(Z(r)).
///
/// Z(r) = ln{θ^{β+1}(α−β−1)} − ln λ* − θ ln r
///        + (β+1) ln{g'(τ) + (β+1) g''(τ) ln g'(τ)},  τ = ln{(β+1)/(λ* r^θ)}.
pub fn asymptotic_z(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    lambda_star: f64,
    r: f64,
) -> Result<(f64, f64)> {
    if !(lambda_star > 0.0 && r > 0.0) {
        return Err(Error::Domain("need λ* > 0 and r > 0".into()));
    }
    let beta1 = params.beta + 1.0;
    let tau = beta1.ln() - lambda_star.ln() - params.theta() * r.ln();
    let (w, _) = w_terms(params, nl, tau)?;
    let z = (params.theta().powf(beta1) * params.delta()).ln() - lambda_star.ln()
        - params.theta() * r.ln()
        + beta1 * w.ln();
    let u = nl.g(z);
    if !u.is_finite() {
        return Err(Error::Domain(format!(
            "g(Z) not finite at r = {r} (Z = {z}); r too large for the asymptotic regime"
        )));
    }
    Ok((z, u))
}

/// Leading singular form v(t) = g(θt + φ(t)) and v'(t) in the canonical
/// log frame (λ* = 1 normalization), with the φ₁/φ₂ derivative terms kept.
fn leading_v(params: &OperatorParams, nl: &NonlinearitySpec, t: f64) -> Result<(f64, f64)> {
    let beta1 = params.beta + 1.0;
    let theta = params.theta();
    let tau = theta * t;
    let (w, wp) = w_terms(params, nl, tau)?;
    let z = tau + (theta.powf(beta1) * (params.alpha_hat() - 1.0)).ln() + beta1 * w.ln();
    let v = nl.g(z);
    if !v.is_finite() {
        return Err(Error::Domain(format!("g(Z) not finite at t = {t}")));
    }
    // φ'(t) = (β+1) θ W'(τ)/W(τ); dZ/dt = θ + φ'.
    let phi_prime = beta1 * theta * wp / w;
    let vp = nl.g1(z) * (theta + phi_prime);
    Ok((v, vp))
}

/// Integrate the canonical singular solution outward from an asymptotic
/// seed at `r0`, locating its zero radius and hence λ*.
///
/// For the identity this reproduces [`exact_singular`] to solver accuracy.
pub fn numeric_singular(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    r0: f64,
    r_max: f64,
    tol: f64,
) -> Result<SingularSolution> {
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::Domain(format!("tol = {tol} outside [1e-14, 1e-3]")));
    }
    if !(r0 > 0.0 && r_max > r0) {
        return Err(Error::Domain(format!("need 0 < r0 < r_max (got {r0}, {r_max})")));
    }
    let beta1 = params.beta + 1.0;
    let theta = params.theta();
    let t0 = params.kappa0().ln() - r0.ln();
    let tau = theta * t0;
    if tau < 20.0 {
        return Err(Error::Seed(format!(
            "seed radius {r0} gives τ = θ·ln(κ₀/r0) = {tau:.2} < 20; move the seed inward"
        )));
    }
    let (v0, vp0) = leading_v(params, nl, t0).map_err(|e| Error::Seed(e.to_string()))?;
    if !(vp0 > 0.0) {
        return Err(Error::Seed(format!("seed derivative {vp0} not positive")));
    }
    let sigma0 = beta1 * vp0.ln() + (beta1 - params.alpha) * t0;

    let alpha_hat = params.alpha_hat();
    let gamma1 = params.gamma + 1.0;
    let nl_local = *nl;
    let clamp_at_zero = !nl.is_identity();
    let mut rhs = move |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        let [v, sigma] = *y;
        let x = (alpha_hat - 1.0) * t + sigma / beta1;
        if x > EXP_GUARD {
            return Err(Error::Blowup(format!("v' exponent {x:.1} at t = {t:.3}")));
        }
        // Trial stages may probe below the u = 0 stopping level.
        let v = if clamp_at_zero { v.max(0.0) } else { v };
        let fv = nl_local.f(v);
        if !fv.is_finite() {
            return Err(Error::Eval(format!("f({v}) non-finite")));
        }
        let e = -gamma1 * t + fv - sigma;
        if e > EXP_GUARD {
            return Err(Error::Blowup(format!("source exponent {e:.1} at t = {t:.3}")));
        }
        Ok([x.exp(), -beta1 * e.exp()])
    };

    let rtol = (0.05 * tol.powf(1.25)).max(3e-15);
    let opt = OdeOptions {
        rtol,
        atol: [1e-14_f64.min(rtol); 2],
        h0: Some(0.02),
        max_steps: 20_000_000,
    };
    let t_end = params.kappa0().ln() - r_max.ln();
    // Identity continues past its zero; restricted families stop there.
    let stop_at_zero = !nl.is_identity();
    let sol = if stop_at_zero {
        let mut ev = |_t: f64, y: &[f64; 2]| y[0];
        ode::integrate(&mut rhs, t0, [v0, sigma0], t_end, &opt, Some(&mut ev))?
    } else {
        ode::integrate(&mut rhs, t0, [v0, sigma0], t_end, &opt, None)?
    };
    let t_star = match sol.event_t {
        Some(t) => t,
        None => sol
            .locate(|_t, y| y[0])
            .ok_or_else(|| Error::Bracket("singular solution never reached zero".into()))?,
    };
    let lambda_star = beta1 * (-theta * t_star).exp();
    let core = NumericCore { params: *params, nl: *nl, t0, sol };

    let mut out = SingularSolution {
        kind: SingularKind::AsymptoticSeededNumeric,
        lambda_star,
        params: *params,
        nonlinearity: *nl,
        seed_radius: Some(r0),
        remainder_order_estimate: None,
        backing: Backing::Numeric(core),
    };
    out.remainder_order_estimate =
        remainder_fit(&out, (r0 * 1e2).min(1e-8).max(r0 * 4.0), 1e-3, tol).ok();
    Ok(out)
}

/// Least-squares slope q of ln|u*_numeric − g(Z)| against ln ln(1/r): the
/// remainder order of the asymptotic representation.
pub fn remainder_order(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    r_window: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let (r_lo, r_hi) = r_window;
    if !(0.0 < r_lo && r_lo < r_hi && r_hi < 1.0) {
        return Err(Error::Domain(format!("bad remainder window ({r_lo}, {r_hi})")));
    }
    // Seed far inside the window so seed transients are contracted away.
    let t_lo = params.kappa0().ln() - r_lo.ln();
    let t0 = 4.0 * t_lo.max(10.0);
    let r0 = (params.kappa0().ln() - t0).exp();
    let sing = numeric_singular(params, nl, r0, 100.0, tol)?;
    remainder_fit(&sing, r_lo, r_hi, tol)
}

fn remainder_fit(
    sing: &SingularSolution,
    r_lo: f64,
    r_hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(r_lo < r_hi) {
        return Err(Error::Fit("empty remainder window".into()));
    }
    let n = 24;
    let noise_floor = 50.0 * tol;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        let f = i as f64 / (n - 1) as f64;
        let r = (r_lo.ln() + f * (r_hi.ln() - r_lo.ln())).exp();
        let v_num = sing.eval_canonical(r)?;
        let (_, v_asym) = asymptotic_z(&sing.params, &sing.nonlinearity, 1.0, r)?;
        let diff = (v_num - v_asym).abs();
        if diff <= noise_floor * v_num.abs().max(1.0) {
            continue;
        }
        xs.push((1.0 / r).ln().ln());
        ys.push(diff.ln());
    }
    if xs.len() < 6 {
        return Err(Error::Fit(format!(
            "remainder below the noise floor on ({r_lo}, {r_hi}); only {} usable points",
            xs.len()
        )));
    }
    let nn = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nn;
    let my = ys.iter().sum::<f64>() / nn;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    Ok(-(sxy / sxx))
}

/// Shifted tail integral G(u) = ∫₀^∞ e^{−(f(u+x) − f(u))/(β+1)} dx, so that
/// 𝓕(u) = e^{−f(u)/(β+1)} G(u). Computed with adaptive panels plus an
/// integration-by-parts majorant for the cut tail.
fn shifted_tail_integral(nl: &NonlinearitySpec, beta1: f64, u: f64) -> Result<f64> {
    let rel = 1e-11;
    let f1 = nl.f1(u);
    let scale = if f1.is_finite() && f1 > 0.0 {
        (beta1 / f1).min(1e4)
    } else {
        1.0
    };
    let mut integrand = |x: f64| {
        let e = -nl.f_diff(u, x) / beta1;
        if e < -EXP_GUARD {
            0.0
        } else {
            e.exp()
        }
    };
    let mut upper = 8.0 * scale;
    let mut total = quad::integrate(&mut integrand, 0.0, upper, rel, 0.0)?;
    for _ in 0..80 {
        match tail_majorant(nl, beta1, u, upper) {
            Some(bound) if bound <= 1e-12 * total.abs().max(1e-300) => {
                return Ok(total);
            }
            _ => {
                total += quad::integrate(&mut integrand, upper, 2.0 * upper, rel, 1e-14 * total)?;
                upper *= 2.0;
            }
        }
    }
    Err(Error::Tail(format!(
        "no cutoff below x = {upper:.3e} met the tail bound for u = {u}"
    )))
}

/// Upper bound for ∫_{x_cut}^∞ e^{−(f(u+x)−f(u))/(β+1)} dx, valid once the
/// concave part of f beyond the cut is controlled.
fn tail_majorant(nl: &NonlinearitySpec, beta1: f64, u: f64, x_cut: f64) -> Option<f64> {
    let fd = nl.f_diff(u, x_cut);
    if !fd.is_finite() {
        return None;
    }
    if fd / beta1 > EXP_GUARD {
        return Some(0.0);
    }
    let fp = nl.f1(u + x_cut);
    if !(fp.is_finite() && fp > 0.0) {
        return None;
    }
    let base = beta1 * (-fd / beta1).exp() / fp;
    let t_cut = nl.f(u + x_cut);
    if !t_cut.is_finite() {
        return Some(base * 2.0);
    }
    let c = beta1 * nl.gpp_over_gp_sup(t_cut);
    if c < 0.5 {
        Some(base / (1.0 - c))
    } else {
        None
    }
}

/// 𝓕(u) = ∫_u^∞ exp{−f(s)/(1+β)} ds, to relative accuracy 1e−9.
///
/// May underflow to zero for extreme u; [`ln_cal_f`] stays finite.
pub fn cal_f(nl: &NonlinearitySpec, params: &OperatorParams, u: f64) -> Result<f64> {
    let beta1 = params.beta + 1.0;
    let g = shifted_tail_integral(nl, beta1, u)?;
    Ok((-nl.f(u) / beta1).exp() * g)
}

/// ln 𝓕(u), finite as long as f(u) is.
pub fn ln_cal_f(nl: &NonlinearitySpec, params: &OperatorParams, u: f64) -> Result<f64> {
    let beta1 = params.beta + 1.0;
    let g = shifted_tail_integral(nl, beta1, u)?;
    Ok(-nl.f(u) / beta1 + g.ln())
}

/// I(u) = 𝓕(u) f'(u) e^{f(u)/(β+1)}, evaluated overflow-free; equals β+1
/// identically for f(u) = u and tends to β+1 as u → ∞ in general.
pub fn i_fun(nl: &NonlinearitySpec, params: &OperatorParams, u: f64) -> Result<f64> {
    let beta1 = params.beta + 1.0;
    let g = shifted_tail_integral(nl, beta1, u)?;
    Ok(g * nl.f1(u))
}

/// Solve the initial-value problem just past the transform window: the
/// integration stops at the anchored log radius of ε_ρ·(4 s_max) instead of
/// marching to an r-space target. For fast-growing f and large ρ, ε_ρ
/// underflows f64 and a full march to any representable radius would cross
/// hundreds of millions of log units; the transform only ever looks at the
/// ε_ρ-scale.
pub fn solve_transform_window(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    rho: f64,
    s_max: f64,
    tol: f64,
) -> Result<RadialTrajectory> {
    if !(s_max > 0.0) {
        return Err(Error::Domain(format!("s_max = {s_max} must be positive")));
    }
    let beta1 = params.beta + 1.0;
    let g_rho = shifted_tail_integral(nl, beta1, rho)?;
    let ln_f1_at_1 = beta1.ln() - 1.0 / beta1;
    // τ(s) = ln κ₀ + (f(ρ)/θ − t_ref) + (β+1)/θ·(ln𝓕₁(1) − lnG(ρ)) − ln s;
    // the anchor residue is O(ulp) and ignorable for the window cut.
    let ln_kappa0 = beta1.ln() / params.theta();
    let tau_base = ln_kappa0 + beta1 / params.theta() * (ln_f1_at_1 - g_rho.ln());
    let tau_end = tau_base - (4.0 * s_max).ln();
    crate::solver::solve_to_tau(params, nl, rho, tau_end, tol)
}

/// The transform ũ(s) = 𝓕₁⁻¹{ε_ρ^{−θ/(β+1)} 𝓕(u(ε_ρ s))} of a regular
/// trajectory, with ε_ρ = (𝓕(ρ)/𝓕₁(1))^{(β+1)/θ}. Always ũ(0) = 1.
///
/// Evaluated fully in log space: the scale ε_ρ routinely underflows f64
/// for fast-growing f, so the radius ε_ρ·s is never materialized.
pub fn transform_tilde(traj: &RadialTrajectory, s_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if traj.rho <= 1.0 {
        return Err(Error::Domain(format!(
            "transform needs ρ > 1 (got ρ = {})",
            traj.rho
        )));
    }
    let params = traj.params;
    let nl = traj.nonlinearity;
    let beta1 = params.beta + 1.0;
    let core = &traj.core;
    let g_rho = shifted_tail_integral(&nl, beta1, traj.rho)?;
    let ln_f1_at_1 = beta1.ln() - 1.0 / beta1;
    // τ(s) = ln κ₀ + (f(ρ)/θ − t_ref) + (β+1)/θ·(ln𝓕₁(1) − lnG(ρ)) − ln s.
    let tau_base =
        core.ln_kappa0() + core.div_residue + beta1 / params.theta() * (ln_f1_at_1 - g_rho.ln());
    let mut out = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if s < 0.0 {
            return Err(Error::Domain(format!("s = {s} must be ≥ 0")));
        }
        if s == 0.0 {
            out.push((0.0, 1.0));
            continue;
        }
        let tau = tau_base - s.ln();
        let [dv, _] = core.state(tau)?;
        let v = traj.rho + dv;
        let g_v = shifted_tail_integral(&nl, beta1, v)?;
        let fd = nl.f_diff(traj.rho, dv);
        let value = fd - beta1 * (g_v.ln() - g_rho.ln()) + 1.0;
        if !value.is_finite() {
            return Err(Error::Domain(format!("transform non-finite at s = {s}")));
        }
        out.push((s, value));
    }
    Ok(out)
}

/// The same transform applied to a singular solution; for the identity the
/// result is exactly w*(s) = ln{θ^{β+1}(α−β−1)} − θ ln s, independent of ρ.
pub fn transform_tilde_singular(
    sing: &SingularSolution,
    rho: f64,
    s_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if rho <= 1.0 {
        return Err(Error::Domain(format!("transform needs ρ > 1 (got ρ = {rho})")));
    }
    let params = sing.params;
    let nl = sing.nonlinearity;
    let beta1 = params.beta + 1.0;
    let ln_f1_at_1 = beta1.ln() - 1.0 / beta1;
    let ln_eps = beta1 / params.theta() * (ln_cal_f(&nl, &params, rho)? - ln_f1_at_1);
    let mut out = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if s <= 0.0 {
            return Err(Error::Domain("singular transform needs s > 0".into()));
        }
        // r = ε_ρ s in log form.
        let ln_r = ln_eps + s.ln();
        let value = match &sing.backing {
            Backing::Exact => {
                // ln𝓕(u*) = ln(β+1) − u*/ (β+1) with u* = lnλ* − θ ln r.
                let u_star = sing.lambda_star.ln() - params.theta() * ln_r;
                let ln_f = beta1.ln() - u_star / beta1;
                -beta1 * (ln_f - params.theta_hat() * ln_eps - beta1.ln())
            }
            Backing::Numeric(core) => {
                let t = params.kappa0().ln() - ln_r;
                let v = core.v_at(t)?;
                let ln_f = ln_cal_f(&nl, &params, v)?;
                -beta1 * (ln_f - params.theta_hat() * ln_eps - beta1.ln())
            }
        };
        out.push((s, value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Family;
    use crate::solver::solve_ivp;

    fn d3k1() -> OperatorParams {
        OperatorParams::khessian(3, 1).unwrap()
    }

    fn exp_family() -> NonlinearitySpec {
        NonlinearitySpec::new(Family::IterExp { n: 1, p: 1.0 }).unwrap()
    }

    #[test]
    fn exact_singular_values() {
        let s = exact_singular(&d3k1());
        assert_eq!(s.lambda_star, 2.0);
        assert_eq!(s.eval_scaled(1.0).unwrap(), 0.0);
        let r = 0.1_f64;
        assert!((s.eval_scaled(r).unwrap() - (-2.0) * r.ln()).abs() < 1e-14);

        let s52 = exact_singular(&OperatorParams::khessian(5, 2).unwrap());
        assert_eq!(s52.lambda_star, 16.0);
        assert!((s52.eval_scaled(0.3).unwrap() - (-4.0) * 0.3_f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn exact_residual_tiny_across_operators() {
        for (d, k) in [(3, 1), (5, 2), (7, 3)] {
            let params = OperatorParams::khessian(d, k).unwrap();
            for i in 0..40 {
                let r = 10f64.powf(-8.0 + 8.0 * i as f64 / 39.0);
                let res = exact_singular_residual(&params, r);
                assert!(res <= 1e-12, "(d,k)=({d},{k}) r={r}: residual {res:.3e}");
            }
        }
    }

    #[test]
    fn asymptotic_z_reduces_to_exact_for_identity() {
        let params = d3k1();
        let nl = NonlinearitySpec::identity();
        let lambda = params.lambda_star_exact();
        for &r in &[1e-6, 1e-3, 0.5] {
            let (z, u) = asymptotic_z(&params, &nl, lambda, r).unwrap();
            assert!((z - (-params.theta() * r.ln())).abs() < 1e-12, "r = {r}");
            assert_eq!(z, u);
        }
    }

    #[test]
    fn asymptotic_z_matches_displayed_exponential_form() {
        // For f = e^u, β = 0, the bracketed form in the r-rescaled frame:
        // u*(r λ*^{-1/θ}) = ln{θ ln(1/r) + ln[(α̂−1)/ln(k/r)]
        //                   + ln(1 + ln{θ ln(k/r)}/{θ ln(k/r)})}, k = (1+β)^{1/θ}.
        let params = d3k1();
        let nl = exp_family();
        let theta = params.theta();
        let lambda = 3.7_f64; // arbitrary positive normalization
        for &r in &[1e-10, 1e-7, 1e-5] {
            let r_scaled = r * lambda.powf(-1.0 / theta);
            let (_, u) = asymptotic_z(&params, &nl, lambda, r_scaled).unwrap();
            let k = (params.beta + 1.0_f64).powf(1.0 / theta);
            let tau = theta * (k / r).ln();
            let inner = theta * (1.0 / r).ln()
                + ((params.alpha_hat() - 1.0) / (k / r).ln()).ln()
                + (params.beta + 1.0) * ((params.beta + 1.0) * tau.ln() / tau).ln_1p();
            let expect = inner.ln();
            assert!(
                (u - expect).abs() <= 1.0 / (1.0 / r).ln().powi(2),
                "r = {r}: {u} vs {expect}"
            );
        }
    }

    #[test]
    fn asymptotic_z_power_leading_order() {
        let params = d3k1();
        let nl = NonlinearitySpec::new(Family::Power { p: 2.0 }).unwrap();
        let r = 1e-12;
        let (_, u) = asymptotic_z(&params, &nl, 1.0, r).unwrap();
        let lead = (params.theta() * (1.0 / r).ln()).sqrt();
        assert!((u / lead - 1.0).abs() < 0.2, "u = {u}, leading {lead}");
    }

    #[test]
    fn asymptotic_z_rejects_large_radius() {
        // For f = e^u the log argument turns non-positive once r is O(1).
        let params = d3k1();
        let nl = exp_family();
        assert!(asymptotic_z(&params, &nl, 1.0, 0.9).is_err());
    }

    #[test]
    fn numeric_singular_recovers_identity_lambda() {
        let params = d3k1();
        let nl = NonlinearitySpec::identity();
        let sing = numeric_singular(&params, &nl, 1e-6, 2.0, 1e-10).unwrap();
        assert!((sing.lambda_star - 2.0).abs() < 1e-4, "λ* = {}", sing.lambda_star);
        // And against the exact solution in sup norm on [1e−4, 1].
        let exact = exact_singular(&params);
        let mut sup: f64 = 0.0;
        for i in 0..60 {
            let r = 10f64.powf(-4.0 + 4.0 * i as f64 / 59.0);
            let d = (sing.eval_canonical(r).unwrap() - exact.eval_canonical(r).unwrap()).abs();
            sup = sup.max(d);
        }
        assert!(sup <= 1e-6, "sup difference {sup:.3e}");
    }

    #[test]
    fn numeric_singular_rejects_shallow_seed() {
        let params = d3k1();
        match numeric_singular(&params, &NonlinearitySpec::identity(), 0.5, 2.0, 1e-10) {
            Err(Error::Seed(_)) => {}
            other => panic!("expected Seed error, got {other:?}"),
        }
    }

    #[test]
    fn numeric_singular_exponential_stable_under_seed_refinement() {
        let params = d3k1();
        let nl = exp_family();
        let s1 = numeric_singular(&params, &nl, 1e-7, 2.0, 1e-10).unwrap();
        let s2 = numeric_singular(&params, &nl, 1e-8, 2.0, 1e-10).unwrap();
        assert!(s1.lambda_star > 0.0 && s1.lambda_star.is_finite());
        let rel = (s1.lambda_star - s2.lambda_star).abs() / s1.lambda_star;
        assert!(rel < 0.01, "λ* moved by {rel:.3e} under seed refinement");
    }

    #[test]
    fn remainder_identity_is_noise() {
        let params = d3k1();
        match remainder_order(&params, &NonlinearitySpec::identity(), (1e-8, 1e-3), 1e-10) {
            Err(Error::Fit(_)) => {}
            other => panic!("expected Fit error, got {other:?}"),
        }
    }

    #[test]
    fn remainder_exponential_order_near_two() {
        // The (ln 1/r)^{-2} decay emerges once ln(1/r) ≳ 20; shallower
        // windows sit in a pre-asymptotic transient with a smaller local
        // slope (the window [1e-8, 1e-3] fits to q ≈ 1.26).
        let params = d3k1();
        let q = remainder_order(&params, &exp_family(), (1e-20, 1e-9), 1e-10).unwrap();
        assert!(q >= 1.8, "fitted q = {q}");
        assert!(q <= 2.3, "fitted q = {q}");
    }

    #[test]
    fn remainder_power_matches_three_halves() {
        let params = d3k1();
        let nl = NonlinearitySpec::new(Family::Power { p: 2.0 }).unwrap();
        let q = remainder_order(&params, &nl, (1e-26, 1e-12), 1e-10).unwrap();
        assert!((1.3..=1.7).contains(&q), "fitted q = {q}");
    }

    #[test]
    fn cal_f_closed_forms() {
        let nl = NonlinearitySpec::identity();
        let d3 = d3k1(); // β = 0
        assert!((cal_f(&nl, &d3, 0.0).unwrap() - 1.0).abs() < 1e-10);
        for &u in &[0.5_f64, 3.0, 20.0] {
            let expect = (-u).exp();
            assert!((cal_f(&nl, &d3, u).unwrap() - expect).abs() < 1e-10 * expect);
        }
        let d52 = OperatorParams::khessian(5, 2).unwrap(); // β = 1
        for &u in &[0.0_f64, 1.0, 10.0] {
            let expect = 2.0 * (-u / 2.0).exp();
            assert!((cal_f(&nl, &d52, u).unwrap() - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn cal_f_exponential_matches_e1_oracle() {
        // 𝓕(0) for f = e^s equals E₁(1): series oracle
        // E₁(1) = −γ − Σ_{k≥1} (−1)^k / (k·k!).
        let mut e1 = -0.577_215_664_901_532_9_f64;
        let mut term = -1.0_f64;
        for k in 1..40 {
            term *= -1.0 / k as f64;
            e1 += term / k as f64;
        }
        let v = cal_f(&exp_family(), &d3k1(), 0.0).unwrap();
        assert!((v - e1).abs() < 1e-9, "{v} vs E₁(1) = {e1}");
    }

    #[test]
    fn i_fun_identity_is_beta_plus_one() {
        let nl = NonlinearitySpec::identity();
        for (params, expect) in [
            (d3k1(), 1.0),
            (OperatorParams::khessian(5, 2).unwrap(), 2.0),
            (OperatorParams::khessian(7, 3).unwrap(), 3.0),
        ] {
            for &u in &[0.0, 1.0, 17.0, 50.0] {
                let v = i_fun(&nl, &params, u).unwrap();
                assert!((v - expect).abs() < 1e-8, "β+1 = {expect}, got {v} at u = {u}");
            }
        }
    }

    #[test]
    fn i_fun_exponential_tends_to_one() {
        let v = i_fun(&exp_family(), &d3k1(), 20.0).unwrap();
        assert!((v - 1.0).abs() < 0.05, "I(20) = {v}");
        let far = i_fun(&exp_family(), &d3k1(), 30.0).unwrap();
        assert!((far - 1.0).abs() < (v - 1.0).abs().max(1e-12) + 1e-9);
    }

    #[test]
    fn transform_normalizes_to_one_and_stays_below() {
        let params = d3k1();
        let nl = NonlinearitySpec::identity();
        let traj = solve_ivp(&params, &nl, 5.0, 2.0, 1e-10).unwrap();
        let grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let tilde = transform_tilde(&traj, &grid).unwrap();
        assert_eq!(tilde[0], (0.0, 1.0));
        for &(s, v) in &tilde {
            assert!(v <= 1.0 + 1e-9, "ũ({s}) = {v} exceeds 1");
        }
        // ũ decreases like a regular solution profile.
        assert!(tilde.last().unwrap().1 < 0.9);
    }

    #[test]
    fn transform_of_exact_singular_is_w_star() {
        let params = d3k1();
        let sing = exact_singular(&params);
        let grid = [0.2, 0.7, 1.3, 2.0];
        let tilde = transform_tilde_singular(&sing, 7.0, &grid).unwrap();
        for (s, v) in tilde {
            let expect = sing.w_star(s);
            assert!((v - expect).abs() < 1e-10, "s = {s}: {v} vs {expect}");
        }
    }

    #[test]
    fn transform_converges_to_canonical_profile_for_exponential() {
        // ũ(·, ρ) → w on [0, 2] as ρ grows, where L(w) + e^w = 0, w(0) = 1.
        let params = d3k1();
        let nl = exp_family();
        let w = solve_ivp(&params, &NonlinearitySpec::identity(), 1.0, 2.5, 1e-12).unwrap();
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.05).collect();
        let mut sups = Vec::new();
        for rho in [10.0, 15.0, 20.0] {
            let traj = solve_transform_window(&params, &nl, rho, 2.0, 1e-12).unwrap();
            let tilde = transform_tilde(&traj, &grid).unwrap();
            let mut sup: f64 = 0.0;
            for &(s, v) in &tilde {
                sup = sup.max((v - w.eval_u(s).unwrap()).abs());
            }
            sups.push(sup);
        }
        assert!(
            sups[0] > sups[1] && sups[1] > sups[2],
            "sup distances not decreasing: {sups:?}"
        );
    }
}
