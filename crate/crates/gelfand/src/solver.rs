//! Shooting solver for the initial-value problem
//! −L(u) = e^{f(u)}, u(0) = ρ, u'(0) = 0, with L(u) = r^{-γ}(r^α|u'|^β u')'.
//!
//! The integration runs in the log radius t = ln(κ₀/r), κ₀ = (β+1)^{1/θ},
//! on the pair (v − ρ, ŝ), where v(t) = u(r) and ŝ is the log of the first
//! integral m = r^α|u'|^{β+1} relative to its leading behaviour near the
//! origin. This keeps every exponent O(1) near the origin even when
//! e^{f(ρ)} overflows by hundreds of millions of orders of magnitude, and
//! it makes the solver's accuracy contract (the first-integral defect) a
//! direct consequence of the step tolerance. A two-term analytic expansion
//! u = ρ − c·r^{θ̂} + q(c·r^{θ̂})², c = θ̂^{-1}(e^{f(ρ)}/(γ+1))^{1/(β+1)},
//! steps off the degenerate point r = 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::ode::{self, OdeOptions, OdeSolution};
use crate::params::OperatorParams;
use crate::quad;

/// Natural-log overflow guard for combined exponents.
pub(crate) const EXP_GUARD: f64 = 700.0;

/// One stored sample of a radial trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectorySample {
    pub r: f64,
    pub u: f64,
    pub uprime: f64,
}

/// Monotone radial solution with dense evaluation over its full range.
#[derive(Debug, Clone)]
pub struct RadialTrajectory {
    pub params: OperatorParams,
    pub nonlinearity: NonlinearitySpec,
    pub rho: f64,
    /// Requested local tolerance (the first-integral defect contract).
    pub tol: f64,
    /// Largest radius reached.
    pub r_max: f64,
    /// Samples at accepted steps, restricted to radii representable in f64.
    pub samples: Vec<TrajectorySample>,
    pub(crate) core: LogCore,
    /// r ↦ u(scale·r) reparametrization applied by `to_scaled`.
    pub(crate) r_scale: f64,
}

/// Anchored log-radius representation of one solve.
#[derive(Debug, Clone)]
pub(crate) struct LogCore {
    pub(crate) params: OperatorParams,
    pub(crate) nl: NonlinearitySpec,
    pub(crate) rho: f64,
    /// Anchor t_ref = fl(f(ρ)/θ); τ = t − t_ref.
    pub(crate) t_ref: f64,
    /// Exact residue f(ρ)/θ − t_ref of the anchor division.
    pub(crate) div_residue: f64,
    /// x_const in v'(t) = exp(−θ̂τ + x_const + ŝ/(β+1)).
    pub(crate) x_const: f64,
    /// Second-order startup coefficient q.
    pub(crate) q2: f64,
    pub(crate) tau_start: f64,
    pub(crate) sol: OdeSolution<2>,
}

impl LogCore {
    fn beta1(&self) -> f64 {
        self.params.beta + 1.0
    }

    pub(crate) fn ln_kappa0(&self) -> f64 {
        self.beta1().ln() / self.params.theta()
    }

    pub(crate) fn tau_of_r(&self, r: f64) -> f64 {
        self.ln_kappa0() - r.ln() - self.t_ref
    }

    pub(crate) fn r_of_tau(&self, tau: f64) -> f64 {
        (self.ln_kappa0() - self.t_ref - tau).exp()
    }

    pub(crate) fn tau_end(&self) -> f64 {
        self.sol.t_end
    }

    /// Departure ε(τ) = c·r^{θ̂} of the analytic startup.
    fn startup_eps(&self, tau: f64) -> f64 {
        (self.x_const - self.params.theta_hat() * tau).exp() / self.params.theta_hat()
    }

    /// State (dv, ŝ) at τ, using the startup expansion above `tau_start`.
    pub(crate) fn state(&self, tau: f64) -> Result<[f64; 2]> {
        if tau > self.tau_start {
            let eps = self.startup_eps(tau);
            let dv = -eps * (1.0 - self.q2 * eps);
            let sh = (-2.0 * self.beta1() * self.q2 * eps).ln_1p();
            return Ok([dv, sh]);
        }
        let (lo, hi) = (self.sol.t_end, self.sol.t_start);
        if tau < lo - 1e-9 * lo.abs().max(1.0) {
            return Err(Error::Domain(format!(
                "τ = {tau} below the integrated range [{lo}, {hi}]"
            )));
        }
        Ok(self.sol.eval(tau.max(lo)))
    }

    /// ln v'(t) at τ.
    pub(crate) fn ln_vprime(&self, tau: f64) -> Result<f64> {
        if tau > self.tau_start {
            let eps = self.startup_eps(tau);
            let vp = self.params.theta_hat() * eps * (1.0 - 2.0 * self.q2 * eps);
            return Ok(vp.ln());
        }
        let [_, sh] = self.state(tau)?;
        Ok(-self.params.theta_hat() * tau + self.x_const + sh / self.beta1())
    }

    pub(crate) fn u_at(&self, r: f64) -> Result<f64> {
        Ok(self.rho + self.state(self.tau_of_r(r))?[0])
    }

    pub(crate) fn uprime_at(&self, r: f64) -> Result<f64> {
        let tau = self.tau_of_r(r);
        // u'(r) = −v'(t)/r.
        let ln_up = self.ln_vprime(tau)? - r.ln();
        if ln_up > EXP_GUARD {
            return Err(Error::Eval(format!("u'({r}) overflows")));
        }
        Ok(-ln_up.exp())
    }

    /// First τ (marching downward) where v = B, if reached.
    pub(crate) fn tau_level(&self, level_b: f64) -> Option<f64> {
        if level_b == self.rho {
            return None; // attained only at r = 0
        }
        let target = level_b - self.rho;
        if let Some(te) = self.sol.event_t {
            let [dv, _] = self.sol.y_end;
            if (dv - target).abs() <= 1e-9 * target.abs().max(1.0) {
                return Some(te);
            }
        }
        self.sol.locate(|_t, y| y[0] - target)
    }
}

struct Anchored {
    params: OperatorParams,
    nl: NonlinearitySpec,
    rho: f64,
    f_rho: f64,
    t_ref: f64,
    div_residue: f64,
    x_const: f64,
    e_const: f64,
    q2: f64,
    eps_dep: f64,
    tau_start: f64,
}

/// Exact double-double residue of a·b − c·d style combinations via FMA.
fn two_product_residue(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn anchor(params: &OperatorParams, nl: &NonlinearitySpec, rho: f64, tol: f64) -> Result<Anchored> {
    let beta1 = params.beta + 1.0;
    let gamma1 = params.gamma + 1.0;
    let theta = params.theta();
    let theta_hat = params.theta_hat();

    let f_rho = nl.f(rho);
    if !f_rho.is_finite() {
        return Err(Error::Domain(format!("f(ρ) = f({rho}) is not finite")));
    }
    let t_ref = f_rho / theta;
    // Exact residue of the anchor division: f(ρ)/θ − t_ref.
    let div_residue = (-t_ref).mul_add(theta, f_rho) / theta;
    // x_const = f(ρ)/(β+1) − θ̂·t_ref + ln((β+1)/(γ+1))/(β+1), with the two
    // large terms cancelled in compensated arithmetic.
    let q_div = f_rho / beta1;
    let q_res = (-q_div).mul_add(beta1, f_rho) / beta1;
    let (p, p_res) = two_product_residue(theta_hat, t_ref);
    let e_const = (beta1 / gamma1).ln();
    let x_const = (q_div - p) + (q_res - p_res) + e_const / beta1;

    let fp = nl.f1(rho);
    let (fp_eps, q2) = if fp.is_finite() && fp >= 0.0 {
        (fp.max(1.0), fp * gamma1 / (2.0 * beta1 * (gamma1 + theta_hat)))
    } else {
        (1e300, 0.0)
    };
    // Handoff departure ε = ρ − u: the two-term expansion leaves a relative
    // error O((ε f'(ρ))²), which must stay below the tolerance budget.
    let eps_dep = ((0.01 * tol.min(1e-8)).sqrt() / fp_eps).clamp(1e-280, 1e-10);
    let tau_start = (x_const - (theta_hat * eps_dep).ln()) / theta_hat;

    Ok(Anchored {
        params: *params,
        nl: *nl,
        rho,
        f_rho,
        t_ref,
        div_residue,
        x_const,
        e_const,
        q2,
        eps_dep,
        tau_start,
    })
}

impl Anchored {
    fn initial_state(&self) -> [f64; 2] {
        let eps = self.eps_dep;
        [
            -eps * (1.0 - self.q2 * eps),
            (-2.0 * (self.params.beta + 1.0) * self.q2 * eps).ln_1p(),
        ]
    }

    fn rhs(&self, tau: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        let beta1 = self.params.beta + 1.0;
        let gamma1 = self.params.gamma + 1.0;
        let [dv, sh] = *y;
        let x = -self.params.theta_hat() * tau + self.x_const + sh / beta1;
        if x > EXP_GUARD {
            return Err(Error::Blowup(format!("v' exponent {x:.1} at τ = {tau:.3}")));
        }
        // Families restricted to u ≥ 0 stop at the zero level; trial stages
        // may still probe below it and are clamped there.
        let dv = if self.nl.is_identity() { dv } else { dv.max(-self.rho) };
        let fd = self.nl.f_diff(self.rho, dv);
        if !fd.is_finite() {
            return Err(Error::Eval(format!("f(u) − f(ρ) non-finite at u = {}", self.rho + dv)));
        }
        let e = fd - sh - self.e_const;
        if e > EXP_GUARD {
            return Err(Error::Blowup(format!("source exponent {e:.1} at τ = {tau:.3}")));
        }
        Ok([x.exp(), gamma1 - beta1 * e.exp()])
    }

    /// March from the startup point down to `tau_end`, optionally stopping
    /// where v = level_b.
    fn run(&self, tau_end: f64, level: Option<f64>, tol: f64) -> Result<OdeSolution<2>> {
        // Exponent 5/4 makes the accumulated defect scale linearly with the
        // requested tolerance under per-step error control.
        let rtol = (0.05 * tol.powf(1.25)).max(3e-15);
        let opt = OdeOptions {
            rtol,
            // dv is controlled relatively (it spans many orders); the ŝ
            // component needs an absolute floor against source-term noise.
            atol: [1e-290, 1e-14_f64.min(rtol)],
            h0: Some(0.05 / self.params.theta_hat().max(1.0)),
            max_steps: 40_000_000,
        };
        let y0 = self.initial_state();
        let mut rhs = |t: f64, y: &[f64; 2]| self.rhs(t, y);
        match level {
            Some(b) => {
                let target = b - self.rho;
                let mut ev = move |_t: f64, y: &[f64; 2]| y[0] - target;
                ode::integrate(&mut rhs, self.tau_start, y0, tau_end, &opt, Some(&mut ev))
            }
            None => ode::integrate(&mut rhs, self.tau_start, y0, tau_end, &opt, None),
        }
    }

    fn into_core(self, sol: OdeSolution<2>) -> LogCore {
        LogCore {
            params: self.params,
            nl: self.nl,
            rho: self.rho,
            t_ref: self.t_ref,
            div_residue: self.div_residue,
            x_const: self.x_const,
            q2: self.q2,
            tau_start: self.tau_start,
            sol,
        }
    }
}

fn validate_solve_inputs(rho: f64, tol: f64) -> Result<()> {
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::Domain(format!("tol = {tol} outside [1e-14, 1e-3]")));
    }
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::Domain(format!("ρ = {rho} must be ≥ 0")));
    }
    Ok(())
}

/// Integrate −L(u) = e^{f(u)}, u(0) = ρ, u'(0) = 0 out to `r_max`.
///
/// The returned trajectory satisfies the first-integral accuracy contract
/// r^α|u'|^{β+1} = ∫₀^r s^γ e^{f(u)} ds to relative `tol` at every sample.
/// For nonlinearities defined on u ≥ 0 only, integration stops at u = 0.
pub fn solve_ivp(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    rho: f64,
    r_max: f64,
    tol: f64,
) -> Result<RadialTrajectory> {
    validate_solve_inputs(rho, tol)?;
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::Domain(format!("r_max = {r_max} must be positive")));
    }
    let anchored = anchor(params, nl, rho, tol)?;
    let ln_kappa0 = (params.beta + 1.0).ln() / params.theta();
    let tau_target = ln_kappa0 - r_max.ln() - anchored.t_ref;
    if tau_target >= anchored.tau_start {
        return Err(Error::Domain(format!(
            "r_max = {r_max} lies inside the analytic startup region"
        )));
    }
    // Families defined only for u ≥ 0 stop at the zero radius.
    let level = if nl.is_identity() { None } else { Some(0.0) };
    let sol = anchored.run(tau_target, level, tol)?;
    let core = anchored.into_core(sol);
    Ok(build_trajectory(core, tol))
}

/// Integrate only down to a prescribed anchored log-radius τ. Used when the
/// region of interest sits at the (possibly unrepresentably small) scale of
/// the solution's own departure from ρ.
pub(crate) fn solve_to_tau(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    rho: f64,
    tau_end: f64,
    tol: f64,
) -> Result<RadialTrajectory> {
    validate_solve_inputs(rho, tol)?;
    let anchored = anchor(params, nl, rho, tol)?;
    if tau_end >= anchored.tau_start {
        return Err(Error::Domain(format!(
            "τ_end = {tau_end} lies inside the analytic startup region"
        )));
    }
    let level = if nl.is_identity() { None } else { Some(0.0) };
    let sol = anchored.run(tau_end, level, tol)?;
    let core = anchored.into_core(sol);
    Ok(build_trajectory(core, tol))
}

fn build_trajectory(core: LogCore, tol: f64) -> RadialTrajectory {
    let mut samples = Vec::new();
    let ln_k0 = core.ln_kappa0();
    let push_tau = |tau: f64, state: [f64; 2], out: &mut Vec<TrajectorySample>| {
        let ln_r = ln_k0 - core.t_ref - tau;
        if !(-root_ln_guard()..=root_ln_guard()).contains(&ln_r) {
            return;
        }
        let r = ln_r.exp();
        let u = core.rho + state[0];
        let beta1 = core.params.beta + 1.0;
        let ln_up = -core.params.theta_hat() * tau + core.x_const + state[1] / beta1 - ln_r;
        if ln_up.abs() > root_ln_guard() {
            return;
        }
        let uprime = -ln_up.exp();
        if uprime < 0.0 {
            out.push(TrajectorySample { r, u, uprime });
        }
    };
    push_tau(core.sol.t_start, core.sol.y_start, &mut samples);
    for step in &core.sol.steps {
        let tau = step.t1.max(core.sol.t_end);
        push_tau(tau, step.eval(tau), &mut samples);
        if tau == core.sol.t_end {
            break;
        }
    }
    let r_max = samples.last().map(|s| s.r).unwrap_or(0.0);
    RadialTrajectory {
        params: core.params,
        nonlinearity: core.nl,
        rho: core.rho,
        tol,
        r_max,
        samples,
        core,
        r_scale: 1.0,
    }
}

fn root_ln_guard() -> f64 {
    708.0
}

impl RadialTrajectory {
    /// Dense evaluation of u at radius `r`.
    pub fn eval_u(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(self.rho);
        }
        self.core.u_at(r * self.r_scale)
    }

    /// Dense evaluation of u' at radius `r`.
    pub fn eval_uprime(&self, r: f64) -> Result<f64> {
        Ok(self.core.uprime_at(r * self.r_scale)? * self.r_scale)
    }

    /// Radius where u = 0, when the trajectory reaches it.
    pub fn r_zero(&self) -> Option<f64> {
        self.find_level(0.0)
    }

    /// Radius where u = B (B < ρ), when reached inside the integrated span.
    pub fn find_level(&self, level_b: f64) -> Option<f64> {
        let tau = self.core.tau_level(level_b)?;
        Some(self.core.r_of_tau(tau) / self.r_scale)
    }

    /// Reparametrize by u_λ(r) = u(λ^{1/θ} r); with λ = λ(ρ) the boundary
    /// value u_λ(1) vanishes.
    pub fn to_scaled(&self, lambda: f64) -> Result<RadialTrajectory> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("λ = {lambda} must be positive")));
        }
        let factor = lambda.powf(1.0 / self.params.theta());
        let mut out = self.clone();
        out.r_scale = self.r_scale * factor;
        out.r_max = self.r_max / factor;
        for s in &mut out.samples {
            s.r /= factor;
            s.uprime *= factor;
        }
        Ok(out)
    }

    /// CSV export: header `r,u,uprime`, 17-significant-digit floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u,uprime\n");
        for s in &self.samples {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s.r, s.u, s.uprime));
        }
        out
    }

    /// JSON export with a metadata block.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Export<'a> {
            params: &'a OperatorParams,
            nonlinearity: &'a NonlinearitySpec,
            rho: f64,
            tol: f64,
            r_max: f64,
            samples: &'a [TrajectorySample],
        }
        serde_json::to_string_pretty(&Export {
            params: &self.params,
            nonlinearity: &self.nonlinearity,
            rho: self.rho,
            tol: self.tol,
            r_max: self.r_max,
            samples: &self.samples,
        })
        .expect("trajectory serialization")
    }
}

/// Level radius R(B, ρ): the unique r with u(r, ρ) = B, for 0 ≤ B ≤ ρ.
pub fn find_radius(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    rho: f64,
    level_b: f64,
    tol: f64,
) -> Result<f64> {
    validate_solve_inputs(rho, tol)?;
    if !(0.0..=rho).contains(&level_b) {
        return Err(Error::Domain(format!("B = {level_b} outside [0, ρ = {rho}]")));
    }
    if level_b == rho {
        return Ok(0.0);
    }
    let anchored = anchor(params, nl, rho, tol)?;
    let theta_hat = params.theta_hat();
    // March far enough that the level must have been crossed; the span is
    // generous because u decays at least like the pure-power solution.
    let tau_floor = anchored.tau_start - (200.0 + anchored.f_rho.abs() / theta_hat) - 400.0;
    let sol = anchored.run(tau_floor, Some(level_b), tol)?;
    let core = anchored.into_core(sol);
    match core.sol.event_t {
        Some(tau) => Ok(core.r_of_tau(tau)),
        None => Err(Error::Bracket(format!(
            "u never reached B = {level_b} before τ = {tau_floor}"
        ))),
    }
}

/// λ(ρ) = R(0, ρ)^θ, the nonlinear eigenvalue of the ρ-parametrized branch.
pub fn lambda_of_rho(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    rho: f64,
    tol: f64,
) -> Result<f64> {
    let r0 = find_radius(params, nl, rho, 0.0, tol)?;
    Ok(r0.powf(params.theta()))
}

/// ∫₀^u e^{f(t)} dt (closed form for the identity, quadrature otherwise).
pub(crate) fn exp_f_antiderivative(
    nl: &NonlinearitySpec,
    u: f64,
    rel_tol: f64,
) -> Result<f64> {
    if nl.is_identity() {
        return Ok(u.exp_m1());
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    if u < 0.0 {
        return Err(Error::Domain(
            "∫ e^f below u = 0 needs the identity family".into(),
        ));
    }
    let mut f = |s: f64| {
        let fs = nl.f(s);
        if fs > EXP_GUARD {
            f64::INFINITY
        } else {
            fs.exp()
        }
    };
    quad::integrate(&mut f, 0.0, u, rel_tol, 0.0)
}

/// Pohozaev residual of the integral identity on [r1, r2] for weight `a`:
/// both sides evaluated independently, result |LHS − RHS| normalized.
pub fn pohozaev_residual(
    traj: &RadialTrajectory,
    a: f64,
    r1: f64,
    r2: f64,
) -> Result<f64> {
    pohozaev_residual_of(
        &traj.params,
        &traj.nonlinearity,
        |r| Ok((traj.eval_u(r)?, traj.eval_uprime(r)?)),
        a,
        r1,
        r2,
    )
}

/// Pohozaev residual for an arbitrary (u, u') evaluator; used to probe
/// sensitivity against corrupted trajectories.
pub fn pohozaev_residual_of(
    params: &OperatorParams,
    nl: &NonlinearitySpec,
    eval: impl Fn(f64) -> Result<(f64, f64)>,
    a: f64,
    r1: f64,
    r2: f64,
) -> Result<f64> {
    if !(0.0 < r1 && r1 < r2) {
        return Err(Error::Domain(format!("need 0 < r1 < r2 (got {r1}, {r2})")));
    }
    let (alpha, beta, gamma) = (params.alpha, params.beta, params.gamma);
    let bulk_coeff = a - (alpha - beta - 1.0) / (beta + 2.0);
    let mut err: Option<Error> = None;
    let mut integrand = |r: f64| -> f64 {
        let inner = (|| -> Result<f64> {
            let (u, up) = eval(r)?;
            let fu = nl.f(u);
            if fu > EXP_GUARD {
                return Err(Error::Eval(format!("e^{{f(u)}} overflow at r = {r}")));
            }
            let intf = exp_f_antiderivative(nl, u, 1e-12)?;
            Ok(r.powf(alpha) * up.abs().powf(beta + 2.0) * bulk_coeff
                + r.powf(gamma) * ((gamma + 1.0) * intf - a * u * fu.exp()))
        })();
        match inner {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        }
    };
    let lhs = quad::integrate(&mut integrand, r1, r2, 1e-12, 1e-14);
    if let Some(e) = err {
        return Err(e);
    }
    let lhs = lhs?;
    // Bracket coefficient (β+1)/(β+2): differentiating the bracket and
    // substituting the equation reproduces the bulk integrand only with this
    // ratio (for β = 0 it is the classical 1/2 of the u'² term).
    let bracket = |r: f64| -> Result<f64> {
        let (u, up) = eval(r)?;
        let intf = exp_f_antiderivative(nl, u, 1e-12)?;
        Ok(r.powf(alpha + 1.0)
            * ((beta + 1.0) / (beta + 2.0) * up.abs().powf(beta + 2.0)
                + r.powf(gamma - alpha) * intf
                + a / r * up.abs().powf(beta) * up * u))
    };
    let rhs = bracket(r2)? - bracket(r1)?;
    if !(lhs.is_finite() && rhs.is_finite()) {
        return Err(Error::Eval("non-finite Pohozaev side".into()));
    }
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
}
