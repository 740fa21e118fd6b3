//! The autonomous log-variable system attached to L(u) + e^u = 0,
//!
//!   x' = (y + θ^{β+1})^{1/(β+1)} − θ,
//!   y' = (α−β−1)(y − θ^{β+1}(e^x − 1)),
//!
//! where x(t) = v(t) − v*(t) and y(t) = (v')^{β+1} − θ^{β+1} measure the
//! deviation of a solution from the singular one in t = ln(κ/r). Also the
//! linearized classification of its only steady state (0, 0), and the
//! counting of regular–singular intersection points in r-space.
//!
//! Orientation: t = ln(κ/r) decreases as r increases, so zeros accumulating
//! near the origin r → 0 live at t → +∞. All user-facing intersection
//! counts are stated on r-intervals.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::params::{OperatorParams, Origin};
use crate::singular::SingularSolution;
use crate::solver::RadialTrajectory;

/// Linearized type of the steady state (0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FixedPointClass {
    UnstableFocus,
    UnstableNode,
    Borderline,
}

impl std::fmt::Display for FixedPointClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FixedPointClass::UnstableFocus => write!(f, "UnstableFocus"),
            FixedPointClass::UnstableNode => write!(f, "UnstableNode"),
            FixedPointClass::Borderline => write!(f, "Borderline"),
        }
    }
}

/// Eigenvalues of μ² − δμ + δθ/(β+1) = 0 and the discriminant class.
///
/// Both roots have real part δ/2 > 0, so the steady state is always
/// unstable; the discriminant D = δ² − 4δθ/(β+1) separates focus from node.
pub fn classify_fixed_point(params: &OperatorParams) -> (FixedPointClass, [Complex64; 2]) {
    let delta = params.delta();
    let product = delta * params.theta() / (params.beta + 1.0);
    let disc = delta * delta - 4.0 * product;
    let class = match exact_discriminant_sign(params) {
        Some(0) => FixedPointClass::Borderline,
        Some(s) if s < 0 => FixedPointClass::UnstableFocus,
        Some(_) => FixedPointClass::UnstableNode,
        None => {
            if disc.abs() <= 1e-12 * (delta * delta).max(4.0 * product.abs()) {
                FixedPointClass::Borderline
            } else if disc < 0.0 {
                FixedPointClass::UnstableFocus
            } else {
                FixedPointClass::UnstableNode
            }
        }
    };
    let half = 0.5 * delta;
    let eigenvalues = if disc >= 0.0 {
        let s = 0.5 * disc.sqrt();
        [Complex64::new(half - s, 0.0), Complex64::new(half + s, 0.0)]
    } else {
        let s = 0.5 * (-disc).sqrt();
        [Complex64::new(half, -s), Complex64::new(half, s)]
    };
    (class, eigenvalues)
}

/// Exact discriminant sign for integer operator data, else None.
fn exact_discriminant_sign(params: &OperatorParams) -> Option<i32> {
    match params.origin {
        Origin::KHessian { d, k } => {
            // 4θ/(β+1) = 8 for every k, so D = δ(δ − 8) with δ = d − 2k.
            let delta = i64::from(d) - 2 * i64::from(k);
            let v = delta * (delta - 8);
            Some(v.signum() as i32)
        }
        Origin::PLaplacian { d, p } if p.fract() == 0.0 => {
            // D·(p−1) = δ(δ(p−1) − 4p) with δ = d − p.
            let p = p as i64;
            let delta = i64::from(d) - p;
            let v = delta * (delta * (p - 1) - 4 * p);
            Some(v.signum() as i32)
        }
        _ => None,
    }
}

/// One phase-plane state sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhasePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// A sampled orbit of the autonomous system.
#[derive(Debug, Clone)]
pub struct PhaseOrbit {
    pub samples: Vec<PhasePoint>,
    pub params: OperatorParams,
    pub classification: FixedPointClass,
    pub eigenvalues: [Complex64; 2],
    /// True when integration stopped at the vector-field boundary
    /// y = −θ^{β+1} instead of the requested endpoint.
    pub hit_domain_boundary: bool,
}

impl PhaseOrbit {
    /// CSV export: header `t,x,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y\n");
        for s in &self.samples {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s.t, s.x, s.y));
        }
        out
    }

    /// Number of sign changes of x(t) along the orbit.
    pub fn x_sign_changes(&self) -> usize {
        self.samples
            .windows(2)
            .filter(|w| w[0].x != 0.0 && w[1].x != 0.0 && w[0].x.signum() != w[1].x.signum())
            .count()
    }

    /// Twice the signed area swept around the origin; negative = clockwise.
    pub fn swept_area(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].x * w[1].y - w[1].x * w[0].y)
            .sum()
    }
}

/// Integrate the autonomous system from (x0, y0) over `t_span` (either
/// direction). Requires y0 > −θ^{β+1}; stops early (flagged) if the orbit
/// reaches that boundary.
pub fn integrate_orbit(
    params: &OperatorParams,
    x0: f64,
    y0: f64,
    t_span: (f64, f64),
    tol: f64,
) -> Result<PhaseOrbit> {
    let beta1 = params.beta + 1.0;
    let theta = params.theta();
    let floor = -theta.powf(beta1);
    if y0 <= floor {
        return Err(Error::DomainExit { t: t_span.0 });
    }
    let delta = params.delta();
    let guard = floor * (1.0 - 1e-10) - f64::MIN_POSITIVE;
    let mut rhs = move |_t: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
        let [x, y] = *s;
        let base = (y - floor).max(0.0);
        let xp = base.powf(1.0 / beta1) - theta;
        let yp = delta * (y + floor * x.exp_m1());
        if !(xp.is_finite() && yp.is_finite()) {
            return Err(Error::Eval(format!("orbit field non-finite at x = {x}, y = {y}")));
        }
        Ok([xp, yp])
    };
    let opt = OdeOptions {
        rtol: tol,
        atol: [tol * 1e-2; 2],
        h0: None,
        max_steps: 10_000_000,
    };
    let mut ev = move |_t: f64, s: &[f64; 2]| s[1] - guard;
    let sol = ode::integrate(&mut rhs, t_span.0, [x0, y0], t_span.1, &opt, Some(&mut ev))?;
    let hit = sol.event_t.is_some();
    let mut samples = vec![PhasePoint { t: sol.t_start, x: sol.y_start[0], y: sol.y_start[1] }];
    for step in &sol.steps {
        let t = if (step.t1 - sol.t_end) * (t_span.1 - t_span.0).signum() > 0.0 {
            sol.t_end
        } else {
            step.t1
        };
        let s = step.eval(t);
        samples.push(PhasePoint { t, x: s[0], y: s[1] });
        if t == sol.t_end {
            break;
        }
    }
    let (classification, eigenvalues) = classify_fixed_point(params);
    Ok(PhaseOrbit { samples, params: *params, classification, eigenvalues, hit_domain_boundary: hit })
}

/// A solution viewed as phase-plane data.
pub enum SolutionRef<'a> {
    Regular(&'a RadialTrajectory),
    Singular(&'a SingularSolution),
}

/// Map a solution of L(u) + e^u = 0 onto the phase plane:
/// x(t) = v(t) − v*(t), y(t) = (v')^{β+1} − θ^{β+1}, resampled uniformly
/// in t. Exact only for the identity nonlinearity.
pub fn orbit_from_solution(source: SolutionRef<'_>, params: &OperatorParams) -> Result<PhaseOrbit> {
    let beta1 = params.beta + 1.0;
    let theta = params.theta();
    let (classification, eigenvalues) = classify_fixed_point(params);
    match source {
        SolutionRef::Singular(sing) => {
            if !sing.nonlinearity.is_identity() {
                return Err(Error::Domain(
                    "phase reduction is exact only for the identity nonlinearity".into(),
                ));
            }
            let samples = (0..32)
                .map(|i| PhasePoint { t: i as f64 * 0.25, x: 0.0, y: 0.0 })
                .collect();
            Ok(PhaseOrbit {
                samples,
                params: *params,
                classification,
                eigenvalues,
                hit_domain_boundary: false,
            })
        }
        SolutionRef::Regular(traj) => {
            if !traj.nonlinearity.is_identity() {
                return Err(Error::Domain(
                    "phase reduction is exact only for the identity nonlinearity".into(),
                ));
            }
            let core = &traj.core;
            let v_star_const = (theta.powf(beta1) * (params.alpha_hat() - 1.0)).ln();
            let n = 800;
            let (tau_lo, tau_hi) = (core.tau_end(), core.tau_start);
            let mut samples = Vec::with_capacity(n + 1);
            for i in 0..=n {
                let tau = tau_hi + (tau_lo - tau_hi) * i as f64 / n as f64;
                let t = core.t_ref + tau;
                let state = core.state(tau)?;
                let v = traj.rho + state[0];
                let ln_vp = core.ln_vprime(tau)?;
                let y = (beta1 * ln_vp).exp() - theta.powf(beta1);
                let x = v - theta * t - v_star_const;
                samples.push(PhasePoint { t, x, y });
            }
            samples.reverse(); // increasing t
            Ok(PhaseOrbit {
                samples,
                params: *params,
                classification,
                eigenvalues,
                hit_domain_boundary: false,
            })
        }
    }
}

/// Intersection count of a regular and a singular solution on an r-interval.
#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    pub interval: (f64, f64),
    pub count: usize,
    pub crossings: Vec<f64>,
    /// Count unchanged under one grid refinement.
    pub stable: bool,
    /// Inconclusive near-tangent intervals that were dropped.
    #[serde(skip)]
    pub dropped_tangencies: usize,
}

/// Count sign changes of u(·, ρ) − u* on [r_lo, r_hi], refining crossings
/// to 1e−8 relative accuracy and checking count stability under one grid
/// refinement.
pub fn count_intersections(
    reg: &RadialTrajectory,
    sing: &SingularSolution,
    r_lo: f64,
    r_hi: f64,
) -> Result<IntersectionReport> {
    if !(0.0 < r_lo && r_lo < r_hi) {
        return Err(Error::Domain(format!("need 0 < r_lo < r_hi (got {r_lo}, {r_hi})")));
    }
    let h = |r: f64| -> Result<f64> { Ok(reg.eval_u(r)? - sing.eval_canonical(r)?) };
    let coarse = count_on_grid(&h, r_lo, r_hi, 512)?;
    let fine = count_on_grid(&h, r_lo, r_hi, 1024)?;
    let stable = coarse.0.len() == fine.0.len();
    Ok(IntersectionReport {
        interval: (r_lo, r_hi),
        count: fine.0.len(),
        crossings: fine.0,
        stable,
        dropped_tangencies: fine.1,
    })
}

/// Sign-change scan on a log grid with n intervals. Near-tangent intervals
/// (both endpoint values below the tangency floor) are bisected up to 40
/// times and dropped if no definite sign change emerges.
fn count_on_grid(
    h: &impl Fn(f64) -> Result<f64>,
    r_lo: f64,
    r_hi: f64,
    n: usize,
) -> Result<(Vec<f64>, usize)> {
    let tangency_floor = 1e-12;
    let (la, lb) = (r_lo.ln(), r_hi.ln());
    let r_at = |i: usize| (la + (lb - la) * i as f64 / n as f64).exp();
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        values.push(h(r_at(i))?);
    }
    let mut crossings = Vec::new();
    let mut dropped = 0usize;
    for i in 0..n {
        let (mut a, mut b) = (r_at(i), r_at(i + 1));
        let (mut ha, mut hb) = (values[i], values[i + 1]);
        let tiny = |v: f64| v.abs() < tangency_floor;
        if tiny(ha) && tiny(hb) {
            // Inconclusive: bisect hunting for a definite sign change.
            let mut found = false;
            for _ in 0..40 {
                let m = (a * b).sqrt();
                let hm = h(m)?;
                if !tiny(hm) {
                    if hm.signum() != ha.signum() && !tiny(ha) {
                        b = m;
                        hb = hm;
                    } else {
                        a = m;
                        ha = hm;
                    }
                    if !tiny(ha) && !tiny(hb) && ha.signum() != hb.signum() {
                        found = true;
                        break;
                    }
                } else {
                    a = m;
                    ha = hm;
                }
            }
            if !found {
                dropped += 1;
                continue;
            }
        } else if ha == 0.0 || hb == 0.0 || ha.signum() == hb.signum() {
            continue;
        }
        // Definite bracket: bisect to 1e−8 relative.
        for _ in 0..200 {
            if (b - a) <= 1e-8 * b {
                break;
            }
            let m = (a * b).sqrt();
            let hm = h(m)?;
            if hm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if hm.signum() == ha.signum() {
                a = m;
                ha = hm;
            } else {
                b = m;
            }
        }
        crossings.push(0.5 * (a + b));
    }
    crossings.sort_by(f64::total_cmp);
    crossings.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * y.abs());
    Ok((crossings, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::NonlinearitySpec;
    use crate::singular::exact_singular;
    use crate::solver::solve_ivp;

    fn d3k1() -> OperatorParams {
        OperatorParams::khessian(3, 1).unwrap()
    }

    #[test]
    fn classify_focus_node_borderline() {
        let (class, eig) = classify_fixed_point(&d3k1());
        assert_eq!(class, FixedPointClass::UnstableFocus);
        // μ² − μ + 2 = 0: roots (1 ± i√7)/2.
        assert!((eig[0].re - 0.5).abs() < 1e-15);
        assert!((eig[0].im.abs() - 0.5 * 7.0_f64.sqrt()).abs() < 1e-14);

        let (class, eig) = classify_fixed_point(&OperatorParams::khessian(11, 1).unwrap());
        assert_eq!(class, FixedPointClass::UnstableNode);
        // δ = 9, product = 18, D = 81 − 72 = 9: roots (9 ± 3)/2.
        assert!((eig[0].re - 3.0).abs() < 1e-13 && eig[0].im == 0.0);
        assert!((eig[1].re - 6.0).abs() < 1e-13);

        let (class, _) = classify_fixed_point(&OperatorParams::khessian(10, 1).unwrap());
        assert_eq!(class, FixedPointClass::Borderline);
    }

    #[test]
    fn vieta_sum_and_product() {
        for (d, k) in [(3u32, 1u32), (5, 2), (11, 1), (10, 1), (20, 2)] {
            let p = OperatorParams::khessian(d, k).unwrap();
            let (_, eig) = classify_fixed_point(&p);
            let sum = eig[0] + eig[1];
            let prod = eig[0] * eig[1];
            assert!((sum.re - p.delta()).abs() < 1e-12 && sum.im.abs() < 1e-12);
            let expect = p.delta() * p.theta() / (p.beta + 1.0);
            assert!((prod.re - expect).abs() < 1e-12 * expect.max(1.0));
        }
    }

    #[test]
    fn focus_iff_oscillatory() {
        use crate::params::RegimeTag;
        for d in 3..30u32 {
            for k in 1..4u32 {
                if d <= 2 * k {
                    continue;
                }
                let p = OperatorParams::khessian(d, k).unwrap();
                let focus = classify_fixed_point(&p).0 == FixedPointClass::UnstableFocus;
                let osc = p.classify_regime().tag == RegimeTag::Oscillatory;
                assert_eq!(focus, osc, "d = {d}, k = {k}");
            }
        }
    }

    #[test]
    fn steady_state_stays_put() {
        let orbit = integrate_orbit(&d3k1(), 0.0, 0.0, (0.0, 10.0), 1e-10).unwrap();
        for s in &orbit.samples {
            assert!(s.x.abs() < 1e-12 && s.y.abs() < 1e-12);
        }
    }

    #[test]
    fn backward_orbit_oscillates_into_the_focus() {
        let orbit = integrate_orbit(&d3k1(), 1e-6, 0.0, (0.0, -25.0), 1e-11).unwrap();
        assert!(orbit.x_sign_changes() >= 3, "{} sign changes", orbit.x_sign_changes());
    }

    #[test]
    fn orbit_rejects_start_outside_domain() {
        let p = d3k1();
        let floor = -p.theta().powf(p.beta + 1.0);
        assert!(matches!(
            integrate_orbit(&p, 0.0, floor - 0.1, (0.0, 1.0), 1e-10),
            Err(Error::DomainExit { .. })
        ));
    }

    #[test]
    fn orbit_from_singular_is_the_origin() {
        let p = d3k1();
        let sing = exact_singular(&p);
        let orbit = orbit_from_solution(SolutionRef::Singular(&sing), &p).unwrap();
        assert!(orbit.samples.iter().all(|s| s.x == 0.0 && s.y == 0.0));
    }

    #[test]
    fn orbit_from_solution_stays_in_domain_and_winds_clockwise() {
        let p = d3k1();
        let nl = NonlinearitySpec::identity();
        let traj = solve_ivp(&p, &nl, 10.0, 3.0, 1e-10).unwrap();
        let orbit = orbit_from_solution(SolutionRef::Regular(&traj), &p).unwrap();
        let floor = -p.theta().powf(p.beta + 1.0);
        for s in &orbit.samples {
            assert!(s.y > floor, "y = {} at t = {}", s.y, s.t);
        }
        assert!(orbit.swept_area() < 0.0, "orbit should wind clockwise");
    }

    #[test]
    fn reduction_consistent_with_direct_integration() {
        // Start the autonomous system from a mid-trajectory state and compare
        // against the mapped solution over the shared t-window.
        let p = d3k1();
        let nl = NonlinearitySpec::identity();
        let traj = solve_ivp(&p, &nl, 6.0, 3.0, 1e-11).unwrap();
        let orbit = orbit_from_solution(SolutionRef::Regular(&traj), &p).unwrap();
        let mid = orbit.samples.len() / 2;
        let start = orbit.samples[mid];
        let end = *orbit.samples.last().unwrap();
        let direct =
            integrate_orbit(&p, start.x, start.y, (start.t, end.t), 1e-11).unwrap();
        // Compare at the shared endpoint.
        let d_end = direct.samples.last().unwrap();
        assert!((d_end.x - end.x).abs() < 1e-7, "{} vs {}", d_end.x, end.x);
        assert!((d_end.y - end.y).abs() < 1e-7, "{} vs {}", d_end.y, end.y);
    }

    #[test]
    fn node_regime_orbit_never_crosses_x_axis() {
        let p = OperatorParams::khessian(11, 1).unwrap();
        let nl = NonlinearitySpec::identity();
        let traj = solve_ivp(&p, &nl, 10.0, 100.0, 1e-10).unwrap();
        let orbit = orbit_from_solution(SolutionRef::Regular(&traj), &p).unwrap();
        assert_eq!(orbit.x_sign_changes(), 0);
        assert!(orbit.samples.iter().all(|s| s.x < 0.0));
    }

    #[test]
    fn count_focus_regime_many_crossings() {
        let p = d3k1();
        let nl = NonlinearitySpec::identity();
        let traj = solve_ivp(&p, &nl, 20.0, 3.0, 1e-11).unwrap();
        let sing = exact_singular(&p);
        let r_zero = traj.r_zero().unwrap();
        let report = count_intersections(&traj, &sing, 1e-6, r_zero).unwrap();
        assert!(report.count >= 2, "count = {}", report.count);
        assert!(report.stable);
        assert!(report.crossings.windows(2).all(|w| w[0] < w[1]));
        // Monotone trend in ρ.
        let small = solve_ivp(&p, &nl, 10.0, 3.0, 1e-11).unwrap();
        let small_report =
            count_intersections(&small, &sing, 1e-6, small.r_zero().unwrap()).unwrap();
        let big = solve_ivp(&p, &nl, 25.0, 3.0, 1e-11).unwrap();
        let big_report = count_intersections(&big, &sing, 1e-6, big.r_zero().unwrap()).unwrap();
        assert!(big_report.count >= small_report.count);
    }

    #[test]
    fn count_node_regime_is_zero() {
        let p = OperatorParams::khessian(11, 1).unwrap();
        let nl = NonlinearitySpec::identity();
        let sing = exact_singular(&p);
        for rho in [5.0, 10.0, 20.0] {
            let traj = solve_ivp(&p, &nl, rho, 1.2e3, 1e-12).unwrap();
            let report = count_intersections(&traj, &sing, 1e-8, 1e3).unwrap();
            assert_eq!(report.count, 0, "ρ = {rho}: {:?}", report.crossings);
            assert!(report.stable, "ρ = {rho}");
        }
    }

    #[test]
    fn count_is_symmetric_and_crossings_are_genuine() {
        let p = d3k1();
        let nl = NonlinearitySpec::identity();
        let traj = solve_ivp(&p, &nl, 15.0, 3.0, 1e-11).unwrap();
        let sing = exact_singular(&p);
        let report = count_intersections(&traj, &sing, 1e-6, 2.0).unwrap();
        // Swapping the subtraction order cannot change sign-change counts;
        // verify each crossing brackets a genuine sign flip.
        for &c in &report.crossings {
            let (a, b) = (c * (1.0 - 1e-6), c * (1.0 + 1e-6));
            let ha = traj.eval_u(a).unwrap() - sing.eval_canonical(a).unwrap();
            let hb = traj.eval_u(b).unwrap() - sing.eval_canonical(b).unwrap();
            assert!(ha.signum() != hb.signum(), "crossing at {c} not genuine");
        }
    }
}
