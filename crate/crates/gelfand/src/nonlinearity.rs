//! Nonlinearity families f with inverse g = f⁻¹ and derivatives, plus grid
//! diagnostics for the decay/regularity conditions the asymptotic theory
//! needs from g.
//!
//! The families are closed (no user-supplied code): the identity, powers
//! u^p, iterated exponentials exp∘…∘exp(u^p), and exponentially decaying
//! perturbations of the identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet3;

/// Closed family descriptor. Serializes as `{"family": "...", "params": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum Family {
    Identity,
    /// f(u) = u^p with p > 1/2 (below that g'' no longer decays).
    Power { p: f64 },
    /// f(u) = exp∘ⁿ(u^p) with n ≥ 1, p > 0; g(t) = (ln∘ⁿ t)^{1/p}.
    IterExp { n: u32, p: f64 },
    /// f(u) = u + c0·e^{−δu} with δ > 0 and c0·δ < 1 (keeps f increasing).
    Perturbed { delta: f64, c0: f64 },
}

/// A validated nonlinearity: f, g = f⁻¹, and their derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct NonlinearitySpec {
    family: Family,
}

impl TryFrom<Family> for NonlinearitySpec {
    type Error = Error;
    fn try_from(family: Family) -> Result<Self> {
        NonlinearitySpec::new(family)
    }
}

impl From<NonlinearitySpec> for Family {
    fn from(spec: NonlinearitySpec) -> Family {
        spec.family
    }
}

impl NonlinearitySpec {
    /// Validate family parameters and build the spec.
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Identity => {}
            Family::Power { p } => {
                if !p.is_finite() || p <= 0.5 {
                    return Err(Error::Domain(format!(
                        "power family requires p > 1/2 (got p = {p})"
                    )));
                }
            }
            Family::IterExp { n, p } => {
                if n < 1 {
                    return Err(Error::Domain("iterexp family requires n ≥ 1".into()));
                }
                if !p.is_finite() || p <= 0.0 {
                    return Err(Error::Domain(format!(
                        "iterexp family requires p > 0 (got p = {p})"
                    )));
                }
            }
            Family::Perturbed { delta, c0 } => {
                if !delta.is_finite() || delta <= 0.0 {
                    return Err(Error::Domain(format!(
                        "perturbed family requires δ > 0 (got δ = {delta})"
                    )));
                }
                if !c0.is_finite() || c0 * delta >= 1.0 {
                    return Err(Error::Domain(format!(
                        "perturbed family requires c0·δ < 1 so that f stays increasing \
                         (got c0·δ = {})",
                        c0 * delta
                    )));
                }
            }
        }
        Ok(NonlinearitySpec { family })
    }

    pub fn identity() -> Self {
        NonlinearitySpec { family: Family::Identity }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.family, Family::Identity)
    }

    /// Jet of f at u: (f, f', f'', f''').
    pub fn f_jet(&self, u: f64) -> Jet3 {
        match self.family {
            Family::Identity => Jet3::var(u),
            Family::Power { p } => Jet3::var(u).powf(p),
            Family::IterExp { n, p } => {
                let mut j = Jet3::var(u).powf(p);
                for _ in 0..n {
                    j = j.exp();
                }
                j
            }
            Family::Perturbed { delta, c0 } => {
                let e = c0 * (-delta * u).exp();
                Jet3 {
                    v: u + e,
                    d1: 1.0 - delta * e,
                    d2: delta * delta * e,
                    d3: -delta * delta * delta * e,
                }
            }
        }
    }

    /// Jet of g = f⁻¹ at t: (g, g', g'', g''').
    pub fn g_jet(&self, t: f64) -> Jet3 {
        match self.family {
            Family::Identity => Jet3::var(t),
            Family::Power { p } => Jet3::var(t).powf(1.0 / p),
            Family::IterExp { n, p } => {
                let mut j = Jet3::var(t);
                for _ in 0..n {
                    j = j.ln();
                }
                j.powf(1.0 / p)
            }
            Family::Perturbed { .. } => {
                let u = self.g(t);
                let f = self.f_jet(u);
                let (f1, f2, f3) = (f.d1, f.d2, f.d3);
                Jet3 {
                    v: u,
                    d1: 1.0 / f1,
                    d2: -f2 / (f1 * f1 * f1),
                    d3: (3.0 * f2 * f2 - f1 * f3) / f1.powi(5),
                }
            }
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        match self.family {
            Family::Identity => u,
            Family::Power { p } => u.powf(p),
            Family::IterExp { n, p } => {
                let mut v = u.powf(p);
                for _ in 0..n {
                    v = v.exp();
                }
                v
            }
            Family::Perturbed { delta, c0 } => u + c0 * (-delta * u).exp(),
        }
    }

    pub fn f1(&self, u: f64) -> f64 {
        self.f_jet(u).d1
    }

    pub fn g(&self, t: f64) -> f64 {
        match self.family {
            Family::Identity => t,
            Family::Power { p } => t.powf(1.0 / p),
            Family::IterExp { n, p } => {
                let mut v = t;
                for _ in 0..n {
                    v = v.ln();
                }
                v.powf(1.0 / p)
            }
            Family::Perturbed { delta: _, c0 } => {
                // f(u) = t bracketed on [max(0, t−|c0|), t+|c0|] since |ϑ| ≤ |c0|.
                let lo = (t - c0.abs()).max(0.0);
                let hi = t + c0.abs();
                invert_monotone(|u| self.f(u), t, lo, hi)
            }
        }
    }

    pub fn g1(&self, t: f64) -> f64 {
        self.g_jet(t).d1
    }

    pub fn g2(&self, t: f64) -> f64 {
        self.g_jet(t).d2
    }

    /// f(u + x) − f(u), evaluated without cancellation for small x.
    pub fn f_diff(&self, u: f64, x: f64) -> f64 {
        match self.family {
            Family::Identity => x,
            Family::Power { p } => power_diff(u, x, p),
            Family::IterExp { n, p } => {
                let mut a = u.powf(p);
                let mut d = power_diff(u, x, p);
                for _ in 0..n {
                    let e = a.exp();
                    d = e * d.exp_m1();
                    a = e;
                }
                d
            }
            Family::Perturbed { delta, c0 } => x + c0 * (-delta * u).exp() * (-delta * x).exp_m1(),
        }
    }

    /// Smallest t for which g is defined (t = f(0)).
    pub fn g_domain_start(&self) -> f64 {
        self.f(0.0)
    }

    /// Grid-evidence bound for sup_{s ≥ t0} g''(s)/g'(s) (positive part),
    /// used by the integration-by-parts tail majorant.
    pub fn gpp_over_gp_sup(&self, t0: f64) -> f64 {
        match self.family {
            Family::Identity => 0.0,
            Family::Power { p } => {
                let q = 1.0 / p - 1.0;
                if q <= 0.0 {
                    0.0
                } else {
                    q / t0
                }
            }
            _ => {
                // Probe a geometric grid; the ratio is smooth and decaying for
                // these families. 25% safety margin on top of the grid max.
                let mut sup: f64 = 0.0;
                let mut t = t0;
                for _ in 0..64 {
                    let j = self.g_jet(t);
                    if j.d1 > 0.0 && j.is_finite() {
                        sup = sup.max(j.d2 / j.d1);
                    }
                    t *= 1.5;
                    if t > t0 * 1e9 {
                        break;
                    }
                }
                sup * 1.25
            }
        }
    }
}

/// (u+x)^p − u^p without cancellation (x may be negative, u + x ≥ 0).
fn power_diff(u: f64, x: f64, p: f64) -> f64 {
    if u == 0.0 {
        return x.powf(p);
    }
    if u + x == 0.0 {
        return -u.powf(p);
    }
    u.powf(p) * (p * (x / u).ln_1p()).exp_m1()
}

/// Safeguarded Newton / bisection for a strictly increasing scalar function.
fn invert_monotone(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = f(x) - target;
        if v == 0.0 {
            return x;
        }
        if v > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        // Bisection only; f' is cheap here but bisection is branch-free safe.
        let next = 0.5 * (lo + hi);
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

/// Verdict for one monitored quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// One diagnostic entry: the monitored quantity, its worst grid value and
/// location, and the verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub monitored: String,
    pub verdict: Verdict,
    pub worst_value: f64,
    pub worst_t: f64,
    pub end_value: f64,
    pub threshold: f64,
    /// True when the quantity is a stand-in rather than the condition itself.
    pub proxy: bool,
}

/// Grid evidence (never analytic proof) for the decay conditions on g.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// End-of-grid thresholds for each monitored quantity.
#[derive(Debug, Clone, Copy)]
pub struct AssumptionThresholds {
    pub g2_decay: f64,
    pub g2_log_ratio: f64,
    pub shift_proxy: f64,
    pub sup_tail: f64,
    pub f2_decay_u: f64,
    pub f2_log_ratio_u: f64,
}

impl Default for AssumptionThresholds {
    fn default() -> Self {
        AssumptionThresholds {
            g2_decay: 1e-3,
            g2_log_ratio: 1e-2,
            shift_proxy: 0.1,
            sup_tail: 0.5,
            f2_decay_u: 1e-3,
            f2_log_ratio_u: 1e-2,
        }
    }
}

/// Diagnose the decay conditions on a strictly increasing grid with default
/// thresholds. The grid needs ≥ 32 points and must reach at least 10³.
pub fn diagnose_assumptions(spec: &NonlinearitySpec, t_grid: &[f64]) -> Result<AssumptionReport> {
    diagnose_assumptions_with(spec, t_grid, &AssumptionThresholds::default())
}

/// Same as [`diagnose_assumptions`] with explicit thresholds.
pub fn diagnose_assumptions_with(
    spec: &NonlinearitySpec,
    t_grid: &[f64],
    thr: &AssumptionThresholds,
) -> Result<AssumptionReport> {
    if t_grid.len() < 32 {
        return Err(Error::Domain(format!(
            "diagnostic grid needs ≥ 32 points (got {})",
            t_grid.len()
        )));
    }
    if !t_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Domain("diagnostic grid must be strictly increasing".into()));
    }
    if t_grid[0] <= 0.0 {
        return Err(Error::Domain("diagnostic grid must be positive".into()));
    }
    let t_end = *t_grid.last().unwrap();
    if t_end < 1e3 {
        return Err(Error::Domain(format!(
            "diagnostic grid must reach 10³ (ends at {t_end})"
        )));
    }

    let n = t_grid.len();
    let mut g = Vec::with_capacity(n);
    for &t in t_grid {
        let j = spec.g_jet(t);
        if !j.is_finite() {
            return Err(Error::Eval(format!("g-jet non-finite at t = {t}")));
        }
        g.push(j);
    }

    // |g''| and its suffix supremum.
    let g2_abs: Vec<f64> = g.iter().map(|j| j.d2.abs()).collect();
    let mut sup_tail = vec![0.0_f64; n];
    let mut running: f64 = 0.0;
    for i in (0..n).rev() {
        running = running.max(g2_abs[i]);
        sup_tail[i] = running;
    }

    let zero_floor = 1e-300;
    let q_a2 = g2_abs.clone();
    let q_a4: Vec<f64> = g
        .iter()
        .map(|j| (j.d2 / j.d1 * j.d1.ln()).abs())
        .collect();
    let q_a3: Vec<f64> = t_grid
        .iter()
        .zip(&g)
        .map(|(&t, j)| {
            let shifted = spec.g_jet(t + t / (std::f64::consts::E + t).ln());
            (j.d1 / shifted.d1 - 1.0).abs()
        })
        .collect();
    let q_a5b: Vec<f64> = (0..n)
        .map(|i| {
            if sup_tail[i] < zero_floor && g2_abs[i] < zero_floor {
                0.0
            } else if g2_abs[i] < zero_floor {
                f64::INFINITY
            } else {
                (sup_tail[i] / g2_abs[i] - 1.0).max(0.0)
            }
        })
        .collect();
    // u-space equivalents evaluated along u = g(t).
    let mut q_a2u = Vec::with_capacity(n);
    let mut q_a4u = Vec::with_capacity(n);
    for j in &g {
        let fj = spec.f_jet(j.v);
        if !fj.is_finite() {
            return Err(Error::Eval(format!("f-jet non-finite at u = {}", j.v)));
        }
        q_a2u.push((fj.d2 / fj.d1.powi(3)).abs());
        q_a4u.push((fj.d2 / (fj.d1 * fj.d1) * fj.d1.ln()).abs());
    }

    let entries: [(&'static str, &'static str, &[f64], f64, bool); 6] = [
        ("g2-decay", "|g''(t)| → 0", &q_a2, thr.g2_decay, false),
        ("g2-log-ratio", "|g''/g' · ln g'| → 0", &q_a4, thr.g2_log_ratio, false),
        (
            "shift-proxy",
            "|g'(t)/g'(t + t/ln t) − 1| → 0 (proxy for the o(t)-shift condition)",
            &q_a3,
            thr.shift_proxy,
            true,
        ),
        (
            "sup-tail",
            "sup_{s≥t}|g''(s)| / |g''(t)| − 1 bounded",
            &q_a5b,
            thr.sup_tail,
            false,
        ),
        ("g2-decay-u", "|f''/f'³| → 0 along u = g(t)", &q_a2u, thr.f2_decay_u, false),
        (
            "g2-log-ratio-u",
            "|f''/f'² · ln f'| → 0 along u = g(t)",
            &q_a4u,
            thr.f2_log_ratio_u,
            false,
        ),
    ];

    let mut checks = Vec::with_capacity(entries.len());
    for (name, monitored, q, threshold, proxy) in entries {
        for (&t, &v) in t_grid.iter().zip(q.iter()) {
            if v.is_nan() {
                return Err(Error::Eval(format!("{name} non-finite at t = {t}")));
            }
        }
        let half = n / 2;
        let tail = &q[half..];
        let shrinking = tail
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + zero_floor);
        let end_value = q[n - 1];
        let (mut worst_value, mut worst_t) = (f64::NEG_INFINITY, t_grid[half]);
        for (&t, &v) in t_grid[half..].iter().zip(tail.iter()) {
            if v > worst_value {
                worst_value = v;
                worst_t = t;
            }
        }
        let verdict = if shrinking && end_value <= threshold {
            Verdict::Pass
        } else if end_value > threshold && tail[tail.len() - 1] > tail[0] {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        checks.push(AssumptionCheck {
            name: name.to_owned(),
            monitored: monitored.to_owned(),
            verdict,
            worst_value,
            worst_t,
            end_value,
            threshold,
            proxy,
        });
    }

    Ok(AssumptionReport { checks })
}

/// Log-spaced grid suited to [`diagnose_assumptions`] for the given family.
pub fn default_diagnostic_grid(spec: &NonlinearitySpec, n: usize) -> Vec<f64> {
    let lo: f64 = (spec.g_domain_start() + 1.0).max(1.5);
    let hi: f64 = 1e6_f64.max(lo * 1e4);
    log_spaced(lo, hi, n)
}

/// n log-spaced points on [lo, hi] inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_values() {
        let nl = NonlinearitySpec::identity();
        assert_eq!(nl.f(5.0), 5.0);
        assert_eq!(nl.g(5.0), 5.0);
        assert_eq!(nl.g2(5.0), 0.0);
    }

    #[test]
    fn power_closed_forms() {
        let nl = NonlinearitySpec::new(Family::Power { p: 2.0 }).unwrap();
        assert_eq!(nl.f(3.0), 9.0);
        assert_eq!(nl.g(9.0), 3.0);
        assert!((nl.g1(9.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn iterexp_matches_exponential() {
        let nl = NonlinearitySpec::new(Family::IterExp { n: 1, p: 1.0 }).unwrap();
        assert!((nl.f(2.0) - 2.0_f64.exp()).abs() < 1e-15);
        let t = 7.0;
        assert!((nl.g(t) - t.ln()).abs() < 1e-15);
        assert!((nl.g2(t) - (-1.0 / (t * t))).abs() < 1e-16);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(NonlinearitySpec::new(Family::Power { p: 0.4 }).is_err());
        assert!(NonlinearitySpec::new(Family::Power { p: 0.5 }).is_err());
        assert!(NonlinearitySpec::new(Family::IterExp { n: 0, p: 1.0 }).is_err());
        assert!(NonlinearitySpec::new(Family::IterExp { n: 1, p: 0.0 }).is_err());
        assert!(NonlinearitySpec::new(Family::Perturbed { delta: 0.0, c0: 0.1 }).is_err());
        assert!(NonlinearitySpec::new(Family::Perturbed { delta: 2.0, c0: 0.6 }).is_err());
    }

    #[test]
    fn perturbed_inverse_brackets() {
        let nl = NonlinearitySpec::new(Family::Perturbed { delta: 1.0, c0: 0.5 }).unwrap();
        for u in [0.0, 0.3, 1.0, 4.0, 20.0] {
            let t = nl.f(u);
            assert!((nl.g(t) - u).abs() < 1e-12 * u.max(1.0), "u = {u}");
        }
    }

    fn families_with_caps() -> Vec<(NonlinearitySpec, f64)> {
        vec![
            (NonlinearitySpec::identity(), 50.0),
            (NonlinearitySpec::new(Family::Power { p: 0.7 }).unwrap(), 50.0),
            (NonlinearitySpec::new(Family::Power { p: 2.0 }).unwrap(), 50.0),
            (NonlinearitySpec::new(Family::IterExp { n: 1, p: 1.0 }).unwrap(), 50.0),
            (NonlinearitySpec::new(Family::IterExp { n: 1, p: 2.0 }).unwrap(), 25.0),
            // Deeper iterates overflow f64 long before u = 50; cap inside range.
            (NonlinearitySpec::new(Family::IterExp { n: 2, p: 1.0 }).unwrap(), 6.0),
            (NonlinearitySpec::new(Family::Perturbed { delta: 1.0, c0: 0.5 }).unwrap(), 50.0),
        ]
    }

    #[test]
    fn round_trip_and_derivative_consistency() {
        for (nl, cap) in families_with_caps() {
            for &u in &log_spaced(0.1, cap, 40) {
                let t = nl.f(u);
                assert!(t.is_finite(), "{:?} f({u})", nl.family());
                let back = nl.g(t);
                assert!(
                    (back - u).abs() <= 1e-10 * u.max(1.0),
                    "{:?}: g(f({u})) = {back}",
                    nl.family()
                );
                let gd = nl.g1(t) * nl.f1(u);
                assert!(
                    (gd - 1.0).abs() <= 1e-8,
                    "{:?}: g'(f(u))·f'(u) = {gd} at u = {u}",
                    nl.family()
                );
            }
        }
    }

    #[test]
    fn g2_matches_central_differences_of_g1() {
        for (nl, _) in families_with_caps() {
            let t0 = nl.g_domain_start() + 3.0;
            for &t in &[t0, t0 * 2.0, t0 * 8.0] {
                let h = 1e-5 * t.max(1.0);
                let fd = (nl.g1(t + h) - nl.g1(t - h)) / (2.0 * h);
                let g2 = nl.g2(t);
                // The difference quotient carries cancellation noise of
                // order ulp(g')/h on top of its O(h²) truncation.
                let noise = 4.0 * f64::EPSILON * nl.g1(t).abs().max(1e-3) / h;
                assert!(
                    (fd - g2).abs() <= 1e-6 * g2.abs() + noise,
                    "{:?} at t = {t}: fd {fd} vs {g2}",
                    nl.family()
                );
            }
        }
    }

    #[test]
    fn iterexp_gprime_decays() {
        let nl = NonlinearitySpec::new(Family::IterExp { n: 1, p: 1.0 }).unwrap();
        let grid = log_spaced(2.0, 1e8, 32);
        let mut prev = f64::INFINITY;
        for &t in &grid {
            let g1 = nl.g1(t);
            assert!(g1 < prev);
            prev = g1;
        }
        assert!(prev < 1e-7);
    }

    #[test]
    fn f_diff_matches_direct_at_moderate_values() {
        for (nl, cap) in families_with_caps() {
            let u = 0.4 * cap;
            for &x in &[0.5, -0.2, 1.0e-3] {
                let direct = nl.f(u + x) - nl.f(u);
                let stable = nl.f_diff(u, x);
                assert!(
                    (direct - stable).abs() <= 1e-8 * direct.abs().max(1e-12),
                    "{:?} u={u} x={x}: {direct} vs {stable}",
                    nl.family()
                );
            }
        }
    }

    #[test]
    fn f_diff_is_accurate_for_tiny_steps() {
        // e^{u+x} − e^{u} for x ~ 1e−12 loses all digits when done naively;
        // the stable path keeps full relative accuracy.
        let nl = NonlinearitySpec::new(Family::IterExp { n: 1, p: 1.0 }).unwrap();
        let (u, x) = (20.0, -3.0e-12);
        let expect = 20.0_f64.exp() * x; // relative error O(x)
        let got = nl.f_diff(u, x);
        assert!((got - expect).abs() <= 1e-9 * expect.abs());
    }

    #[test]
    fn diagnose_identity_all_pass() {
        let nl = NonlinearitySpec::identity();
        let grid = log_spaced(1.0, 1e6, 64);
        let report = diagnose_assumptions(&nl, &grid).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn diagnose_power_two_g2_decays() {
        let nl = NonlinearitySpec::new(Family::Power { p: 2.0 }).unwrap();
        let grid = log_spaced(1.0, 1e6, 64);
        let report = diagnose_assumptions(&nl, &grid).unwrap();
        let a2 = report.check("g2-decay").unwrap();
        assert_eq!(a2.verdict, Verdict::Pass);
        // g''(t) = −t^{−3/2}/4 at the grid end.
        assert!((a2.end_value - 0.25 * 1e6_f64.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn diagnose_iterexp_passes_on_default_grid() {
        let nl = NonlinearitySpec::new(Family::IterExp { n: 1, p: 1.0 }).unwrap();
        let grid = default_diagnostic_grid(&nl, 64);
        let report = diagnose_assumptions(&nl, &grid).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn diagnose_rejects_bad_grids() {
        let nl = NonlinearitySpec::identity();
        assert!(diagnose_assumptions(&nl, &log_spaced(1.0, 1e6, 8)).is_err());
        assert!(diagnose_assumptions(&nl, &log_spaced(1.0, 100.0, 64)).is_err());
        let mut grid = log_spaced(1.0, 1e6, 64);
        grid.swap(10, 11);
        assert!(diagnose_assumptions(&nl, &grid).is_err());
    }

    #[test]
    fn diagnose_reports_eval_error_outside_domain() {
        // t below f(0) = 1 makes ln t negative and the root non-finite.
        let nl = NonlinearitySpec::new(Family::IterExp { n: 1, p: 2.0 }).unwrap();
        let grid = log_spaced(0.5, 1e6, 64);
        match diagnose_assumptions(&nl, &grid) {
            Err(Error::Eval(_)) => {}
            other => panic!("expected Eval error, got {other:?}"),
        }
    }

    #[test]
    fn descriptor_json_roundtrip() {
        let specs = [
            NonlinearitySpec::identity(),
            NonlinearitySpec::new(Family::Power { p: 2.0 }).unwrap(),
            NonlinearitySpec::new(Family::IterExp { n: 2, p: 0.5 }).unwrap(),
            NonlinearitySpec::new(Family::Perturbed { delta: 1.0, c0: 0.25 }).unwrap(),
        ];
        for spec in specs {
            let json = serde_json::to_string(&spec).unwrap();
            let back: NonlinearitySpec = serde_json::from_str(&json).unwrap();
            assert_eq!(spec, back);
        }
        let j: NonlinearitySpec =
            serde_json::from_str(r#"{"family":"power","params":{"p":3.0}}"#).unwrap();
        assert_eq!(j.family(), Family::Power { p: 3.0 });
        assert!(serde_json::from_str::<NonlinearitySpec>(
            r#"{"family":"power","params":{"p":0.3}}"#
        )
        .is_err());
    }
}
