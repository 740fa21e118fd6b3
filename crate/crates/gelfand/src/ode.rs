//! Adaptive Dormand–Prince 5(4) integrator with continuous (dense) output
//! and sign-change event location. Steps in either time direction.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// Error weights b − b̂ of the embedded 4th-order solution.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integration controls; `atol` is per component.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    /// Initial step magnitude; estimated from the tolerance when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl<const N: usize> Default for OdeOptions<N> {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: [1e-12; N], h0: None, max_steps: 2_000_000 }
    }
}

/// One accepted step with its quartic interpolation polynomial.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// Evaluate the interpolant at `t` inside [t0, t1] (or [t1, t0]).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let th = (t - self.t0) / h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.rcont;
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }

    fn contains(&self, t: f64) -> bool {
        if self.t1 >= self.t0 {
            (self.t0..=self.t1).contains(&t)
        } else {
            (self.t1..=self.t0).contains(&t)
        }
    }
}

/// Dense solution over the integrated span.
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub steps: Vec<DenseStep<N>>,
    pub t_start: f64,
    pub t_end: f64,
    pub y_start: [f64; N],
    pub y_end: [f64; N],
    /// Set when integration stopped at a located event.
    pub event_t: Option<f64>,
}

impl<const N: usize> OdeSolution<N> {
    pub fn contains(&self, t: f64) -> bool {
        if self.t_end >= self.t_start {
            (self.t_start..=self.t_end).contains(&t)
        } else {
            (self.t_end..=self.t_start).contains(&t)
        }
    }

    /// Evaluate the dense solution; `t` must lie inside the integrated span.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if t == self.t_end {
            return self.y_end;
        }
        // Binary search over monotone step endpoints.
        let forward = self.t_end >= self.t_start;
        let idx = self
            .steps
            .partition_point(|s| if forward { s.t1 < t } else { s.t1 > t })
            .min(self.steps.len().saturating_sub(1));
        let step = &self.steps[idx];
        debug_assert!(step.contains(t), "t = {t} outside step {:?}", (step.t0, step.t1));
        step.eval(t)
    }

    /// Locate the first `t` (in march direction) where `g(t, y(t))` changes
    /// sign, scanning accepted steps and bisecting within the step.
    pub fn locate(&self, mut g: impl FnMut(f64, &[f64; N]) -> f64) -> Option<f64> {
        let mut prev_t = self.t_start;
        let mut prev_v = g(self.t_start, &self.y_start);
        if prev_v == 0.0 {
            return Some(self.t_start);
        }
        for step in &self.steps {
            let t1 = step.t1;
            let y1 = step.eval(t1);
            let v1 = g(t1, &y1);
            if v1 == 0.0 {
                return Some(t1);
            }
            if prev_v.signum() != v1.signum() {
                let (mut a, mut b) = (prev_t, t1);
                let mut va = prev_v;
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid == a || mid == b {
                        break;
                    }
                    let vm = g(mid, &step_eval(self, mid, step));
                    if vm == 0.0 {
                        return Some(mid);
                    }
                    if vm.signum() == va.signum() {
                        a = mid;
                        va = vm;
                    } else {
                        b = mid;
                    }
                }
                return Some(0.5 * (a + b));
            }
            prev_t = t1;
            prev_v = v1;
        }
        None
    }
}

// The bisection interval can straddle the join of two steps only at the
// endpoints, so evaluating on `step` with a fallback is enough.
fn step_eval<const N: usize>(sol: &OdeSolution<N>, t: f64, step: &DenseStep<N>) -> [f64; N] {
    if step.contains(t) {
        step.eval(t)
    } else {
        sol.eval(t)
    }
}

/// Sign-change functional watched during integration.
pub type EventFn<'a, const N: usize> = &'a mut dyn FnMut(f64, &[f64; N]) -> f64;

/// Integrate y' = f(t, y) from `t0` to `t1` (either direction).
///
/// `event`, when supplied, is a sign-change functional g(t, y): integration
/// stops at the first located root and `event_t` is set.
pub fn integrate<const N: usize>(
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opt: &OdeOptions<N>,
    mut event: Option<EventFn<'_, N>>,
) -> Result<OdeSolution<N>> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(OdeSolution {
            steps: vec![],
            t_start: t0,
            t_end: t0,
            y_start: y0,
            y_end: y0,
            event_t: None,
        });
    }
    let dir = span.signum();
    let mut h = dir * opt.h0.unwrap_or_else(|| (1e-2 * span.abs()).min(1e-2)).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut ev_prev = event.as_mut().map(|g| g(t, &y));
    let mut steps: Vec<DenseStep<N>> = Vec::new();

    for _ in 0..opt.max_steps {
        if (t - t1) * dir >= 0.0 {
            return Ok(OdeSolution {
                steps,
                t_start: t0,
                t_end: t,
                y_start: y0,
                y_end: y,
                event_t: None,
            });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Tolerance(format!(
                "step size underflow at t = {t} (h = {h:.3e})"
            )));
        }

        let mut yt = [0.0; N];
        macro_rules! stage {
            ($c:expr, $($a:expr, $k:expr);+) => {{
                for i in 0..N {
                    yt[i] = y[i] $(+ h * $a * $k[i])+;
                }
                f(t + $c * h, &yt)?
            }};
        }
        let k2 = stage!(C2, A21, k1);
        let k3 = stage!(C3, A31, k1; A32, k2);
        let k4 = stage!(C4, A41, k1; A42, k2; A43, k3);
        let k5 = stage!(C5, A51, k1; A52, k2; A53, k3; A54, k4);
        let k6 = stage!(1.0, A61, k1; A62, k2; A63, k3; A64, k4; A65, k5);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i]
                + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = f(t + h, &y1)?;

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                    + E7 * k7[i]);
            let sc = opt.atol[i] + opt.rtol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // Accept: build the dense interpolant for this step.
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y1[i] - y[i];
                let bspl = h * k1[i] - dy;
                rcont[0][i] = y[i];
                rcont[1][i] = dy;
                rcont[2][i] = bspl;
                rcont[3][i] = dy - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let step = DenseStep { t0: t, t1: t + h, rcont };

            if let (Some(g), Some(pv)) = (event.as_mut(), ev_prev) {
                let v1 = g(step.t1, &y1);
                if v1 == 0.0 || pv.signum() != v1.signum() {
                    let (mut a, mut b) = (t, step.t1);
                    let mut va = pv;
                    for _ in 0..200 {
                        let mid = 0.5 * (a + b);
                        if mid == a || mid == b {
                            break;
                        }
                        let vm = g(mid, &step.eval(mid));
                        if vm == 0.0 {
                            b = mid;
                            break;
                        }
                        if vm.signum() == va.signum() {
                            a = mid;
                            va = vm;
                        } else {
                            b = mid;
                        }
                    }
                    let te = b;
                    let ye = step.eval(te);
                    steps.push(step);
                    return Ok(OdeSolution {
                        steps,
                        t_start: t0,
                        t_end: te,
                        y_start: y0,
                        y_end: ye,
                        event_t: Some(te),
                    });
                }
                ev_prev = Some(v1);
            }

            steps.push(step);
            t += h;
            y = y1;
            k1 = k7;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 0.9);
        }
    }
    Err(Error::Tolerance(format!(
        "step budget exhausted at t = {t} before reaching {t1}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_forward_and_backward() {
        let mut f = |_t: f64, y: &[f64; 1]| Ok([-y[0]]);
        let opt = OdeOptions { rtol: 1e-11, atol: [1e-13; 1], ..Default::default() };
        let sol = integrate(&mut f, 0.0, [1.0], 5.0, &opt, None).unwrap();
        assert!((sol.y_end[0] - (-5.0_f64).exp()).abs() < 1e-11);
        let back = integrate(&mut f, 5.0, sol.y_end, 0.0, &opt, None).unwrap();
        assert!((back.y_end[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let mut f = |t: f64, y: &[f64; 2]| Ok([y[1], -y[0] + t.sin() * 0.0]);
        let opt = OdeOptions { rtol: 1e-11, atol: [1e-13; 2], ..Default::default() };
        let sol = integrate(&mut f, 0.0, [1.0, 0.0], 10.0, &opt, None).unwrap();
        for i in 0..100 {
            let t = 0.1 * i as f64;
            let y = sol.eval(t);
            assert!((y[0] - t.cos()).abs() < 5e-10, "t = {t}");
        }
    }

    #[test]
    fn event_location_hits_cosine_root() {
        let mut f = |_t: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        let opt = OdeOptions::default();
        let mut ev = |_t: f64, y: &[f64; 2]| y[0];
        let sol = integrate(&mut f, 0.0, [1.0, 0.0], 10.0, &opt, Some(&mut ev)).unwrap();
        let te = sol.event_t.expect("event");
        assert!((te - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(sol.y_end[0].abs() < 1e-9);
    }

    #[test]
    fn locate_finds_crossing_after_the_fact() {
        let mut f = |_t: f64, y: &[f64; 1]| Ok([-y[0]]);
        let sol = integrate(&mut f, 0.0, [1.0], 10.0, &OdeOptions::default(), None).unwrap();
        let t = sol.locate(|_t, y| y[0] - 0.25).unwrap();
        assert!((t - 4.0_f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn rhs_error_propagates() {
        let mut f = |t: f64, y: &[f64; 1]| {
            if t > 1.0 {
                Err(Error::Blowup("guard".into()))
            } else {
                Ok([y[0]])
            }
        };
        assert!(integrate(&mut f, 0.0, [1.0], 2.0, &OdeOptions::default(), None).is_err());
    }
}
