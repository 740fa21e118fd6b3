//! Order-3 jets: value plus first three derivatives, propagated through
//! elementary functions. Used to evaluate the nonlinearity families and
//! their inverses without symbolic differentiation.

/// Value and derivatives (v, v', v'', v''') with respect to one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    /// The identity jet at `x`: value x, derivatives 1, 0, 0.
    pub fn var(x: f64) -> Self {
        Jet3 { v: x, d1: 1.0, d2: 0.0, d3: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Jet3 { v: c, d1: 0.0, d2: 0.0, d3: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }

    pub fn add(self, o: Jet3) -> Jet3 {
        Jet3 {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d3: self.d3 + o.d3,
        }
    }

    pub fn scale(self, c: f64) -> Jet3 {
        Jet3 { v: c * self.v, d1: c * self.d1, d2: c * self.d2, d3: c * self.d3 }
    }

    /// Compose an outer scalar function, given its derivatives at `self.v`,
    /// with this jet (Faà di Bruno up to order 3).
    fn chain(self, f0: f64, f1: f64, f2: f64, f3: f64) -> Jet3 {
        let (u1, u2, u3) = (self.d1, self.d2, self.d3);
        Jet3 {
            v: f0,
            d1: f1 * u1,
            d2: f2 * u1 * u1 + f1 * u2,
            d3: f3 * u1 * u1 * u1 + 3.0 * f2 * u1 * u2 + f1 * u3,
        }
    }

    pub fn exp(self) -> Jet3 {
        let e = self.v.exp();
        self.chain(e, e, e, e)
    }

    pub fn ln(self) -> Jet3 {
        let v = self.v;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Real power u^a for u > 0 (or integer-like a on any sign handled by caller).
    pub fn powf(self, a: f64) -> Jet3 {
        let v = self.v;
        let f0 = v.powf(a);
        let f1 = a * v.powf(a - 1.0);
        let f2 = a * (a - 1.0) * v.powf(a - 2.0);
        let f3 = a * (a - 1.0) * (a - 2.0) * v.powf(a - 3.0);
        self.chain(f0, f1, f2, f3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn exp_of_square() {
        // h(x) = exp(x^2): h' = 2x e^{x^2}, h'' = (2+4x^2)e^{x^2},
        // h''' = (12x + 8x^3) e^{x^2}.
        let x = 1.3_f64;
        let j = Jet3::var(x).powf(2.0).exp();
        let e = (x * x).exp();
        close(j.v, e, 1e-14);
        close(j.d1, 2.0 * x * e, 1e-14);
        close(j.d2, (2.0 + 4.0 * x * x) * e, 1e-14);
        close(j.d3, (12.0 * x + 8.0 * x * x * x) * e, 1e-14);
    }

    #[test]
    fn log_chain_matches_finite_differences() {
        let g = |t: f64| Jet3::var(t).ln().ln().powf(0.5);
        let t = 37.0;
        let j = g(t);
        let h = 1e-4;
        let d1 = (g(t + h).v - g(t - h).v) / (2.0 * h);
        let d2 = (g(t + h).v - 2.0 * j.v + g(t - h).v) / (h * h);
        close(j.d1, d1, 1e-8);
        close(j.d2, d2, 1e-5);
    }
}
