//! Exponential polynomials `Σ c · t^p · e^{λ t}` with complex `c`, `λ`.
//!
//! Every time signal in the model (mode envelopes, the supported forcing
//! classes, their damped convolutions) lies in this class, so the boundary
//! trajectory of the continuum solution can be carried symbolically.

use num_complex::Complex64;

const ZERO_RATE: f64 = 1e-13;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    pub coef: Complex64,
    pub power: u32,
    pub rate: Complex64,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, coef: Complex64, power: u32, rate: Complex64) {
        if coef == Complex64::new(0.0, 0.0) {
            return;
        }
        if let Some(t) = self
            .terms
            .iter_mut()
            .find(|t| t.power == power && (t.rate - rate).norm() <= ZERO_RATE)
        {
            t.coef += coef;
        } else {
            self.terms.push(Term { coef, power, rate });
        }
    }

    pub fn extend(&mut self, other: &ExpPoly) {
        for t in &other.terms {
            self.push(t.coef, t.power, t.rate);
        }
    }

    pub fn scaled(&self, c: Complex64) -> ExpPoly {
        let mut out = ExpPoly::new();
        for t in &self.terms {
            out.push(t.coef * c, t.power, t.rate);
        }
        out
    }

    /// Multiply by `e^{μ t}`.
    pub fn shifted(&self, mu: f64) -> ExpPoly {
        let mut out = ExpPoly::new();
        for t in &self.terms {
            out.push(t.coef, t.power, t.rate + mu);
        }
        out
    }

    /// `∫_0^t` of the signal, in closed form.
    pub fn integral(&self) -> ExpPoly {
        let mut out = ExpPoly::new();
        for t in &self.terms {
            let p = t.power;
            if t.rate.norm() <= ZERO_RATE {
                out.push(t.coef / (p as f64 + 1.0), p + 1, Complex64::new(0.0, 0.0));
                continue;
            }
            // ∫_0^t s^p e^{λs} ds = e^{λt} Σ_i (-1)^i p!/(p-i)! t^{p-i} / λ^{i+1}
            //                      + (-1)^{p+1} p! / λ^{p+1}
            let lam = t.rate;
            let mut falling = 1.0;
            let mut inv_pow = lam.inv();
            for i in 0..=p {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                out.push(t.coef * inv_pow * (sign * falling), p - i, lam);
                falling *= (p - i) as f64;
                inv_pow /= lam;
            }
            let fact: f64 = (1..=p).map(|k| k as f64).product();
            let sign = if p % 2 == 0 { -1.0 } else { 1.0 };
            out.push(
                t.coef * lam.powi(-(p as i32 + 1)) * (sign * fact),
                0,
                Complex64::new(0.0, 0.0),
            );
        }
        out
    }

    pub fn derivative(&self) -> ExpPoly {
        let mut out = ExpPoly::new();
        for t in &self.terms {
            out.push(t.coef * t.rate, t.power, t.rate);
            if t.power > 0 {
                out.push(t.coef * t.power as f64, t.power - 1, t.rate);
            }
        }
        out
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.coef * t.powi(term.power as i32) * (term.rate * t).exp())
            .sum()
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn integral_matches_quadrature() {
        let mut p = ExpPoly::new();
        p.push(c(1.0, 0.5), 0, c(-0.3, 2.0));
        p.push(c(0.7, 0.0), 1, c(-0.5, 0.0));
        p.push(c(2.0, 0.0), 0, c(0.0, 0.0));
        p.push(c(0.1, 0.0), 2, c(0.0, 0.0));
        let int = p.integral();
        for &t in &[0.0, 0.3, 1.7, 4.0] {
            let q = crate::quad::gauss_kronrod(|s| p.eval(s).re, 0.0, t, 1e-13, 0.0)
                .unwrap()
                .value;
            assert!((int.eval(t).re - q).abs() < 1e-11, "t={t}");
        }
        let d = int.derivative();
        for &t in &[0.2, 2.5] {
            assert!((d.eval(t) - p.eval(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn merges_like_terms() {
        let mut p = ExpPoly::new();
        p.push(c(1.0, 0.0), 0, c(0.0, 1.0));
        p.push(c(1.0, 0.0), 0, c(0.0, 1.0));
        assert_eq!(p.len(), 1);
        assert!((p.eval(0.0) - c(2.0, 0.0)).norm() < 1e-15);
    }
}
