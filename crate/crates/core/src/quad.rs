// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Quadrature building blocks: composite Gauss–Legendre rules, the complex
//! exponential integral, and closed-form Fourier tails of Lorentzian-type
//! integrands.

use num_complex::Complex64;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule: `panels` equal panels over [lo, hi], each with an
/// `order`-point Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(lo: f64, hi: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `e^z E_1(z)` for complex `z` off the negative real axis.
///
/// Power series for small |z|, modified Lentz continued fraction otherwise.
pub fn exp_e1(z: Complex64) -> Complex64 {
    if z.norm() <= 2.0 {
        return z.exp() * e1_series(z);
    }
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = (d * an + b).inv();
        c = b + c.inv() * an;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h
}

/// `E_1(z)` for complex `z` off the negative real axis.
pub fn e1(z: Complex64) -> Complex64 {
    if z.norm() <= 2.0 {
        e1_series(z)
    } else {
        exp_e1(z) * (-z).exp()
    }
}

fn e1_series(z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..200 {
        term *= -z / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.norm() < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// `∫_c^∞ e^{ixt} / (x + q) dx` for `t > 0` and `c + q` off the real axis
/// or with `c + q > 0`.
pub fn tail_exp_over_linear(c: f64, q: Complex64, t: f64) -> Complex64 {
    let z = Complex64::new(0.0, -t) * (q + c);
    Complex64::from_polar(1.0, t * c) * exp_e1(z)
}

/// `∫_w^∞ dx / (x² + a²)`.
pub fn lorentz_tail_mass(w: f64, a: f64) -> f64 {
    (0.5 * PI - (w / a).atan()) / a
}

/// Fourier tails of a Lorentzian: returns
/// `(∫_w^∞ e^{ixt}/(x²+a²) dx, ∫_w^∞ x e^{ixt}/(x²+a²) dx)` for `t > 0`.
pub fn lorentz_tail_ft(w: f64, a: f64, t: f64) -> (Complex64, Complex64) {
    let ia = Complex64::new(0.0, a);
    let k_minus = tail_exp_over_linear(w, -ia, t);
    let k_plus = tail_exp_over_linear(w, ia, t);
    ((k_minus - k_plus) / (2.0 * ia), 0.5 * (k_minus + k_plus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert_abs_diff_eq!(s, 2.0 / 31.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn composite_rule_handles_oscillation() {
        let rule = CompositeRule::new(0.0, 10.0, 40, 16);
        let s = rule.integrate(|x| (7.0 * x).cos());
        assert_abs_diff_eq!(s, (70.0f64).sin() / 7.0, epsilon = 1e-13);
    }

    // Reference values from scipy.special.exp1.
    #[test]
    fn e1_matches_reference_values() {
        let cases = [
            ((0.5, 0.0), (0.559_773_594_776_160_8, 0.0)),
            ((1.0, -3.0), (-0.062_923_304_310_541_94, -0.078_771_499_802_348_99)),
            ((-0.1, -0.5), (0.059_890_285_769_147_567, 1.249_767_624_584_711_4)),
            ((-2.0, -40.0), (-0.134_394_279_923_080_53, -0.126_484_189_496_370_5)),
            ((5.0, 1.0), (0.000_439_449_805_675_569_4, -0.001_042_033_117_445_479)),
        ];
        for ((zr, zi), (er, ei)) in cases {
            let got = e1(Complex64::new(zr, zi));
            let want = Complex64::new(er, ei);
            assert!(
                (got - want).norm() <= 1e-12 * want.norm().max(1e-3),
                "E1({zr}+{zi}i) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn lorentz_tail_agrees_with_direct_quadrature() {
        // Brute-force quadrature on a long truncated interval.
        let (w, a, t) = (5.0, 0.7, 1.3);
        let (k1, k2) = lorentz_tail_ft(w, a, t);
        let upper = 4000.0;
        let rule = CompositeRule::new(w, upper, 40_000, 8);
        let re1 = rule.integrate(|x| (x * t).cos() / (x * x + a * a));
        let im1 = rule.integrate(|x| (x * t).sin() / (x * x + a * a));
        // Remainder beyond `upper` is O(1/(upper² t)) for the first integral.
        assert_abs_diff_eq!(k1.re, re1, epsilon = 1e-7);
        assert_abs_diff_eq!(k1.im, im1, epsilon = 1e-7);
        let re2 = rule.integrate(|x| x * (x * t).cos() / (x * x + a * a));
        let im2 = rule.integrate(|x| x * (x * t).sin() / (x * x + a * a));
        // Second integral converges only conditionally: remainder ~ 1/(upper t).
        assert_abs_diff_eq!(k2.re, re2, epsilon = 5e-4);
        assert_abs_diff_eq!(k2.im, im2, epsilon = 5e-4);
    }

    #[test]
    fn tail_mass_matches_arctan() {
        assert_abs_diff_eq!(lorentz_tail_mass(0.0, 2.0), PI / 4.0, epsilon = 1e-15);
    }
}
