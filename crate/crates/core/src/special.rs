//! Laguerre and Hermite functions, log-factorials and Gauss–Legendre rules.
//!
//! Everything here is evaluated by three-term recurrences. Factorial ratios
//! are never formed directly; they overflow past n ≈ 170 in `f64` (and much
//! earlier in `f32`).

use crate::error::{OvmError, Result};
use crate::scalar::Real;

/// Laguerre polynomial `L_n(x)` by upward recurrence.
pub fn laguerre<T: Real>(n: usize, x: T) -> T {
    assoc_laguerre(n, 0, x)
}

/// Associated Laguerre polynomial `L_n^{(k)}(x)` by upward recurrence.
pub fn assoc_laguerre<T: Real>(n: usize, k: usize, x: T) -> T {
    let kk = T::of(k);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() + kk - x;
    for j in 1..n {
        let jj = T::of(j);
        let next = ((T::lit(2.0) * jj + T::one() + kk - x) * cur - (jj + kk) * prev) / (jj + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Values `L_n^{(k)}(x)` for `n = 0..count`, each returned as
/// `(mantissa, log_scale)` with `L = mantissa * exp(log_scale)`.
///
/// The recurrence is renormalized whenever the running value exceeds `1e15`,
/// which keeps the large-`x` regime of displacement matrix elements
/// representable in `f32` as well as `f64`.
pub fn assoc_laguerre_scaled_row<T: Real>(k: usize, count: usize, x: T) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let kk = T::of(k);
    let big = T::lit(1e15);
    let mut log_scale = T::zero();
    let mut prev = T::one();
    out.push((prev, log_scale));
    if count == 1 {
        return out;
    }
    let mut cur = T::one() + kk - x;
    out.push((cur, log_scale));
    for j in 1..count - 1 {
        let jj = T::of(j);
        let next = ((T::lit(2.0) * jj + T::one() + kk - x) * cur - (jj + kk) * prev) / (jj + T::one());
        prev = cur;
        cur = next;
        let mag = cur.abs();
        if mag > big {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
        out.push((cur, log_scale));
    }
    out
}

/// `ln(n!)` for `n = 0..count`, accumulated as a running sum of logs.
pub fn ln_factorials<T: Real>(count: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(count);
    let mut acc = T::zero();
    for n in 0..count {
        if n > 1 {
            acc += T::of(n).ln();
        }
        out.push(acc);
    }
    out
}

/// Harmonic-oscillator eigenfunctions `φ_n(u)`, `n = 0..count`, for the
/// unit convention `φ_0(u) = π^{-1/4} e^{-u²/2}`.
pub fn hermite_functions<T: Real>(count: usize, u: T) -> Vec<T> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let two = T::lit(2.0);
    let phi0 = T::pi().powf(T::lit(-0.25)) * (-u * u / two).exp();
    out.push(phi0);
    if count == 1 {
        return out;
    }
    out.push(two.sqrt() * u * phi0);
    for n in 1..count - 1 {
        let nn = T::of(n);
        let next = (two / (nn + T::one())).sqrt() * u * out[n] - (nn / (nn + T::one())).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on the Legendre
    /// recurrence. Nodes are computed in `f64` and converted.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(OvmError::InvalidQuadrature("zero-point rule".into()));
        }
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(node, weight)` pairs mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }

    /// `∫_a^b f` with this rule on a single panel.
    pub fn integrate(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        self.mapped(a, b).fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }

    /// Nodes and weights of the composite rule with `panels` equal panels.
    pub fn composite(&self, a: T, b: T, panels: usize) -> Vec<(T, T)> {
        let panels = panels.max(1);
        let width = (b - a) / T::of(panels);
        (0..panels)
            .flat_map(|k| {
                let lo = a + width * T::of(k);
                self.mapped(lo, lo + width).collect::<Vec<_>>()
            })
            .collect()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
    let d = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    (pn, d)
}
