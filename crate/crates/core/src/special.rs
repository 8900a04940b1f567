//! Special functions and quadrature rules.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::Real;

/// Gaussian tail `Q(x) = P[N(0,1) >= x] = erfc(x/√2)/2`.
pub fn q_function<T: Real>(x: T) -> T {
    T::of(0.5 * libm::erfc(x.as_f64() / std::f64::consts::SQRT_2))
}

/// Inverse of [`q_function`] on `(0, 1)`, by bisection on the monotone tail.
pub fn q_inverse(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "q_inverse needs p in (0,1), got {p}");
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Binary entropy in bits, `H(0) = H(1) = 0`.
pub fn binary_entropy<T: Real>(p: T) -> T {
    if p <= T::zero() || p >= T::one() {
        return T::zero();
    }
    let q = T::one() - p;
    -(p * p.log2() + q * q.log2())
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Nodes and weights of an `n`-point Gauss–Hermite rule for `∫ e^{-x²} f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Rule of order `n`, computed once per process and cached.
    pub fn of_order(n: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(Self::compute(n))).clone()
    }

    // Golub–Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
    // matrix (implicit QL), then polished by Newton on the orthonormal
    // recurrence. The recurrence is rescaled as it runs so weights of the
    // extreme nodes come out as (possibly underflowing) exp(log-weight).
    fn compute(n: usize) -> GaussHermite {
        assert!(n >= 1);
        let mut d = vec![0.0_f64; n];
        let mut e: Vec<f64> = (1..=n).map(|j| if j < n { (j as f64 / 2.0).sqrt() } else { 0.0 }).collect();
        tridiagonal_eigenvalues(&mut d, &mut e);
        d.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &x0 in &d {
            let mut z = x0;
            let mut ln_w = 0.0;
            for _ in 0..3 {
                let (p_n, ln_scale, dp) = hermite_orthonormal(n, z);
                ln_w = std::f64::consts::LN_2 - 2.0 * (dp.abs().ln() + ln_scale);
                let step = p_n / dp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes.push(z);
            weights.push(ln_w.exp());
        }
        GaussHermite { nodes, weights }
    }

    /// `E[f(X)]` for `X ~ N(mean, sd²)`.
    pub fn gaussian_expectation<T: Real>(&self, mean: T, sd: T, f: impl Fn(T) -> T) -> T {
        let scale = sd * T::SQRT_2();
        let s: T = self.nodes.iter().zip(&self.weights).map(|(&t, &w)| T::of(w) * f(mean + scale * T::of(t))).sum();
        s / T::PI().sqrt()
    }
}

/// Orthonormal Hermite recurrence at `z`: returns `(p_n/S, ln S, p'_n/S)` where
/// `S` is an accumulated rescaling factor. `p'_n = √(2n) p_{n−1}`.
fn hermite_orthonormal(n: usize, z: f64) -> (f64, f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    let mut ln_scale = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > 1e100 {
            p1 *= 1e-100;
            p2 *= 1e-100;
            ln_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
    (p1, ln_scale, (2.0 * n as f64).sqrt() * p2)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with shifts.
/// `d` holds the diagonal (overwritten by eigenvalues), `e[i]` couples `i` and
/// `i+1` (`e[n-1]` unused).
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Adaptive Gauss–Hermite expectation under `N(mean, sd²)`: orders double from
/// 16 until two successive estimates agree to `tol` (absolute or relative).
pub fn adaptive_gaussian_expectation<T: Real>(mean: T, sd: T, tol: f64, f: impl Fn(T) -> T) -> T {
    let mut order = 16;
    let mut prev = GaussHermite::of_order(order).gaussian_expectation(mean, sd, &f);
    while order < 1024 {
        order *= 2;
        let cur = GaussHermite::of_order(order).gaussian_expectation(mean, sd, &f);
        let diff = (cur - prev).abs().as_f64();
        if diff <= tol || diff <= tol * cur.abs().as_f64() {
            return cur;
        }
        prev = cur;
    }
    prev
}
