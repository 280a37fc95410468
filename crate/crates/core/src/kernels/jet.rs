//! Truncated Taylor-series arithmetic.
//!
//! A jet of length `n + 1` at `r0` holds the coefficients `t_k = f^(k)(r0) / k!`.

pub type Jet = Vec<f64>;

pub fn constant(value: f64, len: usize) -> Jet {
    let mut j = vec![0.0; len];
    if len > 0 {
        j[0] = value;
    }
    j
}

/// Jet of the identity map `r` at `r0`.
pub fn variable(r0: f64, len: usize) -> Jet {
    let mut j = constant(r0, len);
    if len > 1 {
        j[1] = 1.0;
    }
    j
}

pub fn add(a: &[f64], b: &[f64]) -> Jet {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Jet {
    a.iter().map(|x| x * s).collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Jet {
    let n = a.len().min(b.len());
    (0..n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect()
}

/// `g^a` for real `a`; requires `g0 > 0` unless `a` is a nonnegative integer.
pub fn powf(g: &[f64], a: f64) -> Option<Jet> {
    if a.fract() == 0.0 && (0.0..=64.0).contains(&a) {
        return Some(powi(g, a as u32));
    }
    let g0 = g[0];
    if g0 <= 0.0 {
        return None;
    }
    let mut h = vec![0.0; g.len()];
    h[0] = g0.powf(a);
    for k in 1..g.len() {
        let mut s = 0.0;
        for j in 1..=k {
            s += (a * j as f64 - (k - j) as f64) * g[j] * h[k - j];
        }
        h[k] = s / (k as f64 * g0);
    }
    Some(h)
}

pub fn powi(g: &[f64], mut e: u32) -> Jet {
    let mut result = constant(1.0, g.len());
    let mut base = g.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    result
}

pub fn exp(g: &[f64]) -> Jet {
    let mut h = vec![0.0; g.len()];
    h[0] = g[0].exp();
    for k in 1..g.len() {
        let s: f64 = (1..=k).map(|j| j as f64 * g[j] * h[k - j]).sum();
        h[k] = s / k as f64;
    }
    h
}

/// Natural log; requires `g0 > 0`.
pub fn ln(g: &[f64]) -> Option<Jet> {
    let g0 = g[0];
    if g0 <= 0.0 {
        return None;
    }
    let mut h = vec![0.0; g.len()];
    h[0] = g0.ln();
    for k in 1..g.len() {
        let s: f64 = (1..k).map(|j| j as f64 * h[j] * g[k - j]).sum();
        h[k] = (g[k] - s / k as f64) / g0;
    }
    Some(h)
}

/// Jet of `f^(k)` from a jet of `f` that is `k` entries longer.
pub fn derivative(g: &[f64], k: usize) -> Jet {
    (0..g.len().saturating_sub(k))
        .map(|j| {
            let factor: f64 = ((j + 1)..=(j + k)).map(|v| v as f64).product();
            g[j + k] * factor
        })
        .collect()
}

/// Jet of `f(r) / r` at `r0`. At `r0 = 0` this needs `f(0) = 0` and drops one order.
pub fn div_r(g: &[f64], r0: f64) -> Option<Jet> {
    if r0 == 0.0 {
        if g[0] != 0.0 {
            return None;
        }
        return Some(g[1..].to_vec());
    }
    let mut h = vec![0.0; g.len()];
    h[0] = g[0] / r0;
    for k in 1..g.len() {
        h[k] = (g[k] - h[k - 1]) / r0;
    }
    Some(h)
}

/// Plain derivatives `f^(k)(r0)` from Taylor coefficients.
pub fn to_derivatives(j: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    j.iter()
        .enumerate()
        .map(|(k, t)| {
            if k > 0 {
                fact *= k as f64;
            }
            t * fact
        })
        .collect()
}
