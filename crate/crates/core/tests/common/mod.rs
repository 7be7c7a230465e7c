#![allow(dead_code)]

/// First zeros of J₀ and J₁.
pub const J01: f64 = 2.404_825_557_695_773;
pub const J11: f64 = 3.831_705_970_207_512;
pub const C0: f64 = 299_792_458.0;

/// Jₙ(x) by its power series; accurate to ~1e-15 for |x| < 10.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Bisection root of Jₙ in [lo, hi].
pub fn bessel_zero(n: u32, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = bessel_j(n, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (bessel_j(n, mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// TM₀₁₀ frequency of a disc of radius `a` filled with `eps`.
pub fn tm010(a: f64, eps: f64) -> f64 {
    J01 * C0 / (2.0 * std::f64::consts::PI * a * eps.sqrt())
}
