//! Bessel functions of the first kind for the orders the satellite beam
//! pattern needs.
//!
//! Small arguments use the ascending power series. Above `SERIES_LIMIT` the
//! series loses too many digits to cancellation, so Miller's backward
//! recurrence normalised by `J0 + 2·Σ J_2k = 1` takes over.

use crate::error::{invalid, Result};

const SERIES_LIMIT: f64 = 12.0;

/// `J_order(x)` for `order ∈ {1, 3}` and `x ≥ 0`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if order != 1 && order != 3 {
        return Err(invalid(format!("bessel_j: unsupported order {order}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("bessel_j: argument must be finite and >= 0, got {x}")));
    }
    Ok(if x <= SERIES_LIMIT {
        x.powi(order as i32) * scaled_series(order, x)
    } else {
        miller(order, x)
    })
}

/// `J_n(x) / x^n`, finite at `x = 0` where it equals `1 / (2^n n!)`.
///
/// Used by the beam pattern, which needs `J1(u)/u` and `J3(u)/u³` near the
/// boresight without a 0/0.
pub fn bessel_j_over_power(order: u32, x: f64) -> Result<f64> {
    if order != 1 && order != 3 {
        return Err(invalid(format!("bessel_j_over_power: unsupported order {order}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("bessel_j_over_power: bad argument {x}")));
    }
    Ok(if x <= SERIES_LIMIT {
        scaled_series(order, x)
    } else {
        miller(order, x) / x.powi(order as i32)
    })
}

/// `Σ_k (−1)^k (x/2)^{2k} / (2^n k! (k+n)!)`.
fn scaled_series(order: u32, x: f64) -> f64 {
    let n = order as i32;
    let q = 0.25 * x * x;
    // k = 0 term: 1 / (2^n n!)
    let mut term = 1.0 / (2f64.powi(n) * (1..=n).map(f64::from).product::<f64>());
    let mut sum = term;
    for k in 1..200 {
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(order: u32, x: f64) -> f64 {
    let n = order as usize;
    let top = x.max(n as f64);
    let mut start = (top + 30.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;

    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300_f64.sqrt(); // J_k, arbitrary seed
    let mut even_sum = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev; // now J_{k-1}
        let idx = k - 1;
        if idx == n {
            wanted = cur;
        }
        if idx > 0 && idx % 2 == 0 {
            even_sum += 2.0 * cur;
        }
        if cur.abs() > 1e100 {
            cur *= 1e-100;
            next *= 1e-100;
            even_sum *= 1e-100;
            wanted *= 1e-100;
        }
    }
    wanted / (even_sum + cur)
}
