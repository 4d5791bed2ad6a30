//! Overflow-safe exponential helpers and small scalar root finders.

/// `ln(sum_i exp(x_i))` with the max-exponent shift.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Boltzmann weights `exp(-(E_k - E_min)/T)` normalized to unit sum, and the
/// log of the unnormalized partition sum.
pub fn boltzmann_weights(energies: &[f64], t: f64) -> (Vec<f64>, f64) {
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = energies.iter().map(|&e| (-(e - e_min) / t).exp()).collect();
    let sum: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= sum;
    }
    (w, -e_min / t + sum.ln())
}

/// `sinh(z) * exp(-shift)` without intermediate overflow.
pub fn scaled_sinh(z: f64, shift: f64) -> f64 {
    if z.abs() < 1.0 {
        z.sinh() * (-shift).exp()
    } else {
        let a = z.abs();
        z.signum() * 0.5 * ((a - shift).exp() - (-a - shift).exp())
    }
}

/// `cosh(z) * exp(-shift)` without intermediate overflow.
pub fn scaled_cosh(z: f64, shift: f64) -> f64 {
    let a = z.abs();
    0.5 * ((a - shift).exp() + (-a - shift).exp())
}

/// `ln(2 cosh y)`.
pub fn ln_2cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `ln(1 + c e^x)` for `c > 0`.
pub fn ln_1p_exp(x: f64, c: f64) -> f64 {
    let lx = x + c.ln();
    if lx > 0.0 {
        lx + (-lx).exp().ln_1p()
    } else {
        lx.exp().ln_1p()
    }
}

/// `ln|e^x - 1|` for `x != 0`.
pub fn ln_abs_expm1(x: f64) -> f64 {
    if x > 1.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().abs().ln()
    }
}

/// Bisection on a boolean indicator that is `true` at `lo` and `false` at
/// `hi`. Returns the final bracket once its width drops below `tol`.
pub fn bisect_indicator<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Bisection for a sign change of `f` on `[a, b]`; `None` when the endpoints
/// do not bracket a root.
pub fn bisect_root<F>(mut f: F, a: f64, b: f64, tol: f64) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some((a, a));
    }
    if fb == 0.0 {
        return Some((b, b));
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let (mut lo, mut hi) = (a, b);
    let lo_sign = fa.signum();
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some((mid, mid));
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo.min(hi), lo.max(hi)))
}

/// Indices of strict interior local maxima of a sampled curve.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect()
}
