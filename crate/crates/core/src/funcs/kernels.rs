//! Scalar formulas behind the catalog, with their removable singularities
//! resolved explicitly.

/// Half-width of the band around a removable singularity (in `x − 1`, `t`,
/// `p`, `q` or `p + q`) inside which the limit branch is used.
pub const GUARD: f64 = 1e-9;

/// `(e^z − 1) / z`, equal to 1 at `z = 0`.
pub fn expm1_ratio(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        z.exp_m1() / z
    }
}

/// `L / (1 − e^{−L}) − 1`, equal to 0 at `L = 0`.
fn identric_exponent(l: f64) -> f64 {
    if l.abs() < 1e-3 {
        let l2 = l * l;
        l / 2.0 + l2 / 12.0 - l2 * l2 / 720.0
    } else {
        l / (-(-l).exp_m1()) - 1.0
    }
}

/// Weighted power mean of 1 and `x`: `[1 − λ + λ x^t]^{1/t}`, `x^λ` at `t = 0`.
pub fn power_mean(t: f64, lam: f64, x: f64) -> f64 {
    if lam == 0.0 {
        return 1.0;
    }
    if lam == 1.0 {
        return x;
    }
    if t.abs() < GUARD {
        return x.powf(lam);
    }
    if t == 1.0 {
        return 1.0 - lam + lam * x;
    }
    let lx = x.ln();
    ((lam * (t * lx).exp_m1()).ln_1p() / t).exp()
}

/// Logarithmic mean of 1 and `x`: `(x − 1) / ln x`.
pub fn log_mean(x: f64) -> f64 {
    let u = x - 1.0;
    if u.abs() < GUARD {
        return 1.0 + u / 2.0;
    }
    if (0.5..=2.0).contains(&x) {
        u / u.ln_1p()
    } else {
        u / x.ln()
    }
}

/// Identric mean of 1 and `x`: `exp(x ln x / (x − 1) − 1)`.
pub fn identric_mean(x: f64) -> f64 {
    identric_exponent(x.ln()).exp()
}

/// Heinz mean of 1 and `x`: `(x^t + x^{1−t}) / 2`.
pub fn heinz_mean(t: f64, x: f64) -> f64 {
    0.5 * (x.powf(t) + x.powf(1.0 - t))
}

/// Closed form of the power-difference family
/// `F_{p,q}(x) = (p/(p+q) · (x^{p+q} − 1)/(x^p − 1))^{1/q}`,
/// with the limits at `p = 0`, `q = 0`, `p + q = 0` and `x = 1`.
pub fn power_difference(p: f64, q: f64, x: f64) -> f64 {
    let l = x.ln();
    if (x - 1.0).abs() < GUARD {
        return 1.0;
    }
    if q.abs() < GUARD {
        // exp of ∫₀¹ ln p_p(λ; x) dλ
        let e = if p.abs() < GUARD {
            l / 2.0
        } else {
            identric_exponent(p * l) / p
        };
        return e.exp();
    }
    // (x^{p+q} − 1)/(p+q) ÷ (x^p − 1)/p, both written as ln x · expm1_ratio
    let ratio = expm1_ratio((p + q) * l) / expm1_ratio(p * l);
    ratio.powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_mean_special_cases() {
        assert!((power_mean(1.0, 0.3, 5.0) - 2.2).abs() < 1e-15);
        assert_eq!(power_mean(0.4, 0.0, 7.0), 1.0);
        assert_eq!(power_mean(-0.4, 1.0, 7.0), 7.0);
        assert!((power_mean(-1.0, 0.5, 3.0) - 1.5).abs() < 1e-15);
        assert!((power_mean(0.0, 0.5, 9.0) - 3.0).abs() < 1e-15);
        // continuity across the t = 0 guard: p_t = x^λ (1 + tλ(1−λ)ln²x/2 + O(t²))
        let (t, lam, x) = (2e-9f64, 0.3f64, 50.0f64);
        let slope = lam * (1.0 - lam) * x.ln().powi(2) / 2.0;
        let expected = x.powf(lam) * (1.0 + t * slope);
        assert!((power_mean(t, lam, x) - expected).abs() < 1e-14);
    }

    #[test]
    fn log_and_identric_values() {
        assert!((log_mean(2.0) - 1.0 / std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(log_mean(1.0), 1.0);
        let expected = (2.0 * std::f64::consts::LN_2 - 1.0).exp();
        assert!((identric_mean(2.0) - expected).abs() < 1e-15);
        assert_eq!(identric_mean(1.0), 1.0);
        // continuity of the series branch
        let x: f64 = 1.0 + 2e-3;
        let direct = (x * x.ln() / (x - 1.0) - 1.0).exp();
        assert!((identric_mean(x) - direct).abs() < 1e-12);
    }

    #[test]
    fn power_difference_limits() {
        for &x in &[0.5, 2.0, 10.0] {
            assert!((power_difference(1.0, 1.0, x) - (1.0 + x) / 2.0).abs() < 1e-14);
            assert!((power_difference(0.0, 0.0, x) - x.sqrt()).abs() < 1e-14);
            assert!((power_difference(1.0, 0.0, x) - identric_mean(x)).abs() < 1e-14);
            assert!((power_difference(1.0, -1.0, x) - log_mean(x)).abs() < 1e-14);
            let near = power_difference(0.5 + 3e-9, -0.5, x);
            let at = power_difference(0.5, -0.5, x);
            assert!((near - at).abs() < 1e-8);
        }
    }
}
