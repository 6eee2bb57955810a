//! Distribution functions needed by the stream oracles: the standard normal
//! quantile, and the chi-squared CDF/quantile for real degrees of freedom
//! via the regularized incomplete gamma function.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const REL_EPS: f64 = 1e-14;
const TINY: f64 = 1e-300;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal CDF.
///
/// Rational approximation (relative error about 1e-9) followed by one Halley
/// refinement against `erfc`, which brings it to near machine precision.
pub fn normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Input(format!("probability must lie in (0, 1), got {q}")));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |p: f64| {
        let t = (-2.0 * p.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    };
    let x = if q < P_LOW {
        tail(q)
    } else if q > 1.0 - P_LOW {
        -tail(1.0 - q)
    } else {
        let u = q - 0.5;
        let r = u * u;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * u
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // Halley step on F(x) - q; the residual is taken from the smaller tail
    // to avoid cancellation.
    let e = if x < 0.0 {
        normal_cdf(x) - q
    } else {
        (1.0 - q) - 0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    };
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Regularized lower incomplete gamma function `P(a, x)`.
///
/// Series expansion for `x < a + 1`, Lentz continued fraction for the upper
/// function otherwise.
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) || !(x >= 0.0) {
        return Err(Error::Input(format!(
            "incomplete gamma needs a > 0 and x >= 0, got a={a}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefactor = a * x.ln() - x - libm::lgamma(a);
    if x < a + 1.0 {
        series_p(a, x, log_prefactor)
    } else {
        continued_fraction_q(a, x, log_prefactor).map(|q| 1.0 - q)
    }
}

fn series_p(a: f64, x: f64, log_prefactor: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * REL_EPS {
            return Ok((sum * log_prefactor.exp()).min(1.0));
        }
    }
    Err(Error::Numeric(format!(
        "incomplete gamma series did not converge for a={a}, x={x}"
    )))
}

fn continued_fraction_q(a: f64, x: f64, log_prefactor: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < REL_EPS {
            return Ok((log_prefactor.exp() * h).clamp(0.0, 1.0));
        }
    }
    Err(Error::Numeric(format!(
        "incomplete gamma continued fraction did not converge for a={a}, x={x}"
    )))
}

/// Chi-squared CDF with `nu > 0` (not necessarily integer) degrees of freedom.
pub fn chi2_cdf(x: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Input(format!("degrees of freedom must be positive, got {nu}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Input(format!("chi-squared CDF needs x >= 0, got {x}")));
    }
    regularized_gamma_p(0.5 * nu, 0.5 * x)
}

/// Inverse chi-squared CDF by bracketing and bisection.
pub fn chi2_quantile(q: f64, nu: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Input(format!("probability must lie in (0, 1), got {q}")));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Input(format!("degrees of freedom must be positive, got {nu}")));
    }
    let mut lo = 0.0;
    let mut hi = nu.max(1.0);
    let mut expansions = 0;
    while chi2_cdf(hi, nu)? < q {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 1000 || !hi.is_finite() {
            return Err(Error::Numeric(format!(
                "could not bracket chi-squared quantile q={q}, nu={nu}"
            )));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if chi2_cdf(mid, nu)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric(format!(
        "chi-squared quantile bisection did not converge for q={q}, nu={nu}"
    )))
}
