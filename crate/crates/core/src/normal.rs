//! Standard normal CDF, quantile and the two-sided z-test p-value.
//!
//! The CDF goes through the fdlibm `erfc` rational approximations (via
//! `libm`), which keep full relative precision deep into the lower tail.
//! The quantile starts from Acklam's rational approximation and applies one
//! Halley step against that CDF.

use core::f64::consts::SQRT_2;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Smallest positive `f64`; p-values are clamped here so they stay in (0,1].
pub const MIN_P_VALUE: f64 = 5e-324;

/// Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Φ⁻¹(p) for `0 < p < 1`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    // 1 - p is exact for p >= 0.5, so solve in the lower half only.
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let x = acklam(p);
    // Halley refinement
    let e = normal_cdf(x) - p;
    let u = e * SQRT_2PI * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

fn acklam(p: f64) -> f64 {
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
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Two-sided p-value of a z statistic, `2 (1 - Φ(|z|))`, clamped to (0,1].
pub fn p_value_two_sided(z: f64) -> f64 {
    // 2 Φ(-|z|) is the same quantity without cancellation for large |z|.
    let p = 2.0 * normal_cdf(-libm::fabs(z));
    p.clamp(MIN_P_VALUE, 1.0)
}

/// Power of a two-sided z-test at level `alpha` when the statistic is
/// N(delta, 1): `Φ(δ - z) + Φ(-δ - z)` with `z = Φ⁻¹(1 - α/2)`.
pub fn analytic_power(delta: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if !delta.is_finite() {
        return Err(Error::NonFinite(delta));
    }
    let crit = -normal_quantile(0.5 * alpha)?;
    Ok(normal_cdf(delta - crit) + normal_cdf(-delta - crit))
}
