//! Globally adaptive 21-point Gauss-Kronrod quadrature.
//!
//! Subintervals are bisected in order of decreasing error estimate until the
//! summed estimate meets `max(abs_tol, rel_tol * |I|)`. Intervals whose error
//! is already at the rounding floor of the rule are not split further, so a
//! tolerance below machine resolution terminates instead of exhausting the
//! subdivision budget.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    splittable: bool,
}

fn kronrod21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center)?;
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * f_center;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    if !value.is_finite() {
        return Err(Error::Domain {
            func: "integrate",
            detail: format!("non-finite integrand on [{a}, {b}]"),
        });
    }
    let tiny_width = (b - a).abs() <= 1e-14 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    Ok(Segment {
        a,
        b,
        value,
        err,
        splittable: err > 2.0 * floor && !tiny_width,
    })
}

/// Integrates a fallible integrand over the partition given by `points`
/// (at least two increasing abscissae).
pub fn try_integrate<F>(mut f: F, points: &[f64], opts: &QuadOptions) -> Result<QuadEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter(
            "integration points must be at least two increasing values".into(),
        ));
    }
    let mut segs = Vec::with_capacity(points.len() + 16);
    for w in points.windows(2) {
        if w[1] > w[0] {
            segs.push(kronrod21(&mut f, w[0], w[1])?);
        }
    }
    let mut evaluations = 21 * segs.len();
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let abs_err: f64 = segs.iter().map(|s| s.err).sum();
        if abs_err <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadEstimate {
                value,
                abs_err,
                evaluations,
            });
        }
        let worst = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.splittable)
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            // Everything left is at the rounding floor.
            return Ok(QuadEstimate {
                value,
                abs_err,
                evaluations,
            });
        };
        if segs.len() >= opts.max_subdivisions {
            return Err(Error::SubdivisionLimit {
                limit: opts.max_subdivisions,
                abs_err,
            });
        }
        let s = segs[i];
        let mid = 0.5 * (s.a + s.b);
        let left = kronrod21(&mut f, s.a, mid)?;
        let right = kronrod21(&mut f, mid, s.b)?;
        evaluations += 42;
        segs[i] = left;
        segs.push(right);
    }
}

/// Integrates an infallible integrand over the partition given by `points`.
pub fn integrate<F>(mut f: F, points: &[f64], opts: &QuadOptions) -> Result<QuadEstimate>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), points, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(
            |x| x.powi(5) - 2.0 * x,
            &[0.0, 2.0],
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_and_singular_integrands() {
        let opts = QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_subdivisions: 2000,
        };
        let r = integrate(|x| 1.0 / (1e-4 + x * x), &[-1.0, 1.0], &opts).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() / exact < 1e-12);
        // ∫₀¹ x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), &[0.0, 1.0], &opts).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn rejects_bad_partition_and_budget() {
        assert!(integrate(|x| x, &[1.0], &QuadOptions::default()).is_err());
        assert!(integrate(|x| x, &[1.0, 0.0], &QuadOptions::default()).is_err());
        let tight = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-15,
            max_subdivisions: 3,
        };
        let r = integrate(|x: f64| (1.0 / (x + 1e-9)).sin(), &[0.0, 1.0], &tight);
        assert!(matches!(r, Err(Error::SubdivisionLimit { .. })));
    }

    #[test]
    fn errors_propagate_from_integrand() {
        let r = try_integrate(
            |x| {
                if x > 0.5 {
                    Err(Error::InvalidParameter("boom".into()))
                } else {
                    Ok(x)
                }
            },
            &[0.0, 1.0],
            &QuadOptions::default(),
        );
        assert!(r.is_err());
    }
}
