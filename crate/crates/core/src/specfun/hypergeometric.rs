//! Confluent and Gauss hypergeometric functions and Tricomi's U.

use crate::error::{domain, Error, Result};
use crate::integrate::{try_integrate, QuadOptions};

use super::dd::Dd;
use super::gamma::{gamma, ln_beta, ln_gamma, recip_gamma};
use super::{is_nonpositive_integer, AccuracyPolicy};

/// Generalized hypergeometric power series with double-double partial sums.
fn pfq_series(
    func: &'static str,
    num: &[f64],
    den: &[f64],
    z: f64,
    policy: &AccuracyPolicy,
) -> Result<f64> {
    if let Some(b) = den.iter().find(|b| is_nonpositive_integer(**b)) {
        return Err(domain(
            func,
            format!("lower parameter {b} is a nonpositive integer"),
        ));
    }
    let zd = Dd::from(z);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut small = 0;
    for n in 0..policy.max_terms() {
        let nd = Dd::from(n as f64);
        let mut t = term * zd / (nd + Dd::ONE);
        for &a in num {
            t = t * (Dd::from(a) + nd);
        }
        for &b in den {
            t = t / (Dd::from(b) + nd);
        }
        term = t;
        sum = sum + term;
        if !sum.is_finite() {
            return Err(domain(func, format!("series overflows at z = {z}")));
        }
        if term.abs().to_f64() <= policy.rel_tol() * sum.abs().to_f64() {
            small += 1;
            if small >= 3 {
                return Ok(sum.to_f64());
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Convergence {
        func,
        terms: policy.max_terms(),
    })
}

/// Kummer's confluent hypergeometric function ₁F₁(a; b; z).
///
/// Negative arguments go through the Kummer transformation
/// ₁F₁(a; b; z) = e^z ₁F₁(b−a; b; −z) so that the series has no cancellation.
pub fn kummer_1f1(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Err(domain(
            "kummer_1f1",
            format!("b = {b} is a nonpositive integer"),
        ));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z < 0.0 {
        return Ok(z.exp() * pfq_series("kummer_1f1", &[b - a], &[b], -z, policy)?);
    }
    pfq_series("kummer_1f1", &[a], &[b], z, policy)
}

/// ₁F₁(a; b; z) by its power series, whatever the sign of `z`.
pub fn kummer_1f1_series(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    pfq_series("kummer_1f1", &[a], &[b], z, policy)
}

/// ₂F₂(a1, a2; b1, b2; z) by its power series (entire in `z`).
pub fn hyp_2f2(a1: f64, a2: f64, b1: f64, b2: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    pfq_series("hyp_2f2", &[a1, a2], &[b1, b2], z, policy)
}

/// ₂F₁(a, b; c; z) by its power series; converges for |z| < 1.
pub fn gauss_2f1_series(a: f64, b: f64, c: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    if !(z.abs() < 1.0) {
        return Err(domain(
            "gauss_2f1",
            format!("series needs |z| < 1, got {z}"),
        ));
    }
    pfq_series("gauss_2f1", &[a, b], &[c], z, policy)
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for z < 1.
///
/// |z| ≤ 1/2 uses the power series. z < −1/2 is mapped into (1/3, 1) by the
/// Pfaff transformation. Arguments in (1/2, 1) use the z → 1−z connection
/// formula unless c−a−b is within 1e-3 of an integer, where that formula is
/// singular, or its two terms cancel beyond the policy tolerance; those cases
/// fall back to Euler's integral (when c > b > 0 or
/// c > a > 0) and finally to the slowly converging direct series.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(domain(
            "gauss_2f1",
            format!("c = {c} is a nonpositive integer"),
        ));
    }
    if !(z < 1.0) {
        return Err(domain("gauss_2f1", format!("need z < 1, got {z}")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if z.abs() <= 0.5 {
        return gauss_2f1_series(a, b, c, z, policy);
    }
    if z < 0.0 {
        // Keep the parameter that admits Euler's integral in the b slot.
        let (a, b) = if !(c > b && b > 0.0) && (c > a && a > 0.0) {
            (b, a)
        } else {
            (a, b)
        };
        let w = z / (z - 1.0);
        let front = (1.0 - z).powf(-b);
        return Ok(front * unit_interval(c - a, b, c, w, policy)?);
    }
    unit_interval(a, b, c, z, policy)
}

fn unit_interval(a: f64, b: f64, c: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    if z <= 0.5 {
        return gauss_2f1_series(a, b, c, z, policy);
    }
    let s = c - a - b;
    if (s - s.round()).abs() > 1e-3 {
        if let Some(v) = linear_transformation(a, b, c, z, s, policy)? {
            return Ok(v);
        }
    }
    if (c > b && b > 0.0) || (c > a && a > 0.0) {
        return gauss_2f1_euler(a, b, c, z, policy);
    }
    gauss_2f1_series(a, b, c, z, policy)
}

fn linear_transformation(
    a: f64,
    b: f64,
    c: f64,
    z: f64,
    s: f64,
    policy: &AccuracyPolicy,
) -> Result<Option<f64>> {
    let gc = gamma(c)?;
    let c1 = gc * gamma(s)? * recip_gamma(c - a) * recip_gamma(c - b);
    let c2 = gc * gamma(-s)? * recip_gamma(a) * recip_gamma(b);
    if !(c1.is_finite() && c2.is_finite()) {
        return Ok(None);
    }
    let y = 1.0 - z;
    let t1 = if c1 != 0.0 {
        c1 * gauss_2f1_series(a, b, 1.0 - s, y, policy)?
    } else {
        0.0
    };
    let t2 = if c2 != 0.0 {
        c2 * y.powf(s) * gauss_2f1_series(c - a, c - b, 1.0 + s, y, policy)?
    } else {
        0.0
    };
    let v = t1 + t2;
    // The two terms can cancel far beyond the integer guard on s.
    if (t1.abs() + t2.abs()) * 64.0 * f64::EPSILON > policy.rel_tol() * v.abs() {
        return Ok(None);
    }
    Ok(Some(v))
}

/// ∫₀^h t^{p-1} g(t) dt, substituting t = s^{1/p} when the endpoint power is
/// singular.
fn endpoint_power_integral<G>(
    mut g: G,
    h: f64,
    p: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let mut pts = vec![0.0];
    if p < 1.0 {
        pts.extend(
            breaks
                .iter()
                .filter(|&&x| x > 0.0 && x < h)
                .map(|x| x.powf(p)),
        );
        pts.push(h.powf(p));
        let inv = 1.0 / p;
        let r = try_integrate(|s| Ok(g(s.powf(inv)) * inv), &pts, opts)?;
        Ok(r.value)
    } else {
        pts.extend(breaks.iter().copied().filter(|&x| x > 0.0 && x < h));
        pts.push(h);
        let r = try_integrate(|t| Ok(t.powf(p - 1.0) * g(t)), &pts, opts)?;
        Ok(r.value)
    }
}

/// ₂F₁ through Euler's integral
/// Γ(c)/(Γ(b)Γ(c−b)) ∫₀¹ t^{b−1}(1−t)^{c−b−1}(1−zt)^{−a} dt,
/// valid for z < 1 and c > b > 0 (or c > a > 0, using the symmetry in a, b).
pub fn gauss_2f1_euler(a: f64, b: f64, c: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    let (a, b) = if c > b && b > 0.0 {
        (a, b)
    } else if c > a && a > 0.0 {
        (b, a)
    } else {
        return Err(domain(
            "gauss_2f1",
            format!("Euler integral needs c > b > 0 or c > a > 0 (a={a}, b={b}, c={c})"),
        ));
    };
    if !(z < 1.0) {
        return Err(domain("gauss_2f1", format!("need z < 1, got {z}")));
    }
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: policy.rel_tol(),
        max_subdivisions: 4000,
    };
    let q = c - b;
    let left = endpoint_power_integral(
        |t| (1.0 - t).powf(q - 1.0) * (1.0 - z * t).powf(-a),
        0.5,
        b,
        &[],
        &opts,
    )?;
    // Near t = 1 the factor (1 - z + z r)^{-a} varies on the scale 1 - z.
    let scale = (1.0 - z).abs().max(1e-300);
    let breaks: Vec<f64> = (0..12)
        .map(|k| scale * 10f64.powi(k))
        .take_while(|&r| r < 0.5)
        .collect();
    let right = endpoint_power_integral(
        |r| (1.0 - r).powf(b - 1.0) * ((1.0 - z) + z * r).powf(-a),
        0.5,
        q,
        &breaks,
        &opts,
    )?;
    Ok((-ln_beta(b, q)?).exp() * (left + right))
}

/// ln of (1/Γ(a)) ∫₀^∞ x^{a−1} e^{−x} (1 + x/z)^{b−a−1} dx, which equals
/// ln(z^a U(a; b; z)).
pub(crate) fn ln_scaled_u_integral(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    if !(a > 0.0 && z > 0.0 && b.is_finite() && a.is_finite() && z.is_finite()) {
        return Err(domain(
            "tricomi_u",
            format!("need a > 0, z > 0 and finite b, got a = {a}, b = {b}, z = {z}"),
        ));
    }
    let c = b - a - 1.0;
    let lg = ln_gamma(a)?;
    let phi = |x: f64| -> f64 {
        let lead = if a == 1.0 { 0.0 } else { (a - 1.0) * x.ln() };
        lead - x + c * (x / z).ln_1p()
    };
    // Stationary points of phi solve x² − Bx − (a−1)z = 0.
    let bq = a - 1.0 - z + c;
    let disc = bq * bq + 4.0 * (a - 1.0) * z;
    let peak = if disc >= 0.0 {
        let r = 0.5 * (bq + disc.sqrt());
        (r > 0.0).then_some(r)
    } else {
        None
    };
    let mut reference = phi(1.0).max(phi(a.max(1e-3)));
    if let Some(p) = peak {
        reference = reference.max(phi(p));
    }
    if a <= 1.0 {
        // Without an interior peak the smooth factor is largest at 0, where it is 1.
        reference = reference.max(0.0);
    }
    let width = match peak {
        Some(p) => {
            let d2 = -(a - 1.0) / (p * p) - c / ((z + p) * (z + p));
            if d2 < 0.0 {
                1.0 / (-d2).sqrt()
            } else {
                p.max(1.0)
            }
        }
        None => 1.0,
    };
    let centre = peak.unwrap_or(0.0);
    let mut upper = (centre + 12.0 * width)
        .max(2.0 * (a - 1.0 + c.max(0.0)))
        .max(8.0);
    let mut guard = 0;
    while phi(upper) - reference > -46.0 {
        upper *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Convergence {
                func: "tricomi_u",
                terms: guard,
            });
        }
    }
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: policy.rel_tol(),
        max_subdivisions: 4000,
    };
    let mut breaks: Vec<f64> = [-8.0, -3.0, 0.0, 3.0, 8.0]
        .iter()
        .map(|k| centre + k * width)
        .filter(|&x| x > 0.0 && x < upper)
        .collect();
    // Geometric panels past the peak follow slow algebraic decay.
    let mut x = centre + 16.0 * width;
    while x < upper {
        breaks.push(x);
        x = centre + 2.0 * (x - centre);
    }
    breaks.sort_by(f64::total_cmp);
    let smooth = |x: f64| (-x + c * (x / z).ln_1p() - reference).exp();

    let value = if a < 1.0 {
        // Integrable singularity x^{a-1} at the origin.
        let split = breaks.first().copied().unwrap_or(upper).min(1.0).min(upper);
        let head = endpoint_power_integral(smooth, split, a, &[], &opts)?;
        let mut pts = vec![split];
        pts.extend(breaks.iter().copied().filter(|&x| x > split));
        pts.push(upper);
        let tail = try_integrate(|x| Ok((phi(x) - reference).exp()), &pts, &opts)?;
        head + tail.value
    } else {
        let mut pts = vec![0.0];
        pts.extend(breaks);
        pts.push(upper);
        try_integrate(
            |x| {
                Ok(if x > 0.0 {
                    (phi(x) - reference).exp()
                } else {
                    0.0
                })
            },
            &pts,
            &opts,
        )?
        .value
    };
    if !(value > 0.0) {
        return Err(domain(
            "tricomi_u",
            format!("integral underflowed at a = {a}, b = {b}, z = {z}"),
        ));
    }
    Ok(value.ln() + reference - lg)
}

/// ln U(a; b; z) for a > 0, z > 0.
pub fn ln_tricomi_u(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    Ok(ln_scaled_u_integral(a, b, z, policy)? - a * z.ln())
}

/// Tricomi's confluent hypergeometric function U(a; b; z) for a > 0, z > 0,
/// from the integral representation
/// U(a; b; z) = (1/Γ(a)) ∫₀^∞ e^{−zt} t^{a−1} (1+t)^{b−a−1} dt.
pub fn tricomi_u(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    Ok(ln_tricomi_u(a, b, z, policy)?.exp())
}

/// z^a U(a; b; z), which stays O(1) when a and z are large.
pub fn tricomi_u_scaled(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    Ok(ln_scaled_u_integral(a, b, z, policy)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> AccuracyPolicy {
        AccuracyPolicy::new(1e-15, 10_000).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn kummer_trivial_values() {
        assert_eq!(kummer_1f1(2.0, 3.0, 0.0, &pol()).unwrap(), 1.0);
        assert!(rel(kummer_1f1(1.0, 1.0, 2.5, &pol()).unwrap(), 2.5f64.exp()) < 1e-14);
        assert!(kummer_1f1(1.0, -2.0, 1.0, &pol()).is_err());
        assert!(kummer_1f1(1.0, 0.0, 1.0, &pol()).is_err());
    }

    #[test]
    fn gauss_trivial_values() {
        assert_eq!(gauss_2f1(1.0, 2.0, 3.0, 0.0, &pol()).unwrap(), 1.0);
        let v = gauss_2f1(1.0, 1.0, 2.0, 0.5, &pol()).unwrap();
        assert!(rel(v, 2.0 * 2f64.ln()) < 1e-14);
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.0, &pol()).is_err());
        assert!(gauss_2f1(1.0, 1.0, -1.0, 0.2, &pol()).is_err());
        // ₂F₁(1,1;2;z) = −ln(1−z)/z holds on every route.
        for z in [-30.0, -3.0, -0.7, 0.3, 0.75, 0.95, 0.999] {
            let v = gauss_2f1(1.0, 1.0, 2.0, z, &pol()).unwrap();
            let exact = -(-z).ln_1p() / z;
            assert!(rel(v, exact) < 1e-11, "z = {z}: {v} vs {exact}");
        }
    }

    #[test]
    fn hyp_2f2_reduces_to_exponential() {
        assert_eq!(hyp_2f2(1.0, 2.0, 3.0, 4.0, 0.0, &pol()).unwrap(), 1.0);
        let v = hyp_2f2(1.3, 2.2, 1.3, 2.2, 1.7, &pol()).unwrap();
        assert!(rel(v, 1.7f64.exp()) < 1e-14);
        assert!(hyp_2f2(1.0, 1.0, -1.0, 2.0, 1.0, &pol()).is_err());
    }

    #[test]
    fn tricomi_trivial_values() {
        let v = tricomi_u(1.0, 1.0, 1.0, &pol()).unwrap();
        assert!(rel(v, 0.596_347_362_323_194_1) < 1e-10, "{v}");
        for (a, z) in [(0.4, 0.3), (1.0, 2.0), (2.5, 1.2), (7.0, 30.0), (40.0, 0.5)] {
            let v = tricomi_u(a, a + 1.0, z, &pol()).unwrap();
            assert!(rel(v, z.powf(-a)) < 1e-10, "a = {a}, z = {z}");
        }
        assert!(tricomi_u(0.0, 1.0, 1.0, &pol()).is_err());
        assert!(tricomi_u(1.0, 1.0, 0.0, &pol()).is_err());
    }
}
