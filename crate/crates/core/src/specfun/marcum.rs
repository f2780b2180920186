//! Generalized Marcum Q function of integer order.

use crate::error::{domain, Error, Result};

use super::gamma::{ln_gamma_kernel, regularized_gamma_pq};
use super::AccuracyPolicy;

/// Generalized Marcum Q function Q_u(a, b) for integer order u ≥ 1.
///
/// Uses the Poisson mixture Q_u(a, b) = Σ_k e^{−λ} λ^k / k! · Q(u+k, b²/2)
/// with λ = a²/2, summed outward from the Poisson mode. When a Chernoff bound
/// puts either Q or 1 − Q below e^{−690} that side is returned as zero.
pub fn marcum_q(u: u32, a: f64, b: f64, policy: &AccuracyPolicy) -> Result<f64> {
    Ok(marcum_pq(u, a, b, policy)?.1)
}

/// (1 − Q_u(a, b), Q_u(a, b)), each accurate to the policy's relative
/// tolerance even when the other is close to one.
pub(crate) fn marcum_pq(u: u32, a: f64, b: f64, policy: &AccuracyPolicy) -> Result<(f64, f64)> {
    if u == 0 {
        return Err(domain("marcum_q", "order must be at least 1"));
    }
    if !(a >= 0.0 && b >= 0.0 && a.is_finite()) || b.is_nan() {
        return Err(domain(
            "marcum_q",
            format!("need a, b >= 0, got a = {a}, b = {b}"),
        ));
    }
    if b == 0.0 {
        return Ok((0.0, 1.0));
    }
    if b.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let x = 0.5 * b * b;
    let lambda = 0.5 * a * a;
    let uf = f64::from(u);
    if lambda == 0.0 {
        return regularized_gamma_pq(uf, x);
    }
    // Either side certainly below the smallest normal number: no summation.
    let v = (uf + (uf * uf + a * a * b * b).sqrt()) / (b * b);
    if v > 1.0 {
        let t = 0.5 * (v - 1.0);
        if t * b * b - uf * v.ln() - a * a * t / v < LN_NEGLIGIBLE {
            return Ok((0.0, 1.0));
        }
    } else if v < 1.0 {
        let t = 0.5 * (1.0 - v);
        if -t * b * b - uf * v.ln() + a * a * t / v < LN_NEGLIGIBLE {
            return Ok((1.0, 0.0));
        }
    }
    // The Poisson weights spread over O(√λ) indices.
    let max_terms = policy.max_terms() + (60.0 * lambda.sqrt()) as usize;
    let tol = policy.rel_tol() * 1e-2;
    let k0 = lambda.floor();
    // Poisson weight and gamma-density term x^s e^{−x}/Γ(s+1) at the mode.
    let w0 = (ln_gamma_kernel(k0 + 1.0, lambda) - lambda.ln()).exp();
    let s0 = uf + k0;
    let t0 = (ln_gamma_kernel(s0 + 1.0, x) - x.ln()).exp();
    let (p0, q0) = regularized_gamma_pq(s0, x)?;
    let mut p_sum = w0 * p0;
    let mut q_sum = w0 * q0;
    let mut terms = 1usize;

    // Upward: Q(s+1) = Q(s) + t_s, P(s+1) = P(s) − t_s.
    let (mut w, mut k, mut p, mut q, mut t) = (w0, k0, p0, q0, t0);
    loop {
        w *= lambda / (k + 1.0);
        k += 1.0;
        p = (p - t).max(0.0);
        q = (q + t).min(1.0);
        t *= x / (uf + k);
        p_sum += w * p;
        q_sum += w * q;
        terms += 1;
        let r = lambda / (k + 2.0);
        if r < 1.0 {
            let tail = w * r / (1.0 - r);
            if done(tail, q_sum, tol) && done(tail * p, p_sum, tol) {
                break;
            }
        }
        if terms > max_terms {
            return Err(Error::Convergence {
                func: "marcum_q",
                terms,
            });
        }
    }

    // Downward: t_{s−1} = t_s s/x, P(s−1) = P(s) + t_{s−1}, Q(s−1) = Q(s) − t_{s−1}.
    let (mut w, mut k, mut p, mut q, mut t) = (w0, k0, p0, q0, t0);
    while k > 0.0 {
        w *= k / lambda;
        t *= (uf + k) / x;
        k -= 1.0;
        p = (p + t).min(1.0);
        q = (q - t).max(0.0);
        p_sum += w * p;
        q_sum += w * q;
        terms += 1;
        let r = k / lambda;
        let tail = if r < 1.0 { w * r / (1.0 - r) } else { w * k };
        if done(tail * q, q_sum, tol) && done(tail, p_sum, tol) {
            break;
        }
        if terms > max_terms {
            return Err(Error::Convergence {
                func: "marcum_q",
                terms,
            });
        }
    }
    Ok((p_sum.clamp(0.0, 1.0), q_sum.clamp(0.0, 1.0)))
}

/// ln of the level below which a probability is returned as zero.
const LN_NEGLIGIBLE: f64 = -690.0;

fn done(tail: f64, sum: f64, tol: f64) -> bool {
    tail <= tol * sum || tail < 1e-300
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> AccuracyPolicy {
        AccuracyPolicy::default()
    }

    #[test]
    fn first_order_special_values() {
        // Q_1(0, b) = exp(-b²/2).
        for b in [0.1, 1.0, 3.0, 7.0] {
            let v = marcum_q(1, 0.0, b, &pol()).unwrap();
            assert!(((v - (-0.5 * b * b).exp()) / v).abs() < 1e-13);
        }
        assert_eq!(marcum_q(2, 1.0, 0.0, &pol()).unwrap(), 1.0);
    }

    #[test]
    fn complement_pair_is_consistent() {
        for (u, a, b) in [
            (1, 2.0, 3.0),
            (2, 5.0, 1.0),
            (4, 30.0, 31.0),
            (3, 0.5, 12.0),
        ] {
            let (p, q) = marcum_pq(u, a, b, &pol()).unwrap();
            assert!((p + q - 1.0).abs() < 1e-13, "{u} {a} {b}: {p} + {q}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(marcum_q(0, 1.0, 1.0, &pol()).is_err());
        assert!(marcum_q(1, -1.0, 1.0, &pol()).is_err());
        assert!(marcum_q(1, 1.0, f64::NAN, &pol()).is_err());
    }
}
