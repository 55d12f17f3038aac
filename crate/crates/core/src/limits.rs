//! Closed forms of the limiting objects.
//!
//! Conventions: `y` is a label fraction, `x` and `u` are position
//! fractions, `s` is time divided by `n`. Points of the configuration
//! measure `κ_s` are `(position, label)`. Piecewise definitions take the
//! left-closed branch at their boundaries; every quantity is continuous
//! there, which the tests check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const SUPPORT_TOL: f64 = 1e-9;

/// Rost's density profile `h(x) = 1 ∧ (1 - x)/2 ∨ 0`.
pub fn rost_profile(x: f64) -> f64 {
    ((1.0 - x) / 2.0).clamp(0.0, 1.0)
}

/// `L_y⁻(s) = y + s - 2√(sy)`.
pub fn lower_envelope(y: f64, s: f64) -> f64 {
    y + s - 2.0 * (s * y).sqrt()
}

/// `L_y⁺(s) = y - s + 2√(s(1-y))`.
pub fn upper_envelope(y: f64, s: f64) -> f64 {
    y - s + 2.0 * (s * (1.0 - y)).sqrt()
}

/// `γ_y = 1 + 2√(y(1-y))`, the scaled finishing time of label `yn`.
pub fn gamma(y: f64) -> f64 {
    1.0 + 2.0 * (y * (1.0 - y)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    pub lower: f64,
    pub upper: f64,
    pub gamma: f64,
}

pub fn envelopes(y: f64, s: f64) -> Envelopes {
    Envelopes { lower: lower_envelope(y, s), upper: upper_envelope(y, s), gamma: gamma(y) }
}

/// The limiting trajectory of label `y` for initial speed `u ∈ [-1, 1]`.
pub fn phi(y: f64, s: f64, u: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&u) {
        return invalid(format!("speed {u} outside [-1, 1]"));
    }
    Ok(phi_unchecked(y, s, u))
}

fn phi_unchecked(y: f64, s: f64, u: f64) -> f64 {
    if s >= gamma(y) {
        1.0 - y
    } else {
        (y + u * s).max(lower_envelope(y, s)).min(upper_envelope(y, s))
    }
}

/// CDF at `v` of `φ_y(s)` with `U` uniform on `[-1, 1]`.
pub fn phi_cdf(y: f64, s: f64, v: f64) -> f64 {
    if s >= gamma(y) || s == 0.0 {
        let at = if s == 0.0 { y } else { 1.0 - y };
        return if v >= at { 1.0 } else { 0.0 };
    }
    if v < lower_envelope(y, s) {
        0.0
    } else if v >= upper_envelope(y, s) {
        1.0
    } else {
        (((v - y) / s + 1.0) / 2.0).clamp(0.0, 1.0)
    }
}

/// `(Λ_y⁻(s), Λ_y⁺(s))`.
pub fn lambda(y: f64, s: f64) -> (f64, f64) {
    let minus = if s < y { 0.0 } else { lower_envelope(y, s) };
    let plus = if s < 1.0 - y { 1.0 } else { upper_envelope(y, s) };
    (minus, plus)
}

/// Density at position `x` of labels `<= yn` at time `sn`.
pub fn density_f(s: f64, x: f64, y: f64) -> f64 {
    let (lm, lp) = (lower_envelope(y, s), upper_envelope(y, s));
    if s > 0.0 && x > (y - s).max(lm) && x < (y + s).min(lp) {
        (s + y - x) / (2.0 * s)
    } else if 0.0 < x && x < y - s {
        1.0
    } else if y + s < x && x < 1.0 {
        0.0
    } else if s > 1.0 - y && x > (1.0 - y).max(lp) && x < 1.0 {
        1.0
    } else {
        0.0
    }
}

/// Kinks of [`density_f`] in `x`.
pub fn density_breaks(s: f64, y: f64) -> [f64; 5] {
    [y - s, y + s, lower_envelope(y, s), upper_envelope(y, s), 1.0 - y]
}

/// Fraction of labels `<= yn` at positions `> un`.
pub fn cumulative_f(s: f64, u: f64, y: f64) -> f64 {
    if u <= 0.0 {
        return y;
    }
    if u >= 1.0 {
        return 0.0;
    }
    if y > 0.5 {
        // relabel k -> n+1-k together with positions x -> n+1-x
        return y - u + cumulative_table(s, 1.0 - u, 1.0 - y);
    }
    cumulative_table(s, u, y)
}

fn cumulative_table(s: f64, u: f64, y: f64) -> f64 {
    let fan = |u: f64| (s + y - u).powi(2) / (4.0 * s);
    let (lm, lp) = (lower_envelope(y, s), upper_envelope(y, s));
    if s <= y {
        if u <= y - s {
            y - u
        } else if u <= y + s {
            fan(u)
        } else {
            0.0
        }
    } else if s <= 1.0 - y {
        if u <= lm {
            y
        } else if u <= y + s {
            fan(u)
        } else {
            0.0
        }
    } else if s <= gamma(y) {
        if u <= lm {
            y
        } else if u <= lp {
            fan(u)
        } else {
            1.0 - u
        }
    } else if u <= 1.0 - y {
        y
    } else {
        1.0 - u
    }
}

/// `κ_s([0, x] × [0, y])`: positions `<= x` holding labels `<= y`.
pub fn kappa_cdf(s: f64, x: f64, y: f64) -> f64 {
    let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
    (y - cumulative_f(s, x, y)).max(0.0)
}

/// A `(position, label)` point with law `κ_s`.
pub fn kappa_sample<R: Rng + ?Sized>(s: f64, rng: &mut R) -> (f64, f64) {
    let y: f64 = rng.random();
    let u: f64 = rng.random_range(-1.0..=1.0);
    (phi_unchecked(y, s, u), y)
}

/// Whether `(x, y)` lies in the support of `κ_s`.
pub fn in_kappa_support(s: f64, x: f64, y: f64) -> bool {
    if !(0.0..=1.0).contains(&y) || !(-SUPPORT_TOL..=1.0 + SUPPORT_TOL).contains(&x) {
        return false;
    }
    if s >= gamma(y) {
        return (x - (1.0 - y)).abs() <= SUPPORT_TOL;
    }
    let lo = lower_envelope(y, s).max(y - s);
    let hi = upper_envelope(y, s).min(y + s);
    x >= lo - SUPPORT_TOL && x <= hi + SUPPORT_TOL
}

/// `(W_s⁻, W_s⁺)`, the labels that finish exactly at time `sn`.
pub fn w_pm(s: f64) -> Result<(f64, f64)> {
    if !(s > 1.0 && s <= 2.0) {
        return invalid(format!("W± needs 1 < s <= 2, got {s}"));
    }
    let r = (2.0 * s - s * s).sqrt();
    Ok(((1.0 - r) / 2.0, (1.0 + r) / 2.0))
}

/// `κ_s` mass of points strictly right of and below `(x, y)`.
pub fn southeast_prob(s: f64, x: f64, y: f64) -> Result<f64> {
    if !(s > 0.0) || !in_kappa_support(s, x, y) {
        return invalid(format!("({x}, {y}) is not in the support of κ_{s}"));
    }
    if s > 1.0 {
        let (lo, hi) = if s <= 2.0 { w_pm(s)? } else { (0.5, 0.5) };
        if y < lo || y > hi {
            return Ok(y);
        }
    }
    Ok((y - x + s).powi(2) / (4.0 * s))
}

/// Limit of the inversion count at time `sn` divided by `C(n, 2)`.
pub fn inversion_limit(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s <= 1.0 {
        inversion_small(s)
    } else if s <= 2.0 {
        inversion_large(s)
    } else {
        1.0
    }
}

/// The `s <= 1` branch of [`inversion_limit`], valid as a formula anywhere.
pub fn inversion_small(s: f64) -> f64 {
    2.0 / 3.0 * s - s * s / 15.0
}

/// The `1 <= s <= 2` branch of [`inversion_limit`].
pub fn inversion_large(s: f64) -> f64 {
    1.0 - 2.0 / 15.0 * s.powf(-0.5) * (2.0 - s).powf(1.5) * (2.0 * s + 1.0)
}

/// `ψ_y(s) = ∫_1^∞ h((x-y)/s) dx`: labels `<= yn` that would lie beyond `n`.
pub fn psi(y: f64, s: f64) -> f64 {
    if s <= 0.0 || y + s <= 1.0 {
        0.0
    } else if y - s >= 1.0 {
        y - 1.0
    } else {
        (s + y - 1.0).powi(2) / (4.0 * s)
    }
}

/// Density profile of the `yn` rightmost particles of the step started at `yn`.
pub fn z_profile(y: f64, s: f64, x: f64) -> f64 {
    if x < lambda(y, s).0 {
        0.0
    } else {
        rost_profile((x - y) / s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwScaling {
    pub center: f64,
    pub scale: f64,
}

/// Centering `γ_y n` and fluctuation scale `γ_y^{2/3} (y(1-y))^{-1/6} n^{1/3}`.
pub fn tw_scaling(y: f64, n: f64) -> Result<TwScaling> {
    if !(y > 0.0 && y < 1.0) {
        return invalid(format!("fluctuation scaling needs 0 < y < 1, got {y}"));
    }
    if !(n > 0.0) {
        return invalid("fluctuation scaling needs n > 0");
    }
    let g = gamma(y);
    Ok(TwScaling { center: g * n, scale: g.powf(2.0 / 3.0) * (y * (1.0 - y)).powf(-1.0 / 6.0) * n.cbrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    /// `min(∫_u^∞ h((x-y)/s) dx, y, (1-u)⁺)` with the integral in closed form.
    fn oracle_f(s: f64, u: f64, y: f64) -> f64 {
        let g = if u <= y - s {
            y - u
        } else if u >= y + s {
            0.0
        } else {
            (s + y - u).powi(2) / (4.0 * s)
        };
        g.min(y).min((1.0 - u).max(0.0))
    }

    #[test]
    fn rost_values() {
        assert_eq!(rost_profile(-2.0), 1.0);
        assert_eq!(rost_profile(0.0), 0.5);
        assert_eq!(rost_profile(3.0), 0.0);
    }

    #[test]
    fn envelope_values() {
        assert_eq!(gamma(0.5), 2.0);
        close(lower_envelope(0.25, 1.0), 0.25, 1e-15);
        close(upper_envelope(0.25, 1.0), -0.75 + 3f64.sqrt(), 1e-15);
        close(lower_envelope(0.0, 0.7), 0.7, 1e-15);
        assert_eq!(gamma(0.0), 1.0);
    }

    #[test]
    fn phi_values() {
        for y in [0.1, 0.3, 0.5, 0.9] {
            assert_eq!(phi(y, gamma(y) + 0.01, 0.3).unwrap(), 1.0 - y);
        }
        close(phi(0.25, 0.5, 1.0).unwrap(), 0.75, 1e-15);
        close(phi(0.25, 0.5, -1.0).unwrap(), 0.75 - 2.0 * 0.125f64.sqrt(), 1e-15);
        assert!(phi(0.25, 0.5, 1.5).is_err());
    }

    #[test]
    fn phi_continuous_at_gamma() {
        for y in [0.05, 0.3, 0.5, 0.77] {
            let g = gamma(y);
            for u in [-1.0, -0.4, 0.0, 0.6, 1.0] {
                close(phi(y, g - 1e-10, u).unwrap(), 1.0 - y, 1e-4);
            }
        }
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda(0.3, 0.2).0, 0.0);
        assert_eq!(lambda(0.3, 0.5).1, 1.0);
        for y in [0.1, 0.3, 0.5, 0.8] {
            let (m, p) = lambda(y, gamma(y));
            close(m, 1.0 - y, 1e-12);
            close(p, 1.0 - y, 1e-12);
            let (m, p) = lambda(y, 0.5 * gamma(y));
            assert!(m <= p);
            let (m, p) = lambda(y, gamma(y) + 0.05);
            assert!(m > p);
        }
    }

    #[test]
    fn f_values() {
        for s in [0.1, 0.5, 1.0, 1.7, 3.0] {
            for y in [0.0, 0.2, 0.5, 0.8, 1.0] {
                close(cumulative_f(s, 0.0, y), y, 1e-15);
            }
        }
        assert_eq!(density_f(0.1, 0.05, 0.3), 1.0);
        close(psi(0.5, 2.0), 0.28125, 1e-15);
        close(cumulative_f(2.0, 1.0 - 1e-12, 0.5), 0.0, 1e-9);
    }

    #[test]
    fn cumulative_matches_truncated_integral() {
        for si in 1..=30 {
            let s = si as f64 * 0.1;
            for yi in 0..=20 {
                let y = yi as f64 / 20.0;
                for ui in 0..=40 {
                    let u = ui as f64 / 40.0;
                    close(cumulative_f(s, u, y), oracle_f(s, u, y), 1e-12);
                }
            }
        }
    }

    #[test]
    fn cumulative_is_integral_of_density() {
        for s in [0.2, 0.45, 0.9, 1.3, 1.9, 2.5] {
            for y in [0.1, 0.35, 0.5, 0.65, 0.9] {
                for ui in 0..=20 {
                    let u = ui as f64 / 20.0;
                    let v = integrate(|x| density_f(s, x, y), u, 1.0, &density_breaks(s, y), 1e-12);
                    close(v, cumulative_f(s, u, y), 1e-9);
                }
            }
        }
    }

    #[test]
    fn kappa_examples() {
        close(kappa_cdf(0.7, 1.0, 1.0), 1.0, 1e-15);
        for s in [2.0, 2.5] {
            for xi in 0..=10 {
                for yi in 0..=10 {
                    let (x, y) = (xi as f64 / 10.0, yi as f64 / 10.0);
                    close(kappa_cdf(s, x, y), (x + y - 1.0).max(0.0), 1e-12);
                }
            }
        }
    }

    #[test]
    fn kappa_symmetries() {
        for s in [0.3, 0.8, 1.0, 1.4, 1.9] {
            for xi in 0..=20 {
                for yi in 0..=20 {
                    let (x, y) = (xi as f64 / 20.0, yi as f64 / 20.0);
                    let c = kappa_cdf(s, x, y);
                    close(c, kappa_cdf(s, y, x), 1e-12);
                    // mass of [x,1]×[y,1] computed two ways
                    let upper = 1.0 - x - y + c;
                    close(upper, kappa_cdf(s, 1.0 - x, 1.0 - y), 1e-12);
                }
            }
        }
    }

    #[test]
    fn w_values() {
        let (a, b) = w_pm(2.0).unwrap();
        assert_eq!((a, b), (0.5, 0.5));
        let (a, b) = w_pm(1.0 + 1e-12).unwrap();
        close(a, 0.0, 1e-5);
        close(b, 1.0, 1e-5);
        let (a, _) = w_pm(1.5).unwrap();
        close(a, 0.066987, 1e-6);
        close(gamma(a), 1.5, 1e-12);
        assert!(w_pm(1.0).is_err());
        assert!(w_pm(2.1).is_err());
    }

    #[test]
    fn southeast_examples() {
        close(southeast_prob(0.5, 0.3, 0.3).unwrap(), 0.125, 1e-15);
        let (wm, _) = w_pm(1.5).unwrap();
        let y0 = 0.5 * wm;
        close(southeast_prob(1.5, 1.0 - y0, y0).unwrap(), y0, 1e-15);
        assert!(southeast_prob(0.5, 0.9, 0.1).is_err());
    }

    #[test]
    fn southeast_equals_cumulative_on_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for s in [0.3, 0.9, 1.2, 1.7] {
            for _ in 0..2000 {
                let (x, y) = kappa_sample(s, &mut rng);
                close(southeast_prob(s, x, y).unwrap(), cumulative_f(s, x, y), 1e-9);
            }
        }
    }

    #[test]
    fn inversion_values() {
        close(inversion_small(1.0), 0.6, 1e-12);
        close(inversion_large(1.0), 0.6, 1e-12);
        close(inversion_limit(0.5), 19.0 / 60.0, 1e-15);
        assert_eq!(inversion_limit(2.0), 1.0);
        assert_eq!(inversion_limit(3.0), 1.0);
    }

    #[test]
    fn phi_law_matches_sampler() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (y, s) = (0.3, 0.8);
        let m = 200_000;
        let samples: Vec<f64> = (0..m).map(|_| phi(y, s, rng.random_range(-1.0..=1.0)).unwrap()).collect();
        for v in [0.1, 0.2, 0.4, 0.6, 0.9] {
            let emp = samples.iter().filter(|&&x| x <= v).count() as f64 / m as f64;
            close(emp, phi_cdf(y, s, v), 0.005);
        }
    }

    #[test]
    fn z_profile_mass() {
        for y in [0.2, 0.5, 0.7] {
            for s in [0.1, 0.5, 1.0, 1.6] {
                let lm = lambda(y, s).0;
                let v = integrate(|x| z_profile(y, s, x), lm, y + s + 1.0, &[lm, y - s, y + s], 1e-12);
                close(v, y, 1e-9);
            }
        }
    }

    #[test]
    fn tw_scaling_values() {
        let t = tw_scaling(0.5, 1000.0).unwrap();
        close(t.center, 2000.0, 1e-9);
        close(t.scale, 20.0, 1e-9);
        assert!(tw_scaling(0.0, 10.0).is_err());
        assert!(tw_scaling(1.0, 10.0).is_err());
        close(tw_scaling(0.2, 500.0).unwrap().scale, tw_scaling(0.8, 500.0).unwrap().scale, 1e-12);
    }
}
