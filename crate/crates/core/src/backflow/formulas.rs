//! Closed-form trace distances and their time derivatives for the probe pair
//! `|0⟩`, `a|0⟩ + √(1−a²)|1⟩`.
//!
//! The full-time derivatives are evaluated in `x = e^{−2t}` after dividing
//! numerator and denominator by their leading power of `e^{2t}`, so they stay
//! finite for any `t ≥ 0`. The `*_bracket` and `*_prefactor` helpers keep the
//! `e^{2t}` form; their product is the derivative, and the prefactor is
//! positive, so the bracket alone decides the sign.

fn b_of(a: f64) -> f64 {
    (1.0 - a * a).max(0.0).sqrt()
}

/// Trace distance of the probe pair after the bare channel `φ_t`.
pub fn bare_distance(a: f64, t: f64) -> f64 {
    let x = (-2.0 * t).exp();
    let a2 = a * a;
    0.5 * ((1.0 - a2) * (a2 + 2.0 * a2 * x + (4.0 - 3.0 * a2) * x * x)).max(0.0).sqrt()
}

/// `d/dt` of [`bare_distance`].
pub fn bare_ddt(a: f64, t: f64) -> f64 {
    let x = (-2.0 * t).exp();
    let a2 = a * a;
    let root = (a2 + 2.0 * a2 * x + (4.0 - 3.0 * a2) * x * x).sqrt();
    b_of(a) * x * (3.0 * a2 * x - a2 - 4.0 * x) / root
}

/// `(p+2)(p e^{2t} − p − 4) − a²(p+1)(p e^{2t} + 2e^{2t} − p − 6)`.
pub fn path_bracket(a: f64, p: f64, t: f64) -> f64 {
    let e = (2.0 * t).exp();
    (p + 2.0) * (p * e - p - 4.0) - a * a * (p + 1.0) * (p * e + 2.0 * e - p - 6.0)
}

/// Positive factor multiplying [`path_bracket`].
pub fn path_prefactor(a: f64, p: f64, t: f64) -> f64 {
    let e = (2.0 * t).exp();
    let den = p * e + 4.0 * e - p;
    let rad = 4.0 * a * a * (p + 1.0) * (2.0 * e + e * e - 3.0) + (p * e - p - 4.0).powi(2);
    16.0 * b_of(a) * e / (den * den * rad.sqrt())
}

/// `d/dt` of the probe-pair trace distance under path control with control
/// purity `p` and the `+` outcome post-selected.
pub fn analytic_ddt_path(a: f64, p: f64, t: f64) -> f64 {
    let x = (-2.0 * t).exp();
    let a2 = a * a;
    let lead = (p + 2.0) * (p - a2 * (p + 1.0));
    let tail = a2 * (p + 1.0) * (p + 6.0) - (p + 2.0) * (p + 4.0);
    let den = 4.0 + p - p * x;
    let rad = 4.0 * a2 * (p + 1.0) * (1.0 + 2.0 * x - 3.0 * x * x) + (p - (p + 4.0) * x).powi(2);
    16.0 * b_of(a) * x * (lead + tail * x) / (den * den * rad.sqrt())
}

/// [`path_bracket`] at `p = 1`: `14a² − 15 − 3(2a² − 1)e^{2t}`.
pub fn path_bracket_maximal(a: f64, t: f64) -> f64 {
    let a2 = a * a;
    14.0 * a2 - 15.0 - 3.0 * (2.0 * a2 - 1.0) * (2.0 * t).exp()
}

/// [`path_prefactor`] at `p = 1`.
pub fn path_prefactor_maximal(a: f64, t: f64) -> f64 {
    let e = (2.0 * t).exp();
    let rad = 8.0 * a * a * (e * e + 2.0 * e - 3.0) + (e - 5.0).powi(2);
    16.0 * b_of(a) * e / ((5.0 * e - 1.0).powi(2) * rad.sqrt())
}

/// Coefficients `[A₁, …, A₅]` of the switch derivative polynomial
/// `A₁e^{8t} + A₂e^{6t} + A₃e^{4t} + A₄e^{2t} + A₅`.
pub fn switch_poly_coefficients(a: f64, p: f64) -> [f64; 5] {
    let a2 = a * a;
    [
        2.0 * p * p - a2 * (3.0 * p + 2.0),
        -2.0 * (a2 * (p + 1.0) * (4.0 * p + 3.0) - 4.0 * p),
        6.0 * (a2 * (2.0 * p * p + 2.0 * p - 1.0) - 2.0 * p * (p + 2.0)),
        2.0 * a2 * (4.0 * p * p + 15.0 * p + 15.0) - 8.0 * (p * (2.0 * p + 5.0) + 4.0),
        p * (a2 * (4.0 * p + 7.0) - 6.0 * p - 8.0),
    ]
}

/// The switch derivative polynomial, in the `e^{2t}` form.
pub fn switch_bracket(a: f64, p: f64, t: f64) -> f64 {
    let e = (2.0 * t).exp();
    switch_poly_coefficients(a, p).iter().fold(0.0, |acc, c| acc * e + c)
}

/// Positive factor multiplying [`switch_bracket`].
pub fn switch_prefactor(a: f64, p: f64, t: f64) -> f64 {
    let e = (2.0 * t).exp();
    let den = 2.0 * p * e + (3.0 * p + 4.0) * e * e - p;
    let rad = a * a * (p + 1.0) * (3.0 * e + e * e + e * e * e - 5.0) * (3.0 * p * e + e + p + 3.0)
        + (p * (e - 3.0) * (e + 1.0) - 4.0).powi(2);
    8.0 * b_of(a) * (p + 1.0) * e / (den * den * rad.sqrt())
}

/// `d/dt` of the probe-pair trace distance under the switch with control
/// purity `p` and the `+` outcome post-selected.
pub fn analytic_ddt_switch(a: f64, p: f64, t: f64) -> f64 {
    let x = (-2.0 * t).exp();
    let a2 = a * a;
    let poly = switch_poly_coefficients(a, p).iter().rev().fold(0.0, |acc, c| acc * x + c);
    let den = (4.0 + 3.0 * p) + 2.0 * p * x - p * x * x;
    let rad = a2 * (p + 1.0) * (1.0 + x + 3.0 * x * x - 5.0 * x * x * x) * ((3.0 * p + 1.0) + (p + 3.0) * x)
        + (p * (1.0 - 2.0 * x - 3.0 * x * x) - 4.0 * x * x).powi(2);
    8.0 * b_of(a) * (p + 1.0) * x * poly / (den * den * rad.sqrt())
}

/// Switch bracket at `p = 1`: `8(1 − a²) sinh 2t − (2 − a²)(3 cosh 2t + 1)`.
///
/// At `p = 1` the polynomial factors as
/// `2e^{2t}(e^{4t} + 6e^{2t} + 1) × switch_bracket_maximal`.
pub fn switch_bracket_maximal(a: f64, t: f64) -> f64 {
    let a2 = a * a;
    8.0 * (1.0 - a2) * (2.0 * t).sinh() - (2.0 - a2) * (3.0 * (2.0 * t).cosh() + 1.0)
}

/// Positive factor multiplying [`switch_bracket_maximal`].
pub fn switch_prefactor_maximal(a: f64, t: f64) -> f64 {
    let a2 = a * a;
    let (c2, s2, c4, s4) = ((2.0 * t).cosh(), (2.0 * t).sinh(), (4.0 * t).cosh(), (4.0 * t).sinh());
    let rad = 16.0 * a2 - 5.0 + 12.0 * c2 - 16.0 * (1.0 - a2) * s2 - (16.0 * a2 - 25.0) * c4 - 24.0 * (1.0 - a2) * s4;
    let den = 2.0 * (2.0 * t).exp() + 7.0 * (4.0 * t).exp() - 1.0;
    32.0 * std::f64::consts::SQRT_2 * b_of(a) * (4.0 * t).exp() * (c2 + 3.0) / (den * den * rad.sqrt())
}

/// Path bracket in the limit `t → 0⁺`: `4a²(1+p) − 4(2+p)`.
pub fn path_bracket_small_time(a: f64, p: f64) -> f64 {
    4.0 * a * a * (1.0 + p) - 4.0 * (2.0 + p)
}

/// Switch polynomial in the limit `t → 0⁺`: `16(a² − 2)(1 + p)²`.
pub fn switch_bracket_small_time(a: f64, p: f64) -> f64 {
    16.0 * (a * a - 2.0) * (1.0 + p) * (1.0 + p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    /// `e^{2t}`-form of the bare derivative, as a second route.
    fn bare_ddt_direct(a: f64, t: f64) -> f64 {
        let a2 = a * a;
        let e = (2.0 * t).exp();
        (1.0 - a2).sqrt() * (-2.0 * t).exp() * (3.0 * a2 - a2 * e - 4.0)
            / (4.0 + 2.0 * a2 * e + a2 * e * e - 3.0 * a2).sqrt()
    }

    #[test]
    fn bare_distance_at_zero() {
        for a in [0.1, 0.65, 0.99] {
            assert!((bare_distance(a, 0.0) - (1.0 - a * a).sqrt()).abs() < 1e-15);
        }
        assert!((bare_distance(0.65, 0.0) - 0.75993).abs() < 1e-5);
    }

    #[test]
    fn identical_probes_never_separate() {
        for t in [0.0, 0.5, 3.0] {
            assert_eq!(bare_distance(1.0, t), 0.0);
            assert_eq!(bare_ddt(1.0, t), 0.0);
        }
    }

    #[test]
    fn x_forms_match_e_forms() {
        for a in [0.2, 0.5, 0.8] {
            for p in [0.0, 0.4, 1.0] {
                for t in [0.05, 0.7, 2.0, 4.0] {
                    let d = bare_ddt(a, t) - bare_ddt_direct(a, t);
                    assert!(d.abs() < 1e-13, "bare {a} {t}");
                    let path = path_prefactor(a, p, t) * path_bracket(a, p, t);
                    assert!((analytic_ddt_path(a, p, t) - path).abs() < 1e-13 * (1.0 + path.abs()));
                    let sw = switch_prefactor(a, p, t) * switch_bracket(a, p, t);
                    assert!((analytic_ddt_switch(a, p, t) - sw).abs() < 1e-13 * (1.0 + sw.abs()));
                }
            }
        }
    }

    #[test]
    fn bare_derivative_matches_finite_difference() {
        for (a, t) in [(0.3, 1.0), (0.65, 0.5), (0.9, 2.0)] {
            let fd = central(|s| bare_distance(a, s), t, 1e-4);
            assert!((bare_ddt(a, t) - fd).abs() < 1e-6);
        }
        assert!(bare_ddt(0.65, 0.5) < 0.0);
    }

    #[test]
    fn p_one_reductions() {
        for a in [0.2, 0.65, 0.9] {
            for t in [0.1, 1.0, 3.0] {
                assert!((path_bracket(a, 1.0, t) - path_bracket_maximal(a, t)).abs() < 1e-10);
                let rel = path_prefactor(a, 1.0, t) / path_prefactor_maximal(a, t) - 1.0;
                assert!(rel.abs() < 1e-12);
                let e = (2.0 * t).exp();
                let factored = 2.0 * e * (e * e + 6.0 * e + 1.0) * switch_bracket_maximal(a, t);
                let poly = switch_bracket(a, 1.0, t);
                assert!((poly - factored).abs() < 1e-10 * (1.0 + poly.abs()));
                let whole = switch_prefactor_maximal(a, t) * switch_bracket_maximal(a, t);
                let ddt = analytic_ddt_switch(a, 1.0, t);
                assert!((whole - ddt).abs() < 1e-12 * (1.0 + ddt.abs()));
            }
        }
    }

    #[test]
    fn small_time_brackets_agree_with_limits() {
        for a in [0.3, 0.9] {
            for p in [0.0, 0.5, 1.0] {
                assert!((path_bracket(a, p, 0.0) - path_bracket_small_time(a, p)).abs() < 1e-12);
                assert!((switch_bracket(a, p, 0.0) - switch_bracket_small_time(a, p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_overflow_at_large_times() {
        for t in [50.0, 200.0, 1000.0] {
            for f in [analytic_ddt_path(0.5, 0.7, t), analytic_ddt_switch(0.5, 0.7, t), bare_ddt(0.5, t)] {
                assert!(f.is_finite());
            }
        }
    }
}
