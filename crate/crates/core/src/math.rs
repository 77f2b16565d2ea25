//! Scalar helpers shared by the raters and the fitting code.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Predictions are clamped to `[PROB_EPS, 1 - PROB_EPS]` before a log is taken.
pub const PROB_EPS: f64 = 1e-12;

/// Display scale for Elo-type scores (`400 / ln 10`).
pub const ELO_DISPLAY_SCALE: f64 = 400.0 / std::f64::consts::LN_10;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Cross-entropy of outcome `o` against a probability `p`, with `p` clamped.
#[inline]
pub fn cross_entropy(o: f64, p: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(o * p.ln() + (1.0 - o) * (1.0 - p).ln())
}

/// Cross-entropy written in terms of the logit `z`; exact for any `z`.
#[inline]
pub fn logit_cross_entropy(o: f64, z: f64) -> f64 {
    o * softplus(-z) + (1.0 - o) * softplus(z)
}

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Mills-ratio style `φ(x)/Φ(x)`, stable for very negative `x`.
pub fn pdf_over_cdf(x: f64) -> f64 {
    let cdf = normal_cdf(x);
    if cdf > 1e-300 {
        normal_pdf(x) / cdf
    } else {
        // asymptotic expansion of φ/Φ for x → -∞
        let x2 = x * x;
        -x / (1.0 - 1.0 / x2 + 3.0 / (x2 * x2))
    }
}

/// Inverse of the logistic function.
#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_known_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(3f64.ln()) - 0.75).abs() < 1e-15);
        assert!((sigmoid(-3f64.ln()) - 0.25).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn normal_cdf_reference_values() {
        // reference values from high precision tables
        let cases = [
            (0.0, 0.5),
            (1.0, 0.841_344_746_068_542_9),
            (-1.0, 0.158_655_253_931_457_05),
            (2.5, 0.993_790_334_674_223_7),
            (-5.0, 2.866_515_718_791_939e-7),
        ];
        for (x, want) in cases {
            assert!((normal_cdf(x) - want).abs() < 1e-12, "Φ({x})");
        }
    }

    #[test]
    fn mills_ratio_at_zero_and_tail() {
        assert!((pdf_over_cdf(0.0) - (2.0 / PI).sqrt()).abs() < 1e-12);
        let v = pdf_over_cdf(-40.0);
        assert!(v > 39.9 && v < 40.1);
        // continuity across the switch-over region
        let a = pdf_over_cdf(-37.0);
        assert!(a.is_finite() && (a - 37.027).abs() < 0.01);
    }

    #[test]
    fn logit_loss_matches_probability_loss() {
        for &z in &[-3.0, -0.2, 0.0, 1.7, 5.0] {
            for &o in &[0.0, 0.3, 1.0] {
                let a = logit_cross_entropy(o, z);
                let b = cross_entropy(o, sigmoid(z));
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
