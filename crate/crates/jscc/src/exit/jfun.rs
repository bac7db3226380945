//! Mutual-information transfer functions for Gaussian-message analysis.
//!
//! `j_fun` maps the standard deviation of a consistent Gaussian LLR (mean
//! σ²/2, variance σ²) to the mutual information it carries about an
//! equiprobable binary input, via the widely used two-branch closed-form fit;
//! `j_inv` is the matching closed-form inverse. Both saturate at σ = 25, far
//! enough out that 1 − J(σ) underflows f64 before the cap bites — message
//! densities from strong priors or near-perfect checks then behave correctly
//! instead of stalling just below full information.
//!
//! `j_bsc` extends the map to a biased binary source: the observation is a
//! two-component Gaussian LLR mixture shifted by the source prior, and the
//! returned value includes the prior's own information, so it starts at
//! 1 − h₂(p₁) for a zero-information message rather than at 0. That floor is
//! what lets source-side fixed-point iterations ignite without artificial
//! seeding. [`JBscTable`] caches the quadrature on a per-`p1` grid because
//! threshold scans evaluate it millions of times.


/// Saturation point of the closed-form J fit: J(σ) = 1 for σ ≥ this.
pub const SIGMA_SAT: f64 = 25.0;

const LN2: f64 = std::f64::consts::LN_2;

/// 20-point Gauss–Legendre nodes on [0, 1] side of the symmetric rule.
const GL20_X: [f64; 10] = [
    0.076_526_521_133_497_33,
    0.227_785_851_141_645_1,
    0.373_706_088_715_419_56,
    0.510_867_001_950_827_1,
    0.636_053_680_726_515_1,
    0.746_331_906_460_150_8,
    0.839_116_971_822_218_8,
    0.912_234_428_251_326,
    0.963_971_927_277_913_8,
    0.993_128_599_185_094_9,
];
const GL20_W: [f64; 10] = [
    0.152_753_387_130_725_85,
    0.149_172_986_472_603_75,
    0.142_096_109_318_382_05,
    0.131_688_638_449_176_63,
    0.118_194_531_961_518_42,
    0.101_930_119_817_240_44,
    0.083_276_741_576_704_75,
    0.062_672_048_334_109_06,
    0.040_601_429_800_386_94,
    0.017_614_007_139_152_118,
];

/// ln(1 + e^t) computed without overflow for any finite t.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Integrates f against the standard normal density over [-14, 14] with a
/// composite 20-point Gauss–Legendre rule (14 unit-half-width panels).
fn gauss_expect<F: Fn(f64) -> f64>(f: F) -> f64 {
    const HALF_WIDTH: f64 = 1.0;
    const NORM: f64 = 0.398_942_280_401_432_7; // 1/sqrt(2π)
    let mut total = 0.0;
    let mut center = -13.0;
    while center < 14.0 {
        let mut panel = 0.0;
        for k in 0..10 {
            for sign in [-1.0, 1.0] {
                let x = center + sign * HALF_WIDTH * GL20_X[k];
                panel += GL20_W[k] * f(x) * NORM * (-0.5 * x * x).exp();
            }
        }
        total += panel * HALF_WIDTH;
        center += 2.0;
    }
    total
}

/// Mutual information carried by an LLR ~ N(mean, var) about the bit it
/// favors: 1 − E[log2(1 + e^{−ω})]. Handles the degenerate var = 0 case in
/// closed form. Unclamped; callers clamp.
pub(crate) fn gaussian_llr_mi(mean: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return 1.0 - softplus(-mean) / LN2;
    }
    let sd = var.sqrt();
    1.0 - gauss_expect(|x| softplus(-(mean + sd * x)) / LN2)
}

/// Exact-quadrature counterpart of [`j_fun`]: MI of a consistent Gaussian
/// LLR with standard deviation sigma, by numerical integration. Used as the
/// reference the closed-form fit is checked against.
pub fn j_fun_quadrature(sigma: f64) -> f64 {
    assert!(sigma >= 0.0, "sigma must be non-negative, got {sigma}");
    if sigma == 0.0 {
        return 0.0;
    }
    gaussian_llr_mi(sigma * sigma / 2.0, sigma * sigma).clamp(0.0, 1.0)
}

/// MI of a consistent Gaussian LLR (mean σ²/2, variance σ²) about an
/// equiprobable binary input, via the closed-form two-branch fit.
///
/// # Arguments
/// * `sigma` - LLR standard deviation, ≥ 0.
///
/// # Returns
/// MI in [0, 1]; 0 at σ = 0, exactly 1 for σ ≥ 25.
///
/// # Panics
/// On negative `sigma`.
pub fn j_fun(sigma: f64) -> f64 {
    assert!(sigma >= 0.0, "sigma must be non-negative, got {sigma}");
    if sigma >= SIGMA_SAT {
        return 1.0;
    }
    let v = if sigma <= 1.6363 {
        let s2 = sigma * sigma;
        -0.042_106_1 * s2 * sigma + 0.209_252 * s2 - 0.006_400_81 * sigma
    } else {
        1.0 - (0.001_814_91 * sigma * sigma * sigma - 0.142_675 * sigma * sigma
            - 0.082_205_4 * sigma
            + 0.054_960_8)
            .exp()
    };
    v.clamp(0.0, 1.0)
}

/// Inverse of [`j_fun`]: the LLR standard deviation at which a consistent
/// Gaussian message carries MI `mi`, via the matching closed-form fit.
///
/// # Arguments
/// * `mi` - mutual information in [0, 1).
///
/// # Returns
/// σ ≥ 0, capped at 25.
///
/// # Panics
/// If `mi` is outside [0, 1).
pub fn j_inv(mi: f64) -> f64 {
    assert!((0.0..1.0).contains(&mi), "mi must lie in [0,1), got {mi}");
    j_inv_total(mi)
}

/// Total version of [`j_inv`] for internal message updates: clamps the
/// argument into [0, 1] and maps mi = 1 to the saturation σ.
pub(crate) fn j_inv_total(mi: f64) -> f64 {
    let mi = mi.clamp(0.0, 1.0);
    if mi >= 1.0 {
        return SIGMA_SAT;
    }
    if mi <= 0.0 {
        return 0.0;
    }
    let v = if mi <= 0.3646 {
        1.095_42 * mi * mi + 0.214_217 * mi + 2.337_27 * mi.sqrt()
    } else {
        -0.706_692 * (0.386_013 * (1.0 - mi)).ln() + 1.750_17 * mi
    };
    v.min(SIGMA_SAT)
}

/// MI between a Bernoulli source bit with P(1) = `p1` and a Gaussian LLR
/// message of mean `mu` (variance 2·`mu`), including the information carried
/// by the prior itself: the observation is the two-component mixture
/// ω ~ N(μ − Λ, 2μ) with weight p1 and ω ~ N(μ + Λ, 2μ) with weight 1 − p1,
/// where Λ = ln((1−p1)/p1).
///
/// # Arguments
/// * `mu` - mean of the message LLR, ≥ 0.
/// * `p1` - source one-probability in (0, 1), ≠ 0.5.
///
/// # Returns
/// MI in [0, 1]; equals 1 − h₂(p1) at μ = 0 and approaches 1 as μ grows.
///
/// # Panics
/// On domain violations.
pub fn j_bsc(mu: f64, p1: f64) -> f64 {
    assert!(mu >= 0.0, "mu must be non-negative, got {mu}");
    assert!(
        p1 > 0.0 && p1 < 1.0 && p1 != 0.5,
        "p1 must lie in (0,1) and differ from 0.5, got {p1}"
    );
    let lam = ((1.0 - p1) / p1).ln();
    let var = 2.0 * mu;
    let v = p1 * gaussian_llr_mi(mu - lam, var) + (1.0 - p1) * gaussian_llr_mi(mu + lam, var);
    v.clamp(0.0, 1.0)
}

/// Largest tabulated mean in [`JBscTable`]; the MI is 1 to beyond f64
/// precision past this point.
const TABLE_MU_MAX: f64 = 4000.0;
const TABLE_MU_MIN: f64 = 1e-5;
const TABLE_POINTS: usize = 3000;

/// Per-`p1` lookup table for [`j_bsc`] over a logarithmic grid of means,
/// linearly interpolated. One table serves every evaluation at its `p1`, so
/// iterative analyses pay the quadrature cost once.
#[derive(Debug, Clone)]
pub struct JBscTable {
    p1: f64,
    mu: Vec<f64>,
    val: Vec<f64>,
}

impl JBscTable {
    /// Builds the table for a fixed source probability.
    ///
    /// # Panics
    /// On `p1` outside (0, 1) or equal to 0.5.
    pub fn new(p1: f64) -> Self {
        assert!(
            p1 > 0.0 && p1 < 1.0 && p1 != 0.5,
            "p1 must lie in (0,1) and differ from 0.5, got {p1}"
        );
        let mut mu = Vec::with_capacity(TABLE_POINTS + 1);
        mu.push(0.0);
        let ratio = (TABLE_MU_MAX / TABLE_MU_MIN).ln() / (TABLE_POINTS - 1) as f64;
        for k in 0..TABLE_POINTS {
            mu.push(TABLE_MU_MIN * (ratio * k as f64).exp());
        }
        let val = mu.iter().map(|&m| j_bsc(m, p1)).collect();
        JBscTable { p1, mu, val }
    }

    /// The source probability this table was built for.
    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Interpolated MI at message mean `mu` (≥ 0); exactly the table value at
    /// the knots, 1.0 beyond the tabulated range.
    pub fn eval(&self, mu: f64) -> f64 {
        debug_assert!(mu >= 0.0, "mu must be non-negative, got {mu}");
        if mu <= 0.0 {
            return self.val[0];
        }
        if mu >= TABLE_MU_MAX {
            return 1.0;
        }
        let hi = self.mu.partition_point(|&m| m < mu);
        if hi == 0 {
            return self.val[0];
        }
        let lo = hi - 1;
        let (m0, m1) = (self.mu[lo], self.mu[hi]);
        let t = (mu - m0) / (m1 - m0);
        self.val[lo] + t * (self.val[hi] - self.val[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protomatrix::source_entropy;

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        // Weights sum to the interval length.
        let w_sum: f64 = GL20_W.iter().sum::<f64>() * 2.0;
        assert!((w_sum - 2.0).abs() < 1e-14);
        // Exact for degree ≤ 39 on [-1, 1]: check x^2 and x^38.
        for (pow, want) in [(2u32, 2.0 / 3.0), (38, 2.0 / 39.0)] {
            let mut acc = 0.0;
            for k in 0..10 {
                for sign in [-1.0f64, 1.0] {
                    let x = sign * GL20_X[k];
                    acc += GL20_W[k] * x.powi(pow as i32);
                }
            }
            assert!((acc - want).abs() < 1e-13, "x^{pow}: {acc} vs {want}");
        }
    }

    #[test]
    fn gaussian_expectation_matches_known_moments() {
        // E[1] = 1, E[x^2] = 1, E[x^4] = 3 under the standard normal.
        assert!((gauss_expect(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!((gauss_expect(|x| x * x) - 1.0).abs() < 1e-12);
        assert!((gauss_expect(|x| x.powi(4)) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn j_fun_endpoints_and_growth() {
        assert_eq!(j_fun(0.0), 0.0);
        assert!(j_fun(100.0) >= 0.9999);
        assert_eq!(j_fun(SIGMA_SAT), 1.0);
        // Strictly increasing where the fit is responsive.
        let mut prev = j_fun(0.05);
        for k in 1..200 {
            let s = 0.05 + 0.05 * k as f64;
            let v = j_fun(s);
            assert!(v >= prev, "J not monotone at sigma = {s}");
            if s < 20.0 {
                assert!(v > prev, "J stalled at sigma = {s}");
            }
            prev = v;
        }
    }

    #[test]
    fn j_fun_tracks_quadrature_within_fit_error() {
        // The closed-form fit tracks the exact integral to a few 1e-3.
        let quad = j_fun_quadrature(2.0);
        assert!((j_fun(2.0) - quad).abs() < 3e-3, "fit {} vs quad {quad}", j_fun(2.0));
        for k in 1..=60 {
            let s = 0.15 * k as f64;
            assert!(
                (j_fun(s) - j_fun_quadrature(s)).abs() < 3e-3,
                "fit drift at sigma = {s}"
            );
        }
    }

    #[test]
    fn quadrature_j_reference_values() {
        // J(2) and J(1) for a consistent Gaussian: frozen from independent
        // adaptive integration of the defining integral.
        assert!((j_fun_quadrature(2.0) - 0.485_944_154).abs() < 1e-6);
        assert!((j_fun_quadrature(1.0) - 0.160_747_220).abs() < 1e-6);
        assert!(j_fun_quadrature(0.0) == 0.0);
        assert!(j_fun_quadrature(25.0) > 1.0 - 1e-15);
    }

    #[test]
    fn j_inv_round_trip_at_fit_accuracy() {
        // The paired closed-form fits invert each other to a few 1e-3 — the
        // combination that reproduces published decoding thresholds. A
        // numerically exact inverse of the fitted J is *not* usable here: the
        // fit's clamped-to-zero toe near σ ≈ 0.03 gives the exact inverse a
        // hard floor that poisons near-converged check-node updates.
        let mut worst = 0.0f64;
        for k in 0..=999 {
            let mi = 0.999 * k as f64 / 999.0;
            let err = (j_fun(j_inv(mi)) - mi).abs();
            worst = worst.max(err);
        }
        assert!(worst < 5e-3, "round-trip error {worst}");
        // The inverse is monotone up to the two fits' seam at mi ≈ 0.3646,
        // where the published pair has a small downward step (~4e-3 in σ);
        // allow that wobble, require monotonicity otherwise.
        assert_eq!(j_inv(0.0), 0.0);
        let mut prev = 0.0;
        for k in 1..1000 {
            let s = j_inv(k as f64 / 1000.0);
            assert!(s >= prev - 5e-3, "inverse dropped at mi = {}", k as f64 / 1000.0);
            prev = s;
        }
        assert!(j_inv(0.999_999_999) <= SIGMA_SAT);
    }

    #[test]
    fn j_inv_half_point_matches_quadrature_bisection() {
        // Bisect the exact quadrature J for MI 0.5, then compare the fit.
        let (mut lo, mut hi) = (0.1, 10.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if j_fun_quadrature(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sigma_exact = 0.5 * (lo + hi);
        assert!((j_inv(0.5) - sigma_exact).abs() < 2e-2);
    }

    #[test]
    fn j_bsc_floor_equals_prior_information() {
        for &p1 in &[0.04, 0.08, 0.2, 0.3, 0.45] {
            let floor = j_bsc(0.0, p1);
            let want = 1.0 - source_entropy(p1).unwrap();
            assert!((floor - want).abs() < 1e-12, "floor at p1 = {p1}");
        }
    }

    #[test]
    fn j_bsc_saturates_and_grows() {
        assert!(j_bsc(1e4, 0.04) >= 0.9999);
        assert!(j_bsc(1e4, 0.3) >= 0.9999);
        for &p1 in &[0.04, 0.12, 0.25, 0.4] {
            let mut prev = j_bsc(0.0, p1);
            for k in 1..=80 {
                let mu = 0.25 * k as f64;
                let v = j_bsc(mu, p1);
                assert!(v >= prev - 1e-12, "j_bsc not monotone at mu={mu}, p1={p1}");
                prev = v;
            }
        }
    }

    #[test]
    fn j_bsc_reduces_toward_symmetric_j_near_half() {
        // As p1 → 0.5 the mixture collapses to the consistent-Gaussian case
        // with σ = sqrt(2μ).
        for &mu in &[0.5, 2.0, 8.0] {
            let near = j_bsc(mu, 0.499_999);
            let sym = j_fun_quadrature((2.0 * mu).sqrt());
            assert!((near - sym).abs() < 1e-4, "mu = {mu}: {near} vs {sym}");
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let tab = JBscTable::new(0.04);
        // Exact at knots, close between them.
        for &mu in &[0.0, 1e-5, 0.37, 4.0, 55.0, 3999.0] {
            let direct = j_bsc(mu, 0.04);
            let interp = tab.eval(mu);
            assert!((direct - interp).abs() < 2e-6, "mu = {mu}: {interp} vs {direct}");
        }
        assert_eq!(tab.eval(5000.0), 1.0);
        assert!((tab.eval(0.0) - (1.0 - source_entropy(0.04).unwrap())).abs() < 1e-12);
    }
}
