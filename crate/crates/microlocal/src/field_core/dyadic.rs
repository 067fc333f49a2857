use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smooth dyadic Littlewood-Paley family on frequency space.
///
/// The base cutoff `phi0` is a radial C-infinity function with
/// `phi0(r) = 1` for `r <= eps1` and `phi0(r) = 0` for `r >= eps2`, where
/// `0 < eps1 < eps2 < 1 < 2 eps1`.  The annular pieces are
/// `phi_j(r) = phi0(2^-j r) - phi0(2^-j+1 r)` for `j >= 1`, so partial sums
/// telescope exactly: `sum_{j'=0..j} phi_j'(r) = phi0(2^-j r)`.
///
/// Consequences used throughout:
/// - `phi_j` is supported in the annulus `2^(j-1) eps1 <= r <= 2^j eps2`;
/// - `phi_j = 1` on the plateau `2^(j-1) eps2 <= r <= 2^j eps1`, which
///   contains the circle `r = 2^(j-1)` since `eps2 < 1 < 2 eps1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicFamily {
    pub eps1: f64,
    pub eps2: f64,
    /// Margin exponent of the admissible weight: the x-frequency cutoff for
    /// quantizing at dyadic band `b` acts at scale `2^(b - n0)`.
    pub n0: u32,
}

impl Default for DyadicFamily {
    fn default() -> Self {
        DyadicFamily {
            eps1: 0.6,
            eps2: 0.9,
            n0: 3,
        }
    }
}

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`, strictly increasing
/// between, built from `exp(-1/t)`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let f = (-1.0 / t).exp();
        let g = (-1.0 / (1.0 - t)).exp();
        f / (f + g)
    }
}

impl DyadicFamily {
    pub fn new(eps1: f64, eps2: f64, n0: u32) -> Result<DyadicFamily> {
        if !(0.0 < eps1 && eps1 < eps2 && eps2 < 1.0 && 1.0 < 2.0 * eps1) {
            return Err(Error::InvalidParameter(format!(
                "dyadic cutoffs need 0 < eps1 < eps2 < 1 < 2 eps1, got ({eps1}, {eps2})"
            )));
        }
        if n0 == 0 {
            return Err(Error::InvalidParameter(
                "admissible weight margin n0 must be >= 1".into(),
            ));
        }
        Ok(DyadicFamily { eps1, eps2, n0 })
    }

    /// Base cutoff `phi0(r)`: 1 on `[0, eps1]`, 0 on `[eps2, inf)`.
    pub fn phi0(&self, r: f64) -> f64 {
        smoothstep((self.eps2 - r.abs()) / (self.eps2 - self.eps1))
    }

    /// Dyadic piece: `phi_level(0, r) = phi0(r)`; for `j >= 1`
    /// `phi_level(j, r) = phi0(2^-j r) - phi0(2^-(j-1) r)`.
    pub fn phi_level(&self, j: u32, r: f64) -> f64 {
        if j == 0 {
            self.phi0(r)
        } else {
            let s = (2.0f64).powi(-(j as i32));
            self.phi0(s * r) - self.phi0(2.0 * s * r)
        }
    }

    /// Exact partial sum `sum_{j'=0..j} phi_j'(r) = phi0(2^-j r)`.
    pub fn partial_sum(&self, j: u32, r: f64) -> f64 {
        self.phi0((2.0f64).powi(-(j as i32)) * r)
    }

    /// Support annulus `[2^(j-1) eps1, 2^j eps2]` of `phi_j`, `j >= 1`.
    pub fn support_level(&self, j: u32) -> (f64, f64) {
        assert!(j >= 1);
        let p = (2.0f64).powi(j as i32);
        (0.5 * p * self.eps1, p * self.eps2)
    }

    /// Plateau `[2^(j-1) eps2, 2^j eps1]` where `phi_j = 1`, `j >= 1`.
    pub fn plateau_level(&self, j: u32) -> (f64, f64) {
        assert!(j >= 1);
        let p = (2.0f64).powi(j as i32);
        (0.5 * p * self.eps2, p * self.eps1)
    }

    /// Dyadic bands `b >= 1` whose piece `phi_b` is nonzero at radius `r`.
    /// At most two consecutive bands qualify.
    #[allow(clippy::reversed_empty_ranges)] // `1..=0` is the empty return
    pub fn active_bands(&self, r: f64) -> std::ops::RangeInclusive<u32> {
        if r <= 0.0 {
            return 1..=0; // empty
        }
        let blo = (r / self.eps2).log2().ceil() as i64;
        let bhi = (r / self.eps1).log2().floor() as i64 + 1;
        let lo = blo.max(1);
        if bhi < lo {
            return 1..=0; // empty (r below every annulus)
        }
        (lo as u32)..=(bhi as u32)
    }

    /// Admissible paradifferential weight
    /// `phi_adm(eta, xi) = sum_{b>=1} phi0(2^(-b + n0) |eta|) phi_b(<xi>)`,
    /// taking the x-frequency magnitude `|eta|` and the bracket `<xi> >= 1`.
    ///
    /// Key properties: `phi_adm(0, xi) = 1`, and the weight vanishes once
    /// `|eta| >= 2 eps2 / (eps1 2^n0) * <xi>`, so retained x-frequencies of a
    /// symbol stay strictly below the xi-frequency being acted on.
    pub fn phi_adm(&self, eta_norm: f64, xi_bracket: f64) -> f64 {
        debug_assert!(xi_bracket >= 1.0);
        let mut sum = 0.0;
        for b in self.active_bands(xi_bracket) {
            let margin = (2.0f64).powi(self.n0 as i32 - b as i32);
            sum += self.phi0(margin * eta_norm) * self.phi_level(b, xi_bracket);
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::field::bracket;

    #[test]
    fn rejects_bad_cutoffs() {
        assert!(DyadicFamily::new(0.4, 0.9, 3).is_err()); // 2*eps1 < 1
        assert!(DyadicFamily::new(0.9, 0.6, 3).is_err()); // order
        assert!(DyadicFamily::new(0.6, 1.1, 3).is_err()); // eps2 > 1
        assert!(DyadicFamily::new(0.6, 0.9, 0).is_err());
        assert!(DyadicFamily::new(0.6, 0.9, 3).is_ok());
    }

    #[test]
    fn base_cutoff_plateaus() {
        let fam = DyadicFamily::default();
        for r in [0.0, 0.1, 0.3, 0.59999, 0.6] {
            assert_eq!(fam.phi0(r), 1.0, "phi0({r}) must be exactly 1");
        }
        for r in [0.9, 0.91, 1.5, 100.0] {
            assert_eq!(fam.phi0(r), 0.0, "phi0({r}) must be exactly 0");
        }
        //

        // Nonincreasing across the whole transition band, and strictly
        // decreasing over its interior (the exp(-1/t) tails saturate to
        // exactly 0/1 in floats within ~0.02 of the band edges).
        let mut prev = 1.0;
        for i in 1..=40 {
            let r = 0.6 + 0.3 * i as f64 / 40.0;
            let v = fam.phi0(r);
            assert!(v <= prev, "phi0 increases at r={r}");
            prev = v;
        }
        let mut prev = fam.phi0(0.63);
        for i in 1..=24 {
            let r = 0.63 + 0.01 * i as f64;
            let v = fam.phi0(r);
            assert!(v < prev, "phi0 not strictly decreasing at r={r}");
            prev = v;
        }
    }

    #[test]
    fn telescoping_partial_sums() {
        // sum_{j'=0..j} phi_j' = phi0(2^-j .) pointwise, up to float rounding.
        let fam = DyadicFamily::default();
        for &j in &[1u32, 3, 7, 12] {
            for i in 0..2000 {
                let r = 0.01 * (1.0 + i as f64).powf(1.35);
                let mut sum = 0.0;
                for jp in 0..=j {
                    sum += fam.phi_level(jp, r);
                }
                let expect = fam.partial_sum(j, r);
                assert!(
                    (sum - expect).abs() <= 1e-14,
                    "telescoping failed at j={j}, r={r}: {sum} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn partition_of_unity_on_large_radii() {
        let fam = DyadicFamily::default();
        // For any r, once 2^j eps1 >= r the partial sum equals 1.
        for &r in &[0.05, 0.7, 1.0, 3.7, 41.0, 900.0] {
            let j = ((r / fam.eps1).log2().ceil().max(0.0)) as u32;
            assert!(
                (fam.partial_sum(j, r) - 1.0).abs() <= 1e-15,
                "partition of unity fails at r={r}"
            );
        }
    }

    #[test]
    fn annulus_support_and_plateau() {
        let fam = DyadicFamily::default();
        for &j in &[1u32, 2, 5, 9] {
            let (lo, hi) = fam.support_level(j);
            assert_eq!(lo, (2.0f64).powi(j as i32 - 1) * 0.6);
            assert_eq!(hi, (2.0f64).powi(j as i32) * 0.9);
            // Zero outside the support annulus.
            assert_eq!(fam.phi_level(j, lo * 0.999), 0.0);
            assert_eq!(fam.phi_level(j, hi * 1.001), 0.0);
            assert_eq!(fam.phi_level(j, 0.25 * lo), 0.0);
            assert_eq!(fam.phi_level(j, 8.0 * hi), 0.0);
            // Exactly one on the plateau, which contains r = 2^(j-1).
            let (plo, phi_hi) = fam.plateau_level(j);
            assert!(plo <= (2.0f64).powi(j as i32 - 1) && (2.0f64).powi(j as i32 - 1) <= phi_hi);
            for t in 0..=10 {
                let r = plo + (phi_hi - plo) * t as f64 / 10.0;
                assert!(
                    (fam.phi_level(j, r) - 1.0).abs() <= 1e-15,
                    "plateau violated at j={j}, r={r}"
                );
            }
            // Nonzero strictly inside the support but off the plateau.
            assert!(fam.phi_level(j, 0.5 * (lo + plo)) > 0.0);
            assert!(fam.phi_level(j, 0.5 * (phi_hi + hi)) > 0.0);
        }
    }

    #[test]
    fn active_bands_match_brute_force() {
        let fam = DyadicFamily::default();
        for i in 0..800 {
            let r = 1.0 + 0.25 * i as f64; // brackets are always >= 1
            let range = fam.active_bands(r);
            let mut brute = Vec::new();
            for b in 1u32..=60 {
                if fam.phi_level(b, r) != 0.0 {
                    brute.push(b);
                }
            }
            for &b in &brute {
                assert!(
                    range.contains(&b),
                    "band {b} active at r={r} but outside {range:?}"
                );
            }
            assert!(range.clone().count() <= 2, "more than two bands at r={r}");
        }
    }

    #[test]
    fn admissible_weight_normalization_and_support() {
        let fam = DyadicFamily::default();
        // phi_adm(0, xi) = 1 for every xi (brackets >= 1 kill phi0(<xi>)).
        for &xin in &[0.0, 0.5, 1.0, 7.3, 129.0, 5000.0] {
            let br = bracket(xin);
            assert!(
                (fam.phi_adm(0.0, br) - 1.0).abs() <= 1e-15,
                "normalization fails at |xi|={xin}"
            );
            // Vanishes once |eta| >= 2 eps2 / (eps1 2^n0) * <xi>.
            let cutoff = 2.0 * fam.eps2 / (fam.eps1 * (2.0f64).powi(fam.n0 as i32)) * br;
            assert_eq!(fam.phi_adm(cutoff * 1.0001, br), 0.0);
            assert_eq!(fam.phi_adm(cutoff * 10.0, br), 0.0);
            // Equals 1 for small eta: every active band's margin factor is 1
            // when 2^(n0-b) |eta| <= eps1, and the bands sum to 1.
            let lo_env = fam.eps1 * (2.0f64).powi(-(fam.n0 as i32));
            let small = lo_env * br.max(1.0) * 0.49;
            assert!(
                (fam.phi_adm(small, br) - 1.0).abs() <= 1e-15,
                "low-frequency plateau fails at |xi|={xin}"
            );
        }
        // Brute-force cross-check of the band window logic.
        for i in 0..200 {
            let br = 1.0 + 0.7 * i as f64;
            for e in 0..40 {
                let eta = 0.05 * (e as f64) * br;
                let mut brute = 0.0;
                for b in 1u32..=60 {
                    let margin = (2.0f64).powi(fam.n0 as i32 - b as i32);
                    brute += fam.phi0(margin * eta) * fam.phi_level(b, br);
                }
                assert!(
                    (fam.phi_adm(eta, br) - brute).abs() <= 1e-14,
                    "windowed sum mismatch at <xi>={br}, |eta|={eta}"
                );
            }
        }
    }
}
