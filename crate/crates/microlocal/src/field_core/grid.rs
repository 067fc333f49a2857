use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform periodic grid on the torus `[0, len)^dim` with `n` points per axis.
///
/// Spatial samples sit at `x_i = len * i / n`.  The discrete frequencies are
/// `xi_k = (2*pi/len) * k` with signed integer `k` in `{-n/2, ..., n/2 - 1}`
/// per axis, stored in FFT order (`0, 1, ..., n/2-1, -n/2, ..., -1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Number of spatial dimensions.
    pub dim: usize,
    /// Points per axis; must be an even power of two.
    pub n: usize,
    /// Side length of the periodic box.
    pub len: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, len: f64) -> Result<Grid> {
        if dim == 0 {
            return Err(Error::InvalidParameter("grid dim must be >= 1".into()));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid n must be a power of two >= 2, got {n}"
            )));
        }
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid len must be positive and finite, got {len}"
            )));
        }
        // Reject sizes whose total point count overflows usize.
        let mut total: usize = 1;
        for _ in 0..dim {
            total = total
                .checked_mul(n)
                .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
        }
        Ok(Grid { dim, n, len })
    }

    /// Total number of grid points `n^dim`.
    pub fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Frequency spacing `2*pi/len` per axis.
    pub fn freq_step(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.len
    }

    /// Spatial step `len/n` per axis.
    pub fn x_step(&self) -> f64 {
        self.len / self.n as f64
    }

    /// Signed integer frequency index for axis position `i` (FFT order).
    #[inline]
    pub fn signed_index(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis position holding signed index `k` (inverse of `signed_index`).
    #[inline]
    pub fn axis_position(&self, k: i64) -> usize {
        let half = (self.n / 2) as i64;
        debug_assert!((-half..half).contains(&k));
        if k >= 0 {
            k as usize
        } else {
            (k + self.n as i64) as usize
        }
    }

    /// Largest signed index magnitude representable on an axis (`n/2`).
    pub fn max_index(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Decompose a flat index (row-major, axis 0 slowest) into per-axis positions.
    #[inline]
    pub fn flat_to_multi(&self, flat: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.dim);
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            out[a] = rem % self.n;
            rem /= self.n;
        }
        debug_assert_eq!(rem, 0);
    }

    /// Flatten per-axis positions into a row-major flat index.
    #[inline]
    pub fn multi_to_flat(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim);
        let mut flat = 0;
        for &m in multi {
            debug_assert!(m < self.n);
            flat = flat * self.n + m;
        }
        flat
    }

    /// Frequency vector `xi` of the flat spectral index.
    #[inline]
    pub fn xi_at(&self, flat: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let step = self.freq_step();
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            let i = rem % self.n;
            rem /= self.n;
            out[a] = step * self.signed_index(i) as f64;
        }
    }

    /// Signed integer frequency indices of the flat spectral index.
    #[inline]
    pub fn k_at(&self, flat: usize, out: &mut [i64]) {
        debug_assert_eq!(out.len(), self.dim);
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            let i = rem % self.n;
            rem /= self.n;
            out[a] = self.signed_index(i);
        }
    }

    /// Euclidean norm of the frequency vector at a flat spectral index.
    #[inline]
    pub fn xi_norm_at(&self, flat: usize) -> f64 {
        let step = self.freq_step();
        let mut sq = 0.0;
        let mut rem = flat;
        for _ in 0..self.dim {
            let i = rem % self.n;
            rem /= self.n;
            let k = self.signed_index(i) as f64;
            sq += k * k;
        }
        step * sq.sqrt()
    }

    /// Spatial point of the flat index.
    #[inline]
    pub fn x_at(&self, flat: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let h = self.x_step();
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            out[a] = h * (rem % self.n) as f64;
            rem /= self.n;
        }
    }

    /// Flat spectral index for signed integer frequencies `k`.
    pub fn flat_for_k(&self, k: &[i64]) -> usize {
        debug_assert_eq!(k.len(), self.dim);
        let mut flat = 0;
        for &ka in k {
            flat = flat * self.n + self.axis_position(ka);
        }
        flat
    }

    /// Box with the same samples/coefficients relabelled onto a box of
    /// `factor` times the side length (frequencies shrink by `1/factor`).
    pub fn scaled_box(&self, factor: f64) -> Grid {
        Grid {
            dim: self.dim,
            n: self.n,
            len: self.len * factor,
        }
    }

    /// Distance on the torus between two points (componentwise minimal image).
    pub fn torus_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut sq = 0.0;
        for (&xa, &xb) in a.iter().zip(b) {
            let mut d = (xa - xb).rem_euclid(self.len);
            if d > self.len / 2.0 {
                d = self.len - d;
            }
            sq += d * d;
        }
        sq.sqrt()
    }
}
