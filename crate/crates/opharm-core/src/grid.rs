//! Sampling lattice on the d-torus, identified with the unit cube [0,1)^d.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform lattice with N points per axis, spacing h = 1/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    n_axis: usize,
}

impl GridSpec {
    /// Cap on total lattice points.
    const MAX_POINTS: usize = 1 << 24;

    pub fn new(d: usize, n_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Domain(format!("dimension must be 1..=3, got {d}")));
        }
        if n_axis < 2 || !n_axis.is_power_of_two() {
            return Err(Error::Domain(format!(
                "points per axis must be a power of two >= 2, got {n_axis}"
            )));
        }
        let points = (n_axis as u128).pow(d as u32);
        if points > Self::MAX_POINTS as u128 {
            return Err(Error::Domain(format!(
                "lattice of {points} points exceeds the memory budget"
            )));
        }
        Ok(GridSpec { d, n_axis })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_axis(&self) -> usize {
        self.n_axis
    }

    /// Lattice spacing h; h * N = 1 exactly in binary arithmetic.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n_axis as f64
    }

    pub fn num_points(&self) -> usize {
        self.n_axis.pow(self.d as u32)
    }

    /// Quadrature weight of one lattice cell, h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Row-major decode of a flat index into per-axis indices.
    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut mi = [0usize; 3];
        for a in (0..self.d).rev() {
            mi[a] = idx % self.n_axis;
            idx /= self.n_axis;
        }
        mi
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        let mut idx = 0;
        for a in 0..self.d {
            idx = idx * self.n_axis + (mi[a] % self.n_axis);
        }
        idx
    }

    /// Coordinates of the lattice point for a flat index, in [0,1)^d.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let mi = self.multi_index(idx);
        let mut s = [0.0f64; 3];
        for a in 0..self.d {
            s[a] = mi[a] as f64 * self.spacing();
        }
        s
    }

    /// Frequency vector for a flat index, each component wrapped to
    /// [-N/2, N/2).
    pub fn freq(&self, idx: usize) -> [i64; 3] {
        let mi = self.multi_index(idx);
        let n = self.n_axis as i64;
        let mut m = [0i64; 3];
        for a in 0..self.d {
            let k = mi[a] as i64;
            m[a] = if k < n / 2 { k } else { k - n };
        }
        m
    }

    /// Flat index of a frequency vector (components taken mod N).
    pub fn freq_index(&self, m: &[i64]) -> usize {
        let n = self.n_axis as i64;
        let mut idx = 0usize;
        for a in 0..self.d {
            idx = idx * self.n_axis + (m[a].rem_euclid(n)) as usize;
        }
        idx
    }

    /// Euclidean norm of a frequency vector.
    pub fn freq_norm(&self, m: &[i64; 3]) -> f64 {
        let mut s = 0.0;
        for a in 0..self.d {
            s += (m[a] * m[a]) as f64;
        }
        s.sqrt()
    }

    /// Max-norm of a frequency vector.
    pub fn freq_band(&self, m: &[i64; 3]) -> usize {
        (0..self.d)
            .map(|a| m[a].unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Offset vector of a lattice index, components wrapped to [-1/2, 1/2).
    pub fn torus_offset(&self, idx: usize) -> [f64; 3] {
        let mi = self.multi_index(idx);
        let n = self.n_axis;
        let mut t = [0.0f64; 3];
        for a in 0..self.d {
            let k = mi[a];
            let signed = if k < n / 2 {
                k as i64
            } else {
                k as i64 - n as i64
            };
            t[a] = signed as f64 * self.spacing();
        }
        t
    }

    /// Squared torus distance of the lattice offset `idx` from the origin.
    pub fn torus_dist2(&self, idx: usize) -> f64 {
        let t = self.torus_offset(idx);
        (0..self.d).map(|a| t[a] * t[a]).sum()
    }

    /// Index of the point `idx` translated by the lattice vector `shift`.
    pub fn translate(&self, idx: usize, shift: &[i64; 3]) -> usize {
        let mi = self.multi_index(idx);
        let n = self.n_axis as i64;
        let mut out = 0usize;
        for a in 0..self.d {
            let k = (mi[a] as i64 + shift[a]).rem_euclid(n) as usize;
            out = out * self.n_axis + k;
        }
        out
    }

    /// All frequency vectors with `1 <= |m| <= radius` (Euclidean),
    /// deduplicated by Euclidean norm and sorted. Radial symbols only see
    /// the norm, so this is the natural test set for lattice frequencies.
    pub fn frequency_radii(&self, radius: f64) -> Vec<f64> {
        let mut radii: Vec<f64> = Vec::new();
        for idx in 0..self.num_points() {
            let m = self.freq(idx);
            let r = self.freq_norm(&m);
            if r >= 1.0 - 1e-12 && r <= radius + 1e-12 {
                radii.push(r);
            }
        }
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        radii.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        radii
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GridSpec::new(1, 16).is_ok());
        assert!(GridSpec::new(0, 16).is_err());
        assert!(GridSpec::new(4, 16).is_err());
        assert!(GridSpec::new(1, 12).is_err());
        assert!(GridSpec::new(3, 1 << 10).is_err()); // 2^30 points
    }

    #[test]
    fn spacing_times_n_is_one() {
        for n in [8usize, 16, 32, 64, 128] {
            let g = GridSpec::new(1, n).unwrap();
            assert_eq!(g.spacing() * n as f64, 1.0);
        }
    }

    #[test]
    fn index_roundtrip_and_freq_wrap() {
        let g = GridSpec::new(2, 8).unwrap();
        for idx in 0..g.num_points() {
            let mi = g.multi_index(idx);
            assert_eq!(g.flat_index(&mi[..g.d()]), idx);
        }
        // frequency at index (7, 1) wraps to (-1, 1)
        let idx = g.flat_index(&[7, 1]);
        assert_eq!(g.freq(idx)[..2], [-1i64, 1]);
        assert_eq!(g.freq_index(&[-1, 1]), idx);
    }

    #[test]
    fn torus_offsets_wrap() {
        let g = GridSpec::new(1, 8).unwrap();
        let t = g.torus_offset(7);
        assert!((t[0] + 0.125).abs() < 1e-15);
        assert!((g.torus_dist2(7) - 0.015625).abs() < 1e-15);
    }

    #[test]
    fn translation_wraps() {
        let g = GridSpec::new(1, 8).unwrap();
        assert_eq!(g.translate(6, &[3, 0, 0]), 1);
        assert_eq!(g.translate(1, &[-3, 0, 0]), 6);
    }
}
