use crate::error::{Error, Result};

/// Uniform periodic grid on the unit 3-torus with `n` points (and modes) per axis.
///
/// Wave numbers per axis live in `[-n/2, n/2)`. Coefficients are stored in
/// FFT order: index `i` on an axis carries wave number `i` for `i < n/2` and
/// `i - n` otherwise. The flat index of `(i0, i1, i2)` is `(i0 * n + i1) * n + i2`,
/// with `i0` running along `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid3 {
    n: usize,
    dealias_num: u32,
    dealias_den: u32,
}

impl Grid3 {
    /// Grid with the default 2/3 dealiasing cutoff.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dealias(n, 2, 3)
    }

    pub fn with_dealias(n: usize, num: u32, den: u32) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "modes per axis must be even and at least 4, got {n}"
            )));
        }
        if den == 0 || num == 0 || num > den {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {num}/{den} must lie in (0, 1]"
            )));
        }
        Ok(Grid3 {
            n,
            dealias_num: num,
            dealias_den: den,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points (and stored coefficients), `n^3`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dealias_fraction(&self) -> (u32, u32) {
        (self.dealias_num, self.dealias_den)
    }

    /// Largest per-axis wave number kept by dealiasing.
    ///
    /// The largest integer strictly below `fraction * n / 2`; for the 2/3 rule `3K < n`,
    /// so the product of two truncated fields never aliases back into the kept band.
    pub fn cutoff(&self) -> i64 {
        let c = (self.dealias_num as usize * self.n - 1) / (2 * self.dealias_den as usize);
        c as i64
    }

    /// Per-axis storage indices that survive dealiasing.
    pub fn axis_mask(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.wavenumber(i).abs() <= self.cutoff()).collect()
    }

    /// Grid spacing `1/n`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Signed wave number of storage index `i` along one axis.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wave number used by odd (first-derivative type) multipliers: the unpaired
    /// Nyquist index is mapped to zero so every multiplier keeps Hermitian symmetry.
    #[inline]
    pub fn derivative_wavenumber(&self, i: usize) -> i64 {
        if i == self.n / 2 {
            0
        } else {
            self.wavenumber(i)
        }
    }

    /// Storage index along one axis of a signed wave number, reduced modulo `n`.
    #[inline]
    pub fn axis_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn flat(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    /// Flat storage index of the wave vector `k`, if representable on this grid.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k.iter().all(|&c| c >= -half && c < half) {
            Some(self.flat(
                self.axis_index(k[0]),
                self.axis_index(k[1]),
                self.axis_index(k[2]),
            ))
        } else {
            None
        }
    }

    /// Flat index of the mode `-k` (modular), used for Hermitian partners.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.n;
        let (i0, i1, i2) = self.split(idx);
        self.flat((n - i0) % n, (n - i1) % n, (n - i2) % n)
    }

    #[inline]
    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Signed wave vector of a flat storage index.
    #[inline]
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let (i0, i1, i2) = self.split(idx);
        [
            self.wavenumber(i0),
            self.wavenumber(i1),
            self.wavenumber(i2),
        ]
    }

    /// Derivative wave vector of a flat storage index (Nyquist components zeroed).
    #[inline]
    pub fn derivative_mode(&self, idx: usize) -> [i64; 3] {
        let (i0, i1, i2) = self.split(idx);
        [
            self.derivative_wavenumber(i0),
            self.derivative_wavenumber(i1),
            self.derivative_wavenumber(i2),
        ]
    }

    /// Whether `k` survives the dealiasing cutoff.
    #[inline]
    pub fn is_retained(&self, k: [i64; 3]) -> bool {
        let c = self.cutoff();
        k.iter().all(|&x| x.abs() <= c)
    }

    pub(crate) fn check_same(&self, other: &Grid3) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small_grids() {
        assert!(Grid3::new(3).is_err());
        assert!(Grid3::new(2).is_err());
        assert!(Grid3::new(7).is_err());
        assert!(Grid3::new(4).is_ok());
        assert!(Grid3::with_dealias(8, 4, 3).is_err());
    }

    #[test]
    fn wavenumbers_cover_half_open_range() {
        let g = Grid3::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.derivative_wavenumber(4), 0);
        assert_eq!(g.cutoff(), 2);
        assert_eq!(Grid3::new(32).unwrap().cutoff(), 10);
        assert_eq!(Grid3::new(12).unwrap().cutoff(), 3);
        assert_eq!(Grid3::with_dealias(8, 1, 1).unwrap().cutoff(), 3);
    }

    #[test]
    fn index_roundtrip_and_mirror() {
        let g = Grid3::new(6).unwrap();
        for idx in 0..g.len() {
            let k = g.mode(idx);
            assert_eq!(g.index_of(k), Some(idx));
            let m = g.mode(g.mirror(idx));
            for a in 0..3 {
                assert_eq!((k[a] + m[a]).rem_euclid(6), 0);
            }
        }
    }
}
