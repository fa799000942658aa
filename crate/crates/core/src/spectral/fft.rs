use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalized 3-D complex transform built from 1-D passes.
///
/// The contiguous axis is transformed in place; the two strided axes are brought
/// to the contiguous position by explicit transposes.
pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// `data[k] <- sum_x data[x] e^{-2 pi i k.x / n}`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.forward_masked(data, None);
    }

    /// `data[x] <- sum_k data[k] e^{+2 pi i k.x / n}`.
    ///
    /// Lines and planes that are entirely zero are skipped, which makes band-limited
    /// inputs cheaper.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        let n = self.n;
        let plane = n * n;
        debug_assert_eq!(data.len(), plane * n);
        let fft = self.inverse.as_ref();
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut tmp = vec![Complex64::default(); data.len()];
        let zero = Complex64::default();

        // axis 2
        let mut live_plane = vec![false; n];
        for (line_idx, line) in data.chunks_exact_mut(n).enumerate() {
            if line.iter().any(|c| *c != zero) {
                fft.process_with_scratch(line, &mut scratch);
                live_plane[line_idx / n] = true;
            }
        }

        // axis 1
        for (p, (src, dst)) in data.chunks_exact_mut(plane).zip(tmp.chunks_exact_mut(plane)).enumerate() {
            if !live_plane[p] {
                continue;
            }
            transpose(src, dst, n, n);
            fft.process_with_scratch(dst, &mut scratch);
            transpose(dst, src, n, n);
        }

        // axis 0
        transpose(data, &mut tmp, n, plane);
        fft.process_with_scratch(&mut tmp, &mut scratch);
        transpose(&tmp, data, plane, n);
    }

    /// Forward transform; with `keep`, only modes whose three axis indices are all kept
    /// are computed and every other coefficient is set to zero.
    pub(crate) fn forward_masked(&self, data: &mut [Complex64], keep: Option<&[bool]>) {
        let n = self.n;
        let plane = n * n;
        debug_assert_eq!(data.len(), plane * n);
        let fft = self.forward.as_ref();
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let all = vec![true; n];
        let keep = keep.unwrap_or(&all);
        let kept: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
        let m = kept.len();

        // axis 2
        fft.process_with_scratch(data, &mut scratch);

        // axis 1, only for kept axis-2 indices
        let mut rows = vec![Complex64::default(); m * n];
        for src in data.chunks_exact_mut(plane) {
            for (r, &i2) in kept.iter().enumerate() {
                let row = &mut rows[r * n..(r + 1) * n];
                for (i1, v) in row.iter_mut().enumerate() {
                    *v = src[i1 * n + i2];
                }
            }
            fft.process_with_scratch(&mut rows, &mut scratch);
            for (r, &i2) in kept.iter().enumerate() {
                let row = &rows[r * n..(r + 1) * n];
                for (i1, v) in row.iter().enumerate() {
                    src[i1 * n + i2] = *v;
                }
            }
        }

        // axis 0, only for kept (axis-1, axis-2) pairs
        let columns: Vec<usize> = kept
            .iter()
            .flat_map(|&i1| kept.iter().map(move |&i2| i1 * n + i2))
            .collect();
        let mut cols = vec![Complex64::default(); columns.len() * n];
        for i0 in 0..n {
            let src = &data[i0 * plane..(i0 + 1) * plane];
            for (c, &j) in columns.iter().enumerate() {
                cols[c * n + i0] = src[j];
            }
        }
        fft.process_with_scratch(&mut cols, &mut scratch);
        if m < n {
            data.iter_mut().for_each(|c| *c = Complex64::default());
        }
        for i0 in 0..n {
            if !keep[i0] {
                continue;
            }
            let dst = &mut data[i0 * plane..(i0 + 1) * plane];
            for (c, &j) in columns.iter().enumerate() {
                dst[j] = cols[c * n + i0];
            }
        }
    }
}

/// `dst[c * rows + r] = src[r * cols + c]` for a `rows x cols` row-major matrix.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const BLOCK: usize = 16;
    for r0 in (0..rows).step_by(BLOCK) {
        for c0 in (0..cols).step_by(BLOCK) {
            for r in r0..(r0 + BLOCK).min(rows) {
                let row = &src[r * cols..(r + 1) * cols];
                for c in c0..(c0 + BLOCK).min(cols) {
                    dst[c * rows + r] = row[c];
                }
            }
        }
    }
}

impl Fft3 {
    /// Inverse transforms of two Hermitian spectra with one complex pass:
    /// `ifft(f + i g) = f(x) + i g(x)` with both sample sets real.
    pub(crate) fn inverse_pair(&self, f: &[Complex64], g: Option<&[Complex64]>) -> (Vec<f64>, Option<Vec<f64>>) {
        let i = Complex64::new(0.0, 1.0);
        let mut data: Vec<Complex64> = match g {
            Some(g) => f.iter().zip(g).map(|(a, b)| a + i * b).collect(),
            None => f.to_vec(),
        };
        self.inverse(&mut data);
        let re = data.iter().map(|c| c.re).collect();
        let im = g.map(|_| data.iter().map(|c| c.im).collect());
        (re, im)
    }

    /// Normalized forward transforms of two real sample sets with one complex pass,
    /// restricted to the modes allowed by `keep` when given.
    pub(crate) fn forward_pair(
        &self,
        f: &[f64],
        g: Option<&[f64]>,
        keep: Option<&[bool]>,
    ) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
        let len = f.len();
        let norm = 1.0 / len as f64;
        let mut data: Vec<Complex64> = match g {
            Some(g) => f.iter().zip(g).map(|(&a, &b)| Complex64::new(a, b)).collect(),
            None => f.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        };
        self.forward_masked(&mut data, keep);
        if g.is_none() {
            data.iter_mut().for_each(|c| *c *= norm);
            return (data, None);
        }
        let n = self.n;
        let half = 0.5 * norm;
        let mut fa = vec![Complex64::default(); len];
        let mut ga = vec![Complex64::default(); len];
        let axis: Vec<usize> = (0..n).filter(|&i| keep.map_or(true, |k| k[i])).collect();
        for &i0 in &axis {
            for &i1 in &axis {
                for &i2 in &axis {
                    let idx = (i0 * n + i1) * n + i2;
                    let mirror = (((n - i0) % n) * n + (n - i1) % n) * n + (n - i2) % n;
                    let z = data[idx];
                    let zc = data[mirror].conj();
                    fa[idx] = (z + zc) * half;
                    let d = (z - zc) * half;
                    ga[idx] = Complex64::new(d.im, -d.re);
                }
            }
        }
        (fa, Some(ga))
    }
}

pub(crate) fn plan(n: usize) -> Arc<Fft3> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(Fft3::new(n)))
        .clone()
}

#[cfg(test)]
impl Fft3 {
    /// Dense inverse transform by direct summation along each axis.
    fn transform_reference(&self, data: &mut [Complex64]) {
        let n = self.n;
        let len = data.len();
        let mut out = vec![Complex64::default(); len];
        for x in 0..len {
            let (x0, x1, x2) = (x / (n * n), (x / n) % n, x % n);
            for (k, c) in data.iter().enumerate() {
                let (k0, k1, k2) = (k / (n * n), (k / n) % n, k % n);
                let phase = 2.0 * std::f64::consts::PI * ((k0 * x0 + k1 * x1 + k2 * x2) % n) as f64 / n as f64;
                out[x] += c * Complex64::from_polar(1.0, phase);
            }
        }
        data.copy_from_slice(&out);
    }
}
