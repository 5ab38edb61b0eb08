//! Dense row-major `f64` matrices and the 2-D convolution that every
//! filter in this crate is built on.

use crate::error::{Error, Result};

/// Row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds from a flat row-major buffer. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length must equal rows*cols");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two equally sized matrices.
    pub fn zip_map(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Clamped read used by replicated-border filtering.
    #[inline]
    fn get_clamped(&self, r: isize, c: isize) -> f64 {
        let r = r.clamp(0, self.rows as isize - 1) as usize;
        let c = c.clamp(0, self.cols as isize - 1) as usize;
        self.data[r * self.cols + c]
    }
}

/// True 2-D convolution (the kernel is flipped) with replicated borders.
///
/// Both kernel dimensions must be odd so the output stays aligned with the
/// input; the output has the same shape as `input`.
pub fn convolve2d(input: &Matrix, kernel: &Matrix) -> Result<Matrix> {
    if kernel.rows % 2 == 0 || kernel.cols % 2 == 0 {
        return Err(Error::EvenKernel { rows: kernel.rows, cols: kernel.cols });
    }
    if input.rows == 0 || input.cols == 0 {
        return Err(Error::ZeroDimension);
    }
    let (kr, kc) = (kernel.rows as isize, kernel.cols as isize);
    let (hr, hc) = (kr / 2, kc / 2);
    let mut out = Matrix::zeros(input.rows, input.cols);
    for r in 0..input.rows as isize {
        for c in 0..input.cols as isize {
            let mut acc = 0.0;
            for i in 0..kr {
                for j in 0..kc {
                    // flipped kernel: out[r,c] += k[i,j] * in[r - (i-hr), c - (j-hc)]
                    let v = input.get_clamped(r - (i - hr), c - (j - hc));
                    acc += kernel.get(i as usize, j as usize) * v;
                }
            }
            out.set(r as usize, c as usize, acc);
        }
    }
    Ok(out)
}

/// Normalised 1-D Gaussian taps over radius `ceil(3 sigma)`.
fn gaussian_taps(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let radius = (3.0 * sigma).ceil() as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(input: &Matrix, sigma: f64) -> Matrix {
    let taps = gaussian_taps(sigma);
    let radius = (taps.len() / 2) as isize;
    // Horizontal pass, then vertical; symmetric taps so no flip needed.
    let mut tmp = Matrix::zeros(input.rows, input.cols);
    for r in 0..input.rows as isize {
        for c in 0..input.cols as isize {
            let mut acc = 0.0;
            for (j, t) in taps.iter().enumerate() {
                acc += t * input.get_clamped(r, c + j as isize - radius);
            }
            tmp.set(r as usize, c as usize, acc);
        }
    }
    let mut out = Matrix::zeros(input.rows, input.cols);
    for r in 0..input.rows as isize {
        for c in 0..input.cols as isize {
            let mut acc = 0.0;
            for (i, t) in taps.iter().enumerate() {
                acc += t * tmp.get_clamped(r + i as isize - radius, c);
            }
            out.set(r as usize, c as usize, acc);
        }
    }
    out
}

/// Mean filter over an odd `size` x `size` window with replicated borders.
pub fn box_blur(input: &Matrix, size: usize) -> Result<Matrix> {
    let kernel = Matrix::from_vec(size, size, vec![1.0 / (size * size) as f64; size * size]);
    convolve2d(input, &kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct definition of convolution with clamped indices; deliberately
    /// naive so it can serve as the oracle for `convolve2d`.
    fn convolve_reference(input: &Matrix, kernel: &Matrix) -> Matrix {
        let (hr, hc) = (kernel.rows() as isize / 2, kernel.cols() as isize / 2);
        Matrix::from_fn(input.rows(), input.cols(), |r, c| {
            let mut acc = 0.0;
            for i in 0..kernel.rows() as isize {
                for j in 0..kernel.cols() as isize {
                    let rr = (r as isize - (i - hr)).clamp(0, input.rows() as isize - 1);
                    let cc = (c as isize - (j - hc)).clamp(0, input.cols() as isize - 1);
                    acc += kernel.get(i as usize, j as usize) * input.get(rr as usize, cc as usize);
                }
            }
            acc
        })
    }

    #[test]
    fn identity_kernel_is_identity() {
        let input = Matrix::from_fn(5, 7, |r, c| (r * 7 + c) as f64 * 0.1);
        let mut kernel = Matrix::zeros(3, 3);
        kernel.set(1, 1, 1.0);
        let out = convolve2d(&input, &kernel).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn kernel_is_flipped() {
        // An impulse convolved with an asymmetric kernel must reproduce the
        // kernel unflipped around the impulse (true convolution).
        let mut input = Matrix::zeros(5, 5);
        input.set(2, 2, 1.0);
        let kernel = Matrix::from_vec(1, 3, vec![1.0, 0.0, 0.0]);
        let out = convolve2d(&input, &kernel).unwrap();
        // out[r, c] = sum_j k[j] * in[r, c - (j - 1)]; k[0]=1 reads in[r, c+1],
        // so the impulse lands at c = 1.
        assert_eq!(out.get(2, 1), 1.0);
        assert_eq!(out.get(2, 3), 0.0);
    }

    #[test]
    fn even_kernel_rejected() {
        let input = Matrix::zeros(4, 4);
        let kernel = Matrix::zeros(2, 3);
        assert!(matches!(
            convolve2d(&input, &kernel),
            Err(Error::EvenKernel { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn border_replication_on_constant_image() {
        let input = Matrix::from_vec(3, 3, vec![2.5; 9]);
        let kernel = Matrix::from_vec(3, 3, vec![1.0 / 9.0; 9]);
        let out = convolve2d(&input, &kernel).unwrap();
        for &v in out.as_slice() {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_separable_matches_full_kernel() {
        let input = Matrix::from_fn(9, 11, |r, c| ((r * 13 + c * 7) % 17) as f64 / 17.0);
        let sigma = 1.3;
        let taps = gaussian_taps(sigma);
        let n = taps.len();
        let full = Matrix::from_fn(n, n, |i, j| taps[i] * taps[j]);
        let by_kernel = convolve2d(&input, &full).unwrap();
        let by_passes = gaussian_blur(&input, sigma);
        for (a, b) in by_kernel.as_slice().iter().zip(by_passes.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_taps_normalised() {
        for sigma in [0.5, 1.0, 2.0, 8.0] {
            let sum: f64 = gaussian_taps(sigma).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn convolution_matches_reference(
            rows in 1usize..8,
            cols in 1usize..8,
            krows in prop::sample::select(vec![1usize, 3, 5]),
            kcols in prop::sample::select(vec![1usize, 3, 5]),
            seed in any::<u64>(),
        ) {
            let mut state = seed;
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
            };
            let input = Matrix::from_fn(rows, cols, |_, _| next());
            let kernel = Matrix::from_fn(krows, kcols, |_, _| next());
            let got = convolve2d(&input, &kernel).unwrap();
            let want = convolve_reference(&input, &kernel);
            for (a, b) in got.as_slice().iter().zip(want.as_slice()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn box_blur_preserves_constant(value in -10.0f64..10.0, size in prop::sample::select(vec![1usize, 3, 5])) {
            let input = Matrix::from_vec(4, 6, vec![value; 24]);
            let out = box_blur(&input, size).unwrap();
            for &v in out.as_slice() {
                prop_assert!((v - value).abs() < 1e-10);
            }
        }
    }
}
