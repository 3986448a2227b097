//! Discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 transform; every other
//! length is reduced to a power-of-two cyclic convolution with Bluestein's
//! chirp-z substitution `kn = (k² + n² - (k-n)²)/2`.

use std::f64::consts::PI;

use num_complex::Complex64;

/// In-place radix-2 transform with precomputed twiddles.
#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    /// `exp(-2πi j/len)` for `j < len/2`.
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(len: usize) -> Self {
        assert!(len.is_power_of_two());
        let twiddles = (0..len / 2)
            .map(|j| {
                let (s, c) = (-2.0 * PI * j as f64 / len as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        Radix2 { len, twiddles }
    }

    /// Unnormalized forward transform (`inverse = false`) or its conjugate kernel.
    fn process(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.len;
        debug_assert_eq!(data.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let t = w * data[start + k + half];
                    let u = data[start + k];
                    data[start + k] = u + t;
                    data[start + k + half] = u - t;
                }
            }
            size *= 2;
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        /// `exp(-πi n²/L)`.
        chirp: Vec<Complex64>,
        /// Transform of the conjugate chirp laid out cyclically on the inner length.
        kernel_hat: Vec<Complex64>,
    },
}

/// A planned DFT of fixed length with the convention
/// `X[k] = Σ_n x[n] exp(-2πi kn/L)`.
#[derive(Debug, Clone)]
pub struct Dft {
    len: usize,
    kernel: Kernel,
}

impl Dft {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "DFT length must be positive");
        if len.is_power_of_two() {
            return Dft {
                len,
                kernel: Kernel::Radix2(Radix2::new(len)),
            };
        }
        let inner_len = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(inner_len);
        let modulus = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|n| {
                // Reduce n² mod 2L exactly before forming the angle.
                let r = (n as u128 * n as u128) % modulus;
                let (s, c) = (-PI * r as f64 / len as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); inner_len];
        kernel[0] = chirp[0].conj();
        for m in 1..len {
            kernel[m] = chirp[m].conj();
            kernel[inner_len - m] = chirp[m].conj();
        }
        inner.process(&mut kernel, false);
        Dft {
            len,
            kernel: Kernel::Bluestein {
                inner,
                chirp,
                kernel_hat: kernel,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn run(&self, input: &[Complex64], inverse: bool) -> Vec<Complex64> {
        assert_eq!(input.len(), self.len, "DFT input length mismatch");
        match &self.kernel {
            Kernel::Radix2(r) => {
                let mut data = input.to_vec();
                r.process(&mut data, inverse);
                data
            }
            Kernel::Bluestein {
                inner,
                chirp,
                kernel_hat,
            } => {
                // The inverse kernel is the conjugate: conj(DFT(conj x)).
                let p = kernel_hat.len();
                let mut buf = vec![Complex64::new(0.0, 0.0); p];
                for (n, (&x, &c)) in input.iter().zip(chirp).enumerate() {
                    let x = if inverse { x.conj() } else { x };
                    buf[n] = x * c;
                }
                inner.process(&mut buf, false);
                for (b, k) in buf.iter_mut().zip(kernel_hat) {
                    *b *= k;
                }
                inner.process(&mut buf, true);
                let scale = 1.0 / p as f64;
                (0..self.len)
                    .map(|k| {
                        let y = buf[k] * scale * chirp[k];
                        if inverse {
                            y.conj()
                        } else {
                            y
                        }
                    })
                    .collect()
            }
        }
    }

    /// `X[k] = Σ_n x[n] exp(-2πi kn/L)`.
    pub fn forward(&self, input: &[Complex64]) -> Vec<Complex64> {
        self.run(input, false)
    }

    /// `Σ_k X[k] exp(+2πi kn/L)` without the `1/L` factor.
    pub fn backward_unnormalized(&self, input: &[Complex64]) -> Vec<Complex64> {
        self.run(input, true)
    }

    /// Inverse of [`Dft::forward`].
    pub fn inverse(&self, input: &[Complex64]) -> Vec<Complex64> {
        let scale = 1.0 / self.len as f64;
        self.run(input, true).into_iter().map(|z| z * scale).collect()
    }
}

/// Direct `O(L²)` DFT, used as a reference.
pub fn dft_direct(input: &[Complex64]) -> Vec<Complex64> {
    let l = input.len();
    (0..l)
        .map(|k| {
            input
                .iter()
                .enumerate()
                .map(|(n, &x)| {
                    let r = (k as u128 * n as u128 % l as u128) as f64;
                    let (s, c) = (-2.0 * PI * r / l as f64).sin_cos();
                    x * Complex64::new(c, s)
                })
                .sum()
        })
        .collect()
}
