use crate::error::{Error, Result};
use crate::image_ops::{grayscale, Image};

/// Side of the square SSIM window.
pub const SSIM_WINDOW: usize = 11;
/// Standard deviation of the Gaussian SSIM window, in pixels.
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn check_dims(a: &Image, b: &Image) -> Result<()> {
    if a.same_dims(b) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "image dimensions differ: {}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )))
    }
}

/// Mean squared error over all pixels and channels.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.data().len() as f64)
}

/// Peak signal-to-noise ratio in dB for unit peak; `+inf` for identical images.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(-10.0 * m.log10())
    }
}

fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let x = i as f64 - c;
        *t = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    taps
}

/// Valid-mode separable filtering of an `h x w` plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            rows[r * ow + c] = (0..k).map(|j| taps[j] * plane[r * w + c + j]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..k).map(|i| taps[i] * rows[(r + i) * ow + c]).sum();
        }
    }
    out
}

/// Mean SSIM over all valid 11x11 Gaussian windows of the luma channel.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let (h, w) = (a.height(), a.width());
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs both sides >= {SSIM_WINDOW}, got {h}x{w}"
        )));
    }
    let x = grayscale(a);
    let y = grayscale(b);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u * v).collect();
    let taps = gaussian_taps();
    let [mx, my, sxx, syy, sxy] = [&x, &y, &xx, &yy, &xy].map(|p| filter_valid(p, h, w, &taps));
    let (c1, c2) = (K1 * K1, K2 * K2);
    let n = mx.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mx[i], my[i]);
            let va = sxx[i] - ma * ma;
            let vb = syy[i] - mb * mb;
            let cov = sxy[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_ops::LUMA_WEIGHTS;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()])
    }

    #[test]
    fn psnr_closed_forms() {
        let a = Image::filled(8, 8, [0.4, 0.5, 0.6]);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = Image::filled(8, 8, [0.5, 0.6, 0.7]);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&a, &Image::filled(8, 9, [0.0; 3])).is_err());
    }

    #[test]
    fn psnr_matches_double_loop() {
        let a = random(13, 17, 1);
        let b = random(13, 17, 2);
        let mut sum = 0.0;
        for r in 0..13 {
            for c in 0..17 {
                let (pa, pb) = (a.pixel(r, c), b.pixel(r, c));
                for k in 0..3 {
                    sum += (pa[k] - pb[k]).powi(2);
                }
            }
        }
        let expected = 10.0 * (1.0 / (sum / (13.0 * 17.0 * 3.0))).log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn psnr_decreases_with_noise_amplitude() {
        let a = random(32, 32, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise: Vec<f64> = (0..a.data().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scores: Vec<f64> = [0.01, 0.05, 0.1]
            .iter()
            .map(|amp| {
                let data = a.data().iter().zip(&noise).map(|(x, n)| x + amp * n).collect();
                let b = Image::from_unclipped(32, 32, data).unwrap();
                psnr(&a, &b).unwrap()
            })
            .collect();
        assert!(scores[0] > scores[1] && scores[1] > scores[2], "{scores:?}");
    }

    /// Direct per-window evaluation with an explicit 2-D Gaussian.
    fn ssim_oracle(a: &Image, b: &Image) -> f64 {
        let lum = |img: &Image, r: usize, c: usize| {
            let p = img.pixel(r, c);
            LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2]
        };
        let mut g = [[0.0; 11]; 11];
        let mut norm = 0.0;
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (y, x) = (i as f64 - 5.0, j as f64 - 5.0);
                *v = (-(x * x + y * y) / 4.5).exp();
                norm += *v;
            }
        }
        let (h, w) = (a.height(), a.width());
        let mut total = 0.0;
        let mut count = 0;
        for r0 in 0..=h - 11 {
            for c0 in 0..=w - 11 {
                let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let wgt = g[i][j] / norm;
                        let (x, y) = (lum(a, r0 + i, c0 + j), lum(b, r0 + i, c0 + j));
                        ma += wgt * x;
                        mb += wgt * y;
                        saa += wgt * x * x;
                        sbb += wgt * y * y;
                        sab += wgt * x * y;
                    }
                }
                let (va, vb, cov) = (saa - ma * ma, sbb - mb * mb, sab - ma * mb);
                let (c1, c2) = (1e-4, 9e-4);
                total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                count += 1;
            }
        }
        total / count as f64
    }

    #[test]
    fn ssim_matches_window_oracle() {
        let a = random(16, 16, 5);
        let b = random(16, 16, 6);
        assert!((ssim(&a, &b).unwrap() - ssim_oracle(&a, &b)).abs() < 1e-8);
        let c = Image::from_fn(16, 16, |r, c| {
            let p = a.pixel(r, c);
            [0.8 * p[0] + 0.1, p[1], 0.5 * p[2]]
        });
        assert!((ssim(&a, &c).unwrap() - ssim_oracle(&a, &c)).abs() < 1e-8);
    }

    #[test]
    fn ssim_identity_and_anticorrelation() {
        let a = random(20, 24, 7);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let bin = Image::from_fn(16, 16, |r, c| if (r / 2 + c / 3) % 2 == 0 { [1.0; 3] } else { [0.0; 3] });
        let inv = Image::from_fn(16, 16, |r, c| {
            let p = bin.pixel(r, c);
            [1.0 - p[0], 1.0 - p[1], 1.0 - p[2]]
        });
        assert!(ssim(&bin, &inv).unwrap() < 0.0);
        assert!(ssim(&Image::filled(10, 30, [0.0; 3]), &Image::filled(10, 30, [0.0; 3])).is_err());
    }
}
