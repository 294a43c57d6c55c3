//! The `O(N·K)` harmonic-sum hot loop.
//!
//! For event times `t_m` and weights `w_m` it evaluates
//! `S_k = Σ_m w_m·e^{i·k·t_m}` for `k = 1..=K`. Each event carries a unit
//! phasor that is advanced from harmonic `k-1` to `k` by one complex
//! multiply with `e^{i·t_m}`; every [`RESEED_INTERVAL`] harmonics the phasor
//! is re-evaluated exactly so rounding drift stays below 1e-12. Events are
//! processed in cache-sized blocks with fixed-width lane accumulators, and
//! the per-block partial sums are folded into compensated accumulators.

use crate::numeric::CompensatedSum;

pub const RESEED_INTERVAL: usize = 1024;
const BLOCK: usize = 512;
const LANES: usize = 8;

/// Eight events worth of phasor state, stored together so one group is a
/// few cache lines.
#[derive(Clone, Copy, Default)]
#[repr(C, align(64))]
struct Group {
    z_re: [f64; LANES],
    z_im: [f64; LANES],
    step_re: [f64; LANES],
    step_im: [f64; LANES],
    weight: [f64; LANES],
    time: [f64; LANES],
}

/// One block of events, padded to whole groups with zero-weight entries.
#[derive(Default)]
struct Block {
    groups: Vec<Group>,
}

impl Block {
    fn load(&mut self, times: &[f64], weights: &[f64]) {
        self.groups.clear();
        for (tc, wc) in times.chunks(LANES).zip(weights.chunks(LANES)) {
            let mut g = Group::default();
            g.time[..tc.len()].copy_from_slice(tc);
            g.weight[..wc.len()].copy_from_slice(wc);
            for l in 0..LANES {
                (g.step_im[l], g.step_re[l]) = g.time[l].sin_cos();
            }
            self.groups.push(g);
        }
    }

    fn reseed(&mut self, k: usize) {
        let k = k as f64;
        for g in &mut self.groups {
            for l in 0..LANES {
                (g.z_im[l], g.z_re[l]) = (k * g.time[l]).sin_cos();
            }
        }
    }

    fn current(&self) -> (f64, f64) {
        let mut acc_re = [0.0f64; LANES];
        let mut acc_im = [0.0f64; LANES];
        for g in &self.groups {
            for l in 0..LANES {
                acc_re[l] += g.weight[l] * g.z_re[l];
                acc_im[l] += g.weight[l] * g.z_im[l];
            }
        }
        (lane_sum(&acc_re), lane_sum(&acc_im))
    }

    /// Rotate every phasor by one harmonic and return the weighted sum.
    fn advance(&mut self, simd: bool) -> (f64, f64) {
        #[cfg(target_arch = "x86_64")]
        if simd {
            // SAFETY: `simd` is only set after runtime detection of AVX2 and FMA.
            return unsafe { self.advance_avx2() };
        }
        let _ = simd;
        self.advance_scalar()
    }

    fn advance_scalar(&mut self) -> (f64, f64) {
        let mut acc_re = [0.0f64; LANES];
        let mut acc_im = [0.0f64; LANES];
        for g in &mut self.groups {
            for l in 0..LANES {
                let re = g.z_re[l] * g.step_re[l] - g.z_im[l] * g.step_im[l];
                let im = g.z_re[l] * g.step_im[l] + g.z_im[l] * g.step_re[l];
                g.z_re[l] = re;
                g.z_im[l] = im;
                acc_re[l] += g.weight[l] * re;
                acc_im[l] += g.weight[l] * im;
            }
        }
        (lane_sum(&acc_re), lane_sum(&acc_im))
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2,fma")]
    unsafe fn advance_avx2(&mut self) -> (f64, f64) {
        use std::arch::x86_64::*;
        let mut ar0 = _mm256_setzero_pd();
        let mut ar1 = _mm256_setzero_pd();
        let mut ai0 = _mm256_setzero_pd();
        let mut ai1 = _mm256_setzero_pd();
        for g in &mut self.groups {
            let zr = g.z_re.as_mut_ptr();
            let zi = g.z_im.as_mut_ptr();
            let sr = g.step_re.as_ptr();
            let si = g.step_im.as_ptr();
            let w = g.weight.as_ptr();
            let zr0 = _mm256_load_pd(zr);
            let zr1 = _mm256_load_pd(zr.add(4));
            let zi0 = _mm256_load_pd(zi);
            let zi1 = _mm256_load_pd(zi.add(4));
            let sr0 = _mm256_load_pd(sr);
            let sr1 = _mm256_load_pd(sr.add(4));
            let si0 = _mm256_load_pd(si);
            let si1 = _mm256_load_pd(si.add(4));
            let re0 = _mm256_fmsub_pd(zr0, sr0, _mm256_mul_pd(zi0, si0));
            let re1 = _mm256_fmsub_pd(zr1, sr1, _mm256_mul_pd(zi1, si1));
            let im0 = _mm256_fmadd_pd(zr0, si0, _mm256_mul_pd(zi0, sr0));
            let im1 = _mm256_fmadd_pd(zr1, si1, _mm256_mul_pd(zi1, sr1));
            _mm256_store_pd(zr, re0);
            _mm256_store_pd(zr.add(4), re1);
            _mm256_store_pd(zi, im0);
            _mm256_store_pd(zi.add(4), im1);
            let w0 = _mm256_load_pd(w);
            let w1 = _mm256_load_pd(w.add(4));
            ar0 = _mm256_fmadd_pd(w0, re0, ar0);
            ar1 = _mm256_fmadd_pd(w1, re1, ar1);
            ai0 = _mm256_fmadd_pd(w0, im0, ai0);
            ai1 = _mm256_fmadd_pd(w1, im1, ai1);
        }
        let mut acc_re = [0.0f64; LANES];
        let mut acc_im = [0.0f64; LANES];
        _mm256_storeu_pd(acc_re.as_mut_ptr(), ar0);
        _mm256_storeu_pd(acc_re.as_mut_ptr().add(4), ar1);
        _mm256_storeu_pd(acc_im.as_mut_ptr(), ai0);
        _mm256_storeu_pd(acc_im.as_mut_ptr().add(4), ai1);
        (lane_sum(&acc_re), lane_sum(&acc_im))
    }
}

fn simd_available() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

#[inline]
fn lane_sum(a: &[f64; LANES]) -> f64 {
    ((a[0] + a[1]) + (a[2] + a[3])) + ((a[4] + a[5]) + (a[6] + a[7]))
}

/// Real and imaginary parts of `Σ_m w_m·e^{i·k·t_m}` for `k = 1..=harmonics`.
pub fn harmonic_sums(times: &[f64], weights: &[f64], harmonics: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(times.len(), weights.len());
    let mut sum_re = vec![CompensatedSum::new(); harmonics];
    let mut sum_im = vec![CompensatedSum::new(); harmonics];
    let simd = simd_available();
    let mut block = Block::default();
    for (tb, wb) in times.chunks(BLOCK).zip(weights.chunks(BLOCK)) {
        block.load(tb, wb);
        for k in 1..=harmonics {
            let (re, im) = if (k - 1) % RESEED_INTERVAL == 0 {
                block.reseed(k);
                block.current()
            } else {
                block.advance(simd)
            };
            sum_re[k - 1].add(re);
            sum_im[k - 1].add(im);
        }
    }
    (sum_re.iter().map(CompensatedSum::value).collect(), sum_im.iter().map(CompensatedSum::value).collect())
}
