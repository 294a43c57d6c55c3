//! Small numerical helpers shared by the estimator and the spectral code.

use num_complex::Complex64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Pairwise-compensated dot product `Σ conj(x_k)·y_k`.
pub fn conj_dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    const LANES: usize = 4;
    let mut re = [0.0f64; LANES];
    let mut im = [0.0f64; LANES];
    let mut re_total = CompensatedSum::new();
    let mut im_total = CompensatedSum::new();
    for (xb, yb) in x.chunks(256).zip(y.chunks(256)) {
        re.fill(0.0);
        im.fill(0.0);
        let xc = xb.chunks_exact(LANES);
        let yc = yb.chunks_exact(LANES);
        let (xr, yr) = (xc.remainder(), yc.remainder());
        for (xs, ys) in xc.zip(yc) {
            for l in 0..LANES {
                re[l] += xs[l].re * ys[l].re + xs[l].im * ys[l].im;
                im[l] += xs[l].re * ys[l].im - xs[l].im * ys[l].re;
            }
        }
        for (a, b) in xr.iter().zip(yr) {
            re[0] += a.re * b.re + a.im * b.im;
            im[0] += a.re * b.im - a.im * b.re;
        }
        re_total.add((re[0] + re[1]) + (re[2] + re[3]));
        im_total.add((im[0] + im[1]) + (im[2] + im[3]));
    }
    Complex64::new(re_total.value(), im_total.value())
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}
