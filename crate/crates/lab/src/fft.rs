//! FFT autocorrelation for the discrete seminorm.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use timereg::empirical::Autocorrelation;

/// Zero-padded FFT autocorrelation; plans are cached per length.
pub struct FftAutocorrelation {
    planner: FftPlanner<f64>,
    buffer: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Default for FftAutocorrelation {
    fn default() -> Self {
        Self {
            planner: FftPlanner::new(),
            buffer: Vec::new(),
            scratch: Vec::new(),
        }
    }
}

impl Autocorrelation for FftAutocorrelation {
    fn autocorrelate(&mut self, series: &[f64], out: &mut [f64]) {
        let n = series.len();
        let len = (2 * n).next_power_of_two();
        let forward = self.planner.plan_fft_forward(len);
        let inverse = self.planner.plan_fft_inverse(len);
        self.buffer.clear();
        self.buffer.extend(series.iter().map(|&v| Complex::new(v, 0.0)));
        self.buffer.resize(len, Complex::new(0.0, 0.0));
        let need = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        self.scratch.resize(need, Complex::new(0.0, 0.0));
        forward.process_with_scratch(&mut self.buffer, &mut self.scratch);
        for c in self.buffer.iter_mut() {
            *c = Complex::new(c.norm_sqr(), 0.0);
        }
        inverse.process_with_scratch(&mut self.buffer, &mut self.scratch);
        let scale = 1.0 / len as f64;
        for (o, c) in out.iter_mut().zip(&self.buffer[..n]) {
            *o = c.re * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use timereg::empirical::DirectAutocorrelation;

    #[test]
    fn matches_direct_sums() {
        for n in [1usize, 2, 7, 64, 129] {
            let s: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
            let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
            FftAutocorrelation::default().autocorrelate(&s, &mut a);
            DirectAutocorrelation.autocorrelate(&s, &mut b);
            let scale: f64 = s.iter().map(|v| v * v).sum::<f64>().max(1.0);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12 * scale, "n={n}: {x} vs {y}");
            }
        }
    }
}
