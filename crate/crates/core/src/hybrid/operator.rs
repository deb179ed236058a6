//! One backward IMEX step of the local PIDE in `y = ln F` at a frozen rate.
//!
//! Diffusion and advection are implicit (one tridiagonal solve), the jump
//! operator `sum_k w_k v_{i+k} - lambda_eps v_i` is explicit, and the discount
//! `exp(-r dt)` multiplies the result. The explicit part is monotone when
//! `lambda_eps dt <= 1`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::levy::JumpDiscretization;

/// Widest stencil (in grid points) summed directly; wider ones use the FFT.
pub const DIRECT_STENCIL_MAX: usize = 128;

#[derive(Clone)]
enum Convolver {
    None,
    Direct {
        offsets: Vec<isize>,
        weights: Vec<f64>,
    },
    Fft {
        size: usize,
        half: usize,
        spectrum: Vec<Complex64>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Convolver::None => write!(f, "None"),
            Convolver::Direct { offsets, .. } => write!(f, "Direct({} taps)", offsets.len()),
            Convolver::Fft { size, half, .. } => write!(f, "Fft(size {size}, half {half})"),
        }
    }
}

fn fast_size(min: usize) -> usize {
    let mut best = min.next_power_of_two();
    let mut p2 = 1usize;
    while p2 < best {
        let mut p3 = p2;
        while p3 < best {
            let mut p5 = p3;
            while p5 < min {
                p5 *= 5;
            }
            best = best.min(p5);
            p3 *= 3;
        }
        p2 *= 2;
    }
    best
}

impl Convolver {
    fn new(jumps: &JumpDiscretization, len: usize) -> Self {
        let k = jumps.max_offset as isize;
        let taps: Vec<(isize, f64)> = (-k..=k)
            .filter(|&o| o != 0)
            .map(|o| (o, jumps.weight(o)))
            .filter(|(_, w)| *w > 0.0)
            .collect();
        if taps.is_empty() {
            return Convolver::None;
        }
        let half = taps.iter().map(|(o, _)| o.unsigned_abs()).max().unwrap_or(0);
        if 2 * half + 1 <= DIRECT_STENCIL_MAX {
            return Convolver::Direct {
                offsets: taps.iter().map(|t| t.0).collect(),
                weights: taps.iter().map(|t| t.1).collect(),
            };
        }
        let size = fast_size(len + 2 * half);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); size];
        let scale = 1.0 / size as f64;
        for (o, w) in &taps {
            let s = (-o).rem_euclid(size as isize) as usize;
            spectrum[s] = Complex64::new(w * scale, 0.0);
        }
        forward.process(&mut spectrum);
        Convolver::Fft {
            size,
            half,
            spectrum,
            forward,
            inverse,
        }
    }

    /// `out_i += dt * sum_k w_k v_{i+k}` with `v` extended by its end values.
    fn accumulate(&self, rows: [&[f64]; 2], outs: [&mut [f64]; 2], count: usize, dt: f64) {
        match self {
            Convolver::None => {}
            Convolver::Direct { offsets, weights } => {
                for (row, out) in rows.iter().zip(outs).take(count) {
                    let n = row.len() as isize;
                    for (i, o) in out.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for (off, w) in offsets.iter().zip(weights) {
                            let idx = (i as isize + off).clamp(0, n - 1) as usize;
                            acc += w * row[idx];
                        }
                        *o += dt * acc;
                    }
                }
            }
            Convolver::Fft {
                size,
                half,
                spectrum,
                forward,
                inverse,
            } => {
                let n = rows[0].len();
                let mut buf = vec![Complex64::new(0.0, 0.0); *size];
                let mut scratch =
                    vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
                let padded = n + 2 * half;
                let at = |row: &[f64], t: usize| row[t.saturating_sub(*half).min(n - 1)];
                for (t, b) in buf.iter_mut().take(padded).enumerate() {
                    let im = if count > 1 { at(rows[1], t) } else { 0.0 };
                    *b = Complex64::new(at(rows[0], t), im);
                }
                forward.process_with_scratch(&mut buf, &mut scratch);
                for (b, s) in buf.iter_mut().zip(spectrum) {
                    *b *= s;
                }
                inverse.process_with_scratch(&mut buf, &mut scratch);
                let [out0, out1] = outs;
                for i in 0..n {
                    out0[i] += dt * buf[i + half].re;
                }
                if count > 1 {
                    for i in 0..n {
                        out1[i] += dt * buf[i + half].im;
                    }
                }
            }
        }
    }
}

/// Backward IMEX stepper for a fixed grid, model and time step.
#[derive(Debug, Clone)]
pub struct ImexStepper {
    len: usize,
    dy: f64,
    dt: f64,
    /// `(sigma^2 + sigma_eps^2) / 2`.
    diffusion: f64,
    /// `sum_k w_k (e^{k dy} - 1)`, growth of `exp(y)` under the jump sum.
    jump_growth: f64,
    lambda: f64,
    convolver: Convolver,
}

impl ImexStepper {
    pub fn new(len: usize, dy: f64, dt: f64, gaussian_sigma: f64, jumps: &JumpDiscretization) -> Self {
        let s2 = gaussian_sigma * gaussian_sigma;
        Self {
            len,
            dy,
            dt,
            diffusion: 0.5 * (s2 + jumps.sigma_eps_sq),
            jump_growth: jumps.drift_comp,
            lambda: jumps.lambda_eps,
            convolver: Convolver::new(jumps, len),
        }
    }

    /// Whether the jump sum goes through the FFT.
    pub fn jump_intensity(&self) -> f64 {
        self.lambda
    }

    pub fn uses_fft(&self) -> bool {
        matches!(self.convolver, Convolver::Fft { .. })
    }

    fn coefficients(&self, rate: f64, qhat: f64) -> (f64, f64, f64) {
        let dt = self.dt;
        let dy = self.dy;
        let d = self.diffusion / (dy * dy);
        // Growth of exp(y) through one step is (1 + dt J) / (1 + dt (d c0 - a g)),
        // with g depending on the stencil; pick `a` so that it equals exp((r - qhat) dt).
        let c0 = 2.0 - 2.0 * dy.cosh();
        let target = (1.0 + dt * self.jump_growth) * (-(rate - qhat) * dt).exp();
        let excess = (1.0 + dt * d * c0 - target) / dt;
        let a = excess * dy / dy.sinh();
        let (lo, up) = if self.diffusion > 0.0 && a.abs() * dy <= 2.0 * self.diffusion {
            (d - 0.5 * a / dy, d + 0.5 * a / dy)
        } else if a > 0.0 {
            (d, d + excess / dy.exp_m1())
        } else {
            (d - excess / (-(-dy).exp_m1()), d)
        };
        (dt * lo, 1.0 + dt * (lo + up), dt * up)
    }

    /// Advances up to two rows one step backward. `rows[i]` holds the
    /// rate-averaged values, `outs[i]` receives the new row.
    pub fn step(
        &self,
        rows: [&[f64]; 2],
        outs: [&mut [f64]; 2],
        rates: [f64; 2],
        qhat: f64,
        count: usize,
    ) {
        let [out0, out1] = outs;
        let keep = 1.0 - self.dt * self.lambda;
        for (o, v) in out0.iter_mut().zip(rows[0]) {
            *o = keep * v;
        }
        if count > 1 {
            for (o, v) in out1.iter_mut().zip(rows[1]) {
                *o = keep * v;
            }
        }
        self.convolver.accumulate(rows, [&mut *out0, &mut *out1], count, self.dt);
        let mut work = vec![0.0; self.len];
        for (c, out) in [out0, out1].into_iter().enumerate().take(count) {
            self.solve(out, rows[c], rates[c], qhat, &mut work);
        }
    }

    /// Tridiagonal solve in place on `rhs`, boundaries pinned to `row` ends,
    /// then discounting.
    fn solve(&self, rhs: &mut [f64], row: &[f64], rate: f64, qhat: f64, cp: &mut [f64]) {
        let n = self.len;
        let (lo, diag, up) = self.coefficients(rate, qhat);
        debug_assert!(
            lo >= 0.0 && up >= 0.0 && diag >= (1.0 + lo + up) * (1.0 - 1e-12),
            "IMEX matrix lost diagonal dominance"
        );
        rhs[0] = row[0];
        rhs[n - 1] = row[n - 1];
        if n > 2 {
            rhs[1] += lo * rhs[0];
            rhs[n - 2] += up * rhs[n - 1];
            cp[1] = -up / diag;
            rhs[1] /= diag;
            for i in 2..n - 1 {
                let denom = diag + lo * cp[i - 1];
                cp[i] = -up / denom;
                rhs[i] = (rhs[i] + lo * rhs[i - 1]) / denom;
            }
            for i in (1..n - 2).rev() {
                rhs[i] -= cp[i] * rhs[i + 1];
            }
        }
        let disc = (-rate * self.dt).exp();
        for v in rhs.iter_mut() {
            *v *= disc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{discretize_jumps, LevyModel};

    fn stepper(model: &LevyModel, dy: f64, len: usize, dt: f64, bound: f64) -> ImexStepper {
        let jd = discretize_jumps(model, dy, dy, bound).unwrap();
        ImexStepper::new(len, dy, dt, model.gaussian_sigma(), &jd)
    }

    fn single(st: &ImexStepper, row: &[f64], r: f64, q: f64) -> Vec<f64> {
        let mut out = vec![0.0; row.len()];
        let mut spare = vec![0.0; row.len()];
        st.step([row, row], [&mut out, &mut spare], [r, r], q, 1);
        out
    }

    #[test]
    fn fast_sizes() {
        assert_eq!(fast_size(1000), 1000);
        assert_eq!(fast_size(1001), 1024);
        assert_eq!(fast_size(4801), 4860);
        for n in [7, 97, 3001, 12345] {
            let s = fast_size(n);
            assert!(s >= n);
            let mut m = s;
            for p in [2, 3, 5] {
                while m % p == 0 {
                    m /= p;
                }
            }
            assert_eq!(m, 1);
        }
    }

    #[test]
    fn zero_and_constant_rows() {
        let model = LevyModel::nig(6.0, -0.4, 2.0).unwrap();
        let st = stepper(&model, 0.01, 801, 0.1, 2.0);
        assert!(st.uses_fft());
        let zero = single(&st, &vec![0.0; 801], 0.05, 0.03);
        assert!(zero.iter().all(|v| *v == 0.0));
        let ones = single(&st, &vec![1.0; 801], 0.05, 0.03);
        let disc = (-0.005f64).exp();
        for v in &ones {
            assert!((v - disc).abs() < 1e-12, "{v}");
        }
        assert!((disc - 1.0 / 1.005).abs() < 0.005f64.powi(2));
    }

    #[test]
    fn exponential_row_grows_at_the_carry_rate() {
        let model = LevyModel::mjd(0.12, 0.6, -0.1, 0.15).unwrap();
        let dy = 0.005;
        let len = 2401;
        let y0 = -6.0;
        let row: Vec<f64> = (0..len).map(|i| (y0 + i as f64 * dy).exp()).collect();
        let (r, q, dt) = (0.03, 0.01, 0.01);
        let st = stepper(&model, dy, len, dt, 1.2);
        let out = single(&st, &row, r, q);
        // backward in time the discounted exponential loses the carry drift
        let factor = (-q * dt).exp();
        for i in (len / 2 - 200)..(len / 2 + 200) {
            let rel = out[i] / (row[i] * factor) - 1.0;
            assert!(rel.abs() < 1e-12, "i = {i}, rel = {rel}");
        }
    }

    #[test]
    fn exponential_row_is_exact_at_extreme_carry() {
        let model = LevyModel::nig(6.0, -0.4, 2.0).unwrap();
        let dy = 0.01;
        let len = 1201;
        let row: Vec<f64> = (0..len).map(|i| (-6.0 + i as f64 * dy).exp()).collect();
        let st = stepper(&model, dy, len, 0.1, 2.0);
        for r in [-0.5, 0.02, 1.5] {
            let out = single(&st, &row, r, 0.03);
            let factor = (-0.03f64 * 0.1).exp();
            // upwinding carries the boundary rows inward, so stay clear of the top
            for i in (len / 2 - 300)..len / 2 {
                let rel = out[i] / (row[i] * factor) - 1.0;
                assert!(rel.abs() < 1e-10, "r = {r}, i = {i}, rel = {rel}");
            }
        }
    }

    #[test]
    fn direct_and_fft_convolutions_agree() {
        let model = LevyModel::vg(0.2, -0.1, 0.15).unwrap();
        let len = 600;
        let row_a: Vec<f64> = (0..len).map(|i| ((i as f64) * 0.02).sin().abs() + 0.1).collect();
        let row_b: Vec<f64> = (0..len).map(|i| (i as f64 * 0.01).min(3.0)).collect();
        let jd = discretize_jumps(&model, 0.01, 0.01, 2.0).unwrap();
        let fft = Convolver::new(&jd, len);
        assert!(matches!(fft, Convolver::Fft { .. }));
        let taps: Vec<(isize, f64)> = (-(jd.max_offset as isize)..=jd.max_offset as isize)
            .filter(|&o| o != 0 && jd.weight(o) > 0.0)
            .map(|o| (o, jd.weight(o)))
            .collect();
        let direct = Convolver::Direct {
            offsets: taps.iter().map(|t| t.0).collect(),
            weights: taps.iter().map(|t| t.1).collect(),
        };
        let mut fa = vec![0.0; len];
        let mut fb = vec![0.0; len];
        fft.accumulate([&row_a, &row_b], [&mut fa, &mut fb], 2, 1.0);
        let mut da = vec![0.0; len];
        let mut db = vec![0.0; len];
        direct.accumulate([&row_a, &row_b], [&mut da, &mut db], 2, 1.0);
        for i in 0..len {
            assert!((fa[i] - da[i]).abs() < 1e-9 * da[i].abs().max(1.0));
            assert!((fb[i] - db[i]).abs() < 1e-9 * db[i].abs().max(1.0));
        }
    }

    #[test]
    fn paired_and_single_steps_match() {
        let model = LevyModel::nig(6.0, -0.4, 2.0).unwrap();
        let len = 1001;
        let st = stepper(&model, 0.01, len, 0.1, 2.0);
        let a: Vec<f64> = (0..len).map(|i| (i as f64 * 0.01 - 5.0).exp().clamp(0.5, 3.0)).collect();
        let b: Vec<f64> = (0..len).map(|i| 1.0 + (i as f64 * 0.003).cos()).collect();
        let mut pa = vec![0.0; len];
        let mut pb = vec![0.0; len];
        st.step([&a, &b], [&mut pa, &mut pb], [0.02, 0.05], 0.03, 2);
        let sa = single(&st, &a, 0.02, 0.03);
        let sb = single(&st, &b, 0.05, 0.03);
        for i in 0..len {
            assert!((pa[i] - sa[i]).abs() < 1e-12);
            assert!((pb[i] - sb[i]).abs() < 1e-12);
        }
    }
}
