//! Sections and their `(Ω, k)` spectra.
//!
//! The forward transform is the discrete analogue of
//! `S(Ω, k) = Σ_τ Σ_x P(τ, x) e^{+i(Ωτ − kx)}` with `τ` and `x` counted from the
//! grid origin; the inverse carries the `1/(N_Ω N_k)` factor. Bin frequencies
//! follow the usual FFT ordering (non-negative first, then negative; an even
//! length puts its Nyquist bin on the negative side).

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{DmoError, Result};
use crate::kernel::{self, FkPoint, OperatorKind, Validity};

/// Axes of a common-offset section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub n_t: usize,
    pub n_x: usize,
    /// Time sample interval (s).
    pub dt: f64,
    /// Midpoint spacing (m).
    pub dx: f64,
    pub t_start: f64,
    pub x_start: f64,
    /// Half-offset (m).
    pub h: f64,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_t < 2 || self.n_x < 2 {
            return Err(DmoError::invalid(
                "geometry",
                format!("needs at least 2x2 samples, got {}x{}", self.n_t, self.n_x),
            ));
        }
        for (name, v) in [("dt", self.dt), ("dx", self.dx)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DmoError::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(DmoError::invalid("h", format!("half-offset must be finite and >= 0, got {}", self.h)));
        }
        if !self.t_start.is_finite() || !self.x_start.is_finite() {
            return Err(DmoError::invalid("geometry", "origin must be finite"));
        }
        Ok(())
    }

    pub fn time(&self, it: usize) -> f64 {
        self.t_start + it as f64 * self.dt
    }

    pub fn midpoint(&self, ix: usize) -> f64 {
        self.x_start + ix as f64 * self.dx
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_t - 1)
    }
}

/// Real section, stored trace by trace (`data[ix * n_t + it]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub geom: Geometry,
    pub data: Vec<f64>,
}

impl Section {
    pub fn new(geom: Geometry, data: Vec<f64>) -> Result<Self> {
        geom.validate()?;
        if data.len() != geom.n_t * geom.n_x {
            return Err(DmoError::invalid(
                "section",
                format!("expected {} samples, got {}", geom.n_t * geom.n_x, data.len()),
            ));
        }
        Ok(Section { geom, data })
    }

    pub fn zeros(geom: Geometry) -> Result<Self> {
        Section::new(geom, vec![0.0; geom.n_t * geom.n_x])
    }

    pub fn trace(&self, ix: usize) -> &[f64] {
        let n = self.geom.n_t;
        &self.data[ix * n..(ix + 1) * n]
    }

    pub fn trace_mut(&mut self, ix: usize) -> &mut [f64] {
        let n = self.geom.n_t;
        &mut self.data[ix * n..(ix + 1) * n]
    }

    pub fn get(&self, it: usize, ix: usize) -> f64 {
        self.data[ix * self.geom.n_t + it]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// A section on a uniform log-time axis, `t = t_c e^τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSection {
    pub n_tau: usize,
    pub n_x: usize,
    pub dtau: f64,
    pub tau_start: f64,
    pub t_c: f64,
    pub dx: f64,
    pub x_start: f64,
    pub h: f64,
    /// Trace by trace, `data[ix * n_tau + j]`.
    pub data: Vec<f64>,
}

impl LogSection {
    pub fn trace(&self, ix: usize) -> &[f64] {
        &self.data[ix * self.n_tau..(ix + 1) * self.n_tau]
    }
}

/// Zero padding appended after the last log-time sample and the last trace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Padding {
    pub rows: usize,
    pub cols: usize,
}

/// Complex `(Ω, k)` grid, stored column by column (`data[ik * n_omega + iw]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n_omega: usize,
    pub n_k: usize,
    /// Frequency step, radians per unit log-time.
    pub d_omega: f64,
    /// Wavenumber step (rad/m).
    pub dk: f64,
    pub h: f64,
    pub data: Vec<Complex64>,
    /// Log-time section the spectrum came from; the inverse crops back to it.
    pub origin: SpectrumOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOrigin {
    pub n_tau: usize,
    pub n_x: usize,
    pub dtau: f64,
    pub tau_start: f64,
    pub t_c: f64,
    pub dx: f64,
    pub x_start: f64,
}

impl Spectrum {
    pub fn omega(&self, iw: usize) -> f64 {
        signed_index(iw, self.n_omega) as f64 * self.d_omega
    }

    pub fn k(&self, ik: usize) -> f64 {
        signed_index(ik, self.n_k) as f64 * self.dk
    }

    pub fn get(&self, iw: usize, ik: usize) -> Complex64 {
        self.data[ik * self.n_omega + iw]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// What the filter does where an operator is singular.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SingularPolicy {
    /// Zero the bin.
    #[default]
    Zero,
    /// Pass the bin through unchanged.
    HoldMagnitudeZeroPhase,
}

/// FFT-order index to signed frequency index.
pub fn signed_index(i: usize, n: usize) -> isize {
    if 2 * i < n {
        i as isize
    } else {
        i as isize - n as isize
    }
}

/// Smallest `m ≥ n` whose only prime factors are 2, 3 and 5.
pub fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

struct Plans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

fn plans(planner: &mut FftPlanner<f64>, n: usize) -> Plans {
    Plans { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
}

/// Column-major `rows x cols` to column-major `cols x rows`.
fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(cols).enumerate().for_each(|(r, row)| {
        for (c, v) in row.iter_mut().enumerate() {
            *v = data[c * rows + r];
        }
    });
    out
}

fn run_columns(data: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(len).for_each(|col| fft.process(col));
}

pub fn forward_fk(sec: &LogSection, pad: Padding) -> Result<Spectrum> {
    if sec.n_tau == 0 || sec.n_x == 0 || sec.data.is_empty() {
        return Err(DmoError::invalid("section", "grid is empty"));
    }
    if sec.data.len() != sec.n_tau * sec.n_x {
        return Err(DmoError::invalid("section", "sample count does not match dimensions"));
    }
    let n_omega = next_fast_len(sec.n_tau + pad.rows);
    let n_k = next_fast_len(sec.n_x + pad.cols);
    let mut planner = FftPlanner::new();
    let tau_plans = plans(&mut planner, n_omega);
    let x_plans = plans(&mut planner, n_k);

    let mut data = vec![Complex64::new(0.0, 0.0); n_omega * n_k];
    for ix in 0..sec.n_x {
        let col = &mut data[ix * n_omega..ix * n_omega + sec.n_tau];
        for (c, &v) in col.iter_mut().zip(sec.trace(ix)) {
            c.re = v;
        }
    }
    // e^{+iΩτ} along τ, then e^{-ikx} along x.
    run_columns(&mut data, n_omega, &tau_plans.inv);
    let mut rows = transpose(&data, n_omega, n_k);
    run_columns(&mut rows, n_k, &x_plans.fwd);
    let data = transpose(&rows, n_k, n_omega);

    Ok(Spectrum {
        n_omega,
        n_k,
        d_omega: 2.0 * std::f64::consts::PI / (n_omega as f64 * sec.dtau),
        dk: 2.0 * std::f64::consts::PI / (n_k as f64 * sec.dx),
        h: sec.h,
        data,
        origin: SpectrumOrigin {
            n_tau: sec.n_tau,
            n_x: sec.n_x,
            dtau: sec.dtau,
            tau_start: sec.tau_start,
            t_c: sec.t_c,
            dx: sec.dx,
            x_start: sec.x_start,
        },
    })
}

/// Largest tolerated `‖Im‖ / ‖Re‖` of the inverse before it is declared non-real.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-10;

/// Inverse transform, cropped to the original log-time grid.
///
/// Fails if the spectrum is not Hermitian enough for the output to be real.
pub fn inverse_fk(sp: &Spectrum) -> Result<LogSection> {
    let (full, residual) = inverse_fk_complex(sp)?;
    if residual > IMAG_RESIDUAL_TOL {
        return Err(DmoError::invalid(
            "spectrum",
            format!("not Hermitian: imaginary residual {residual:.3e} of output norm"),
        ));
    }
    let o = sp.origin;
    let mut data = Vec::with_capacity(o.n_tau * o.n_x);
    for ix in 0..o.n_x {
        data.extend(full[ix * sp.n_omega..ix * sp.n_omega + o.n_tau].iter().map(|c| c.re));
    }
    Ok(LogSection {
        n_tau: o.n_tau,
        n_x: o.n_x,
        dtau: o.dtau,
        tau_start: o.tau_start,
        t_c: o.t_c,
        dx: o.dx,
        x_start: o.x_start,
        h: sp.h,
        data,
    })
}

/// Uncropped complex inverse and its relative imaginary residual.
pub fn inverse_fk_complex(sp: &Spectrum) -> Result<(Vec<Complex64>, f64)> {
    if sp.data.is_empty() || sp.data.len() != sp.n_omega * sp.n_k {
        return Err(DmoError::invalid("spectrum", "grid is empty or inconsistent"));
    }
    let mut planner = FftPlanner::new();
    let tau_plans = plans(&mut planner, sp.n_omega);
    let x_plans = plans(&mut planner, sp.n_k);

    let mut rows = transpose(&sp.data, sp.n_omega, sp.n_k);
    run_columns(&mut rows, sp.n_k, &x_plans.inv);
    let mut data = transpose(&rows, sp.n_k, sp.n_omega);
    run_columns(&mut data, sp.n_omega, &tau_plans.fwd);
    let scale = 1.0 / (sp.n_omega * sp.n_k) as f64;
    data.iter_mut().for_each(|c| *c *= scale);

    let re: f64 = data.iter().map(|c| c.re * c.re).sum();
    let im: f64 = data.iter().map(|c| c.im * c.im).sum();
    let residual = if im == 0.0 { 0.0 } else { (im / re).sqrt() };
    Ok((data, residual))
}

/// Filter factor `amplitude · e^{iΦ}` at a bin with explicit frequencies.
fn factor(op: OperatorKind, policy: SingularPolicy, omega: f64, k: f64, h: f64) -> Complex64 {
    let r = kernel::evaluate(op, FkPoint { omega, k, h });
    match r.validity {
        Validity::Valid => Complex64::from_polar(r.amplitude, r.phase),
        Validity::Singular | Validity::OutOfDomain => match policy {
            SingularPolicy::Zero => Complex64::new(0.0, 0.0),
            SingularPolicy::HoldMagnitudeZeroPhase => Complex64::new(1.0, 0.0),
        },
    }
}

/// Multiply every bin by the operator's factor.
///
/// Only bins with `Ω > 0` are evaluated; their mirrors `(−Ω, −k)` receive the
/// conjugate, so a Hermitian input stays exactly Hermitian. The Nyquist row is
/// its own mirror and keeps the gain without the phase, which leaves it even
/// in `k` and real.
pub fn apply_phase_filter(sp: &Spectrum, op: OperatorKind, policy: SingularPolicy) -> Spectrum {
    let (n_w, n_k) = (sp.n_omega, sp.n_k);
    let mut out = sp.clone();
    let bin_factor = |iw: usize, ik: usize| -> Complex64 {
        let mw = (n_w - iw) % n_w;
        let mk = (n_k - ik) % n_k;
        if iw == 0 {
            Complex64::new(1.0, 0.0)
        } else if iw < mw {
            factor(op, policy, sp.omega(iw), sp.k(ik), sp.h)
        } else if iw > mw {
            factor(op, policy, sp.omega(mw), sp.k(mk), sp.h).conj()
        } else {
            Complex64::new(factor(op, policy, sp.omega(iw).abs(), sp.k(ik), sp.h).norm(), 0.0)
        }
    };
    out.data.par_chunks_mut(n_w).enumerate().for_each(|(ik, col)| {
        for (iw, c) in col.iter_mut().enumerate() {
            *c *= bin_factor(iw, ik);
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn log_section(n_tau: usize, n_x: usize, data: Vec<f64>) -> LogSection {
        LogSection { n_tau, n_x, dtau: 0.01, tau_start: 0.0, t_c: 0.1, dx: 10.0, x_start: 0.0, h: 100.0, data }
    }

    fn random_section(rng: &mut ChaCha8Rng, n_tau: usize, n_x: usize) -> LogSection {
        let data = (0..n_tau * n_x).map(|_| rng.random_range(-1.0..1.0)).collect();
        log_section(n_tau, n_x, data)
    }

    /// Direct O(N²) evaluation of the forward sum.
    fn naive_dft(sec: &LogSection, iw: usize, ik: usize, n_w: usize, n_k: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ix in 0..sec.n_x {
            for j in 0..sec.n_tau {
                let ph = 2.0 * std::f64::consts::PI * ((iw * j) as f64 / n_w as f64 - (ik * ix) as f64 / n_k as f64);
                acc += Complex64::from_polar(sec.trace(ix)[j], ph);
            }
        }
        acc
    }

    #[test]
    fn fast_lengths() {
        assert_eq!(next_fast_len(1024), 1024);
        assert_eq!(next_fast_len(1025), 1080);
        assert_eq!(next_fast_len(7), 8);
        assert_eq!(next_fast_len(11), 12);
        assert_eq!(next_fast_len(0), 1);
    }

    #[test]
    fn signed_indices() {
        let got: Vec<isize> = (0..6).map(|i| signed_index(i, 6)).collect();
        assert_eq!(got, vec![0, 1, 2, -3, -2, -1]);
        let got: Vec<isize> = (0..5).map(|i| signed_index(i, 5)).collect();
        assert_eq!(got, vec![0, 1, 2, -2, -1]);
    }

    #[test]
    fn zero_in_zero_out() {
        let sp = forward_fk(&log_section(8, 4, vec![0.0; 32]), Padding::default()).unwrap();
        assert!(sp.data.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn impulse_is_flat() {
        let mut data = vec![0.0; 32];
        data[0] = 1.0;
        let sp = forward_fk(&log_section(8, 4, data), Padding::default()).unwrap();
        assert!(sp.data.iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn flat_spectrum_inverts_to_impulse() {
        let sp = forward_fk(&log_section(8, 4, vec![0.0; 32]), Padding::default()).unwrap();
        let flat = Spectrum { data: vec![Complex64::new(1.0, 0.0); 32], ..sp };
        let out = inverse_fk(&flat).unwrap();
        for (i, v) in out.data.iter().enumerate() {
            let want = if i == 0 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_direct_sum_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sec = random_section(&mut rng, 6, 5);
        let sp = forward_fk(&sec, Padding { rows: 3, cols: 1 }).unwrap();
        assert_eq!((sp.n_omega, sp.n_k), (9, 6));
        for iw in 0..sp.n_omega {
            for ik in 0..sp.n_k {
                let want = naive_dft(&sec, iw, ik, sp.n_omega, sp.n_k);
                assert!((sp.get(iw, ik) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pad in [Padding::default(), Padding { rows: 7, cols: 5 }] {
            let sec = random_section(&mut rng, 64, 32);
            let back = inverse_fk(&forward_fk(&sec, pad).unwrap()).unwrap();
            let err = sec.data.iter().zip(&back.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "max abs error {err}");
            assert_eq!(back.n_tau, 64);
            assert_eq!(back.n_x, 32);
        }
    }

    #[test]
    fn conjugate_symmetric_spectrum_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sp0 = forward_fk(&log_section(16, 8, vec![0.0; 128]), Padding::default()).unwrap();
        let mut data = vec![Complex64::new(0.0, 0.0); 128];
        for iw in 0..16 {
            for ik in 0..8 {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let (mw, mk) = ((16 - iw) % 16, (8 - ik) % 8);
                data[ik * 16 + iw] += z;
                data[mk * 16 + mw] += z.conj();
            }
        }
        let sp = Spectrum { data, ..sp0 };
        let (_, residual) = inverse_fk_complex(&sp).unwrap();
        assert!(residual <= 1e-10);
        assert!(inverse_fk(&sp).is_ok());
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let sp0 = forward_fk(&log_section(8, 4, vec![0.0; 32]), Padding::default()).unwrap();
        let mut data = vec![Complex64::new(0.0, 0.0); 32];
        data[1] = Complex64::new(1.0, 0.0);
        assert!(inverse_fk(&Spectrum { data, ..sp0 }).is_err());
    }

    #[test]
    fn rejects_empty() {
        assert!(forward_fk(&log_section(0, 0, vec![]), Padding::default()).is_err());
    }

    #[test]
    fn k_zero_column_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sp = forward_fk(&random_section(&mut rng, 32, 16), Padding::default()).unwrap();
        for op in OperatorKind::ALL {
            let out = apply_phase_filter(&sp, op, SingularPolicy::Zero);
            for iw in 0..sp.n_omega {
                assert_eq!(out.get(iw, 0), sp.get(iw, 0));
            }
        }
    }

    #[test]
    fn x_constant_section_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let column: Vec<f64> = (0..48).map(|_| rng.random_range(-1.0..1.0)).collect();
        let data: Vec<f64> = (0..20).flat_map(|_| column.iter().copied()).collect();
        let sec = log_section(48, 20, data);
        for op in OperatorKind::ALL {
            let sp = forward_fk(&sec, Padding { rows: 16, cols: 0 }).unwrap();
            let back = inverse_fk(&apply_phase_filter(&sp, op, SingularPolicy::Zero)).unwrap();
            let num: f64 = back.data.iter().zip(&sec.data).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = sec.data.iter().map(|b| b * b).sum();
            assert!((num / den).sqrt() <= 1e-9, "{op}");
        }
    }

    #[test]
    fn single_bin_rotation() {
        // Ω = 1, k = 1/h: ξ = 1.
        let sp0 = forward_fk(&log_section(8, 4, vec![0.0; 32]), Padding::default()).unwrap();
        let sp = Spectrum { d_omega: 1.0, dk: 1.0 / 100.0, data: vec![Complex64::new(1.0, 0.0); 32], ..sp0 };
        let out = apply_phase_filter(&sp, OperatorKind::ZhouExact, SingularPolicy::Zero);
        let z = out.get(1, 1);
        assert!((z.norm() - 1.0).abs() < 1e-15);
        assert!((z.arg() - 0.377_428_076_220_093_1).abs() < 1e-15);
    }

    #[test]
    fn bale_zero_policy_kills_singular_bins() {
        let sp0 = forward_fk(&log_section(8, 4, vec![0.0; 32]), Padding::default()).unwrap();
        // ξ = h k / Ω = 100 · 0.015 / 1 = 1.5 at bin (1, 1).
        let sp = Spectrum { d_omega: 1.0, dk: 0.015, data: vec![Complex64::new(1.0, 0.0); 32], ..sp0 };
        let out = apply_phase_filter(&sp, OperatorKind::BaleFull, SingularPolicy::Zero);
        assert_eq!(out.get(1, 1), Complex64::new(0.0, 0.0));
        let held = apply_phase_filter(&sp, OperatorKind::BaleFull, SingularPolicy::HoldMagnitudeZeroPhase);
        assert_eq!(held.get(1, 1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn filtering_keeps_output_real_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n_tau, n_x) in [(64, 32), (45, 27), (30, 15)] {
            let sp = forward_fk(&random_section(&mut rng, n_tau, n_x), Padding::default()).unwrap();
            for op in OperatorKind::ALL {
                let out = apply_phase_filter(&sp, op, SingularPolicy::Zero);
                let (_, residual) = inverse_fk_complex(&out).unwrap();
                assert!(residual <= 1e-10, "{op} {n_tau}x{n_x}: residual {residual}");
            }
            // Notfors and exact are unit-amplitude and never singular.
            for op in [OperatorKind::Notfors, OperatorKind::ZhouExact] {
                let out = apply_phase_filter(&sp, op, SingularPolicy::Zero);
                let rel = (out.energy() - sp.energy()).abs() / sp.energy();
                assert!(rel <= 1e-12, "{op}: energy drift {rel}");
            }
        }
    }
}
