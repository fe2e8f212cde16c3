//! Logarithmic time stretch `τ = ln(t / t_c)` and its inverse.
//!
//! Resampling uses an 8-point Kaiser-windowed sinc with weights normalised to
//! unit sum, so constants map to constants exactly. Taps that fall outside the
//! trace read the nearest edge sample.

use std::f64::consts::PI;

use crate::error::{DmoError, Result};

/// Interpolator support in samples.
pub const SINC_TAPS: usize = 8;
const HALF_TAPS: isize = (SINC_TAPS / 2) as isize;
/// Kaiser window shape parameter.
pub const KAISER_BETA: f64 = 6.0;

/// Uniformly sampled time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub samples: Vec<f64>,
    /// Sample interval (s).
    pub dt: f64,
    /// Time of the first sample (s), strictly positive.
    pub t_start: f64,
}

impl Trace {
    pub fn new(samples: Vec<f64>, dt: f64, t_start: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(DmoError::invalid("trace", "needs at least two samples"));
        }
        check_positive("dt", dt)?;
        check_positive("t_start", t_start)?;
        Ok(Trace { samples, dt, t_start })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + (self.len() - 1) as f64 * self.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }
}

/// A trace resampled onto a uniform log-time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchedTrace {
    pub samples: Vec<f64>,
    /// Log-time sample interval (dimensionless).
    pub dtau: f64,
    pub tau_start: f64,
    /// Cutoff time `t_c` (s).
    pub t_c: f64,
}

impl StretchedTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn tau_end(&self) -> f64 {
        self.tau_start + (self.len() - 1) as f64 * self.dtau
    }

    /// Time of log-time sample `j`.
    pub fn time(&self, j: usize) -> f64 {
        self.t_c * (self.tau_start + j as f64 * self.dtau).exp()
    }
}

/// Regular output time axis for [`inverse_log_stretch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub dt: f64,
    pub n: usize,
}

/// Smallest power of two at least twice `n`.
pub fn default_n_tau(n: usize) -> usize {
    (2 * n).next_power_of_two()
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DmoError::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    while term > 1e-17 * sum {
        term *= q / (m * m);
        sum += term;
        m += 1.0;
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Band-limited value of `samples` at fractional index `pos`.
pub fn interpolate(samples: &[f64], pos: f64) -> f64 {
    let n = samples.len() as isize;
    let base = pos.floor();
    let frac = pos - base;
    let base = base as isize;
    if frac == 0.0 {
        return samples[base.clamp(0, n - 1) as usize];
    }
    let norm = bessel_i0(KAISER_BETA);
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for j in (1 - HALF_TAPS)..=HALF_TAPS {
        let d = frac - j as f64;
        let r = d / HALF_TAPS as f64;
        let w = sinc(d) * bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / norm;
        acc += w * samples[(base + j).clamp(0, n - 1) as usize];
        wsum += w;
    }
    acc / wsum
}

/// Resample `tr` onto `n_tau` uniform log-time samples spanning its time range.
pub fn log_stretch(tr: &Trace, t_c: f64, n_tau: usize) -> Result<StretchedTrace> {
    check_positive("t_c", t_c)?;
    if tr.t_start < t_c {
        return Err(DmoError::invalid(
            "t_c",
            format!("cutoff {t_c} s is later than the first sample at {} s", tr.t_start),
        ));
    }
    if n_tau < 2 {
        return Err(DmoError::invalid("n_tau", "needs at least two log-time samples"));
    }
    let tau_start = (tr.t_start / t_c).ln();
    let tau_end = (tr.t_end() / t_c).ln();
    let dtau = (tau_end - tau_start) / (n_tau - 1) as f64;
    let last = (tr.len() - 1) as f64;
    let samples = (0..n_tau)
        .map(|j| {
            let t = t_c * (tau_start + j as f64 * dtau).exp();
            let pos = ((t - tr.t_start) / tr.dt).clamp(0.0, last);
            interpolate(&tr.samples, pos)
        })
        .collect();
    Ok(StretchedTrace { samples, dtau, tau_start, t_c })
}

/// Resample a log-time trace back onto a regular time grid.
///
/// Output times may overhang the stretched range by at most one output sample;
/// such samples read the clamped edge.
pub fn inverse_log_stretch(st: &StretchedTrace, grid: TimeGrid) -> Result<Trace> {
    if grid.n == 0 {
        return Err(DmoError::invalid("output grid", "is empty"));
    }
    check_positive("dt", grid.dt)?;
    check_positive("t_start", grid.t_start)?;
    let lo = st.time(0);
    let hi = st.time(st.len() - 1);
    let t_end = grid.t_start + (grid.n - 1) as f64 * grid.dt;
    if grid.t_start < lo - grid.dt || t_end > hi + grid.dt {
        return Err(DmoError::invalid(
            "output grid",
            format!("[{}, {t_end}] s is not covered by the stretched range [{lo}, {hi}] s", grid.t_start),
        ));
    }
    let last = (st.len() - 1) as f64;
    let samples = (0..grid.n)
        .map(|i| {
            let t = grid.t_start + i as f64 * grid.dt;
            let pos = (((t / st.t_c).ln() - st.tau_start) / st.dtau).clamp(0.0, last);
            interpolate(&st.samples, pos)
        })
        .collect();
    Ok(Trace { samples, dt: grid.dt, t_start: grid.t_start })
}
