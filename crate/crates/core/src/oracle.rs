//! Independent ground truth in the unstretched `(t, x)` / `(ω, k)` domain.
//!
//! The kinematic maps give the position of a dipping event after DMO as a
//! function of ray parameter `p = k/ω`: Black's relations trace the DMO
//! ellipse, Hale's collapse every dip onto the input midpoint. The direct
//! integrals evaluate the Hale and Black f-k DMO sums by brute-force
//! quadrature and exist only to check the fast path at desk scale.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{DmoError, Result};
use crate::fk::{signed_index, Section};

/// Largest axis length accepted by [`direct_dmo`].
pub const DIRECT_LIMIT: usize = 128;

/// Input event and dip for the kinematic maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicMap {
    /// NMO-corrected time (s), positive.
    pub t_n: f64,
    /// Input midpoint (m).
    pub x_n: f64,
    /// Half-offset (m).
    pub h: f64,
    /// Ray parameter `k/ω` (s/m).
    pub p: f64,
}

/// Output of a kinematic map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPoint {
    pub t_0: f64,
    pub x_0: f64,
    /// `A = √(1 + (h p / t_n)²)`, never below 1.
    pub a: f64,
}

fn a_factor(m: &KinematicMap) -> f64 {
    (m.h * m.p / m.t_n).hypot(1.0)
}

fn check_tn(t_n: f64) -> Result<()> {
    if t_n > 0.0 && t_n.is_finite() {
        Ok(())
    } else {
        Err(DmoError::invalid("t_n", format!("must be finite and > 0, got {t_n}")))
    }
}

/// Black's relations: `t_0 = t_n/A`, `x_0 = x_n − (1/A)(h²/t_n) p`.
pub fn black_map(m: KinematicMap) -> Result<MappedPoint> {
    check_tn(m.t_n)?;
    let a = a_factor(&m);
    Ok(MappedPoint { t_0: m.t_n / a, x_0: m.x_n - m.h * m.h * m.p / (a * m.t_n), a })
}

/// Hale's relations: `t_0 = A t_n`, `x_0 = x_n`.
pub fn hale_map(m: KinematicMap) -> Result<MappedPoint> {
    check_tn(m.t_n)?;
    let a = a_factor(&m);
    Ok(MappedPoint { t_0: a * m.t_n, x_0: m.x_n, a })
}

/// Black's map over `p = tan(θ) t_n / h` for `n` uniform `θ` strictly inside `(−π/2, π/2)`.
pub fn black_sweep(t_n: f64, x_n: f64, h: f64, n: usize) -> Result<Vec<MappedPoint>> {
    check_tn(t_n)?;
    if h.is_nan() || h <= 0.0 {
        return Err(DmoError::invalid("h", "sweep needs h > 0"));
    }
    (0..n)
        .map(|i| {
            let theta = -FRAC_PI_2 + std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            black_map(KinematicMap { t_n, x_n, h, p: theta.tan() * t_n / h })
        })
        .collect()
}

/// The zero-offset impulse ellipse `((x_0 − x_n)/h)² + (t_0/t_n)² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseCurve {
    pub t_n: f64,
    pub x_n: f64,
    pub h: f64,
    /// `(x_0, t_0)` samples, increasing in `x_0`.
    pub points: Vec<(f64, f64)>,
}

impl EllipseCurve {
    /// `t_0` at midpoint `x`, or `None` outside `|x − x_n| ≤ h`.
    pub fn t0_at(&self, x: f64) -> Option<f64> {
        let u = (x - self.x_n) / self.h;
        if u.abs() > 1.0 {
            None
        } else {
            Some(self.t_n * (1.0 - u * u).max(0.0).sqrt())
        }
    }
}

pub fn ellipse(t_n: f64, x_n: f64, h: f64, n_points: usize) -> Result<EllipseCurve> {
    check_tn(t_n)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(DmoError::invalid("h", format!("ellipse needs h > 0, got {h}")));
    }
    if n_points < 2 {
        return Err(DmoError::invalid("n_points", "needs at least two points"));
    }
    let mut curve = EllipseCurve { t_n, x_n, h, points: Vec::with_capacity(n_points) };
    for i in 0..n_points {
        let u = -1.0 + 2.0 * i as f64 / (n_points - 1) as f64;
        let x = x_n + u * h;
        curve.points.push((x, t_n * (1.0 - u * u).max(0.0).sqrt()));
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectMethod {
    /// Weight `1/A`.
    Hale,
    /// Amplitude-preserving weight `(2A² − 1)/A³`.
    Black,
}

impl DirectMethod {
    pub fn weight(self, a: f64) -> f64 {
        match self {
            DirectMethod::Hale => 1.0 / a,
            DirectMethod::Black => (2.0 * a * a - 1.0) / (a * a * a),
        }
    }
}

/// Zero-offset spectrum on explicit `(ω, k)` grids, stored `data[ik * n_omega + iw]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSpectrum {
    pub omegas: Vec<f64>,
    pub ks: Vec<f64>,
    pub data: Vec<Complex64>,
}

impl DirectSpectrum {
    pub fn get(&self, iw: usize, ik: usize) -> Complex64 {
        self.data[ik * self.omegas.len() + iw]
    }
}

/// Angular frequencies of an `n`-point FFT with spacing `d`, in FFT order.
pub fn fft_frequencies(n: usize, d: f64) -> Vec<f64> {
    (0..n).map(|i| 2.0 * std::f64::consts::PI * signed_index(i, n) as f64 / (n as f64 * d)).collect()
}

fn trapezoid(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// `A` at one bin for an event at `t_n`; `1` at `ω = 0`.
pub fn a_at(omega: f64, k: f64, t_n: f64, h: f64) -> f64 {
    if omega == 0.0 {
        1.0
    } else {
        (h * k / (t_n * omega)).hypot(1.0)
    }
}

/// Direct trapezoid quadrature of
/// `∫∫ w(A) e^{i(ω t_n A − k x_n)} P_n(t_n, x_n) dx_n dt_n`.
pub fn direct_dmo(sec: &Section, method: DirectMethod, omegas: &[f64], ks: &[f64]) -> Result<DirectSpectrum> {
    let g = sec.geom;
    for (rows, cols) in [(g.n_t, g.n_x), (omegas.len(), ks.len())] {
        if rows > DIRECT_LIMIT || cols > DIRECT_LIMIT {
            return Err(DmoError::GridTooLarge { rows, cols, limit: DIRECT_LIMIT });
        }
    }
    if omegas.is_empty() || ks.is_empty() {
        return Err(DmoError::invalid("grid", "frequency grids must be non-empty"));
    }
    check_tn(g.t_start)?;

    let live: Vec<(f64, f64, f64)> = (0..g.n_x)
        .flat_map(|ix| (0..g.n_t).map(move |it| (it, ix)))
        .filter_map(|(it, ix)| {
            let v = sec.get(it, ix);
            (v != 0.0).then(|| (g.time(it), g.midpoint(ix), v * trapezoid(it, g.n_t) * trapezoid(ix, g.n_x)))
        })
        .collect();
    let cell = g.dt * g.dx;

    let data = ks
        .par_iter()
        .flat_map_iter(|&k| {
            let live = &live;
            omegas.iter().map(move |&omega| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(t, x, v) in live {
                    let a = a_at(omega, k, t, g.h);
                    acc += Complex64::from_polar(v * method.weight(a), omega * t * a - k * x);
                }
                acc * cell
            })
        })
        .collect();
    Ok(DirectSpectrum { omegas: omegas.to_vec(), ks: ks.to_vec(), data })
}

/// Bin-wise comparison of Hale and Black spectra of the same input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaleBlackComparison {
    /// Largest `|arg(Hale) − arg(Black)|` (wrapped to `[0, π]`) over compared bins.
    pub max_phase_diff: f64,
    /// Bins where both magnitudes exceed the floor.
    pub bins_compared: usize,
}

pub fn compare_phases(hale: &DirectSpectrum, black: &DirectSpectrum, floor: f64) -> HaleBlackComparison {
    let mut max_phase_diff: f64 = 0.0;
    let mut bins_compared = 0;
    for (a, b) in hale.data.iter().zip(&black.data) {
        if a.norm() > floor && b.norm() > floor {
            bins_compared += 1;
            // arg(a · conj(b)) is the wrapped difference.
            max_phase_diff = max_phase_diff.max((a * b.conj()).arg().abs());
        }
    }
    HaleBlackComparison { max_phase_diff, bins_compared }
}
