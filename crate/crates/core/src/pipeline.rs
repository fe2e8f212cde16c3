//! Five-step log-stretch DMO and impulse responses.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{DmoError, Result};
use crate::fk::{self, Geometry, LogSection, Padding, Section, SingularPolicy};
use crate::kernel::OperatorKind;
use crate::stretch::{self, TimeGrid, Trace};

/// DMO run parameters. `None` fields take section-derived defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmoConfig {
    pub operator: OperatorKind,
    /// Log-stretch cutoff time (s); defaults to the first sample time.
    pub t_c: Option<f64>,
    /// Log-time samples per trace; defaults to [`stretch::default_n_tau`].
    pub n_tau: Option<usize>,
    pub singular_policy: SingularPolicy,
    /// Extra zero traces before the spatial FFT; defaults to `⌈h/dx⌉`.
    pub pad_x: Option<usize>,
    /// Extra zero log-time rows before the temporal FFT; defaults to `n_tau / 2`.
    pub pad_tau: Option<usize>,
}

impl DmoConfig {
    pub fn new(operator: OperatorKind) -> Self {
        DmoConfig {
            operator,
            t_c: None,
            n_tau: None,
            singular_policy: SingularPolicy::default(),
            pad_x: None,
            pad_tau: None,
        }
    }

    pub fn resolve(&self, geom: &Geometry) -> Result<ResolvedConfig> {
        geom.validate()?;
        let t_c = self.t_c.unwrap_or(geom.t_start);
        if !(t_c > 0.0 && t_c.is_finite()) {
            return Err(DmoError::invalid("t_c", format!("must be finite and > 0, got {t_c}")));
        }
        if geom.t_start < t_c {
            return Err(DmoError::invalid(
                "t_c",
                format!("cutoff {t_c} s is later than the first sample at {} s", geom.t_start),
            ));
        }
        let n_tau = self.n_tau.unwrap_or_else(|| stretch::default_n_tau(geom.n_t));
        if n_tau < 2 {
            return Err(DmoError::invalid("n_tau", "needs at least two log-time samples"));
        }
        Ok(ResolvedConfig {
            operator: self.operator,
            t_c,
            n_tau,
            singular_policy: self.singular_policy,
            pad_x: self.pad_x.unwrap_or_else(|| (geom.h / geom.dx).ceil() as usize),
            pad_tau: self.pad_tau.unwrap_or(n_tau / 2),
        })
    }
}

/// [`DmoConfig`] with every default filled in for a particular geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedConfig {
    pub operator: OperatorKind,
    pub t_c: f64,
    pub n_tau: usize,
    pub singular_policy: SingularPolicy,
    pub pad_x: usize,
    pub pad_tau: usize,
}

/// Step 1: log-stretch every trace.
pub fn stretch_section(sec: &Section, t_c: f64, n_tau: usize) -> Result<LogSection> {
    let g = sec.geom;
    let traces: Vec<stretch::StretchedTrace> = (0..g.n_x)
        .into_par_iter()
        .map(|ix| {
            let tr = Trace { samples: sec.trace(ix).to_vec(), dt: g.dt, t_start: g.t_start };
            stretch::log_stretch(&tr, t_c, n_tau)
        })
        .collect::<Result<_>>()?;
    let first = &traces[0];
    Ok(LogSection {
        n_tau,
        n_x: g.n_x,
        dtau: first.dtau,
        tau_start: first.tau_start,
        t_c,
        dx: g.dx,
        x_start: g.x_start,
        h: g.h,
        data: traces.into_iter().flat_map(|t| t.samples).collect(),
    })
}

/// Step 5: resample every log-time trace back onto `geom`'s time axis.
pub fn unstretch_section(ls: &LogSection, geom: Geometry) -> Result<Section> {
    let grid = TimeGrid { t_start: geom.t_start, dt: geom.dt, n: geom.n_t };
    let traces: Vec<Trace> = (0..ls.n_x)
        .into_par_iter()
        .map(|ix| {
            let st = stretch::StretchedTrace {
                samples: ls.trace(ix).to_vec(),
                dtau: ls.dtau,
                tau_start: ls.tau_start,
                t_c: ls.t_c,
            };
            stretch::inverse_log_stretch(&st, grid)
        })
        .collect::<Result<_>>()?;
    Section::new(geom, traces.into_iter().flat_map(|t| t.samples).collect())
}

/// Map an NMO-corrected common-offset section to zero offset.
///
/// At `h = 0` every operator is the identity and the input is returned as is.
pub fn run_dmo(sec: &Section, cfg: &DmoConfig) -> Result<Section> {
    let g = sec.geom;
    let rc = cfg.resolve(&g)?;
    if g.h == 0.0 {
        return Ok(sec.clone());
    }
    let stretched = stretch_section(sec, rc.t_c, rc.n_tau)?;
    let spectrum = fk::forward_fk(&stretched, Padding { rows: rc.pad_tau, cols: rc.pad_x })?;
    let filtered = fk::apply_phase_filter(&spectrum, rc.operator, rc.singular_policy);
    let back = fk::inverse_fk(&filtered)?;
    unstretch_section(&back, g)
}

/// Sampled source wavelet on a relative time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet {
    pub samples: Vec<f64>,
    pub dt: f64,
    /// Lag of the first sample relative to the wavelet's reference time (s).
    pub lag_start: f64,
}

impl Wavelet {
    /// Zero-phase Ricker wavelet with peak frequency `freq`, truncated at ±1.5/`freq`.
    pub fn ricker(freq: f64, dt: f64) -> Result<Self> {
        if !(freq > 0.0 && dt > 0.0) {
            return Err(DmoError::invalid("wavelet", "frequency and dt must be > 0"));
        }
        let half = (1.5 / (freq * dt)).ceil() as isize;
        let samples = (-half..=half).map(|i| ricker(freq, i as f64 * dt)).collect();
        Ok(Wavelet { samples, dt, lag_start: -(half as f64) * dt })
    }

    /// Band-limited value at `lag`, zero outside the sampled support.
    pub fn value_at(&self, lag: f64) -> f64 {
        let pos = (lag - self.lag_start) / self.dt;
        if pos < 0.0 || pos > (self.samples.len() - 1) as f64 {
            0.0
        } else {
            stretch::interpolate(&self.samples, pos)
        }
    }

    pub fn lag_end(&self) -> f64 {
        self.lag_start + (self.samples.len() - 1) as f64 * self.dt
    }
}

/// `(1 − 2π²f²t²) e^{−π²f²t²}`.
pub fn ricker(freq: f64, t: f64) -> f64 {
    let a = (PI * freq * t).powi(2);
    (1.0 - 2.0 * a) * (-a).exp()
}

/// Add `scale · wavelet(t − t_event)` into trace `ix`.
pub fn paint(sec: &mut Section, wavelet: &Wavelet, t_event: f64, ix: usize, scale: f64) {
    let g = sec.geom;
    let trace = sec.trace_mut(ix);
    for (it, v) in trace.iter_mut().enumerate() {
        let lag = g.time(it) - t_event;
        if lag >= wavelet.lag_start && lag <= wavelet.lag_end() {
            *v += scale * wavelet.value_at(lag);
        }
    }
}

/// Trace index nearest `x`, if `x` lies within the section's midpoint span.
pub fn trace_index(geom: &Geometry, x: f64) -> Option<usize> {
    let pos = (x - geom.x_start) / geom.dx;
    let last = (geom.n_x - 1) as f64;
    if !(pos >= -0.5 && pos <= last + 0.5) {
        return None;
    }
    Some(pos.round().clamp(0.0, last) as usize)
}

/// Section holding only `wavelet` at `(t_impulse, x_impulse)`.
pub fn impulse_section(t_impulse: f64, x_impulse: f64, wavelet: &Wavelet, geometry: Geometry) -> Result<Section> {
    let mut sec = Section::zeros(geometry)?;
    let outside = DmoError::OutOfGrid { t: t_impulse, x: x_impulse };
    if !(t_impulse >= geometry.t_start && t_impulse <= geometry.t_end()) {
        return Err(outside);
    }
    let ix = trace_index(&geometry, x_impulse).ok_or(outside)?;
    paint(&mut sec, wavelet, t_impulse, ix, 1.0);
    Ok(sec)
}

/// DMO response of a single wavelet placed at `(t_impulse, x_impulse)`.
pub fn impulse_response(
    cfg: &DmoConfig,
    t_impulse: f64,
    x_impulse: f64,
    wavelet: &Wavelet,
    geometry: Geometry,
) -> Result<Section> {
    let input = impulse_section(t_impulse, x_impulse, wavelet, geometry)?;
    run_dmo(&input, cfg)
}
