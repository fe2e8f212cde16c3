//! Shared fixtures for the criterion benches.

use logdmo_core::fk::{Geometry, LogSection, Section};
use logdmo_core::pipeline::{self, Wavelet};

/// Impulse section of `n_t × n_x` samples with the event at 0.6 of the record.
pub fn impulse_section(n_t: usize, n_x: usize) -> Section {
    let g = Geometry { n_t, n_x, dt: 0.004, dx: 12.5, t_start: 0.004, x_start: -((n_x / 2) as f64) * 12.5, h: 500.0 };
    let w = Wavelet::ricker(30.0, g.dt).expect("valid wavelet");
    pipeline::impulse_section(0.6 * g.t_end(), 0.0, &w, g).expect("impulse inside the grid")
}

/// Deterministic, non-trivial log-time section.
pub fn log_section(n_tau: usize, n_x: usize) -> LogSection {
    let data = (0..n_tau * n_x).map(|i| ((i as f64 * 0.618_033_988_749_895).fract() - 0.5) * 2.0).collect();
    LogSection { n_tau, n_x, dtau: 0.005, tau_start: 0.0, t_c: 0.004, dx: 12.5, x_start: 0.0, h: 500.0, data }
}

/// Section with `live` scattered unit samples, for the direct integrals.
pub fn sparse_section(n: usize, live: usize) -> Section {
    let g = Geometry { n_t: n, n_x: n, dt: 0.008, dx: 12.5, t_start: 0.2, x_start: -200.0, h: 300.0 };
    let mut sec = Section::zeros(g).expect("valid geometry");
    for i in 0..live {
        let (it, ix) = ((7 * i + 3) % n, (11 * i + 5) % n);
        sec.trace_mut(ix)[it] = 1.0;
    }
    sec
}
