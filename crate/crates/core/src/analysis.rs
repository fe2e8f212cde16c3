//! Space/time phase decomposition, asymptotic diagnostics and impulse-response
//! geometry metrics.
//!
//! A log-stretch DMO phase can be read as `Φ = k(x_n − x_0) + Ω(τ_0 − τ_n)`: a
//! midpoint displacement and a log-time shift. The full-log operator is a pure
//! time shift, the Notfors operator is equivalent to a pure midpoint shift, and
//! the exact operator splits along Liner's stationary point.

use crate::error::{DmoError, Result};
use crate::fk::Section;
use crate::kernel::{self, FkPoint, OperatorKind, SINGULAR_EPS};
use crate::oracle::EllipseCurve;

/// Split of one operator phase into midpoint and log-time parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecomposition {
    /// Equivalent midpoint displacement `x_0 − x_n` (m).
    pub space_shift: f64,
    /// Equivalent log-time shift `τ_0 − τ_n`.
    pub time_shift: f64,
    /// `k (x_n − x_0)`.
    pub space_phase: f64,
    /// `Ω (τ_0 − τ_n)`.
    pub time_phase: f64,
    /// `space_phase + time_phase`.
    pub total: f64,
}

impl PhaseDecomposition {
    fn new(p: FkPoint, space_shift: f64, time_shift: f64) -> Self {
        let space_phase = -p.k * space_shift;
        let time_phase = p.omega * time_shift;
        PhaseDecomposition { space_shift, time_shift, space_phase, time_phase, total: space_phase + time_phase }
    }
}

/// Log-time shift `τ_0 − τ_n = −½ ln(1 − ξ²)` implied by the full-log operator.
pub fn bale_time_shift(xi: f64) -> f64 {
    -0.5 * (-xi * xi).ln_1p()
}

/// Log-time shift `τ_0 − τ_n = √(1 + ξ²) − 1` of the Notfors approximation.
pub fn notfors_time_shift(xi: f64) -> f64 {
    xi * xi / ((1.0 + xi * xi).sqrt() + 1.0)
}

/// Equivalent midpoint repositioning `x_0 − x_n = (h/ξ)(1 − √(1 + ξ²))` of the
/// Notfors operator, evaluated as `−hξ / (1 + √(1 + ξ²))`.
pub fn notfors_midpoint_shift(xi: f64, h: f64) -> f64 {
    -h * xi / (1.0 + (1.0 + xi * xi).sqrt())
}

pub fn decompose(op: OperatorKind, p: FkPoint) -> Result<PhaseDecomposition> {
    let xi = kernel::xi(p).ok_or(DmoError::ZeroFrequency)?;
    if !xi.is_finite() {
        return Err(DmoError::invalid("xi", format!("non-finite dip variable {xi}")));
    }
    Ok(match op {
        OperatorKind::BaleFull => {
            if xi.abs() >= 1.0 - SINGULAR_EPS {
                return Err(DmoError::Singular { xi });
            }
            PhaseDecomposition::new(p, 0.0, bale_time_shift(xi))
        }
        OperatorKind::Notfors => PhaseDecomposition::new(p, notfors_midpoint_shift(xi, p.h), 0.0),
        OperatorKind::LinerExact | OperatorKind::ZhouExact => {
            let c = kernel::liner_components(p.omega, p.k, p.h)?;
            PhaseDecomposition::new(p, c.y_s, c.delta_s)
        }
    })
}

/// Case 1 / Case 2 diagnostics for one operator over a dip grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorAsymptotics {
    pub op: OperatorKind,
    /// `Φ(ξ)`, `None` where the operator is singular.
    pub phase: Vec<Option<f64>>,
    /// `Φ / (½ Ω ξ²)`, tending to 1 as `ξ → 0`.
    pub small_ratio: Vec<Option<f64>>,
    /// `Φ / (Ω ξ)`, tending to 1 as `ξ → ∞` for Notfors and exact.
    pub large_ratio: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub omega: f64,
    pub xi_grid: Vec<f64>,
    /// `ln ξ / (2ξ)`.
    pub correction: Vec<f64>,
    pub operators: Vec<OperatorAsymptotics>,
}

pub fn asymptotic_report(ops: &[OperatorKind], xi_grid: &[f64], omega: f64) -> Result<AsymptoticReport> {
    if xi_grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(DmoError::invalid("xi grid", "values must be finite and > 0"));
    }
    if xi_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DmoError::invalid("xi grid", "must be strictly increasing"));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(DmoError::invalid("omega", "must be finite and > 0"));
    }
    let operators = ops
        .iter()
        .map(|&op| {
            let phase: Vec<Option<f64>> = xi_grid
                .iter()
                .map(|&xi| {
                    let r = kernel::evaluate(op, FkPoint { omega, k: xi * omega, h: 1.0 });
                    r.is_valid().then_some(r.phase)
                })
                .collect();
            let small_ratio = phase.iter().zip(xi_grid).map(|(p, xi)| p.map(|p| p / (0.5 * omega * xi * xi))).collect();
            let large_ratio = phase.iter().zip(xi_grid).map(|(p, xi)| p.map(|p| p / (omega * xi))).collect();
            OperatorAsymptotics { op, phase, small_ratio, large_ratio }
        })
        .collect();
    Ok(AsymptoticReport {
        omega,
        xi_grid: xi_grid.to_vec(),
        correction: xi_grid.iter().map(|&xi| xi.ln() / (2.0 * xi)).collect(),
        operators,
    })
}

/// Taps on each side of the Hilbert quadrature filter.
pub const HILBERT_HALF: usize = 32;

/// Blackman-windowed type-III Hilbert transformer, `2·HILBERT_HALF + 1` coefficients.
pub fn hilbert_taps() -> Vec<f64> {
    let m = HILBERT_HALF as isize;
    let len = (2 * m) as f64;
    (-m..=m)
        .map(|n| {
            if n % 2 == 0 {
                return 0.0;
            }
            let u = (n + m) as f64 / len;
            let w = 0.42 - 0.5 * (2.0 * std::f64::consts::PI * u).cos() + 0.08 * (4.0 * std::f64::consts::PI * u).cos();
            w * 2.0 / (std::f64::consts::PI * n as f64)
        })
        .collect()
}

/// Instantaneous amplitude `√(x² + H{x}²)` with a centred FIR quadrature.
pub fn envelope(trace: &[f64]) -> Vec<f64> {
    let taps = hilbert_taps();
    let m = HILBERT_HALF as isize;
    let n = trace.len() as isize;
    (0..n)
        .map(|i| {
            let mut q = 0.0;
            for (j, &c) in taps.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let src = i - (j as isize - m);
                if (0..n).contains(&src) {
                    q += c * trace[src as usize];
                }
            }
            trace[i as usize].hypot(q)
        })
        .collect()
}

/// Lateral window for ridge picking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PickWindow {
    pub x_center: f64,
    pub half_width: f64,
}

impl PickWindow {
    /// `|x − x_impulse| ≤ 0.8 h`.
    pub fn around_impulse(x_impulse: f64, h: f64) -> Self {
        PickWindow { x_center: x_impulse, half_width: 0.8 * h }
    }
}

/// Picks below this fraction of the global envelope peak (−40 dB) count as missing.
pub const NOISE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePick {
    pub ix: usize,
    pub x: f64,
    /// Envelope-peak time (s), `None` below the noise floor.
    pub pick_t: Option<f64>,
    pub oracle_t: f64,
    /// `(pick_t − oracle_t) / dt`.
    pub residual_samples: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeReport {
    pub picks: Vec<RidgePick>,
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    pub missing: usize,
}

impl RidgeReport {
    /// Largest `|residual|` among picks whose `|x − x_center|` lies in `[lo, hi]`.
    pub fn max_abs_residual_in(&self, x_center: f64, lo: f64, hi: f64) -> f64 {
        self.picks
            .iter()
            .filter(|p| (lo..=hi).contains(&(p.x - x_center).abs()))
            .filter_map(|p| p.residual_samples)
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn parabolic_peak(v: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 == v.len() {
        return i as f64;
    }
    let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        i as f64
    } else {
        i as f64 + 0.5 * (a - c) / denom
    }
}

/// Per-trace envelope-peak picks compared against the analytic ellipse.
pub fn ridge_metrics(response: &Section, curve: &EllipseCurve, window: PickWindow) -> Result<RidgeReport> {
    let g = response.geom;
    if (g.h - curve.h).abs() > 1e-9 * g.h.max(1.0) {
        return Err(DmoError::invalid("curve", format!("half-offset {} differs from section {}", curve.h, g.h)));
    }
    let envelopes: Vec<Vec<f64>> = (0..g.n_x).map(|ix| envelope(response.trace(ix))).collect();
    let global = envelopes.iter().flatten().fold(0.0f64, |m, &v| m.max(v));

    let mut picks = Vec::new();
    for (ix, env) in envelopes.iter().enumerate() {
        let x = g.midpoint(ix);
        if (x - window.x_center).abs() > window.half_width {
            continue;
        }
        let Some(oracle_t) = curve.t0_at(x) else { continue };
        let (imax, &peak) =
            env.iter().enumerate().fold((0, &f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
        let pick_t =
            (global > 0.0 && peak >= NOISE_FLOOR * global).then(|| g.t_start + parabolic_peak(env, imax) * g.dt);
        picks.push(RidgePick { ix, x, pick_t, oracle_t, residual_samples: pick_t.map(|t| (t - oracle_t) / g.dt) });
    }
    let residuals: Vec<f64> = picks.iter().filter_map(|p| p.residual_samples).map(f64::abs).collect();
    let missing = picks.len() - residuals.len();
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    let mean_abs_residual =
        if residuals.is_empty() { 0.0 } else { residuals.iter().sum::<f64>() / residuals.len() as f64 };
    Ok(RidgeReport { picks, max_abs_residual, mean_abs_residual, missing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fk::Geometry;
    use crate::oracle::{self, black_map, KinematicMap};
    use crate::pipeline::{paint, Wavelet};

    #[test]
    fn notfors_unit_dip() {
        let p = FkPoint::from_xi(1.0, 1.0, 500.0).unwrap();
        let d = decompose(OperatorKind::Notfors, p).unwrap();
        assert!((d.space_shift + 207.106_781_186_547_52).abs() < 1e-10);
        assert_eq!(d.time_phase, 0.0);
        assert!((d.total - 0.414_213_562_373_095_05).abs() < 1e-15);
    }

    #[test]
    fn exact_unit_dip() {
        let p = FkPoint::from_xi(1.0, 1.0, 1.0).unwrap();
        for op in [OperatorKind::ZhouExact, OperatorKind::LinerExact] {
            let d = decompose(op, p).unwrap();
            assert!((d.space_phase - 0.618_033_988_749_894_8).abs() < 1e-15);
            assert!((d.time_phase + 0.240_605_912_529_801_7).abs() < 1e-15);
            assert!((d.total - 0.377_428_076_220_093_1).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_dip_limits() {
        let p = FkPoint::new(2.0, 0.0, 500.0).unwrap();
        for op in OperatorKind::ALL {
            let d = decompose(op, p).unwrap();
            assert_eq!((d.space_shift, d.time_shift, d.total), (0.0, 0.0, 0.0));
        }
        let tiny = FkPoint::from_xi(1.0, 1e-9, 500.0).unwrap();
        for op in OperatorKind::ALL {
            let d = decompose(op, tiny).unwrap();
            assert!(d.space_shift.abs() < 1e-6 && d.time_shift.abs() < 1e-15);
        }
    }

    #[test]
    fn decompose_errors() {
        assert!(matches!(
            decompose(OperatorKind::Notfors, FkPoint::new(0.0, 1.0, 1.0).unwrap()),
            Err(DmoError::ZeroFrequency)
        ));
        assert!(matches!(
            decompose(OperatorKind::BaleFull, FkPoint::from_xi(1.0, 1.5, 1.0).unwrap()),
            Err(DmoError::Singular { .. })
        ));
    }

    #[test]
    fn decomposition_sums_to_kernel_phase() {
        for omega in [-3.0, 0.5, 7.0] {
            for i in 1..400 {
                let xi = i as f64 * 0.01;
                let p = FkPoint::from_xi(omega, xi, 250.0).unwrap();
                for op in OperatorKind::ALL {
                    let r = kernel::evaluate(op, p);
                    match decompose(op, p) {
                        Ok(d) => {
                            assert!((d.total - r.phase).abs() <= 1e-12 * r.phase.abs().max(1.0), "{op} xi={xi}");
                            assert_eq!(d.total, d.space_phase + d.time_phase);
                        }
                        Err(_) => assert!(!r.is_valid()),
                    }
                }
            }
        }
    }

    #[test]
    fn exact_space_part_dominates() {
        for i in 1..=1000 {
            let xi = i as f64 * 0.1;
            let d = decompose(OperatorKind::ZhouExact, FkPoint::from_xi(1.0, xi, 1.0).unwrap()).unwrap();
            assert!(d.space_phase >= d.time_phase.abs());
        }
    }

    #[test]
    fn log_relations_contradict_black() {
        for i in 1..200 {
            let xi = i as f64 / 200.0;
            assert!(bale_time_shift(xi) >= 0.0);
            assert!(notfors_time_shift(xi) >= 0.0);
            let b = black_map(KinematicMap { t_n: 1.0, x_n: 0.0, h: 500.0, p: xi / 500.0 }).unwrap();
            assert!(b.t_0 - 1.0 <= 0.0);
        }
    }

    #[test]
    fn report_examples() {
        let grid = [1e-3, 1.0, 100.0];
        let r = asymptotic_report(&OperatorKind::ALL, &grid, 1.0).unwrap();
        let exact = r.operators.iter().find(|o| o.op == OperatorKind::ZhouExact).unwrap();
        assert!((exact.small_ratio[0].unwrap() - 1.0).abs() <= 5e-6);
        let lower = 1.0 - 100f64.ln() / 200.0 - 0.01;
        let l = exact.large_ratio[2].unwrap();
        assert!(l >= lower && l <= 1.0);
        let notfors = r.operators.iter().find(|o| o.op == OperatorKind::Notfors).unwrap();
        assert!((notfors.large_ratio[2].unwrap() - 0.990_049_998_750_062_5).abs() < 1e-12);
        let bale = r.operators.iter().find(|o| o.op == OperatorKind::BaleFull).unwrap();
        assert_eq!(bale.phase[1], None);
        assert_eq!(bale.phase[2], None);
        assert!((r.correction[2] - 100f64.ln() / 200.0).abs() < 1e-15);
    }

    #[test]
    fn report_rejects_bad_grids() {
        assert!(asymptotic_report(&OperatorKind::ALL, &[0.0, 1.0], 1.0).is_err());
        assert!(asymptotic_report(&OperatorKind::ALL, &[2.0, 1.0], 1.0).is_err());
        assert!(asymptotic_report(&OperatorKind::ALL, &[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn hilbert_of_cosine_is_sine() {
        let n = 400;
        let w = 2.0 * std::f64::consts::PI * 0.1;
        let x: Vec<f64> = (0..n).map(|i| (w * i as f64).cos()).collect();
        let env = envelope(&x);
        for &e in &env[50..350] {
            assert!((e - 1.0).abs() < 2e-3, "{e}");
        }
    }

    #[test]
    fn painted_curve_is_picked_within_one_sample() {
        let g = Geometry { n_t: 400, n_x: 81, dt: 0.004, dx: 12.5, t_start: 0.004, x_start: -500.0, h: 500.0 };
        let curve = oracle::ellipse(1.0, 0.0, 500.0, 201).unwrap();
        let w = Wavelet::ricker(30.0, 0.004).unwrap();
        let mut sec = Section::zeros(g).unwrap();
        for ix in 0..g.n_x {
            if let Some(t) = curve.t0_at(g.midpoint(ix)) {
                paint(&mut sec, &w, t, ix, 1.0);
            }
        }
        let report = ridge_metrics(&sec, &curve, PickWindow::around_impulse(0.0, 500.0)).unwrap();
        assert_eq!(report.missing, 0);
        assert_eq!(report.picks.len(), 65);
        assert!(report.max_abs_residual <= 1.0, "{}", report.max_abs_residual);
    }

    #[test]
    fn quiet_traces_are_missing() {
        let g = Geometry { n_t: 200, n_x: 9, dt: 0.004, dx: 12.5, t_start: 0.004, x_start: -50.0, h: 100.0 };
        let curve = oracle::ellipse(0.5, 0.0, 100.0, 21).unwrap();
        let w = Wavelet::ricker(30.0, 0.004).unwrap();
        let mut sec = Section::zeros(g).unwrap();
        paint(&mut sec, &w, 0.5, 4, 1.0);
        paint(&mut sec, &w, 0.45, 5, 1e-4);
        let report = ridge_metrics(&sec, &curve, PickWindow::around_impulse(0.0, 100.0)).unwrap();
        assert_eq!(report.picks.len(), 9);
        assert_eq!(report.missing, 8);
        assert_eq!(report.picks[4].residual_samples.map(|r| r.abs() < 1e-9), Some(true));
    }
}
