//! Dip variable and DMO phase functions.
//!
//! Every operator is a pure function of `Ω` and `ξ = h k / Ω`, where `Ω` is the
//! angular frequency dual to log-time `τ` and `k` the angular wavenumber dual to
//! midpoint. Phases are stated for the forward transform kernel
//! `e^{+i(Ωτ − kx)}` used in [`crate::fk`]; the filter multiplies by
//! `amplitude · e^{+iΦ}`.
//!
//! Formulas are written in cancellation-free form (`√(1+a) − 1 = a / (√(1+a) + 1)`,
//! `ln_1p`) so the small-dip limit keeps full relative precision.

use std::fmt;
use std::str::FromStr;

use crate::error::{DmoError, Result};

/// `|ξ|` at or above `1 − SINGULAR_EPS` is classified singular for the full-log operator.
pub const SINGULAR_EPS: f64 = 1e-9;

/// A point of the `(Ω, k)` plane at a given half-offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkPoint {
    /// Angular frequency dual to log-time.
    pub omega: f64,
    /// Angular wavenumber (rad/m).
    pub k: f64,
    /// Half-offset (m), never negative.
    pub h: f64,
}

impl FkPoint {
    pub fn new(omega: f64, k: f64, h: f64) -> Result<Self> {
        if h.is_nan() || h < 0.0 || h.is_infinite() {
            return Err(DmoError::invalid("h", format!("half-offset must be finite and >= 0, got {h}")));
        }
        Ok(FkPoint { omega, k, h })
    }

    /// Point with wavenumber chosen so that `hk/Ω = xi`.
    pub fn from_xi(omega: f64, xi: f64, h: f64) -> Result<Self> {
        if h <= 0.0 {
            return Err(DmoError::invalid("h", "a dip-parameterised point needs h > 0"));
        }
        FkPoint::new(omega, xi * omega / h, h)
    }
}

/// The four log-stretch DMO operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Bale and Jakubowicz full-log operator, `Φ_F = −½ Ω ln(1 − ξ²)`.
    BaleFull,
    /// Notfors and Godfrey approximation, `Φ_N = Ω(√(1+ξ²) − 1)`.
    Notfors,
    /// Liner's stationary-phase operator with amplitude `1/√(1+β_s²)`.
    LinerExact,
    /// Zhou's operator: exact phase, unit amplitude.
    ZhouExact,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] =
        [OperatorKind::BaleFull, OperatorKind::Notfors, OperatorKind::LinerExact, OperatorKind::ZhouExact];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::BaleFull => "bale",
            OperatorKind::Notfors => "notfors",
            OperatorKind::LinerExact => "liner",
            OperatorKind::ZhouExact => "exact",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = DmoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bale" | "balefull" | "full" => Ok(OperatorKind::BaleFull),
            "notfors" => Ok(OperatorKind::Notfors),
            "liner" | "linerexact" => Ok(OperatorKind::LinerExact),
            "exact" | "zhou" | "zhouexact" => Ok(OperatorKind::ZhouExact),
            other => Err(DmoError::invalid("operator", format!("unknown operator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// Full-log operator at `|ξ| ≥ 1`, where its phase turns complex.
    Singular,
    /// Non-finite input.
    OutOfDomain,
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Validity::Valid => "Valid",
            Validity::Singular => "Singular",
            Validity::OutOfDomain => "OutOfDomain",
        })
    }
}

/// Phase (radians) and gain of an operator at one `(Ω, k)` bin.
///
/// `phase` is NaN unless `validity` is [`Validity::Valid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseResult {
    pub phase: f64,
    pub amplitude: f64,
    pub validity: Validity,
}

impl PhaseResult {
    fn valid(phase: f64, amplitude: f64) -> Self {
        PhaseResult { phase, amplitude, validity: Validity::Valid }
    }

    fn invalid(validity: Validity) -> Self {
        PhaseResult { phase: f64::NAN, amplitude: 0.0, validity }
    }

    pub fn is_valid(&self) -> bool {
        self.validity == Validity::Valid
    }
}

/// `ξ = h k / Ω`, or `None` at `Ω = 0`.
pub fn xi(p: FkPoint) -> Option<f64> {
    if p.omega == 0.0 {
        None
    } else {
        Some(p.h * p.k / p.omega)
    }
}

pub fn phase_bale(omega: f64, xi: f64) -> PhaseResult {
    if !xi.is_finite() || !omega.is_finite() {
        return PhaseResult::invalid(Validity::OutOfDomain);
    }
    if xi.abs() >= 1.0 - SINGULAR_EPS {
        return PhaseResult::invalid(Validity::Singular);
    }
    PhaseResult::valid(-0.5 * omega * (-xi * xi).ln_1p(), 1.0)
}

pub fn phase_notfors(omega: f64, xi: f64) -> PhaseResult {
    if !xi.is_finite() || !omega.is_finite() {
        return PhaseResult::invalid(Validity::OutOfDomain);
    }
    let x2 = xi * xi;
    PhaseResult::valid(omega * x2 / ((1.0 + x2).sqrt() + 1.0), 1.0)
}

/// `Φ_E = ½ Ω [√(1+4ξ²) − 1 − ln((√(1+4ξ²) + 1)/2)]`.
pub fn phase_exact(omega: f64, xi: f64) -> PhaseResult {
    if !xi.is_finite() || !omega.is_finite() {
        return PhaseResult::invalid(Validity::OutOfDomain);
    }
    let s = (1.0 + 4.0 * xi * xi).sqrt();
    let s_minus_1 = 4.0 * xi * xi / (s + 1.0);
    PhaseResult::valid(0.5 * omega * (s_minus_1 - (0.5 * s_minus_1).ln_1p()), 1.0)
}

/// Liner's stationary-point quantities at one bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinerComponents {
    /// Stationary midpoint displacement `y_s` (m).
    pub y_s: f64,
    /// `β_s = y_s / h`.
    pub beta_s: f64,
    /// Log-time shift `Δ_s = ½ ln(1 − β_s²)`.
    pub delta_s: f64,
    /// `1 / √(1 + β_s²)`.
    pub amplitude: f64,
}

impl LinerComponents {
    /// `Ω Δ_s − k y_s`.
    pub fn phase(&self, omega: f64, k: f64) -> f64 {
        omega * self.delta_s - k * self.y_s
    }
}

pub fn liner_components(omega: f64, k: f64, h: f64) -> Result<LinerComponents> {
    let p = FkPoint::new(omega, k, h)?;
    let xi = xi(p).ok_or(DmoError::ZeroFrequency)?;
    if !xi.is_finite() {
        return Err(DmoError::invalid("xi", format!("non-finite dip variable {xi}")));
    }
    // y_s = (h/2ξ)(1 − s) rewritten as −2hξ/(1 + s): no 0/0 at ξ = 0.
    let s = (1.0 + 4.0 * xi * xi).sqrt();
    let beta_s = -2.0 * xi / (1.0 + s);
    let y_s = beta_s * h;
    Ok(LinerComponents {
        y_s,
        beta_s,
        delta_s: 0.5 * (-beta_s * beta_s).ln_1p(),
        amplitude: 1.0 / (1.0 + beta_s * beta_s).sqrt(),
    })
}

/// Operator response at one bin. `Ω = 0` is the identity for every operator.
pub fn evaluate(op: OperatorKind, p: FkPoint) -> PhaseResult {
    let Some(xi) = xi(p) else {
        return PhaseResult::valid(0.0, 1.0);
    };
    match op {
        OperatorKind::BaleFull => phase_bale(p.omega, xi),
        OperatorKind::Notfors => phase_notfors(p.omega, xi),
        OperatorKind::ZhouExact => phase_exact(p.omega, xi),
        OperatorKind::LinerExact => match liner_components(p.omega, p.k, p.h) {
            Ok(c) => PhaseResult::valid(c.phase(p.omega, p.k), c.amplitude),
            Err(_) => PhaseResult::invalid(Validity::OutOfDomain),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // 40-digit mpmath evaluations of the closed forms.
    const BALE_HALF: f64 = 0.143_841_036_225_890_46;
    const EXACT_ONE: f64 = 0.377_428_076_220_093_1;
    const EXACT_TEN: f64 = 8.336_210_055_718_696;
    const SQRT2_M1: f64 = 0.414_213_562_373_095_05;
    const GOLDEN_YS: f64 = -0.618_033_988_749_894_8;
    const LINER_AMP_ONE: f64 = 0.850_650_808_352_039_9;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi(FkPoint::new(2.0, 0.004, 500.0).unwrap()), Some(1.0));
        assert_eq!(xi(FkPoint::new(1.0, 0.0, 500.0).unwrap()), Some(0.0));
        assert_eq!(xi(FkPoint::new(0.0, 0.01, 500.0).unwrap()), None);
        assert!(FkPoint::new(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn bale_examples() {
        let r = phase_bale(1.0, 0.0);
        assert_eq!((r.phase, r.validity), (0.0, Validity::Valid));
        assert!(close(phase_bale(1.0, 0.5).phase, BALE_HALF, 1e-15));
        assert_eq!(phase_bale(1.0, 1.2).validity, Validity::Singular);
        assert_eq!(phase_bale(1.0, 1.0 - 1e-10).validity, Validity::Singular);
        assert_eq!(phase_bale(1.0, 1.0 - 1e-8).validity, Validity::Valid);
        assert_eq!(phase_bale(1.0, f64::NAN).validity, Validity::OutOfDomain);
    }

    #[test]
    fn notfors_examples() {
        assert_eq!(phase_notfors(1.0, 0.0).phase, 0.0);
        assert!(close(phase_notfors(1.0, 1.0).phase, SQRT2_M1, 1e-15));
        assert!(close(phase_notfors(3.0, 1.0).phase, 3.0 * SQRT2_M1, 1e-15));
    }

    #[test]
    fn exact_examples() {
        assert_eq!(phase_exact(1.0, 0.0).phase, 0.0);
        assert!(close(phase_exact(1.0, 1.0).phase, EXACT_ONE, 1e-15));
        assert!(close(phase_exact(1.0, 10.0).phase, EXACT_TEN, 1e-15));
    }

    #[test]
    fn liner_examples() {
        let c = liner_components(1.0, 1.0, 1.0).unwrap();
        assert!(close(c.y_s, GOLDEN_YS, 1e-15));
        assert!(close(c.amplitude, LINER_AMP_ONE, 1e-15));
        let zero = liner_components(1.0, 0.0, 500.0).unwrap();
        assert_eq!((zero.y_s, zero.beta_s, zero.delta_s, zero.amplitude), (0.0, 0.0, 0.0, 1.0));
        assert!(matches!(liner_components(0.0, 1.0, 1.0), Err(DmoError::ZeroFrequency)));
    }

    #[test]
    fn evaluate_examples() {
        let r = evaluate(OperatorKind::ZhouExact, FkPoint::new(1.0, 0.0, 500.0).unwrap());
        assert_eq!((r.phase, r.amplitude), (0.0, 1.0));

        let r = evaluate(OperatorKind::LinerExact, FkPoint::from_xi(1.0, 1.0, 1.0).unwrap());
        assert!(close(r.phase, EXACT_ONE, 1e-14));
        assert!(close(r.amplitude, LINER_AMP_ONE, 1e-15));

        let r = evaluate(OperatorKind::BaleFull, FkPoint::from_xi(1.0, 1.0, 1.0).unwrap());
        assert_eq!(r.validity, Validity::Singular);

        for op in OperatorKind::ALL {
            let r = evaluate(op, FkPoint::new(0.0, 0.3, 500.0).unwrap());
            assert_eq!((r.phase, r.amplitude, r.validity), (0.0, 1.0, Validity::Valid));
        }
    }

    #[test]
    fn operator_names_parse_back() {
        for op in OperatorKind::ALL {
            assert_eq!(op.name().parse::<OperatorKind>().unwrap(), op);
        }
        assert!("bogus".parse::<OperatorKind>().is_err());
    }

    #[test]
    fn ordering_on_unit_interval() {
        for i in 1..1000 {
            let x = i as f64 / 1000.0 * (1.0 - 1e-6);
            let f = phase_bale(1.0, x).phase;
            let n = phase_notfors(1.0, x).phase;
            let e = phase_exact(1.0, x).phase;
            assert!(f > n && n > e, "ordering broken at xi={x}: {f} {n} {e}");
        }
    }

    #[test]
    fn strictly_increasing_in_xi() {
        let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.05).collect();
        for w in grid.windows(2) {
            assert!(phase_notfors(1.0, w[1]).phase > phase_notfors(1.0, w[0]).phase);
            assert!(phase_exact(1.0, w[1]).phase > phase_exact(1.0, w[0]).phase);
            if w[1] < 1.0 - SINGULAR_EPS {
                assert!(phase_bale(1.0, w[1]).phase > phase_bale(1.0, w[0]).phase);
            }
        }
    }

    #[test]
    fn liner_phase_identity_with_exact() {
        for omega in [0.1, 1.0, 10.0] {
            for i in 0..=400 {
                let xi = i as f64 * 0.25;
                let c = liner_components(omega, xi * omega, 1.0).unwrap();
                let liner = c.phase(omega, xi * omega);
                let exact = phase_exact(omega, xi).phase;
                assert!((liner - exact).abs() <= 1e-12 * exact.abs().max(1.0), "xi={xi} omega={omega}");
            }
        }
    }

    proptest! {
        #[test]
        fn even_in_dip(omega in 0.01f64..100.0, xi in 0.0f64..50.0) {
            prop_assert_eq!(phase_notfors(omega, xi).phase, phase_notfors(omega, -xi).phase);
            prop_assert_eq!(phase_exact(omega, xi).phase, phase_exact(omega, -xi).phase);
            let b = phase_bale(omega, xi);
            if b.is_valid() {
                prop_assert_eq!(b.phase, phase_bale(omega, -xi).phase);
            }
        }

        #[test]
        fn odd_in_frequency(omega in 0.01f64..100.0, k in -0.3f64..0.3, h in 0.0f64..1000.0) {
            for op in OperatorKind::ALL {
                let a = evaluate(op, FkPoint::new(omega, k, h).unwrap());
                let b = evaluate(op, FkPoint::new(-omega, -k, h).unwrap());
                prop_assert_eq!(a.validity, b.validity);
                if a.is_valid() {
                    prop_assert!((a.phase + b.phase).abs() <= 1e-12 * a.phase.abs().max(1.0));
                    prop_assert_eq!(a.amplitude, b.amplitude);
                }
            }
        }

        #[test]
        fn linear_in_frequency(omega in 0.01f64..100.0, c in 0.01f64..100.0, xi in 0.0f64..0.99) {
            for f in [phase_bale, phase_notfors, phase_exact] {
                let scaled = f(c * omega, xi).phase;
                let base = c * f(omega, xi).phase;
                prop_assert!((scaled - base).abs() <= 1e-13 * base.abs().max(1e-300));
            }
        }

        #[test]
        fn liner_amplitude_bounded(xi in 0.0f64..1e3) {
            let c = liner_components(1.0, xi, 1.0).unwrap();
            prop_assert!(c.amplitude <= 1.0);
            if xi > 1e-6 {
                prop_assert!(c.amplitude < 1.0);
            }
        }

        #[test]
        fn unit_amplitude_except_liner(omega in -50.0f64..50.0, k in -0.3f64..0.3) {
            let p = FkPoint::new(omega, k, 500.0).unwrap();
            for op in [OperatorKind::Notfors, OperatorKind::ZhouExact] {
                prop_assert_eq!(evaluate(op, p).amplitude, 1.0);
            }
        }
    }
}
