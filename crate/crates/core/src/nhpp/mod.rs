//! Non-homogeneous Poisson process fault models.
//!
//! Three classic mean value functions cover the usual shapes of cumulative
//! fault curves:
//!
//! * exponential (Goel-Okumoto): `m(t) = a(1 - e^{-bt})`, intensity
//!   `a b e^{-bt}`, finite asymptote `a`;
//! * delayed S-shaped (Ohba): `m(t) = n(1 - (1 + phi t) e^{-phi t})`,
//!   intensity `n phi^2 t e^{-phi t}`, finite asymptote `n`;
//! * logarithmic (Musa-Okumoto): `m(t) = ln(lambda0 theta t + 1) / theta`,
//!   intensity `lambda0 / (lambda0 theta t + 1)`, unbounded.
//!
//! [`ModelParams`] wraps the three parameter sets behind one interface so
//! fitting, simulation, and cost optimization can stay model-agnostic.
//! Grouped fault observations live in [`FaultDataset`].

mod fit;
mod sim;

pub use fit::{fit_model, grouped_log_likelihood, FitOptions, FitResult};
pub use sim::simulate_nhpp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponential model parameters: `a` expected total faults, `b` per-fault
/// detection rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoParams {
    pub a: f64,
    pub b: f64,
}

impl GoParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let params = GoParams { a, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("a", self.a)?;
        require_positive("b", self.b)
    }
}

/// Delayed S-shaped model parameters: `n` expected total faults, `phi` the
/// detection/isolation rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhbaParams {
    pub n: f64,
    pub phi: f64,
}

impl OhbaParams {
    pub fn new(n: f64, phi: f64) -> Result<Self> {
        let params = OhbaParams { n, phi };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("n", self.n)?;
        require_positive("phi", self.phi)
    }
}

/// Logarithmic model parameters: `lambda0` initial failure intensity,
/// `theta` the intensity decay parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MusaOkumotoParams {
    pub lambda0: f64,
    pub theta: f64,
}

impl MusaOkumotoParams {
    pub fn new(lambda0: f64, theta: f64) -> Result<Self> {
        let params = MusaOkumotoParams { lambda0, theta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("lambda0", self.lambda0)?;
        require_positive("theta", self.theta)
    }
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "parameter {name} must be finite and positive, got {value}"
        )))
    }
}

/// Selector for the model family, e.g. when fitting from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Go,
    Ohba,
    Mo,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Go => "go",
            ModelKind::Ohba => "ohba",
            ModelKind::Mo => "mo",
        }
    }
}

/// Parameters of one of the three model variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum ModelParams {
    #[serde(rename = "go")]
    Go(GoParams),
    #[serde(rename = "ohba")]
    Ohba(OhbaParams),
    #[serde(rename = "mo")]
    MusaOkumoto(MusaOkumotoParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Go(_) => ModelKind::Go,
            ModelParams::Ohba(_) => ModelKind::Ohba,
            ModelParams::MusaOkumoto(_) => ModelKind::Mo,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Go(p) => p.validate(),
            ModelParams::Ohba(p) => p.validate(),
            ModelParams::MusaOkumoto(p) => p.validate(),
        }
    }

    /// Expected cumulative number of faults found by time `t`.
    ///
    /// Nondecreasing in `t` with `m(0) = 0`; bounded by the asymptote for
    /// the exponential and S-shaped variants.
    pub fn mean_value(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::domain(format!(
                "time must be finite and nonnegative, got {t}"
            )));
        }
        Ok(self.mean_unchecked(t))
    }

    pub(crate) fn mean_unchecked(&self, t: f64) -> f64 {
        match self {
            ModelParams::Go(p) => p.a * (-(-p.b * t).exp_m1()),
            ModelParams::Ohba(p) => p.n * (1.0 - (1.0 + p.phi * t) * (-p.phi * t).exp()),
            ModelParams::MusaOkumoto(p) => (p.lambda0 * p.theta * t).ln_1p() / p.theta,
        }
    }

    /// Instantaneous failure intensity `dm/dt` at time `t`.
    pub fn intensity(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::domain(format!(
                "time must be finite and nonnegative, got {t}"
            )));
        }
        Ok(self.intensity_unchecked(t))
    }

    pub(crate) fn intensity_unchecked(&self, t: f64) -> f64 {
        match self {
            ModelParams::Go(p) => p.a * p.b * (-p.b * t).exp(),
            ModelParams::Ohba(p) => p.n * p.phi * p.phi * t * (-p.phi * t).exp(),
            ModelParams::MusaOkumoto(p) => p.lambda0 / (p.lambda0 * p.theta * t + 1.0),
        }
    }

    /// Exact supremum of the intensity over `[0, horizon]`, used as the
    /// majorizing rate for thinning.
    ///
    /// The exponential and logarithmic intensities are decreasing, so the
    /// supremum sits at zero. The S-shaped intensity rises to its mode at
    /// `t = 1/phi` (value `n phi / e`) and decays afterwards.
    pub fn intensity_sup(&self, horizon: f64) -> Result<f64> {
        self.validate()?;
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::domain(format!(
                "horizon must be finite and positive, got {horizon}"
            )));
        }
        Ok(match self {
            ModelParams::Go(p) => p.a * p.b,
            ModelParams::MusaOkumoto(p) => p.lambda0,
            ModelParams::Ohba(p) => {
                let mode = 1.0 / p.phi;
                if horizon >= mode {
                    p.n * p.phi / std::f64::consts::E
                } else {
                    self.intensity_unchecked(horizon)
                }
            }
        })
    }

    /// Expected total faults over an unbounded horizon, when finite.
    pub fn asymptote(&self) -> Option<f64> {
        match self {
            ModelParams::Go(p) => Some(p.a),
            ModelParams::Ohba(p) => Some(p.n),
            ModelParams::MusaOkumoto(_) => None,
        }
    }
}

/// One grouped observation: cumulative fault count at an inspection time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultObservation {
    pub time: f64,
    pub cumulative_faults: u64,
}

/// Grouped cumulative fault counts at strictly increasing inspection times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultDataset {
    observations: Vec<FaultObservation>,
    time_unit: String,
}

impl FaultDataset {
    /// Validates ordering and monotonicity; the first inspection time must
    /// be strictly positive.
    pub fn new(observations: Vec<FaultObservation>, time_unit: impl Into<String>) -> Result<Self> {
        let mut prev_time = 0.0;
        let mut prev_count = 0u64;
        for (idx, obs) in observations.iter().enumerate() {
            if !obs.time.is_finite() || obs.time <= prev_time {
                return Err(Error::input(format!(
                    "observation {idx}: time {} does not strictly increase from {prev_time}",
                    obs.time
                )));
            }
            if obs.cumulative_faults < prev_count {
                return Err(Error::input(format!(
                    "observation {idx}: cumulative fault count {} decreases from {prev_count}",
                    obs.cumulative_faults
                )));
            }
            prev_time = obs.time;
            prev_count = obs.cumulative_faults;
        }
        Ok(FaultDataset {
            observations,
            time_unit: time_unit.into(),
        })
    }

    pub fn observations(&self) -> &[FaultObservation] {
        &self.observations
    }

    pub fn time_unit(&self) -> &str {
        &self.time_unit
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn total_faults(&self) -> u64 {
        self.observations.last().map_or(0, |o| o.cumulative_faults)
    }

    pub fn last_time(&self) -> Option<f64> {
        self.observations.last().map(|o| o.time)
    }

    /// Builds a grouped dataset from raw event times by counting events in
    /// `bins` equal-width intervals over `(0, horizon]`.
    pub fn from_event_times(events: &[f64], horizon: f64, bins: usize, time_unit: &str) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::domain(format!(
                "horizon must be finite and positive, got {horizon}"
            )));
        }
        if bins == 0 {
            return Err(Error::input("at least one bin is required"));
        }
        let edges: Vec<f64> = (1..=bins).map(|i| horizon * i as f64 / bins as f64).collect();
        Self::from_event_times_at(events, &edges, time_unit)
    }

    /// Builds a grouped dataset by counting events at the given inspection
    /// times (strictly increasing, all positive).
    pub fn from_event_times_at(events: &[f64], edges: &[f64], time_unit: &str) -> Result<Self> {
        let observations = edges
            .iter()
            .map(|&edge| FaultObservation {
                time: edge,
                cumulative_faults: events.iter().filter(|&&e| e <= edge).count() as u64,
            })
            .collect();
        Self::new(observations, time_unit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn go_mean_matches_reference_value() {
        let m = ModelParams::Go(GoParams::new(100.0, 0.1).unwrap());
        let v = m.mean_value(10.0).unwrap();
        assert!(approx_eq(v, 63.212055882855765, 1e-12), "got {v}");
    }

    #[test]
    fn ohba_mean_matches_reference_value() {
        let m = ModelParams::Ohba(OhbaParams::new(100.0, 0.5).unwrap());
        let v = m.mean_value(4.0).unwrap();
        assert!(approx_eq(v, 59.39941502901619, 1e-12), "got {v}");
    }

    #[test]
    fn mo_mean_matches_reference_values() {
        let m = ModelParams::MusaOkumoto(MusaOkumotoParams::new(10.0, 0.5).unwrap());
        let v = m.mean_value(1.0).unwrap();
        assert!(approx_eq(v, 3.58351893845611, 1e-12), "got {v}");

        let unit = ModelParams::MusaOkumoto(MusaOkumotoParams::new(1.0, 1.0).unwrap());
        let v = unit.mean_value(std::f64::consts::E - 1.0).unwrap();
        assert!(approx_eq(v, 1.0, 1e-12), "got {v}");
    }

    #[test]
    fn mean_at_zero_vanishes() {
        let models = [
            ModelParams::Go(GoParams { a: 42.0, b: 0.3 }),
            ModelParams::Ohba(OhbaParams { n: 7.0, phi: 1.2 }),
            ModelParams::MusaOkumoto(MusaOkumotoParams {
                lambda0: 5.0,
                theta: 0.25,
            }),
        ];
        for m in models {
            assert_eq!(m.mean_value(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        let m = ModelParams::Go(GoParams { a: 10.0, b: 0.1 });
        assert!(matches!(m.mean_value(-1.0), Err(Error::Domain(_))));
        assert!(matches!(m.intensity(-0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(GoParams::new(0.0, 0.1).is_err());
        assert!(GoParams::new(10.0, -0.1).is_err());
        assert!(OhbaParams::new(f64::NAN, 0.5).is_err());
        assert!(MusaOkumotoParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn intensity_reference_values() {
        let go = ModelParams::Go(GoParams { a: 100.0, b: 0.1 });
        assert!(approx_eq(go.intensity(0.0).unwrap(), 10.0, 1e-15));
        assert!(approx_eq(go.intensity(10.0).unwrap(), 3.6787944117144233, 1e-12));

        let ohba = ModelParams::Ohba(OhbaParams { n: 100.0, phi: 0.5 });
        assert_eq!(ohba.intensity(0.0).unwrap(), 0.0);

        let mo = ModelParams::MusaOkumoto(MusaOkumotoParams {
            lambda0: 10.0,
            theta: 0.5,
        });
        assert!(approx_eq(mo.intensity(0.0).unwrap(), 10.0, 1e-15));
        assert!(approx_eq(mo.intensity(1.0).unwrap(), 1.6666666666666667, 1e-12));
    }

    #[test]
    fn intensity_sup_bounds_the_intensity() {
        let models = [
            ModelParams::Go(GoParams { a: 80.0, b: 0.4 }),
            ModelParams::Ohba(OhbaParams { n: 80.0, phi: 0.4 }),
            ModelParams::MusaOkumoto(MusaOkumotoParams {
                lambda0: 10.0,
                theta: 0.5,
            }),
        ];
        for m in models {
            for &horizon in &[0.5, 2.0, 10.0, 60.0] {
                let sup = m.intensity_sup(horizon).unwrap();
                for i in 0..=200 {
                    let t = horizon * i as f64 / 200.0;
                    let lam = m.intensity(t).unwrap();
                    assert!(
                        lam <= sup * (1.0 + 1e-12),
                        "intensity {lam} above sup {sup} at t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn ohba_sup_is_the_mode_once_covered() {
        let m = ModelParams::Ohba(OhbaParams { n: 100.0, phi: 0.5 });
        // Mode at t = 2, value n phi / e.
        let sup = m.intensity_sup(10.0).unwrap();
        assert!(approx_eq(sup, 18.393972058572118, 1e-12), "got {sup}");
        // Before the mode the interval supremum is the right endpoint.
        let early = m.intensity_sup(1.0).unwrap();
        assert!(approx_eq(early, m.intensity(1.0).unwrap(), 1e-15));
    }

    #[test]
    fn dataset_rejects_bad_ordering() {
        let err = FaultDataset::new(
            vec![
                FaultObservation { time: 1.0, cumulative_faults: 2 },
                FaultObservation { time: 1.0, cumulative_faults: 3 },
            ],
            "hours",
        );
        assert!(matches!(err, Err(Error::Input(_))));

        let err = FaultDataset::new(
            vec![
                FaultObservation { time: 1.0, cumulative_faults: 2 },
                FaultObservation { time: 2.0, cumulative_faults: 1 },
            ],
            "hours",
        );
        assert!(matches!(err, Err(Error::Input(_))));

        let err = FaultDataset::new(vec![FaultObservation { time: 0.0, cumulative_faults: 0 }], "h");
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn dataset_from_events_counts_inclusively() {
        let ds = FaultDataset::from_event_times(&[0.5, 1.0, 1.5, 3.9], 4.0, 4, "h").unwrap();
        let counts: Vec<u64> = ds.observations().iter().map(|o| o.cumulative_faults).collect();
        assert_eq!(counts, vec![2, 3, 3, 4]);
        assert_eq!(ds.total_faults(), 4);
        assert_eq!(ds.last_time(), Some(4.0));
    }

    #[test]
    fn params_json_round_trip_is_tagged() {
        let m = ModelParams::MusaOkumoto(MusaOkumotoParams {
            lambda0: 10.0,
            theta: 0.5,
        });
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"model\":\"mo\""), "got {json}");
        let back: ModelParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
