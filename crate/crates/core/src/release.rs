//! Release-time cost modeling and optimization.
//!
//! Testing a version for time `T` out of a lifecycle of length `t` costs
//!
//! ```text
//! C(T) = c1 m(T) + c2 [m(t) - m(T)] + c3 T
//! ```
//!
//! where `c1` is the cost of fixing a fault during testing, `c2 > c1` the
//! cost of fixing one in the field, and `c3` the cost per unit of testing
//! time. For the exponential model the optimum has a closed form driven by
//! the cost ratio `C_r = c3 / (c2 - c1)`: testing pays off only while the
//! failure intensity exceeds `C_r`, which yields `T0 = ln(ab / C_r) / b`
//! when `ab > C_r` and no testing at all otherwise.
//!
//! When a previous version is still in the field, faults it already accounts
//! for are removed from the new version's field-fix bill and charged at a
//! separate rate `c4`:
//!
//! ```text
//! C(T) = c1 m(T) + c2 [m(t) - m(T) - n(T)] + c3 T + c4 n(T)
//! ```
//!
//! with `n(T)` the previous version's mean curve. The bracketed term is kept
//! exactly in this form; see the user documentation for how that interacts
//! with overlapping fault populations. With `n = 0` or `c4 = c2` the
//! expression collapses back to the single-version cost.
//!
//! [`optimize_release_numeric`] minimizes an arbitrary cost curve with a
//! coarse grid pass plus golden-section refinement; it exists for the model
//! variants without a closed form and as an independent cross-check of the
//! closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nhpp::{GoParams, ModelParams};
use crate::optim::golden_min;

/// Number of coarse grid points scanned before refinement.
const GRID_POINTS: usize = 1000;

/// Absolute time tolerance of the golden-section refinement.
const REFINE_TOL: f64 = 1e-6;

/// Cost model parameters. `c4` only matters for the multi-version cost and
/// can be left at zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Cost of fixing a fault found during testing.
    pub c1: f64,
    /// Cost of fixing a fault found in operation; must exceed `c1`.
    pub c2: f64,
    /// Cost per unit of testing time.
    pub c3: f64,
    /// Cost rate applied to carried-over faults in the multi-version model.
    #[serde(default)]
    pub c4: f64,
    /// Total software lifecycle length `t`.
    pub lifecycle_t: f64,
}

impl CostParams {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64, lifecycle_t: f64) -> Result<Self> {
        let params = CostParams { c1, c2, c3, c4, lifecycle_t };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
            ("lifecycle_t", self.lifecycle_t),
        ] {
            if !v.is_finite() {
                return Err(Error::input(format!("cost parameter {name} must be finite, got {v}")));
            }
        }
        if self.c1 < 0.0 || self.c3 < 0.0 || self.c4 < 0.0 {
            return Err(Error::input("cost parameters must be nonnegative"));
        }
        if self.c2 <= self.c1 {
            return Err(Error::input(format!(
                "operational fix cost c2 = {} must exceed testing fix cost c1 = {}",
                self.c2, self.c1
            )));
        }
        if self.lifecycle_t <= 0.0 {
            return Err(Error::input(format!(
                "lifecycle length must be positive, got {}",
                self.lifecycle_t
            )));
        }
        Ok(())
    }
}

/// Which branch of the optimal release policy applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyCase {
    /// Testing never pays: release immediately (`T* = 0`).
    NoTesting,
    /// The unconstrained optimum lies inside the lifecycle.
    Interior,
    /// The optimum is clamped to the end of the lifecycle.
    FullLifecycle,
}

/// An optimal release decision: the time, the branch it came from, and the
/// cost at that time. `t0` carries the unconstrained optimum when one exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReleasePolicy {
    pub t_star: f64,
    pub case: PolicyCase,
    pub expected_cost_at_t_star: f64,
    pub t0: Option<f64>,
}

/// Expected cost of releasing at `t_release` under the single-version model.
pub fn expected_cost(model: &ModelParams, costs: &CostParams, t_release: f64) -> Result<f64> {
    costs.validate()?;
    if !t_release.is_finite() || t_release < 0.0 || t_release > costs.lifecycle_t {
        return Err(Error::domain(format!(
            "release time {t_release} outside [0, {}]",
            costs.lifecycle_t
        )));
    }
    let m_rel = model.mean_value(t_release)?;
    let m_life = model.mean_value(costs.lifecycle_t)?;
    Ok(costs.c1 * m_rel + costs.c2 * (m_life - m_rel) + costs.c3 * t_release)
}

/// The break-even intensity `C_r = c3 / (c2 - c1)`.
pub fn cost_ratio(costs: &CostParams) -> Result<f64> {
    if !(costs.c2 > costs.c1) {
        return Err(Error::input(format!(
            "cost ratio requires c2 > c1, got c2 = {}, c1 = {}",
            costs.c2, costs.c1
        )));
    }
    Ok(costs.c3 / (costs.c2 - costs.c1))
}

/// Closed-form optimal release time for the exponential model.
///
/// If the initial intensity `ab` does not exceed the break-even ratio the
/// optimal policy is to not test at all. Otherwise the unconstrained optimum
/// `T0 = ln(ab / C_r) / b` applies, clamped to the lifecycle.
pub fn optimal_release_time(go: &GoParams, costs: &CostParams) -> Result<ReleasePolicy> {
    go.validate()?;
    costs.validate()?;
    let ratio = cost_ratio(costs)?;
    let model = ModelParams::Go(*go);
    let initial_intensity = go.a * go.b;

    if initial_intensity > ratio {
        let t0 = (initial_intensity / ratio).ln() / go.b;
        let (t_star, case) = if t0 < costs.lifecycle_t {
            (t0, PolicyCase::Interior)
        } else {
            (costs.lifecycle_t, PolicyCase::FullLifecycle)
        };
        Ok(ReleasePolicy {
            t_star,
            case,
            expected_cost_at_t_star: expected_cost(&model, costs, t_star)?,
            t0: Some(t0),
        })
    } else {
        Ok(ReleasePolicy {
            t_star: 0.0,
            case: PolicyCase::NoTesting,
            expected_cost_at_t_star: expected_cost(&model, costs, 0.0)?,
            t0: None,
        })
    }
}

/// Expected cost when a previous version's fault population (mean curve
/// `n(T)`) overlaps the one under test. `previous = None` means no carry-over
/// and reduces exactly to [`expected_cost`].
pub fn expected_cost_multiversion(
    model: &ModelParams,
    previous: Option<&ModelParams>,
    costs: &CostParams,
    t_release: f64,
) -> Result<f64> {
    costs.validate()?;
    if !t_release.is_finite() || t_release < 0.0 || t_release > costs.lifecycle_t {
        return Err(Error::domain(format!(
            "release time {t_release} outside [0, {}]",
            costs.lifecycle_t
        )));
    }
    let m_rel = model.mean_value(t_release)?;
    let m_life = model.mean_value(costs.lifecycle_t)?;
    let n_rel = match previous {
        Some(prev) => prev.mean_value(t_release)?,
        None => 0.0,
    };
    Ok(costs.c1 * m_rel + costs.c2 * (m_life - m_rel - n_rel) + costs.c3 * t_release + costs.c4 * n_rel)
}

/// Minimizes an arbitrary release cost curve over `[0, lifecycle_t]`.
///
/// A 1000-point grid locates the best bracket, golden-section search refines
/// it to an absolute tolerance of 1e-6, and both endpoints always compete as
/// candidates. Exact cost ties resolve to the smallest time.
pub fn optimize_release_numeric<F>(mut cost_fn: F, lifecycle_t: f64) -> Result<ReleasePolicy>
where
    F: FnMut(f64) -> f64,
{
    if !lifecycle_t.is_finite() || lifecycle_t <= 0.0 {
        return Err(Error::domain(format!(
            "lifecycle length must be positive, got {lifecycle_t}"
        )));
    }

    let step = lifecycle_t / (GRID_POINTS - 1) as f64;
    let mut best_idx = 0;
    let mut best_cost = f64::INFINITY;
    let mut grid = Vec::with_capacity(GRID_POINTS);
    for i in 0..GRID_POINTS {
        let t = if i == GRID_POINTS - 1 { lifecycle_t } else { i as f64 * step };
        let c = cost_fn(t);
        if !c.is_finite() {
            return Err(Error::numeric(format!("cost at T = {t} is not finite")));
        }
        grid.push((t, c));
        if c < best_cost {
            best_cost = c;
            best_idx = i;
        }
    }

    let lo = grid[best_idx.saturating_sub(1)].0;
    let hi = grid[(best_idx + 1).min(GRID_POINTS - 1)].0;
    let (refined_t, refined_cost, _) = golden_min(&mut cost_fn, lo, hi, REFINE_TOL);
    if !refined_cost.is_finite() {
        return Err(Error::numeric(format!("cost at T = {refined_t} is not finite")));
    }

    // Endpoints always compete; smallest time wins exact ties.
    let mut candidates = vec![grid[0], grid[GRID_POINTS - 1], (refined_t, refined_cost), grid[best_idx]];
    candidates.sort_by(|x, y| {
        x.1.partial_cmp(&y.1)
            .expect("costs are finite")
            .then(x.0.partial_cmp(&y.0).expect("times are finite"))
    });
    let (t_star, cost) = candidates[0];

    let (case, t0) = if t_star == 0.0 {
        (PolicyCase::NoTesting, None)
    } else if t_star == lifecycle_t {
        (PolicyCase::FullLifecycle, None)
    } else {
        (PolicyCase::Interior, Some(t_star))
    };
    Ok(ReleasePolicy {
        t_star,
        case,
        expected_cost_at_t_star: cost,
        t0,
    })
}
