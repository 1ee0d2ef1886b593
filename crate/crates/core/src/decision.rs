//! Priority categories and the release decision rule.
//!
//! Modules are binned into five priority categories by their importance
//! weight `p_k` against four descending thresholds. A module whose untested
//! parent sits in a strictly higher category is promoted one category, once;
//! promotions never skip a level and never demote.
//!
//! Test outcomes are judged by their deviation from the optimal policy:
//! `alpha` the relative overrun in testing time, `beta` in cost, and the
//! limiting factor `delta = alpha + beta`. The odds-weighted variant blends
//! the two deviations by how much the organization cares about cost:
//! `delta = p (C - C*)/C* + (1 - p) (T - T*)/T*`.
//!
//! Categories are processed from VERY_HIGH down, carrying the running sum
//! of weighted deltas; the recommendation for each category compares that
//! cumulative delta against the stringency. Per-category deltas are always
//! reported alongside, so a stricter per-category reading stays available
//! to callers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::release::{PolicyCase, ReleasePolicy};

/// Priority categories in ascending order, so the derived ordering ranks
/// `VeryHigh` above the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityCategory {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl PriorityCategory {
    /// All categories from highest to lowest priority, the processing order
    /// of the decision engine.
    pub const DESCENDING: [PriorityCategory; 5] = [
        PriorityCategory::VeryHigh,
        PriorityCategory::High,
        PriorityCategory::Medium,
        PriorityCategory::Low,
        PriorityCategory::VeryLow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PriorityCategory::VeryHigh => "very_high",
            PriorityCategory::High => "high",
            PriorityCategory::Medium => "medium",
            PriorityCategory::Low => "low",
            PriorityCategory::VeryLow => "very_low",
        }
    }

    /// The next category up; saturates at `VeryHigh`.
    pub fn promoted(self) -> PriorityCategory {
        match self {
            PriorityCategory::VeryLow => PriorityCategory::Low,
            PriorityCategory::Low => PriorityCategory::Medium,
            PriorityCategory::Medium => PriorityCategory::High,
            PriorityCategory::High | PriorityCategory::VeryHigh => PriorityCategory::VeryHigh,
        }
    }
}

impl std::str::FromStr for PriorityCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "very_high" => Ok(PriorityCategory::VeryHigh),
            "high" => Ok(PriorityCategory::High),
            "medium" => Ok(PriorityCategory::Medium),
            "low" => Ok(PriorityCategory::Low),
            "very_low" => Ok(PriorityCategory::VeryLow),
            other => Err(Error::input(format!("unknown priority category {other:?}"))),
        }
    }
}

/// Four descending cut points on `p_k`; a weight at or above a cut point
/// lands in that category or higher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryThresholds(pub [f64; 4]);

impl Default for CategoryThresholds {
    fn default() -> Self {
        CategoryThresholds([0.30, 0.20, 0.10, 0.05])
    }
}

impl CategoryThresholds {
    pub fn validate(&self) -> Result<()> {
        let t = self.0;
        for v in t {
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                return Err(Error::input(format!(
                    "category thresholds must lie strictly inside (0, 1), got {v}"
                )));
            }
        }
        if !(t[0] > t[1] && t[1] > t[2] && t[2] > t[3]) {
            return Err(Error::input(format!(
                "category thresholds must strictly decrease, got {t:?}"
            )));
        }
        Ok(())
    }

    fn categorize(&self, p: f64) -> PriorityCategory {
        let t = self.0;
        if p >= t[0] {
            PriorityCategory::VeryHigh
        } else if p >= t[1] {
            PriorityCategory::High
        } else if p >= t[2] {
            PriorityCategory::Medium
        } else if p >= t[3] {
            PriorityCategory::Low
        } else {
            PriorityCategory::VeryLow
        }
    }
}

/// One module's priority after categorization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityAssignment {
    pub module_id: String,
    pub p_k: f64,
    pub category: PriorityCategory,
    /// True when an untested parent in a strictly higher category promoted
    /// this module one step.
    pub boosted: bool,
    /// True when another module carries exactly the same weight; the
    /// relative order within the tie is by id and may deserve a manual look.
    pub tie: bool,
}

/// Bins importance weights into categories, applies the untested-parent
/// promotion, and returns assignments sorted by weight (descending) with
/// ties broken by module id.
///
/// `dependencies` maps a module to its parents; `tested` lists module ids
/// that already went through testing. Promotions are computed from the
/// pre-promotion categories in a single pass, so a chain of dependencies
/// cannot cascade a module upward more than one step.
pub fn categorize(
    assignments: &[(String, f64)],
    dependencies: &BTreeMap<String, Vec<String>>,
    tested: &BTreeSet<String>,
    thresholds: &CategoryThresholds,
) -> Result<Vec<PriorityAssignment>> {
    thresholds.validate()?;
    if assignments.is_empty() {
        return Err(Error::input("at least one module is required"));
    }
    let mut known = BTreeSet::new();
    for (id, p) in assignments {
        if !known.insert(id.as_str()) {
            return Err(Error::input(format!("duplicate module id {id}")));
        }
        if !p.is_finite() || !(0.0..=1.0).contains(p) {
            return Err(Error::input(format!(
                "module {id}: importance weight must lie in [0, 1], got {p}"
            )));
        }
    }
    for (child, parents) in dependencies {
        if !known.contains(child.as_str()) {
            return Err(Error::input(format!("dependency graph names unknown module {child}")));
        }
        for parent in parents {
            if !known.contains(parent.as_str()) {
                return Err(Error::input(format!(
                    "module {child} depends on unknown module {parent}"
                )));
            }
            if parent == child {
                return Err(Error::input(format!("module {child} depends on itself")));
            }
        }
    }
    detect_cycle(dependencies)?;

    let base: BTreeMap<&str, PriorityCategory> = assignments
        .iter()
        .map(|(id, p)| (id.as_str(), thresholds.categorize(*p)))
        .collect();

    let mut result: Vec<PriorityAssignment> = assignments
        .iter()
        .map(|(id, p)| {
            let own = base[id.as_str()];
            let boosted = dependencies.get(id).is_some_and(|parents| {
                parents.iter().any(|parent| {
                    !tested.contains(parent.as_str()) && base[parent.as_str()] > own
                })
            });
            PriorityAssignment {
                module_id: id.clone(),
                p_k: *p,
                category: if boosted { own.promoted() } else { own },
                boosted,
                tie: false,
            }
        })
        .collect();

    // Exact weight ties get flagged for a manual look.
    for i in 0..result.len() {
        let tie = result
            .iter()
            .enumerate()
            .any(|(j, other)| i != j && other.p_k == result[i].p_k);
        result[i].tie = tie;
    }

    result.sort_by(|a, b| {
        b.p_k
            .partial_cmp(&a.p_k)
            .expect("weights are finite")
            .then_with(|| a.module_id.cmp(&b.module_id))
    });
    Ok(result)
}

fn detect_cycle(dependencies: &BTreeMap<String, Vec<String>>) -> Result<()> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Visiting,
        Done,
    }
    fn visit<'a>(
        node: &'a str,
        graph: &'a BTreeMap<String, Vec<String>>,
        marks: &mut BTreeMap<&'a str, Mark>,
        path: &mut Vec<&'a str>,
    ) -> Result<()> {
        match marks.get(node) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Visiting) => {
                let start = path.iter().position(|&n| n == node).unwrap_or(0);
                let mut cycle: Vec<&str> = path[start..].to_vec();
                cycle.push(node);
                return Err(Error::input(format!(
                    "dependency cycle: {}",
                    cycle.join(" -> ")
                )));
            }
            None => {}
        }
        marks.insert(node, Mark::Visiting);
        path.push(node);
        if let Some(parents) = graph.get(node) {
            for parent in parents {
                visit(parent, graph, marks, path)?;
            }
        }
        path.pop();
        marks.insert(node, Mark::Done);
        Ok(())
    }

    let mut marks = BTreeMap::new();
    let mut path = Vec::new();
    for node in dependencies.keys() {
        visit(node, dependencies, &mut marks, &mut path)?;
    }
    Ok(())
}

/// Relative overrun of actual testing time against the optimum:
/// `alpha = (T_a - T*) / T*`.
///
/// When the optimal policy is to not test at all (`T* = 0`) the deviation is
/// undefined; the policy case itself is the answer then.
pub fn deviation_time(actual: f64, optimal: f64) -> Result<f64> {
    if !actual.is_finite() || actual < 0.0 {
        return Err(Error::input(format!(
            "actual time must be finite and nonnegative, got {actual}"
        )));
    }
    if optimal == 0.0 {
        return Err(Error::UndefinedDeviation(
            "optimal testing time is zero (no-testing policy); consult the policy case".to_string(),
        ));
    }
    if !optimal.is_finite() || optimal < 0.0 {
        return Err(Error::input(format!(
            "optimal time must be finite and positive, got {optimal}"
        )));
    }
    Ok((actual - optimal) / optimal)
}

/// Relative overrun of actual cost against the optimal expected cost:
/// `beta = (C_a - C_0) / C_0`.
pub fn deviation_cost(actual: f64, optimal: f64) -> Result<f64> {
    if !actual.is_finite() || actual < 0.0 {
        return Err(Error::input(format!(
            "actual cost must be finite and nonnegative, got {actual}"
        )));
    }
    if !optimal.is_finite() || optimal <= 0.0 {
        return Err(Error::input(format!(
            "optimal cost must be finite and positive, got {optimal}"
        )));
    }
    Ok((actual - optimal) / optimal)
}

/// The plain limiting factor `delta = alpha + beta`.
pub fn limiting_factor(alpha: f64, beta: f64) -> f64 {
    alpha + beta
}

/// Odds-weighted limiting factor
/// `delta = p (C - C*)/C* + (1 - p) (T - T*)/T*`, where `p` is the odds in
/// favor of cost.
pub fn weighted_limiting_factor(
    actual_cost: f64,
    optimal_cost: f64,
    actual_time: f64,
    optimal_time: f64,
    cost_odds: f64,
) -> Result<f64> {
    if !cost_odds.is_finite() || !(0.0..=1.0).contains(&cost_odds) {
        return Err(Error::input(format!(
            "cost odds must lie in [0, 1], got {cost_odds}"
        )));
    }
    if optimal_cost <= 0.0 || optimal_time <= 0.0 {
        return Err(Error::UndefinedDeviation(
            "weighted deviation needs positive optimal cost and time; consult the policy case"
                .to_string(),
        ));
    }
    let cost_term = deviation_cost(actual_cost, optimal_cost)?;
    let time_term = deviation_time(actual_time, optimal_time)?;
    Ok(cost_odds * cost_term + (1.0 - cost_odds) * time_term)
}

/// Actual outcome of testing one priority category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub actual_time: f64,
    pub actual_cost: f64,
    pub faults_found: u64,
    pub faults_tolerated: u64,
}

impl TestOutcome {
    pub fn validate(&self) -> Result<()> {
        if !self.actual_time.is_finite() || self.actual_time < 0.0 {
            return Err(Error::input(format!(
                "actual time must be finite and nonnegative, got {}",
                self.actual_time
            )));
        }
        if !self.actual_cost.is_finite() || self.actual_cost < 0.0 {
            return Err(Error::input(format!(
                "actual cost must be finite and nonnegative, got {}",
                self.actual_cost
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recommendation {
    Release,
    ContinueTesting,
    Reject,
}

/// The decision rule: REJECT when `delta` exceeds the stringency, otherwise
/// RELEASE when the fault count stayed inside the tolerance and
/// CONTINUE_TESTING when it did not.
pub fn recommend(delta: f64, stringency: f64, outcome: &TestOutcome) -> Result<Recommendation> {
    if !stringency.is_finite() || stringency < 0.0 {
        return Err(Error::input(format!(
            "stringency must be finite and nonnegative, got {stringency}"
        )));
    }
    if !delta.is_finite() {
        return Err(Error::numeric(format!("limiting factor is not finite: {delta}")));
    }
    outcome.validate()?;
    if delta > stringency {
        Ok(Recommendation::Reject)
    } else if outcome.faults_found > outcome.faults_tolerated {
        Ok(Recommendation::ContinueTesting)
    } else {
        Ok(Recommendation::Release)
    }
}

/// Full record of the decision for one priority category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub category: PriorityCategory,
    pub alpha: f64,
    pub beta: f64,
    /// Plain limiting factor `alpha + beta`.
    pub delta: f64,
    /// Odds-weighted limiting factor for this category alone.
    pub weighted_delta: f64,
    /// Running sum of weighted deltas from VERY_HIGH down to this category;
    /// this is what the recommendation compares against the stringency.
    pub cumulative_delta: f64,
    pub stringency: f64,
    pub recommendation: Recommendation,
}

/// Evaluates per-category outcomes against the optimal policy, processing
/// categories from VERY_HIGH down and carrying the cumulative weighted
/// delta into each recommendation.
///
/// Errors with an undefined-deviation when the policy's optimal time is
/// zero; the no-testing case has no meaningful deviations to report.
pub fn evaluate_categories(
    outcomes: &[(PriorityCategory, TestOutcome)],
    policy: &ReleasePolicy,
    stringency: f64,
    cost_odds: f64,
) -> Result<Vec<Decision>> {
    if outcomes.is_empty() {
        return Err(Error::input("at least one category outcome is required"));
    }
    if policy.case == PolicyCase::NoTesting || policy.t_star == 0.0 {
        return Err(Error::UndefinedDeviation(
            "optimal testing time is zero (no-testing policy); deviations are undefined".to_string(),
        ));
    }
    let mut seen = BTreeSet::new();
    for (category, outcome) in outcomes {
        if !seen.insert(*category) {
            return Err(Error::input(format!(
                "duplicate outcome for category {}",
                category.as_str()
            )));
        }
        outcome.validate()?;
    }

    let mut ordered: Vec<&(PriorityCategory, TestOutcome)> = outcomes.iter().collect();
    ordered.sort_by(|a, b| b.0.cmp(&a.0));

    let mut cumulative = 0.0;
    let mut decisions = Vec::with_capacity(ordered.len());
    for (category, outcome) in ordered {
        let alpha = deviation_time(outcome.actual_time, policy.t_star)?;
        let beta = deviation_cost(outcome.actual_cost, policy.expected_cost_at_t_star)?;
        let weighted = weighted_limiting_factor(
            outcome.actual_cost,
            policy.expected_cost_at_t_star,
            outcome.actual_time,
            policy.t_star,
            cost_odds,
        )?;
        cumulative += weighted;
        let recommendation = recommend(cumulative, stringency, outcome)?;
        decisions.push(Decision {
            category: *category,
            alpha,
            beta,
            delta: limiting_factor(alpha, beta),
            weighted_delta: weighted,
            cumulative_delta: cumulative,
            stringency,
            recommendation,
        });
    }
    Ok(decisions)
}
