//! Static and historical module metrics, and the feature vectors built from
//! them for priority scoring.
//!
//! The individual metrics are deliberately small functions with explicit
//! domains: total cyclomatic complexity folds per-procedure complexities
//! into a module-level count, decision density relates that count to size,
//! coupling aggregates interface counts into `[0, 1)`, layout cost weighs
//! screen transitions by frequency, layout appropriateness compares a
//! proposed layout's cost to the optimal one (100 means optimal), and the
//! maturity index tracks how much of a release's module population churned.
//!
//! [`feature_vector`] assembles ten features per module in a fixed order and
//! min-max scales each one against the whole project, so every feature lands
//! in `[0, 1]`. A feature that is constant across the project carries no
//! ranking information and is pinned at 0.5.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of features per module, in the documented order.
pub const FEATURE_COUNT: usize = 10;

/// Interface counts and calibration constants for the coupling metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingInputs {
    pub data_in: u32,
    pub control_in: u32,
    pub data_out: u32,
    pub control_out: u32,
    pub global_data: u32,
    pub global_control: u32,
    /// Modules this one calls (fan-out).
    pub fan_out: u32,
    /// Modules that call this one (fan-in).
    pub fan_in: u32,
    #[serde(default = "default_calibration")]
    pub calib_k: f64,
    #[serde(default = "default_calibration")]
    pub calib_a: f64,
    #[serde(default = "default_calibration")]
    pub calib_b: f64,
    #[serde(default = "default_calibration")]
    pub calib_c: f64,
}

fn default_calibration() -> f64 {
    1.0
}

impl CouplingInputs {
    /// Counts-only constructor with all calibration constants at 1.
    pub fn from_counts(
        data_in: u32,
        control_in: u32,
        data_out: u32,
        control_out: u32,
        global_data: u32,
        global_control: u32,
        fan_out: u32,
        fan_in: u32,
    ) -> Self {
        CouplingInputs {
            data_in,
            control_in,
            data_out,
            control_out,
            global_data,
            global_control,
            fan_out,
            fan_in,
            calib_k: 1.0,
            calib_a: 1.0,
            calib_b: 1.0,
            calib_c: 1.0,
        }
    }
}

/// Screen/page transition table and the cost of the optimal layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutInputs {
    /// `(frequency, cost)` pairs, all nonnegative.
    pub transitions: Vec<(f64, f64)>,
    pub optimal_cost: f64,
}

/// Module population churn counts for one release.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaintenanceCounts {
    pub total_modules: u64,
    pub added: u64,
    pub changed: u64,
    pub deleted: u64,
}

/// Everything known about one module that feeds priority scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleRecord {
    pub id: String,
    pub name: String,
    /// Ids of modules this one depends on (its parents).
    #[serde(default)]
    pub depends_on: Vec<String>,
    pub procedure_complexities: Vec<u32>,
    pub logical_lines: u64,
    pub coupling: CouplingInputs,
    #[serde(default)]
    pub layout: Option<LayoutInputs>,
    #[serde(default)]
    pub maintenance: Option<MaintenanceCounts>,
    pub production_hours: f64,
    pub programming_path_score: f64,
    pub size_score: f64,
    pub reporter_skill_score: f64,
    pub weight_priority_score: f64,
    pub reuse_fraction: f64,
}

/// Total cyclomatic complexity of a module from its per-procedure
/// complexities: `sum - count + 1`, the complexity of the procedures wired
/// into one call graph.
pub fn total_cyclomatic_complexity(complexities: &[u32]) -> Result<u64> {
    if complexities.is_empty() {
        return Err(Error::input("at least one procedure complexity is required"));
    }
    let mut sum = 0u64;
    for (idx, &cc) in complexities.iter().enumerate() {
        if cc == 0 {
            return Err(Error::input(format!(
                "procedure {idx}: cyclomatic complexity must be at least 1"
            )));
        }
        sum += u64::from(cc);
    }
    Ok(sum - complexities.len() as u64 + 1)
}

/// Decisions per logical line of code.
pub fn decision_density(complexity: u64, logical_lines: u64) -> Result<f64> {
    if complexity == 0 {
        return Err(Error::input("complexity must be positive"));
    }
    if logical_lines == 0 {
        return Err(Error::input("logical lines of code must be positive"));
    }
    Ok(complexity as f64 / logical_lines as f64)
}

/// Coupling in `[0, 1)`: zero for a module reachable through a single
/// connection, approaching one as interface surface grows.
pub fn coupling(inputs: &CouplingInputs) -> Result<f64> {
    for (name, v) in [
        ("calib_k", inputs.calib_k),
        ("calib_a", inputs.calib_a),
        ("calib_b", inputs.calib_b),
        ("calib_c", inputs.calib_c),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::input(format!(
                "calibration constant {name} must be finite and positive, got {v}"
            )));
        }
    }
    let denom = f64::from(inputs.data_in)
        + inputs.calib_a * f64::from(inputs.control_in)
        + f64::from(inputs.data_out)
        + inputs.calib_b * f64::from(inputs.control_out)
        + f64::from(inputs.global_data)
        + inputs.calib_c * f64::from(inputs.global_control)
        + f64::from(inputs.fan_out)
        + f64::from(inputs.fan_in);
    if denom <= 0.0 {
        return Err(Error::input(
            "coupling is undefined when every interface count is zero",
        ));
    }
    // k > 0 keeps the value strictly below 1; clamp guards the low side
    // when the calibration constant exceeds the denominator.
    Ok((1.0 - inputs.calib_k / denom).max(0.0))
}

/// Frequency-weighted layout cost of a transition table.
pub fn layout_cost(transitions: &[(f64, f64)]) -> Result<f64> {
    if transitions.is_empty() {
        return Err(Error::input("at least one transition is required"));
    }
    let mut total = 0.0;
    for (idx, &(freq, cost)) in transitions.iter().enumerate() {
        if !freq.is_finite() || freq < 0.0 || !cost.is_finite() || cost < 0.0 {
            return Err(Error::input(format!(
                "transition {idx}: frequency and cost must be finite and nonnegative"
            )));
        }
        total += freq * cost;
    }
    Ok(total)
}

/// Layout appropriateness: 100 times the ratio of the optimal layout's cost
/// to the proposed layout's cost, so an optimal layout scores 100.
pub fn layout_appropriateness(optimal_cost: f64, proposed_cost: f64) -> Result<f64> {
    if !optimal_cost.is_finite() || optimal_cost <= 0.0 {
        return Err(Error::input(format!(
            "optimal layout cost must be positive, got {optimal_cost}"
        )));
    }
    if !proposed_cost.is_finite() || proposed_cost <= 0.0 {
        return Err(Error::input(format!(
            "proposed layout cost must be positive, got {proposed_cost}"
        )));
    }
    Ok(100.0 * optimal_cost / proposed_cost)
}

/// Software maturity index: the fraction of the release's module population
/// untouched by maintenance. Negative when churn exceeds the population.
pub fn software_maturity_index(counts: &MaintenanceCounts) -> Result<f64> {
    if counts.total_modules == 0 {
        return Err(Error::input("total module count must be positive"));
    }
    let churn = (counts.added + counts.changed + counts.deleted) as f64;
    Ok((counts.total_modules as f64 - churn) / counts.total_modules as f64)
}

fn require_unit_interval(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must lie in [0, 1], got {v}")))
    }
}

impl ModuleRecord {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::input("module id must not be empty"));
        }
        if !self.production_hours.is_finite() || self.production_hours < 0.0 {
            return Err(Error::input(format!(
                "module {}: production hours must be finite and nonnegative",
                self.id
            )));
        }
        for (name, v) in [
            ("programming path score", self.programming_path_score),
            ("size score", self.size_score),
            ("reporter skill score", self.reporter_skill_score),
            ("weight priority score", self.weight_priority_score),
            ("reuse fraction", self.reuse_fraction),
        ] {
            require_unit_interval(&format!("module {}: {name}", self.id), v)?;
        }
        if self.depends_on.iter().any(|d| d == &self.id) {
            return Err(Error::input(format!("module {} depends on itself", self.id)));
        }
        Ok(())
    }

    /// Raw (unscaled) feature values in the documented order.
    pub fn raw_features(&self) -> Result<[f64; FEATURE_COUNT]> {
        self.validate()?;
        let tcc = total_cyclomatic_complexity(&self.procedure_complexities)?;
        let density = decision_density(tcc, self.logical_lines)?;
        let coupling_value = coupling(&self.coupling)?;
        let layout_term = match &self.layout {
            Some(layout) => {
                let proposed = layout_cost(&layout.transitions)?;
                1.0 - layout_appropriateness(layout.optimal_cost, proposed)? / 100.0
            }
            None => 0.0,
        };
        let maturity_term = match &self.maintenance {
            Some(counts) => 1.0 - software_maturity_index(counts)?,
            None => 0.0,
        };
        Ok([
            self.production_hours,
            density,
            self.programming_path_score,
            self.size_score,
            self.reporter_skill_score,
            self.weight_priority_score,
            1.0 - self.reuse_fraction,
            coupling_value,
            layout_term,
            maturity_term,
        ])
    }
}

/// Per-feature minima and maxima across a project, the scaling reference
/// for [`feature_vector`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanges {
    pub min: [f64; FEATURE_COUNT],
    pub max: [f64; FEATURE_COUNT],
}

impl FeatureRanges {
    pub fn from_records(records: &[ModuleRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::input("at least one module is required"));
        }
        let mut min = [f64::INFINITY; FEATURE_COUNT];
        let mut max = [f64::NEG_INFINITY; FEATURE_COUNT];
        for record in records {
            let raw = record.raw_features()?;
            for i in 0..FEATURE_COUNT {
                min[i] = min[i].min(raw[i]);
                max[i] = max[i].max(raw[i]);
            }
        }
        Ok(FeatureRanges { min, max })
    }
}

/// Min-max scaled feature vector for one module against project ranges.
/// Features constant across the project scale to 0.5.
pub fn feature_vector(record: &ModuleRecord, ranges: &FeatureRanges) -> Result<[f64; FEATURE_COUNT]> {
    let raw = record.raw_features()?;
    let mut scaled = [0.0; FEATURE_COUNT];
    for i in 0..FEATURE_COUNT {
        let span = ranges.max[i] - ranges.min[i];
        scaled[i] = if span == 0.0 {
            0.5
        } else {
            (raw[i] - ranges.min[i]) / span
        };
    }
    Ok(scaled)
}

/// Validates a project's module list as a whole: unique ids, resolvable
/// dependencies, no self-references, and an acyclic dependency graph.
pub fn validate_records(records: &[ModuleRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::input("at least one module is required"));
    }
    let mut ids = BTreeSet::new();
    for record in records {
        record.validate()?;
        if !ids.insert(record.id.as_str()) {
            return Err(Error::input(format!("duplicate module id {}", record.id)));
        }
    }
    let graph: BTreeMap<&str, &[String]> = records
        .iter()
        .map(|r| (r.id.as_str(), r.depends_on.as_slice()))
        .collect();
    for record in records {
        for dep in &record.depends_on {
            if !graph.contains_key(dep.as_str()) {
                return Err(Error::input(format!(
                    "module {} depends on unknown module {dep}",
                    record.id
                )));
            }
        }
    }
    detect_cycle(&graph)
}

fn detect_cycle(graph: &BTreeMap<&str, &[String]>) -> Result<()> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Visiting,
        Done,
    }
    fn visit<'a>(
        node: &'a str,
        graph: &BTreeMap<&'a str, &'a [String]>,
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
        for dep in graph.get(node).copied().unwrap_or(&[]) {
            visit(dep, graph, marks, path)?;
        }
        path.pop();
        marks.insert(node, Mark::Done);
        Ok(())
    }

    let mut marks = BTreeMap::new();
    let mut path = Vec::new();
    for &node in graph.keys() {
        visit(node, graph, &mut marks, &mut path)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basic_record(id: &str) -> ModuleRecord {
        ModuleRecord {
            id: id.to_string(),
            name: format!("module {id}"),
            depends_on: vec![],
            procedure_complexities: vec![3, 5, 2],
            logical_lines: 100,
            coupling: CouplingInputs::from_counts(1, 1, 1, 1, 1, 1, 1, 1),
            layout: None,
            maintenance: None,
            production_hours: 10.0,
            programming_path_score: 0.5,
            size_score: 0.5,
            reporter_skill_score: 0.5,
            weight_priority_score: 0.5,
            reuse_fraction: 0.0,
        }
    }

    #[test]
    fn total_complexity_reference_values() {
        assert_eq!(total_cyclomatic_complexity(&[3, 5, 2]).unwrap(), 8);
        assert_eq!(total_cyclomatic_complexity(&[9]).unwrap(), 9);
        assert_eq!(total_cyclomatic_complexity(&[1, 1, 1, 1]).unwrap(), 1);
        assert!(matches!(total_cyclomatic_complexity(&[]), Err(Error::Input(_))));
        assert!(matches!(total_cyclomatic_complexity(&[3, 0]), Err(Error::Input(_))));
    }

    #[test]
    fn decision_density_reference_values() {
        assert_eq!(decision_density(10, 100).unwrap(), 0.1);
        assert_eq!(decision_density(17, 17).unwrap(), 1.0);
        assert!(matches!(decision_density(7, 0), Err(Error::Input(_))));
    }

    #[test]
    fn coupling_reference_values() {
        let all_ones = CouplingInputs::from_counts(1, 1, 1, 1, 1, 1, 1, 1);
        assert_eq!(coupling(&all_ones).unwrap(), 0.875);

        let single = CouplingInputs::from_counts(1, 0, 0, 0, 0, 0, 0, 0);
        assert_eq!(coupling(&single).unwrap(), 0.0);

        let none = CouplingInputs::from_counts(0, 0, 0, 0, 0, 0, 0, 0);
        assert!(matches!(coupling(&none), Err(Error::Input(_))));
    }

    #[test]
    fn coupling_clamps_oversized_calibration() {
        let mut inputs = CouplingInputs::from_counts(1, 0, 0, 0, 0, 0, 0, 0);
        inputs.calib_k = 5.0;
        assert_eq!(coupling(&inputs).unwrap(), 0.0);
    }

    #[test]
    fn coupling_stays_below_one() {
        let wide = CouplingInputs::from_counts(1000, 1000, 1000, 1000, 1000, 1000, 1000, 1000);
        let c = coupling(&wide).unwrap();
        assert!((0.0..1.0).contains(&c), "got {c}");
    }

    #[test]
    fn layout_cost_reference_values() {
        assert_eq!(layout_cost(&[(1.0, 5.0)]).unwrap(), 5.0);
        assert_eq!(layout_cost(&[(2.0, 3.0), (4.0, 0.5)]).unwrap(), 8.0);
        assert_eq!(layout_cost(&[(0.0, 100.0)]).unwrap(), 0.0);
        assert!(matches!(layout_cost(&[]), Err(Error::Input(_))));
        assert!(matches!(layout_cost(&[(-1.0, 2.0)]), Err(Error::Input(_))));
    }

    #[test]
    fn layout_appropriateness_reference_values() {
        assert_eq!(layout_appropriateness(50.0, 50.0).unwrap(), 100.0);
        assert_eq!(layout_appropriateness(40.0, 80.0).unwrap(), 50.0);
        assert_eq!(layout_appropriateness(40.0, 40000.0).unwrap(), 0.1);
        assert!(matches!(layout_appropriateness(0.0, 10.0), Err(Error::Input(_))));
        assert!(matches!(layout_appropriateness(10.0, 0.0), Err(Error::Input(_))));
    }

    #[test]
    fn maturity_index_reference_values() {
        let pristine = MaintenanceCounts { total_modules: 10, added: 0, changed: 0, deleted: 0 };
        assert_eq!(software_maturity_index(&pristine).unwrap(), 1.0);

        let touched = MaintenanceCounts { total_modules: 100, added: 5, changed: 10, deleted: 3 };
        assert_eq!(software_maturity_index(&touched).unwrap(), 0.82);

        let churned = MaintenanceCounts { total_modules: 4, added: 3, changed: 3, deleted: 2 };
        assert_eq!(software_maturity_index(&churned).unwrap(), -1.0);

        let empty = MaintenanceCounts { total_modules: 0, added: 0, changed: 0, deleted: 0 };
        assert!(matches!(software_maturity_index(&empty), Err(Error::Input(_))));
    }

    #[test]
    fn single_module_project_pins_every_feature() {
        let record = basic_record("m1");
        let ranges = FeatureRanges::from_records(std::slice::from_ref(&record)).unwrap();
        let features = feature_vector(&record, &ranges).unwrap();
        assert_eq!(features, [0.5; FEATURE_COUNT]);
    }

    #[test]
    fn full_reuse_contributes_zero_before_scaling() {
        let mut record = basic_record("m1");
        record.reuse_fraction = 1.0;
        let raw = record.raw_features().unwrap();
        assert_eq!(raw[6], 0.0);
    }

    #[test]
    fn min_max_scaling_spans_zero_to_one() {
        let mut low = basic_record("low");
        low.production_hours = 10.0;
        let mut high = basic_record("high");
        high.production_hours = 30.0;
        let records = vec![low.clone(), high.clone()];
        let ranges = FeatureRanges::from_records(&records).unwrap();
        assert_eq!(feature_vector(&low, &ranges).unwrap()[0], 0.0);
        assert_eq!(feature_vector(&high, &ranges).unwrap()[0], 1.0);
        // Identical features elsewhere stay pinned at 0.5.
        assert_eq!(feature_vector(&low, &ranges).unwrap()[3], 0.5);
    }

    #[test]
    fn layout_and_maturity_default_to_zero_when_absent() {
        let record = basic_record("m1");
        let raw = record.raw_features().unwrap();
        assert_eq!(raw[8], 0.0);
        assert_eq!(raw[9], 0.0);
    }

    #[test]
    fn layout_feature_reflects_appropriateness() {
        let mut record = basic_record("m1");
        record.layout = Some(LayoutInputs {
            transitions: vec![(2.0, 3.0), (4.0, 0.5)], // proposed cost 8
            optimal_cost: 4.0,                          // LA = 50
        });
        let raw = record.raw_features().unwrap();
        assert!((raw[8] - 0.5).abs() < 1e-15, "got {}", raw[8]);
    }

    #[test]
    fn validate_records_catches_structural_problems() {
        let mut a = basic_record("a");
        let b = basic_record("a");
        assert!(matches!(validate_records(&[a.clone(), b]), Err(Error::Input(_))));

        a.depends_on = vec!["ghost".to_string()];
        assert!(matches!(validate_records(&[a.clone()]), Err(Error::Input(_))));

        a.depends_on = vec!["a".to_string()];
        assert!(matches!(validate_records(&[a]), Err(Error::Input(_))));
    }

    #[test]
    fn validate_records_reports_the_cycle() {
        let mut a = basic_record("a");
        let mut b = basic_record("b");
        let mut c = basic_record("c");
        a.depends_on = vec!["b".to_string()];
        b.depends_on = vec!["c".to_string()];
        c.depends_on = vec!["a".to_string()];
        let err = validate_records(&[a, b, c]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cycle"), "got {msg}");
        assert!(msg.contains("a") && msg.contains("b") && msg.contains("c"), "got {msg}");
    }

    #[test]
    fn scaling_is_stable_under_record_permutation() {
        let mut a = basic_record("a");
        a.production_hours = 5.0;
        let mut b = basic_record("b");
        b.production_hours = 25.0;
        let mut c = basic_record("c");
        c.production_hours = 15.0;
        let forward = FeatureRanges::from_records(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let backward = FeatureRanges::from_records(&[c, b, a.clone()]).unwrap();
        assert_eq!(
            feature_vector(&a, &forward).unwrap(),
            feature_vector(&a, &backward).unwrap()
        );
    }
}
