//! CSV ingestion and emission. Parse errors name the offending line; all
//! emitted floats go through the shared 10-significant-digit formatting so
//! repeated runs produce byte-identical files.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;

use srgm_core::decision::PriorityCategory;
use srgm_core::metrics::{CouplingInputs, LayoutInputs, MaintenanceCounts, ModuleRecord};
use srgm_core::nhpp::{FaultDataset, FaultObservation};
use srgm_core::numfmt::format_sig10;
use srgm_core::{Error, Result};

/// One parsed metrics row: the module record plus the optional fault-density
/// history column that drives network training.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub record: ModuleRecord,
    pub fault_density: Option<f64>,
}

/// One parsed actuals row; the fault tolerance is injected later from the
/// project configuration.
#[derive(Debug, Clone)]
pub struct ActualRow {
    pub category: PriorityCategory,
    pub actual_time: f64,
    pub actual_cost: f64,
    pub faults_found: u64,
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn record_line(record: &StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_cell<T: FromStr>(file: &Path, line: u64, column: &str, raw: &str) -> Result<T>
where
    T::Err: Display,
{
    raw.parse().map_err(|e| {
        Error::Input(format!(
            "{} line {line}: column {column}: cannot parse {raw:?}: {e}",
            file.display()
        ))
    })
}

/// Reads grouped fault counts with header `time,cumulative_faults`.
pub fn read_fault_csv(path: &Path) -> Result<FaultDataset> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let expected = ["time", "cumulative_faults"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Input(format!(
            "{}: header must be {:?}, got {:?}",
            path.display(),
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut observations = Vec::new();
    let mut prev_time = 0.0;
    let mut prev_count = 0u64;
    for row in reader.records() {
        let row = row.map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let line = record_line(&row);
        if row.len() != 2 {
            return Err(Error::Input(format!(
                "{} line {line}: expected 2 fields, got {}",
                path.display(),
                row.len()
            )));
        }
        let time: f64 = parse_cell(path, line, "time", &row[0])?;
        let count: u64 = parse_cell(path, line, "cumulative_faults", &row[1])?;
        if !time.is_finite() || time <= prev_time {
            return Err(Error::Input(format!(
                "{} line {line}: time {time} does not increase past {prev_time}",
                path.display()
            )));
        }
        if count < prev_count {
            return Err(Error::Input(format!(
                "{} line {line}: cumulative fault count {count} drops below {prev_count}",
                path.display()
            )));
        }
        observations.push(FaultObservation {
            time,
            cumulative_faults: count,
        });
        prev_time = time;
        prev_count = count;
    }
    if observations.is_empty() {
        return Err(Error::Input(format!(
            "{}: no observations",
            path.display()
        )));
    }
    FaultDataset::new(observations, "time")
}

const METRICS_COLUMNS: [&str; 29] = [
    "id",
    "name",
    "depends_on",
    "procedure_ccs",
    "lloc",
    "data_in",
    "control_in",
    "data_out",
    "control_out",
    "global_data",
    "global_control",
    "fan_out",
    "fan_in",
    "calib_k",
    "calib_a",
    "calib_b",
    "calib_c",
    "transitions",
    "optimal_layout_cost",
    "maintenance_total",
    "maintenance_added",
    "maintenance_changed",
    "maintenance_deleted",
    "production_hours",
    "programming_path_score",
    "size_score",
    "reporter_skill_score",
    "weight_priority_score",
    "reuse_fraction",
];

const FAULT_DENSITY_COLUMN: &str = "fault_density";

struct ColumnMap {
    index: std::collections::BTreeMap<String, usize>,
}

impl ColumnMap {
    fn build(path: &Path, headers: &StringRecord) -> Result<Self> {
        let mut index = std::collections::BTreeMap::new();
        for (i, name) in headers.iter().enumerate() {
            if !METRICS_COLUMNS.contains(&name) && name != FAULT_DENSITY_COLUMN {
                return Err(Error::Input(format!(
                    "{}: unknown column {name:?}",
                    path.display()
                )));
            }
            if index.insert(name.to_string(), i).is_some() {
                return Err(Error::Input(format!(
                    "{}: duplicate column {name:?}",
                    path.display()
                )));
            }
        }
        for required in METRICS_COLUMNS {
            if !index.contains_key(required) {
                return Err(Error::Input(format!(
                    "{}: missing column {required:?}",
                    path.display()
                )));
            }
        }
        Ok(ColumnMap { index })
    }

    fn get<'r>(&self, record: &'r StringRecord, column: &str) -> &'r str {
        self.index
            .get(column)
            .and_then(|&i| record.get(i))
            .unwrap_or("")
    }

    fn has(&self, column: &str) -> bool {
        self.index.contains_key(column)
    }
}

/// Reads per-module metrics. List-valued cells use semicolons
/// (`3;1;4` for complexities, `12:0.5;7:1.25` for transition
/// frequency:cost pairs). Empty calibration cells default to 1; the layout,
/// maintenance, and fault-density groups may be left empty per row.
pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        .clone();
    let columns = ColumnMap::build(path, &headers)?;

    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let line = record_line(&row);
        rows.push(parse_metrics_row(path, &columns, &row, line)?);
    }
    if rows.is_empty() {
        return Err(Error::Input(format!("{}: no modules", path.display())));
    }
    Ok(rows)
}

fn parse_metrics_row(
    path: &Path,
    columns: &ColumnMap,
    row: &StringRecord,
    line: u64,
) -> Result<MetricsRow> {
    let cell = |column: &str| columns.get(row, column);

    let id = cell("id").to_string();
    if id.is_empty() {
        return Err(Error::Input(format!(
            "{} line {line}: module id is empty",
            path.display()
        )));
    }
    let name = cell("name").to_string();

    let depends_on: Vec<String> = cell("depends_on")
        .split(';')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();

    let ccs_raw = cell("procedure_ccs");
    if ccs_raw.is_empty() {
        return Err(Error::Input(format!(
            "{} line {line}: procedure_ccs must list at least one complexity",
            path.display()
        )));
    }
    let procedure_complexities: Vec<u32> = ccs_raw
        .split(';')
        .map(|s| parse_cell(path, line, "procedure_ccs", s))
        .collect::<Result<_>>()?;

    let logical_lines: u64 = parse_cell(path, line, "lloc", cell("lloc"))?;

    let calib = |column: &str| -> Result<f64> {
        let raw = cell(column);
        if raw.is_empty() {
            Ok(1.0)
        } else {
            parse_cell(path, line, column, raw)
        }
    };
    let coupling = CouplingInputs {
        data_in: parse_cell(path, line, "data_in", cell("data_in"))?,
        control_in: parse_cell(path, line, "control_in", cell("control_in"))?,
        data_out: parse_cell(path, line, "data_out", cell("data_out"))?,
        control_out: parse_cell(path, line, "control_out", cell("control_out"))?,
        global_data: parse_cell(path, line, "global_data", cell("global_data"))?,
        global_control: parse_cell(path, line, "global_control", cell("global_control"))?,
        fan_out: parse_cell(path, line, "fan_out", cell("fan_out"))?,
        fan_in: parse_cell(path, line, "fan_in", cell("fan_in"))?,
        calib_k: calib("calib_k")?,
        calib_a: calib("calib_a")?,
        calib_b: calib("calib_b")?,
        calib_c: calib("calib_c")?,
    };

    let transitions_raw = cell("transitions");
    let optimal_raw = cell("optimal_layout_cost");
    let layout = match (transitions_raw.is_empty(), optimal_raw.is_empty()) {
        (true, true) => None,
        (false, false) => {
            let transitions = transitions_raw
                .split(';')
                .map(|pair| {
                    let (f, c) = pair.split_once(':').ok_or_else(|| {
                        Error::Input(format!(
                            "{} line {line}: column transitions: expected frequency:cost, got {pair:?}",
                            path.display()
                        ))
                    })?;
                    Ok((
                        parse_cell(path, line, "transitions", f)?,
                        parse_cell(path, line, "transitions", c)?,
                    ))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            Some(LayoutInputs {
                transitions,
                optimal_cost: parse_cell(path, line, "optimal_layout_cost", optimal_raw)?,
            })
        }
        _ => {
            return Err(Error::Input(format!(
                "{} line {line}: transitions and optimal_layout_cost must be given together",
                path.display()
            )))
        }
    };

    let maintenance_cells = [
        cell("maintenance_total"),
        cell("maintenance_added"),
        cell("maintenance_changed"),
        cell("maintenance_deleted"),
    ];
    let maintenance = if maintenance_cells.iter().all(|c| c.is_empty()) {
        None
    } else if maintenance_cells.iter().any(|c| c.is_empty()) {
        return Err(Error::Input(format!(
            "{} line {line}: all four maintenance counts must be given together",
            path.display()
        )));
    } else {
        Some(MaintenanceCounts {
            total_modules: parse_cell(path, line, "maintenance_total", maintenance_cells[0])?,
            added: parse_cell(path, line, "maintenance_added", maintenance_cells[1])?,
            changed: parse_cell(path, line, "maintenance_changed", maintenance_cells[2])?,
            deleted: parse_cell(path, line, "maintenance_deleted", maintenance_cells[3])?,
        })
    };

    let fault_density = if columns.has(FAULT_DENSITY_COLUMN) {
        let raw = cell(FAULT_DENSITY_COLUMN);
        if raw.is_empty() {
            None
        } else {
            Some(parse_cell(path, line, FAULT_DENSITY_COLUMN, raw)?)
        }
    } else {
        None
    };

    let record = ModuleRecord {
        id,
        name,
        depends_on,
        procedure_complexities,
        logical_lines,
        coupling,
        layout,
        maintenance,
        production_hours: parse_cell(path, line, "production_hours", cell("production_hours"))?,
        programming_path_score: parse_cell(
            path,
            line,
            "programming_path_score",
            cell("programming_path_score"),
        )?,
        size_score: parse_cell(path, line, "size_score", cell("size_score"))?,
        reporter_skill_score: parse_cell(
            path,
            line,
            "reporter_skill_score",
            cell("reporter_skill_score"),
        )?,
        weight_priority_score: parse_cell(
            path,
            line,
            "weight_priority_score",
            cell("weight_priority_score"),
        )?,
        reuse_fraction: parse_cell(path, line, "reuse_fraction", cell("reuse_fraction"))?,
    };
    record
        .validate()
        .map_err(|e| Error::Input(format!("{} line {line}: {e}", path.display())))?;
    Ok(MetricsRow {
        record,
        fault_density,
    })
}

/// Reads per-category test actuals with header
/// `category,actual_time,actual_cost,faults_found`.
pub fn read_actuals_csv(path: &Path) -> Result<Vec<ActualRow>> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let expected = ["category", "actual_time", "actual_cost", "faults_found"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Input(format!(
            "{}: header must be {:?}, got {:?}",
            path.display(),
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let line = record_line(&row);
        if row.len() != 4 {
            return Err(Error::Input(format!(
                "{} line {line}: expected 4 fields, got {}",
                path.display(),
                row.len()
            )));
        }
        let category: PriorityCategory = row[0].parse().map_err(|e| {
            Error::Input(format!("{} line {line}: column category: {e}", path.display()))
        })?;
        rows.push(ActualRow {
            category,
            actual_time: parse_cell(path, line, "actual_time", &row[1])?,
            actual_cost: parse_cell(path, line, "actual_cost", &row[2])?,
            faults_found: parse_cell(path, line, "faults_found", &row[3])?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Input(format!("{}: no actuals", path.display())));
    }
    Ok(rows)
}

/// Renders a `(time, expected_cost)` curve as CSV text.
pub fn curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("time,expected_cost\n");
    for (t, c) in points {
        out.push_str(&format_sig10(*t));
        out.push(',');
        out.push_str(&format_sig10(*c));
        out.push('\n');
    }
    out
}

/// Renders simulated event times as CSV text, one event per row.
pub fn events_csv(events: &[f64]) -> String {
    let mut out = String::from("event_time\n");
    for t in events {
        out.push_str(&format_sig10(*t));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn fault_csv_round_trip() {
        let f = write_temp("time,cumulative_faults\n1.0,3\n2.5,7\n4.0,7\n");
        let ds = read_fault_csv(f.path()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.total_faults(), 7);
        assert_eq!(ds.last_time(), Some(4.0));
    }

    #[test]
    fn fault_csv_names_the_offending_line() {
        let f = write_temp("time,cumulative_faults\n1.0,3\n0.5,4\n");
        let err = read_fault_csv(f.path()).unwrap_err();
        assert!(
            err.to_string().contains("line 3"),
            "error should name line 3: {err}"
        );

        let f = write_temp("time,cumulative_faults\n1.0,3\n2.0,xyz\n");
        let err = read_fault_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "got: {err}");
        assert!(err.to_string().contains("cumulative_faults"), "got: {err}");
    }

    #[test]
    fn fault_csv_rejects_empty_and_bad_headers() {
        let f = write_temp("time,cumulative_faults\n");
        let err = read_fault_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("no observations"), "got: {err}");

        let f = write_temp("t,count\n1.0,3\n");
        let err = read_fault_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("header"), "got: {err}");
    }

    const METRICS_HEADER: &str = "id,name,depends_on,procedure_ccs,lloc,data_in,control_in,data_out,control_out,global_data,global_control,fan_out,fan_in,calib_k,calib_a,calib_b,calib_c,transitions,optimal_layout_cost,maintenance_total,maintenance_added,maintenance_changed,maintenance_deleted,production_hours,programming_path_score,size_score,reporter_skill_score,weight_priority_score,reuse_fraction";

    #[test]
    fn metrics_csv_parses_a_full_row() {
        let f = write_temp(&format!(
            "{METRICS_HEADER}\n\
             auth,Authentication,,3;1;4,120,2,1,3,0,1,0,2,1,,,,,12:0.5;7:1.25,10,50,2,5,1,340,0.7,0.4,0.8,0.6,0.25\n"
        ));
        let rows = read_metrics_csv(f.path()).unwrap();
        assert_eq!(rows.len(), 1);
        let m = &rows[0].record;
        assert_eq!(m.id, "auth");
        assert_eq!(m.procedure_complexities, vec![3, 1, 4]);
        assert_eq!(m.coupling.calib_k, 1.0, "empty calibration defaults to 1");
        let layout = m.layout.as_ref().unwrap();
        assert_eq!(layout.transitions, vec![(12.0, 0.5), (7.0, 1.25)]);
        let maint = m.maintenance.as_ref().unwrap();
        assert_eq!(maint.total_modules, 50);
        assert!(rows[0].fault_density.is_none());
    }

    #[test]
    fn metrics_csv_optional_groups_can_be_empty() {
        let f = write_temp(&format!(
            "{METRICS_HEADER},fault_density\n\
             core,Core,,5,200,1,0,1,0,0,0,1,1,,,,,,,,,,,100,0.5,0.2,0.5,0.3,0,0.012\n"
        ));
        let rows = read_metrics_csv(f.path()).unwrap();
        let m = &rows[0].record;
        assert!(m.layout.is_none());
        assert!(m.maintenance.is_none());
        assert_eq!(rows[0].fault_density, Some(0.012));
    }

    #[test]
    fn metrics_csv_rejects_unknown_and_partial_groups() {
        let f = write_temp(&format!("{METRICS_HEADER},surprise\n"));
        let err = read_metrics_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("surprise"), "got: {err}");

        let f = write_temp(&format!(
            "{METRICS_HEADER}\n\
             a,A,,5,200,1,0,1,0,0,0,1,1,,,,,12:0.5,,,,,,100,0.5,0.2,0.5,0.3,0\n"
        ));
        let err = read_metrics_csv(f.path()).unwrap_err();
        assert!(
            err.to_string().contains("given together"),
            "layout pair must be joint: {err}"
        );
    }

    #[test]
    fn actuals_csv_parses_categories() {
        let f = write_temp(
            "category,actual_time,actual_cost,faults_found\nvery_high,30.0,185.0,1\nhigh,32.0,190.0,0\n",
        );
        let rows = read_actuals_csv(f.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].category, PriorityCategory::VeryHigh);
        assert_eq!(rows[1].faults_found, 0);

        let f = write_temp("category,actual_time,actual_cost,faults_found\nurgent,1.0,2.0,0\n");
        let err = read_actuals_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "got: {err}");
    }

    #[test]
    fn emitted_csv_uses_stable_formatting() {
        let curve = curve_csv(&[(0.0, 499.9773000351188), (100.0, 299.9954600070238)]);
        assert_eq!(
            curve,
            "time,expected_cost\n0,499.9773\n100,299.99546\n"
        );
        let events = events_csv(&[1.5, 2.25]);
        assert_eq!(events, "event_time\n1.5\n2.25\n");
    }
}
