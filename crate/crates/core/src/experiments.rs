//! Plain-text scenario/sweep files and grid evaluation to CSV.
//!
//! ```text
//! # comments run to end of line
//! [scenario]
//! q_ur = 0.5
//! [sweep]
//! axis1 = n_ues
//! values1 = 1..15
//! axis2 = q_u
//! values2 = 0.1, 0.5, 0.9
//! [simulation]
//! enabled = true
//! slots = 100000
//! seed = 1
//! mode = decoupled
//! ```
//!
//! Values accept comma lists, inclusive integer ranges `a..b` and inclusive
//! float steps `start:step:stop`. Several parameters can move together on one
//! axis: `axis1 = d_ur_m+d_ud_m` with `values1 = 20/40, 30/50`.

use std::path::Path;

use crate::config::{ScenarioConfig, PARAMETER_NAMES};
use crate::error::{ModelError, Result};
use crate::sim::{self, LosMode, SimOptions};
use crate::throughput::aggregate_throughput;

/// One sweep axis: the parameters it moves and one tuple per grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub axes: Vec<Axis>,
    /// Metric columns to keep; all when `None`.
    pub outputs: Option<Vec<String>>,
    pub simulation: Option<SimOptions>,
}

/// Metric columns in emission order.
pub const METRICS: &[&str] = &[
    "regime", "q_r_min", "lambda0", "lambda1", "mu_r", "p_empty", "t_ud", "t_ur", "t_d", "t_r",
    "t",
];
pub const SIM_METRICS: &[&str] = &["t_sim", "t_se", "t_z"];

fn config_error(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Config {
        line,
        message: message.into(),
    }
}

fn parse_number(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| config_error(line, format!("`{}` is not a number", s.trim())))
}

/// Parses one value list (comma list, `a..b`, `start:step:stop`).
pub fn parse_values(text: &str, line: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(config_error(line, "empty list item"));
        }
        if let Some((a, b)) = item.split_once("..") {
            let (a, b) = (parse_number(a, line)?, parse_number(b, line)?);
            if a.fract() != 0.0 || b.fract() != 0.0 || b < a {
                return Err(config_error(line, format!("bad integer range `{item}`")));
            }
            let mut v = a;
            while v <= b {
                out.push(v);
                v += 1.0;
            }
        } else if item.contains(':') {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != 3 {
                return Err(config_error(line, format!("bad step range `{item}`")));
            }
            let start = parse_number(parts[0], line)?;
            let step = parse_number(parts[1], line)?;
            let stop = parse_number(parts[2], line)?;
            if !(step > 0.0) || stop < start {
                return Err(config_error(line, format!("bad step range `{item}`")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as u64;
            for k in 0..=count {
                // round away accumulated binary noise so CSV keys stay clean
                let v = start + k as f64 * step;
                out.push((v * 1e12).round() / 1e12);
            }
        } else {
            out.push(parse_number(item, line)?);
        }
    }
    Ok(out)
}

fn parse_bool(s: &str, line: usize) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(config_error(line, format!("`{other}` is not a boolean"))),
    }
}

#[derive(Default)]
struct PendingAxis {
    names: Option<(Vec<String>, usize)>,
    values: Option<(String, usize)>,
}

/// Parses a scenario/sweep file.
pub fn parse_spec(text: &str) -> Result<SweepSpec> {
    let mut base = ScenarioConfig::default();
    let mut pending = [PendingAxis::default(), PendingAxis::default()];
    let mut outputs = None;
    let mut sim_enabled = false;
    let mut sim_opts = SimOptions::new(1_000_000, 1, LosMode::Decoupled);
    let mut section = "";

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "scenario" => "scenario",
                "sweep" => "sweep",
                "simulation" => "simulation",
                other => return Err(config_error(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| config_error(line, format!("expected `key = value`, got `{content}`")))?;
        if value.is_empty() {
            return Err(config_error(line, format!("missing value for `{key}`")));
        }
        match section {
            "scenario" => {
                if !PARAMETER_NAMES.contains(&key) {
                    return Err(config_error(line, format!("unknown key `{key}`")));
                }
                let v = parse_number(value, line)?;
                base.set(key, v).map_err(|e| config_error(line, e.to_string()))?;
                check_field(key, &base, line)?;
            }
            "sweep" => match key {
                "axis1" | "axis2" => {
                    let names: Vec<String> = value.split('+').map(|s| s.trim().to_string()).collect();
                    for n in &names {
                        if !PARAMETER_NAMES.contains(&n.as_str()) {
                            return Err(config_error(line, format!("unknown parameter `{n}`")));
                        }
                    }
                    pending[usize::from(key == "axis2")].names = Some((names, line));
                }
                "values1" | "values2" => {
                    pending[usize::from(key == "values2")].values = Some((value.to_string(), line));
                }
                "outputs" => {
                    let list: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
                    for m in &list {
                        if !METRICS.contains(&m.as_str()) && !SIM_METRICS.contains(&m.as_str()) {
                            return Err(config_error(line, format!("unknown output `{m}`")));
                        }
                    }
                    outputs = Some(list);
                }
                other => return Err(config_error(line, format!("unknown key `{other}`"))),
            },
            "simulation" => match key {
                "enabled" => sim_enabled = parse_bool(value, line)?,
                "slots" => {
                    sim_opts.n_slots = value
                        .parse()
                        .ok()
                        .filter(|&n| n >= 1)
                        .ok_or_else(|| config_error(line, "slots must be a positive integer"))?
                }
                "seed" => {
                    sim_opts.seed = value
                        .parse()
                        .map_err(|_| config_error(line, "seed must be an unsigned integer"))?
                }
                "mode" => sim_opts.mode = value.parse().map_err(|e: ModelError| config_error(line, e.to_string()))?,
                "batches" => {
                    sim_opts.batches = value
                        .parse()
                        .ok()
                        .filter(|&n| n >= 2)
                        .ok_or_else(|| config_error(line, "batches must be an integer ≥ 2"))?
                }
                other => return Err(config_error(line, format!("unknown key `{other}`"))),
            },
            _ => return Err(config_error(line, "key outside of any section")),
        }
    }

    let mut axes = Vec::new();
    for p in pending {
        let axis = match (p.names, p.values) {
            (None, None) => continue,
            (Some((_, line)), None) => return Err(config_error(line, "axis has no values")),
            (None, Some((_, line))) => return Err(config_error(line, "values given without an axis")),
            (Some((names, _)), Some((text, line))) => {
                let mut tuples = Vec::new();
                for item in text.split(',') {
                    let parts: Vec<&str> = item.split('/').collect();
                    if names.len() == 1 {
                        tuples.extend(parse_values(item, line)?.into_iter().map(|v| vec![v]));
                        continue;
                    }
                    if parts.len() != names.len() {
                        return Err(config_error(
                            line,
                            format!("`{}` needs {} values separated by `/`", item.trim(), names.len()),
                        ));
                    }
                    tuples.push(parts.iter().map(|s| parse_number(s, line)).collect::<Result<_>>()?);
                }
                if tuples.is_empty() {
                    return Err(config_error(line, "empty value list"));
                }
                for tuple in &tuples {
                    let mut probe = base.clone();
                    for (n, v) in names.iter().zip(tuple) {
                        probe.set(n, *v).map_err(|e| config_error(line, e.to_string()))?;
                        check_field(n, &probe, line)?;
                    }
                }
                Axis {
                    names,
                    values: tuples,
                }
            }
        };
        axes.push(axis);
    }

    Ok(SweepSpec {
        base,
        axes,
        outputs,
        simulation: sim_enabled.then_some(sim_opts),
    })
}

/// Rejects a value that violates its own field's domain; cross-field checks
/// are left to evaluation time.
fn check_field(key: &str, cfg: &ScenarioConfig, line: usize) -> Result<()> {
    match cfg.validate() {
        Err(ModelError::Domain { field, .. }) if field == key => {
            Err(config_error(line, cfg.validate().unwrap_err().to_string()))
        }
        _ => Ok(()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<SweepSpec> {
    parse_spec(&read(path.as_ref())?)
}

/// Loads the `[scenario]` part of a file, validated as a whole.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let spec = load_spec(path)?;
    spec.base.validate()?;
    Ok(spec.base)
}

/// One grid point: the swept (name, value) pairs and the resulting scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub params: Vec<(String, f64)>,
    pub cfg: ScenarioConfig,
}

impl SweepSpec {
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.axes.iter().flat_map(|a| a.names.clone()).collect();
        let keep = |m: &str| self.outputs.as_ref().is_none_or(|o| o.iter().any(|x| x == m));
        cols.extend(METRICS.iter().filter(|m| keep(m)).map(|s| s.to_string()));
        if self.simulation.is_some() {
            cols.extend(SIM_METRICS.iter().filter(|m| keep(m)).map(|s| s.to_string()));
        }
        cols.push("error".into());
        cols
    }

    /// Grid points in lexicographic order, first axis outermost.
    pub fn plan(&self) -> Vec<GridPoint> {
        let mut points = vec![GridPoint {
            params: Vec::new(),
            cfg: self.base.clone(),
        }];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(points.len() * axis.values.len());
            for p in &points {
                for tuple in &axis.values {
                    let mut q = p.clone();
                    for (n, v) in axis.names.iter().zip(tuple) {
                        // names and values were checked while parsing
                        q.cfg.set(n, *v).expect("validated sweep parameter");
                        q.params.push((n.clone(), *v));
                    }
                    next.push(q);
                }
            }
            points = next;
        }
        points
    }
}

/// Formats a value with 9 significant digits.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.8e}")
    }
}

/// Seed for the `index`-th grid point.
pub fn point_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn evaluate(spec: &SweepSpec, index: usize, point: &GridPoint) -> Vec<String> {
    let mut cells: Vec<(&str, String)> = Vec::new();
    let mut error = String::new();
    match aggregate_throughput(&point.cfg) {
        Ok(r) => {
            let q = &r.queue;
            let values = [
                ("q_r_min", q.q_r_min),
                ("lambda0", q.lambda0),
                ("lambda1", q.lambda1),
                ("mu_r", q.mu_r),
                ("p_empty", q.p_empty),
                ("t_ud", r.t_ud),
                ("t_ur", r.t_ur),
                ("t_d", r.t_direct),
                ("t_r", r.t_relay),
                ("t", r.t_aggregate),
            ];
            cells.push(("regime", r.regime.to_string()));
            cells.extend(values.iter().map(|(k, v)| (*k, format_value(*v))));
            if let Some(opts) = &spec.simulation {
                let opts = SimOptions {
                    seed: point_seed(opts.seed, index),
                    ..*opts
                };
                match sim::run(&point.cfg, &opts) {
                    Ok(s) => {
                        let c = sim::compare(&r, &s);
                        cells.push(("t_sim", format_value(s.t_sim.mean)));
                        cells.push(("t_se", format_value(s.t_sim.se)));
                        cells.push(("t_z", format_value(c.rows[0].z)));
                    }
                    Err(e) => error = e.to_string(),
                }
            }
        }
        Err(e) => error = e.to_string(),
    }
    let columns = spec.columns();
    let mut row: Vec<String> = point.params.iter().map(|(_, v)| format_value(*v)).collect();
    for col in &columns[point.params.len()..columns.len() - 1] {
        row.push(
            cells
                .iter()
                .find(|(k, _)| k == col)
                .map(|(_, v)| v.clone())
                .unwrap_or_default(),
        );
    }
    row.push(error);
    row
}

/// Evaluated sweep: header plus one row per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Values of `column` for every row.
    pub fn column(&self, column: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == column)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Evaluates every grid point; per-point errors land in the `error` column.
pub fn run_sweep(spec: &SweepSpec) -> SweepTable {
    let points = spec.plan();
    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| evaluate(spec, i, p))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows = points.iter().enumerate().map(|(i, p)| evaluate(spec, i, p)).collect();
    SweepTable {
        header: spec.columns(),
        rows,
    }
}
