//! Command-line front end: configuration merging, subcommand dispatch and
//! output files (CSV tables plus `manifest.json`).
//!
//! Every flag can also be given in a `key = value` file passed with
//! `--config`; flags override file values. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimator::{
    diagnostics_bracket, estimate_crossing, estimate_mu, estimate_pi, fingerprint, run_replicas, scan_lambda,
    FloorRule, MuOptions, ScanOptions,
};
use crate::geometry::Terminal;
use crate::greedy_paths::{greedy_sup_exact, greedy_sup_heuristic, greedy_tail_integral, WeightedPointSet, EXACT_LIMIT};
use crate::radius_laws::RadiusLaw;
use crate::sampler::{sample_hitting, ModelParams, Stream};
use crate::travel_time::{travel_time, VertexRole};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const UNITS: &str = "lengths in the radius law's units; intensity in centers per unit d-volume";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Sample,
    TravelTime,
    Crossing,
    Pi,
    Mu,
    Scan,
    Greedy,
    Diagnostics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::TravelTime => "travel-time",
            Command::Crossing => "crossing",
            Command::Pi => "pi",
            Command::Mu => "mu",
            Command::Scan => "scan",
            Command::Greedy => "greedy",
            Command::Diagnostics => "diagnostics",
        }
    }

    fn parse(s: &str) -> Option<Command> {
        <Command as ValueEnum>::from_str(s, true).ok()
    }

    /// Keys whose values change the results of this command.
    fn relevant_keys(self) -> &'static [&'static str] {
        match self {
            Command::Sample => &["r"],
            Command::TravelTime => &["r", "from", "to"],
            Command::Crossing => &["replicas", "r", "multiplier"],
            Command::Pi => &["replicas", "alpha"],
            Command::Mu => &["replicas", "r"],
            Command::Scan => &["replicas", "r", "lambda_grid", "multiplier", "floor_rule"],
            Command::Greedy => &["replicas", "r", "rho", "beam"],
            Command::Diagnostics => &["replicas", "r"],
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "boolfpp", version, about = "First-passage percolation on the Poisson Boolean model")]
struct Cli {
    /// Subcommand; may instead be given as `command` in the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// dirac:R, uniform:A:B, pareto:SHAPE:SCALE or mix:W*<law>,W*<law>
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    /// Radii, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    multiplier: Option<String>,
    #[arg(long)]
    beam: Option<String>,
    /// Truncation radius of the greedy subcommand.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Start point of travel-time (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    /// End point of travel-time (default: the sphere of radius `r` around the origin).
    #[arg(long, allow_hyphen_values = true)]
    to: Option<String>,
    /// ratio or increment
    #[arg(long)]
    floor_rule: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

const KEYS: &[&str] = &[
    "command",
    "dim",
    "lambda",
    "law",
    "seed",
    "replicas",
    "r",
    "alpha",
    "lambda_grid",
    "multiplier",
    "beam",
    "rho",
    "from",
    "to",
    "floor_rule",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "invalid `{k}`: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError {
        key: Some(key.to_string()),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    pub lambda: f64,
    pub law: RadiusLaw,
    pub seed: u64,
    pub replicas: usize,
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub multiplier: Vec<f64>,
    pub beam: usize,
    pub rho: f64,
    pub from: Option<Vec<f64>>,
    pub to: Option<Vec<f64>>,
    pub floor_rule: FloorRule,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.dim, self.lambda, self.law.clone())
    }

    /// Canonical `key = value` text; parses back to the same config.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = vec![
            ("command", self.command.name().to_string()),
            ("dim", self.dim.to_string()),
            ("lambda", self.lambda.to_string()),
            ("law", self.law.to_string()),
            ("seed", self.seed.to_string()),
            ("replicas", self.replicas.to_string()),
            ("r", join(&self.r)),
            ("alpha", join(&self.alpha)),
            ("lambda_grid", join(&self.lambda_grid)),
            ("multiplier", join(&self.multiplier)),
            ("beam", self.beam.to_string()),
            ("rho", self.rho.to_string()),
        ];
        if let Some(p) = &self.from {
            e.push(("from", join(p)));
        }
        if let Some(p) = &self.to {
            e.push(("to", join(p)));
        }
        e.push((
            "floor_rule",
            match self.floor_rule {
                FloorRule::Ratio => "ratio",
                FloorRule::Increment => "increment",
            }
            .to_string(),
        ));
        e.push(("out", self.out.display().to_string()));
        e
    }

    /// Hash of the fields that can change this command's results.
    pub fn fingerprint(&self) -> String {
        let relevant = self.command.relevant_keys();
        let text: String = self
            .entries()
            .into_iter()
            .filter(|(k, _)| ["command", "dim", "lambda", "law", "seed"].contains(k) || relevant.contains(k))
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        fingerprint(&text)
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_config_text(text: &str) -> std::result::Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError {
            key: None,
            message: format!("line {}: expected `key = value`", n + 1),
        })?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(bad(&key, "unknown key"));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(bad(&key, "given twice"));
        }
    }
    Ok(map)
}

/// Merges the optional config file with the flags and validates the result.
pub fn parse_config<I, T>(argv: I) -> std::result::Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| ConfigError {
        key: None,
        message: e.to_string().lines().next().unwrap_or("invalid arguments").to_string(),
    })?;
    let mut map = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    let flags = [
        ("dim", &cli.dim),
        ("lambda", &cli.lambda),
        ("law", &cli.law),
        ("seed", &cli.seed),
        ("replicas", &cli.replicas),
        ("r", &cli.r),
        ("alpha", &cli.alpha),
        ("lambda_grid", &cli.lambda_grid),
        ("multiplier", &cli.multiplier),
        ("beam", &cli.beam),
        ("rho", &cli.rho),
        ("from", &cli.from),
        ("to", &cli.to),
        ("floor_rule", &cli.floor_rule),
        ("out", &cli.out),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
    if let Some(c) = cli.command {
        map.insert("command".to_string(), c.name().to_string());
    }
    resolve(&map)
}

fn number<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: Option<T>) -> std::result::Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    match map.get(key) {
        Some(v) => v.parse::<T>().map_err(|e| bad(key, format!("{v:?}: {e}"))),
        None => default.ok_or_else(|| bad(key, "required")),
    }
}

fn list(map: &BTreeMap<String, String>, key: &str) -> std::result::Result<Vec<f64>, ConfigError> {
    match map.get(key) {
        None => Ok(Vec::new()),
        Some(v) if v.trim().is_empty() => Ok(Vec::new()),
        Some(v) => v
            .split(',')
            .map(|x| {
                let x = x.trim();
                let y: f64 = x.parse().map_err(|_| bad(key, format!("{x:?} is not a number")))?;
                if !y.is_finite() {
                    return Err(bad(key, format!("{x:?} is not finite")));
                }
                Ok(y)
            })
            .collect(),
    }
}

fn increasing_positive(key: &str, xs: &[f64], required: bool) -> std::result::Result<(), ConfigError> {
    if required && xs.is_empty() {
        return Err(bad(key, "required for this command"));
    }
    if xs.iter().any(|x| *x <= 0.0) {
        return Err(bad(key, "values must be positive"));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(key, "values must be strictly increasing"));
    }
    Ok(())
}

/// Builds a validated config from merged `key -> value` entries.
pub fn resolve(map: &BTreeMap<String, String>) -> std::result::Result<RunConfig, ConfigError> {
    if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(bad(k, "unknown key"));
    }
    let command = match map.get("command") {
        Some(c) => Command::parse(c).ok_or_else(|| bad("command", format!("unknown subcommand {c:?}")))?,
        None => return Err(bad("command", "required")),
    };
    let dim: usize = number(map, "dim", Some(2))?;
    if dim < 2 {
        return Err(bad("dim", "must be at least 2"));
    }
    let lambda_grid = list(map, "lambda_grid")?;
    increasing_positive("lambda_grid", &lambda_grid, command == Command::Scan)?;
    let default_lambda = (command == Command::Scan).then(|| lambda_grid[0]);
    let lambda: f64 = number(map, "lambda", default_lambda)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(bad("lambda", "must be positive and finite"));
    }
    let law: RadiusLaw = number(map, "law", None)?;
    let seed: u64 = number(map, "seed", Some(0))?;
    let replicas: usize = number(map, "replicas", Some(100))?;
    if replicas < 2 {
        return Err(bad("replicas", "must be at least 2"));
    }
    let r = list(map, "r")?;
    increasing_positive("r", &r, !matches!(command, Command::Pi | Command::TravelTime))?;
    let alpha = list(map, "alpha")?;
    increasing_positive("alpha", &alpha, command == Command::Pi)?;
    let mut multiplier = list(map, "multiplier")?;
    if multiplier.is_empty() {
        multiplier = vec![3.0];
    }
    increasing_positive("multiplier", &multiplier, false)?;
    if multiplier[0] < 2.0 {
        return Err(bad("multiplier", "values must be at least 2"));
    }
    if command == Command::Scan && multiplier.len() != 1 {
        return Err(bad("multiplier", "scan takes a single multiplier"));
    }
    let beam: usize = number(map, "beam", Some(16))?;
    if beam == 0 {
        return Err(bad("beam", "must be at least 1"));
    }
    let rho: f64 = number(map, "rho", Some(0.0))?;
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(bad("rho", "must be nonnegative"));
    }
    let point = |key: &str| -> std::result::Result<Option<Vec<f64>>, ConfigError> {
        if !map.contains_key(key) {
            return Ok(None);
        }
        let p = list(map, key)?;
        if p.len() != dim {
            return Err(bad(key, format!("expected {dim} coordinates, got {}", p.len())));
        }
        Ok(Some(p))
    };
    let from = point("from")?;
    let to = point("to")?;
    if command == Command::TravelTime && to.is_none() && r.is_empty() {
        return Err(bad("to", "travel-time needs `to` or `r`"));
    }
    let floor_rule: FloorRule = number(map, "floor_rule", Some(FloorRule::Ratio))?;
    let out = PathBuf::from(map.get("out").map(String::as_str).unwrap_or("."));
    let config = RunConfig {
        command,
        dim,
        lambda,
        law,
        seed,
        replicas,
        r,
        alpha,
        lambda_grid,
        multiplier,
        beam,
        rho,
        from,
        to,
        floor_rule,
        out,
    };
    config.params().map_err(|e| bad("law", e))?;
    if command == Command::Greedy && !config.law.check_greedy_condition(dim) {
        return Err(bad("law", format!("greedy condition fails in dimension {dim}")));
    }
    Ok(config)
}

/// An output file kept in memory until the whole run has succeeded.
struct Output {
    name: &'static str,
    body: String,
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row);
        s.push('\n');
    }
    s
}

fn direction_label(dir: usize) -> String {
    format!("{}e{}", if dir.is_multiple_of(2) { '+' } else { '-' }, dir / 2 + 1)
}

fn compute(config: &RunConfig) -> Result<(Vec<Output>, serde_json::Value)> {
    let params = config.params()?;
    let d = config.dim;
    let origin = vec![0.0; d];
    let mut notes = serde_json::Map::new();
    let outputs = match config.command {
        Command::Sample => {
            let radius = *config.r.last().expect("validated");
            let sample = sample_hitting(&params, &origin, radius, &mut Stream::new(config.seed, 0))?;
            let mut buf = Vec::new();
            sample.write_csv(&mut buf).map_err(|e| Error::Parse(e.to_string()))?;
            notes.insert("balls".into(), json!(sample.len()));
            vec![Output {
                name: "sample.csv",
                body: String::from_utf8(buf).expect("utf8 csv"),
            }]
        }
        Command::TravelTime => {
            let a = Terminal::point(config.from.clone().unwrap_or_else(|| origin.clone()));
            let b = match &config.to {
                Some(p) => Terminal::point(p.clone()),
                None => Terminal::sphere(origin.clone(), *config.r.last().expect("validated"))?,
            };
            let radius = a.reach_from(&origin).max(b.reach_from(&origin));
            let sample = sample_hitting(&params, &origin, radius, &mut Stream::new(config.seed, 0))?;
            let result = travel_time(&sample, &a, &b)?;
            let coords: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
            let witness = csv(
                &format!("{},role,component,ball", coords.join(",")),
                result.witness.iter().map(|v| {
                    let (role, comp, ball) = match &v.role {
                        VertexRole::Start => ("start", String::new(), String::new()),
                        VertexRole::End => ("end", String::new(), String::new()),
                        VertexRole::Entry { component, ball } => ("entry", component.to_string(), ball.to_string()),
                        VertexRole::Center { component, ball } => ("center", component.to_string(), ball.to_string()),
                        VertexRole::Exit { component, ball } => ("exit", component.to_string(), ball.to_string()),
                    };
                    format!("{},{role},{comp},{ball}", join(&v.point))
                }),
            );
            let body = serde_json::to_string_pretty(&json!({
                "travel_time": result.value,
                "tau_of_witness": result.tau_check,
                "components_visited": result.component_count,
                "balls_in_sample": sample.len(),
            }))
            .expect("json");
            vec![
                Output {
                    name: "travel_time.json",
                    body: body + "\n",
                },
                Output {
                    name: "witness.csv",
                    body: witness,
                },
            ]
        }
        Command::Mu => {
            let recs = estimate_mu(&params, &config.r, config.replicas, config.seed, &MuOptions::default())?;
            notes.insert(
                "directions".into(),
                json!("axis directions; point queries use balls meeting B(0, 1.25 r)"),
            );
            let body = csv(
                "r,direction,mu_hat,stderr,replicas",
                recs.iter().map(|rec| {
                    let dir = rec.direction.map(direction_label).unwrap_or_else(|| "radial".into());
                    format!("{},{dir},{},{},{}", rec.param, rec.mean, rec.stderr, rec.replicas)
                }),
            );
            vec![Output { name: "mu.csv", body }]
        }
        Command::Crossing => {
            let recs = estimate_crossing(&params, &config.r, config.replicas, config.seed, &config.multiplier)?;
            let body = csv(
                "r,multiplier,frequency,stderr,replicas",
                recs.iter().map(|rec| {
                    format!(
                        "{},{},{},{},{}",
                        rec.param,
                        rec.multiplier.expect("crossing multiplier"),
                        rec.mean,
                        rec.stderr,
                        rec.replicas
                    )
                }),
            );
            vec![Output {
                name: "crossing.csv",
                body,
            }]
        }
        Command::Pi => {
            let report = estimate_pi(&params, &config.alpha, config.replicas, config.seed)?;
            let se = |q: &str, i: usize| report.records.iter().filter(|r| r.quantity == q).nth(i).expect("record").stderr;
            let body = csv(
                "alpha,pi,pi_stderr,pi_10,pi_10_stderr,pi_squared,lambda_epsilon,h,h_stderr,scaled_pi",
                report.table.iter().enumerate().map(|(i, row)| {
                    format!(
                        "{},{},{},{},{},{},{},{},{},{}",
                        row.alpha,
                        row.pi,
                        se("pi", i),
                        row.pi_10,
                        se("pi_10", i),
                        row.pi_squared,
                        row.lambda_epsilon,
                        row.h,
                        se("h", i),
                        row.scaled_pi
                    )
                }),
            );
            notes.insert("scaled_pi".into(), json!("pi / (lambda alpha^d)"));
            vec![Output { name: "pi.csv", body }]
        }
        Command::Scan => {
            let opts = ScanOptions {
                multiplier: config.multiplier[0],
                floor_rule: config.floor_rule,
                ..ScanOptions::default()
            };
            let scan = scan_lambda(&params, &config.lambda_grid, &config.r, config.replicas, config.seed, &opts)?;
            let mut rows = Vec::new();
            for p in &scan.points {
                for (c, m) in p.crossing.iter().zip(&p.mu) {
                    rows.push(format!(
                        "{},{},{},{},{},{},{},{},{}",
                        p.lambda,
                        c.param,
                        c.mean,
                        c.stderr,
                        m.mean,
                        m.stderr,
                        p.mu_increment.mean,
                        p.mu_increment.stderr,
                        p.mu_is_zero
                    ));
                }
            }
            notes.insert(
                "floor".into(),
                json!(format!(
                    "mu counts as zero when the {} statistic at the largest r is at most {} standard errors above 0",
                    match scan.floor_rule {
                        FloorRule::Ratio => "T(r)/r",
                        FloorRule::Increment => "increment",
                    },
                    scan.floor_stderr
                )),
            );
            notes.insert("crossing_bracket".into(), json!(scan.crossing_bracket));
            notes.insert("mu_bracket".into(), json!(scan.mu_bracket));
            notes.insert("consistent".into(), json!(scan.consistent));
            vec![Output {
                name: "scan.csv",
                body: csv(
                    "lambda,r,crossing,crossing_stderr,mu_hat,mu_stderr,mu_increment,mu_increment_stderr,mu_is_zero",
                    rows,
                ),
            }]
        }
        Command::Greedy => {
            let radius = *config.r.last().expect("validated");
            let rho = config.rho;
            let beam = config.beam;
            let runs = run_replicas(config.replicas, |k| {
                let sample = sample_hitting(&params, &origin, radius, &mut Stream::new(config.seed, k))?;
                let kept: Vec<_> = sample.balls.iter().filter(|b| b.radius >= rho).cloned().collect();
                let set = WeightedPointSet::from_balls(d, &kept)?;
                let heuristic = greedy_sup_heuristic(&set, beam)?;
                let exact = if set.len() <= EXACT_LIMIT {
                    Some(greedy_sup_exact(&set, EXACT_LIMIT)?)
                } else {
                    None
                };
                Ok((set.len(), heuristic, exact))
            })?;
            let tail = greedy_tail_integral(&config.law, config.lambda, rho, d)?;
            vec![
                Output {
                    name: "greedy.csv",
                    body: csv(
                        "replica,points,heuristic,exact",
                        runs.iter().enumerate().map(|(k, (n, h, e))| {
                            format!("{k},{n},{h},{}", e.map(|x| x.to_string()).unwrap_or_default())
                        }),
                    ),
                },
                Output {
                    name: "greedy_tail.csv",
                    body: csv(
                        "lambda,rho,dim,tail_integral",
                        [format!("{},{},{},{}", config.lambda, rho, d, tail)],
                    ),
                },
            ]
        }
        Command::Diagnostics => {
            let mut rows = Vec::new();
            let mut violations = 0;
            for &r in &config.r {
                let rep = diagnostics_bracket(&params, r, config.replicas, config.seed)?;
                violations += rep.superadditivity_violations;
                for (k, b) in rep.replicas.iter().enumerate() {
                    rows.push(format!(
                        "{r},{k},{},{},{},{},{},{}",
                        b.t_inner, b.t_annulus, b.t_outer, b.net_sup, b.superadditivity_excess, b.upper_slack
                    ));
                }
            }
            if violations > 0 {
                return Err(Error::InvalidPath(format!(
                    "superadditivity bracket violated on {violations} replicas"
                )));
            }
            vec![Output {
                name: "diagnostics.csv",
                body: csv(
                    "r,replica,t_inner,t_annulus,t_outer,net_sup,superadditivity_excess,upper_slack",
                    rows,
                ),
            }]
        }
    };
    Ok((outputs, serde_json::Value::Object(notes)))
}

fn write_outputs(dir: &Path, outputs: &[Output], manifest: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut result = Ok(());
    for (name, body) in outputs
        .iter()
        .map(|o| (o.name, o.body.as_str()))
        .chain(std::iter::once(("manifest.json", manifest)))
    {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, body) {
            result = Err(e);
            break;
        }
        written.push(path);
    }
    if result.is_err() {
        for p in written {
            let _ = fs::remove_file(p);
        }
    }
    result
}

/// Runs a validated config and writes its outputs; returns the file names.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let (outputs, notes) = compute(config)?;
    let entries: serde_json::Map<String, serde_json::Value> =
        config.entries().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let manifest = json!({
        "command": config.command.name(),
        "version": VERSION,
        "seed": config.seed,
        "fingerprint": config.fingerprint(),
        "config": entries,
        "units": UNITS,
        "outputs": outputs.iter().map(|o| o.name).collect::<Vec<_>>(),
        "notes": notes,
    });
    let manifest = serde_json::to_string_pretty(&manifest).expect("json") + "\n";
    write_outputs(&config.out, &outputs, &manifest).map_err(|e| Error::Parse(format!("{}: {e}", config.out.display())))?;
    Ok(outputs
        .iter()
        .map(|o| config.out.join(o.name))
        .chain(std::iter::once(config.out.join("manifest.json")))
        .collect())
}

/// Entry point used by the binary: 0 on success, 1 on runtime failure,
/// 2 on invalid configuration.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&argv) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            print!("{e}");
            return 0;
        }
    }
    let config = match parse_config(argv) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&config) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
