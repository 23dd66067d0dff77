//! Monte Carlo estimates on exact hitting samples.
//!
//! Replica `k` always draws from [`Stream::new(seed, k)`](Stream::new) and
//! per-replica results are aggregated in replica order, so every estimate is
//! independent of the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::percolation::{crossing_event, h_event, pi_event};
use crate::sampler::{sample_hitting, superpose, unit_ball_volume, BallSample, ModelParams, Stream};
use crate::travel_time::{annulus_time, travel_time, travel_time_radial};
use crate::geometry::Terminal;

/// Running mean and sum of squared deviations; batches merge exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Summary {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Summary) -> Summary {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Summary {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Summary {
        let mut s = Summary::default();
        values.into_iter().for_each(|x| s.push(x));
        s
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation over `sqrt(n)`; `NaN` below two values.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        (self.m2.max(0.0) / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub quantity: String,
    pub lambda: f64,
    /// `r` or `alpha`, depending on the quantity.
    pub param: f64,
    pub law: String,
    pub dim: usize,
    pub multiplier: Option<f64>,
    pub direction: Option<usize>,
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub seed: u64,
    pub fingerprint: String,
}

/// Stable 64-bit FNV-1a hash, printed as 16 hex digits.
pub fn fingerprint(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

struct RecordTemplate<'a> {
    params: &'a ModelParams,
    replicas: usize,
    seed: u64,
    fingerprint: String,
}

impl RecordTemplate<'_> {
    fn record(&self, quantity: &str, lambda: f64, param: f64, summary: &Summary) -> EstimateRecord {
        EstimateRecord {
            quantity: quantity.to_string(),
            lambda,
            param,
            law: self.params.law().to_string(),
            dim: self.params.dim(),
            multiplier: None,
            direction: None,
            mean: summary.mean(),
            stderr: summary.stderr(),
            replicas: self.replicas,
            seed: self.seed,
            fingerprint: self.fingerprint.clone(),
        }
    }
}

fn describe(params: &ModelParams, extra: &str) -> String {
    format!(
        "dim={};lambda={};law={};{extra}",
        params.dim(),
        params.lambda(),
        params.law()
    )
}

fn check_replicas(replicas: usize) -> Result<()> {
    if replicas < 2 {
        return Err(Error::param("replicas", format!("need at least 2, got {replicas}")));
    }
    Ok(())
}

fn check_increasing(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::param(name, "list is empty"));
    }
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::param(name, "values must be positive"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(name, "values must be strictly increasing"));
    }
    Ok(())
}

/// Runs `job` for replicas `0..replicas`, returning results in replica order.
pub fn run_replicas<T, F>(replicas: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..replicas as u64).into_par_iter().map(&job).collect()
}

/// Nested exact samples at increasing intensities: `lambdas[0]` is sampled
/// directly and each later level superposes the increment on the previous one.
pub fn coupled_samples(
    params: &ModelParams,
    lambdas: &[f64],
    center: &[f64],
    radius: f64,
    rng: &mut Stream,
) -> Result<Vec<BallSample>> {
    check_increasing("lambda_grid", lambdas)?;
    let mut out: Vec<BallSample> = Vec::with_capacity(lambdas.len());
    out.push(sample_hitting(&params.with_lambda(lambdas[0])?, center, radius, rng)?);
    for w in lambdas.windows(2) {
        let next = superpose(out.last().expect("base sample"), w[1] - w[0], rng)?;
        out.push(next);
    }
    Ok(out)
}

/// Unit vectors `+e_1, -e_1, ..., +e_d, -e_d`.
pub fn axis_directions(d: usize) -> Vec<Vec<f64>> {
    (0..2 * d)
        .map(|k| {
            let mut u = vec![0.0; d];
            u[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
            u
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptions {
    /// Also estimate `T(0, r u) / r` along each axis direction.
    pub directions: bool,
    /// Point-to-point queries at distance `r` use balls touching `B(0, (1 + slack) r)`.
    pub slack: f64,
}

impl Default for MuOptions {
    fn default() -> Self {
        Self {
            directions: true,
            slack: 0.25,
        }
    }
}

/// Per-replica values of `T(r) / r` for each `r`, and of `T(0, r u) / r` for
/// each `r` and axis direction `u` (empty without directions).
#[derive(Debug, Clone, PartialEq)]
pub struct MuReplica {
    pub radial: Vec<f64>,
    pub directional: Vec<Vec<f64>>,
}

pub fn mu_replica(params: &ModelParams, r_list: &[f64], opts: &MuOptions, rng: &mut Stream) -> Result<MuReplica> {
    let d = params.dim();
    let origin = vec![0.0; d];
    let r_max = *r_list.last().expect("nonempty r list");
    let reach = if opts.directions { r_max * (1.0 + opts.slack) } else { r_max };
    let sample = sample_hitting(params, &origin, reach, rng)?;
    let dirs = axis_directions(d);
    let mut out = MuReplica {
        radial: Vec::with_capacity(r_list.len()),
        directional: Vec::new(),
    };
    for &r in r_list {
        let local = sample.restrict(r)?;
        out.radial.push(travel_time_radial(&local, r)?.value / r);
        if opts.directions {
            let wide = sample.restrict(r * (1.0 + opts.slack))?;
            let from = Terminal::point(origin.clone());
            let row = dirs
                .iter()
                .map(|u| {
                    let to = Terminal::point(u.iter().map(|x| x * r).collect());
                    travel_time(&wide, &from, &to).map(|t| t.value / r)
                })
                .collect::<Result<Vec<f64>>>()?;
            out.directional.push(row);
        }
    }
    Ok(out)
}

/// `T(r) / r` estimates for each `r` (quantity `mu`), plus per-direction
/// estimates (quantity `mu_dir`).
pub fn estimate_mu(
    params: &ModelParams,
    r_list: &[f64],
    replicas: usize,
    seed: u64,
    opts: &MuOptions,
) -> Result<Vec<EstimateRecord>> {
    check_increasing("r", r_list)?;
    check_replicas(replicas)?;
    let runs = run_replicas(replicas, |k| mu_replica(params, r_list, opts, &mut Stream::new(seed, k)))?;
    let template = RecordTemplate {
        params,
        replicas,
        seed,
        fingerprint: fingerprint(&describe(
            params,
            &format!("mu;r={r_list:?};replicas={replicas};seed={seed};opts={opts:?}"),
        )),
    };
    let mut out = Vec::new();
    for (i, &r) in r_list.iter().enumerate() {
        let s = Summary::from_values(runs.iter().map(|m| m.radial[i]));
        out.push(template.record("mu", params.lambda(), r, &s));
        if opts.directions {
            for dir in 0..2 * params.dim() {
                let s = Summary::from_values(runs.iter().map(|m| m.directional[i][dir]));
                let mut rec = template.record("mu_dir", params.lambda(), r, &s);
                rec.direction = Some(dir);
                out.push(rec);
            }
        }
    }
    Ok(out)
}

/// Crossing frequencies per `r` and search multiplier (quantity `crossing`).
pub fn estimate_crossing(
    params: &ModelParams,
    r_list: &[f64],
    replicas: usize,
    seed: u64,
    multipliers: &[f64],
) -> Result<Vec<EstimateRecord>> {
    check_increasing("r", r_list)?;
    check_increasing("multiplier", multipliers)?;
    check_replicas(replicas)?;
    if multipliers[0] < 2.0 {
        return Err(Error::param("multiplier", "values must be at least 2"));
    }
    let r_max = *r_list.last().expect("nonempty");
    let m_max = *multipliers.last().expect("nonempty");
    let origin = vec![0.0; params.dim()];
    let runs = run_replicas(replicas, |k| {
        let sample = sample_hitting(params, &origin, m_max * r_max, &mut Stream::new(seed, k))?;
        let mut hits = Vec::with_capacity(r_list.len() * multipliers.len());
        for &r in r_list {
            for &m in multipliers {
                hits.push(crossing_event(&sample, r, m)?);
            }
        }
        Ok(hits)
    })?;
    let template = RecordTemplate {
        params,
        replicas,
        seed,
        fingerprint: fingerprint(&describe(
            params,
            &format!("crossing;r={r_list:?};multipliers={multipliers:?};replicas={replicas};seed={seed}"),
        )),
    };
    let mut out = Vec::new();
    for (i, &r) in r_list.iter().enumerate() {
        for (j, &m) in multipliers.iter().enumerate() {
            let idx = i * multipliers.len() + j;
            let s = Summary::from_values(runs.iter().map(|h| indicator(h[idx])));
            let mut rec = template.record("crossing", params.lambda(), r, &s);
            rec.multiplier = Some(m);
            out.push(rec);
        }
    }
    Ok(out)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// One row of the `Pi(alpha)` recursion table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiRow {
    pub alpha: f64,
    pub pi: f64,
    pub pi_10: f64,
    pub pi_squared: f64,
    pub lambda_epsilon: f64,
    pub h: f64,
    /// `Pi(alpha) / (lambda alpha^d)`.
    pub scaled_pi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiReport {
    /// Quantities `pi` (at alpha), `pi_10` (at 10 alpha) and `h` (at alpha).
    pub records: Vec<EstimateRecord>,
    pub table: Vec<PiRow>,
}

/// Per-replica indicators `(G(0, alpha), G(0, 10 alpha), H(alpha))`.
pub fn pi_replica(params: &ModelParams, alpha_list: &[f64], rng: &mut Stream) -> Result<Vec<(bool, bool, bool)>> {
    let alpha_max = *alpha_list.last().expect("nonempty");
    let origin = vec![0.0; params.dim()];
    let sample = sample_hitting(params, &origin, 100.0 * alpha_max, rng)?;
    alpha_list
        .iter()
        .map(|&a| Ok((pi_event(&sample, a)?, pi_event(&sample, 10.0 * a)?, h_event(&sample, a)?)))
        .collect()
}

/// Unbiased estimates of `Pi(alpha)`, `Pi(10 alpha)` and `P(H(alpha))`,
/// with the recursion table against `lambda * epsilon(alpha)`.
pub fn estimate_pi(params: &ModelParams, alpha_list: &[f64], replicas: usize, seed: u64) -> Result<PiReport> {
    check_increasing("alpha", alpha_list)?;
    check_replicas(replicas)?;
    let runs = run_replicas(replicas, |k| pi_replica(params, alpha_list, &mut Stream::new(seed, k)))?;
    let template = RecordTemplate {
        params,
        replicas,
        seed,
        fingerprint: fingerprint(&describe(
            params,
            &format!("pi;alpha={alpha_list:?};replicas={replicas};seed={seed}"),
        )),
    };
    let lambda = params.lambda();
    let d = params.dim();
    let mut records = Vec::new();
    let mut table = Vec::new();
    for (i, &a) in alpha_list.iter().enumerate() {
        let pi = Summary::from_values(runs.iter().map(|r| indicator(r[i].0)));
        let pi10 = Summary::from_values(runs.iter().map(|r| indicator(r[i].1)));
        let h = Summary::from_values(runs.iter().map(|r| indicator(r[i].2)));
        records.push(template.record("pi", lambda, a, &pi));
        records.push(template.record("pi_10", lambda, 10.0 * a, &pi10));
        records.push(template.record("h", lambda, a, &h));
        table.push(PiRow {
            alpha: a,
            pi: pi.mean(),
            pi_10: pi10.mean(),
            pi_squared: pi.mean() * pi.mean(),
            lambda_epsilon: lambda * params.law().epsilon_tail(a, d)?,
            h: h.mean(),
            scaled_pi: pi.mean() / (lambda * a.powi(d as i32)),
        });
    }
    Ok(PiReport { records, table })
}

/// Upper bound used when checking that `Pi(alpha) / (lambda alpha^d)` stays
/// bounded: `10 v_d 11^d`.
pub fn scaled_pi_bound(d: usize) -> f64 {
    10.0 * unit_ball_volume(d) * 11f64.powi(d as i32)
}

/// Statistic compared against the zero floor in a threshold scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorRule {
    /// `T(r_max) / r_max`.
    Ratio,
    /// `(T(r_max) - T(r_prev)) / (r_max - r_prev)`, which drops the
    /// `O(1)` cost of reaching the cluster near the origin.
    Increment,
}

impl std::str::FromStr for FloorRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(FloorRule::Ratio),
            "increment" => Ok(FloorRule::Increment),
            other => Err(Error::param("floor_rule", format!("expected ratio or increment, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Search multiplier of the crossing events.
    pub multiplier: f64,
    pub floor_rule: FloorRule,
    /// `mu` counts as zero at a grid point when the floor statistic is at
    /// most this many standard errors above 0.
    pub floor_stderr: f64,
    /// Crossing frequency defining the crossing bracket.
    pub crossing_level: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            multiplier: 3.0,
            floor_rule: FloorRule::Ratio,
            floor_stderr: 3.0,
            crossing_level: 0.5,
        }
    }
}

/// Results at one grid intensity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub lambda: f64,
    /// Crossing frequency per `r`.
    pub crossing: Vec<EstimateRecord>,
    /// `T(r) / r` per `r`.
    pub mu: Vec<EstimateRecord>,
    /// `(T(r_max) - T(r_prev)) / (r_max - r_prev)`; equals `mu` when a single `r` is given.
    pub mu_increment: EstimateRecord,
    pub mu_is_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdScan {
    pub grid: Vec<f64>,
    pub floor_rule: FloorRule,
    pub floor_stderr: f64,
    pub points: Vec<ScanPoint>,
    /// Grid cell `(lo, hi)` where the crossing frequency at the largest `r`
    /// first reaches the crossing level.
    pub crossing_bracket: (f64, f64),
    /// Grid cell where the time constant first counts as zero.
    pub mu_bracket: (f64, f64),
    pub crossing_cell: usize,
    pub mu_cell: usize,
    /// Brackets overlap or are adjacent grid cells.
    pub consistent: bool,
}

impl ThresholdScan {
    pub fn crossing_midpoint(&self) -> f64 {
        0.5 * (self.crossing_bracket.0 + self.crossing_bracket.1)
    }
}

/// Per-replica values over a coupled intensity grid: for each grid point,
/// `T(r) / r` and the crossing indicator for each `r`.
pub fn scan_replica(
    params: &ModelParams,
    grid: &[f64],
    r_list: &[f64],
    opts: &ScanOptions,
    rng: &mut Stream,
) -> Result<Vec<(Vec<f64>, Vec<bool>)>> {
    let r_max = *r_list.last().expect("nonempty");
    let origin = vec![0.0; params.dim()];
    let samples = coupled_samples(params, grid, &origin, opts.multiplier * r_max, rng)?;
    samples
        .iter()
        .map(|sample| {
            let mut times = Vec::with_capacity(r_list.len());
            let mut hits = Vec::with_capacity(r_list.len());
            for &r in r_list {
                let local = sample.restrict(opts.multiplier * r)?;
                hits.push(crossing_event(&local, r, opts.multiplier)?);
                times.push(travel_time_radial(&local.restrict(r)?, r)?.value / r);
            }
            Ok((times, hits))
        })
        .collect()
}

/// Runs coupled crossing and time-constant estimates over an intensity grid
/// and brackets both thresholds.
pub fn scan_lambda(
    base: &ModelParams,
    grid: &[f64],
    r_list: &[f64],
    replicas: usize,
    seed: u64,
    opts: &ScanOptions,
) -> Result<ThresholdScan> {
    check_increasing("lambda_grid", grid)?;
    check_increasing("r", r_list)?;
    check_replicas(replicas)?;
    if opts.multiplier < 2.0 {
        return Err(Error::param("multiplier", "must be at least 2"));
    }
    let runs = run_replicas(replicas, |k| scan_replica(base, grid, r_list, opts, &mut Stream::new(seed, k)))?;
    let template = RecordTemplate {
        params: base,
        replicas,
        seed,
        fingerprint: fingerprint(&describe(
            base,
            &format!("scan;grid={grid:?};r={r_list:?};replicas={replicas};seed={seed};opts={opts:?}"),
        )),
    };
    let last = r_list.len() - 1;
    let mut points = Vec::with_capacity(grid.len());
    for (g, &lambda) in grid.iter().enumerate() {
        let mut crossing = Vec::new();
        let mut mu = Vec::new();
        for (i, &r) in r_list.iter().enumerate() {
            let c = Summary::from_values(runs.iter().map(|run| indicator(run[g].1[i])));
            let mut rec = template.record("crossing", lambda, r, &c);
            rec.multiplier = Some(opts.multiplier);
            crossing.push(rec);
            let m = Summary::from_values(runs.iter().map(|run| run[g].0[i]));
            mu.push(template.record("mu", lambda, r, &m));
        }
        let inc = if last == 0 {
            Summary::from_values(runs.iter().map(|run| run[g].0[0]))
        } else {
            let (r0, r1) = (r_list[last - 1], r_list[last]);
            Summary::from_values(
                runs.iter()
                    .map(|run| (run[g].0[last] * r1 - run[g].0[last - 1] * r0) / (r1 - r0)),
            )
        };
        let mu_increment = template.record("mu_increment", lambda, r_list[last], &inc);
        let floor = match opts.floor_rule {
            FloorRule::Ratio => &mu[last],
            FloorRule::Increment => &mu_increment,
        };
        let mu_is_zero = floor.mean == 0.0 || floor.mean <= opts.floor_stderr * floor.stderr;
        points.push(ScanPoint {
            lambda,
            crossing,
            mu,
            mu_increment,
            mu_is_zero,
        });
    }
    let crossing_cell = points
        .iter()
        .position(|p| p.crossing[last].mean >= opts.crossing_level)
        .unwrap_or(grid.len());
    let mu_cell = points.iter().position(|p| p.mu_is_zero).unwrap_or(grid.len());
    let bracket = |cell: usize| -> (f64, f64) {
        if cell == 0 {
            (grid[0], grid[0])
        } else if cell >= grid.len() {
            (grid[grid.len() - 1], grid[grid.len() - 1])
        } else {
            (grid[cell - 1], grid[cell])
        }
    };
    Ok(ThresholdScan {
        grid: grid.to_vec(),
        floor_rule: opts.floor_rule,
        floor_stderr: opts.floor_stderr,
        crossing_bracket: bracket(crossing_cell),
        mu_bracket: bracket(mu_cell),
        consistent: crossing_cell.abs_diff(mu_cell) <= 1,
        crossing_cell,
        mu_cell,
        points,
    })
}

/// Per-replica values of the annulus bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketReplica {
    pub t_inner: f64,
    pub t_annulus: f64,
    pub t_outer: f64,
    /// Maximum of `T(0, x)` over the direction net on `S(r)`; a lower bound
    /// of the supremum over the sphere.
    pub net_sup: f64,
    /// `T(0,S(r)) + T(S(r),S(2r)) - T(0,S(2r))`; never above the tolerance.
    pub superadditivity_excess: f64,
    /// `net_sup + T(S(r),S(2r)) - T(0,S(2r))`; may be negative because the net
    /// only bounds the supremum from below.
    pub upper_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketReport {
    pub r: f64,
    pub replicas: Vec<BracketReplica>,
    /// Replicas where `T(0,S(r)) + T(S(r),S(2r)) <= T(0,S(2r))` fails by more than the tolerance.
    pub superadditivity_violations: usize,
    /// Replicas with negative `upper_slack` (reported only).
    pub net_shortfalls: usize,
}

pub const BRACKET_TOL: f64 = 1e-9;

/// Directions on the unit sphere: evenly spaced angles in dimension 2, a
/// fixed pseudo-random set otherwise.
pub fn direction_net(d: usize, count: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        return (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    use rand::Rng;
    use rand_distr::StandardNormal;
    let mut rng = Stream::new(0x6e65_7464_6972, 0);
    let mut out = axis_directions(d);
    while out.len() < count {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out.truncate(count.max(2 * d));
    out
}

pub fn bracket_replica(params: &ModelParams, r: f64, net: &[Vec<f64>], rng: &mut Stream) -> Result<BracketReplica> {
    let origin = vec![0.0; params.dim()];
    let sample = sample_hitting(params, &origin, 2.0 * r, rng)?;
    let t_inner = travel_time_radial(&sample, r)?.value;
    let t_annulus = annulus_time(&sample, r)?.value;
    let t_outer = travel_time_radial(&sample, 2.0 * r)?.value;
    let from = Terminal::point(origin.clone());
    let mut net_sup: f64 = 0.0;
    for u in net {
        let to = Terminal::point(u.iter().map(|x| x * r).collect());
        net_sup = net_sup.max(travel_time(&sample, &from, &to)?.value);
    }
    Ok(BracketReplica {
        t_inner,
        t_annulus,
        t_outer,
        net_sup,
        superadditivity_excess: t_inner + t_annulus - t_outer,
        upper_slack: net_sup + t_annulus - t_outer,
    })
}

/// Checks `T(0,S(r)) + T(S(r),S(2r)) <= T(0,S(2r))` on every replica and
/// reports the slack of `T(0,S(2r)) <= sup_{S(r)} T(0, .) + T(S(r),S(2r))`
/// with the supremum taken over a net of at least 64 directions.
pub fn diagnostics_bracket(params: &ModelParams, r: f64, replicas: usize, seed: u64) -> Result<BracketReport> {
    if !(r > 0.0) {
        return Err(Error::param("r", "must be positive"));
    }
    check_replicas(replicas)?;
    let net = direction_net(params.dim(), 64);
    let runs = run_replicas(replicas, |k| bracket_replica(params, r, &net, &mut Stream::new(seed, k)))?;
    let tol = |b: &BracketReplica| BRACKET_TOL * (1.0 + b.t_outer);
    Ok(BracketReport {
        r,
        superadditivity_violations: runs.iter().filter(|b| b.superadditivity_excess > tol(b)).count(),
        net_shortfalls: runs.iter().filter(|b| b.upper_slack < 0.0).count(),
        replicas: runs,
    })
}
