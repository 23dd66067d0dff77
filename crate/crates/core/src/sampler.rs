//! Exact simulation of the Poisson ball process restricted to the balls that
//! touch a target ball.
//!
//! The number of balls touching `B(x, r)` is Poisson with mean
//! `lambda * v_d * int (rho + r)^d nu(d rho)`. Conditionally on the count,
//! radii are i.i.d. from the `(rho + r)^d`-tilted law and each center is
//! uniform in `B(x, r + rho)`. No window truncation is involved.
//!
//! Stream layout: replica `k` of master seed `s` uses ChaCha8 seeded with `s`
//! on stream `k`. Draw order is the count, then for each ball its radius
//! followed by its position (`d` standard normals for the direction, one
//! uniform for the distance `(r + rho) * u^(1/d)`).

use std::io::{BufRead, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, Ball};
use crate::radius_laws::{binomial, RadiusLaw};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    dim: usize,
    lambda: f64,
    law: RadiusLaw,
}

impl ModelParams {
    pub fn new(dim: usize, lambda: f64, law: RadiusLaw) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("dim", format!("must be at least 2, got {dim}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
        }
        if !law.check_moment_d(dim) {
            return Err(Error::MomentCondition { d: dim });
        }
        Ok(Self { dim, lambda, law })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn law(&self) -> &RadiusLaw {
        &self.law
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.dim, lambda, self.law.clone())
    }

    /// Mean number of balls whose closure meets a closed ball of radius `r`.
    pub fn hitting_intensity(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::param("r", format!("must be nonnegative, got {r}")));
        }
        let d = self.dim;
        let mut integral = 0.0;
        for k in 0..=d {
            let m = self.law.moment(k);
            if !m.is_finite() {
                return Err(Error::InfiniteMoment { order: k });
            }
            integral += binomial(d, k) * r.powi((d - k) as i32) * m;
        }
        Ok(self.lambda * unit_ball_volume(d) * integral)
    }
}

/// Volume of the unit ball of R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    // v_0 = 1, v_1 = 2, v_d = v_{d-2} * 2 pi / d
    let mut v = [1.0, 2.0];
    for k in 2..=d {
        v[k % 2] *= std::f64::consts::TAU / k as f64;
    }
    v[d % 2]
}

/// Seeded random stream for one replica.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    seed: u64,
    replica: u64,
}

impl Stream {
    pub fn new(seed: u64, replica: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        Self { rng, seed, replica }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Every ball of the process touching `B(region.center, complete_for_radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSample {
    pub balls: Vec<Ball>,
    pub params: ModelParams,
    pub region: Region,
    pub seed: u64,
    pub replica: u64,
    pub complete_for_radius: f64,
}

impl BallSample {
    pub fn center(&self) -> &[f64] {
        &self.region.center
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn require_complete(&self, radius: f64) -> Result<()> {
        // Relative slack absorbs rounding in caller-side products like 10 * alpha.
        if radius > self.complete_for_radius * (1.0 + 1e-12) {
            return Err(Error::IncompleteSample {
                needed: radius,
                available: self.complete_for_radius,
            });
        }
        Ok(())
    }

    /// Sub-sample of the balls whose closure meets `B(center, radius)`. It is
    /// again an exact sample, complete for `radius`.
    pub fn restrict(&self, radius: f64) -> Result<BallSample> {
        self.require_complete(radius)?;
        let balls = self
            .balls
            .iter()
            .filter(|b| dist(&b.center, &self.region.center) <= radius + b.radius)
            .cloned()
            .collect();
        Ok(BallSample {
            balls,
            params: self.params.clone(),
            region: Region {
                center: self.region.center.clone(),
                radius,
            },
            seed: self.seed,
            replica: self.replica,
            complete_for_radius: radius,
        })
    }

    /// Writes the JSON header line (prefixed by `# `), the column header and
    /// one `x1,...,xd,radius` row per ball.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = SampleHeader {
            dim: self.params.dim,
            lambda: self.params.lambda,
            law: self.params.law.to_string(),
            seed: self.seed,
            replica: self.replica,
            region: self.region.clone(),
            complete_for_radius: self.complete_for_radius,
            count: self.balls.len(),
        };
        writeln!(out, "# {}", serde_json::to_string(&header).map_err(std::io::Error::other)?)?;
        let cols: Vec<String> = (1..=self.params.dim).map(|i| format!("x{i}")).collect();
        writeln!(out, "{},radius", cols.join(","))?;
        for b in &self.balls {
            for x in &b.center {
                write!(out, "{x},")?;
            }
            writeln!(out, "{}", b.radius)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<BallSample> {
        let mut lines = input.lines();
        let mut next = || -> Result<Option<String>> {
            lines
                .next()
                .transpose()
                .map_err(|e| Error::Parse(format!("reading sample: {e}")))
        };
        let head = next()?.ok_or_else(|| Error::Parse("empty sample file".into()))?;
        let json = head
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse("sample file must start with a `# {json}` header".into()))?;
        let header: SampleHeader =
            serde_json::from_str(json).map_err(|e| Error::Parse(format!("sample header: {e}")))?;
        let law: RadiusLaw = header.law.parse()?;
        let params = ModelParams::new(header.dim, header.lambda, law)?;
        next()?.ok_or_else(|| Error::Parse("missing column header".into()))?;
        let mut balls = Vec::with_capacity(header.count);
        while let Some(line) = next()? {
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{v}`"))))
                .collect::<Result<_>>()?;
            if vals.len() != header.dim + 1 {
                return Err(Error::Parse(format!("row `{line}` has {} fields", vals.len())));
            }
            balls.push(Ball::new(vals[..header.dim].to_vec(), vals[header.dim])?);
        }
        if balls.len() != header.count {
            return Err(Error::Parse(format!(
                "header announces {} balls, found {}",
                header.count,
                balls.len()
            )));
        }
        Ok(BallSample {
            balls,
            params,
            region: header.region,
            seed: header.seed,
            replica: header.replica,
            complete_for_radius: header.complete_for_radius,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleHeader {
    dim: usize,
    lambda: f64,
    law: String,
    seed: u64,
    replica: u64,
    region: Region,
    complete_for_radius: f64,
    count: usize,
}

/// Exact draw of all balls whose closure meets `B(center, r)`.
pub fn sample_hitting(params: &ModelParams, center: &[f64], r: f64, rng: &mut Stream) -> Result<BallSample> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("must be positive, got {r}")));
    }
    if center.len() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            found: center.len(),
        });
    }
    let balls = draw_hitting_balls(params, center, r, rng)?;
    Ok(BallSample {
        balls,
        params: params.clone(),
        region: Region {
            center: center.to_vec(),
            radius: r,
        },
        seed: rng.seed,
        replica: rng.replica,
        complete_for_radius: r,
    })
}

fn draw_hitting_balls<R: Rng + ?Sized>(
    params: &ModelParams,
    center: &[f64],
    r: f64,
    rng: &mut R,
) -> Result<Vec<Ball>> {
    let mean = params.hitting_intensity(r)?;
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean).map_err(|e| Error::param("lambda", e.to_string()))?;
        poisson.sample(rng) as usize
    } else {
        0
    };
    let d = params.dim;
    let mut balls = Vec::with_capacity(count);
    let mut dir = vec![0.0; d];
    for _ in 0..count {
        let rho = params.law.sample_hitting_tilted_radius(r, d, rng)?;
        let reach = r + rho;
        let norm = loop {
            for x in dir.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                break n;
            }
        };
        let u: f64 = rng.gen();
        let dist = reach * u.powf(1.0 / d as f64);
        let c: Vec<f64> = center
            .iter()
            .zip(&dir)
            .map(|(x, v)| x + dist * v / norm)
            .collect();
        balls.push(Ball { center: c, radius: rho });
    }
    Ok(balls)
}

/// Adds an independent sample of intensity `extra_lambda` over the same
/// region. The result is an exact sample at `lambda + extra_lambda` that
/// contains `base` verbatim.
pub fn superpose(base: &BallSample, extra_lambda: f64, rng: &mut Stream) -> Result<BallSample> {
    if !(extra_lambda > 0.0 && extra_lambda.is_finite()) {
        return Err(Error::param("extra_lambda", format!("must be positive, got {extra_lambda}")));
    }
    let extra_params = base.params.with_lambda(extra_lambda)?;
    let extra = draw_hitting_balls(&extra_params, &base.region.center, base.complete_for_radius, rng)?;
    let mut balls = base.balls.clone();
    balls.extend(extra);
    Ok(BallSample {
        balls,
        params: base.params.with_lambda(base.params.lambda + extra_lambda)?,
        region: base.region.clone(),
        seed: base.seed,
        replica: base.replica,
        complete_for_radius: base.complete_for_radius,
    })
}

/// Superposes two samples of the same law over the same region.
pub fn merge(base: &BallSample, extra: &BallSample) -> Result<BallSample> {
    if base.params.law != extra.params.law || base.params.dim != extra.params.dim {
        return Err(Error::param("extra", "law or dimension differs from the base sample"));
    }
    if base.region.center != extra.region.center || base.complete_for_radius != extra.complete_for_radius {
        return Err(Error::param("extra", "region differs from the base sample"));
    }
    let mut balls = base.balls.clone();
    balls.extend(extra.balls.iter().cloned());
    Ok(BallSample {
        balls,
        params: base.params.with_lambda(base.params.lambda + extra.params.lambda)?,
        region: base.region.clone(),
        seed: base.seed,
        replica: base.replica,
        complete_for_radius: base.complete_for_radius,
    })
}
