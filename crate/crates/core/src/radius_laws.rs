//! Radius distributions of the Boolean model.
//!
//! A [`RadiusLaw`] is a finite measure on `(0, +inf)` drawn from a small
//! parametric family (point mass, uniform interval, Pareto, finite mixtures).
//! Every functional the simulation needs (moments, tails, survival) is
//! available in closed form, which is what makes exact hitting-set sampling
//! possible.
//!
//! Pareto laws are parametrized by their survival function:
//! `nu([r, inf)) = (scale / r)^shape` for `r >= scale`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Shape of a normalized radius distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum LawKind {
    Dirac { radius: f64 },
    Uniform { lo: f64, hi: f64 },
    Pareto { shape: f64, scale: f64 },
    /// Weights sum to one; children are probability laws.
    Mixture(Vec<(f64, RadiusLaw)>),
}

/// A radius measure: a probability law scaled by `total_mass`.
///
/// `total_mass` is 1 for every law built by the constructors and parser.
/// Only [`RadiusLaw::truncate_above`] produces smaller masses.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusLaw {
    kind: LawKind,
    total_mass: f64,
}

const MASS_TOL: f64 = 1e-12;

impl RadiusLaw {
    pub fn dirac(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidLaw(format!("dirac radius must be positive, got {radius}")));
        }
        Ok(Self::probability(LawKind::Dirac { radius }))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidLaw(format!("uniform needs 0 < a < b, got a={lo} b={hi}")));
        }
        Ok(Self::probability(LawKind::Uniform { lo, hi }))
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidLaw(format!(
                "pareto needs shape > 0 and scale > 0, got shape={shape} scale={scale}"
            )));
        }
        Ok(Self::probability(LawKind::Pareto { shape, scale }))
    }

    /// Mixture of probability laws. Weights must be positive and sum to one.
    pub fn mixture(parts: Vec<(f64, RadiusLaw)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidLaw("mixture needs at least one component".into()));
        }
        let mut sum = 0.0;
        for (w, law) in &parts {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidLaw(format!("mixture weight must be positive, got {w}")));
            }
            if (law.total_mass - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidLaw("mixture components must be probability laws".into()));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidLaw(format!("mixture weights sum to {sum}, expected 1")));
        }
        let parts = parts.into_iter().map(|(w, l)| (w / sum, l)).collect();
        Ok(Self::probability(LawKind::Mixture(parts)))
    }

    fn probability(kind: LawKind) -> Self {
        Self { kind, total_mass: 1.0 }
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass - 1.0).abs() <= MASS_TOL
    }

    /// The same law rescaled to total mass one. `None` for the zero measure.
    pub fn normalized(&self) -> Option<Self> {
        if self.total_mass <= 0.0 {
            None
        } else {
            Some(Self::probability(self.kind.clone()))
        }
    }

    /// `nu([r, inf))`.
    pub fn survival(&self, r: f64) -> f64 {
        if self.total_mass == 0.0 {
            return 0.0;
        }
        self.total_mass * kind_survival(&self.kind, r, true)
    }

    /// `nu((r, inf))`; differs from [`survival`](Self::survival) only at atoms.
    pub fn survival_open(&self, r: f64) -> f64 {
        if self.total_mass == 0.0 {
            return 0.0;
        }
        self.total_mass * kind_survival(&self.kind, r, false)
    }

    /// `nu((0, r))`.
    pub fn mass_below(&self, r: f64) -> f64 {
        (self.total_mass - self.survival(r)).max(0.0)
    }

    /// `int rho^k nu(d rho)`, `+inf` when divergent.
    pub fn moment(&self, k: usize) -> f64 {
        if self.total_mass == 0.0 {
            return 0.0;
        }
        self.total_mass * kind_moment(&self.kind, k)
    }

    pub fn check_moment_d(&self, d: usize) -> bool {
        self.moment(d).is_finite()
    }

    /// Whether `int_0^inf nu([r, inf))^{1/d} dr < inf`.
    pub fn check_greedy_condition(&self, d: usize) -> bool {
        if self.total_mass == 0.0 {
            return true;
        }
        kind_greedy(&self.kind, d as f64)
    }

    /// `int_{[alpha, inf)} r^d nu(dr)`.
    pub fn epsilon_tail(&self, alpha: f64, d: usize) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        if !self.check_moment_d(d) {
            return Err(Error::MomentCondition { d });
        }
        if self.total_mass == 0.0 {
            return Ok(0.0);
        }
        Ok(self.total_mass * kind_tail_moment(&self.kind, alpha, d))
    }

    /// Restriction of the measure to `[rho, inf)`, not renormalized.
    pub fn truncate_above(&self, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::param("rho", format!("must be positive, got {rho}")));
        }
        if self.total_mass == 0.0 {
            return Ok(self.clone());
        }
        let (kind, kept) = kind_truncate(&self.kind, rho);
        Ok(Self {
            kind,
            total_mass: self.total_mass * kept,
        })
    }

    /// Inverse-transform draw. Consumes one uniform for every variant except
    /// point masses, plus one per mixture level.
    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        if !self.is_probability() {
            return Err(Error::Unnormalized { mass: self.total_mass });
        }
        Ok(kind_sample_tilted(&self.kind, 0, rng))
    }

    /// Draw from the density proportional to `(rho + r)^d nu(d rho)`.
    ///
    /// The binomial expansion turns the tilt into a finite mixture: pick
    /// `k` with weight `C(d,k) r^(d-k) m_k`, then draw from the `rho^k`-tilted
    /// law, which is closed form for every variant.
    pub fn sample_hitting_tilted_radius<R: Rng + ?Sized>(
        &self,
        r: f64,
        d: usize,
        rng: &mut R,
    ) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::param("r", format!("must be nonnegative, got {r}")));
        }
        if self.total_mass == 0.0 {
            return Err(Error::Unnormalized { mass: 0.0 });
        }
        let weights = tilt_weights(&self.kind, r, d)?;
        let k = pick_index(&weights, rng);
        Ok(kind_sample_tilted(&self.kind, k, rng))
    }

    /// Radii of atoms and endpoints of continuous pieces, sorted.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        kind_breakpoints(&self.kind, &mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Weights `C(d,k) r^(d-k) m_k` for `k = 0..=d` of the normalized law.
pub(crate) fn tilt_weights(kind: &LawKind, r: f64, d: usize) -> Result<Vec<f64>> {
    let mut weights = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let coeff = binomial(d, k) * r.powi((d - k) as i32);
        if coeff == 0.0 {
            weights.push(0.0);
            continue;
        }
        let m = kind_moment(kind, k);
        if !m.is_finite() {
            return Err(Error::InfiniteMoment { order: k });
        }
        weights.push(coeff * m);
    }
    Ok(weights)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn pick_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        last = i;
        acc += w;
        if target < acc {
            return i;
        }
    }
    last
}

fn kind_survival(kind: &LawKind, r: f64, closed: bool) -> f64 {
    match kind {
        LawKind::Dirac { radius } => {
            let hit = if closed { *radius >= r } else { *radius > r };
            if hit {
                1.0
            } else {
                0.0
            }
        }
        LawKind::Uniform { lo, hi } => ((hi - r) / (hi - lo)).clamp(0.0, 1.0),
        LawKind::Pareto { shape, scale } => {
            if r <= *scale {
                1.0
            } else {
                (scale / r).powf(*shape)
            }
        }
        LawKind::Mixture(parts) => parts
            .iter()
            .map(|(w, l)| w * kind_survival(&l.kind, r, closed))
            .sum(),
    }
}

fn kind_moment(kind: &LawKind, k: usize) -> f64 {
    match kind {
        LawKind::Dirac { radius } => radius.powi(k as i32),
        LawKind::Uniform { lo, hi } => {
            let e = (k + 1) as i32;
            (hi.powi(e) - lo.powi(e)) / ((k + 1) as f64 * (hi - lo))
        }
        LawKind::Pareto { shape, scale } => {
            let k = k as f64;
            if *shape > k {
                shape * scale.powf(k) / (shape - k)
            } else {
                f64::INFINITY
            }
        }
        LawKind::Mixture(parts) => parts.iter().map(|(w, l)| w * kind_moment(&l.kind, k)).sum(),
    }
}

fn kind_greedy(kind: &LawKind, d: f64) -> bool {
    match kind {
        LawKind::Dirac { .. } | LawKind::Uniform { .. } => true,
        LawKind::Pareto { shape, .. } => shape / d > 1.0,
        LawKind::Mixture(parts) => parts.iter().all(|(_, l)| kind_greedy(&l.kind, d)),
    }
}

fn kind_tail_moment(kind: &LawKind, alpha: f64, d: usize) -> f64 {
    match kind {
        LawKind::Dirac { radius } => {
            if *radius >= alpha {
                radius.powi(d as i32)
            } else {
                0.0
            }
        }
        LawKind::Uniform { lo, hi } => {
            let from = alpha.max(*lo);
            if from >= *hi {
                0.0
            } else {
                let e = (d + 1) as i32;
                (hi.powi(e) - from.powi(e)) / ((d + 1) as f64 * (hi - lo))
            }
        }
        LawKind::Pareto { shape, scale } => {
            let from = alpha.max(*scale);
            let d = d as f64;
            shape * scale.powf(*shape) * from.powf(d - shape) / (shape - d)
        }
        LawKind::Mixture(parts) => parts
            .iter()
            .map(|(w, l)| w * kind_tail_moment(&l.kind, alpha, d))
            .sum(),
    }
}

/// Returns the normalized restricted law and the fraction of mass kept.
fn kind_truncate(kind: &LawKind, rho: f64) -> (LawKind, f64) {
    match kind {
        LawKind::Dirac { radius } => (kind.clone(), if *radius >= rho { 1.0 } else { 0.0 }),
        LawKind::Uniform { lo, hi } => {
            if rho <= *lo {
                (kind.clone(), 1.0)
            } else if rho >= *hi {
                (kind.clone(), 0.0)
            } else {
                (LawKind::Uniform { lo: rho, hi: *hi }, (hi - rho) / (hi - lo))
            }
        }
        LawKind::Pareto { shape, scale } => {
            if rho <= *scale {
                (kind.clone(), 1.0)
            } else {
                (
                    LawKind::Pareto { shape: *shape, scale: rho },
                    (scale / rho).powf(*shape),
                )
            }
        }
        LawKind::Mixture(parts) => {
            let mut kept = Vec::new();
            let mut total = 0.0;
            for (w, l) in parts {
                let (child, frac) = kind_truncate(&l.kind, rho);
                if frac > 0.0 {
                    kept.push((w * frac, RadiusLaw::probability(child)));
                    total += w * frac;
                }
            }
            for part in kept.iter_mut() {
                part.0 /= total;
            }
            (LawKind::Mixture(kept), total)
        }
    }
}

/// Draw from the law tilted by `rho^k` (k = 0 is the law itself).
fn kind_sample_tilted<R: Rng + ?Sized>(kind: &LawKind, k: usize, rng: &mut R) -> f64 {
    match kind {
        LawKind::Dirac { radius } => *radius,
        LawKind::Uniform { lo, hi } => {
            let u: f64 = rng.gen();
            if k == 0 {
                return (lo + u * (hi - lo)).clamp(*lo, *hi);
            }
            let e = (k + 1) as i32;
            let (a, b) = (lo.powi(e), hi.powi(e));
            (a + u * (b - a)).powf(1.0 / (k + 1) as f64).clamp(*lo, *hi)
        }
        LawKind::Pareto { shape, scale } => {
            // rho^k tilt of Pareto(shape, scale) is Pareto(shape - k, scale).
            let u: f64 = rng.gen();
            let a = shape - k as f64;
            scale * (1.0 - u).powf(-1.0 / a)
        }
        LawKind::Mixture(parts) => {
            let weights: Vec<f64> = parts.iter().map(|(w, l)| w * kind_moment(&l.kind, k)).collect();
            let i = pick_index(&weights, rng);
            kind_sample_tilted(&parts[i].1.kind, k, rng)
        }
    }
}

fn kind_breakpoints(kind: &LawKind, out: &mut Vec<f64>) {
    match kind {
        LawKind::Dirac { radius } => out.push(*radius),
        LawKind::Uniform { lo, hi } => {
            out.push(*lo);
            out.push(*hi);
        }
        LawKind::Pareto { scale, .. } => out.push(*scale),
        LawKind::Mixture(parts) => parts.iter().for_each(|(_, l)| kind_breakpoints(&l.kind, out)),
    }
}

impl fmt::Display for RadiusLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LawKind::Dirac { radius } => write!(f, "dirac:{radius}"),
            LawKind::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            LawKind::Pareto { shape, scale } => write!(f, "pareto:{shape}:{scale}"),
            LawKind::Mixture(parts) => {
                write!(f, "mix:")?;
                for (i, (w, l)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{w}*<{l}>")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `dirac:r0`, `uniform:a:b`, `pareto:shape:scale` and
/// `mix:w1*<law1>,w2*<law2>` (angle brackets optional for non-mixture children).
impl FromStr for RadiusLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidLaw(format!("`{s}`: expected <kind>:<params>")))?;
        let nums = |n: usize| -> Result<Vec<f64>> {
            let vals: Vec<&str> = rest.split(':').collect();
            if vals.len() != n {
                return Err(Error::InvalidLaw(format!("`{s}`: expected {n} parameters")));
            }
            vals.iter()
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidLaw(format!("`{s}`: bad number `{v}`")))
                })
                .collect()
        };
        match head.trim() {
            "dirac" => RadiusLaw::dirac(nums(1)?[0]),
            "uniform" => {
                let v = nums(2)?;
                RadiusLaw::uniform(v[0], v[1])
            }
            "pareto" => {
                let v = nums(2)?;
                RadiusLaw::pareto(v[0], v[1])
            }
            "mix" => {
                let mut parts = Vec::new();
                for item in split_top_level(rest)? {
                    let (w, law) = item.split_once('*').ok_or_else(|| {
                        Error::InvalidLaw(format!("`{item}`: mixture items are <weight>*<law>"))
                    })?;
                    let w: f64 = w
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidLaw(format!("bad mixture weight `{w}`")))?;
                    let law = law.trim();
                    let law = law
                        .strip_prefix('<')
                        .and_then(|l| l.strip_suffix('>'))
                        .unwrap_or(law);
                    parts.push((w, law.parse()?));
                }
                RadiusLaw::mixture(parts)
            }
            other => Err(Error::InvalidLaw(format!("unknown law kind `{other}`"))),
        }
    }
}

fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '<' => depth += 1,
            '>' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::InvalidLaw(format!("unbalanced brackets in `{s}`")));
        }
    }
    if depth != 0 {
        return Err(Error::InvalidLaw(format!("unbalanced brackets in `{s}`")));
    }
    out.push(&s[start..]);
    Ok(out)
}
