// Independent reference implementations shared by the integration tests.
// Nothing here calls into the library's numerics.
#![allow(dead_code, clippy::too_many_arguments)]

use boolfpp::radius_laws::LawKind;
use boolfpp::{Ball, RadiusLaw};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on a finite interval.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // Start from a few panels so narrow features are not skipped.
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson_step(&f, x0, x1, f0, fm, f1, whole, tol / panels as f64, 50)
        })
        .sum()
}

/// `int_{[lo, inf)} rho^k nu(d rho)` for a probability law, by quadrature.
pub fn law_power_integral(law: &RadiusLaw, k: i32, lo: f64) -> f64 {
    match law.kind() {
        LawKind::Dirac { radius } => {
            if *radius >= lo {
                radius.powi(k)
            } else {
                0.0
            }
        }
        LawKind::Uniform { lo: a, hi: b } => {
            let start = lo.max(*a);
            if start >= *b {
                return 0.0;
            }
            simpson(|x| x.powi(k) / (b - a), start, *b, 1e-15)
        }
        LawKind::Pareto { shape, scale } => {
            // density shape scale^shape rho^(-shape-1) on [scale, inf); substitute
            // rho = start t^(-q), q = 1/(shape - k), which makes the integrand constant
            // for the leading power and bounded otherwise.
            let start = lo.max(*scale);
            let q = 1.0 / (shape - k as f64);
            let f = |t: f64| {
                if t <= 0.0 {
                    return shape * scale.powf(*shape) * start.powf(k as f64 - shape) * q;
                }
                let rho = start * t.powf(-q);
                let jac = start * q * t.powf(-q - 1.0);
                rho.powi(k) * shape * scale.powf(*shape) * rho.powf(-shape - 1.0) * jac
            };
            simpson(f, 0.0, 1.0, 1e-15)
        }
        LawKind::Mixture(parts) => parts.iter().map(|(w, l)| w * law_power_integral(l, k, lo)).sum(),
    }
}

pub fn binom(n: i32, k: i32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn unit_ball_volume(d: usize) -> f64 {
    // v_d = pi^(d/2) / Gamma(d/2 + 1), via the two-step recursion.
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Reference `lambda v_d int (rho + r)^d nu(d rho)`.
pub fn hitting_intensity_oracle(law: &RadiusLaw, lambda: f64, r: f64, d: usize) -> f64 {
    let d = d as i32;
    let s: f64 = (0..=d)
        .map(|k| binom(d, k) * r.powi(d - k) * law_power_integral(law, k, 0.0))
        .sum();
    lambda * unit_ball_volume(d as usize) * s
}

#[derive(Debug, Clone)]
pub enum Term {
    Point(Vec<f64>),
    Sphere(Vec<f64>, f64),
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn ball_term_gap(b: &Ball, t: &Term) -> f64 {
    match t {
        Term::Point(p) => (dist(&b.center, p) - b.radius).max(0.0),
        Term::Sphere(c, rr) => ((dist(&b.center, c) - rr).abs() - b.radius).max(0.0),
    }
}

fn term_term_gap(a: &Term, b: &Term) -> f64 {
    match (a, b) {
        (Term::Point(p), Term::Point(q)) => dist(p, q),
        (Term::Point(p), Term::Sphere(c, r)) | (Term::Sphere(c, r), Term::Point(p)) => (dist(p, c) - r).abs(),
        (Term::Sphere(c1, r1), Term::Sphere(c2, r2)) => {
            let t = dist(c1, c2);
            if t + r1.min(*r2) <= r1.max(*r2) {
                r1.max(*r2) - t - r1.min(*r2)
            } else {
                (t - r1 - r2).max(0.0)
            }
        }
    }
}

/// Components by transitive closure of strict overlap.
pub fn components_oracle(balls: &[Ball]) -> Vec<usize> {
    let n = balls.len();
    let mut label: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if dist(&balls[i].center, &balls[j].center) < balls[i].radius + balls[j].radius && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
    }
    label
}

/// Minimum over all sequences of distinct components of the summed gaps.
pub fn brute_travel_time(balls: &[Ball], a: &Term, b: &Term) -> f64 {
    let label = components_oracle(balls);
    let mut ids: Vec<usize> = label.clone();
    ids.sort();
    ids.dedup();
    let k = ids.len();
    let members: Vec<Vec<&Ball>> = ids
        .iter()
        .map(|id| balls.iter().zip(&label).filter(|(_, l)| *l == id).map(|(b, _)| b).collect())
        .collect();
    let comp_gap = |i: usize, j: usize| -> f64 {
        let mut g = f64::INFINITY;
        for x in &members[i] {
            for y in &members[j] {
                g = g.min((dist(&x.center, &y.center) - x.radius - y.radius).max(0.0));
            }
        }
        g
    };
    let term_gap = |i: usize, t: &Term| members[i].iter().map(|x| ball_term_gap(x, t)).fold(f64::INFINITY, f64::min);
    let cg: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| comp_gap(i, j)).collect()).collect();
    let ga: Vec<f64> = (0..k).map(|i| term_gap(i, a)).collect();
    let gb: Vec<f64> = (0..k).map(|i| term_gap(i, b)).collect();
    let mut best = term_term_gap(a, b);
    let mut used = vec![false; k];
    fn rec(last: usize, acc: f64, used: &mut Vec<bool>, cg: &[Vec<f64>], gb: &[f64], best: &mut f64) {
        *best = best.min(acc + gb[last]);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                rec(j, acc + cg[last][j], used, cg, gb, best);
                used[j] = false;
            }
        }
    }
    for i in 0..k {
        used[i] = true;
        rec(i, ga[i], &mut used, &cg, &gb, &mut best);
        used[i] = false;
    }
    best
}

/// Length of a polyline outside every ball, from per-segment chord intervals.
pub fn tau_oracle(balls: &[Ball], vertices: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for w in vertices.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let len = dist(p, q);
        if len == 0.0 {
            continue;
        }
        let dir: Vec<f64> = p.iter().zip(q).map(|(x, y)| (y - x) / len).collect();
        let mut iv: Vec<(f64, f64)> = Vec::new();
        for b in balls {
            let oc: Vec<f64> = p.iter().zip(&b.center).map(|(x, c)| x - c).collect();
            let bh: f64 = oc.iter().zip(&dir).map(|(o, u)| o * u).sum();
            let c: f64 = oc.iter().map(|o| o * o).sum::<f64>() - b.radius * b.radius;
            let disc = bh * bh - c;
            if disc <= 0.0 {
                continue;
            }
            let s = disc.sqrt();
            let (t0, t1) = ((-bh - s).max(0.0), (-bh + s).min(len));
            if t1 > t0 {
                iv.push((t0, t1));
            }
        }
        iv.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut covered = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for (s, e) in iv {
            cur = match cur {
                Some((cs, ce)) if s <= ce => Some((cs, ce.max(e))),
                Some((cs, ce)) => {
                    covered += ce - cs;
                    Some((s, e))
                }
                None => Some((s, e)),
            };
        }
        if let Some((cs, ce)) = cur {
            covered += ce - cs;
        }
        total += (len - covered).max(0.0);
    }
    total
}

/// Greedy ratio by enumerating every ordered sequence of distinct points.
pub fn greedy_naive(points: &[(Vec<f64>, f64)]) -> f64 {
    let n = points.len();
    let origin = vec![0.0; points.first().map(|p| p.0.len()).unwrap_or(2)];
    let mut best = 0.0f64;
    let mut order: Vec<usize> = Vec::new();
    fn rec(points: &[(Vec<f64>, f64)], origin: &[f64], order: &mut Vec<usize>, best: &mut f64) {
        if !order.is_empty() {
            let mut len = 0.0;
            let mut prev = origin;
            let mut w = 0.0;
            for &i in order.iter() {
                len += dist(prev, &points[i].0);
                prev = &points[i].0;
                w += points[i].1;
            }
            *best = best.max(w / len);
        }
        for i in 0..points.len() {
            if !order.contains(&i) {
                order.push(i);
                rec(points, origin, order, best);
                order.pop();
            }
        }
    }
    if n > 0 {
        rec(points, &origin, &mut order, &mut best);
    }
    best
}

pub fn uniform_in_ball<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = center.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return p.iter().zip(center).map(|(x, c)| c + radius * x).collect();
        }
    }
}

/// Random balls in dimension 2 with at most `max_components` components,
/// all centers inside `B(0, extent)`.
pub fn random_instance<R: Rng>(rng: &mut R, extent: f64, max_components: usize) -> Vec<Ball> {
    loop {
        let n = rng.gen_range(0..=14);
        let balls: Vec<Ball> = (0..n)
            .map(|_| {
                let c = uniform_in_ball(rng, &[0.0, 0.0], extent - 3.0);
                Ball::new(c, rng.gen_range(0.3..3.0)).unwrap()
            })
            .collect();
        let mut labels = components_oracle(&balls);
        labels.sort();
        labels.dedup();
        if labels.len() <= max_components {
            return balls;
        }
    }
}

/// Two-sided KS statistic of sorted `xs` against a CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(usize, f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(i, x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Twenty radius laws used by the analytic checks.
pub fn law_catalog() -> Vec<RadiusLaw> {
    [
        "dirac:0.5",
        "dirac:1",
        "dirac:2.5",
        "uniform:0.05:1",
        "uniform:0.5:2",
        "uniform:1:3",
        "uniform:0.1:0.2",
        "pareto:5:1",
        "pareto:3.5:0.5",
        "pareto:4:2",
        "pareto:7:0.3",
        "pareto:6.5:1.5",
        "pareto:4.2:1",
        "mix:0.5*<dirac:1>,0.5*<uniform:0.5:2>",
        "mix:0.3*<pareto:5:1>,0.7*<dirac:0.5>",
        "mix:0.2*<uniform:0.05:1>,0.8*<pareto:4.5:0.7>",
        "mix:0.25*<dirac:0.3>,0.25*<dirac:1.3>,0.5*<uniform:0.2:0.9>",
        "mix:0.6*<pareto:8:0.5>,0.4*<pareto:5:2>",
        "mix:0.9*<dirac:1>,0.1*<mix:0.5*<uniform:2:4>,0.5*<pareto:6:3>>",
        "mix:0.5*<uniform:1:1.5>,0.5*<uniform:1.25:3>",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}
