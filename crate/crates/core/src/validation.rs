//! The acceptance suite: analytic/quadrature/Monte Carlo cross-checks and
//! the reproduction of the reference trends.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::antenna::AntennaPattern;
use crate::blockage::{blockage_zone_length, is_link_blocked, los_probability, Blocker};
use crate::channel::SystemParams;
use crate::config::{CurveMode, ExperimentSpec};
use crate::coverage::{coverage, CoverageModel};
use crate::experiment::{emit_csv, preset, run_experiment};
use crate::geometry::Point2;
use crate::lambert::lambert_w0;
use crate::quadrature::AdaptiveSimpson;
use crate::rng::{stream, StreamRng};
use crate::sim::{binomial_sigma, Mode, Simulator};
use crate::{dbm_to_watts, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    fn new(id: u8, title: &'static str, passed: bool, detail: String) -> Self {
        Self { id, title, passed, detail }
    }

    fn error(id: u8, title: &'static str, e: crate::Error) -> Self {
        Self::new(id, title, false, format!("error: {e}"))
    }
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {:>2}. {}: {}", self.id, self.title, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    /// Trials per Monte Carlo point.
    pub n_trials: u64,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { n_trials: 100_000, seed: crate::config::DEFAULT_SEED }
    }
}

/// Runs every criterion in order.
pub fn run_all(opts: &ValidationOptions) -> Vec<CriterionReport> {
    let mut out = vec![closed_form_vs_quadrature(opts), blockage_exactness(opts)];
    match reference_sweep(opts) {
        Ok(sweep) => {
            out.push(dominant_consistency(&sweep));
            out.push(approximation_gap(&sweep));
            out.push(association_fixed_point(opts));
            out.push(distance_trends(&sweep));
        }
        Err(e) => {
            let detail = format!("error: {e}");
            out.push(CriterionReport::new(3, TITLES[2], false, detail.clone()));
            out.push(CriterionReport::new(4, TITLES[3], false, detail.clone()));
            out.push(association_fixed_point(opts));
            out.push(CriterionReport::new(6, TITLES[5], false, detail));
        }
    }
    out.push(threshold_trends());
    out.push(gain_split_trends());
    out.push(beam_elevation_sampler(opts));
    out.push(determinism(opts));
    out
}

pub const TITLES: [&str; 10] = [
    "closed-form vs quadrature vertical hit probability",
    "blockage void probability",
    "dominant-interferer approximation vs dominant-only MC",
    "dominant-only minus full MC gap",
    "association radius fixed point and Lambert W round trip",
    "coverage vs distance trends",
    "LOS coverage vs threshold trends",
    "gain split trends",
    "interferer beam elevation sampler",
    "CSV determinism across thread counts",
];

/// A random parameter set with an association radius, drawn from `rng`.
pub fn random_feasible_params(rng: &mut StreamRng) -> SystemParams {
    loop {
        let h_u = rng.random_range(0.5..1.5);
        let h_b = h_u + rng.random_range(0.1..1.0);
        let h_a = h_b + rng.random_range(0.3..4.0);
        let (Ok(ap_pattern), Ok(ue_pattern)) = (
            AntennaPattern::square_dbi(rng.random_range(5.0..30.0)),
            AntennaPattern::square_dbi(rng.random_range(5.0..30.0)),
        ) else {
            continue;
        };
        let p = SystemParams {
            h_a,
            h_u,
            h_b,
            r_b: rng.random_range(0.1..0.5),
            frequency: rng.random_range(0.3e12..3e12),
            absorption: rng.random_range(0.0..1.0),
            tx_power: dbm_to_watts(rng.random_range(0.0..30.0)),
            noise_power: dbm_to_watts(rng.random_range(-90.0..-60.0)),
            ap_pattern,
            ue_pattern,
            lambda_a: rng.random_range(0.01..0.5),
            lambda_b: rng.random_range(0.0..0.5),
            tau: crate::db_to_linear(rng.random_range(-5.0..15.0)),
        };
        if p.max_association_radius().is_ok_and(|r| r > 0.0) {
            return p;
        }
    }
}

pub fn closed_form_vs_quadrature(opts: &ValidationOptions) -> CriterionReport {
    let title = TITLES[0];
    let mut rng = stream(opts.seed, 1);
    let mut worst = 0.0f64;
    let mut at = (0, 0.0);
    for set in 0..20 {
        let p = random_feasible_params(&mut rng);
        let model = match CoverageModel::new(p) {
            Ok(m) => m,
            Err(e) => return CriterionReport::error(1, title, e),
        };
        let (_, x_nu) = model.breakpoints();
        let reach = if x_nu.is_finite() { 1.5 * x_nu } else { 3.0 * model.association_radius() };
        for k in 0..200 {
            let x = reach * k as f64 / 199.0;
            let err = (model.p_hit_vertical(x) - model.p_hit_vertical_by_quadrature(x)).abs();
            if err > worst {
                worst = err;
                at = (set, x);
            }
        }
    }
    CriterionReport::new(
        1,
        title,
        worst < 1e-6,
        format!("max |Δ| = {worst:.3e} (set {}, x = {:.4}) over 20 sets × 200 points; need < 1e-6", at.0, at.1),
    )
}

pub fn blockage_exactness(opts: &ValidationOptions) -> CriterionReport {
    let title = TITLES[1];
    let p = SystemParams::default();
    let n = opts.n_trials;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (j, x) in [0.0, 2.0, 5.0, 10.0, 20.0].into_iter().enumerate() {
        let radius = blockage_zone_length(&p, x) + p.r_b;
        let count = Poisson::new(p.lambda_b * std::f64::consts::PI * radius * radius).expect("positive mean");
        let ap = Point2::new(x, 0.0);
        let clear = (0..n)
            .filter(|&i| {
                let mut rng = stream(opts.seed ^ 0x2b10c, (j as u64) << 40 | i);
                let k = count.sample(&mut rng) as usize;
                let blockers: Vec<Blocker> = (0..k)
                    .map(|_| {
                        let r = radius * rng.random::<f64>().sqrt();
                        let a = std::f64::consts::TAU * rng.random::<f64>();
                        Blocker::from_params(Point2::from_polar(r, a), &p)
                    })
                    .collect();
                !is_link_blocked(Point2::ORIGIN, ap, &blockers, &p)
            })
            .count();
        let est = clear as f64 / n as f64;
        let exact = los_probability(&p, x);
        let z = (est - exact) / binomial_sigma(exact, n);
        worst = worst.max(z.abs());
        parts.push(format!("x={x}: {est:.4} vs {exact:.4} (z={z:+.2})"));
    }
    CriterionReport::new(2, title, worst <= 3.0, format!("{}; need |z| ≤ 3", parts.join(", ")))
}

/// MC estimates of every mode at `x0 = 1, …, 9` with reference parameters,
/// shared by criteria 3, 4 and 6.
pub struct ReferenceSweep {
    pub x0: Vec<f64>,
    pub analytic: Vec<crate::coverage::CoverageResult>,
    /// Indexed like [`Mode::ALL`].
    pub mc: Vec<Vec<crate::sim::Estimate>>,
}

pub fn reference_sweep(opts: &ValidationOptions) -> Result<ReferenceSweep> {
    let p = SystemParams::default();
    let sim = Simulator::new(p)?;
    let x0: Vec<f64> = (1..=9).map(f64::from).collect();
    let analytic = x0.iter().map(|&x| coverage(&p, x)).collect::<Result<Vec<_>>>()?;
    let mc = x0
        .iter()
        .map(|&x| sim.estimate_modes(x, opts.n_trials, &Mode::ALL, opts.seed, false))
        .collect();
    Ok(ReferenceSweep { x0, analytic, mc })
}

const FULL: usize = 0;
const INTERFERENCE: usize = 1;
const BLOCKAGE: usize = 2;
const DOMINANT: usize = 3;

pub fn dominant_consistency(s: &ReferenceSweep) -> CriterionReport {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for ((x, a), e) in s.x0.iter().zip(&s.analytic).zip(&s.mc) {
        let d = &e[DOMINANT];
        let z = (a.p_c - d.value) / d.sigma();
        worst = worst.max(z.abs());
        parts.push(format!("{x}:{z:+.2}"));
    }
    CriterionReport::new(
        3,
        TITLES[2],
        worst <= 3.0,
        format!("z by x0 [{}]; max |z| = {worst:.2}, need ≤ 3", parts.join(" ")),
    )
}

pub fn approximation_gap(s: &ReferenceSweep) -> CriterionReport {
    let gaps: Vec<f64> = s.mc.iter().map(|e| e[DOMINANT].value - e[FULL].value).collect();
    let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let max = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    CriterionReport::new(
        4,
        TITLES[3],
        min >= 0.0 && max <= 0.05,
        format!("gap in [{min:.4}, {max:.4}] over x0 = 1..9; need [0, 0.05]"),
    )
}

pub fn association_fixed_point(opts: &ValidationOptions) -> CriterionReport {
    let mut rng = stream(opts.seed, 5);
    let mut worst_snr = 0.0f64;
    for _ in 0..100 {
        let p = random_feasible_params(&mut rng);
        match p.max_association_radius() {
            Ok(r) => worst_snr = worst_snr.max(((p.snr(r) - p.tau) / p.tau).abs()),
            Err(e) => return CriterionReport::error(5, TITLES[4], e),
        }
    }
    let mut worst_w = 0.0f64;
    for k in 0..10_000 {
        let z = 10f64.powf(-8.0 + 16.0 * k as f64 / 9999.0);
        match lambert_w0(z) {
            Ok(w) => worst_w = worst_w.max(((w * w.exp() - z) / z).abs()),
            Err(e) => return CriterionReport::error(5, TITLES[4], e),
        }
    }
    CriterionReport::new(
        5,
        TITLES[4],
        worst_snr < 1e-9 && worst_w < 1e-12,
        format!(
            "max rel |SNR(R_T) − τ| = {worst_snr:.2e} (need < 1e-9); max rel W round trip = {worst_w:.2e} (need < 1e-12)"
        ),
    )
}

pub fn distance_trends(s: &ReferenceSweep) -> CriterionReport {
    let mut violations = Vec::new();
    for ((x, a), e) in s.x0.iter().zip(&s.analytic).zip(&s.mc) {
        if a.p_c > a.p_cl || a.p_c > a.p_l {
            violations.push(format!("analytic at x0={x}"));
        }
        if e[FULL].value > e[INTERFERENCE].value || e[FULL].value > e[BLOCKAGE].value {
            violations.push(format!("MC at x0={x}"));
        }
    }
    let gap = |i: usize| s.mc[i][BLOCKAGE].value - s.mc[i][FULL].value;
    let (near, far) = (gap(0), gap(s.x0.len() - 1));
    let passed = violations.is_empty() && near < 0.02 && far > 0.05;
    CriterionReport::new(
        6,
        TITLES[5],
        passed,
        format!(
            "ordering violations: {}; blockage-only − full = {near:.4} at x0=1 (need < 0.02), {far:.4} at x0=9 (need > 0.05)",
            if violations.is_empty() { "none".to_owned() } else { violations.join(", ") }
        ),
    )
}

/// LOS coverage of a threshold-sweep spec, one value per threshold.
fn analytic_series(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    let mut spec = spec.clone();
    spec.modes = vec![CurveMode::Analytic];
    Ok(run_experiment(&spec)?.series(CurveMode::Analytic).expect("analytic mode requested"))
}

pub fn threshold_trends() -> CriterionReport {
    let title = TITLES[6];
    let specs = match preset("fig6", 0) {
        Ok(s) => s,
        Err(e) => return CriterionReport::error(7, title, e),
    };
    let find = |la: f64, lb: f64| {
        specs
            .iter()
            .find(|s| s.params.lambda_a == la && s.params.lambda_b == lb)
            .expect("fig6 preset covers both densities")
    };
    let taus = specs[0].sweep.values.clone();
    let mut curves = std::collections::BTreeMap::new();
    for (la, lb) in [(0.05, 0.1), (0.05, 0.2), (0.1, 0.1), (0.1, 0.2)] {
        match analytic_series(find(la, lb)) {
            Ok(c) => curves.insert(((la * 100.0) as u32, (lb * 100.0) as u32), c),
            Err(e) => return CriterionReport::error(7, title, e),
        };
    }
    let mut failures = Vec::new();
    for ((la, lb), c) in &curves {
        let bad: Vec<String> = c
            .windows(2)
            .zip(&taus)
            .filter(|(w, _)| w[1] >= w[0])
            .map(|(w, t)| format!("{t}→{} dB ({:.4}→{:.4})", t + 1.0, w[0], w[1]))
            .collect();
        if !bad.is_empty() {
            failures.push(format!(
                "λ_A={} λ_B={}: not strictly decreasing at {}",
                *la as f64 / 100.0,
                *lb as f64 / 100.0,
                summarize(&bad)
            ));
        }
    }
    for lb in [10, 20] {
        let bad: Vec<String> = curves[&(5, lb)]
            .iter()
            .zip(&curves[&(10, lb)])
            .zip(&taus)
            .filter(|((a, b), _)| b >= a)
            .map(|(_, t)| format!("{t} dB"))
            .collect();
        if !bad.is_empty() {
            failures.push(format!("doubling λ_A (λ_B={}) not strict at {}", lb as f64 / 100.0, summarize(&bad)));
        }
    }
    for la in [5, 10] {
        let bad: Vec<String> = curves[&(la, 10)]
            .iter()
            .zip(&curves[&(la, 20)])
            .zip(&taus)
            .filter(|((a, b), _)| b < a)
            .map(|(_, t)| format!("{t} dB"))
            .collect();
        if !bad.is_empty() {
            failures.push(format!("doubling λ_B (λ_A={}) decreases at {}", la as f64 / 100.0, summarize(&bad)));
        }
    }
    CriterionReport::new(
        7,
        title,
        failures.is_empty(),
        if failures.is_empty() {
            format!("all trends hold over τ = {}..{} dB", taus[0], taus[taus.len() - 1])
        } else {
            failures.join("; ")
        },
    )
}

fn summarize(items: &[String]) -> String {
    if items.len() <= 4 {
        items.join(", ")
    } else {
        format!("{}, … ({} points)", items[..3].join(", "), items.len())
    }
}

pub fn gain_split_trends() -> CriterionReport {
    let title = TITLES[7];
    let splits = [(12.5, 17.5), (17.5, 12.5), (22.5, 7.5)];
    let xs: Vec<f64> = (0..=32).map(|k| 1.0 + 0.25 * k as f64).collect();
    let mut curves = Vec::new();
    for (ga, gu) in splits {
        let patterns = AntennaPattern::square_dbi(ga).and_then(|a| Ok((a, AntennaPattern::square_dbi(gu)?)));
        let (ap_pattern, ue_pattern) = match patterns {
            Ok(pair) => pair,
            Err(e) => return CriterionReport::error(8, title, e),
        };
        let p = SystemParams { ap_pattern, ue_pattern, ..SystemParams::default() };
        match xs.iter().map(|&x| coverage(&p, x).map(|r| r.p_c)).collect::<Result<Vec<_>>>() {
            Ok(c) => curves.push(c),
            Err(e) => return CriterionReport::error(8, title, e),
        }
    }
    let mut failures = Vec::new();
    let mut margins = Vec::new();
    for w in 0..2 {
        let (lo, hi) = (&curves[w], &curves[w + 1]);
        let margin = lo.iter().zip(hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
        margins.push(format!("{:.4}", margin));
        if margin <= 0.0 {
            failures.push(format!("G_A {} → {} dBi", splits[w].0, splits[w + 1].0));
        }
    }
    CriterionReport::new(
        8,
        title,
        failures.is_empty(),
        format!(
            "min pointwise improvement over x0 ∈ [1, 9] for G_A 12.5→17.5 and 17.5→22.5 dBi: [{}]{}",
            margins.join(", "),
            if failures.is_empty() { String::new() } else { format!("; not higher for {}", failures.join(", ")) }
        ),
    )
}

pub fn beam_elevation_sampler(opts: &ValidationOptions) -> CriterionReport {
    let title = TITLES[8];
    let p = SystemParams::default();
    let (sim, model) = match (Simulator::new(p), CoverageModel::new(p)) {
        (Ok(s), Ok(m)) => (s, m),
        (Err(e), _) | (_, Err(e)) => return CriterionReport::error(9, title, e),
    };
    let n = opts.n_trials as usize;
    let mut rng = stream(opts.seed, 9);
    let mut samples: Vec<f64> = (0..n).map(|_| sim.sample_beam_elevation(&mut rng)).collect();
    samples.sort_by(f64::total_cmp);
    let ks = samples
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let f = model.beta_cdf(b);
            (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
        })
        .fold(0.0f64, f64::max);
    let mass = AdaptiveSimpson::with_rel_tol(1e-13).integrate(|b| model.beta_pdf(b), model.beta_min(), FRAC_PI_2, &[]);
    let mass_err = (mass - 1.0).abs();
    CriterionReport::new(
        9,
        title,
        ks < 0.01 && mass_err < 1e-10,
        format!("KS = {ks:.5} at N = {n} (need < 0.01); |∫f_β − 1| = {mass_err:.2e} (need < 1e-10)"),
    )
}

/// CSV bytes of the distance-sweep preset computed on a pool of `threads`.
pub fn distance_preset_csv(seed: u64, n_trials: Option<u64>, threads: usize) -> Result<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::InvalidParams(e.to_string()))?;
    pool.install(|| {
        let mut out = Vec::new();
        for mut spec in preset("fig5", seed)? {
            if let Some(n) = n_trials {
                spec.n_trials = n;
            }
            emit_csv(&run_experiment(&spec)?, &mut out)?;
        }
        Ok(out)
    })
}

pub fn determinism(opts: &ValidationOptions) -> CriterionReport {
    let title = TITLES[9];
    match (distance_preset_csv(opts.seed, None, 1), distance_preset_csv(opts.seed, None, 8)) {
        (Ok(a), Ok(b)) => CriterionReport::new(
            10,
            title,
            a == b,
            format!(
                "{} bytes with 1 thread, {} bytes with 8 threads, {}",
                a.len(),
                b.len(),
                if a == b { "identical" } else { "different" }
            ),
        ),
        (Err(e), _) | (_, Err(e)) => CriterionReport::error(10, title, e),
    }
}
