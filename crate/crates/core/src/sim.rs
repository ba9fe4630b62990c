//! Monte Carlo ground truth for the coverage analysis.
//!
//! A trial places the tagged UE at the origin and its AP at `(x0, 0)`, drops
//! a Poisson field of interfering APs on a disc around the UE, points each
//! interferer's beam at its own (virtual) UE, and evaluates all five
//! interference conditions geometrically before computing the SINR with the
//! full aggregate interference.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::blockage::{blockage_zone_length, is_link_blocked, BlockageConstants, Blocker};
use crate::channel::SystemParams;
use crate::coverage::p_hit_horizontal;
use crate::error::{Error, Result};
use crate::geometry::{wrapped_difference, Point2};
use crate::rng::{stream, StreamRng};

/// Which coverage indicator a Monte Carlo estimate tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Blockage on every link and the full aggregate interference.
    Full,
    /// No link is ever blocked.
    InterferenceOnly,
    /// Tagged-link blockage and noise only; interferers ignored.
    BlockageOnly,
    /// Blockage on every link; only the closest active interferer counts.
    DominantOnly,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Full, Mode::InterferenceOnly, Mode::BlockageOnly, Mode::DominantOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::InterferenceOnly => "interference-only",
            Mode::BlockageOnly => "blockage-only",
            Mode::DominantOnly => "dominant-only",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown simulation mode `{s}`")))
    }
}

/// How blockage of different links is correlated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockageCoupling {
    /// Each link sees its own independent blocker field.
    #[default]
    Independent,
    /// One blocker field blocks all links at once.
    Shared,
}

impl BlockageCoupling {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockageCoupling::Independent => "independent",
            BlockageCoupling::Shared => "shared",
        }
    }
}

impl FromStr for BlockageCoupling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Self::Independent),
            "shared" => Ok(Self::Shared),
            _ => Err(Error::Parse(format!("unknown blockage field `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub position: Point2,
    /// Azimuth of the interferer's beam, toward its own UE.
    pub beam_azimuth: f64,
    /// Downward elevation of the interferer's beam, in `[β̄, π/2]`.
    pub beam_elevation: f64,
}

/// One sampled deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tagged_ue: Point2,
    pub tagged_ap: Point2,
    pub interferers: Vec<Interferer>,
    /// The shared blocker field; empty under independent coupling.
    pub blockers: Vec<Blocker>,
    pub sim_radius: f64,
    pub coupling: BlockageCoupling,
    /// Key of the per-link blocker streams under independent coupling.
    pub link_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// `None` when the tagged link is blocked.
    pub sinr: Option<f64>,
    pub tagged_blocked: bool,
    pub n_active_interferers: usize,
    /// Sum of received power over active interferers (W).
    pub aggregate_interference: f64,
    pub dominant_only_covered: bool,
    pub full_covered: bool,
    /// Unblocked SNR of the tagged link.
    pub snr: f64,
}

impl TrialOutcome {
    pub fn blockage_only_covered(&self, tau: f64) -> bool {
        !self.tagged_blocked && self.snr >= tau
    }
}

/// A Monte Carlo probability estimate with its 95% normal half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub half_width_95: f64,
    pub n_trials: u64,
    pub seed: u64,
    pub mode: Mode,
}

impl Estimate {
    pub fn from_counts(hits: u64, n_trials: u64, seed: u64, mode: Mode) -> Self {
        let value = if n_trials == 0 { 0.0 } else { hits as f64 / n_trials as f64 };
        Self {
            value,
            half_width_95: 1.96 * binomial_sigma(value, n_trials),
            n_trials,
            seed,
            mode,
        }
    }

    /// Binomial standard error of the estimate.
    pub fn sigma(&self) -> f64 {
        binomial_sigma(self.value, self.n_trials)
    }
}

/// Standard error of a binomial proportion `p` over `n` trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

/// Simulation radius: the smallest disc outside which an AP is both too weak
/// (below σ²/1000) and too unlikely to interfere (`p_L·p_H,H < 10⁻⁴`),
/// clamped to `[3·R_T, 200 m]`.
pub fn simulation_radius(params: &SystemParams, association_radius: f64) -> f64 {
    let h = params.height_gap();
    let weak = params
        .distance_for_power(params.noise_power / 1000.0)
        .map(|d| (d * d - h * h).max(0.0).sqrt())
        .unwrap_or(f64::INFINITY);
    let c = BlockageConstants::new(params);
    let reach = c.zeta * p_hit_horizontal(params);
    let rare = if reach < 1e-4 {
        0.0
    } else if c.eta > 0.0 {
        (reach / 1e-4).ln() / c.eta
    } else {
        f64::INFINITY
    };
    let lo = 3.0 * association_radius;
    weak.max(rare).clamp(lo, lo.max(200.0))
}

/// Draws the downward elevation of an interferer's beam: its UE is uniform on
/// the association disc, so the horizontal UE distance is `R_T·√U`.
fn beam_elevation<R: Rng + ?Sized>(h: f64, association_radius: f64, rng: &mut R) -> f64 {
    let v = association_radius * rng.random::<f64>().sqrt();
    h.atan2(v)
}

/// Per-trial Monte Carlo engine for one parameter set.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: SystemParams,
    association_radius: f64,
    sim_radius: f64,
    blocker_radius: f64,
    coupling: BlockageCoupling,
    interferer_count: Option<Poisson<f64>>,
    sector_count: Option<Poisson<f64>>,
    blocker_count: Option<Poisson<f64>>,
}

impl Simulator {
    pub fn new(params: SystemParams) -> Result<Self> {
        params.validate()?;
        let association_radius = params.max_association_radius()?;
        let sim_radius = simulation_radius(&params, association_radius);
        // Every blockage zone starts at the tagged UE and is at most x̄(R) long.
        let blocker_radius = blockage_zone_length(&params, sim_radius) + params.r_b;
        let poisson = |mean: f64| (mean > 0.0).then(|| Poisson::new(mean).expect("finite positive mean"));
        Ok(Self {
            interferer_count: poisson(params.lambda_a * PI * sim_radius * sim_radius),
            sector_count: poisson(params.lambda_a * 0.5 * params.ue_pattern.phi_h().min(TAU) * sim_radius * sim_radius),
            blocker_count: poisson(params.lambda_b * PI * blocker_radius * blocker_radius),
            params,
            association_radius,
            sim_radius,
            blocker_radius,
            coupling: BlockageCoupling::default(),
        })
    }

    pub fn with_coupling(mut self, coupling: BlockageCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn association_radius(&self) -> f64 {
        self.association_radius
    }

    pub fn sim_radius(&self) -> f64 {
        self.sim_radius
    }

    pub fn coupling(&self) -> BlockageCoupling {
        self.coupling
    }

    /// Samples a full deployment from `rng`.
    ///
    /// Each interferer consumes four uniforms in a fixed order: radius,
    /// azimuth, beam azimuth, beam elevation.
    pub fn sample_scenario_with<R: Rng + ?Sized>(&self, x0: f64, rng: &mut R) -> Scenario {
        let h = self.params.height_gap();
        let n = self.interferer_count.map_or(0, |d| d.sample(rng) as usize);
        let mut interferers = Vec::with_capacity(n);
        for _ in 0..n {
            let r = self.sim_radius * rng.random::<f64>().sqrt();
            let azimuth = TAU * rng.random::<f64>();
            let beam_azimuth = TAU * rng.random::<f64>();
            interferers.push(Interferer {
                position: Point2::from_polar(r, azimuth),
                beam_azimuth,
                beam_elevation: beam_elevation(h, self.association_radius, rng),
            });
        }
        let link_seed = rng.random::<u64>();
        let blockers = match self.coupling {
            BlockageCoupling::Independent => Vec::new(),
            BlockageCoupling::Shared => self.sample_blockers(rng),
        };
        Scenario {
            tagged_ue: Point2::ORIGIN,
            tagged_ap: Point2::new(x0, 0.0),
            interferers,
            blockers,
            sim_radius: self.sim_radius,
            coupling: self.coupling,
            link_seed,
        }
    }

    /// Draws one interferer beam elevation.
    pub fn sample_beam_elevation<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        beam_elevation(self.params.height_gap(), self.association_radius, rng)
    }

    /// Deployment for trial 0 of `seed`.
    pub fn sample_scenario(&self, x0: f64, seed: u64) -> Scenario {
        self.sample_scenario_with(x0, &mut stream(seed, 0))
    }

    fn sample_blockers<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Blocker> {
        let n = self.blocker_count.map_or(0, |d| d.sample(rng) as usize);
        (0..n)
            .map(|_| {
                let r = self.blocker_radius * rng.random::<f64>().sqrt();
                let center = Point2::from_polar(r, TAU * rng.random::<f64>());
                Blocker::from_params(center, &self.params)
            })
            .collect()
    }

    /// Evaluates a deployment. With `blockage` off every link is LOS.
    pub fn evaluate(&self, scenario: &Scenario, blockage: bool) -> TrialOutcome {
        evaluate_scenario(&self.params, scenario, blockage)
    }

    /// One trial sampled and evaluated in a single pass, with and without
    /// blockage.
    ///
    /// Interferers outside the tagged UE's horizontal beam can never satisfy
    /// the first interference condition and their marks are independent, so
    /// only the beam sector of the disc is populated (an exact thinning of the
    /// full field that [`sample_scenario_with`](Self::sample_scenario_with)
    /// draws).
    pub fn run_trial(&self, x0: f64, rng: &mut StreamRng) -> [TrialOutcome; 2] {
        let p = &self.params;
        let h = p.height_gap();
        let beams = BeamHalfWidths::new(p);
        let psi0 = p.elevation_angle(x0);
        let tagged_ap = Point2::new(x0, 0.0);
        let sector = (2.0 * beams.ue_h).min(TAU);

        let n = self.sector_count.map_or(0, |d| d.sample(rng) as usize);
        let mut candidates: Vec<(Point2, f64)> = Vec::new();
        for _ in 0..n {
            let x = self.sim_radius * rng.random::<f64>().sqrt();
            // The tagged UE's beam points along azimuth 0.
            let azimuth = sector * (rng.random::<f64>() - 0.5);
            let beam_azimuth = TAU * rng.random::<f64>();
            let beta = beam_elevation(h, self.association_radius, rng);
            let psi = p.elevation_angle(x);
            if (psi - psi0).abs() > beams.ue_v
                || wrapped_difference(azimuth + PI, beam_azimuth).abs() > beams.ap_h
                || (psi - beta).abs() > beams.ap_v
            {
                continue;
            }
            candidates.push((Point2::from_polar(x, azimuth), x));
        }
        let link_seed = rng.random::<u64>();
        let shared = match self.coupling {
            BlockageCoupling::Independent => Vec::new(),
            BlockageCoupling::Shared => self.sample_blockers(rng),
        };
        let blocked = |link: u64, ap: Point2| match self.coupling {
            BlockageCoupling::Shared => is_link_blocked(Point2::ORIGIN, ap, &shared, p),
            BlockageCoupling::Independent => private_link_blocked(p, link_seed, link, Point2::ORIGIN, ap),
        };

        let tagged_blocked = blocked(0, tagged_ap);
        let mut with = Aggregate::default();
        let mut without = Aggregate::default();
        for (i, &(pos, x)) in candidates.iter().enumerate() {
            let power = p.received_power(x);
            without.add(x, power);
            if !blocked(i as u64 + 1, pos) {
                with.add(x, power);
            }
        }
        let signal = p.received_power(x0);
        [with.outcome(p, signal, tagged_blocked), without.outcome(p, signal, false)]
    }

    /// Estimates one coverage indicator over `n_trials` trials; trial `i`
    /// draws from stream `(base_seed, i)`.
    pub fn estimate(&self, x0: f64, n_trials: u64, mode: Mode, base_seed: u64) -> Estimate {
        self.estimate_modes(x0, n_trials, &[mode], base_seed, false)[0]
    }

    /// Estimates several indicators from the same trials. With
    /// `los_conditioned` each estimate is taken over the trials whose tagged
    /// link is unblocked.
    pub fn estimate_modes(
        &self,
        x0: f64,
        n_trials: u64,
        modes: &[Mode],
        base_seed: u64,
        los_conditioned: bool,
    ) -> Vec<Estimate> {
        let tau = self.params.tau;
        // [full, interference-only, blockage-only, dominant-only, LOS trials]
        let counts = (0..n_trials)
            .into_par_iter()
            .map(|i| {
                let [with, without] = self.run_trial(x0, &mut stream(base_seed, i));
                let los = !with.tagged_blocked;
                [
                    with.full_covered as u64,
                    without.full_covered as u64,
                    with.blockage_only_covered(tau) as u64,
                    with.dominant_only_covered as u64,
                    los as u64,
                ]
            })
            .reduce(|| [0u64; 5], |a, b| std::array::from_fn(|k| a[k] + b[k]));

        modes
            .iter()
            .map(|&mode| {
                let hits = match mode {
                    Mode::Full => counts[0],
                    Mode::InterferenceOnly => counts[1],
                    Mode::BlockageOnly => counts[2],
                    Mode::DominantOnly => counts[3],
                };
                // Interference-only trials are always LOS.
                let n = if los_conditioned && mode != Mode::InterferenceOnly {
                    counts[4]
                } else {
                    n_trials
                };
                Estimate::from_counts(hits, n, base_seed, mode)
            })
            .collect()
    }

    /// Estimates the probability that an interferer `x` away has the tagged
    /// UE inside its vertical beam.
    pub fn estimate_p_hit_vertical(&self, x: f64, n_trials: u64, seed: u64) -> Estimate {
        let h = self.params.height_gap();
        let psi = self.params.elevation_angle(x);
        let half = 0.5 * self.params.ap_pattern.phi_v();
        let hits: u64 = (0..n_trials)
            .into_par_iter()
            .map(|i| {
                let beta = beam_elevation(h, self.association_radius, &mut stream(seed, i));
                ((psi - beta).abs() <= half) as u64
            })
            .sum();
        Estimate::from_counts(hits, n_trials, seed, Mode::Full)
    }
}

#[derive(Debug, Clone, Copy)]
struct BeamHalfWidths {
    ue_h: f64,
    ue_v: f64,
    ap_h: f64,
    ap_v: f64,
}

impl BeamHalfWidths {
    fn new(p: &SystemParams) -> Self {
        Self {
            ue_h: 0.5 * p.ue_pattern.phi_h(),
            ue_v: 0.5 * p.ue_pattern.phi_v(),
            ap_h: 0.5 * p.ap_pattern.phi_h(),
            ap_v: 0.5 * p.ap_pattern.phi_v(),
        }
    }
}

#[derive(Debug, Default)]
struct Aggregate {
    total: f64,
    count: usize,
    closest: f64,
    closest_power: f64,
}

impl Aggregate {
    fn add(&mut self, x: f64, power: f64) {
        if self.count == 0 || x < self.closest {
            self.closest = x;
            self.closest_power = power;
        }
        self.total += power;
        self.count += 1;
    }

    fn outcome(&self, p: &SystemParams, signal: f64, tagged_blocked: bool) -> TrialOutcome {
        let sinr = (!tagged_blocked).then(|| signal / (p.noise_power + self.total));
        TrialOutcome {
            sinr,
            tagged_blocked,
            n_active_interferers: self.count,
            aggregate_interference: self.total,
            dominant_only_covered: !tagged_blocked && signal / (p.noise_power + self.closest_power) >= p.tau,
            full_covered: sinr.is_some_and(|s| s >= p.tau),
            snr: signal / p.noise_power,
        }
    }
}

/// Blockage of one link against its own blocker field, drawn from stream
/// `(link_seed, link)` over a link-aligned rectangle enclosing the zone.
fn private_link_blocked(p: &SystemParams, link_seed: u64, link: u64, ue: Point2, ap: Point2) -> bool {
    if p.lambda_b == 0.0 {
        return false;
    }
    let rel = ap - ue;
    let x = rel.norm();
    let dir = if x > 0.0 { rel * (1.0 / x) } else { Point2::new(1.0, 0.0) };
    let normal = Point2::new(-dir.y, dir.x);
    let length = blockage_zone_length(p, x) + 2.0 * p.r_b;
    let width = 2.0 * p.r_b;
    let mut rng = stream(link_seed, link);
    let n = Poisson::new(p.lambda_b * length * width)
        .expect("finite positive mean")
        .sample(&mut rng) as usize;
    let blockers: Vec<Blocker> = (0..n)
        .map(|_| {
            let along = -p.r_b + length * rng.random::<f64>();
            let across = -p.r_b + width * rng.random::<f64>();
            Blocker::from_params(ue + dir * along + normal * across, p)
        })
        .collect();
    is_link_blocked(ue, ap, &blockers, p)
}

fn evaluate_scenario(p: &SystemParams, s: &Scenario, blockage: bool) -> TrialOutcome {
    let beams = BeamHalfWidths::new(p);
    let ue = s.tagged_ue;
    let to_ap = s.tagged_ap - ue;
    let x0 = to_ap.norm();
    let theta0 = to_ap.azimuth();
    let psi0 = p.elevation_angle(x0);
    let blocked = |link: u64, ap: Point2| {
        blockage
            && match s.coupling {
                BlockageCoupling::Shared => is_link_blocked(ue, ap, &s.blockers, p),
                BlockageCoupling::Independent => private_link_blocked(p, s.link_seed, link, ue, ap),
            }
    };

    let tagged_blocked = blocked(0, s.tagged_ap);
    let mut agg = Aggregate::default();
    for (i, intf) in s.interferers.iter().enumerate() {
        let rel = intf.position - ue;
        let theta = rel.azimuth();
        if wrapped_difference(theta, theta0).abs() > beams.ue_h {
            continue;
        }
        let x = rel.norm();
        let psi = p.elevation_angle(x);
        if (psi - psi0).abs() > beams.ue_v {
            continue;
        }
        if wrapped_difference(theta + PI, intf.beam_azimuth).abs() > beams.ap_h {
            continue;
        }
        if (psi - intf.beam_elevation).abs() > beams.ap_v {
            continue;
        }
        if blocked(i as u64 + 1, intf.position) {
            continue;
        }
        agg.add(x, p.received_power(x));
    }
    agg.outcome(p, p.received_power(x0), tagged_blocked)
}

/// Samples trial 0 of `seed` at link distance `x0`.
pub fn sample_scenario(params: &SystemParams, x0: f64, seed: u64) -> Result<Scenario> {
    Ok(Simulator::new(*params)?.sample_scenario(x0, seed))
}

/// Evaluates a deployment with blockage on.
pub fn evaluate_trial(scenario: &Scenario, params: &SystemParams) -> TrialOutcome {
    evaluate_scenario(params, scenario, true)
}

/// Monte Carlo coverage estimate with independent per-link blockage.
///
/// A parameter set without an association radius cannot cover any link, so
/// it yields an exact zero estimate.
pub fn estimate_coverage(params: &SystemParams, x0: f64, n_trials: u64, mode: Mode, base_seed: u64) -> Result<Estimate> {
    match Simulator::new(*params) {
        Ok(sim) => Ok(sim.estimate(x0, n_trials, mode, base_seed)),
        Err(Error::InfeasibleGeometry(_)) => Ok(Estimate::from_counts(0, n_trials, base_seed, mode)),
        Err(e) => Err(e),
    }
}

pub fn estimate_p_hit_vertical(params: &SystemParams, x: f64, n_trials: u64, seed: u64) -> Result<Estimate> {
    Ok(Simulator::new(*params)?.estimate_p_hit_vertical(x, n_trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::vertical_window;
    use std::f64::consts::FRAC_PI_2;

    fn clear() -> SystemParams {
        SystemParams { lambda_b: 0.0, ..SystemParams::default() }
    }

    /// One interferer on the tagged link's axis, beam aimed straight back at
    /// the tagged UE.
    fn aimed(params: &SystemParams, x0: f64, x: f64) -> Scenario {
        Scenario {
            tagged_ue: Point2::ORIGIN,
            tagged_ap: Point2::new(x0, 0.0),
            interferers: vec![Interferer {
                position: Point2::new(x, 0.0),
                beam_azimuth: PI,
                beam_elevation: params.elevation_angle(x),
            }],
            blockers: Vec::new(),
            sim_radius: 200.0,
            coupling: BlockageCoupling::Shared,
            link_seed: 0,
        }
    }

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("partial".parse::<Mode>().is_err());
        assert_eq!("shared".parse::<BlockageCoupling>().unwrap(), BlockageCoupling::Shared);
    }

    #[test]
    fn simulation_radius_for_reference_params() {
        let p = SystemParams::default();
        let rt = p.max_association_radius().unwrap();
        assert_eq!(simulation_radius(&p, rt), 200.0);
        // Without blockers nor absorption the power condition decides.
        let sparse = SystemParams { lambda_a: 1e-4, ..p };
        let r = simulation_radius(&sparse, rt);
        assert!(r >= 3.0 * rt && r <= 200.0);
    }

    #[test]
    fn condition_two_matches_vertical_window() {
        let p = clear();
        let x0 = 5.0;
        let w = vertical_window(&p, x0);
        for k in 0..400 {
            let x = 0.05 + 0.05 * k as f64;
            if (x - w.r_min).abs() < 1e-9 || (x - w.r_max).abs() < 1e-9 {
                continue;
            }
            let o = evaluate_trial(&aimed(&p, x0, x), &p);
            assert_eq!(o.n_active_interferers == 1, w.contains(x), "x = {x}");
        }
    }

    #[test]
    fn beam_conditions_reject_misaligned_interferers() {
        let p = clear();
        let mut s = aimed(&p, 5.0, 4.0);
        assert_eq!(evaluate_trial(&s, &p).n_active_interferers, 1);
        s.interferers[0].beam_azimuth = 0.0;
        assert_eq!(evaluate_trial(&s, &p).n_active_interferers, 0);
        let mut s = aimed(&p, 5.0, 4.0);
        s.interferers[0].beam_elevation = FRAC_PI_2;
        assert_eq!(evaluate_trial(&s, &p).n_active_interferers, 0);
        let mut s = aimed(&p, 5.0, 4.0);
        s.interferers[0].position = Point2::new(0.0, 4.0);
        s.interferers[0].beam_azimuth = -0.5 * PI;
        assert_eq!(evaluate_trial(&s, &p).n_active_interferers, 0);
    }

    #[test]
    fn blocker_on_the_tagged_link_blocks_it() {
        let p = SystemParams::default();
        let mut s = aimed(&p, 5.0, 4.0);
        s.blockers.push(Blocker::from_params(Point2::new(1.0, 0.0), &p));
        let o = evaluate_trial(&s, &p);
        assert!(o.tagged_blocked);
        assert_eq!(o.sinr, None);
        assert!(!o.full_covered && !o.dominant_only_covered);
        // The interferer's link shares the zone and is blocked too.
        assert_eq!(o.n_active_interferers, 0);
    }

    #[test]
    fn scenarios_are_reproducible_and_bounded() {
        let p = SystemParams { lambda_a: 0.01, ..SystemParams::default() };
        let sim = Simulator::new(p).unwrap().with_coupling(BlockageCoupling::Shared);
        let a = sim.sample_scenario(5.0, 11);
        assert_eq!(a, sim.sample_scenario(5.0, 11));
        assert_ne!(a, sim.sample_scenario(5.0, 12));
        let beta_min = p.elevation_angle(sim.association_radius());
        for i in &a.interferers {
            assert!(i.position.norm() <= a.sim_radius);
            assert!(i.position != a.tagged_ap);
            assert!(i.beam_elevation >= beta_min - 1e-12 && i.beam_elevation <= FRAC_PI_2);
            assert!((0.0..TAU).contains(&i.beam_azimuth));
        }
        assert!(!a.blockers.is_empty());
    }

    #[test]
    fn dominant_only_never_below_full() {
        let sim = Simulator::new(SystemParams::default()).unwrap();
        for i in 0..300 {
            let [with, without] = sim.run_trial(7.0, &mut stream(3, i));
            assert!(with.dominant_only_covered >= with.full_covered);
            assert!(without.dominant_only_covered >= without.full_covered);
            assert!(with.n_active_interferers <= without.n_active_interferers);
            assert!(!without.tagged_blocked);
        }
    }

    #[test]
    fn fused_and_materialized_paths_agree_in_distribution() {
        let p = SystemParams { lambda_a: 0.05, ..SystemParams::default() };
        let sim = Simulator::new(p).unwrap();
        let n = 4000u64;
        let (mut fused, mut full) = (0usize, 0usize);
        let (mut fused_cov, mut full_cov) = (0u64, 0u64);
        for i in 0..n {
            let [f, _] = sim.run_trial(8.0, &mut stream(21, i));
            fused += f.n_active_interferers;
            fused_cov += f.full_covered as u64;
            let o = sim.evaluate(&sim.sample_scenario_with(8.0, &mut stream(22, i)), true);
            full += o.n_active_interferers;
            full_cov += o.full_covered as u64;
        }
        // Active counts are Poisson, so the variance equals the mean.
        let (a, b) = (fused as f64, full as f64);
        assert!((a - b).abs() < 4.0 * (a + b).sqrt(), "{a} vs {b}");
        let (pa, pb) = (fused_cov as f64 / n as f64, full_cov as f64 / n as f64);
        let sigma = (binomial_sigma(pa, n).powi(2) + binomial_sigma(pb, n).powi(2)).sqrt();
        assert!((pa - pb).abs() < 4.0 * sigma, "{pa} vs {pb}");
    }

    #[test]
    fn estimates_do_not_depend_on_thread_count() {
        let sim = Simulator::new(SystemParams::default()).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sim.estimate_modes(6.0, 600, &Mode::ALL, 5, false))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn los_conditioning_uses_unblocked_trials() {
        let sim = Simulator::new(SystemParams::default()).unwrap();
        let all = sim.estimate_modes(9.0, 2000, &[Mode::Full, Mode::InterferenceOnly], 9, false);
        let los = sim.estimate_modes(9.0, 2000, &[Mode::Full, Mode::InterferenceOnly], 9, true);
        assert!(los[0].n_trials < 2000);
        assert_eq!(los[1], all[1]);
        // Same hits, fewer trials.
        let hits = (all[0].value * 2000.0).round();
        assert!((los[0].value * los[0].n_trials as f64 - hits).abs() < 1e-6);
    }

    #[test]
    fn infeasible_parameters_give_zero_coverage() {
        let p = SystemParams { tau: 1e6, ..SystemParams::default() };
        let e = estimate_coverage(&p, 3.0, 1000, Mode::Full, 1).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.half_width_95, 0.0);
    }

    #[test]
    fn vertical_hit_estimate_edges() {
        let p = SystemParams {
            ap_pattern: crate::antenna::AntennaPattern::from_beamwidths(0.3, 0.2).unwrap(),
            ..SystemParams::default()
        };
        let sim = Simulator::new(p).unwrap();
        let model = crate::coverage::CoverageModel::new(p).unwrap();
        let (_, x_nu) = model.breakpoints();
        assert!(x_nu.is_finite());
        assert_eq!(sim.estimate_p_hit_vertical(x_nu + 1.0, 5000, 2).value, 0.0);
        let wide = SystemParams {
            ap_pattern: crate::antenna::AntennaPattern::from_beamwidths(1e-10, PI - 1e-9).unwrap(),
            ..p
        };
        let e = Simulator::new(wide).unwrap().estimate_p_hit_vertical(3.0, 5000, 2);
        assert_eq!(e.value, 1.0);
    }
}
