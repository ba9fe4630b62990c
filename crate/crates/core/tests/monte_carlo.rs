//! Statistical checks of the simulator against exact results.

use terascope::coverage::CoverageModel;
use terascope::sim::{binomial_sigma, estimate_p_hit_vertical};
use terascope::{los_probability, Mode, Simulator, SystemParams};

#[test]
fn interferer_count_is_poisson() {
    let p = SystemParams { lambda_a: 0.01, ..SystemParams::default() };
    let sim = Simulator::new(p).unwrap();
    let n = 10_000u64;
    let total: usize = (0..n).map(|s| sim.sample_scenario(5.0, s).interferers.len()).sum();
    let mean = p.lambda_a * std::f64::consts::PI * sim.sim_radius().powi(2);
    let observed = total as f64 / n as f64;
    // The sample mean of Poisson counts has variance mean/n.
    assert!((observed - mean).abs() < 3.0 * (mean / n as f64).sqrt(), "{observed} vs {mean}");
}

#[test]
fn vertical_hit_estimates_match_closed_form() {
    let p = SystemParams::default();
    let model = CoverageModel::new(p).unwrap();
    let n = 100_000;
    for (k, x) in [0.0, 1.0, 2.5, 5.0, 8.0, 15.0].into_iter().enumerate() {
        let e = estimate_p_hit_vertical(&p, x, n, 31 + k as u64).unwrap();
        let exact = model.p_hit_vertical(x);
        let sigma = binomial_sigma(exact, n).max(1e-12);
        assert!((e.value - exact).abs() <= 3.0 * sigma + 1e-12, "x = {x}: {} vs {exact}", e.value);
    }
}

#[test]
fn without_interferers_coverage_is_the_los_probability() {
    let p = SystemParams { lambda_a: 0.0, ..SystemParams::default() };
    let sim = Simulator::new(p).unwrap();
    let n = 40_000;
    for x0 in [2.0, 8.0] {
        let e = sim.estimate_modes(x0, n, &[Mode::Full, Mode::BlockageOnly, Mode::InterferenceOnly], 8, false);
        assert_eq!(e[0].value, e[1].value);
        assert_eq!(e[2].value, 1.0);
        let exact = los_probability(&p, x0);
        assert!((e[0].value - exact).abs() <= 3.0 * binomial_sigma(exact, n));
    }
}

#[test]
fn los_conditioned_dominant_estimate_matches_analytic() {
    let p = SystemParams::default();
    let sim = Simulator::new(p).unwrap();
    let model = CoverageModel::new(p).unwrap();
    let e = sim.estimate_modes(5.0, 40_000, &[Mode::DominantOnly], 12, true)[0];
    let exact = model.coverage(5.0).unwrap().p_cl;
    assert!((e.value - exact).abs() <= 3.0 * e.sigma(), "{} vs {exact}", e.value);
}

#[test]
fn links_beyond_the_association_radius_are_never_covered() {
    let p = SystemParams::default();
    let sim = Simulator::new(p).unwrap();
    let x0 = 1.05 * sim.association_radius();
    for e in sim.estimate_modes(x0, 2000, &Mode::ALL, 4, false) {
        assert_eq!(e.value, 0.0, "{:?}", e.mode);
    }
}
