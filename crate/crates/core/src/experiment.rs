//! Sweep execution and CSV output.

use std::io::Write;

use rayon::prelude::*;

use crate::config::{format_float, parse_config, parse_config_with_seed, CurveMode, ExperimentSpec};
use crate::coverage::coverage;
use crate::error::{Error, Result};
use crate::sim::{Mode, Simulator};

pub const TOOL_VERSION: &str = concat!("terascope ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub tool_version: &'static str,
    pub base_seed: u64,
    /// Taken from `SOURCE_DATE_EPOCH` when set; never from the clock, so
    /// that reruns are byte-identical.
    pub timestamp: Option<String>,
}

impl Provenance {
    pub fn new(base_seed: u64) -> Self {
        Self {
            tool_version: TOOL_VERSION,
            base_seed,
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub abscissa: f64,
    /// One value per requested mode, in order.
    pub values: Vec<f64>,
    /// Zero for analytic modes.
    pub half_widths: Vec<f64>,
    /// No association radius exists or the tagged SNR is below threshold.
    pub infeasible: bool,
    pub outside_association: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    pub spec: ExperimentSpec,
    pub rows: Vec<CurveRow>,
    pub provenance: Provenance,
}

impl CoverageCurve {
    /// Values of one mode across the sweep.
    pub fn series(&self, mode: CurveMode) -> Option<Vec<f64>> {
        let k = self.spec.modes.iter().position(|m| *m == mode)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn half_widths(&self, mode: CurveMode) -> Option<Vec<f64>> {
        let k = self.spec.modes.iter().position(|m| *m == mode)?;
        Some(self.rows.iter().map(|r| r.half_widths[k]).collect())
    }

    pub fn abscissae(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.abscissa).collect()
    }
}

/// Evaluates every mode at every sweep value. Monte Carlo modes at one
/// sweep value share their trials, and every sweep value reuses the same
/// base seed.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<CoverageCurve> {
    spec.validate()?;
    let mc: Vec<Mode> = spec
        .modes
        .iter()
        .filter_map(|m| match m {
            CurveMode::Mc(mode) => Some(*mode),
            CurveMode::Analytic => None,
        })
        .collect();
    let rows = spec
        .sweep
        .values
        .par_iter()
        .map(|&v| run_point(spec, &mc, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageCurve {
        spec: spec.clone(),
        rows,
        provenance: Provenance::new(spec.base_seed),
    })
}

fn run_point(spec: &ExperimentSpec, mc: &[Mode], value: f64) -> Result<CurveRow> {
    let (config, x0) = spec.point(value);
    let params = config.to_system_params()?;
    let analytic = coverage(&params, x0)?;
    let estimates = if mc.is_empty() {
        Vec::new()
    } else {
        match Simulator::new(params) {
            Ok(sim) => sim
                .with_coupling(spec.blockage_field)
                .estimate_modes(x0, spec.n_trials, mc, spec.base_seed, spec.los_conditioned),
            // Without an association radius nothing is ever covered.
            Err(Error::InfeasibleGeometry(_)) => mc
                .iter()
                .map(|&m| crate::sim::Estimate::from_counts(0, spec.n_trials, spec.base_seed, m))
                .collect(),
            Err(e) => return Err(e),
        }
    };

    let mut values = Vec::with_capacity(spec.modes.len());
    let mut half_widths = Vec::with_capacity(spec.modes.len());
    let mut next_mc = estimates.iter();
    for mode in &spec.modes {
        match mode {
            CurveMode::Analytic => {
                values.push(if spec.los_conditioned { analytic.p_cl } else { analytic.p_c });
                half_widths.push(0.0);
            }
            CurveMode::Mc(_) => {
                let e = next_mc.next().expect("one estimate per mc mode");
                values.push(e.value);
                half_widths.push(e.half_width_95);
            }
        }
    }
    Ok(CurveRow {
        abscissa: value,
        values,
        half_widths,
        infeasible: analytic.snr_infeasible,
        outside_association: analytic.outside_association,
    })
}

/// Writes the curve as CSV and returns the number of bytes written.
///
/// The `#` preamble holds the resolved experiment; stripping the leading `# `
/// from each preamble line gives a config that parses back to it.
pub fn emit_csv<W: Write + ?Sized>(curve: &CoverageCurve, out: &mut W) -> Result<usize> {
    let mut buf = Vec::new();
    let p = &curve.provenance;
    writeln!(buf, "# # {}", p.tool_version)?;
    writeln!(buf, "# # base_seed {}", p.base_seed)?;
    if let Some(ts) = &p.timestamp {
        writeln!(buf, "# # timestamp {ts}")?;
    }
    for line in curve.spec.to_toml().lines() {
        writeln!(buf, "# {line}")?;
    }

    let mut header = vec![curve.spec.sweep.variable.as_str().to_owned()];
    for m in &curve.spec.modes {
        header.push(format!("{m}_p"));
        header.push(format!("{m}_hw"));
    }
    header.push("infeasible".into());
    header.push("outside_rt".into());
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&header)?;
        for row in &curve.rows {
            let mut record = vec![format_float(row.abscissa)];
            for (v, hw) in row.values.iter().zip(&row.half_widths) {
                record.push(format_float(*v));
                record.push(format_float(*hw));
            }
            record.push(u8::from(row.infeasible).to_string());
            record.push(u8::from(row.outside_association).to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
    }
    out.write_all(&buf)?;
    Ok(buf.len())
}

/// Recovers the experiment from a CSV preamble written by [`emit_csv`].
pub fn spec_from_csv(text: &str) -> Result<ExperimentSpec> {
    let config: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.strip_prefix("# ").unwrap_or(&l[1..])))
        .collect();
    let mut specs = parse_config(&config)?;
    match specs.len() {
        1 => Ok(specs.remove(0)),
        n => Err(Error::Parse(format!("preamble holds {n} experiments, expected 1"))),
    }
}

pub const PRESETS: [&str; 3] = ["fig5", "fig6", "fig7"];

/// Source of a built-in experiment config.
pub fn preset_source(name: &str) -> Option<&'static str> {
    match name {
        "fig5" => Some(include_str!("../configs/fig5.toml")),
        "fig6" => Some(include_str!("../configs/fig6.toml")),
        "fig7" => Some(include_str!("../configs/fig7.toml")),
        _ => None,
    }
}

/// Built-in experiments: coverage versus link distance (`fig5`), LOS
/// coverage versus threshold for two AP and two blocker densities
/// (`fig6`), and three AP/UE gain splits with equal total gain (`fig7`).
pub fn preset(name: &str, default_seed: u64) -> Result<Vec<ExperimentSpec>> {
    let src = preset_source(name).ok_or_else(|| {
        Error::Parse(format!("unknown preset `{name}` (expected one of {})", PRESETS.join(", ")))
    })?;
    parse_config_with_seed(src, default_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepVariable;

    fn small() -> ExperimentSpec {
        let mut specs = parse_config(
            r#"
            [small]
            sweep = "x0"
            values = [1.0, 4.0, 9.0, 12.0]
            modes = ["analytic", "mc-full", "mc-blockage-only"]
            n_trials = 1000
            base_seed = 3
            "#,
        )
        .unwrap();
        specs.remove(0)
    }

    #[test]
    fn rows_follow_the_sweep() {
        let spec = small();
        let curve = run_experiment(&spec).unwrap();
        assert_eq!(curve.rows.len(), 4);
        assert_eq!(curve.abscissae(), spec.sweep.values);
        assert!(curve.half_widths(CurveMode::Analytic).unwrap().iter().all(|&h| h == 0.0));
        let last = &curve.rows[3];
        assert!(last.outside_association && last.infeasible);
        assert_eq!(last.values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn csv_is_deterministic_and_round_trips() {
        let spec = small();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let n = emit_csv(&run_experiment(&spec).unwrap(), &mut a).unwrap();
        emit_csv(&run_experiment(&spec).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(n, a.len());
        let text = String::from_utf8(a).unwrap();
        assert_eq!(spec_from_csv(&text).unwrap(), spec);
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 1 + spec.sweep.values.len());
        assert_eq!(
            data[0],
            "x0,analytic_p,analytic_hw,mc-full_p,mc-full_hw,mc-blockage-only_p,mc-blockage-only_hw,infeasible,outside_rt"
        );
    }

    #[test]
    fn analytic_only_curve_has_no_mc_columns() {
        let mut spec = small();
        spec.modes = vec![CurveMode::Analytic];
        let mut out = Vec::new();
        emit_csv(&run_experiment(&spec).unwrap(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(!text.contains("mc-"));
    }

    #[test]
    fn presets_parse() {
        let fig5 = preset("fig5", 1).unwrap();
        assert_eq!(fig5.len(), 1);
        assert_eq!(fig5[0].sweep.variable, SweepVariable::X0);
        assert_eq!(fig5[0].sweep.values.first(), Some(&0.5));
        assert_eq!(fig5[0].sweep.values.last(), Some(&9.5));
        let fig6 = preset("fig6", 1).unwrap();
        assert_eq!(fig6.len(), 4);
        assert!(fig6.iter().all(|s| s.los_conditioned && s.x0 == 5.0));
        let fig7 = preset("fig7", 1).unwrap();
        assert_eq!(fig7.len(), 3);
        for s in &fig7 {
            let total = s.params.tx_power_dbm + s.params.ap_gain_dbi + s.params.ue_gain_dbi;
            assert_eq!(total, 50.0);
        }
        assert!(preset("fig8", 1).is_err());
    }
}
