use serde::Serialize;

use super::{charge, csv, fmt, Assertion, ExperimentConfig, ExperimentKind, ExperimentReport};
use crate::constructions::{shapira_field_with_nodes, shapira_nodes};
use crate::error::Result;
use crate::measure::EmpiricalMeasure;
use crate::orbits::{
    escape_fraction, fundamental_sample, ks_distance, min_co_cdf, profile_rows, CompactOrbit, EmpiricalCdf,
    ProfileRow,
};
use crate::scalar::rational_to_f64;

const CDF_GRID: usize = 500;

#[derive(Serialize)]
struct EscapeSummary {
    #[serde(rename = "M")]
    m: u64,
    n: usize,
    density: usize,
    grid_points: usize,
    total_mass: String,
    ks_distance: f64,
    #[serde(rename = "M_reference")]
    m_reference: Option<u64>,
    ks_distance_reference: Option<f64>,
    eta: f64,
    escape_fraction: String,
    escape_fraction_value: f64,
    oracle_escape_fraction: f64,
    profile_min: f64,
    oracle_min: f64,
    oracle_samples: usize,
}

struct Profile {
    rows: Vec<ProfileRow>,
    measure: EmpiricalMeasure<f64>,
    cdf: EmpiricalCdf,
}

fn profile(cfg: &ExperimentConfig, m: u64, used: &mut u64) -> Result<Profile> {
    let data = shapira_field_with_nodes(m, cfg.n, &shapira_nodes(m, cfg.n), cfg.precision_bits)?;
    let orbit = CompactOrbit::<f64>::from_shapira(&data)?;
    let sample = fundamental_sample(&orbit.stabilizer, cfg.density, None)?;
    charge(used, sample.len() as u64, cfg.budgets.evaluations)?;
    let rows = profile_rows(&orbit.base, &sample, (m as f64).ln())?;
    let values: Vec<f64> = rows.iter().map(|r| r.normalized_log_lambda1).collect();
    let cdf = EmpiricalCdf::from_samples(&values)?;
    Ok(Profile { rows, measure: EmpiricalMeasure::uniform(values, "normalized-log-lambda1"), cdf })
}

/// Normalized `log λ₁` profile of the Shapira orbit against the `min-co` law on `F_1`.
pub fn run_escape(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut used = 0;
    let oracle = min_co_cdf(&(0..cfg.n).collect::<Vec<_>>(), cfg.n, cfg.oracle_samples, cfg.seed)?;
    let main = profile(cfg, cfg.m, &mut used)?;
    let ks = ks_distance(&main.cdf, &oracle);
    let reference = match cfg.m_reference {
        Some(m) => Some(ks_distance(&profile(cfg, m, &mut used)?.cdf, &oracle)),
        None => None,
    };
    let frac = escape_fraction(&main.measure, -cfg.eta)?;
    let total = main.measure.total_mass();

    let lo = -((cfg.n - 1) as f64) / 2.0;
    let cdf_csv = csv(
        cfg.seed,
        &["t", "empirical_cdf", "oracle_cdf"],
        (0..=CDF_GRID).map(|k| {
            let t = lo - lo * k as f64 / CDF_GRID as f64;
            vec![fmt(t), fmt(main.cdf.eval(t)), fmt(oracle.eval(t))]
        }),
    );
    let profile_csv = csv(
        cfg.seed,
        &["v_index", "lambda1", "normalized_log_lambda1"],
        main.rows.iter().map(|r| vec![r.v_index.to_string(), fmt(r.lambda1), fmt(r.normalized_log_lambda1)]),
    );

    let mut assertions = vec![
        Assertion::new("total_mass_one", total == num_traits::One::one(), format!("total mass {total}")),
        Assertion::new("ks_within_tolerance", ks <= cfg.tolerances.ks_max, format!("{ks} <= {}", cfg.tolerances.ks_max)),
    ];
    if let (Some(r), Some(m)) = (reference, cfg.m_reference) {
        assertions.push(Assertion::new(
            "ks_improves_with_M",
            ks < r,
            format!("ks(M={}) = {ks} < ks(M={m}) = {r}", cfg.m),
        ));
    }
    let summary = EscapeSummary {
        m: cfg.m,
        n: cfg.n,
        density: cfg.density,
        grid_points: main.rows.len(),
        total_mass: total.to_string(),
        ks_distance: ks,
        m_reference: cfg.m_reference,
        ks_distance_reference: reference,
        eta: cfg.eta,
        escape_fraction: frac.to_string(),
        escape_fraction_value: rational_to_f64(&frac),
        oracle_escape_fraction: oracle.eval(-cfg.eta),
        profile_min: main.cdf.min(),
        oracle_min: oracle.min(),
        oracle_samples: cfg.oracle_samples,
    };
    Ok(ExperimentReport {
        experiment: ExperimentKind::Escape,
        seed: cfg.seed,
        files: vec![("escape.csv".into(), cdf_csv), ("escape_profile.csv".into(), profile_csv)],
        summary: serde_json::to_value(summary)?,
        assertions,
    })
}
