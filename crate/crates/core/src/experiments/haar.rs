use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{charge, csv, fmt, siegel_calibration, Assertion, ExperimentConfig, ExperimentKind, ExperimentReport, SiegelRow};
use crate::constructions::{shapira_field_with_nodes, shapira_nodes};
use crate::error::{Error, Result};
use crate::hecke::{enumerate_neighbors_with_budget, hecke_count, next_prime_above, HeckeType};
use crate::lattice::{apply_diagonal, count_points_in_ball_with_budget, successive_minima_with_budget};
use crate::orbits::{fundamental_sample, min_co_cdf, profile_rows, CompactOrbit};
use crate::scalar::rational_to_f64;

/// Largest `M^{nη}` for which the next prime is searched.
const PRIME_SEARCH_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
    Middle,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
            Side::Middle => "middle",
        }
    }
}

/// Two-step neighbor statistics of one orbit sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HaarSampleRow {
    pub sample_id: usize,
    pub side: Side,
    pub lambda1_before: f64,
    pub neighbors: usize,
    /// Neighbors with `λ₁ > eps_cusp`.
    pub outside_cusp: usize,
    /// Neighbors with `λ₁ > ε`.
    pub outside_eps: usize,
    pub mean_counts: Vec<f64>,
}

#[derive(Serialize)]
struct HaarSummary {
    #[serde(rename = "M")]
    m: u64,
    n: usize,
    c: f64,
    eta: f64,
    epsilon: f64,
    p: u64,
    q: u64,
    density: usize,
    grid_points: usize,
    minus_mass: String,
    minus_mass_value: f64,
    plus_mass: String,
    plus_mass_value: f64,
    nu0_total_mass: String,
    minus_neighbor_fraction_outside_cusp: f64,
    minus_neighbor_fraction_outside_eps: f64,
    eps_cusp: f64,
    plus_siegel: Vec<SiegelRow>,
    calibration: Vec<SiegelRow>,
    haar_samples: usize,
    word_length: usize,
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den.max(1)))
}

/// `ν₀ = T_{a_q} T_{a_p} μ` on the Shapira orbit, split into `(Ax)⁻` and `(Ax)⁺`.
pub fn run_haar_pipeline(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let n = cfg.n;
    if !(2..=3).contains(&n) {
        return Err(Error::Config("the pipeline supports n ∈ {2, 3}".into()));
    }
    let m = cfg.m as f64;
    let log_m = m.ln();
    let oracle = min_co_cdf(&(0..n).collect::<Vec<_>>(), n, cfg.oracle_samples, cfg.seed)?;
    let eta = -oracle.quantile(1.0 - cfg.c);
    let target = m.powf(n as f64 * eta);
    if !(target < PRIME_SEARCH_LIMIT) {
        return Err(Error::PrimeLadderExhausted(target));
    }
    let p = next_prime_above(target);
    let q = next_prime_above(log_m);
    let eps = cfg.epsilon();
    let tp = HeckeType::cyclic_dual(p, n, 1)?;
    let tq = HeckeType::cyclic_dual(q, n, 1)?;
    let fan_out = hecke_count(&tp).saturating_mul(hecke_count(&tq));

    let data = shapira_field_with_nodes(cfg.m, n, &shapira_nodes(cfg.m, n), cfg.precision_bits)?;
    let orbit = CompactOrbit::<f64>::from_shapira(&data)?;
    let sample = fundamental_sample(&orbit.stabilizer, cfg.density, None)?;
    let mut used = 0;
    charge(&mut used, sample.len() as u64, cfg.budgets.evaluations)?;
    let rows = profile_rows(&orbit.base, &sample, log_m)?;
    let side = |v: f64| {
        if v <= -(1.0 + eps) * eta {
            Side::Minus
        } else if v >= -(1.0 - eps) * eta {
            Side::Plus
        } else {
            Side::Middle
        }
    };
    let sides: Vec<Side> = rows.iter().map(|r| side(r.normalized_log_lambda1)).collect();
    let active = sides.iter().filter(|s| **s != Side::Middle).count() as u64;
    charge(&mut used, active.saturating_mul(fan_out.min(u64::MAX as u128) as u64), cfg.budgets.evaluations)?;

    let b = &cfg.budgets;
    let stats: Vec<Option<(HaarSampleRow, BigRational)>> = rows
        .par_iter()
        .zip(&sides)
        .map(|(row, &s)| {
            if s == Side::Middle {
                return Ok(None);
            }
            let x = apply_diagonal(&sample[row.v_index], &orbit.base);
            let first = enumerate_neighbors_with_budget(&x, &tp, b.neighbors.into())?;
            let mut mass = BigRational::zero();
            let (mut total, mut cusp, mut out_eps) = (0usize, 0usize, 0usize);
            let mut sums = vec![0u64; cfg.radii.len()];
            for y in first.points() {
                let second = enumerate_neighbors_with_budget(y, &tq, b.neighbors.into())?;
                let w = first.weight() * second.weight();
                for z in second.points() {
                    mass += &w;
                    total += 1;
                    let l = successive_minima_with_budget(z, 1, b.enumeration)?[0];
                    cusp += usize::from(l > cfg.eps_cusp);
                    out_eps += usize::from(l > eps);
                    for (k, &r) in cfg.radii.iter().enumerate() {
                        sums[k] += count_points_in_ball_with_budget(z, r, b.enumeration)?;
                    }
                }
            }
            Ok(Some((
                HaarSampleRow {
                    sample_id: row.v_index,
                    side: s,
                    lambda1_before: row.lambda1,
                    neighbors: total,
                    outside_cusp: cusp,
                    outside_eps: out_eps,
                    mean_counts: sums.iter().map(|&c| c as f64 / total as f64).collect(),
                },
                mass,
            )))
        })
        .collect::<Result<_>>()?;

    // middle samples are not expanded; their neighbors carry the full sample weight
    let grid = rows.len();
    let sample_weight = ratio(1, grid);
    let mut nu0_mass = BigRational::zero();
    for st in &stats {
        nu0_mass += match st {
            Some((_, mass)) => mass * &sample_weight,
            None => sample_weight.clone(),
        };
    }
    let kept: Vec<&HaarSampleRow> = stats.iter().flatten().map(|(r, _)| r).collect();
    let of_side = |s: Side| kept.iter().copied().filter(move |r| r.side == s);
    let minus_mass = ratio(of_side(Side::Minus).count(), grid);
    let plus_mass = ratio(of_side(Side::Plus).count(), grid);
    let minus_total: usize = of_side(Side::Minus).map(|r| r.neighbors).sum();
    let frac = |f: fn(&HaarSampleRow) -> usize| {
        of_side(Side::Minus).map(f).sum::<usize>() as f64 / minus_total.max(1) as f64
    };
    let outside_cusp = frac(|r| r.outside_cusp);
    let outside_eps = frac(|r| r.outside_eps);
    let plus_count = of_side(Side::Plus).count();
    let plus_siegel: Vec<SiegelRow> = cfg
        .radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            // every plus sample has the same number of neighbors, so the plain mean is the ν₀ average
            let mean = of_side(Side::Plus).map(|row| row.mean_counts[k]).sum::<f64>() / plus_count.max(1) as f64;
            let expected = (2.0 * r).powi(n as i32);
            SiegelRow { r, mean_count: mean, expected, relative_error: (mean - expected).abs() / expected }
        })
        .collect();
    let calibration = siegel_calibration(n, cfg.haar_samples, cfg.word_length, &cfg.radii, cfg.seed, b.enumeration)?;

    let tol = &cfg.tolerances;
    let minus_value = rational_to_f64(&minus_mass);
    let mut assertions = vec![
        Assertion::new(
            "minus_mass",
            (minus_value - (1.0 - cfg.c)).abs() <= tol.minus_mass,
            format!("(Ax)- mass {minus_value} vs 1 - c = {} ± {}", 1.0 - cfg.c, tol.minus_mass),
        ),
        Assertion::new(
            "minus_neighbors_stay_in_cusp",
            minus_total == 0 || outside_cusp == 0.0,
            format!("fraction {outside_cusp} of {minus_total} two-step neighbors have lambda1 > {}", cfg.eps_cusp),
        ),
        Assertion::new("nu0_mass_one", nu0_mass.is_one(), format!("total mass {nu0_mass}")),
    ];
    for row in &plus_siegel {
        assertions.push(Assertion::new(
            &format!("plus_siegel_r{}", row.r),
            plus_count > 0 && row.relative_error <= tol.siegel_relative,
            format!("mean {} vs {} over {plus_count} samples", row.mean_count, row.expected),
        ));
    }
    assertions.push(Assertion::new(
        "sampler_calibration",
        calibration.iter().all(|r| r.relative_error <= 0.1),
        format!("{:?}", calibration.iter().map(|r| (r.r, r.mean_count)).collect::<Vec<_>>()),
    ));

    let table = csv(
        cfg.seed,
        &["sample_id", "side", "lambda1_before", "r", "mean_count_r", "expected_count_r"],
        kept.iter().flat_map(|row| {
            cfg.radii.iter().enumerate().map(move |(k, &r)| {
                vec![
                    row.sample_id.to_string(),
                    row.side.name().into(),
                    fmt(row.lambda1_before),
                    fmt(r),
                    fmt(row.mean_counts[k]),
                    fmt((2.0 * r).powi(n as i32)),
                ]
            })
        }),
    );
    let summary = HaarSummary {
        m: cfg.m,
        n,
        c: cfg.c,
        eta,
        epsilon: eps,
        p,
        q,
        density: cfg.density,
        grid_points: grid,
        minus_mass: minus_mass.to_string(),
        minus_mass_value: minus_value,
        plus_mass: plus_mass.to_string(),
        plus_mass_value: rational_to_f64(&plus_mass),
        nu0_total_mass: nu0_mass.to_string(),
        minus_neighbor_fraction_outside_cusp: outside_cusp,
        minus_neighbor_fraction_outside_eps: outside_eps,
        eps_cusp: cfg.eps_cusp,
        plus_siegel,
        calibration,
        haar_samples: cfg.haar_samples,
        word_length: cfg.word_length,
    };
    Ok(ExperimentReport {
        experiment: ExperimentKind::Haar,
        seed: cfg.seed,
        files: vec![("haar.csv".into(), table)],
        summary: serde_json::to_value(summary)?,
        assertions,
    })
}
