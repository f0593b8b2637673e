use serde::Serialize;

use super::{charge, csv, fmt, Assertion, ExperimentConfig, ExperimentKind, ExperimentReport};
use crate::constructions::{special_field_with, SpecialOptions};
use crate::error::{Error, Result};
use crate::hecke::{hecke_count, nearest_neighbor, operator_norm_bound, HeckeType};
use crate::lattice::{apply_diagonal, make_point, DiagonalVector, LatticePoint};
use crate::linalg::Mat;
use crate::orbits::{fundamental_sample, profile_rows, CompactOrbit};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxRow {
    pub p: u64,
    pub min_distance: f64,
    pub certified: bool,
    /// `‖T_a‖^{1/(n²−1)}`.
    pub operator_norm_root: f64,
    pub stabilizer_pass: bool,
    pub representative_lambda1: f64,
}

#[derive(Serialize)]
struct ApproxSummary {
    n: usize,
    primes: Vec<u64>,
    hecke_exps: Vec<u32>,
    fitted_c: f64,
    inversions: usize,
    density: usize,
    search_bound: u32,
    target: Vec<Vec<f64>>,
    rows: Vec<ApproxRow>,
}

/// The grid point of the orbit with the largest `λ₁`, and its translate of the base point.
pub fn compact_representative(
    orbit: &CompactOrbit<f64>,
    density: usize,
) -> Result<(DiagonalVector<f64>, LatticePoint<f64>, f64)> {
    let sample = fundamental_sample(&orbit.stabilizer, density, None)?;
    let rows = profile_rows(&orbit.base, &sample, 1.0)?;
    let best = rows
        .iter()
        .fold(None::<&crate::orbits::ProfileRow>, |b, r| match b {
            Some(b) if b.lambda1 >= r.lambda1 => Some(b),
            _ => Some(r),
        })
        .ok_or(Error::EmptyMeasure)?;
    let v = sample[best.v_index].clone();
    let x = apply_diagonal(&v, &orbit.base);
    Ok((v, x, best.lambda1))
}

fn default_target(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| match (i as i64) - (j as i64) {
        0 => 1.0,
        -1 => 0.37,
        1 => 0.21,
        _ => 0.0,
    })
}

/// Nearest type `(0^{⌊n/2⌋}, 1^{⌈n/2⌉})` neighbor of a special-field orbit
/// point to a fixed target, for every prime of the ladder.
pub fn run_fast_approx(cfg: &ExperimentConfig, target: Option<&LatticePoint<f64>>) -> Result<ExperimentReport> {
    cfg.validate()?;
    let n = cfg.n;
    let y = match (target, &cfg.target) {
        (Some(y), _) => y.clone(),
        (None, Some(cols)) => {
            if cols.len() != n || cols.iter().any(|c| c.len() != n) {
                return Err(Error::Config(format!("target must be {n} columns of length {n}")));
            }
            make_point(&Mat::from_fn(n, n, |i, j| cols[j][i]))?
        }
        (None, None) => make_point(&default_target(n))?,
    };
    if y.dim() != n {
        return Err(Error::DimensionMismatch { degree: n, found: y.dim() });
    }
    let exps: Vec<u32> = (0..n).map(|i| u32::from(i >= n / 2)).collect();
    let width = 2 * u64::from(cfg.search_bound) + 1;
    let mut used = 0;
    let mut rows = Vec::with_capacity(cfg.primes.len());
    for &p in &cfg.primes {
        let data = special_field_with(p, n, SpecialOptions { precision_bits: cfg.precision_bits, ..Default::default() })?;
        let orbit = CompactOrbit::<f64>::from_special(&data)?;
        let (_, x, l1) = compact_representative(&orbit, cfg.density)?;
        let t = HeckeType::new(p, exps.clone())?;
        let count = hecke_count(&t);
        if count > u128::from(cfg.budgets.neighbors) {
            return Err(Error::NeighborBudgetExceeded { needed: count, budget: cfg.budgets.neighbors.into() });
        }
        charge(&mut used, (count as u64).saturating_mul(width.saturating_pow((n * n) as u32)), cfg.budgets.evaluations)?;
        let (_, dist, certified, h) = nearest_neighbor(&x, &y, &t, cfg.search_bound)?;
        let mut stabilizer_pass = true;
        for u in &data.units {
            stabilizer_pass &= orbit.stabilizes(u, &h)?;
        }
        rows.push(ApproxRow {
            p,
            min_distance: dist,
            certified,
            operator_norm_root: operator_norm_bound(&t).powf(1.0 / (n * n - 1) as f64),
            stabilizer_pass,
            representative_lambda1: l1,
        });
    }
    let fitted_c = rows.iter().map(|r| r.min_distance / r.operator_norm_root).fold(0.0, f64::max);
    let inversions = rows.windows(2).filter(|w| w[1].min_distance > w[0].min_distance).count();

    let table = csv(
        cfg.seed,
        &["p", "min_distance", "norm_bound", "stabilizer_pass", "certified"],
        rows.iter().map(|r| {
            vec![
                r.p.to_string(),
                fmt(r.min_distance),
                fmt(fitted_c * r.operator_norm_root),
                r.stabilizer_pass.to_string(),
                r.certified.to_string(),
            ]
        }),
    );
    let assertions = vec![
        Assertion::new(
            "stabilizer_exact",
            rows.iter().all(|r| r.stabilizer_pass),
            format!("{} of {} rows pass", rows.iter().filter(|r| r.stabilizer_pass).count(), rows.len()),
        ),
        Assertion::new(
            "distance_trend",
            inversions <= cfg.tolerances.max_inversions,
            format!(
                "{inversions} inversions in {:?}",
                rows.iter().map(|r| r.min_distance).collect::<Vec<_>>()
            ),
        ),
    ];
    let summary = ApproxSummary {
        n,
        primes: cfg.primes.clone(),
        hecke_exps: exps,
        fitted_c,
        inversions,
        density: cfg.density,
        search_bound: cfg.search_bound,
        target: y.basis().transpose().to_rows(),
        rows,
    };
    Ok(ExperimentReport {
        experiment: ExperimentKind::Approx,
        seed: cfg.seed,
        files: vec![("approx.csv".into(), table)],
        summary: serde_json::to_value(summary)?,
        assertions,
    })
}
