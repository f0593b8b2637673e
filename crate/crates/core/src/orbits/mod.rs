//! Compact diagonal orbits: construction from modules in totally real fields,
//! exact stabilizer checks, grid sampling of the orbit measure and the
//! `λ₁` profile.

mod boxes;
mod polytope;

pub use boxes::{
    closing_search, glue_boxes, glue_boxes_with_grid, precedes, BoxedMap, ClosingData, GlueClosing, GlueReport,
};
pub use polytope::{ks_distance, min_co_cdf, min_coordinate, EmpiricalCdf, SimplexPolytope};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{ShapiraFieldData, SpecialFieldData};
use crate::error::{Error, Result};
use crate::exact::{QMat, ZMat};
use crate::lattice::{apply_diagonal, successive_minima, DiagonalVector, LatticePoint, Scale};
use crate::linalg::Mat;
use crate::measure::EmpiricalMeasure;
use crate::numfield::{FieldElement, NumberField, UnitLogLattice};
use crate::scalar::Real;

/// Cap on grid points per orbit sample.
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitProvenance {
    SpecialField,
    Shapira,
    Custom,
}

/// A point `x_Λ` with compact `A`-orbit together with a lattice of periods.
#[derive(Clone, Debug)]
pub struct CompactOrbit<T: Real> {
    pub base: LatticePoint<T>,
    pub field: NumberField,
    pub module_basis: QMat,
    pub units: Vec<FieldElement>,
    pub stabilizer: UnitLogLattice<T>,
    pub provenance: OrbitProvenance,
}

/// `σ(Λ)` normalized to covolume one, where the columns of `module_basis`
/// are power-basis coordinates of a `ℤ`-basis of `Λ`.
pub fn compact_orbit_point<T: Real>(field: &NumberField, module_basis: &QMat) -> Result<LatticePoint<T>> {
    let n = field.degree();
    if module_basis.nrows() != n || module_basis.ncols() != n {
        return Err(Error::DimensionMismatch { degree: n, found: module_basis.nrows() });
    }
    let det_q = module_basis.det();
    if det_q.is_zero() {
        return Err(Error::SingularModule);
    }
    // rows are embeddings, columns are powers of α
    let alpha = FieldElement::generator(n);
    let mut power = FieldElement::one(n);
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(n);
    for _ in 0..n {
        cols.push(field.embed_element(&power)?);
        power = field.mul(&power, &alpha);
    }
    let e = Mat::from_fn(n, n, |i, j| cols[j][i]);
    let det_e = e.det().abs();
    if !(det_e > T::zero()) {
        return Err(Error::SingularBasis);
    }
    let e = e.scale(det_e.powf(-T::one() / T::lit(n as f64)));
    let scale = Scale::new(det_q.abs().recip(), n as u32)?;
    LatticePoint::from_parts(e, module_basis.clone(), scale)
}

impl<T: Real> CompactOrbit<T> {
    pub fn new(
        field: NumberField,
        module_basis: QMat,
        units: Vec<FieldElement>,
        provenance: OrbitProvenance,
    ) -> Result<Self> {
        let base = compact_orbit_point(&field, &module_basis)?;
        let stabilizer = field.unit_log_lattice(&units)?;
        Ok(Self { base, field, module_basis, units, stabilizer, provenance })
    }

    /// Orbit of `ℤ[α]` with the squared units `(pα − aᵢ)²` as periods.
    pub fn from_special(d: &SpecialFieldData) -> Result<Self> {
        Self::new(d.field.clone(), QMat::identity(d.n), d.units.clone(), OrbitProvenance::SpecialField)
    }

    /// Orbit of `ℤ[α]` with the squared units `(aᵢ − α)²` as periods.
    pub fn from_shapira(d: &ShapiraFieldData) -> Result<Self> {
        Self::new(d.field.clone(), QMat::identity(d.n), d.units.clone(), OrbitProvenance::Shapira)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Exact check that `u` stabilizes the sublattice `x·H`.
    pub fn stabilizes(&self, u: &FieldElement, h: &ZMat) -> Result<bool> {
        verify_stabilizer_exact(self, u, h)
    }
}

/// Whether the diagonal element `σ(u)` maps the neighbor `x·H` of the base
/// point to itself: `(QH)⁻¹ M_u (QH)` is integral with determinant `±1`,
/// `Q` being the module basis.
pub fn verify_stabilizer_exact<T: Real>(orbit: &CompactOrbit<T>, u: &FieldElement, h: &ZMat) -> Result<bool> {
    let qh = orbit.module_basis.mul(&h.to_qmat());
    let inv = qh.inverse().ok_or(Error::SingularModule)?;
    let m = orbit.field.multiplication_matrix(u)?;
    let conj = inv.mul(&m).mul(&qh);
    Ok(conj.is_integral() && conj.det().abs() == BigRational::one())
}

/// `density^{n−1}` points `Σ (iⱼ/density + offsetⱼ) gⱼ` of a fundamental
/// parallelepiped of `Λ`, each coefficient reduced into `[−½, ½)`.
pub fn fundamental_sample<T: Real>(
    lattice: &UnitLogLattice<T>,
    density: usize,
    offset: Option<&[T]>,
) -> Result<Vec<DiagonalVector<T>>> {
    let r = lattice.rank();
    if r + 1 != lattice.ambient_dim() || r == 0 {
        return Err(Error::DegenerateSpan { rank: r, needed: lattice.ambient_dim() - 1 });
    }
    if density == 0 {
        return Err(Error::Config("density must be positive".into()));
    }
    let total = density.checked_pow(r as u32).filter(|&t| t <= MAX_GRID_POINTS).ok_or_else(|| {
        Error::BudgetExceeded(format!("{density}^{r} grid points exceed {MAX_GRID_POINTS}"))
    })?;
    let zero = vec![T::zero(); r];
    let offset = offset.unwrap_or(&zero);
    if offset.len() != r {
        return Err(Error::DimensionMismatch { degree: r, found: offset.len() });
    }
    let half = T::lit(0.5);
    let step = T::one() / T::lit(density as f64);
    Ok((0..total)
        .map(|idx| {
            let mut rest = idx;
            let coords: Vec<T> = (0..r)
                .map(|j| {
                    let i = rest % density;
                    rest /= density;
                    let c = T::lit(i as f64) * step + offset[j];
                    // exp(v)·x loses about e^{2|v|}·ε, so stay near the base point
                    c - (c + half).floor()
                })
                .collect();
            DiagonalVector::project(lattice.combine(&coords))
        })
        .collect())
}

/// One grid point of a `λ₁` profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub v_index: usize,
    pub lambda1: f64,
    pub normalized_log_lambda1: f64,
}

/// `(1/normalizer)·log λ₁(exp(v)x)` for every `v` in `sample`, in order.
pub fn profile_rows<T: Real>(
    x: &LatticePoint<T>,
    sample: &[DiagonalVector<T>],
    normalizer: f64,
) -> Result<Vec<ProfileRow>> {
    sample
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let l = successive_minima(&apply_diagonal(v, x), 1)?[0].to_f64_lossy();
            Ok(ProfileRow { v_index: i, lambda1: l, normalized_log_lambda1: l.ln() / normalizer })
        })
        .collect()
}

/// Empirical law of `(1/normalizer)·log λ₁` over the orbit.
pub fn lambda_profile<T: Real>(
    orbit: &CompactOrbit<T>,
    density: usize,
    normalizer: f64,
) -> Result<EmpiricalMeasure<f64>> {
    let sample = fundamental_sample(&orbit.stabilizer, density, None)?;
    let rows = profile_rows(&orbit.base, &sample, normalizer)?;
    Ok(EmpiricalMeasure::uniform(rows.into_iter().map(|r| r.normalized_log_lambda1).collect(), "log-lambda1"))
}

/// Mass fraction of samples with value `≤ threshold`.
pub fn escape_fraction(profile: &EmpiricalMeasure<f64>, threshold: f64) -> Result<BigRational> {
    if profile.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let total = profile.total_mass();
    let below = profile
        .samples()
        .iter()
        .filter(|(v, _)| *v <= threshold)
        .fold(BigRational::zero(), |acc, (_, w)| acc + w);
    Ok(below / total)
}
