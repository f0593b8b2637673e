//! `p`-Hecke neighbors: index-`p^s` sublattices with prescribed elementary
//! divisors, rescaled back to covolume one.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ZMat;
use crate::lattice::{lattice_distance, LatticePoint, Scale};
use crate::measure::EmpiricalMeasure;
use crate::scalar::Real;

/// Default cap on the number of neighbors per call.
pub const DEFAULT_NEIGHBOR_BUDGET: u128 = 1_000_000;
/// Cap on two-step pairs in [`verify_composition`].
pub const COMPOSITION_PAIR_BUDGET: u128 = 100_000_000;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// First prime strictly above `x`.
pub fn next_prime_above(x: f64) -> u64 {
    let mut p = if x < 2.0 { 2 } else { x.floor() as u64 + 1 };
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// Exponents `k₁ ≤ … ≤ kₙ` of the quotient `x/x' ≅ ⊕ ℤ/p^{kᵢ}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HeckeType {
    p: u64,
    exps: Vec<u32>,
}

impl HeckeType {
    pub fn new(p: u64, exps: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if exps.is_empty() || exps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::BadHeckeType);
        }
        Ok(Self { p, exps })
    }

    /// Type `(0,…,0,1)`: the index-`p` sublattices.
    pub fn elementary(p: u64, n: usize) -> Result<Self> {
        let mut e = vec![0; n];
        e[n - 1] = 1;
        Self::new(p, e)
    }

    /// Type `(0,k,…,k)`, the normalization of `(−k,0,…,0)`.
    pub fn cyclic_dual(p: u64, n: usize, k: u32) -> Result<Self> {
        let mut e = vec![k; n];
        e[0] = 0;
        Self::new(p, e)
    }

    /// Type `(0^{⌊n/2⌋}, 1^{⌈n/2⌉})`.
    pub fn half(p: u64, n: usize) -> Result<Self> {
        Self::new(p, (0..n).map(|i| u32::from(i >= n / 2)).collect())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn n(&self) -> usize {
        self.exps.len()
    }

    pub fn s(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// Type of the quotient `ℤⁿ/Hℤⁿ`, if it is a `p`-group.
    pub fn of_matrix(p: u64, h: &ZMat) -> Option<Self> {
        let pb = BigInt::from(p);
        let mut exps = Vec::with_capacity(h.nrows());
        for d in h.elementary_divisors() {
            if d.is_zero() {
                return None;
            }
            let mut d = d;
            let mut e = 0;
            while (&d % &pb).is_zero() {
                d /= &pb;
                e += 1;
            }
            if !d.is_one() {
                return None;
            }
            exps.push(e);
        }
        Some(Self { p, exps })
    }

    /// Subtracts `k₁` from every exponent.
    pub fn normalized(&self) -> Self {
        let m = self.exps[0];
        Self { p: self.p, exps: self.exps.iter().map(|e| e - m).collect() }
    }
}

/// Number of sublattices of `ℤⁿ` with quotient of the given type.
pub fn hecke_count(t: &HeckeType) -> u128 {
    let n = t.n();
    let p = BigInt::from(t.p);
    let mut lambda: Vec<u32> = t.exps.iter().copied().filter(|&e| e > 0).collect();
    lambda.sort_unstable_by(|a, b| b.cmp(a));
    let top = lambda.first().copied().unwrap_or(0);
    // conjugate partition, padded with a trailing zero
    let conj: Vec<usize> = (1..=top + 1).map(|j| lambda.iter().filter(|&&l| l >= j).count()).collect();
    let mut total = BigInt::one();
    for j in 0..top as usize {
        let (a, b) = (conj[j], conj[j + 1]);
        total *= num_traits::pow(p.clone(), b * (n - a));
        total *= gaussian_binomial(&p, n - b, a - b);
    }
    total.to_u128().unwrap_or(u128::MAX)
}

fn gaussian_binomial(p: &BigInt, n: usize, k: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= num_traits::pow(p.clone(), n - i) - 1;
        den *= num_traits::pow(p.clone(), i + 1) - 1;
    }
    num / den
}

fn hnf_cache() -> &'static Mutex<HashMap<HeckeType, Arc<Vec<ZMat>>>> {
    static CACHE: OnceLock<Mutex<HashMap<HeckeType, Arc<Vec<ZMat>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Canonical column-HNF matrices `H` with `ℤⁿ/Hℤⁿ` of type `t`, in a fixed order.
pub fn neighbor_matrices(t: &HeckeType, budget: u128) -> Result<Arc<Vec<ZMat>>> {
    let needed = hecke_count(t);
    if needed > budget {
        return Err(Error::NeighborBudgetExceeded { needed, budget });
    }
    if let Some(hs) = hnf_cache().lock().expect("cache poisoned").get(t) {
        return Ok(hs.clone());
    }
    let hs = Arc::new(enumerate_hnfs(t));
    debug_assert_eq!(hs.len() as u128, needed);
    hnf_cache().lock().expect("cache poisoned").insert(t.clone(), hs.clone());
    Ok(hs)
}

fn enumerate_hnfs(t: &HeckeType) -> Vec<ZMat> {
    let n = t.n();
    let base = t.exps[0];
    let reduced = t.normalized();
    let top = *reduced.exps.last().unwrap_or(&0);
    let s = reduced.s();
    let p = t.p as i64;
    let scalar = p.pow(base);
    let mut out = Vec::new();
    let mut diag = vec![0u32; n];

    fn compositions(i: usize, left: u32, top: u32, diag: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if i + 1 == diag.len() {
            if left <= top {
                diag[i] = left;
                f(diag);
            }
            return;
        }
        for e in 0..=left.min(top) {
            diag[i] = e;
            compositions(i + 1, left - e, top, diag, f);
        }
    }

    compositions(0, s, top, &mut diag, &mut |d| {
        let dvals: Vec<i64> = d.iter().map(|&e| p.pow(e)).collect();
        let free: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut vals = vec![0i64; free.len()];
        loop {
            let mut rows = vec![vec![0i64; n]; n];
            for i in 0..n {
                rows[i][i] = dvals[i];
            }
            for (&(i, j), &v) in free.iter().zip(&vals) {
                rows[i][j] = v;
            }
            let h = ZMat::from_rows(&rows);
            if HeckeType::of_matrix(t.p, &h).as_ref() == Some(&reduced) {
                let scaled: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|x| x * scalar).collect()).collect();
                out.push(ZMat::from_rows(&scaled));
            }
            // odometer over the free entries
            let mut k = 0;
            loop {
                if k == free.len() {
                    return;
                }
                vals[k] += 1;
                if vals[k] < dvals[free[k].0] {
                    break;
                }
                vals[k] = 0;
                k += 1;
            }
        }
    });
    out
}

/// The neighbors of a point, each with its defining matrix.
#[derive(Clone, Debug)]
pub struct NeighborSet<T: Real> {
    pub base: LatticePoint<T>,
    pub hecke: HeckeType,
    pub entries: Vec<(ZMat, LatticePoint<T>)>,
}

impl<T: Real> NeighborSet<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Uniform weight `1/count`.
    pub fn weight(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.entries.len()))
    }

    pub fn points(&self) -> impl Iterator<Item = &LatticePoint<T>> {
        self.entries.iter().map(|(_, x)| x)
    }
}

pub fn enumerate_neighbors<T: Real>(x: &LatticePoint<T>, t: &HeckeType) -> Result<NeighborSet<T>> {
    enumerate_neighbors_with_budget(x, t, DEFAULT_NEIGHBOR_BUDGET)
}

pub fn enumerate_neighbors_with_budget<T: Real>(
    x: &LatticePoint<T>,
    t: &HeckeType,
    budget: u128,
) -> Result<NeighborSet<T>> {
    if t.n() != x.dim() {
        return Err(Error::DimensionMismatch { degree: x.dim(), found: t.n() });
    }
    let hs = neighbor_matrices(t, budget)?;
    let scale = Scale::prime_power(t.p, t.s(), t.n() as u32);
    let entries = hs
        .iter()
        .map(|h| Ok((h.clone(), x.sublattice(h, &scale)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NeighborSet { base: x.clone(), hecke: t.clone(), entries })
}

/// `∏_{i ≤ n/2} p^{−gᵢ/2}·(gᵢ(p−1) + (p+1))/(p+1)` with `gᵢ = k_{n+1−i} − kᵢ`.
pub fn operator_norm_bound(t: &HeckeType) -> f64 {
    let n = t.n();
    let p = t.p as f64;
    (0..n / 2)
        .map(|i| {
            let g = f64::from(t.exps[n - 1 - i] - t.exps[i]);
            p.powf(-g / 2.0) * (g * (p - 1.0) + (p + 1.0)) / (p + 1.0)
        })
        .product()
}

/// `T_a μ`: every atom is replaced by the uniform measure on its neighbors.
pub fn push_measure<T: Real>(
    mu: &EmpiricalMeasure<LatticePoint<T>>,
    t: &HeckeType,
) -> Result<EmpiricalMeasure<LatticePoint<T>>> {
    let mut out = EmpiricalMeasure::new(mu.domain());
    for (x, w) in mu.samples() {
        let nb = enumerate_neighbors(x, t)?;
        let wn = w * nb.weight();
        for (_, y) in nb.entries {
            out.push(y, wn.clone());
        }
    }
    Ok(out)
}

/// The neighbor closest to `y`, with its distance bound and certification flag.
pub fn nearest_neighbor<T: Real>(
    x: &LatticePoint<T>,
    y: &LatticePoint<T>,
    t: &HeckeType,
    search_bound: u32,
) -> Result<(LatticePoint<T>, T, bool, ZMat)> {
    let nb = enumerate_neighbors(x, t)?;
    let dists: Vec<(T, bool)> = nb.entries.par_iter().map(|(_, z)| lattice_distance(z, y, search_bound)).collect();
    let (best, _) = dists
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)))
        .ok_or(Error::EmptyMeasure)?;
    let (h, z) = nb.entries[best].clone();
    Ok((z, dists[best].0, dists[best].1, h))
}

/// One row of a composition report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionTerm {
    /// Elementary-divisor exponents of the two-step composite, sorted.
    pub exps: Vec<u32>,
    /// Label of the corresponding operator, e.g. `a_{k+l}`.
    pub label: String,
    /// Predicted coefficient, as a reduced fraction.
    pub expected: String,
    /// Measured frequency, as a reduced fraction.
    pub measured: String,
    pub expected_value: f64,
    pub measured_value: f64,
    /// Whether every sublattice of this type occurs equally often.
    pub uniform: bool,
    pub distinct: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub n: usize,
    pub p: u64,
    pub k: u32,
    pub l: u32,
    /// Type of `a_k`, `(0,k,…,k)`.
    pub first_type: Vec<u32>,
    pub second_type: Vec<u32>,
    pub pairs: u128,
    pub terms: Vec<CompositionTerm>,
    /// Frequencies of `T_a∘T_a'` and `T_a'∘T_a` agree.
    pub commutes: bool,
    pub frequency_sum: String,
    /// Every type matches its coefficient exactly and is uniformly covered.
    pub matches: bool,
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// Predicted coefficients keyed by composite exponents.
fn predicted_terms(n: usize, p: u64, k: u32, l: u32) -> Vec<(Vec<u32>, String, BigRational)> {
    let pb = BigInt::from(p);
    let pn1 = num_traits::pow(pb.clone(), n - 1);
    let pn = num_traits::pow(pb.clone(), n);
    let full = k + l;
    let sorted = |mut v: Vec<u32>| {
        v.sort_unstable();
        v
    };
    let head = |a: u32, b: u32| {
        let mut v = vec![a, b];
        v.extend(std::iter::repeat_n(full, n - 2));
        sorted(v)
    };
    let mut out = vec![(
        head(0, full),
        "a_{k+l}".to_string(),
        ratio(&pn1 * (&pb - 1), &pn - 1),
    )];
    for i in 1..l {
        let c = ratio((&pn1 - 1) * (&pb - 1), (&pn - 1) * num_traits::pow(pb.clone(), i as usize));
        out.push((head(i, full - i), format!("a_{{k+l-{i},{i}}}"), c));
    }
    out.push((
        head(k, l),
        "a_{k,l}".to_string(),
        ratio(&pn1 - 1, (&pn - 1) * num_traits::pow(pb.clone(), (l - 1) as usize)),
    ));
    // merge duplicates (possible when k < l)
    let mut merged: Vec<(Vec<u32>, String, BigRational)> = Vec::new();
    for (e, lab, c) in out {
        match merged.iter_mut().find(|m| m.0 == e) {
            Some(m) => {
                m.1 = format!("{} + {}", m.1, lab);
                m.2 = &m.2 + c;
            }
            None => merged.push((e, lab, c)),
        }
    }
    merged
}

fn two_step_frequencies(
    first: &[ZMat],
    second: &[ZMat],
    p: u64,
) -> BTreeMap<Vec<u32>, (BigRational, BTreeMap<ZMat, u64>)> {
    let w = ratio(BigInt::one(), BigInt::from(first.len()) * BigInt::from(second.len()));
    let mut out: BTreeMap<Vec<u32>, (BigRational, BTreeMap<ZMat, u64>)> = BTreeMap::new();
    for h1 in first {
        for h2 in second {
            let h = h1.mul(h2);
            let t = HeckeType::of_matrix(p, &h).expect("composite of p-power index");
            let canon = h.column_hnf().expect("nonsingular");
            let e = out.entry(t.exps).or_insert_with(|| (BigRational::zero(), BTreeMap::new()));
            e.0 += &w;
            *e.1.entry(canon).or_insert(0) += 1;
        }
    }
    out
}

/// Brute-force check of the composition rule for `(0,k,…,k)` followed by
/// `(0,l,…,l)` on `ℤⁿ`.
pub fn verify_composition(n: usize, p: u64, k: u32, l: u32) -> Result<CompositionReport> {
    if k < 1 || k > l || n < 2 {
        return Err(Error::Config("need n ≥ 2 and 1 ≤ k ≤ l".into()));
    }
    let ta = HeckeType::cyclic_dual(p, n, k)?;
    let tb = HeckeType::cyclic_dual(p, n, l)?;
    let pairs = hecke_count(&ta).saturating_mul(hecke_count(&tb));
    if pairs > COMPOSITION_PAIR_BUDGET {
        return Err(Error::BudgetExceeded(format!("{pairs} two-step pairs")));
    }
    let ha = neighbor_matrices(&ta, COMPOSITION_PAIR_BUDGET)?;
    let hb = neighbor_matrices(&tb, COMPOSITION_PAIR_BUDGET)?;
    let ab = two_step_frequencies(&ha, &hb, p);
    let ba = two_step_frequencies(&hb, &ha, p);
    let commutes = ab.len() == ba.len() && ab.iter().all(|(e, (f, _))| ba.get(e).map(|x| &x.0) == Some(f));

    let predicted = predicted_terms(n, p, k, l);
    let mut terms = Vec::new();
    let mut matches = true;
    let mut sum = BigRational::zero();
    for (e, (freq, hits)) in &ab {
        sum += freq;
        let uniform = {
            let counts: Vec<u64> = hits.values().copied().collect();
            counts.windows(2).all(|w| w[0] == w[1])
                && hecke_count(&HeckeType::new(p, e.clone())?) == hits.len() as u128
        };
        let (label, expected) = match predicted.iter().find(|x| &x.0 == e) {
            Some((_, lab, c)) => (lab.clone(), c.clone()),
            None => ("unpredicted".to_string(), BigRational::zero()),
        };
        matches &= uniform && &expected == freq;
        terms.push(CompositionTerm {
            exps: e.clone(),
            label,
            expected: expected.to_string(),
            measured: freq.to_string(),
            expected_value: crate::scalar::rational_to_f64(&expected),
            measured_value: crate::scalar::rational_to_f64(freq),
            uniform,
            distinct: hits.len(),
        });
    }
    for (e, lab, c) in &predicted {
        if !ab.contains_key(e) {
            matches &= c.is_zero();
            terms.push(CompositionTerm {
                exps: e.clone(),
                label: lab.clone(),
                expected: c.to_string(),
                measured: "0".into(),
                expected_value: crate::scalar::rational_to_f64(c),
                measured_value: 0.0,
                uniform: true,
                distinct: 0,
            });
        }
    }
    Ok(CompositionReport {
        n,
        p,
        k,
        l,
        first_type: ta.exps,
        second_type: tb.exps,
        pairs,
        terms,
        commutes,
        frequency_sum: sum.to_string(),
        matches: matches && commutes,
    })
}
