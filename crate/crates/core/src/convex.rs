//! Majorization, permutation polytopes and their duals in the trace-one
//! hyperplane `H₁ = {q : Σq = 1}`.
//!
//! Membership in `Perm(v)` is decided by Rado's theorem (`x ∈ Perm(v)` iff
//! `x ≺ v`), and membership in the dual set by the sorted pairing
//! `min_π v_π · q = v↑ · q↓`. Exact vertex enumeration of the dual is only
//! offered for ambient dimension ≤ 4, both in `f64` and in exact rationals.

use std::fmt;
use std::ops::Neg;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{HermitianOperator, Spectrum};
use crate::SPECTRAL_TOL;

/// Exact rational scalar used by the cross-check path.
pub type Rational = Ratio<i128>;

/// Largest ambient dimension accepted by [`perm_vertices`].
pub const MAX_VERTEX_DIM: usize = 12;
/// Largest ambient dimension accepted by [`dual_polytope`].
pub const MAX_DUAL_DIM: usize = 4;
/// Max-norm tolerance for merging enumerated vertices.
pub const DEDUP_TOL: f64 = 1e-10;

fn check_len(x: usize, y: usize) -> Result<()> {
    if x != y {
        return Err(Error::DimensionMismatch { expected: x, found: y });
    }
    Ok(())
}

/// `x ≺ y` at the default spectral tolerance.
pub fn majorized_by(x: &Spectrum, y: &Spectrum) -> Result<bool> {
    majorized_by_tol(x, y, SPECTRAL_TOL)
}

/// `x ≺ y`: every partial sum of the largest entries of `x` is bounded by the
/// one of `y` and the totals agree, all up to `tol`.
pub fn majorized_by_tol(x: &Spectrum, y: &Spectrum, tol: f64) -> Result<bool> {
    Ok(weakly_submajorized_by_tol(x, y, tol)? && (x.sum() - y.sum()).abs() <= tol)
}

pub fn weakly_submajorized_by(x: &Spectrum, y: &Spectrum) -> Result<bool> {
    weakly_submajorized_by_tol(x, y, SPECTRAL_TOL)
}

/// `x ≺_w y`: partial sums bounded, no equality of totals required.
pub fn weakly_submajorized_by_tol(x: &Spectrum, y: &Spectrum, tol: f64) -> Result<bool> {
    Ok(majorization_slack(x, y)? >= -tol)
}

/// `min_k (Σ_{i≤k} y↓ − Σ_{i≤k} x↓)` over `k = 1..=n`; non-negative iff `x ≺_w y`.
pub fn majorization_slack(x: &Spectrum, y: &Spectrum) -> Result<f64> {
    check_len(y.len(), x.len())?;
    Ok(x.partial_sums()
        .iter()
        .zip(y.partial_sums())
        .map(|(px, py)| py - px)
        .fold(f64::INFINITY, f64::min))
}

/// Convex hull of all coordinate permutations of one or more generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr", into = "PolytopeRepr")]
pub struct PermPolytope {
    generators: Vec<Spectrum>,
    ambient_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    ambient_dim: usize,
    generators: Vec<Vec<f64>>,
}

impl TryFrom<PolytopeRepr> for PermPolytope {
    type Error = Error;

    fn try_from(r: PolytopeRepr) -> Result<Self> {
        let gens = r.generators.into_iter().map(Spectrum::new).collect::<Result<Vec<_>>>()?;
        let p = PermPolytope::new(gens)?;
        check_len(r.ambient_dim, p.ambient_dim)?;
        Ok(p)
    }
}

impl From<PermPolytope> for PolytopeRepr {
    fn from(p: PermPolytope) -> Self {
        PolytopeRepr {
            ambient_dim: p.ambient_dim,
            generators: p.generators.into_iter().map(Vec::from).collect(),
        }
    }
}

impl PermPolytope {
    pub fn new(generators: Vec<Spectrum>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::InvalidShape("polytope needs a generator".into()))?;
        let ambient_dim = first.len();
        for g in &generators {
            check_len(ambient_dim, g.len())?;
        }
        Ok(PermPolytope { generators, ambient_dim })
    }

    /// `Perm(v)`.
    pub fn single(v: Vec<f64>) -> Result<Self> {
        Self::new(vec![Spectrum::new(v)?])
    }

    pub fn generators(&self) -> &[Spectrum] {
        &self.generators
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn single_generator(&self) -> Result<&Spectrum> {
        match self.generators.as_slice() {
            [g] => Ok(g),
            _ => Err(Error::OutOfRange("operation requires a single-generator polytope".into())),
        }
    }
}

/// Rado's theorem: `x ∈ Perm(v)` iff `x ≺ v`; the weak order for the
/// subnormalized hull `conv(Perm(v) ∪ {0})`.
pub fn perm_contains(p: &PermPolytope, x: &Spectrum, subnormalized: bool) -> Result<bool> {
    perm_contains_tol(p, x, subnormalized, SPECTRAL_TOL)
}

pub fn perm_contains_tol(
    p: &PermPolytope,
    x: &Spectrum,
    subnormalized: bool,
    tol: f64,
) -> Result<bool> {
    let v = p.single_generator()?;
    if subnormalized {
        weakly_submajorized_by_tol(x, v, tol)
    } else {
        majorized_by_tol(x, v, tol)
    }
}

/// Lexicographic successor in the order given by `cmp`; `false` once the
/// sequence is the last permutation.
fn next_permutation<T, F>(xs: &mut [T], cmp: F) -> bool
where
    F: Fn(&T, &T) -> std::cmp::Ordering,
{
    use std::cmp::Ordering::Less;
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && cmp(&xs[i - 1], &xs[i]) != Less {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while cmp(&xs[i - 1], &xs[j]) != Less {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

fn distinct_permutations<T, F>(v: &[T], cmp: F) -> Vec<Vec<T>>
where
    T: Clone,
    F: Fn(&T, &T) -> std::cmp::Ordering + Copy,
{
    let mut cur = v.to_vec();
    cur.sort_by(cmp);
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur, cmp) {
        out.push(cur.clone());
    }
    out
}

/// Number of distinct arrangements of `v` (exact comparison of entries).
pub fn multinomial_count(v: &[f64]) -> u128 {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut count: u128 = 1;
    let mut placed: u128 = 0;
    let mut run: u128 = 0;
    for (i, x) in sorted.iter().enumerate() {
        if i > 0 && x.to_bits() == sorted[i - 1].to_bits() {
            run += 1;
        } else {
            run = 1;
        }
        placed += 1;
        // C(placed, run) built incrementally: count *= placed / run
        count = count * placed / run;
    }
    count
}

/// All distinct coordinate permutations of the generator of `Perm(v)`.
pub fn perm_vertices(p: &PermPolytope) -> Result<Vec<Vec<f64>>> {
    let v = p.single_generator()?;
    if p.ambient_dim > MAX_VERTEX_DIM {
        return Err(Error::DimensionGuard { dim: p.ambient_dim, max: MAX_VERTEX_DIM });
    }
    Ok(distinct_permutations(v.values(), f64::total_cmp))
}

/// Witness record for a dual-set membership query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualMembershipCertificate {
    pub contained: bool,
    pub worst_generator: Spectrum,
    pub worst_value: f64,
}

fn sorted_pairing(generator: &Spectrum, q: &Spectrum) -> f64 {
    generator
        .values()
        .iter()
        .rev()
        .zip(q.values())
        .map(|(g, x)| g * x)
        .sum()
}

/// Is `q` in the dual cone of `v`? Checks `g↑ · q↓ ≥ −tol` for every generator.
pub fn dual_contains(v: &PermPolytope, q: &Spectrum) -> Result<DualMembershipCertificate> {
    dual_contains_tol(v, q, SPECTRAL_TOL)
}

pub fn dual_contains_tol(
    v: &PermPolytope,
    q: &Spectrum,
    tol: f64,
) -> Result<DualMembershipCertificate> {
    check_len(v.ambient_dim, q.len())?;
    let (worst_generator, worst_value) = v
        .generators
        .iter()
        .map(|g| (g, sorted_pairing(g, q)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("polytope has a generator");
    Ok(DualMembershipCertificate {
        contained: worst_value >= -tol,
        worst_generator: worst_generator.clone(),
        worst_value,
    })
}

/// Scalar field for the dual-vertex enumeration.
pub trait Field: Clone + PartialOrd + fmt::Debug + Zero + One + Neg<Output = Self>
where
    for<'a> &'a Self: std::ops::Mul<&'a Self, Output = Self>
        + std::ops::Sub<&'a Self, Output = Self>
        + std::ops::Div<&'a Self, Output = Self>,
{
    fn magnitude(&self) -> Self;
    /// Pivot too small to divide by.
    fn negligible(&self) -> bool;
    /// Strictly below the feasibility threshold.
    fn infeasible(&self) -> bool;
    fn same(&self, other: &Self) -> bool;
    fn exact_eq(&self, other: &Self) -> bool;
}

impl Field for f64 {
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn negligible(&self) -> bool {
        self.abs() < 1e-12
    }
    fn infeasible(&self) -> bool {
        *self < -DEDUP_TOL
    }
    fn same(&self, other: &Self) -> bool {
        (self - other).abs() <= DEDUP_TOL
    }
    fn exact_eq(&self, other: &Self) -> bool {
        self.to_bits() == other.to_bits()
    }
}

impl Field for Rational {
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn infeasible(&self) -> bool {
        self.is_negative()
    }
    fn same(&self, other: &Self) -> bool {
        self == other
    }
    fn exact_eq(&self, other: &Self) -> bool {
        self == other
    }
}

fn partial_cmp_total<F: PartialOrd>(a: &F, b: &F) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

fn dot<F: Field>(a: &[F], b: &[F]) -> F
where
    for<'a> &'a F: std::ops::Mul<&'a F, Output = F>
        + std::ops::Sub<&'a F, Output = F>
        + std::ops::Div<&'a F, Output = F>,
{
    a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc + x * y)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve<F: Field>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> Option<Vec<F>>
where
    for<'a> &'a F: std::ops::Mul<&'a F, Output = F>
        + std::ops::Sub<&'a F, Output = F>
        + std::ops::Div<&'a F, Output = F>,
{
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            partial_cmp_total(&a[i][col].magnitude(), &a[j][col].magnitude())
        })?;
        if a[pivot][col].negligible() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = &a[row][col] / &a[col][col];
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                let delta = &factor * &a[col][k];
                a[row][k] = &a[row][k] - &delta;
            }
            let delta = &factor * &b[col];
            b[row] = &b[row] - &delta;
        }
    }
    let mut x = vec![F::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = &acc - &(&a[row][k] * &x[k]);
        }
        x[row] = &acc / &a[row][row];
    }
    Some(x)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Vertices of `{q ∈ H₁ : w·q ≥ 0 for every arrangement w of the generator}`,
/// grouped into permutation orbits. `None` when the generator is uniform and
/// the dual set is the whole hyperplane.
pub fn enumerate_dual<F: Field>(generator: &[F]) -> Option<DualVertices<F>>
where
    for<'a> &'a F: std::ops::Mul<&'a F, Output = F>
        + std::ops::Sub<&'a F, Output = F>
        + std::ops::Div<&'a F, Output = F>,
{
    let n = generator.len();
    if generator.iter().all(|x| x.exact_eq(&generator[0])) {
        return None;
    }
    let facets = distinct_permutations(generator, partial_cmp_total);
    let mut vertices: Vec<Vec<F>> = Vec::new();
    for subset in combinations(facets.len(), n - 1) {
        let mut rows: Vec<Vec<F>> = subset.iter().map(|&i| facets[i].clone()).collect();
        rows.push(vec![F::one(); n]);
        let mut rhs = vec![F::zero(); n - 1];
        rhs.push(F::one());
        let Some(q) = solve(rows, rhs) else { continue };
        if facets.iter().any(|w| dot(w, &q).infeasible()) {
            continue;
        }
        if !vertices.iter().any(|v| v.iter().zip(&q).all(|(a, b)| a.same(b))) {
            vertices.push(q);
        }
    }
    let mut orbits: Vec<Vec<F>> = Vec::new();
    for v in &vertices {
        let mut key = v.clone();
        key.sort_by(|a, b| partial_cmp_total(b, a));
        if !orbits.iter().any(|o| o.iter().zip(&key).all(|(a, b)| a.same(b))) {
            orbits.push(key);
        }
    }
    let facet_count = facets
        .iter()
        .filter(|w| {
            vertices
                .iter()
                .filter(|v| dot(w, v).same(&F::zero()))
                .count()
                >= n - 1
        })
        .count();
    Some(DualVertices { vertices, orbits, facet_count })
}

/// Enumerated dual set: vertices, orbit representatives (sorted descending)
/// and the number of supporting facet hyperplanes.
#[derive(Clone, Debug, PartialEq)]
pub struct DualVertices<F> {
    pub vertices: Vec<Vec<F>>,
    pub orbits: Vec<Vec<F>>,
    pub facet_count: usize,
}

/// Dual of a permutation polytope in `H₁`.
#[derive(Clone, Debug, PartialEq)]
pub enum DualSet {
    Polytope {
        polytope: PermPolytope,
        vertices: Vec<Vec<f64>>,
        facet_count: usize,
    },
    /// Uniform generator: the primal set is a point and its dual is all of `H₁`.
    WholeHyperplane,
}

/// Floating-point vertex enumeration of the dual of `Perm(v)`.
pub fn dual_polytope(v: &PermPolytope) -> Result<DualSet> {
    let g = v.single_generator()?;
    if v.ambient_dim > MAX_DUAL_DIM {
        return Err(Error::DimensionGuard { dim: v.ambient_dim, max: MAX_DUAL_DIM });
    }
    Ok(match enumerate_dual(g.values()) {
        None => DualSet::WholeHyperplane,
        Some(d) => DualSet::Polytope {
            polytope: PermPolytope::new(
                d.orbits.into_iter().map(Spectrum::new).collect::<Result<Vec<_>>>()?,
            )?,
            vertices: d.vertices,
            facet_count: d.facet_count,
        },
    })
}

/// Exact rational vertex enumeration of the dual of `Perm(generator)`.
pub fn dual_polytope_exact(generator: &[Rational]) -> Result<Option<DualVertices<Rational>>> {
    if generator.len() > MAX_DUAL_DIM {
        return Err(Error::DimensionGuard { dim: generator.len(), max: MAX_DUAL_DIM });
    }
    if generator.is_empty() {
        return Err(Error::InvalidShape("empty generator".into()));
    }
    Ok(enumerate_dual(generator))
}

/// Distinct arrangements of a rational vector.
pub fn rational_permutations(v: &[Rational]) -> Vec<Vec<Rational>> {
    distinct_permutations(v, partial_cmp_total)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Decimal text when the denominator divides a power of ten, `p/q` otherwise.
pub fn render_rational(r: &Rational) -> String {
    let (num, den) = (*r.numer(), *r.denom());
    let (mut d, mut twos, mut fives) = (den, 0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{num}/{den}");
    }
    let digits = twos.max(fives);
    let scale = 10i128.pow(digits);
    let scaled = num * (scale / den);
    if digits == 0 {
        return scaled.to_string();
    }
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.abs();
    let int = abs / scale;
    let frac = format!("{:0width$}", abs % scale, width = digits as usize);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Closed-form dual vertices of the two-level generator `(1/k × k, 0 × (d−k))`:
/// the orbit of `e₁` (present when `k ≤ d−2` or `d = 2`) and the orbit of
/// `(1/(d−k), …, 1/(d−k), −(k−1)/(d−k))` (present when `k ≥ 2`).
pub fn two_level_dual_vertices(k: usize, d: usize) -> Result<Vec<Vec<Rational>>> {
    if k == 0 || k >= d {
        return Err(Error::OutOfRange(format!("two-level generator needs 0 < k < d, got k = {k}, d = {d}")));
    }
    let mut out = Vec::new();
    if k + 2 <= d || d == 2 {
        let mut e = vec![Rational::from_integer(0); d];
        e[0] = Rational::from_integer(1);
        out.extend(rational_permutations(&e));
    }
    if k >= 2 {
        let den = (d - k) as i128;
        let mut q = vec![Rational::new(1, den); d];
        q[d - 1] = Rational::new(-(k as i128 - 1), den);
        out.extend(rational_permutations(&q));
    }
    Ok(out)
}

/// Dual set of the segment `V_a = [a, 1−a] ⊂ Δ₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DualSegment {
    /// Endpoints `(b, 1−b)` and `(1−b, b)` with `b = a/(2a−1)`.
    Segment { b: f64, endpoints: [[f64; 2]; 2] },
    /// `a = 1/2`: the segment is a point and its dual is the whole line.
    WholeLine,
}

pub fn dual_segment(a: f64) -> Result<DualSegment> {
    if !(0.0..=0.5).contains(&a) {
        return Err(Error::OutOfRange(format!("segment parameter a = {a} not in [0, 1/2]")));
    }
    if a == 0.5 {
        return Ok(DualSegment::WholeLine);
    }
    let b = a / (2.0 * a - 1.0);
    Ok(DualSegment::Segment { b, endpoints: [[b, 1.0 - b], [1.0 - b, b]] })
}

/// Bounds `p↑·q↓ ≤ Tr ρσ ≤ p↑·q↑` for a state spectrum `p` and Hermitian spectrum `q`.
pub fn trace_bounds(p: &Spectrum, q: &Spectrum) -> Result<(f64, f64)> {
    check_len(p.len(), q.len())?;
    if let Some(&neg) = p.values().iter().find(|&&x| x < 0.0) {
        return Err(Error::NegativeEntry(neg));
    }
    let p_up = p.ascending();
    let lower = p_up.iter().zip(q.values()).map(|(a, b)| a * b).sum();
    let upper = p_up.iter().zip(q.ascending()).map(|(a, b)| a * b).sum();
    Ok((lower, upper))
}

/// Operators with spectra `p` and `q` sharing the eigenbasis `u`, arranged to
/// attain the lower and upper trace bounds. Returns `(A, B_low, B_high)`.
pub fn aligned_operators(
    p: &Spectrum,
    q: &Spectrum,
    u: &DMatrix<Complex64>,
) -> Result<(HermitianOperator, HermitianOperator, HermitianOperator)> {
    check_len(p.len(), q.len())?;
    check_len(p.len(), u.nrows())?;
    let p_up = p.ascending();
    let q_up = q.ascending();
    let a = HermitianOperator::diagonal(&p_up).conjugate_by(u)?;
    let low = HermitianOperator::diagonal(q.values()).conjugate_by(u)?;
    let high = HermitianOperator::diagonal(&q_up).conjugate_by(u)?;
    Ok((a, low, high))
}

/// Facet description of the convex hull of points of `H₁` (ambient dim ≤ 4),
/// built directly from the vertex list: every hyperplane through an affinely
/// spanning subset that leaves all vertices on one side.
#[derive(Clone, Debug)]
pub struct VertexHull {
    ambient_dim: usize,
    facets: Vec<(DVector<f64>, f64)>,
}

impl VertexHull {
    pub fn new(vertices: &[Vec<f64>]) -> Result<Self> {
        let ambient_dim = vertices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidShape("empty vertex list".into()))?;
        if !(2..=MAX_DUAL_DIM).contains(&ambient_dim) {
            return Err(Error::DimensionGuard { dim: ambient_dim, max: MAX_DUAL_DIM });
        }
        let d = ambient_dim - 1;
        let pts: Vec<DVector<f64>> =
            vertices.iter().map(|v| DVector::from_iterator(d, v[..d].iter().copied())).collect();
        let mut facets = Vec::new();
        for subset in combinations(pts.len(), d) {
            let base = &pts[subset[0]];
            let diffs = DMatrix::from_fn(d - 1, d, |r, c| pts[subset[r + 1]][c] - base[c]);
            let normal = DVector::from_fn(d, |k, _| {
                if d == 1 {
                    return 1.0;
                }
                let minor = diffs.clone().remove_column(k);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * minor.determinant()
            });
            let norm = normal.norm();
            if norm < 1e-12 {
                continue;
            }
            let normal = normal / norm;
            let offset = normal.dot(base);
            let side: Vec<f64> = pts.iter().map(|p| normal.dot(p) - offset).collect();
            let (lo, hi) = side.iter().fold((0.0f64, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
            if hi <= 1e-12 {
                facets.push((normal, offset));
            } else if lo >= -1e-12 {
                facets.push((-normal, -offset));
            }
        }
        Ok(VertexHull { ambient_dim, facets })
    }

    /// Membership of a point of `H₁` (its coordinate sum is not re-checked).
    pub fn contains(&self, q: &[f64], tol: f64) -> Result<bool> {
        check_len(self.ambient_dim, q.len())?;
        let x = DVector::from_iterator(self.ambient_dim - 1, q[..self.ambient_dim - 1].iter().copied());
        Ok(self.facets.iter().all(|(n, b)| n.dot(&x) <= b + tol))
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_probability, rng_from_seed};
    use itertools::Itertools;
    use proptest::prelude::*;
    use rand::Rng;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn majorization_examples() {
        assert!(majorized_by(&spec(&[0.5, 0.5]), &spec(&[1.0, 0.0])).unwrap());
        assert!(!majorized_by(&spec(&[0.6, 0.4, 0.0, 0.0]), &spec(&[0.5, 0.5, 0.0, 0.0])).unwrap());
        let mut rng = rng_from_seed(2);
        for n in 2..6 {
            let p = spec(&random_probability(n, &mut rng));
            assert!(majorized_by(&spec(&vec![1.0 / n as f64; n]), &p).unwrap());
        }
        assert!(majorized_by(&spec(&[1.0]), &spec(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn weak_majorization_examples() {
        assert!(weakly_submajorized_by(&spec(&[0.3, 0.2]), &spec(&[1.0, 0.0])).unwrap());
        assert!(weakly_submajorized_by(&spec(&[0.0; 4]), &spec(&[0.5, 0.5, 0.0, 0.0])).unwrap());
        assert!(!weakly_submajorized_by(&spec(&[0.6, 0.0, 0.0, 0.0]), &spec(&[0.5, 0.5, 0.0, 0.0]))
            .unwrap());
        assert!(weakly_submajorized_by(&spec(&[0.1]), &spec(&[0.1, 0.0])).is_err());
    }

    #[test]
    fn perm_contains_examples() {
        let p = PermPolytope::single(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(perm_contains(&p, &spec(&[0.25; 4]), false).unwrap());
        assert!(perm_contains(&p, &spec(&[0.5, 0.5, 0.0, 0.0]), false).unwrap());
        assert!(!perm_contains(&p, &spec(&[1.0, 0.0, 0.0, 0.0]), false).unwrap());
        assert!(perm_contains(&p, &spec(&[0.2, 0.1, 0.0, 0.0]), true).unwrap());
        assert!(!perm_contains(&p, &spec(&[0.2, 0.1, 0.0, 0.0]), false).unwrap());
        assert!(perm_contains(&p, &spec(&[0.2; 3]), false).is_err());
    }

    #[test]
    fn vertex_counts() {
        let octa = PermPolytope::single(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(perm_vertices(&octa).unwrap().len(), 6);
        let third = 1.0 / 3.0;
        let mut g = vec![third; 3];
        g.extend([0.0; 6]);
        let p9 = PermPolytope::single(g.clone()).unwrap();
        assert_eq!(perm_vertices(&p9).unwrap().len(), 84);
        assert_eq!(multinomial_count(&g), 84);
        assert_eq!(perm_vertices(&PermPolytope::single(vec![1.0, 0.0]).unwrap()).unwrap().len(), 2);
        let big = PermPolytope::single(vec![0.0; 13]).unwrap();
        assert!(matches!(perm_vertices(&big), Err(Error::DimensionGuard { .. })));
    }

    #[test]
    fn dual_contains_examples() {
        let octa = PermPolytope::single(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let c = dual_contains(&octa, &spec(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(c.contained);
        assert_eq!(c.worst_value, 0.0);
        let c = dual_contains(&octa, &spec(&[0.5, 0.5, 0.5, -0.5])).unwrap();
        assert!(c.contained);
        assert_eq!(c.worst_value, 0.0);
        let c = dual_contains(&octa, &spec(&[0.5, 0.5, 0.5, -1.0])).unwrap();
        assert!(!c.contained);
        assert!((c.worst_value + 0.25).abs() < 1e-15);
        assert!(dual_contains(&octa, &spec(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn dual_of_triangle_exact() {
        let d = dual_polytope_exact(&[q(1, 2), q(1, 2), q(0, 1)]).unwrap().unwrap();
        assert_eq!(d.orbits, vec![vec![q(1, 1), q(1, 1), q(-1, 1)]]);
        assert_eq!(d.vertices.len(), 3);
    }

    #[test]
    fn dual_of_hexagon_exact() {
        let d = dual_polytope_exact(&[q(2, 3), q(1, 3), q(0, 1)]).unwrap().unwrap();
        let mut orbits = d.orbits.clone();
        orbits.sort();
        assert_eq!(
            orbits,
            vec![vec![q(2, 3), q(2, 3), q(-1, 3)], vec![q(1, 1), q(0, 1), q(0, 1)]]
        );
        assert_eq!(d.vertices.len(), 6);
    }

    #[test]
    fn dual_of_octahedron_is_cube() {
        let d = dual_polytope_exact(&[q(1, 2), q(1, 2), q(0, 1), q(0, 1)]).unwrap().unwrap();
        let mut orbits = d.orbits.clone();
        orbits.sort();
        assert_eq!(
            orbits,
            vec![
                vec![q(1, 2), q(1, 2), q(1, 2), q(-1, 2)],
                vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1)],
            ]
        );
        assert_eq!(d.vertices.len(), 8);
        assert_eq!(d.facet_count, 6);

        let octa = PermPolytope::single(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        match dual_polytope(&octa).unwrap() {
            DualSet::Polytope { polytope, vertices, facet_count } => {
                assert_eq!(vertices.len(), 8);
                assert_eq!(facet_count, 6);
                assert_eq!(polytope.generators().len(), 2);
            }
            DualSet::WholeHyperplane => panic!("octahedron dual is bounded"),
        }
    }

    #[test]
    fn two_level_closed_form_matches_enumeration() {
        for d in 2..=6usize {
            for k in 1..d {
                let mut g = vec![q(1, k as i128); k];
                g.resize(d, q(0, 1));
                let mut enumerated = enumerate_dual(&g).unwrap().vertices;
                let mut closed = two_level_dual_vertices(k, d).unwrap();
                enumerated.sort();
                closed.sort();
                closed.dedup();
                assert_eq!(closed, enumerated, "k = {k}, d = {d}");
            }
        }
        assert_eq!(two_level_dual_vertices(3, 9).unwrap().len(), 18);
        assert!(two_level_dual_vertices(0, 3).is_err());
        assert!(two_level_dual_vertices(3, 3).is_err());
    }

    #[test]
    fn simplex_is_self_dual() {
        for n in 2..=4 {
            let mut g = vec![0.0; n];
            g[0] = 1.0;
            let DualSet::Polytope { polytope, vertices, .. } =
                dual_polytope(&PermPolytope::single(g.clone()).unwrap()).unwrap()
            else {
                panic!("bounded")
            };
            assert_eq!(vertices.len(), n);
            assert_eq!(polytope.generators()[0].values(), g.as_slice());
        }
    }

    #[test]
    fn degenerate_and_guarded_duals() {
        let uniform = PermPolytope::single(vec![0.25; 4]).unwrap();
        assert_eq!(dual_polytope(&uniform).unwrap(), DualSet::WholeHyperplane);
        let big = PermPolytope::single(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(dual_polytope(&big), Err(Error::DimensionGuard { .. })));
    }

    #[test]
    fn dual_segment_examples() {
        let DualSegment::Segment { b, endpoints } = dual_segment(0.25).unwrap() else { panic!() };
        assert_eq!(b, -0.5);
        assert_eq!(endpoints, [[-0.5, 1.5], [1.5, -0.5]]);
        let DualSegment::Segment { b, .. } = dual_segment(0.0).unwrap() else { panic!() };
        assert_eq!(b, 0.0);
        let DualSegment::Segment { b, .. } = dual_segment(0.4).unwrap() else { panic!() };
        assert!((b + 2.0).abs() < 1e-12);
        assert_eq!(dual_segment(0.5).unwrap(), DualSegment::WholeLine);
        assert!(dual_segment(0.7).is_err());
    }

    #[test]
    fn dual_segment_matches_enumeration() {
        // V_a = Perm(1-a, a), dual endpoints from the facet enumeration
        for a in [0.1, 0.25, 0.4] {
            let DualSegment::Segment { endpoints, .. } = dual_segment(a).unwrap() else { panic!() };
            let d = enumerate_dual(&[1.0 - a, a]).unwrap();
            assert_eq!(d.vertices.len(), 2);
            for e in endpoints {
                assert!(d.vertices.iter().any(|v| (v[0] - e[0]).abs() < 1e-12 && (v[1] - e[1]).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn trace_bounds_examples() {
        assert_eq!(trace_bounds(&spec(&[1.0, 0.0]), &spec(&[1.0, 0.0])).unwrap(), (0.0, 1.0));
        let (lo, hi) =
            trace_bounds(&spec(&[0.5, 0.5, 0.0, 0.0]), &spec(&[0.5, 0.5, 0.5, -0.5])).unwrap();
        assert_eq!((lo, hi), (0.0, 0.5));
        let (lo, hi) = trace_bounds(&spec(&[1.0 / 3.0; 3]), &spec(&[0.7, 0.5, -0.2])).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-15 && (hi - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            trace_bounds(&spec(&[1.5, -0.5]), &spec(&[1.0, 0.0])),
            Err(Error::NegativeEntry(_))
        ));
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(render_rational(&q(1, 2)), "0.5");
        assert_eq!(render_rational(&q(-1, 2)), "-0.5");
        assert_eq!(render_rational(&q(1, 1)), "1");
        assert_eq!(render_rational(&q(0, 1)), "0");
        assert_eq!(render_rational(&q(-3, 8)), "-0.375");
        assert_eq!(render_rational(&q(2, 3)), "2/3");
    }

    #[test]
    fn vertex_hull_of_cube() {
        let d = enumerate_dual(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        let hull = VertexHull::new(&d.vertices).unwrap();
        assert!(hull.facet_count() >= 6);
        assert!(hull.contains(&[0.25; 4], 1e-9).unwrap());
        assert!(hull.contains(&[0.5, 0.5, 0.5, -0.5], 1e-9).unwrap());
        assert!(!hull.contains(&[0.6, 0.6, 0.3, -0.5], 1e-9).unwrap());
        assert!(!hull.contains(&[1.2, -0.2, 0.0, 0.0], 1e-9).unwrap());
    }

    #[test]
    fn shannon_order_follows_majorization() {
        let mut rng = rng_from_seed(314);
        for _ in 0..10_000 {
            let n = rng.random_range(2..6);
            let y = random_probability(n, &mut rng);
            // x = B y with B a convex mixture of permutations (doubly stochastic)
            let w = random_probability(3, &mut rng);
            let mut x = vec![0.0; n];
            for wk in w {
                let mut perm: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    perm.swap(i, rng.random_range(0..=i));
                }
                for i in 0..n {
                    x[i] += wk * y[perm[i]];
                }
            }
            let (sx, sy) = (spec(&x), spec(&y));
            assert!(majorized_by(&sx, &sy).unwrap());
            let hx = crate::hermitian::shannon_entropy(&x);
            let hy = crate::hermitian::shannon_entropy(&y);
            assert!(hx >= hy - 1e-12);
        }
    }

    fn brute_dual_min(g: &[f64], q: &[f64]) -> f64 {
        q.iter()
            .permutations(q.len())
            .map(|perm| g.iter().zip(perm).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn dual_contains_agrees_with_brute_force(
            (g, qv) in (2usize..=7).prop_flat_map(|n| (
                proptest::collection::vec(0.0f64..1.0, n),
                proptest::collection::vec(-1.0f64..1.0, n),
            ))
        ) {
            let poly = PermPolytope::single(g.clone()).unwrap();
            let cert = dual_contains(&poly, &spec(&qv)).unwrap();
            let brute = brute_dual_min(&g, &qv);
            prop_assert!((cert.worst_value - brute).abs() < 1e-12);
            prop_assert_eq!(cert.contained, brute >= -SPECTRAL_TOL);
        }

        #[test]
        fn majorization_is_reflexive_and_transitive(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = rng_from_seed(seed);
            let z = spec(&random_probability(n, &mut rng));
            prop_assert!(majorized_by(&z, &z).unwrap());
            // y = avg(z, perm z) ≺ z, x = avg(y, uniform) ≺ y
            let zr: Vec<f64> = z.values().iter().rev().copied().collect();
            let y = spec(&z.values().iter().zip(&zr).map(|(a, b)| 0.5 * (a + b)).collect::<Vec<_>>());
            let x = spec(&y.values().iter().map(|a| 0.5 * a + 0.5 / n as f64).collect::<Vec<_>>());
            prop_assert!(majorized_by(&y, &z).unwrap());
            prop_assert!(majorized_by(&x, &y).unwrap());
            prop_assert!(majorized_by(&x, &z).unwrap());
            // antisymmetry on sorted vectors: mutual majorization forces equality
            if majorized_by(&z, &y).unwrap() {
                for (a, b) in z.values().iter().zip(y.values()) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn dual_contains_brute_force_dim_eight() {
        let mut rng = rng_from_seed(8);
        for _ in 0..4 {
            let g: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
            let qv: Vec<f64> = (0..8).map(|_| rng.random::<f64>() - 0.3).collect();
            let cert = dual_contains(&PermPolytope::single(g.clone()).unwrap(), &spec(&qv)).unwrap();
            assert!((cert.worst_value - brute_dual_min(&g, &qv)).abs() < 1e-12);
        }
    }
}
