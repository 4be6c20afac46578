//! Deterministic verification suites, polytope emission, witness search and
//! bulk state validation. Everything here is reproducible from a seed: Monte
//! Carlo loops run in parallel over derived per-sample seeds and fold with an
//! order-independent maximum.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{
    aligned_operators, dual_polytope, dual_polytope_exact, dual_segment, enumerate_dual,
    majorization_slack, perm_vertices, rational_permutations, rational_to_f64, trace_bounds,
    two_level_dual_vertices, DualSegment, DualSet, Rational, VertexHull,
};
use crate::error::{Error, Result};
use crate::hermitian::{
    hs_distance, hs_inner, max_abs_diff, max_entangled, reshuffle, spectrum, tensor_product,
    uniform_superposition, von_neumann_entropy, ComplexMatrix, HermitianOperator, Spectrum,
};
use crate::maps::{
    classical_reduction, classify, column_stochastic_defect, contraction_map, diagonal, jamiolkowski_state,
    map_effect, map_effect_from_state, map_from_state, random_bistochastic, random_cptp, row_stochastic_defect,
    KrausSet, QuantumMap,
};
use crate::random::{derive_seed, haar_unitary, random_density, random_hermitian, random_matrix, random_probability, rng_from_seed};
use crate::states::{
    certify_state, extend_product, gauged_entropy, is_extended_state, is_povm_element, is_quantum_state,
    is_xpovm_element, reduce_operator, reduce_state, sample_extended_state, sample_extended_state_k,
    sample_xpovm_element, ExtendedState, ExtendedStateRepr, StateCertificate, TheoryOrder,
};
use crate::supermaps::{
    hyperdecohere_paths, product_supermap, random_bistochastic_supermap, random_cptp_supermap, reduce_supermap,
    SuperMap,
};

/// A quartic-diagram gap must exceed this to count as a witness.
pub const WITNESS_THRESHOLD: f64 = 0.05;
/// Structural failures (wrong counts, wrong vertex sets) are scored with this violation.
pub const STRUCTURAL_VIOLATION: f64 = 1.0;

const XPOVM_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Duality,
    Lemma1,
    Lemma3,
    Lemma5,
    Prop3,
    Prop4,
    Contraction,
    Roundtrip,
    Entropy,
    Membership,
    Witnesses,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Duality,
        Suite::Lemma1,
        Suite::Lemma3,
        Suite::Lemma5,
        Suite::Prop3,
        Suite::Prop4,
        Suite::Contraction,
        Suite::Roundtrip,
        Suite::Entropy,
        Suite::Membership,
        Suite::Witnesses,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Lemma1 => "lemma1",
            Suite::Lemma3 => "lemma3",
            Suite::Lemma5 => "lemma5",
            Suite::Prop3 => "prop3",
            Suite::Prop4 => "prop4",
            Suite::Contraction => "contraction",
            Suite::Roundtrip => "roundtrip",
            Suite::Entropy => "entropy",
            Suite::Membership => "membership",
            Suite::Witnesses => "witnesses",
        }
    }

    /// Declared tolerance: `passed ⇔ max_violation ≤ tol`.
    pub fn default_tol(&self) -> f64 {
        match self {
            Suite::Prop3 | Suite::Prop4 | Suite::Contraction | Suite::Witnesses => 1e-10,
            _ => 1e-9,
        }
    }

    pub fn default_samples(&self) -> usize {
        match self {
            Suite::Duality => 100_000,
            Suite::Lemma1 => 200,
            Suite::Lemma3 | Suite::Contraction | Suite::Roundtrip => 100,
            Suite::Membership => 1000,
            _ => 10_000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownName { kind: "suite", name: s.to_string() })
    }
}

/// A single suite or `all`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteSelection {
    One(Suite),
    All,
}

impl FromStr for SuiteSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            Ok(SuiteSelection::All)
        } else {
            s.parse().map(SuiteSelection::One)
        }
    }
}

impl SuiteSelection {
    pub fn suites(&self) -> Vec<Suite> {
        match self {
            SuiteSelection::One(s) => vec![*s],
            SuiteSelection::All => Suite::ALL.to_vec(),
        }
    }
}

/// Overrides for a suite run; `None` means the suite's own default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite_name: String,
    pub passed: bool,
    pub checks_run: u64,
    pub max_violation: f64,
    pub elapsed_ms: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Tally {
    checks: u64,
    worst: f64,
}

impl Tally {
    fn check(&mut self, violation: f64) {
        self.checks += 1;
        let v = if violation.is_nan() { f64::MAX } else { violation.max(0.0) };
        self.worst = self.worst.max(v);
    }

    fn flag(&mut self, ok: bool) {
        self.check(if ok { 0.0 } else { STRUCTURAL_VIOLATION });
    }

    fn outcome<T>(&mut self, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(_) => {
                self.flag(false);
                None
            }
        }
    }

    fn merge(self, other: Tally) -> Tally {
        Tally { checks: self.checks + other.checks, worst: self.worst.max(other.worst) }
    }
}

fn par_tally<F>(count: usize, f: F) -> Tally
where
    F: Fn(usize, &mut Tally) + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut t = Tally::default();
            f(i, &mut t);
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn seed_for(cfg: &SuiteConfig, i: usize) -> u64 {
    derive_seed(cfg.seed, i as u64)
}

fn dims(cfg: &SuiteConfig, default: &[usize]) -> Vec<usize> {
    cfg.n.map_or_else(|| default.to_vec(), |n| vec![n])
}

/// Violation of `x ≺ y`: negative partial-sum slack or a mismatch of totals.
fn majorization_violation(x: &Spectrum, y: &Spectrum) -> f64 {
    match majorization_slack(x, y) {
        Ok(slack) => (-slack).max((x.sum() - y.sum()).abs()),
        Err(_) => STRUCTURAL_VIOLATION,
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> SuiteResult {
    let start = Instant::now();
    let tol = cfg.tol.unwrap_or_else(|| suite.default_tol());
    let samples = cfg.samples.unwrap_or_else(|| suite.default_samples());
    let tally = match suite {
        Suite::Duality => duality_suite(cfg, samples),
        Suite::Lemma1 => lemma1_suite(cfg, samples),
        Suite::Lemma3 => lemma3_suite(cfg, samples),
        Suite::Lemma5 => lemma5_suite(cfg, samples),
        Suite::Prop3 => prop3_suite(cfg, samples),
        Suite::Prop4 => prop4_suite(cfg, samples),
        Suite::Contraction => contraction_suite(cfg, samples),
        Suite::Roundtrip => roundtrip_suite(cfg, samples),
        Suite::Entropy => entropy_suite(cfg, samples),
        Suite::Membership => membership_suite(cfg, samples),
        Suite::Witnesses => witnesses_suite(cfg, samples),
    };
    SuiteResult {
        suite_name: suite.name().to_string(),
        passed: tally.worst <= tol,
        checks_run: tally.checks,
        max_violation: tally.worst,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        seed: cfg.seed,
    }
}

pub fn run_selection(selection: SuiteSelection, cfg: &SuiteConfig) -> Vec<SuiteResult> {
    selection.suites().into_iter().map(|s| run_suite(s, cfg)).collect()
}

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn sorted_rows(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| y.total_cmp(x))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}

fn vertex_set_distance(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> f64 {
    if a.len() != b.len() {
        return STRUCTURAL_VIOLATION;
    }
    sorted_rows(a)
        .iter()
        .zip(sorted_rows(b))
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

fn to_f64_rows(rows: &[Vec<Rational>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect()
}

/// Exact and floating-point duals of two permutohedra in Δ₂.
fn simplex_duals(t: &mut Tally) {
    let cases: [(Vec<Rational>, Vec<Vec<Rational>>); 2] = [
        (vec![q(1, 2), q(1, 2), q(0, 1)], vec![vec![q(1, 1), q(1, 1), q(-1, 1)]]),
        (
            vec![q(2, 3), q(1, 3), q(0, 1)],
            vec![vec![q(1, 1), q(0, 1), q(0, 1)], vec![q(2, 3), q(2, 3), q(-1, 3)]],
        ),
    ];
    for (generator, orbits) in cases {
        let mut want: Vec<Vec<Rational>> = orbits.iter().flat_map(|o| rational_permutations(o)).collect();
        want.sort();
        match dual_polytope_exact(&generator) {
            Ok(Some(d)) => {
                let mut got = d.vertices;
                got.sort();
                t.flag(got == want);
            }
            _ => t.flag(false),
        }
        let float_generator = generator.iter().map(rational_to_f64).collect();
        let Some(poly) = t.outcome(crate::convex::PermPolytope::single(float_generator)) else { continue };
        match dual_polytope(&poly) {
            Ok(DualSet::Polytope { vertices, .. }) => {
                t.flag(vertex_set_distance(vertices, to_f64_rows(&want)) <= crate::EXACT_TOL)
            }
            _ => t.flag(false),
        }
    }
}

/// `dual_segment` against an independent enumeration of the dual of `Perm(1−a, a)`.
fn dual_segments(t: &mut Tally) {
    for a in [0.1, 0.25, 0.4] {
        let enumerated = enumerate_dual(&[1.0 - a, a]).map(|d| d.vertices);
        match (dual_segment(a), enumerated) {
            (Ok(DualSegment::Segment { b, endpoints }), Some(vertices)) => {
                let formula = a / (2.0 * a - 1.0);
                t.flag((b - formula).abs() <= crate::EXACT_TOL);
                let closed = endpoints.iter().map(|e| e.to_vec()).collect();
                t.flag(vertex_set_distance(closed, vertices) <= crate::EXACT_TOL);
                if a == 0.25 {
                    t.flag((b + 0.5).abs() <= crate::EXACT_TOL);
                }
            }
            _ => t.flag(false),
        }
    }
}

/// Cube of the N = 2 dual: orbit check plus hull-versus-spectral membership on random points of `H₁`.
fn cube_cross_validation(cfg: &SuiteConfig, samples: usize, t: &mut Tally) {
    let octahedron = [q(1, 2), q(1, 2), q(0, 1), q(0, 1)];
    match dual_polytope_exact(&octahedron) {
        Ok(Some(d)) => t.flag(d.orbits.contains(&vec![q(1, 2), q(1, 2), q(1, 2), q(-1, 2)])),
        _ => t.flag(false),
    }
    let order = TheoryOrder::quartic(2).expect("N = 2");
    let poly = order.permutohedron();
    let hull = match dual_polytope(&poly).and_then(|d| match d {
        DualSet::Polytope { vertices, .. } => VertexHull::new(&vertices),
        DualSet::WholeHyperplane => Err(Error::InvalidShape("unbounded dual".into())),
    }) {
        Ok(h) => h,
        Err(_) => return t.flag(false),
    };
    *t = t.merge(par_tally(samples, |i, t| {
        let mut rng = rng_from_seed(seed_for(cfg, i));
        let mut x: Vec<f64> = (0..3).map(|_| rng.random_range(-0.75..1.25)).collect();
        x.push(1.0 - x.iter().sum::<f64>());
        let spectral = Spectrum::new(x.clone())
            .and_then(|s| crate::convex::dual_contains_tol(&poly, &s, 1e-9))
            .map(|c| c.contained);
        let geometric = hull.contains(&x, 1e-9);
        match (spectral, geometric) {
            (Ok(a), Ok(b)) => t.flag(a == b),
            _ => t.flag(false),
        }
    }));
}

fn xpovm_pairs(cfg: &SuiteConfig, samples: usize, t: &mut Tally) {
    let order = TheoryOrder::quartic(2).expect("N = 2");
    *t = t.merge(par_tally(samples, |i, t| {
        let sigma = sample_extended_state(&order, seed_for(cfg, i));
        let e = sample_xpovm_element(&order, derive_seed(cfg.seed ^ XPOVM_STREAM, i as u64));
        if let Some(p) = t.outcome(hs_inner(sigma.operator(), e.operator())) {
            t.check(-p);
        }
    }));
}

fn duality_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let mut t = Tally::default();
    simplex_duals(&mut t);
    dual_segments(&mut t);
    cube_cross_validation(cfg, samples, &mut t);
    let pairs = cfg.samples.unwrap_or(10_000);
    xpovm_pairs(cfg, pairs, &mut t);
    t
}

fn lemma1_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let ns = dims(cfg, &[2, 3]);
    par_tally(samples * ns.len(), |i, t| {
        let n = ns[i % ns.len()];
        let m = random_cptp(n, seed_for(cfg, 2 * i));
        let c = classify(&m);
        t.flag(c.cp && c.trace_preserving);
        let tm = classical_reduction(&m);
        t.flag(tm.iter().all(|&x| x >= -crate::EXACT_TOL));
        t.check(column_stochastic_defect(&tm));

        let b = random_bistochastic(n, seed_for(cfg, 2 * i + 1));
        t.flag(classify(&b).bistochastic);
        let tb = classical_reduction(&b);
        t.flag(tb.iter().all(|&x| x >= -crate::EXACT_TOL));
        t.check(column_stochastic_defect(&tb));
        t.check(row_stochastic_defect(&tb));
    })
}

fn identity_defect(a: &HermitianOperator) -> f64 {
    max_abs_diff(a.as_matrix(), &nalgebra::DMatrix::identity(a.dim(), a.dim()))
}

fn cp_violation(m: &QuantumMap) -> f64 {
    m.choi().min_eigenvalue().map_or(STRUCTURAL_VIOLATION, |l| -l)
}

fn lemma3_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let ns = dims(cfg, &[2]);
    par_tally(samples * ns.len(), |i, t| {
        let n = ns[i % ns.len()];
        let g = random_cptp_supermap(n, seed_for(cfg, 2 * i));
        t.flag(g.is_cp() && g.is_trace_preserving());
        let psi = reduce_supermap(&g);
        t.check(cp_violation(&psi));
        t.check(identity_defect(&psi.output_trace()));

        let b = random_bistochastic_supermap(n, seed_for(cfg, 2 * i + 1));
        t.flag(b.is_cp() && b.is_trace_preserving() && b.is_unital());
        let phi = reduce_supermap(&b);
        t.check(cp_violation(&phi));
        t.check(identity_defect(&phi.output_trace()));
        t.check(identity_defect(&phi.input_trace()));
    })
}

fn lemma5_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    par_tally(samples, |i, t| {
        let mut rng = rng_from_seed(seed_for(cfg, i));
        let d = cfg.n.unwrap_or(2 + i % 8);
        let rho = crate::random::density_with(d, &mut rng);
        let b = random_hermitian(d, &mut rng);
        let (Some(p), Some(qs)) = (t.outcome(spectrum(&rho)), t.outcome(spectrum(&b))) else { return };
        let p = Spectrum::new(p.values().iter().map(|x| x.max(0.0)).collect()).expect("finite");
        let Some((lo, hi)) = t.outcome(trace_bounds(&p, &qs)) else { return };
        if let Some(v) = t.outcome(hs_inner(&rho, &b)) {
            t.check(lo - v);
            t.check(v - hi);
        }
        let u = haar_unitary(d, &mut rng);
        let Some((a, low, high)) = t.outcome(aligned_operators(&p, &qs, &u)) else { return };
        if let (Some(x), Some(y)) = (t.outcome(hs_inner(&a, &low)), t.outcome(hs_inner(&a, &high))) {
            t.check((x - lo).abs());
            t.check((y - hi).abs());
        }
    })
}

fn prop3_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let ns = dims(cfg, &[2, 3, 4]);
    par_tally(samples, |i, t| {
        let n = ns[i % ns.len()];
        let mut rng = rng_from_seed(seed_for(cfg, i));
        let p = random_probability(n, &mut rng);
        let u = haar_unitary(n, &mut rng);
        let Some(rotated) = t.outcome(HermitianOperator::diagonal(&p).conjugate_by(&u)) else { return };
        let (x, y) = (Spectrum::new(diagonal(&rotated)), Spectrum::new(p));
        match (x, y) {
            (Ok(x), Ok(y)) => t.check(majorization_violation(&x, &y)),
            _ => t.flag(false),
        }
    })
}

fn prop4_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let ns = dims(cfg, &[2, 3]);
    par_tally(samples, |i, t| {
        let n = ns[i % ns.len()];
        let mut rng = rng_from_seed(seed_for(cfg, i));
        let rho = crate::random::density_with(n, &mut rng);
        let u = haar_unitary(n * n, &mut rng);
        let lifted = tensor_product(&rho, &HermitianOperator::maximally_mixed(n)).conjugate_by(&u);
        let order = TheoryOrder::quartic(n).expect("positive");
        let Some(reduced) = t.outcome(lifted.and_then(|l| reduce_operator(&l, &order))) else { return };
        match (spectrum(&reduced), spectrum(&rho)) {
            (Ok(x), Ok(y)) => t.check(majorization_violation(&x, &y)),
            _ => t.flag(false),
        }
    })
}

fn contraction_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let ns = dims(cfg, &[2, 3]);
    par_tally(samples * ns.len(), |i, t| {
        let n = ns[i % ns.len()];
        let mut rng = rng_from_seed(seed_for(cfg, i));
        let rho = crate::random::density_with(n, &mut rng);
        let omega = crate::random::density_with(n, &mut rng);
        let Some(c) = t.outcome(contraction_map(&rho)) else { return };
        if let Some(out) = t.outcome(c.apply(&omega)) {
            t.check(hs_distance(out.as_matrix(), rho.as_matrix()));
        }
        t.check(hs_distance(map_effect(&c).as_matrix(), rho.as_matrix()));
        t.check(hs_distance(map_effect_from_state(&c).as_matrix(), rho.as_matrix()));
    })
}

fn roundtrip_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let ns = dims(cfg, &[2, 3]);
    let psi_plus: Vec<HermitianOperator> =
        (0..=ns.iter().copied().max().unwrap_or(2)).map(|n| HermitianOperator::projector(&max_entangled(n.max(1)))).collect();
    par_tally(samples, |i, t| {
        let n = ns[i % ns.len()];
        let mut rng = rng_from_seed(seed_for(cfg, i));
        let m = ComplexMatrix::from_matrix(random_matrix(n * n, n * n, &mut rng)).expect("finite");
        match reshuffle(&m).and_then(|r| reshuffle(&r)) {
            Ok(back) => t.flag(back == m),
            Err(_) => t.flag(false),
        }

        let order = TheoryOrder::quartic(n).expect("positive");
        let sigma = sample_extended_state(&order, seed_for(cfg, i));
        let Some(map) = t.outcome(map_from_state(sigma.operator())) else { return };
        let back = jamiolkowski_state(&map);
        if n.is_power_of_two() {
            t.flag(&back == sigma.operator());
            t.flag(map_from_state(&back).ok().as_ref() == Some(&map));
        } else {
            t.check(max_abs_diff(back.as_matrix(), sigma.operator().as_matrix()));
        }

        let id = &psi_plus[n];
        for out in [
            crate::supermaps::compose_states(sigma.operator(), id),
            crate::supermaps::compose_states(id, sigma.operator()),
        ] {
            if let Some(out) = t.outcome(out) {
                t.check(max_abs_diff(out.as_matrix(), sigma.operator().as_matrix()));
            }
        }
    })
}

fn entropy_orders(cfg: &SuiteConfig) -> Vec<TheoryOrder> {
    if cfg.n.is_some() || cfg.m.is_some() {
        return vec![TheoryOrder::new(cfg.n.unwrap_or(2), cfg.m.unwrap_or(1)).expect("positive N")];
    }
    [(2, 1), (3, 1), (2, 2)]
        .into_iter()
        .map(|(n, m)| TheoryOrder::new(n, m).expect("positive N"))
        .collect()
}

fn entropy_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let orders = entropy_orders(cfg);
    par_tally(samples, |i, t| {
        let order = orders[i % orders.len()];
        let ln_n = (order.n() as f64).ln();
        let m = order.m() as f64;
        let sigma = sample_extended_state(&order, seed_for(cfg, i));
        if let Some(s) = t.outcome(von_neumann_entropy(sigma.operator())) {
            t.check(m * ln_n - s);
            t.check(s - (m + 1.0) * ln_n);
        }
        let extremal = sample_extended_state_k(&order, 1, derive_seed(cfg.seed ^ XPOVM_STREAM, i as u64));
        if let Some(g) = t.outcome(gauged_entropy(&extremal)) {
            t.check(g.abs());
        }
    })
}

fn membership_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let mut t = Tally::default();
    for (n, want) in [(2, 6), (3, 84)] {
        let poly = TheoryOrder::quartic(n).expect("positive").permutohedron();
        t.flag(perm_vertices(&poly).map(|v| v.len()) == Ok(want));
    }
    let orders = entropy_orders(cfg);
    let sampled = par_tally(samples, |i, t| {
        let order = orders[i % orders.len()];
        let sigma = sample_extended_state(&order, seed_for(cfg, i));
        match certify_state(sigma.operator(), &order, false) {
            Ok(c) => {
                t.flag(c.is_extended_state);
                t.check(-c.majorization_slack);
                t.check((c.trace - 1.0).abs());
            }
            Err(_) => t.flag(false),
        }
        t.flag(is_quantum_state(&reduce_state(&sigma), false));
        let e = sample_xpovm_element(&order, derive_seed(cfg.seed ^ XPOVM_STREAM, i as u64));
        t.flag(is_xpovm_element(e.operator(), &order).unwrap_or(false));

        let n = order.n();
        let mut rng = rng_from_seed(derive_seed(cfg.seed, (samples + i) as u64));
        let rho = crate::random::density_with(n, &mut rng);
        if let Some(s) = t.outcome(extend_product(&rho, &order)) {
            t.check(max_abs_diff(reduce_state(&s).as_matrix(), rho.as_matrix()));
        }
        let q0 = TheoryOrder::quantum(n).expect("positive");
        let h = random_hermitian(n, &mut rng).scaled(0.5);
        let shifted = HermitianOperator::from_matrix(
            h.as_matrix() + nalgebra::DMatrix::identity(n, n) * crate::Complex64::new(0.4, 0.0),
        )
        .expect("Hermitian");
        t.flag(is_xpovm_element(&shifted, &q0).ok() == Some(is_povm_element(&shifted)));
        let candidate = if shifted.trace() > 0.0 { shifted.scaled(1.0 / shifted.trace()) } else { rho };
        t.flag(is_extended_state(&candidate, &q0, false).ok() == Some(is_quantum_state(&candidate, false)));
    });
    t.merge(sampled)
}

fn witnesses_suite(cfg: &SuiteConfig, samples: usize) -> Tally {
    let mut t = Tally::default();
    let n = cfg.n.unwrap_or(2);
    match classical_smoke_witness() {
        Ok(w) => t.check((w.gap - 1.0).abs()),
        Err(_) => t.flag(false),
    }
    let best = best_quartic_trial(n, cfg.seed, samples.max(1));
    t.check(WITNESS_THRESHOLD - best.1);
    let order = TheoryOrder::quartic(n).expect("positive");
    let control = par_tally(100, |i, t| {
        let g = product_supermap(&random_cptp(n, derive_seed(cfg.seed, i as u64)));
        let rho = random_density(n, derive_seed(cfg.seed ^ XPOVM_STREAM, i as u64)).expect("positive dim");
        let Some(sigma) = t.outcome(extend_product(&rho, &order)) else { return };
        if let Some(p) = t.outcome(hyperdecohere_paths(&g, &sigma)) {
            t.check(p.gap);
        }
    });
    t.merge(control)
}

/// Which commuting diagram a witness breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diagram {
    Classical,
    Quartic,
}

impl FromStr for Diagram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Diagram::Classical),
            "quartic" => Ok(Diagram::Quartic),
            _ => Err(Error::UnknownName { kind: "diagram", name: s.to_string() }),
        }
    }
}

/// `p′ = diag Ψ(ρ)` against `p″ = T(Ψ) diag ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalWitness {
    pub psi: QuantumMap,
    pub rho: HermitianOperator,
    pub p_prime: Vec<f64>,
    pub p_doubleprime: Vec<f64>,
    pub gap: f64,
}

/// `ρ′ = Tr_{A'} Γ(σ)` against `ρ″ = Ψ_Γ(Tr_{A'} σ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticWitness {
    pub sigma: ExtendedState,
    pub gamma: SuperMap,
    pub rho_prime: HermitianOperator,
    pub rho_doubleprime: HermitianOperator,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Classical(ClassicalWitness),
    Quartic(QuarticWitness),
}

impl Witness {
    pub fn gap(&self) -> f64 {
        match self {
            Witness::Classical(w) => w.gap,
            Witness::Quartic(w) => w.gap,
        }
    }
}

pub fn classical_paths(psi: &QuantumMap, rho: &HermitianOperator) -> Result<ClassicalWitness> {
    let p_prime = diagonal(&psi.apply(rho)?);
    let p_doubleprime: Vec<f64> = (classical_reduction(psi) * DVector::from_vec(diagonal(rho))).iter().copied().collect();
    let gap = p_prime.iter().zip(&p_doubleprime).map(|(a, b)| (a - b).abs()).sum();
    Ok(ClassicalWitness { psi: psi.clone(), rho: rho.clone(), p_prime, p_doubleprime, gap })
}

/// Hadamard channel on `|+⟩`: `p′ = (1, 0)`, `p″ = (1/2, 1/2)`, gap 1.
pub fn classical_smoke_witness() -> Result<ClassicalWitness> {
    let psi = QuantumMap::from_kraus(&KrausSet::unitary(&crate::hermitian::hadamard())?);
    classical_paths(&psi, &HermitianOperator::projector(&uniform_superposition(2)))
}

fn quartic_trial(n: usize, seed: u64, i: usize) -> (SuperMap, ExtendedState) {
    let order = TheoryOrder::quartic(n).expect("positive");
    let gamma = random_bistochastic_supermap(n, derive_seed(seed, 2 * i as u64));
    let sigma = sample_extended_state_k(&order, 1, derive_seed(seed, 2 * i as u64 + 1));
    (gamma, sigma)
}

/// Index and gap of the best trial; ties go to the lower index.
fn best_quartic_trial(n: usize, seed: u64, trials: usize) -> (usize, f64) {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let (g, s) = quartic_trial(n, seed, i);
            (i, hyperdecohere_paths(&g, &s).map_or(0.0, |p| p.gap))
        })
        .reduce(|| (usize::MAX, f64::NEG_INFINITY), |a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
}

/// Largest gap over `trials` seeded draws; fails when no gap clears [`WITNESS_THRESHOLD`].
pub fn find_witness(diagram: Diagram, seed: u64, trials: usize, n: usize) -> Result<Witness> {
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be at least 1".into()));
    }
    let witness = match diagram {
        Diagram::Classical => {
            let mut best = if n == 2 { Some(classical_smoke_witness()?) } else { None };
            let found: Vec<ClassicalWitness> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let psi = random_cptp(n, derive_seed(seed, 2 * i as u64));
                    let rho = random_density(n, derive_seed(seed, 2 * i as u64 + 1))?;
                    classical_paths(&psi, &rho)
                })
                .collect::<Result<_>>()?;
            for w in found {
                if best.as_ref().is_none_or(|b| w.gap > b.gap) {
                    best = Some(w);
                }
            }
            Witness::Classical(best.expect("at least one trial"))
        }
        Diagram::Quartic => {
            let (i, _) = best_quartic_trial(n, seed, trials);
            let (gamma, sigma) = quartic_trial(n, seed, i);
            let p = hyperdecohere_paths(&gamma, &sigma)?;
            Witness::Quartic(QuarticWitness {
                sigma,
                gamma,
                rho_prime: p.rho_prime,
                rho_doubleprime: p.rho_doubleprime,
                gap: p.gap,
            })
        }
    };
    if witness.gap() > WITNESS_THRESHOLD {
        Ok(witness)
    } else {
        Err(Error::NoWitness { best: witness.gap(), threshold: WITNESS_THRESHOLD })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolytopeKind {
    Perm,
    Dual,
}

impl FromStr for PolytopeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perm" => Ok(PolytopeKind::Perm),
            "dual" => Ok(PolytopeKind::Dual),
            _ => Err(Error::UnknownName { kind: "polytope", name: s.to_string() }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::UnknownName { kind: "format", name: s.to_string() }),
        }
    }
}

/// Vertices of the quartic permutohedron or of its dual for `N ∈ {2, 3}`,
/// sorted in descending lexicographic order.
pub fn polytope_vertices(n: usize, which: PolytopeKind) -> Result<Vec<Vec<f64>>> {
    if !(2..=3).contains(&n) {
        return Err(Error::OutOfRange(format!("polytope emission supports N = 2 or 3, got {n}")));
    }
    let order = TheoryOrder::quartic(n)?;
    let rows = match which {
        PolytopeKind::Perm => perm_vertices(&order.permutohedron())?,
        PolytopeKind::Dual if order.dim() <= crate::convex::MAX_DUAL_DIM => match dual_polytope(&order.permutohedron())? {
            DualSet::Polytope { vertices, .. } => vertices,
            DualSet::WholeHyperplane => unreachable!("two-level generator is not uniform"),
        },
        PolytopeKind::Dual => to_f64_rows(&two_level_dual_vertices(order.ancilla_dim(), order.dim())?),
    };
    Ok(sorted_rows(rows.into_iter().map(|r| r.into_iter().map(|x| x + 0.0).collect()).collect()))
}

#[derive(Serialize)]
struct PolytopeRecord<'a> {
    n: usize,
    which: &'a str,
    count: usize,
    vertices: &'a [Vec<f64>],
}

pub fn emit_polytope(n: usize, which: PolytopeKind, format: OutputFormat) -> Result<String> {
    let rows = polytope_vertices(n, which)?;
    Ok(match format {
        OutputFormat::Json => {
            let which = match which {
                PolytopeKind::Perm => "perm",
                PolytopeKind::Dual => "dual",
            };
            let record = PolytopeRecord { n, which, count: rows.len(), vertices: &rows };
            serde_json::to_string(&record).expect("finite vertices") + "\n"
        }
        OutputFormat::Csv => {
            let d = rows.first().map_or(0, Vec::len);
            let mut out = (0..d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",") + "\n";
            for r in &rows {
                out += &r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                out.push('\n');
            }
            out
        }
    })
}

/// Per-state verdict of [`validate_states`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub index: usize,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<StateCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn validate_value(index: usize, value: serde_json::Value) -> ValidationRecord {
    let invalid = |error: String| ValidationRecord { index, valid: false, n: None, m: None, certificate: None, error: Some(error) };
    let repr: ExtendedStateRepr = match serde_json::from_value(value) {
        Ok(r) => r,
        Err(e) => return invalid(e.to_string()),
    };
    let certificate = TheoryOrder::new(repr.n, repr.m).and_then(|o| certify_state(&repr.operator, &o, !repr.normalized));
    match certificate {
        Ok(c) => ValidationRecord {
            index,
            valid: c.is_extended_state,
            n: Some(repr.n),
            m: Some(repr.m),
            certificate: Some(c),
            error: None,
        },
        Err(e) => ValidationRecord { n: Some(repr.n), m: Some(repr.m), ..invalid(e.to_string()) },
    }
}

/// Validates a JSON array of states, a single state object, or newline-delimited states.
pub fn validate_states(text: &str) -> Result<Vec<ValidationRecord>> {
    let trimmed = text.trim_start();
    let values: Vec<serde_json::Value> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| Error::InvalidShape(e.to_string()))?
    } else {
        serde_json::Deserializer::from_str(trimmed)
            .into_iter::<serde_json::Value>()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidShape(e.to_string()))?
    };
    Ok(values.into_iter().enumerate().map(|(i, v)| validate_value(i, v)).collect())
}
