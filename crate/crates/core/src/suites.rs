//! Seeded property suites behind `gentangle verify`. Trial `t` of a run with base seed `s`
//! uses `derive_seed(s, t)`, which is reported so a failing trial can be replayed alone.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::basis::{
    gell_mann_basis, gram_schmidt_orthonormalize, spin_half_basis, spin_one_candidates, HermitianBasis,
};
use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::measure::{epsilon_subsystem, general_entanglement, local_expectations};
use crate::oracle::{
    apply_measurement, epsilon_via_measurement, locc_monotonicity_trial, max_r_exact, max_r_montecarlo,
    random_projective_measurement,
};
use crate::rng::{self, derive_seed};
use crate::state::{haar_unitary_with, random_state_with, MultipartiteState};

pub const MIXED_DIMS: [&[usize]; 5] = [&[2, 2], &[2, 3], &[3, 3], &[2, 2, 2], &[2, 3, 2]];
pub const LOCC_DIMS: [&[usize]; 3] = [&[2, 2], &[2, 3], &[2, 2, 2]];

/// Monte-Carlo observable samples per outcome in the oracle-max suite.
pub const MC_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemma,
    LuInvariance,
    MeasurementIndependence,
    Locc,
    OracleMax,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Lemma,
        Suite::LuInvariance,
        Suite::MeasurementIndependence,
        Suite::Locc,
        Suite::OracleMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma => "lemma",
            Suite::LuInvariance => "lu-invariance",
            Suite::MeasurementIndependence => "measurement-independence",
            Suite::Locc => "locc",
            Suite::OracleMax => "oracle-max",
        }
    }

    /// Pass threshold on the per-trial defect.
    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Lemma | Suite::LuInvariance | Suite::Locc => 1e-9,
            Suite::MeasurementIndependence => 1e-8,
            // relative gap between the Monte-Carlo and exact maxima
            Suite::OracleMax => 0.02,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL.into_iter().find(|suite| suite.name() == s).ok_or_else(|| {
            format!(
                "unknown suite {s:?}; expected one of lemma, lu-invariance, measurement-independence, locc, oracle-max"
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub defect: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_defect: f64,
    pub failures: usize,
    pub passed: bool,
    pub results: Vec<TrialResult>,
}

/// Random Hermitian matrix with unit trace (not necessarily positive).
pub fn random_unit_trace_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| rng::complex_gaussian(rng));
    let h = (&g + &g.adjoint()).scale_real(0.5);
    let shift = (1.0 - h.trace().re) / d as f64;
    &h + &ComplexMatrix::identity(d).scale_real(shift)
}

pub fn random_local_unitaries<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Vec<ComplexMatrix> {
    dims.iter().map(|&d| haar_unitary_with(rng, d)).collect()
}

/// `|sum_k Tr(sigma A_k)^2 - (Tr sigma^2 - 1/D)|`
pub fn lemma_defect(sigma: &ComplexMatrix, basis: &HermitianBasis) -> f64 {
    let d = basis.dim() as f64;
    let lhs: f64 = basis
        .operators()
        .iter()
        .map(|a| sigma.trace_product(a).re.powi(2))
        .sum();
    let rhs = sigma.trace_product(sigma).re - 1.0 / d;
    (lhs - rhs).abs()
}

fn lemma_trial(seed: u64, trial: usize) -> Result<f64> {
    let mut rng = rng::seeded(seed);
    let d = 2 + trial % 4;
    let sigma = random_unit_trace_hermitian(&mut rng, d);
    let mut bases = vec![gell_mann_basis(d)?];
    match d {
        2 => bases.push(spin_half_basis()),
        3 => bases.push(gram_schmidt_orthonormalize(&spin_one_candidates())?),
        _ => {}
    }
    Ok(bases.iter().map(|b| lemma_defect(&sigma, b)).fold(0.0, f64::max))
}

fn lu_trial(seed: u64, trial: usize) -> Result<f64> {
    let mut rng = rng::seeded(seed);
    let dims = MIXED_DIMS[trial % MIXED_DIMS.len()];
    let state = random_state_with(&mut rng, dims)?;
    let us = random_local_unitaries(&mut rng, dims);
    let rotated = state.apply_local_unitaries(&us)?;
    let a = general_entanglement(&state)?;
    let b = general_entanglement(&rotated)?;
    Ok((a.ge_normalized - b.ge_normalized)
        .abs()
        .max((a.ge_via_purity - b.ge_via_purity).abs()))
}

/// Largest oracle-vs-closed-form gap over every subsystem, one random measurement each.
pub fn measurement_independence_defect(state: &MultipartiteState, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..state.num_subsystems() {
        let basis = gell_mann_basis(state.dims()[j])?;
        let m = random_projective_measurement(state.dims(), j, derive_seed(seed, j as u64))?;
        let oracle = epsilon_via_measurement(state, j, &m, &basis)?;
        let closed = epsilon_subsystem(state, j)?.epsilon_raw;
        worst = worst.max((oracle - closed).abs());
    }
    Ok(worst)
}

fn measurement_trial(seed: u64, trial: usize) -> Result<f64> {
    let dims = MIXED_DIMS[trial % MIXED_DIMS.len()];
    let state = random_state_with(&mut rng::seeded(seed), dims)?;
    measurement_independence_defect(&state, derive_seed(seed, 1))
}

fn locc_trial(seed: u64, trial: usize) -> Result<f64> {
    let dims = LOCC_DIMS[trial % LOCC_DIMS.len()];
    let state = random_state_with(&mut rng::seeded(seed), dims)?;
    let t = locc_monotonicity_trial(&state, derive_seed(seed, 1))?;
    Ok(t.excess().max(0.0))
}

/// Relative gap `(exact - mc) / exact` of the Monte-Carlo maximum on each outcome of a random
/// two-qubit measurement, or infinity when the Monte-Carlo value exceeds the exact maximum.
pub fn oracle_max_gap(state: &MultipartiteState, measurement_seed: u64, mc_seed: u64, samples: usize) -> Result<f64> {
    let basis = gell_mann_basis(state.dims()[0])?;
    let m = random_projective_measurement(state.dims(), 0, measurement_seed)?;
    let mut worst: f64 = 0.0;
    for (i, outcome) in apply_measurement(state, &m)?.iter().enumerate() {
        let exact = max_r_exact(state, outcome, 0, &basis)?;
        let mc = max_r_montecarlo(state, outcome, 0, &basis, samples, derive_seed(mc_seed, i as u64))?;
        if mc > exact + 1e-10 {
            return Ok(f64::INFINITY);
        }
        if exact > 1e-12 {
            worst = worst.max((exact - mc) / exact);
        }
    }
    Ok(worst)
}

fn oracle_max_trial(seed: u64, tolerance: f64) -> Result<f64> {
    let state = random_state_with(&mut rng::seeded(seed), &[2, 2])?;
    let gap = oracle_max_gap(&state, derive_seed(seed, 1), derive_seed(seed, 2), MC_SAMPLES)?;
    if gap.is_finite() && gap >= tolerance {
        // one reseeded retry for the statistical closeness check
        return oracle_max_gap(&state, derive_seed(seed, 1), derive_seed(seed, 3), MC_SAMPLES);
    }
    Ok(gap)
}

pub fn run_trial(suite: Suite, seed: u64, trial: usize, tolerance: f64) -> Result<f64> {
    match suite {
        Suite::Lemma => lemma_trial(seed, trial),
        Suite::LuInvariance => lu_trial(seed, trial),
        Suite::MeasurementIndependence => measurement_trial(seed, trial),
        Suite::Locc => locc_trial(seed, trial),
        Suite::OracleMax => oracle_max_trial(seed, tolerance),
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64, tolerance: Option<f64>) -> Result<SuiteReport> {
    let tolerance = tolerance.unwrap_or_else(|| suite.default_tolerance());
    let mut results = Vec::with_capacity(trials);
    for trial in 0..trials {
        let trial_seed = derive_seed(seed, trial as u64);
        let defect = run_trial(suite, trial_seed, trial, tolerance)?;
        let passed = match suite {
            Suite::Locc => defect <= tolerance,
            _ => defect < tolerance,
        };
        results.push(TrialResult {
            trial,
            seed: trial_seed,
            defect,
            passed,
        });
    }
    let max_defect = results.iter().map(|r| r.defect).fold(0.0, f64::max);
    let failures = results.iter().filter(|r| !r.passed).count();
    Ok(SuiteReport {
        suite,
        trials,
        seed,
        tolerance,
        max_defect,
        failures,
        passed: failures == 0 && trials > 0,
        results,
    })
}

/// Expectation-value form using the spin-1 Gram-Schmidt basis on every qutrit:
/// `1 - 3/(2N) sum_j |<A^(j)>|^2`.
pub fn spin_one_ge(state: &MultipartiteState) -> Result<f64> {
    let basis = gram_schmidt_orthonormalize(&spin_one_candidates())?;
    let n = state.num_subsystems() as f64;
    let mut total = 0.0;
    for j in 0..state.num_subsystems() {
        total += local_expectations(state, j, &basis)?.iter().map(|x| x * x).sum::<f64>();
    }
    Ok(1.0 - 1.5 / n * total)
}

/// `(|00> + |11> + |22>)/sqrt(3)`
pub fn max_entangled_qutrits() -> MultipartiteState {
    let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
    let z = C64::new(0.0, 0.0);
    MultipartiteState::normalized(vec![3, 3], vec![a, z, z, z, a, z, z, z, a]).expect("valid state")
}
