//! Brute-force evaluation of the per-subsystem entanglement straight from its definition:
//! measure the rest of the system with a rank-one projective measurement, record how much
//! each local observable's expectation value moves, maximize over normalized traceless
//! observables and average over outcomes. Nothing here uses the closed form, so it serves
//! as an independent check of [`crate::measure`].

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::basis::HermitianBasis;
use crate::error::{GeError, Result};
use crate::linalg::{inner, vec_norm_sqr, ComplexMatrix};
use crate::measure::{ge_purity_form, local_expectations};
use crate::rng;
use crate::state::{checked_total_dim, haar_unitary_with, MultipartiteState, MAX_AMPLITUDES};

/// Outcomes with probability at or below this are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

/// Orthonormality and completeness tolerance for measurement bases.
pub const MEASUREMENT_TOL: f64 = 1e-10;

/// Rank-one projective measurement `{I^(j) ⊗ |chi_i><chi_i|}` on everything except subsystem `j`.
///
/// Rest-space vectors are indexed lexicographically over the remaining subsystems in their
/// original order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMeasurement {
    dims: Vec<usize>,
    excluded: usize,
    rest_basis: Vec<Vec<C64>>,
}

impl ProjectiveMeasurement {
    /// Checks that the vectors are orthonormal on the rest space. An incomplete set is
    /// accepted here; [`ProjectiveMeasurement::completeness_defect`] reports it.
    pub fn new(dims: Vec<usize>, excluded: usize, rest_basis: Vec<Vec<C64>>) -> Result<Self> {
        let rest = rest_dim(&dims, excluded)?;
        if rest_basis.is_empty() || rest_basis.len() > rest {
            return Err(GeError::invalid(format!(
                "need between 1 and {rest} rest vectors, got {}",
                rest_basis.len()
            )));
        }
        for (i, chi) in rest_basis.iter().enumerate() {
            if chi.len() != rest {
                return Err(GeError::invalid(format!(
                    "rest vector {i} has length {}, expected {rest}",
                    chi.len()
                )));
            }
            for (k, other) in rest_basis.iter().enumerate().take(i + 1) {
                let target = if i == k { 1.0 } else { 0.0 };
                let dev = (inner(other, chi) - target).norm();
                if dev > MEASUREMENT_TOL {
                    return Err(GeError::invariant(format!(
                        "rest vectors {k} and {i} deviate from orthonormality by {dev:e}"
                    )));
                }
            }
        }
        Ok(Self {
            dims,
            excluded,
            rest_basis,
        })
    }

    /// Computational basis of the rest space.
    pub fn computational(dims: &[usize], excluded: usize) -> Result<Self> {
        let rest = rest_dim(dims, excluded)?;
        let basis = (0..rest)
            .map(|i| {
                let mut v = vec![C64::new(0.0, 0.0); rest];
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::new(dims.to_vec(), excluded, basis)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn rest_basis(&self) -> &[Vec<C64>] {
        &self.rest_basis
    }

    /// Largest entrywise deviation of `sum_i |chi_i><chi_i|` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let rest = self.rest_basis[0].len();
        let mut sum = ComplexMatrix::zeros(rest, rest);
        for chi in &self.rest_basis {
            sum = &sum + &ComplexMatrix::outer(chi, chi);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(rest))
    }
}

fn rest_dim(dims: &[usize], excluded: usize) -> Result<usize> {
    let total = checked_total_dim(dims)?;
    if dims.len() < 2 {
        return Err(GeError::invalid(
            "a measurement on the rest needs at least two subsystems",
        ));
    }
    let d = *dims
        .get(excluded)
        .ok_or_else(|| GeError::invalid(format!("subsystem index {excluded} out of range")))?;
    Ok(total / d)
}

/// Haar-random orthonormal basis of the rest space.
pub fn random_projective_measurement(dims: &[usize], excluded: usize, seed: u64) -> Result<ProjectiveMeasurement> {
    let rest = rest_dim(dims, excluded)?;
    if (rest as u128) * (rest as u128) > MAX_AMPLITUDES as u128 {
        return Err(GeError::ResourceLimit {
            requested: (rest as u128) * (rest as u128),
            limit: MAX_AMPLITUDES as u128,
        });
    }
    let u = haar_unitary_with(&mut rng::seeded(seed), rest);
    ProjectiveMeasurement::new(dims.to_vec(), excluded, (0..rest).map(|c| u.column(c)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub probability: f64,
    pub post_state: MultipartiteState,
}

/// Subsystem `j` moved to the front: `(perm, amplitudes as D_j x rest, D_j, rest)`.
fn bring_to_front(state: &MultipartiteState, j: usize) -> Result<(Vec<usize>, Vec<C64>, usize, usize)> {
    let perm: Vec<usize> = std::iter::once(j)
        .chain((0..state.num_subsystems()).filter(|&k| k != j))
        .collect();
    let moved = state.permute_subsystems(&perm)?;
    let d = state.dims()[j];
    let rest = state.total_dim() / d;
    Ok((perm, moved.amplitudes().to_vec(), d, rest))
}

/// Inverse of [`bring_to_front`] applied to new amplitudes.
fn restore(state: &MultipartiteState, perm: &[usize], amplitudes: Vec<C64>) -> Result<MultipartiteState> {
    let front_dims: Vec<usize> = perm.iter().map(|&p| state.dims()[p]).collect();
    let mut inverse = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inverse[p] = k;
    }
    MultipartiteState::new(front_dims, amplitudes)?.permute_subsystems(&inverse)
}

/// Collapses `state` under each projector of `m`, dropping outcomes with `p <= PRUNE_TOL`.
pub fn apply_measurement(state: &MultipartiteState, m: &ProjectiveMeasurement) -> Result<Vec<MeasurementOutcome>> {
    if state.dims() != m.dims() {
        return Err(GeError::invalid(format!(
            "measurement is for dims {:?}, state has {:?}",
            m.dims(),
            state.dims()
        )));
    }
    let (perm, psi, d, rest) = bring_to_front(state, m.excluded)?;
    let mut outcomes = Vec::new();
    for (index, chi) in m.rest_basis.iter().enumerate() {
        // phi_a = <chi| psi_a>, the unnormalized state left on subsystem j
        let phi: Vec<C64> = (0..d).map(|a| inner(chi, &psi[a * rest..(a + 1) * rest])).collect();
        let probability = vec_norm_sqr(&phi);
        if probability <= PRUNE_TOL {
            continue;
        }
        let scale = 1.0 / probability.sqrt();
        let post: Vec<C64> = phi
            .iter()
            .flat_map(|&f| chi.iter().map(move |&c| f * c * scale))
            .collect();
        outcomes.push(MeasurementOutcome {
            index,
            probability,
            post_state: restore(state, &perm, post)?,
        });
    }
    Ok(outcomes)
}

/// A local observable in the normalized set: Hermitian, traceless, `Tr(O^2) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableElement {
    subsystem: usize,
    local_operator: ComplexMatrix,
}

impl ObservableElement {
    pub fn new(subsystem: usize, local_operator: ComplexMatrix) -> Result<Self> {
        if !local_operator.is_square() || !local_operator.is_hermitian() {
            return Err(GeError::invariant("observable must be a square Hermitian matrix"));
        }
        let tr = local_operator.trace().norm();
        if tr > 1e-12 {
            return Err(GeError::invariant(format!("observable has trace {tr:e}, expected 0")));
        }
        let norm = local_operator.trace_product(&local_operator).re;
        if (norm - 1.0).abs() > 1e-10 {
            return Err(GeError::invariant(format!(
                "observable has Tr(O^2) = {norm}, expected 1"
            )));
        }
        Ok(Self {
            subsystem,
            local_operator,
        })
    }

    /// `O = sum_k o_k A_k` for a unit coefficient vector.
    pub fn from_coefficients(subsystem: usize, basis: &HermitianBasis, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(GeError::invalid("coefficient count does not match the basis"));
        }
        Self::new(subsystem, basis.combine(coefficients))
    }

    pub fn subsystem(&self) -> usize {
        self.subsystem
    }

    pub fn local_operator(&self) -> &ComplexMatrix {
        &self.local_operator
    }
}

/// `(Tr(rho O) - Tr(rho_i O))^2` for an arbitrary Hermitian local operator on subsystem `j`.
/// No normalization is imposed, so scaling and shifting `O` can be probed directly.
pub fn r_value_for_operator(
    state: &MultipartiteState,
    outcome: &MeasurementOutcome,
    j: usize,
    op: &ComplexMatrix,
) -> Result<f64> {
    let before = state.reduced_density(&[j])?.expectation(op).re;
    let after = outcome.post_state.reduced_density(&[j])?.expectation(op).re;
    Ok((before - after).powi(2))
}

pub fn r_value(state: &MultipartiteState, outcome: &MeasurementOutcome, obs: &ObservableElement) -> Result<f64> {
    r_value_for_operator(state, outcome, obs.subsystem, &obs.local_operator)
}

/// Exact maximum of the R-value over unit observables: `|<A>_{rho_i} - <A>_rho|^2`.
pub fn max_r_exact(
    state: &MultipartiteState,
    outcome: &MeasurementOutcome,
    j: usize,
    basis: &HermitianBasis,
) -> Result<f64> {
    let before = local_expectations(state, j, basis)?;
    let after = local_expectations(&outcome.post_state, j, basis)?;
    Ok(before.iter().zip(&after).map(|(b, a)| (a - b).powi(2)).sum())
}

/// Largest R-value over `samples` observables drawn uniformly from the unit sphere of basis
/// coefficients.
pub fn max_r_montecarlo(
    state: &MultipartiteState,
    outcome: &MeasurementOutcome,
    j: usize,
    basis: &HermitianBasis,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(GeError::invalid("need at least one sample"));
    }
    let rho = state.reduced_density(&[j])?;
    let rho_i = outcome.post_state.reduced_density(&[j])?;
    if rho.dim() != basis.dim() {
        return Err(GeError::invalid("basis dimension does not match the subsystem"));
    }
    let mut rng = rng::seeded(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let o = rng::unit_sphere(&mut rng, basis.len());
        let obs = ObservableElement::from_coefficients(j, basis, &o)?;
        let delta = rho.expectation(obs.local_operator()).re - rho_i.expectation(obs.local_operator()).re;
        best = best.max(delta * delta);
    }
    Ok(best)
}

/// `sum_i p_i max_O R_O` for one complete measurement.
pub fn epsilon_via_measurement(
    state: &MultipartiteState,
    j: usize,
    m: &ProjectiveMeasurement,
    basis: &HermitianBasis,
) -> Result<f64> {
    if m.excluded() != j {
        return Err(GeError::invalid(format!(
            "measurement excludes subsystem {}, not {j}",
            m.excluded()
        )));
    }
    let defect = m.completeness_defect();
    if defect > MEASUREMENT_TOL {
        return Err(GeError::invalid(format!(
            "measurement is incomplete (defect {defect:e})"
        )));
    }
    let mut total = 0.0;
    for outcome in apply_measurement(state, m)? {
        total += outcome.probability * max_r_exact(state, &outcome, j, basis)?;
    }
    Ok(total)
}

/// `sum_i p_i <A>_{rho_i}` over the outcomes of `m`.
pub fn mean_post_expectations(
    state: &MultipartiteState,
    m: &ProjectiveMeasurement,
    basis: &HermitianBasis,
) -> Result<Vec<f64>> {
    let mut mean = vec![0.0; basis.len()];
    for outcome in apply_measurement(state, m)? {
        let v = local_expectations(&outcome.post_state, m.excluded(), basis)?;
        for (acc, x) in mean.iter_mut().zip(v) {
            *acc += outcome.probability * x;
        }
    }
    Ok(mean)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoccTrial {
    pub measured_subsystem: usize,
    pub outcome_probabilities: Vec<f64>,
    pub input_ge: f64,
    pub mean_output_ge: f64,
}

impl LoccTrial {
    /// Positive when the protocol increased entanglement on average.
    pub fn excess(&self) -> f64 {
        self.mean_output_ge - self.input_ge
    }
}

/// One-round LOCC protocol: a Haar-random rank-one measurement on one randomly chosen
/// subsystem, then outcome-dependent Haar-random unitaries on every other subsystem.
pub fn locc_monotonicity_trial(state: &MultipartiteState, seed: u64) -> Result<LoccTrial> {
    let input_ge = ge_purity_form(state)?;
    let mut rng = rng::seeded(seed);
    let n = state.num_subsystems();
    let k = rng.random_range(0..n);
    let (perm, psi, d, rest) = bring_to_front(state, k)?;
    let u = haar_unitary_with(&mut rng, d);

    let mut probabilities = Vec::with_capacity(d);
    let mut mean_output_ge = 0.0;
    for i in 0..d {
        let basis_vec = u.column(i);
        // phi_r = sum_a conj(u_a) psi[a, r]
        let mut phi = vec![C64::new(0.0, 0.0); rest];
        for (a, ua) in basis_vec.iter().enumerate() {
            for (r, p) in phi.iter_mut().enumerate() {
                *p += ua.conj() * psi[a * rest + r];
            }
        }
        let p = vec_norm_sqr(&phi);
        probabilities.push(p);
        if p <= PRUNE_TOL {
            continue;
        }
        let scale = 1.0 / p.sqrt();
        let post: Vec<C64> = basis_vec
            .iter()
            .flat_map(|&ua| phi.iter().map(move |&f| ua * f * scale))
            .collect();
        let mut outcome = restore(state, &perm, post)?;
        for j in (0..n).filter(|&j| j != k) {
            let v = haar_unitary_with(&mut rng, state.dims()[j]);
            outcome = outcome.apply_local(j, &v)?;
        }
        mean_output_ge += p * ge_purity_form(&outcome)?;
    }
    Ok(LoccTrial {
        measured_subsystem: k,
        outcome_probabilities: probabilities,
        input_ge,
        mean_output_ge,
    })
}
