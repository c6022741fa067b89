//! Closed-form General Entanglement.
//!
//! For subsystem `j` with dimension `D` and local expectation vector `<A>` over an orthonormal
//! traceless Hermitian basis, the per-subsystem entanglement is
//! `eps_j = 1 - 1/D - |<A>|^2`, independent of which measurement is made on the rest of the
//! system. Rescaling by `1 - 1/D` and averaging over subsystems gives
//!
//! ```text
//! E_g = 1 - (1/N) sum_j D_j/(D_j - 1) |<A_j>|^2
//!     = 1 + (1/N) sum_j 1/(D_j - 1) - (1/N) sum_j D_j/(D_j - 1) Tr(rho_j^2)
//! ```
//!
//! Both forms are evaluated and their difference is reported.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::basis::{gell_mann_basis, spin_half_operators, HermitianBasis};
use crate::error::{GeError, Result};
use crate::state::MultipartiteState;

/// Largest imaginary part tolerated in an expectation value of a Hermitian operator.
pub const IMAG_TOL: f64 = 1e-12;

/// A split of `n` subsystems into `block` and its (nonempty) complement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n: usize,
    block: Vec<usize>,
}

impl Bipartition {
    pub fn new(n: usize, block: &[usize]) -> Result<Self> {
        let mut block = block.to_vec();
        block.sort_unstable();
        block.dedup();
        if block.is_empty() || block.len() >= n {
            return Err(GeError::invalid(format!(
                "block {block:?} must be a nonempty proper subset of 0..{n}"
            )));
        }
        if let Some(&j) = block.iter().find(|&&j| j >= n) {
            return Err(GeError::invalid(format!(
                "subsystem {j} out of range for {n} subsystems"
            )));
        }
        Ok(Self { n, block })
    }

    pub fn num_subsystems(&self) -> usize {
        self.n
    }

    /// Sorted subsystem indices of the block.
    pub fn block(&self) -> &[usize] {
        &self.block
    }

    pub fn complement(&self) -> Self {
        let block = (0..self.n).filter(|j| !self.block.contains(j)).collect();
        Self { n: self.n, block }
    }

    /// The representative of `{P, complement(P)}` whose block contains subsystem 0.
    pub fn canonical(&self) -> Self {
        if self.block[0] == 0 {
            self.clone()
        } else {
            self.complement()
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.block[0] == 0
    }

    /// All `2^(n-1) - 1` canonical bipartitions of `n >= 2` subsystems.
    pub fn enumerate(n: usize) -> Vec<Self> {
        if n < 2 {
            return Vec::new();
        }
        let others = n - 1;
        // bit i of mask selects subsystem i + 1; the all-ones mask would leave the complement empty
        (0..(1usize << others) - 1)
            .map(|mask| {
                let block = std::iter::once(0)
                    .chain((0..others).filter(|i| mask >> i & 1 == 1).map(|i| i + 1))
                    .collect();
                Self { n, block }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsystemEntanglement {
    pub index: usize,
    pub dim: usize,
    /// `1 - 1/D - |<A>|^2`, in `[0, 1 - 1/D]`.
    pub epsilon_raw: f64,
    /// `epsilon_raw / (1 - 1/D)`, in `[0, 1]`.
    pub epsilon_normalized: f64,
    /// `|<A>|^2`
    pub expectation_norm_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeReport {
    pub per_subsystem: Vec<SubsystemEntanglement>,
    /// Expectation-value form.
    pub ge_normalized: f64,
    /// Mean of the unrescaled `epsilon_raw`.
    pub ge_raw: f64,
    /// Purity form.
    pub ge_via_purity: f64,
    pub agreement_defect: f64,
    pub genuine: Option<f64>,
}

fn require_multipartite(state: &MultipartiteState) -> Result<()> {
    if state.num_subsystems() < 2 {
        return Err(GeError::invalid("General Entanglement needs at least two subsystems"));
    }
    Ok(())
}

/// `<A_k>` for every basis operator, from the reduced state of subsystem `j`.
pub fn local_expectations(state: &MultipartiteState, j: usize, basis: &HermitianBasis) -> Result<Vec<f64>> {
    let rho = state.reduced_density(&[j])?;
    if basis.dim() != rho.dim() {
        return Err(GeError::invalid(format!(
            "basis acts on dimension {}, subsystem {j} has dimension {}",
            basis.dim(),
            rho.dim()
        )));
    }
    basis
        .operators()
        .iter()
        .map(|a| {
            let v: C64 = rho.expectation(a);
            if v.im.abs() > IMAG_TOL {
                return Err(GeError::invariant(format!("expectation value {v} is not real")));
            }
            Ok(v.re)
        })
        .collect()
}

pub fn epsilon_subsystem_with(
    state: &MultipartiteState,
    j: usize,
    basis: &HermitianBasis,
) -> Result<SubsystemEntanglement> {
    let expectations = local_expectations(state, j, basis)?;
    let d = basis.dim() as f64;
    let norm_sq: f64 = expectations.iter().map(|x| x * x).sum();
    let epsilon_raw = 1.0 - 1.0 / d - norm_sq;
    Ok(SubsystemEntanglement {
        index: j,
        dim: basis.dim(),
        epsilon_raw,
        epsilon_normalized: epsilon_raw / (1.0 - 1.0 / d),
        expectation_norm_sq: norm_sq,
    })
}

/// Per-subsystem entanglement using the generalized Gell-Mann basis.
pub fn epsilon_subsystem(state: &MultipartiteState, j: usize) -> Result<SubsystemEntanglement> {
    let d = *state
        .dims()
        .get(j)
        .ok_or_else(|| GeError::invalid(format!("subsystem index {j} out of range")))?;
    epsilon_subsystem_with(state, j, &gell_mann_basis(d)?)
}

/// Purity form of the normalized measure. Needs no operator basis.
pub fn ge_purity_form(state: &MultipartiteState) -> Result<f64> {
    require_multipartite(state)?;
    let n = state.num_subsystems() as f64;
    let mut offset = 0.0;
    let mut weighted = 0.0;
    for (j, &d) in state.dims().iter().enumerate() {
        let d = d as f64;
        offset += 1.0 / (d - 1.0);
        weighted += d / (d - 1.0) * state.reduced_purity(&[j])?;
    }
    Ok(1.0 + offset / n - weighted / n)
}

/// Evaluates both forms with one supplied basis per subsystem.
pub fn general_entanglement_with(state: &MultipartiteState, bases: &[&HermitianBasis]) -> Result<GeReport> {
    require_multipartite(state)?;
    if bases.len() != state.num_subsystems() {
        return Err(GeError::invalid("need one basis per subsystem"));
    }
    let per_subsystem = bases
        .iter()
        .enumerate()
        .map(|(j, b)| epsilon_subsystem_with(state, j, b))
        .collect::<Result<Vec<_>>>()?;
    let n = per_subsystem.len() as f64;
    let ge_normalized = 1.0
        - per_subsystem
            .iter()
            .map(|s| s.dim as f64 / (s.dim as f64 - 1.0) * s.expectation_norm_sq)
            .sum::<f64>()
            / n;
    let ge_raw = per_subsystem.iter().map(|s| s.epsilon_raw).sum::<f64>() / n;
    let ge_via_purity = ge_purity_form(state)?;
    Ok(GeReport {
        per_subsystem,
        ge_normalized,
        ge_raw,
        ge_via_purity,
        agreement_defect: (ge_normalized - ge_via_purity).abs(),
        genuine: None,
    })
}

pub fn general_entanglement(state: &MultipartiteState) -> Result<GeReport> {
    require_multipartite(state)?;
    let bases = state
        .dims()
        .iter()
        .map(|&d| gell_mann_basis(d))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&HermitianBasis> = bases.iter().collect();
    general_entanglement_with(state, &refs)
}

/// Minimum of `E_g` over the state itself and every two-block regrouping of it.
/// For two subsystems there is nothing to regroup and the value is `E_g`.
pub fn genuine_entanglement(state: &MultipartiteState) -> Result<f64> {
    let mut best = ge_purity_form(state)?;
    if state.num_subsystems() == 2 {
        return Ok(best);
    }
    for p in Bipartition::enumerate(state.num_subsystems()) {
        let merged = state.merge_bipartition(&p)?;
        best = best.min(ge_purity_form(&merged)?);
    }
    Ok(best)
}

/// `1 - (4/N) sum_j |<S^(j)>|^2` for an all-qubit state.
pub fn meyer_wallach(state: &MultipartiteState) -> Result<f64> {
    require_multipartite(state)?;
    if let Some(j) = state.dims().iter().position(|&d| d != 2) {
        return Err(GeError::invalid(format!("subsystem {j} is not a qubit")));
    }
    let spins = spin_half_operators();
    let mut total = 0.0;
    for j in 0..state.num_subsystems() {
        let rho = state.reduced_density(&[j])?;
        total += spins.iter().map(|s| rho.expectation(s).re.powi(2)).sum::<f64>();
    }
    Ok(1.0 - 4.0 / state.num_subsystems() as f64 * total)
}

/// `C = |<psi| sigma_y ⊗ sigma_y |psi*>|` for a two-qubit pure state.
pub fn concurrence_two_qubit(state: &MultipartiteState) -> Result<f64> {
    if state.dims() != [2, 2] {
        return Err(GeError::invalid(format!(
            "concurrence needs dims (2, 2), got {:?}",
            state.dims()
        )));
    }
    let sigma_y = spin_half_operators()[2].scale_real(2.0);
    let yy = sigma_y.kron(&sigma_y);
    let psi = state.amplitudes();
    let conj: Vec<C64> = psi.iter().map(|z| z.conj()).collect();
    let flipped = yy.matvec(&conj);
    Ok(crate::linalg::inner(psi, &flipped).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::spin_half_basis;
    use crate::state::random_pure_state;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn state(dims: &[usize], amps: &[f64]) -> MultipartiteState {
        MultipartiteState::normalized(dims.to_vec(), amps.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap()
    }

    fn bell() -> MultipartiteState {
        state(&[2, 2], &[1.0, 0.0, 0.0, 1.0])
    }

    fn w3() -> MultipartiteState {
        state(&[2, 2, 2], &[0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    }

    fn ghz3() -> MultipartiteState {
        state(&[2, 2, 2], &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    }

    #[test]
    fn bipartition_enumeration() {
        for n in 2..=6 {
            let all = Bipartition::enumerate(n);
            assert_eq!(all.len(), (1 << (n - 1)) - 1);
            assert!(all.iter().all(|p| p.is_canonical() && p.block().len() < n));
            let unique: std::collections::HashSet<_> = all.iter().collect();
            assert_eq!(unique.len(), all.len());
        }
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert!(Bipartition::new(3, &[3]).is_err());
        assert_eq!(Bipartition::new(3, &[1, 2]).unwrap().canonical().block(), &[0]);
    }

    #[test]
    fn local_expectation_examples() {
        let zz = MultipartiteState::basis_state(vec![2, 2], &[0, 0]).unwrap();
        let v = local_expectations(&zz, 0, &spin_half_basis()).unwrap();
        assert!((v[0] - FRAC_1_SQRT_2).abs() < 1e-15 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
        for j in 0..2 {
            let v = local_expectations(&bell(), j, &spin_half_basis()).unwrap();
            assert!(v.iter().all(|x| x.abs() < 1e-15));
        }
        let s = random_pure_state(&[3, 2, 2], 13).unwrap();
        let b = gell_mann_basis(3).unwrap();
        let v = local_expectations(&s, 0, &b).unwrap();
        let p = s.reduced_density(&[0]).unwrap().purity();
        assert!((v.iter().map(|x| x * x).sum::<f64>() - (p - 1.0 / 3.0)).abs() < 1e-10);
        assert!(local_expectations(&s, 1, &b).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let prod = MultipartiteState::basis_state(vec![2, 3], &[1, 2]).unwrap();
        for j in 0..2 {
            assert!(epsilon_subsystem(&prod, j).unwrap().epsilon_raw.abs() < 1e-15);
        }
        let e = epsilon_subsystem(&bell(), 0).unwrap();
        assert!((e.epsilon_raw - 0.5).abs() < 1e-15);
        assert!((e.epsilon_normalized - 1.0).abs() < 1e-15);
        for j in 0..3 {
            let e = epsilon_subsystem(&w3(), j).unwrap();
            assert!((e.epsilon_raw - 4.0 / 9.0).abs() < 1e-14);
        }
    }

    #[test]
    fn general_entanglement_golden_values() {
        let prod = MultipartiteState::basis_state(vec![2, 3, 2], &[1, 0, 1]).unwrap();
        assert!(general_entanglement(&prod).unwrap().ge_normalized.abs() < 1e-15);

        let r = general_entanglement(&bell()).unwrap();
        assert!((r.ge_normalized - 1.0).abs() < 1e-14);
        assert!((concurrence_two_qubit(&bell()).unwrap().powi(2) - 1.0).abs() < 1e-14);

        let r = general_entanglement(&w3()).unwrap();
        assert!((r.ge_normalized - 8.0 / 9.0).abs() < 1e-14);
        assert!(r.agreement_defect < 1e-14);

        let qq = state(&[2, 3], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let r = general_entanglement(&qq).unwrap();
        assert!((r.ge_normalized - 0.875).abs() < 1e-14);
        assert!((r.ge_via_purity - 0.875).abs() < 1e-14);
    }

    #[test]
    fn rejects_single_subsystem() {
        let s = MultipartiteState::new(vec![2], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(matches!(general_entanglement(&s), Err(GeError::InvalidArgument(_))));
        assert!(ge_purity_form(&s).is_err());
    }

    #[test]
    fn genuine_examples() {
        let g = genuine_entanglement(&ghz3()).unwrap();
        assert!((g - 5.0 / 6.0).abs() < 1e-14);
        let zero = MultipartiteState::new(vec![2], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let b0 = bell().tensor_product(&zero).unwrap();
        assert!(genuine_entanglement(&b0).unwrap().abs() < 1e-14);
        let prod = MultipartiteState::basis_state(vec![2, 2, 2], &[0, 1, 0]).unwrap();
        assert!(genuine_entanglement(&prod).unwrap().abs() < 1e-14);
        // two subsystems: equals E_g
        let s = random_pure_state(&[2, 3], 2).unwrap();
        let e = general_entanglement(&s).unwrap().ge_normalized;
        assert!((genuine_entanglement(&s).unwrap() - e).abs() < 1e-12);
        assert!(genuine_entanglement(&w3()).unwrap() > 0.1);
    }

    #[test]
    fn meyer_wallach_examples() {
        for n in 2..=5 {
            let mut amps = vec![0.0; 1 << n];
            amps[0] = 1.0;
            amps[(1 << n) - 1] = 1.0;
            let ghz = state(&vec![2; n], &amps);
            assert!((meyer_wallach(&ghz).unwrap() - 1.0).abs() < 1e-14);
        }
        let pp = state(&[2, 2], &[0.5, 0.5, 0.5, 0.5]);
        assert!(meyer_wallach(&pp).unwrap().abs() < 1e-14);
        let mw = meyer_wallach(&w3()).unwrap();
        assert!((mw - 8.0 / 9.0).abs() < 1e-14);
        assert!((mw - general_entanglement(&w3()).unwrap().ge_normalized).abs() < 1e-10);
        assert!(meyer_wallach(&random_pure_state(&[2, 3], 1).unwrap()).is_err());
    }

    #[test]
    fn concurrence_examples() {
        let prod = MultipartiteState::basis_state(vec![2, 2], &[0, 1]).unwrap();
        assert!(concurrence_two_qubit(&prod).unwrap().abs() < 1e-15);
        let s = state(&[2, 2], &[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()]);
        let c = concurrence_two_qubit(&s).unwrap();
        assert!((c - 0.6).abs() < 1e-14);
        assert!((general_entanglement(&s).unwrap().ge_normalized - 0.36).abs() < 1e-14);
        // closed form 2|ad - bc|
        let r = random_pure_state(&[2, 2], 5).unwrap();
        let a = r.amplitudes();
        assert!((concurrence_two_qubit(&r).unwrap() - 2.0 * (a[0] * a[3] - a[1] * a[2]).norm()).abs() < 1e-14);
        assert!(concurrence_two_qubit(&w3()).is_err());
    }
}
