//! Orthonormal traceless Hermitian operator bases under the trace inner product `(A, B) = Tr(AB)`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{GeError, Result};
use crate::linalg::ComplexMatrix;

/// Threshold used by [`verify_basis`].
pub const BASIS_TOL: f64 = 1e-10;

/// Residual norm below which a Gram-Schmidt candidate counts as linearly dependent.
pub const PIVOT_TOL: f64 = 1e-9;

/// `D^2 - 1` operators spanning the traceless Hermitian `D x D` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBasis {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl HermitianBasis {
    /// Accepts the operators only if they pass [`verify_basis`].
    pub fn new(dim: usize, operators: Vec<ComplexMatrix>) -> Result<Self> {
        let report = verify_basis(dim, &operators);
        if !report.passed {
            return Err(GeError::invariant(format!(
                "not an orthonormal traceless Hermitian basis: {report:?}"
            )));
        }
        Ok(Self { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn verify(&self) -> BasisReport {
        verify_basis(self.dim, &self.operators)
    }

    /// Linear combination `sum_k o_k A_k`.
    pub fn combine(&self, coefficients: &[f64]) -> ComplexMatrix {
        assert_eq!(coefficients.len(), self.operators.len());
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (o, a) in coefficients.iter().zip(&self.operators) {
            out = &out + &a.scale_real(*o);
        }
        out
    }
}

/// Generalized Gell-Mann matrices, normalized to `Tr(A_k^2) = 1`, ordered as the symmetric
/// block, then the antisymmetric block, then the diagonal block.
pub fn gell_mann_basis(dim: usize) -> Result<HermitianBasis> {
    if dim < 2 {
        return Err(GeError::invalid(format!(
            "basis dimension must be at least 2, got {dim}"
        )));
    }
    let mut ops = Vec::with_capacity(dim * dim - 1);
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|j| (j + 1..dim).map(move |k| (j, k))).collect();
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(j, k)] = C64::new(FRAC_1_SQRT_2, 0.0);
        m[(k, j)] = C64::new(FRAC_1_SQRT_2, 0.0);
        ops.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(j, k)] = C64::new(0.0, -FRAC_1_SQRT_2);
        m[(k, j)] = C64::new(0.0, FRAC_1_SQRT_2);
        ops.push(m);
    }
    for l in 1..dim {
        let scale = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..l {
            m[(i, i)] = C64::new(scale, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * scale, 0.0);
        ops.push(m);
    }
    Ok(HermitianBasis { dim, operators: ops })
}

/// Spin-1/2 operators `S = sigma / 2` (hbar = 1) in the order `S_z, S_x, S_y`.
pub fn spin_half_operators() -> [ComplexMatrix; 3] {
    let z = C64::new(0.0, 0.0);
    let h = |re: f64, im: f64| C64::new(re, im);
    [
        ComplexMatrix::new(2, 2, vec![h(0.5, 0.0), z, z, h(-0.5, 0.0)]).unwrap(),
        ComplexMatrix::new(2, 2, vec![z, h(0.5, 0.0), h(0.5, 0.0), z]).unwrap(),
        ComplexMatrix::new(2, 2, vec![z, h(0.0, -0.5), h(0.0, 0.5), z]).unwrap(),
    ]
}

/// `sqrt(2) S_z, sqrt(2) S_x, sqrt(2) S_y`.
pub fn spin_half_basis() -> HermitianBasis {
    let ops = spin_half_operators().iter().map(|s| s.scale_real(SQRT_2)).collect();
    HermitianBasis { dim: 2, operators: ops }
}

/// Spin-1 `S_z, S_x, S_y` in the `m = +1, 0, -1` basis (hbar = 1).
pub fn spin_one_operators() -> [ComplexMatrix; 3] {
    let r = FRAC_1_SQRT_2;
    let sz = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, -1.0]]);
    let sx = ComplexMatrix::from_real_rows(&[&[0.0, r, 0.0], &[r, 0.0, r], &[0.0, r, 0.0]]);
    let i = |x: f64| C64::new(0.0, x);
    let z = C64::new(0.0, 0.0);
    let sy = ComplexMatrix::new(3, 3, vec![z, i(-r), z, i(r), z, i(-r), z, i(r), z]).unwrap();
    [sz, sx, sy]
}

/// The spin-1 candidate list `S_z, S_x, S_y, S_xy, S_xz, S_yz, S_x^2, S_y^2`, where
/// `S_ab = S_a S_b + S_b S_a`.
pub fn spin_one_candidates() -> Vec<ComplexMatrix> {
    let [sz, sx, sy] = spin_one_operators();
    let anti = |a: &ComplexMatrix, b: &ComplexMatrix| &(a * b) + &(b * a);
    vec![
        sz.clone(),
        sx.clone(),
        sy.clone(),
        anti(&sx, &sy),
        anti(&sx, &sz),
        anti(&sy, &sz),
        &sx * &sx,
        &sy * &sy,
    ]
}

/// Closed-form orthonormal spin-1 basis obtained by Gram-Schmidt on [`spin_one_candidates`].
pub fn spin_one_reference_basis() -> Vec<ComplexMatrix> {
    let c = spin_one_candidates();
    let id = ComplexMatrix::identity(3);
    let mut ops: Vec<ComplexMatrix> = c[..6].iter().map(|m| m.scale_real(FRAC_1_SQRT_2)).collect();
    ops.push(&c[6].scale_real((1.5f64).sqrt()) - &id.scale_real((2.0f64 / 3.0).sqrt()));
    ops.push(&(&c[7].scale_real(SQRT_2) + &c[6].scale_real(FRAC_1_SQRT_2)) - &id.scale_real(SQRT_2));
    ops
}

/// Real part of `Tr(A B)`; exact for Hermitian pairs.
fn trace_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.trace_product(b).re
}

/// Projects each candidate onto the traceless subspace and orthonormalizes in input order
/// (classical Gram-Schmidt with one re-orthogonalization pass).
pub fn gram_schmidt_orthonormalize(candidates: &[ComplexMatrix]) -> Result<HermitianBasis> {
    let first = candidates.first().ok_or_else(|| GeError::invalid("no candidates"))?;
    let dim = first.rows();
    let id = ComplexMatrix::identity(dim);
    let mut out: Vec<ComplexMatrix> = Vec::with_capacity(candidates.len());
    for (index, cand) in candidates.iter().enumerate() {
        if cand.rows() != dim || cand.cols() != dim {
            return Err(GeError::invalid(format!("candidate {index} is not {dim}x{dim}")));
        }
        if !cand.is_hermitian() {
            return Err(GeError::invalid(format!("candidate {index} is not Hermitian")));
        }
        let shift = cand.trace() / dim as f64;
        let mut w = cand - &id.scale(shift);
        for _pass in 0..2 {
            let coeffs: Vec<f64> = out.iter().map(|q| trace_inner(q, &w)).collect();
            for (q, c) in out.iter().zip(coeffs) {
                w = &w - &q.scale_real(c);
            }
        }
        let norm = trace_inner(&w, &w).max(0.0).sqrt();
        if norm < PIVOT_TOL {
            return Err(GeError::Degenerate { index, norm });
        }
        out.push(w.scale_real(1.0 / norm));
    }
    Ok(HermitianBasis { dim, operators: out })
}

/// Coefficients `r_k = Tr(sigma A_k)` of `sigma = I/D + sum_k r_k A_k`.
pub fn expansion_coefficients(sigma: &ComplexMatrix, basis: &HermitianBasis) -> Result<Vec<f64>> {
    if sigma.rows() != basis.dim || sigma.cols() != basis.dim {
        return Err(GeError::invalid(format!(
            "matrix is {}x{}, basis acts on dimension {}",
            sigma.rows(),
            sigma.cols(),
            basis.dim
        )));
    }
    Ok(basis.operators.iter().map(|a| trace_inner(sigma, a)).collect())
}

/// `I/D + sum_k r_k A_k`
pub fn reconstruct(coefficients: &[f64], basis: &HermitianBasis) -> ComplexMatrix {
    let id = ComplexMatrix::identity(basis.dim).scale_real(1.0 / basis.dim as f64);
    &id + &basis.combine(coefficients)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisReport {
    pub dim: usize,
    pub count: usize,
    pub expected_count: usize,
    pub max_hermiticity_defect: f64,
    pub max_trace_defect: f64,
    /// Largest `|Tr(A_k A_l) - delta_kl|`.
    pub max_gram_defect: f64,
    pub passed: bool,
}

pub fn verify_basis(dim: usize, operators: &[ComplexMatrix]) -> BasisReport {
    let expected_count = (dim * dim).saturating_sub(1);
    let shape_ok = operators.iter().all(|a| a.rows() == dim && a.cols() == dim);
    let (mut herm, mut tr, mut gram) = (0.0f64, 0.0f64, 0.0f64);
    if shape_ok {
        for (k, a) in operators.iter().enumerate() {
            herm = herm.max(a.hermiticity_defect());
            tr = tr.max(a.trace().norm());
            for (l, b) in operators.iter().enumerate().skip(k) {
                let target = if k == l { 1.0 } else { 0.0 };
                gram = gram.max((a.trace_product(b) - target).norm());
            }
        }
    } else {
        herm = f64::INFINITY;
        tr = f64::INFINITY;
        gram = f64::INFINITY;
    }
    let passed =
        dim >= 2 && operators.len() == expected_count && herm <= BASIS_TOL && tr <= BASIS_TOL && gram <= BASIS_TOL;
    BasisReport {
        dim,
        count: operators.len(),
        expected_count,
        max_hermiticity_defect: herm,
        max_trace_defect: tr,
        max_gram_defect: gram,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::random_pure_state;

    #[test]
    fn qubit_gell_mann_is_scaled_pauli() {
        let gm = gell_mann_basis(2).unwrap();
        let spin = spin_half_basis();
        // same set, different ordering: (x, y, z) vs (z, x, y)
        for (gm_idx, spin_idx) in [(0, 1), (1, 2), (2, 0)] {
            assert!(gm.operators()[gm_idx].max_abs_diff(&spin.operators()[spin_idx]) < 1e-15);
        }
        assert!(spin.verify().passed);
    }

    #[test]
    fn gell_mann_counts_and_validity() {
        for d in 2..=6 {
            let b = gell_mann_basis(d).unwrap();
            assert_eq!(b.len(), d * d - 1);
            assert!(b.verify().passed, "{:?}", b.verify());
        }
        assert!(gell_mann_basis(1).is_err());
        assert!(gell_mann_basis(0).is_err());
    }

    #[test]
    fn spin_one_gram_schmidt_matches_closed_form() {
        let basis = gram_schmidt_orthonormalize(&spin_one_candidates()).unwrap();
        let reference = spin_one_reference_basis();
        for (k, (got, want)) in basis.operators().iter().zip(&reference).enumerate() {
            assert!(got.max_abs_diff(want) < 1e-10, "A_{} deviates", k + 1);
        }
        assert!(basis.verify().passed);
    }

    #[test]
    fn gram_schmidt_is_idempotent_on_orthonormal_input() {
        let gm = gell_mann_basis(3).unwrap();
        let again = gram_schmidt_orthonormalize(gm.operators()).unwrap();
        for (a, b) in gm.operators().iter().zip(again.operators()) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
    }

    #[test]
    fn gram_schmidt_reports_dependent_candidate() {
        let mut cands = spin_one_candidates();
        cands.insert(2, cands[1].clone());
        assert!(matches!(
            gram_schmidt_orthonormalize(&cands),
            Err(GeError::Degenerate { index: 2, .. })
        ));
        // a trailing dependent candidate raises instead of being dropped
        let mut cands = spin_one_candidates();
        cands.push(ComplexMatrix::identity(3));
        assert!(matches!(
            gram_schmidt_orthonormalize(&cands),
            Err(GeError::Degenerate { index: 8, .. })
        ));
    }

    #[test]
    fn expansion_examples() {
        for d in 2..=4 {
            let b = gell_mann_basis(d).unwrap();
            let mixed = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
            assert!(expansion_coefficients(&mixed, &b)
                .unwrap()
                .iter()
                .all(|r| r.abs() < 1e-15));
        }
        let zero = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let r = expansion_coefficients(&zero, &spin_half_basis()).unwrap();
        assert!((r[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(r[1].abs() < 1e-15 && r[2].abs() < 1e-15);

        let s = random_pure_state(&[3, 2], 6).unwrap();
        let sigma = s.reduced_density(&[0]).unwrap();
        let b = gell_mann_basis(3).unwrap();
        let r = expansion_coefficients(sigma.matrix(), &b).unwrap();
        let sum: f64 = r.iter().map(|x| x * x).sum();
        assert!((sum - (sigma.purity() - 1.0 / 3.0)).abs() < 1e-10);
        assert!(reconstruct(&r, &b).max_abs_diff(sigma.matrix()) < 1e-10);

        assert!(expansion_coefficients(&zero, &b).is_err());
    }

    #[test]
    fn verify_flags_scaled_operator() {
        let mut ops = gell_mann_basis(3).unwrap().operators().to_vec();
        ops[4] = ops[4].scale_real(1.01);
        let report = verify_basis(3, &ops);
        assert!(!report.passed);
        assert!((report.max_gram_defect - 0.0201).abs() < 1e-12);
        assert!(HermitianBasis::new(3, ops).is_err());
    }

    #[test]
    fn verify_flags_empty_list() {
        let report = verify_basis(3, &[]);
        assert!(!report.passed);
        assert_eq!(report.count, 0);
        assert_eq!(report.expected_count, 8);
    }
}
