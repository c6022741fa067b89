//! Pure states of multipartite systems and the tensor bookkeeping around them.
//!
//! Amplitudes are indexed lexicographically over the subsystem labels with subsystem 0 the
//! most significant digit: for dims `(d0, d1, ..., d_{N-1})` the label `(a0, ..., a_{N-1})`
//! lives at `a0 * (d1*...*d_{N-1}) + ... + a_{N-1}`. Subsystem indices are zero-based.

use num_complex::Complex64 as C64;

use crate::error::{GeError, Result};
use crate::linalg::{inner, vec_norm_sqr, ComplexMatrix};
use crate::measure::Bipartition;
use crate::rng;

/// Largest number of amplitudes (or matrix entries) any construction may allocate.
pub const MAX_AMPLITUDES: usize = 1 << 22;

/// Allowed deviation of `<psi|psi>` from one.
pub const NORM_TOL: f64 = 1e-10;

/// Validates a dimension vector and returns the total Hilbert-space dimension.
pub fn checked_total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(GeError::invalid("a state needs at least one subsystem"));
    }
    if let Some((j, &d)) = dims.iter().enumerate().find(|(_, &d)| d < 2) {
        return Err(GeError::invalid(format!(
            "subsystem {j} has dimension {d}; every dimension must be at least 2"
        )));
    }
    let mut total: u128 = 1;
    for &d in dims {
        total = total.saturating_mul(d as u128);
        if total > MAX_AMPLITUDES as u128 {
            let requested = dims.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
            return Err(GeError::ResourceLimit {
                requested,
                limit: MAX_AMPLITUDES as u128,
            });
        }
    }
    Ok(total as usize)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for j in (0..dims.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * dims[j + 1];
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultipartiteState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl MultipartiteState {
    /// Strict constructor: the amplitudes must already be normalized within [`NORM_TOL`].
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let total = checked_total_dim(&dims)?;
        if amplitudes.len() != total {
            return Err(GeError::invariant(format!(
                "amplitude count {} does not match dimension product {}",
                amplitudes.len(),
                total
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GeError::invariant("amplitudes must be finite"));
        }
        let norm = vec_norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(GeError::invariant(format!(
                "squared norm is {norm}, expected 1 within {NORM_TOL:e}"
            )));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(dims: Vec<usize>, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = vec_norm_sqr(&amplitudes).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(GeError::invariant("cannot normalize a zero or non-finite vector"));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::new(dims, amplitudes)
    }

    /// Product basis state with the given per-subsystem labels.
    pub fn basis_state(dims: Vec<usize>, labels: &[usize]) -> Result<Self> {
        let total = checked_total_dim(&dims)?;
        if labels.len() != dims.len() || labels.iter().zip(&dims).any(|(a, d)| a >= d) {
            return Err(GeError::invalid(format!("labels {labels:?} do not fit dims {dims:?}")));
        }
        let index = labels.iter().zip(strides(&dims)).map(|(a, s)| a * s).sum::<usize>();
        let mut amplitudes = vec![C64::new(0.0, 0.0); total];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { dims, amplitudes })
    }

    /// Tensor product of single-subsystem vectors (each normalized).
    pub fn product(factors: &[Vec<C64>]) -> Result<Self> {
        let mut iter = factors.iter();
        let first = iter.next().ok_or_else(|| GeError::invalid("product of zero factors"))?;
        let mut state = Self::new(vec![first.len()], first.clone())?;
        for f in iter {
            state = state.tensor_product(&Self::new(vec![f.len()], f.clone())?)?;
        }
        Ok(state)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        vec_norm_sqr(&self.amplitudes)
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &Self) -> f64 {
        inner(&self.amplitudes, &other.amplitudes).norm_sqr()
    }

    /// Splits a flat index into per-subsystem labels.
    pub fn labels_of(&self, mut index: usize) -> Vec<usize> {
        let mut labels = vec![0; self.dims.len()];
        for j in (0..self.dims.len()).rev() {
            labels[j] = index % self.dims[j];
            index /= self.dims[j];
        }
        labels
    }

    pub fn index_of(&self, labels: &[usize]) -> usize {
        labels.iter().zip(strides(&self.dims)).map(|(a, s)| a * s).sum()
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        let all: Vec<usize> = (0..self.num_subsystems()).collect();
        self.reduced_density(&all)
    }

    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        checked_total_dim(&dims)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self::new(dims, amplitudes)
    }

    fn check_subsystem(&self, j: usize) -> Result<()> {
        if j >= self.num_subsystems() {
            return Err(GeError::invalid(format!(
                "subsystem index {j} out of range for {} subsystems",
                self.num_subsystems()
            )));
        }
        Ok(())
    }

    /// Reorders subsystems: subsystem `k` of the result is subsystem `perm[k]` of `self`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_subsystems();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(GeError::invalid(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let old_strides = strides(&self.dims);
        // stride of new axis k within the old flat index
        let gather: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut amplitudes = Vec::with_capacity(self.total_dim());
        let mut labels = vec![0usize; n];
        let mut old_index = 0usize;
        for _ in 0..self.total_dim() {
            amplitudes.push(self.amplitudes[old_index]);
            // odometer increment over the new label order
            for k in (0..n).rev() {
                labels[k] += 1;
                old_index += gather[k];
                if labels[k] < new_dims[k] {
                    break;
                }
                old_index -= gather[k] * new_dims[k];
                labels[k] = 0;
            }
        }
        Ok(Self {
            dims: new_dims,
            amplitudes,
        })
    }

    /// Amplitudes arranged as a `(prod keep) x (prod rest)` matrix, row-major, with both
    /// blocks in ascending subsystem order.
    fn split(&self, keep: &[usize]) -> Result<(usize, usize, Vec<C64>)> {
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        if keep_sorted.is_empty() {
            return Err(GeError::invalid("keep set must be nonempty"));
        }
        for &j in &keep_sorted {
            self.check_subsystem(j)?;
        }
        let rest: Vec<usize> = (0..self.num_subsystems())
            .filter(|j| !keep_sorted.contains(j))
            .collect();
        let rows: usize = keep_sorted.iter().map(|&j| self.dims[j]).product();
        let cols = self.total_dim() / rows;
        let perm: Vec<usize> = keep_sorted.iter().chain(&rest).copied().collect();
        Ok((rows, cols, self.permute_subsystems(&perm)?.amplitudes))
    }

    /// Partial trace of `|psi><psi|` over every subsystem not in `keep`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (rows, cols, psi) = self.split(keep)?;
        let entries = (rows as u128) * (rows as u128);
        if entries > MAX_AMPLITUDES as u128 {
            return Err(GeError::ResourceLimit {
                requested: entries,
                limit: MAX_AMPLITUDES as u128,
            });
        }
        let mut rho = ComplexMatrix::zeros(rows, rows);
        for a in 0..rows {
            let row_a = &psi[a * cols..(a + 1) * cols];
            for b in a..rows {
                let row_b = &psi[b * cols..(b + 1) * cols];
                let v: C64 = row_a.iter().zip(row_b).map(|(x, y)| x * y.conj()).sum();
                rho[(a, b)] = v;
                rho[(b, a)] = v.conj();
            }
        }
        Ok(DensityMatrix { matrix: rho })
    }

    /// `Tr(rho_keep^2)`, computed on whichever side of the cut is smaller.
    pub fn reduced_purity(&self, keep: &[usize]) -> Result<f64> {
        let (rows, cols, psi) = self.split(keep)?;
        let gram = |n: usize, at: &dyn Fn(usize, usize) -> C64, m: usize| {
            let mut total = 0.0;
            for a in 0..n {
                for b in a..n {
                    let v: C64 = (0..m).map(|r| at(a, r) * at(b, r).conj()).sum();
                    total += if a == b { v.norm_sqr() } else { 2.0 * v.norm_sqr() };
                }
            }
            total
        };
        Ok(if rows <= cols {
            gram(rows, &|a, r| psi[a * cols + r], cols)
        } else {
            gram(cols, &|r, a| psi[a * cols + r], rows)
        })
    }

    /// Regroups the subsystems into two: `block` (most significant) and its complement.
    pub fn merge_bipartition(&self, block: &Bipartition) -> Result<Self> {
        let n = self.num_subsystems();
        if block.num_subsystems() != n {
            return Err(GeError::invalid(format!(
                "bipartition is over {} subsystems, state has {n}",
                block.num_subsystems()
            )));
        }
        let (rows, cols, amplitudes) = self.split(block.block())?;
        Ok(Self {
            dims: vec![rows, cols],
            amplitudes,
        })
    }

    /// Applies `U` to subsystem `j`.
    pub fn apply_local(&self, j: usize, u: &ComplexMatrix) -> Result<Self> {
        self.check_subsystem(j)?;
        let d = self.dims[j];
        if u.rows() != d || u.cols() != d {
            return Err(GeError::invalid(format!(
                "operator is {}x{}, subsystem {j} has dimension {d}",
                u.rows(),
                u.cols()
            )));
        }
        let stride = strides(&self.dims)[j];
        let mut out = vec![C64::new(0.0, 0.0); self.total_dim()];
        for base in 0..self.total_dim() {
            if !(base / stride).is_multiple_of(d) {
                continue;
            }
            for r in 0..d {
                let acc: C64 = (0..d).map(|c| u[(r, c)] * self.amplitudes[base + c * stride]).sum();
                out[base + r * stride] = acc;
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            amplitudes: out,
        })
    }

    /// Applies `U^(0) ⊗ ... ⊗ U^(N-1)` and checks the result is still normalized.
    pub fn apply_local_unitaries(&self, unitaries: &[ComplexMatrix]) -> Result<Self> {
        if unitaries.len() != self.num_subsystems() {
            return Err(GeError::invalid("need one unitary per subsystem"));
        }
        let mut state = self.clone();
        for (j, u) in unitaries.iter().enumerate() {
            state = state.apply_local(j, u)?;
        }
        Self::new(state.dims, state.amplitudes)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity (eigenvalues >= -1e-10).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(GeError::invalid("density matrix must be square"));
        }
        let herm = matrix.hermiticity_defect();
        if herm > crate::linalg::HERMITIAN_TOL {
            return Err(GeError::invariant(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(GeError::invariant(format!("trace is {tr}, expected 1")));
        }
        let min_ev = matrix.hermitian_eigenvalues()[0];
        if min_ev < -1e-10 {
            return Err(GeError::invariant(format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `Tr(rho^2)`
    pub fn purity(&self) -> f64 {
        // rho is Hermitian, so Tr(rho^2) is the squared Frobenius norm
        self.matrix.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }

    /// `Tr(rho O)`
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        self.matrix.trace_product(op)
    }
}

/// Haar-random `d x d` unitary, deterministic in `seed`.
pub fn haar_random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_with(&mut rng::seeded(seed), d)
}

/// Orthonormalizes the columns of a complex-Gaussian matrix. Gram-Schmidt produces the `Q`
/// of the QR factorization whose `R` has a positive real diagonal, which is exactly the
/// phase fix that makes `Q` Haar distributed.
pub fn haar_unitary_with<R: rand::Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| rng::complex_gaussian(rng)).collect();
        for _pass in 0..2 {
            for q in &cols {
                let proj = inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = vec_norm_sqr(&v).sqrt();
        if norm < 1e-8 {
            // measure-zero event; draw a fresh column
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Complex-Gaussian amplitudes, normalized. Requires at least two subsystems.
pub fn random_pure_state(dims: &[usize], seed: u64) -> Result<MultipartiteState> {
    random_state_with(&mut rng::seeded(seed), dims)
}

pub fn random_state_with<R: rand::Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<MultipartiteState> {
    let total = checked_total_dim(dims)?;
    if dims.len() < 2 {
        return Err(GeError::invalid("random states need at least two subsystems"));
    }
    MultipartiteState::new(dims.to_vec(), rng::random_unit_vector(rng, total))
}

/// Random fully separable state: an independent Haar-random vector on every subsystem.
pub fn random_product_state<R: rand::Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<MultipartiteState> {
    checked_total_dim(dims)?;
    let factors: Vec<Vec<C64>> = dims.iter().map(|&d| rng::random_unit_vector(rng, d)).collect();
    MultipartiteState::product(&factors)
}

pub fn purity(dm: &DensityMatrix) -> f64 {
    dm.purity()
}
