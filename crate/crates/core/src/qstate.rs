//! Multi-qubit pure states and density operators.
//!
//! Qubits are numbered from 1. Qubit 1 is the most significant bit of the
//! computational-basis index, so `|q1 q2 ... qn>` has index `q1*2^(n-1) + ... + qn`.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorlab::{
    hermitian_eigen, hermitian_eigenvalues, CMatrix, CVector, C64, HERMITIAN_TOL, UNITARY_TOL, ZERO,
};

pub const NORM_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-10;

/// Bit mask of qubit `q` (1-based) in an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> usize {
    1 << (n - q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        check_dim(n_qubits, amplitudes.dim())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(n_qubits: usize, mut amplitudes: CVector) -> Result<Self> {
        check_dim(n_qubits, amplitudes.dim())?;
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::NotNormalized { norm });
        }
        amplitudes.scale(C64::new(1.0 / norm, 0.0));
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn from_real(n_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(n_qubits, CVector::from_real(amplitudes))
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes: CVector::basis(dim, index),
        })
    }

    /// Normalized vector of i.i.d. standard complex Gaussians (Haar distributed).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << n_qubits;
        let entries = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(n_qubits, CVector::new(entries)).expect("gaussian vector is nonzero")
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.dim()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    /// Indices and values of amplitudes with modulus above `tol`.
    pub fn support(&self, tol: f64) -> Vec<(usize, C64)> {
        self.amplitudes
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > tol)
            .map(|(i, &z)| (i, z))
            .collect()
    }

    /// `self ⊗ other`; qubits of `other` are appended after those of `self`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes: self.amplitudes.kron(&other.amplitudes),
        }
    }

    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.amplitudes.inner(&other.amplitudes))
    }

    /// Applies a unitary `gate` on `targets` (1-based, first target is the
    /// most significant qubit of the gate's own index).
    pub fn apply_gate(&self, gate: &CMatrix, targets: &[usize]) -> Result<PureState> {
        let defect = gate.unitarity_defect()?;
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        let mut out = self.apply_operator(gate, targets)?;
        // unitaries preserve the norm; renormalize only the rounding drift
        let norm = out.amplitudes.norm();
        out.amplitudes.scale(C64::new(1.0 / norm, 0.0));
        Ok(out)
    }

    /// Applies an arbitrary (not necessarily unitary) operator on `targets` and
    /// returns the unnormalized result. Callers are responsible for the norm.
    pub(crate) fn apply_operator(&self, op: &CMatrix, targets: &[usize]) -> Result<PureState> {
        let k = targets.len();
        if k == 0 {
            return Err(Error::BadTargets("no target qubits".into()));
        }
        let mut seen = BTreeSet::new();
        for &t in targets {
            if t == 0 || t > self.n_qubits {
                return Err(Error::BadTargets(format!(
                    "qubit {t} out of range 1..={}",
                    self.n_qubits
                )));
            }
            if !seen.insert(t) {
                return Err(Error::BadTargets(format!("qubit {t} repeated")));
            }
        }
        let sub = 1usize << k;
        if op.rows() != sub || op.cols() != sub {
            return Err(Error::BadTargets(format!(
                "operator is {}x{} but {k} targets need {sub}x{sub}",
                op.rows(),
                op.cols()
            )));
        }
        let n = self.n_qubits;
        let masks: Vec<usize> = targets.iter().map(|&t| qubit_mask(n, t)).collect();
        let all_targets: usize = masks.iter().sum();
        // offsets[s] = global index bits for local sub-index s
        let offsets: Vec<usize> = (0..sub)
            .map(|s| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|(pos, _)| s & (1 << (k - 1 - pos)) != 0)
                    .map(|(_, m)| m)
                    .sum()
            })
            .collect();

        let src = self.amplitudes.entries();
        let mut dst = vec![ZERO; src.len()];
        let mut local = vec![ZERO; sub];
        for base in 0..src.len() {
            if base & all_targets != 0 {
                continue;
            }
            for (s, off) in offsets.iter().enumerate() {
                local[s] = src[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = op.row(r);
                dst[base | off] = row.iter().zip(&local).map(|(a, b)| a * b).sum();
            }
        }
        Ok(PureState {
            n_qubits: n,
            amplitudes: CVector::new(dst),
        })
    }

    pub(crate) fn scaled(mut self, factor: f64) -> PureState {
        self.amplitudes.scale(C64::new(factor, 0.0));
        self
    }

    pub(crate) fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn to_document(&self) -> StateDocument {
        StateDocument {
            n: self.n_qubits,
            amplitudes: self.amplitudes.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_document(doc: &StateDocument) -> Result<Self> {
        let amps = doc.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        Self::new(doc.n, CVector::new(amps))
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .support(1e-12)
            .into_iter()
            .map(|(i, z)| format!("({:.6}{:+.6}i)|{:0width$b}>", z.re, z.im, i, width = self.n_qubits))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Serialized form of a pure state: `{"n": 2, "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

fn check_dim(n_qubits: usize, dim: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits >= usize::BITS as usize || dim != 1usize << n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "{dim} amplitudes for {n_qubits} qubits"
        )));
    }
    Ok(())
}

/// `|<a|b>|^2`
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// A cut of `n` qubits into side A (listed) and side B (the rest).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    n_qubits: usize,
    side_a: BTreeSet<usize>,
}

impl Bipartition {
    pub fn new<I: IntoIterator<Item = usize>>(n_qubits: usize, side_a: I) -> Result<Self> {
        let side_a: BTreeSet<usize> = side_a.into_iter().collect();
        if side_a.is_empty() || side_a.len() >= n_qubits {
            return Err(Error::BadCut(format!(
                "side A {side_a:?} must be a nonempty proper subset of 1..={n_qubits}"
            )));
        }
        if let Some(&q) = side_a.iter().find(|&&q| q == 0 || q > n_qubits) {
            return Err(Error::BadCut(format!("qubit {q} out of range 1..={n_qubits}")));
        }
        Ok(Self { n_qubits, side_a })
    }

    /// Every bipartition of `n` qubits, each unordered cut listed once per
    /// orientation (so `{1}|{2,3}` and `{2,3}|{1}` both appear).
    pub fn all(n_qubits: usize) -> Vec<Bipartition> {
        (1..(1usize << n_qubits) - 1)
            .map(|bits| {
                let side: Vec<usize> = (1..=n_qubits)
                    .filter(|&q| bits & qubit_mask(n_qubits, q) != 0)
                    .collect();
                Bipartition::new(n_qubits, side).unwrap()
            })
            .collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn side_a(&self) -> &BTreeSet<usize> {
        &self.side_a
    }

    pub fn side_b(&self) -> BTreeSet<usize> {
        (1..=self.n_qubits).filter(|q| !self.side_a.contains(q)).collect()
    }

    pub fn complement(&self) -> Bipartition {
        Bipartition {
            n_qubits: self.n_qubits,
            side_a: self.side_b(),
        }
    }

    pub fn mask_a(&self) -> usize {
        self.side_a.iter().map(|&q| qubit_mask(self.n_qubits, q)).sum()
    }

    pub fn mask_b(&self) -> usize {
        ((1usize << self.n_qubits) - 1) & !self.mask_a()
    }

    /// Splits a basis index into `(a_index, b_index)`, each compacted in qubit order.
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        let mut a = 0;
        let mut b = 0;
        for q in 1..=self.n_qubits {
            let bit = usize::from(index & qubit_mask(self.n_qubits, q) != 0);
            if self.side_a.contains(&q) {
                a = (a << 1) | bit;
            } else {
                b = (b << 1) | bit;
            }
        }
        (a, b)
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(Error::BadCut(format!(
                "cut is over {} qubits, state has {n_qubits}",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.side_a.iter().map(|q| q.to_string()).collect();
        let b: Vec<String> = self.side_b().iter().map(|q| q.to_string()).collect();
        write!(f, "{{{}}}|{{{}}}", a.join(","), b.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    n_qubits: usize,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity before wrapping `matrix`.
    pub fn new(n_qubits: usize, matrix: CMatrix) -> Result<Self> {
        check_dim(n_qubits, matrix.rows())?;
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let defect = matrix.hermitian_defect()?;
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::WeightMismatch(format!("trace is {tr}, expected 1")));
        }
        let least = hermitian_eigenvalues(&matrix)?[0];
        if least < -PSD_TOL {
            return Err(Error::WeightMismatch(format!("least eigenvalue {least:e} is negative")));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }
}

/// `|psi><psi|`
pub fn projector(psi: &PureState) -> Result<DensityOperator> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(DensityOperator {
        n_qubits: psi.n_qubits(),
        matrix: CMatrix::outer(psi.amplitudes(), psi.amplitudes()),
    })
}

/// `sum_i w_i |psi_i><psi_i|`
pub fn mix(states: &[PureState], weights: &[f64]) -> Result<DensityOperator> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::WeightMismatch(format!(
            "{} states but {} weights",
            states.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::WeightMismatch("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::WeightMismatch(format!("weights sum to {total}")));
    }
    let n = states[0].n_qubits();
    if let Some(bad) = states.iter().find(|s| s.n_qubits() != n) {
        return Err(Error::DimensionMismatch(format!(
            "mixing {n}-qubit and {}-qubit states",
            bad.n_qubits()
        )));
    }
    let dim = 1usize << n;
    let mut acc = CMatrix::zeros(dim, dim);
    for (psi, &w) in states.iter().zip(weights) {
        let p = projector(psi)?;
        acc.add_scaled(p.matrix(), C64::new(w, 0.0))?;
    }
    Ok(DensityOperator {
        n_qubits: n,
        matrix: acc,
    })
}

/// Equal-weight mixture.
pub fn uniform_mix(states: &[PureState]) -> Result<DensityOperator> {
    let w = vec![1.0 / states.len().max(1) as f64; states.len()];
    mix(states, &w)
}

/// Transposes the side-B indices of `rho`. The result is Hermitian with the
/// same trace but need not be positive.
pub fn partial_transpose(rho: &DensityOperator, cut: &Bipartition) -> Result<CMatrix> {
    cut.check(rho.n_qubits())?;
    Ok(partial_transpose_matrix(rho.matrix(), cut.mask_b()))
}

/// Partial transpose of an arbitrary `2^n x 2^n` operator.
pub fn partial_transpose_operator(m: &CMatrix, cut: &Bipartition) -> Result<CMatrix> {
    if !m.is_square() || m.rows() != 1 << cut.n_qubits() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} operator on {} qubits",
            m.rows(),
            m.cols(),
            cut.n_qubits()
        )));
    }
    Ok(partial_transpose_matrix(m, cut.mask_b()))
}

fn partial_transpose_matrix(m: &CMatrix, mask_b: usize) -> CMatrix {
    let dim = m.rows();
    let keep = !mask_b;
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let ii = (i & keep) | (j & mask_b);
            let jj = (j & keep) | (i & mask_b);
            out[(i, j)] = m[(ii, jj)];
        }
    }
    out
}

/// `||rho^{T_B}||_1 - 1`
pub fn negativity(rho: &DensityOperator, cut: &Bipartition) -> Result<f64> {
    let pt = partial_transpose(rho, cut)?;
    Ok(hermitian_eigenvalues(&pt)?.iter().map(|x| x.abs()).sum::<f64>() - 1.0)
}

/// Reduced state on `keep` (1-based qubit indices, in ascending order of significance).
pub fn partial_trace(rho: &DensityOperator, keep: &BTreeSet<usize>) -> Result<DensityOperator> {
    let n = rho.n_qubits();
    if keep.is_empty() || keep.iter().any(|&q| q == 0 || q > n) {
        return Err(Error::BadCut(format!("cannot keep {keep:?} out of {n} qubits")));
    }
    if keep.len() == n {
        return Ok(rho.clone());
    }
    let cut = Bipartition::new(n, keep.iter().copied())?;
    let dim = 1usize << n;
    let k = keep.len();
    let split: Vec<(usize, usize)> = (0..dim).map(|i| cut.split_index(i)).collect();
    let mut out = CMatrix::zeros(1 << k, 1 << k);
    let m = rho.matrix();
    for i in 0..dim {
        let (ka, ta) = split[i];
        for j in 0..dim {
            let (kb, tb) = split[j];
            if ta == tb {
                out[(ka, kb)] += m[(i, j)];
            }
        }
    }
    Ok(DensityOperator {
        n_qubits: k,
        matrix: out,
    })
}

/// Amplitudes of `psi` reshaped into the `dim_A x dim_B` coefficient matrix.
pub fn coefficient_matrix(psi: &PureState, cut: &Bipartition) -> Result<CMatrix> {
    cut.check(psi.n_qubits())?;
    let ka = cut.side_a().len();
    let kb = psi.n_qubits() - ka;
    let mut m = CMatrix::zeros(1 << ka, 1 << kb);
    for (i, z) in psi.amplitudes().entries().iter().enumerate() {
        let (a, b) = cut.split_index(i);
        m[(a, b)] = *z;
    }
    Ok(m)
}

/// Reduced density matrix of a pure state on side A, `M M^dag`.
pub fn reduced_state(psi: &PureState, cut: &Bipartition) -> Result<CMatrix> {
    let m = coefficient_matrix(psi, cut)?;
    m.matmul(&m.adjoint())
}

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Schmidt coefficients, descending, all above the rank tolerance.
    pub coefficients: Vec<f64>,
    /// Unit vectors on side A (compact indexing), one per coefficient.
    pub a_vectors: Vec<CVector>,
    /// Unit vectors on side B with `psi = sum_k c_k |a_k>|b_k>`.
    pub b_vectors: Vec<CVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }
}

pub const SCHMIDT_TOL: f64 = 1e-10;

pub fn schmidt_decomposition(psi: &PureState, cut: &Bipartition) -> Result<SchmidtDecomposition> {
    let m = coefficient_matrix(psi, cut)?;
    let reduced = m.matmul(&m.adjoint())?;
    let eig = hermitian_eigen(&reduced)?;
    let mut coefficients = Vec::new();
    let mut a_vectors = Vec::new();
    let mut b_vectors = Vec::new();
    for k in (0..eig.values.len()).rev() {
        let lambda = eig.values[k];
        if lambda <= SCHMIDT_TOL * SCHMIDT_TOL {
            continue;
        }
        let coeff = lambda.sqrt();
        let u = eig.vector(k);
        // b_k = (u^dag ⊗ I) psi / c_k = M^T conj(u) / c_k
        let conj_u = CVector::new(u.entries().iter().map(|z| z.conj()).collect());
        let mut b = m.transpose().mul_vec(&conj_u)?;
        b.scale(C64::new(1.0 / coeff, 0.0));
        coefficients.push(coeff);
        a_vectors.push(u);
        b_vectors.push(b);
    }
    Ok(SchmidtDecomposition {
        coefficients,
        a_vectors,
        b_vectors,
    })
}

/// von Neumann entropy in bits, with `0 log 0 = 0`.
pub fn von_neumann_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Entanglement entropy (ebits) of a pure state across `cut`.
pub fn entanglement_entropy(psi: &PureState, cut: &Bipartition) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    // the smaller side gives the smaller eigenproblem; the spectra agree
    let side = if cut.side_a().len() * 2 <= psi.n_qubits() {
        cut.clone()
    } else {
        cut.complement()
    };
    let reduced = reduced_state(psi, &side)?;
    Ok(von_neumann_entropy(&hermitian_eigenvalues(&reduced)?))
}

/// Unitary `U_A ⊗ U_B` placed on the qubits of each side of `cut`, as a full operator.
pub fn local_operator(cut: &Bipartition, ua: &CMatrix, ub: &CMatrix) -> Result<CMatrix> {
    let n = cut.n_qubits();
    let ka = cut.side_a().len();
    if ua.rows() != 1 << ka || ub.rows() != 1 << (n - ka) {
        return Err(Error::DimensionMismatch(
            "local operator sizes do not match the cut".into(),
        ));
    }
    let dim = 1usize << n;
    let split: Vec<(usize, usize)> = (0..dim).map(|i| cut.split_index(i)).collect();
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let (ai, bi) = split[i];
            let (aj, bj) = split[j];
            out[(i, j)] = ua[(ai, aj)] * ub[(bi, bj)];
        }
    }
    Ok(out)
}

/// `U rho U^dag`, for unitary `u`.
pub fn conjugate(rho: &DensityOperator, u: &CMatrix) -> Result<DensityOperator> {
    let m = u.matmul(rho.matrix())?.matmul(&u.adjoint())?;
    Ok(DensityOperator {
        n_qubits: rho.n_qubits(),
        matrix: m,
    })
}

#[cfg(test)]
fn density_unchecked(n_qubits: usize, matrix: CMatrix) -> DensityOperator {
    DensityOperator { n_qubits, matrix }
}

/// Haar-ish random unitary from the Gram-Schmidt of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<CVector> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = CVector::new(
            (0..dim)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        );
        for c in &cols {
            let proj = c.inner(&v);
            for i in 0..dim {
                v[i] -= c[i] * proj;
            }
        }
        let norm = v.norm();
        if norm < 1e-8 {
            continue;
        }
        v.scale(C64::new(1.0 / norm, 0.0));
        cols.push(v);
    }
    let mut u = CMatrix::zeros(dim, dim);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..dim {
            u[(i, j)] = c[i];
        }
    }
    u
}
