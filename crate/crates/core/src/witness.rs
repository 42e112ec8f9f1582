//! Negativity witnesses against LOCC cloning.
//!
//! A cloner that maps `psi_j ⊗ blank -> psi_j ⊗ psi_j` for every member of a
//! set must also map the uniform mixture `rho_in` to `rho_out`. Negativity
//! cannot grow under LOCC, so `N(rho_out) > N(rho_in)` across any cut that
//! keeps each party's two qubits together rules the cloner out. The converse
//! does not hold: an `Inconclusive` verdict is never a possibility claim.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::Serialize;

use crate::catstates::{cat_state, CatLabel};
use crate::error::{Error, Result};
use crate::qstate::{negativity, uniform_mix, Bipartition, DensityOperator, PureState};
use crate::tensorlab::{CMatrix, C64};

/// Verdict tolerance on `n_out - n_in`.
pub const VERDICT_TOL: f64 = 1e-9;
/// `U^dag U = I` tolerance for convertibility.
pub const CONVERTIBILITY_TOL: f64 = 1e-9;
pub const SINGULAR_TOL: f64 = 1e-12;
const ORTHOGONALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Impossible,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutRecord {
    /// Parties on side A; each party contributes its original and blank qubit.
    pub cut: Vec<usize>,
    pub n_in: f64,
    pub n_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub alpha: Option<f64>,
    pub cuts: Vec<CutRecord>,
    pub verdict: Verdict,
}

impl WitnessReport {
    fn from_cuts(alpha: Option<f64>, cuts: Vec<CutRecord>) -> Self {
        let verdict = if cuts.iter().any(|c| c.n_out > c.n_in + VERDICT_TOL) {
            Verdict::Impossible
        } else {
            Verdict::Inconclusive
        };
        Self { alpha, cuts, verdict }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }
}

/// Cut of the `2n`-qubit register putting party `party`'s two qubits on side A.
pub fn party_cut(n_parties: usize, party: usize) -> Result<Bipartition> {
    Bipartition::new(2 * n_parties, [party, n_parties + party])
}

pub fn party_cuts(n_parties: usize) -> Result<Vec<Bipartition>> {
    (1..=n_parties).map(|p| party_cut(n_parties, p)).collect()
}

fn check_set(set: &[PureState], blank: &PureState) -> Result<()> {
    if set.is_empty() {
        return Err(Error::DimensionMismatch("empty state set".into()));
    }
    if let Some(bad) = set.iter().find(|s| s.n_qubits() != blank.n_qubits()) {
        return Err(Error::DimensionMismatch(format!(
            "set member has {} qubits, blank has {}",
            bad.n_qubits(),
            blank.n_qubits()
        )));
    }
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            let overlap = set[i].inner(&set[j])?.norm();
            if overlap > ORTHOGONALITY_TOL {
                return Err(Error::NotOrthogonal(format!(
                    "members {i} and {j} overlap by {overlap:e}"
                )));
            }
        }
    }
    Ok(())
}

/// `(1/|S|) sum_j P[psi_j ⊗ blank]`
pub fn build_rho_in(set: &[PureState], blank: &PureState) -> Result<DensityOperator> {
    check_set(set, blank)?;
    let terms: Vec<PureState> = set.iter().map(|s| s.tensor(blank)).collect();
    uniform_mix(&terms)
}

/// `(1/|S|) sum_j P[psi_j ⊗ psi_j]`
pub fn build_rho_out(set: &[PureState], blank: &PureState) -> Result<DensityOperator> {
    check_set(set, blank)?;
    let terms: Vec<PureState> = set.iter().map(|s| s.tensor(s)).collect();
    uniform_mix(&terms)
}

/// Negativities of `rho_in` and `rho_out` on every party cut.
pub fn witness_set(set: &[PureState], blank: &PureState) -> Result<WitnessReport> {
    let rho_in = build_rho_in(set, blank)?;
    let rho_out = build_rho_out(set, blank)?;
    let n = blank.n_qubits();
    let cuts = (1..=n)
        .map(|party| {
            let cut = party_cut(n, party)?;
            Ok(CutRecord {
                cut: vec![party],
                n_in: negativity(&rho_in, &cut)?,
                n_out: negativity(&rho_out, &cut)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessReport::from_cuts(None, cuts))
}

pub fn witness_pair(a: &PureState, b: &PureState, blank: &PureState) -> Result<WitnessReport> {
    witness_set(&[a.clone(), b.clone()], blank)
}

/// Witness for a set of labels; the blank is any pure state on `n` qubits.
pub fn witness_labels(labels: &[CatLabel], blank: &PureState) -> Result<WitnessReport> {
    let states = labels.iter().map(cat_state).collect::<Result<Vec<_>>>()?;
    let report = witness_set(&states, blank)?;
    let alpha = labels.first().map(|l| l.alpha());
    Ok(match alpha {
        Some(a) if labels.iter().all(|l| (l.alpha() - a).abs() < 1e-12) => report.with_alpha(a),
        _ => report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// Pair `{(0,t), (1,t)}`: shared support.
    I,
    /// Pair `{(0,t), (0,t')}`: crossed support across the reducing cut.
    II,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= FRAC_PI_4 + 1e-12) {
        return Err(Error::BadAlpha {
            alpha,
            range: "(0, pi/4]",
        });
    }
    Ok(())
}

/// Closed-form `(N(rho_in), N(rho_out))` for the two reduced pairs with a
/// same-angle blank.
pub fn closed_form(alpha: f64, case: Case) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let s2 = (2.0 * alpha).sin();
    let c2 = (2.0 * alpha).cos();
    let n_out = match case {
        Case::I => s2 * (s2 + 2.0 * c2),
        Case::II => (s2 * s2 * (2.0 - s2 * s2)).sqrt(),
    };
    Ok((s2, n_out))
}

/// Angle above which the case-I output negativity exceeds 1: `asin(1/sqrt5)/2`.
pub fn threshold_alpha() -> f64 {
    0.5 * (1.0 / 5f64.sqrt()).asin()
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    if f_lo.signum() == f(hi).signum() {
        return Err(Error::BadRange(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Reference pairs for the two cases on `n >= 2` qubits at angle `alpha`,
/// together with the blank `Psi_{0,0..0}(alpha)`. Both reduce to the
/// two-qubit closed forms on the party-1 cut.
pub fn reference_pair(n: usize, alpha: f64, case: Case) -> Result<([PureState; 2], PureState)> {
    let base = CatLabel::from_bits(n, 0, 0, alpha)?;
    let partner = match case {
        Case::I => CatLabel::from_bits(n, 1, 0, alpha)?,
        // every tail bit flipped: qubit 1 pairs with the opposite branch of the rest
        Case::II => CatLabel::from_bits(n, 0, (1 << (n - 1)) - 1, alpha)?,
    };
    let blank = cat_state(&base)?;
    Ok(([blank.clone(), cat_state(&partner)?], blank))
}

/// Numeric `(N(rho_in), N(rho_out))` for a reference pair on the party-1 cut.
pub fn numeric_negativities(n: usize, alpha: f64, case: Case) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let (pair, blank) = reference_pair(n, alpha, case)?;
    let cut = party_cut(n, 1)?;
    Ok((
        negativity(&build_rho_in(&pair, &blank)?, &cut)?,
        negativity(&build_rho_out(&pair, &blank)?, &cut)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub n_in: f64,
    pub n_out_case_i: f64,
    pub n_out_case_ii: f64,
}

pub const SWEEP_QUBITS: usize = 3;
pub const DEFAULT_SWEEP_MIN: f64 = 0.01;
pub const DEFAULT_SWEEP_MAX: f64 = FRAC_PI_4;
pub const DEFAULT_SWEEP_STEPS: usize = 200;

/// Uniform grid `alpha_min..=alpha_max` with `steps` points; every value is
/// computed from explicitly built three-qubit mixtures.
pub fn sweep(alpha_min: f64, alpha_max: f64, steps: usize) -> Result<Vec<SweepRow>> {
    if !(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max <= FRAC_PI_4 + 1e-12) || steps < 2 {
        return Err(Error::BadRange(format!(
            "need 0 < alpha_min < alpha_max <= pi/4 and steps >= 2, got ({alpha_min}, {alpha_max}, {steps})"
        )));
    }
    let alpha_max = alpha_max.min(FRAC_PI_4);
    let width = alpha_max - alpha_min;
    (0..steps)
        .into_par_iter()
        .map(|k| {
            let alpha = if k == steps - 1 {
                alpha_max
            } else {
                alpha_min + width * k as f64 / (steps - 1) as f64
            };
            let (n_in, n_out_case_i) = numeric_negativities(SWEEP_QUBITS, alpha, Case::I)?;
            let (_, n_out_case_ii) = numeric_negativities(SWEEP_QUBITS, alpha, Case::II)?;
            Ok(SweepRow {
                alpha,
                n_in,
                n_out_case_i,
                n_out_case_ii,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "alpha,n_in,n_out_case_i,n_out_case_ii";

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    // the exponent is taken after rounding, so 9.99.. -> 10 moves up a decade
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let exp: i32 = e.parse().expect("exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [r.alpha, r.n_in, r.n_out_case_i, r.n_out_case_ii].map(|x| format_significant(x, 12));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `(U ⊗ I)`
    First,
    /// `(I ⊗ U)`
    Second,
}

fn coefficients_2x2(psi: &PureState) -> Result<CMatrix> {
    if psi.n_qubits() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "convertibility needs two-qubit states, got {} qubits",
            psi.n_qubits()
        )));
    }
    CMatrix::new(2, 2, psi.amplitudes().entries().to_vec())
}

fn inverse_2x2(m: &CMatrix) -> Result<CMatrix> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.norm() < SINGULAR_TOL {
        return Err(Error::SingularCoefficients { det: det.norm() });
    }
    let inv = C64::new(1.0, 0.0) / det;
    CMatrix::new(
        2,
        2,
        vec![m[(1, 1)] * inv, -m[(0, 1)] * inv, -m[(1, 0)] * inv, m[(0, 0)] * inv],
    )
}

/// Unitary `U` with `(U ⊗ I)|psi> = |phi>`, if one exists.
///
/// With `psi = sum M_ij |ij>` the relation reads `M_phi = U M_psi`, so the
/// only candidate is `U = M_phi M_psi^-1`; it is returned iff unitary.
pub fn convertibility(psi: &PureState, phi: &PureState) -> Result<Option<CMatrix>> {
    convertibility_on(psi, phi, Side::First)
}

/// As [`convertibility`], with the unitary acting on the chosen side.
pub fn convertibility_on(psi: &PureState, phi: &PureState, side: Side) -> Result<Option<CMatrix>> {
    let m_psi = coefficients_2x2(psi)?;
    let m_phi = coefficients_2x2(phi)?;
    let candidate = match side {
        Side::First => m_phi.matmul(&inverse_2x2(&m_psi)?)?,
        // (I ⊗ U): M_phi = M_psi U^T
        Side::Second => inverse_2x2(&m_psi)?.matmul(&m_phi)?.transpose(),
    };
    Ok(candidate.is_unitary(CONVERTIBILITY_TOL).then_some(candidate))
}

/// True iff every member is `(U_j ⊗ I)|psi_0>` for unitaries `U_j`, with all
/// unitaries on the same side (either party may be called "first").
pub fn unitary_relation_check(set: &[PureState]) -> Result<bool> {
    let Some((first, rest)) = set.split_first() else {
        return Err(Error::DimensionMismatch("empty set".into()));
    };
    for side in [Side::First, Side::Second] {
        let mut all = true;
        for psi in rest {
            if convertibility_on(first, psi, side)?.is_none() {
                all = false;
                break;
            }
        }
        if all {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The two-qubit pair `cos|00> + sin|11>`, `sin|00> - cos|11>`.
pub fn nonmaximal_pair(alpha: f64) -> Result<(PureState, PureState)> {
    let (c, s) = (alpha.cos(), alpha.sin());
    Ok((
        PureState::from_real(2, &[c, 0.0, 0.0, s])?,
        PureState::from_real(2, &[s, 0.0, 0.0, -c])?,
    ))
}
