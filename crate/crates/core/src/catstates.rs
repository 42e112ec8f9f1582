//! Canonical n-qubit CAT states, pair classification into the two reduced
//! forms, and validation of candidate state sets.
//!
//! A label `(p, tail, alpha)` names the state
//!
//! ```text
//! cos^(1-p) a  sin^p a |0 t2 .. tn>  +  (-1)^p cos^p a  sin^(1-p) a |1 ~t2 .. ~tn>
//! ```
//!
//! with `0 < alpha <= pi/4`; `alpha = pi/4` is the GHZ family.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{
    coefficient_matrix, entanglement_entropy, qubit_mask, schmidt_decomposition, Bipartition, PureState,
};
use crate::tensorlab::{CMatrix, CVector, C64, ZERO};

/// Label-level tolerance on alpha.
pub const ALPHA_TOL: f64 = 1e-12;
/// State-level tolerance on entanglement entropy.
pub const ENTROPY_TOL: f64 = 1e-9;
/// Amplitude tolerance used when matching the reduced pair shapes.
pub const SHAPE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatLabel {
    n: usize,
    p: u8,
    tail: Vec<u8>,
    alpha: f64,
}

impl CatLabel {
    pub fn new(p: u8, tail: Vec<u8>, alpha: f64) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::BadN(1));
        }
        if p > 1 || tail.iter().any(|&b| b > 1) {
            return Err(Error::BadLabel {
                input: format!("{p},{tail:?}"),
                reason: "bits must be 0 or 1".into(),
            });
        }
        let alpha = check_alpha(alpha)?;
        Ok(Self {
            n: tail.len() + 1,
            p,
            tail,
            alpha,
        })
    }

    /// Label for an `n`-qubit state with the tail given as the low `n-1` bits of `tail_bits`.
    pub fn from_bits(n: usize, p: u8, tail_bits: usize, alpha: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadN(n));
        }
        let tail = (0..n - 1).map(|k| ((tail_bits >> (n - 2 - k)) & 1) as u8).collect();
        Self::new(p, tail, alpha)
    }

    /// Checks the tail length against an expected qubit count.
    pub fn with_n(self, n: usize) -> Result<Self> {
        if self.n != n {
            return Err(Error::BadTail {
                got: self.tail.len(),
                expected: n.saturating_sub(1),
            });
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn tail(&self) -> &[u8] {
        &self.tail
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_ghz(&self) -> bool {
        (self.alpha - FRAC_PI_4).abs() <= ALPHA_TOL
    }

    pub fn tail_bits(&self) -> usize {
        self.tail.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    /// Same label with tail bit at qubit `q` (2..=n) flipped.
    pub fn flip_tail(&self, q: usize) -> CatLabel {
        let mut out = self.clone();
        out.tail[q - 2] ^= 1;
        out
    }
}

impl fmt::Display for CatLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tail: String = self.tail.iter().map(|b| char::from(b'0' + b)).collect();
        write!(f, "{},{}@{}", self.p, tail, self.alpha)
    }
}

impl FromStr for CatLabel {
    type Err = Error;

    /// Parses `p,tail@alpha`, e.g. `0,01@0.3926990817` or `1,000@pi/4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::BadLabel {
            input: s.to_string(),
            reason: reason.into(),
        };
        let (bits, alpha) = s.split_once('@').ok_or_else(|| bad("missing '@alpha'"))?;
        let (p, tail) = bits
            .split_once(',')
            .ok_or_else(|| bad("missing ',' between p and tail"))?;
        let p = match p.trim() {
            "0" => 0,
            "1" => 1,
            _ => return Err(bad("p must be 0 or 1")),
        };
        let tail = tail
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(bad("tail must be a string of 0/1")),
            })
            .collect::<Result<Vec<u8>>>()?;
        if tail.is_empty() {
            return Err(bad("tail must be nonempty"));
        }
        let alpha = parse_angle(alpha).map_err(|e| bad(&e))?;
        CatLabel::new(p, tail, alpha)
    }
}

/// Parses an angle in radians: a decimal, or `pi`, `pi/m`, `k*pi`, `k*pi/m`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (
            n.trim(),
            d.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad denominator in {s:?}"))?,
        ),
        None => (s, 1.0),
    };
    let factor = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(k) => k
            .trim_end_matches('*')
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("bad multiplier in {s:?}"))?,
        None => return Err(format!("cannot parse angle {s:?}")),
    };
    Ok(factor * std::f64::consts::PI / den)
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= FRAC_PI_4 + ALPHA_TOL) {
        return Err(Error::BadAlpha {
            alpha,
            range: "(0, pi/4]",
        });
    }
    Ok(alpha.min(FRAC_PI_4))
}

/// Basis indices `(|0 t>, |1 ~t>)` carrying the two amplitudes of a label.
fn support_indices(n: usize, tail_bits: usize) -> (usize, usize) {
    let low = (1usize << (n - 1)) - 1;
    (tail_bits, (1 << (n - 1)) | (!tail_bits & low))
}

pub fn cat_state(label: &CatLabel) -> Result<PureState> {
    let n = label.n;
    if label.tail.len() != n - 1 {
        return Err(Error::BadTail {
            got: label.tail.len(),
            expected: n - 1,
        });
    }
    let alpha = check_alpha(label.alpha)?;
    let (c, s) = (alpha.cos(), alpha.sin());
    let (first, second) = if label.p == 0 { (c, s) } else { (s, -c) };
    let (i0, i1) = support_indices(n, label.tail_bits());
    let mut amps = CVector::zeros(1 << n);
    amps[i0] = C64::new(first, 0.0);
    amps[i1] = C64::new(second, 0.0);
    PureState::new(n, amps)
}

/// `(|0..0> + |1..1>)/sqrt(2)`
pub fn ghz_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::BadN(n));
    }
    cat_state(&CatLabel::from_bits(n, 0, 0, FRAC_PI_4)?)
}

/// Bit-shift operator `P_i = sum_k |i+k mod 2><k|`, i.e. `X^i`.
pub fn shift_operator(i: u8) -> CMatrix {
    if i & 1 == 0 {
        CMatrix::identity(2)
    } else {
        CMatrix::pauli_x()
    }
}

/// All `2^(n-1)` labels with `p = 0`: the largest set without a type-I pair.
pub fn max_clonable_set(n: usize, alpha: f64) -> Result<Vec<CatLabel>> {
    if n < 2 {
        return Err(Error::BadN(n));
    }
    check_alpha(alpha)?;
    (0..1usize << (n - 1))
        .map(|t| CatLabel::from_bits(n, 0, t, alpha))
        .collect()
}

/// Per-qubit monomial relabeling `X^flip Z^sign` applied on every qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Relabeling {
    /// Bit mask (in basis-index convention) of qubits receiving `X`.
    pub flip_mask: usize,
    /// Bit mask of qubits receiving `Z` (applied before the flip).
    pub sign_mask: usize,
}

impl Relabeling {
    pub const IDENTITY: Relabeling = Relabeling {
        flip_mask: 0,
        sign_mask: 0,
    };

    fn apply(&self, support: &[(usize, C64)]) -> Vec<(usize, C64)> {
        support
            .iter()
            .map(|&(i, z)| {
                let sign = if (i & self.sign_mask).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                (i ^ self.flip_mask, z * sign)
            })
            .collect()
    }

    /// Qubits (1-based) carrying a flip and a sign, respectively.
    pub fn qubits(&self, n: usize) -> (Vec<usize>, Vec<usize>) {
        let pick = |mask: usize| (1..=n).filter(|&q| mask & qubit_mask(n, q) != 0).collect();
        (pick(self.flip_mask), pick(self.sign_mask))
    }

    /// Full `2^n x 2^n` operator of this relabeling.
    pub fn operator(&self, n: usize) -> CMatrix {
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            let sign = if (i & self.sign_mask).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            m[(i ^ self.flip_mask, i)] = C64::new(sign, 0.0);
        }
        m
    }
}

/// Evidence that a pair reduces to one of the canonical forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// Qubits on side A of the certifying cut.
    pub side_a: Vec<usize>,
    /// Qubits on side B.
    pub side_b: Vec<usize>,
    pub relabeling: Relabeling,
    /// True when the second input plays the role of the first state in the form.
    pub swapped: bool,
}

impl Certificate {
    pub fn cut(&self, n: usize) -> Bipartition {
        Bipartition::new(n, self.side_a.iter().copied()).expect("certificate cut is valid")
    }

    pub fn is_single_qubit_cut(&self) -> bool {
        self.side_a.len() == 1 || self.side_b.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", content = "certificate")]
pub enum PairClass {
    /// Same two-dimensional support, coefficients `(cos, sin)` and `(sin, -cos)`.
    TypeI(Certificate),
    /// `cos|00> + sin|11>` and `cos|01> + sin|10>` on the cut, up to phases.
    TypeII(Certificate),
    Unclassified,
}

impl PairClass {
    pub fn name(&self) -> &'static str {
        match self {
            PairClass::TypeI(_) => "TypeI",
            PairClass::TypeII(_) => "TypeII",
            PairClass::Unclassified => "Unclassified",
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            PairClass::TypeI(c) | PairClass::TypeII(c) => Some(c),
            PairClass::Unclassified => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    TypeI,
    TypeII,
}

/// Checks the literal reduced shapes on `cut` for `first`, `second` (each a
/// two-term support).
fn match_shape(first: &[(usize, C64)], second: &[(usize, C64)], cut: &Bipartition) -> Option<Shape> {
    for (e0, e1) in [(first[0], first[1]), (first[1], first[0])] {
        let (x0, y0) = cut.split_index(e0.0);
        let (x1, y1) = cut.split_index(e1.0);
        if x0 == x1 || y0 == y1 {
            continue;
        }
        let (c, s) = (e0.1.norm(), e1.1.norm());
        if c + SHAPE_TOL < s {
            continue;
        }
        // first = g (c|x0 y0> + s|x1 y1>): relative phase must be +1
        if (e1.1 * c - e0.1 * s).norm() > SHAPE_TOL {
            continue;
        }
        let locate = |x: usize, y: usize| {
            second
                .iter()
                .find(|(i, _)| cut.split_index(*i) == (x, y))
                .map(|&(_, z)| z)
        };
        if let (Some(b00), Some(b11)) = (locate(x0, y0), locate(x1, y1)) {
            // second = g' (s|x0 y0> - c|x1 y1>)
            if (b00.norm() - s).abs() < SHAPE_TOL
                && (b11.norm() - c).abs() < SHAPE_TOL
                && (b11 * s + b00 * c).norm() < SHAPE_TOL
            {
                return Some(Shape::TypeI);
            }
        }
        if let (Some(b01), Some(b10)) = (locate(x0, y1), locate(x1, y0)) {
            // second = c e^{i phi}|x0 y1> + s e^{i chi}|x1 y0>
            if (b01.norm() - c).abs() < SHAPE_TOL && (b10.norm() - s).abs() < SHAPE_TOL {
                return Some(Shape::TypeII);
            }
        }
    }
    None
}

/// Cuts in search order: single-qubit cuts (both orientations) first.
fn search_cuts(n: usize) -> Vec<Bipartition> {
    let mut cuts = Bipartition::all(n);
    cuts.sort_by_key(|c| {
        let a = c.side_a().len();
        (a.min(n - a), n - a)
    });
    cuts
}

/// Classifies an arbitrary pair of states by exhaustive search over cuts and
/// per-qubit monomial relabelings. States that are not two-term superpositions
/// are reported as `Unclassified`.
pub fn classify_states(a: &PureState, b: &PureState) -> Result<PairClass> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::LabelMismatch(format!(
            "{} vs {} qubits",
            a.n_qubits(),
            b.n_qubits()
        )));
    }
    let n = a.n_qubits();
    let sa = a.support(SHAPE_TOL);
    let sb = b.support(SHAPE_TOL);
    if n < 2 || sa.len() != 2 || sb.len() != 2 {
        return Ok(PairClass::Unclassified);
    }
    let full = 1usize << n;
    for cut in search_cuts(n) {
        for code in 0..full * full {
            let relabeling = Relabeling {
                flip_mask: code % full,
                sign_mask: code / full,
            };
            let ra = relabeling.apply(&sa);
            let rb = relabeling.apply(&sb);
            for (swapped, first, second) in [(false, &ra, &rb), (true, &rb, &ra)] {
                if let Some(shape) = match_shape(first, second, &cut) {
                    let cert = Certificate {
                        side_a: cut.side_a().iter().copied().collect(),
                        side_b: cut.side_b().into_iter().collect(),
                        relabeling,
                        swapped,
                    };
                    return Ok(match shape {
                        Shape::TypeI => PairClass::TypeI(cert),
                        Shape::TypeII => PairClass::TypeII(cert),
                    });
                }
            }
        }
    }
    Ok(PairClass::Unclassified)
}

pub fn classify_pair(a: &CatLabel, b: &CatLabel) -> Result<PairClass> {
    if a.n != b.n {
        return Err(Error::LabelMismatch(format!("{a} and {b} have different n")));
    }
    if (a.alpha - b.alpha).abs() > ALPHA_TOL {
        return Err(Error::LabelMismatch(format!("{a} and {b} have different alpha")));
    }
    if a.p == b.p && a.tail == b.tail {
        return Err(Error::LabelMismatch(format!("{a} is paired with itself")));
    }
    classify_states(&cat_state(a)?, &cat_state(b)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetReport {
    pub orthogonal: bool,
    pub equal_entanglement: bool,
    pub contains_type_i_pair: bool,
    pub cardinality: usize,
}

pub fn validate_set(labels: &[CatLabel]) -> Result<SetReport> {
    if labels.len() < 2 {
        return Err(Error::LabelMismatch("a set needs at least two labels".into()));
    }
    let n = labels[0].n;
    if let Some(bad) = labels.iter().find(|l| l.n != n) {
        return Err(Error::LabelMismatch(format!("{bad} does not have n = {n}")));
    }
    let states = labels.iter().map(cat_state).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|i| (i + 1..labels.len()).map(move |j| (i, j)))
        .collect();

    let mut orthogonal = true;
    for &(i, j) in &pairs {
        if states[i].inner(&states[j])?.norm() > SHAPE_TOL {
            orthogonal = false;
        }
    }

    let cut = Bipartition::new(n, [1])?;
    let entropies = states
        .iter()
        .map(|s| entanglement_entropy(s, &cut))
        .collect::<Result<Vec<_>>>()?;
    let alpha_equal = labels.iter().all(|l| (l.alpha - labels[0].alpha).abs() <= ALPHA_TOL);
    let entropy_equal = entropies.iter().all(|e| (e - entropies[0]).abs() <= ENTROPY_TOL);

    // type-I pairs need equal alpha and distinct labels
    let contains_type_i_pair = pairs
        .par_iter()
        .filter(|&&(i, j)| {
            (labels[i].alpha - labels[j].alpha).abs() <= ALPHA_TOL
                && (labels[i].p, &labels[i].tail) != (labels[j].p, &labels[j].tail)
        })
        .map(|&(i, j)| classify_states(&states[i], &states[j]))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .any(|c| matches!(c, PairClass::TypeI(_)));

    Ok(SetReport {
        orthogonal,
        equal_entanglement: alpha_equal && entropy_equal,
        contains_type_i_pair,
        cardinality: labels.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairingPattern {
    /// Both states live on the same product support with the same pairing.
    Shared,
    /// Same product support, opposite pairing of A and B vectors.
    Crossed,
    /// The second state leaves the span of the first state's Schmidt vectors.
    Other,
}

/// Two states written against the first state's Schmidt bases on a cut.
#[derive(Debug, Clone, Serialize)]
pub struct BipartiteReduction {
    /// Schmidt coefficients of the first state, descending (padded with 0).
    pub a_coefficients: [f64; 2],
    pub b_coefficients: [f64; 2],
    /// `C[i][j] = (<u_i| ⊗ <v_j|) b` with `(u_i, v_i)` the first state's Schmidt pairs.
    #[serde(serialize_with = "serialize_complex_grid")]
    pub b_in_a_basis: [[C64; 2]; 2],
    /// Weight of the second state outside the span of `u_i ⊗ v_j`.
    pub b_outside_weight: f64,
    pub pattern: PairingPattern,
}

fn serialize_complex_grid<S: serde::Serializer>(grid: &[[C64; 2]; 2], ser: S) -> std::result::Result<S::Ok, S::Error> {
    let flat: Vec<Vec<[f64; 2]>> = grid
        .iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    serde::Serialize::serialize(&flat, ser)
}

pub fn reduce_to_bipartite(a: &PureState, b: &PureState, cut: &Bipartition) -> Result<BipartiteReduction> {
    let sa = schmidt_decomposition(a, cut)?;
    let sb = schmidt_decomposition(b, cut)?;
    for s in [&sa, &sb] {
        if s.rank() > 2 {
            return Err(Error::RankTooHigh { rank: s.rank() });
        }
    }
    let pad = |v: &[f64]| [v.first().copied().unwrap_or(0.0), v.get(1).copied().unwrap_or(0.0)];
    let mb = coefficient_matrix(b, cut)?;
    let mut grid = [[ZERO; 2]; 2];
    for (row, u) in grid.iter_mut().zip(&sa.a_vectors) {
        for (cell, v) in row.iter_mut().zip(&sa.b_vectors) {
            let mut acc = ZERO;
            for r in 0..mb.rows() {
                for c in 0..mb.cols() {
                    acc += u[r].conj() * v[c].conj() * mb[(r, c)];
                }
            }
            *cell = acc;
        }
    }
    let inside: f64 = grid.iter().flatten().map(|z| z.norm_sqr()).sum();
    let outside = (1.0 - inside).max(0.0);
    let pattern = if sa.rank() == 2 && outside < SHAPE_TOL {
        if grid[0][1].norm() < SHAPE_TOL && grid[1][0].norm() < SHAPE_TOL {
            PairingPattern::Shared
        } else if grid[0][0].norm() < SHAPE_TOL && grid[1][1].norm() < SHAPE_TOL {
            PairingPattern::Crossed
        } else {
            PairingPattern::Other
        }
    } else {
        PairingPattern::Other
    };
    Ok(BipartiteReduction {
        a_coefficients: pad(&sa.coefficients),
        b_coefficients: pad(&sb.coefficients),
        b_in_a_basis: grid,
        b_outside_weight: outside,
        pattern,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationRow {
    pub a: String,
    pub b: String,
    pub class: &'static str,
    /// Certifying cut as `{A}|{B}`, empty when unclassified.
    pub cut: String,
    pub single_qubit_cut: bool,
}

/// Classification of every unordered pair of distinct labels at fixed `n`, `alpha`.
pub fn classification_table(n: usize, alpha: f64) -> Result<Vec<ClassificationRow>> {
    if n < 2 {
        return Err(Error::BadN(n));
    }
    let labels: Vec<CatLabel> = (0..2u8)
        .flat_map(|p| (0..1usize << (n - 1)).map(move |t| (p, t)))
        .map(|(p, t)| CatLabel::from_bits(n, p, t, alpha))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|i| (i + 1..labels.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let class = classify_pair(&labels[i], &labels[j])?;
            let (cut, single) = match class.certificate() {
                Some(c) => (c.cut(n).to_string(), c.is_single_qubit_cut()),
                None => (String::new(), false),
            };
            Ok(ClassificationRow {
                a: labels[i].to_string(),
                b: labels[j].to_string(),
                class: class.name(),
                cut,
                single_qubit_cut: single,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::fidelity;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8};

    fn label(p: u8, tail: &str, alpha: f64) -> CatLabel {
        format!("{p},{tail}@{alpha}").parse().unwrap()
    }

    #[test]
    fn ghz_label_gives_ghz() {
        let s = cat_state(&label(0, "00", FRAC_PI_4)).unwrap();
        assert!((s.amplitude(0b000).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(0b111).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.support(0.0).len(), 2);
    }

    #[test]
    fn p1_label_amplitudes() {
        let a = 0.3f64;
        let s = cat_state(&label(1, "01", a)).unwrap();
        assert_eq!(s.amplitude(0b001).re, a.sin());
        assert_eq!(s.amplitude(0b110).re, -a.cos());
        assert_eq!(s.support(0.0).len(), 2);
    }

    #[test]
    fn all_labels_pairwise_orthogonal() {
        for n in 2..=5 {
            let states: Vec<PureState> = (0..2u8)
                .flat_map(|p| (0..1usize << (n - 1)).map(move |t| (p, t)))
                .map(|(p, t)| cat_state(&CatLabel::from_bits(n, p, t, 0.37).unwrap()).unwrap())
                .collect();
            assert_eq!(states.len(), 1 << n);
            for i in 0..states.len() {
                for j in 0..states.len() {
                    let ip = states[i].inner(&states[j]).unwrap().norm();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expected).abs() < 1e-15, "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn label_errors() {
        assert!(matches!(CatLabel::new(0, vec![0], 0.0), Err(Error::BadAlpha { .. })));
        assert!(matches!(CatLabel::new(0, vec![0], 0.8), Err(Error::BadAlpha { .. })));
        assert!(matches!(CatLabel::new(0, vec![], 0.3), Err(Error::BadN(1))));
        assert!(CatLabel::new(2, vec![0], 0.3).is_err());
        assert!(matches!(
            label(0, "00", 0.3).with_n(4),
            Err(Error::BadTail { got: 2, expected: 3 })
        ));
        for bad in ["0,01", "0;01@0.3", "2,01@0.3", "0,0x@0.3", "0,@0.3", "0,01@tau"] {
            assert!(bad.parse::<CatLabel>().is_err(), "{bad}");
        }
    }

    #[test]
    fn label_text_format() {
        let l: CatLabel = "0,01@0.3".parse().unwrap();
        assert_eq!((l.n(), l.p(), l.tail()), (3, 0, &[0u8, 1][..]));
        assert!((l.alpha() - 0.3).abs() < 1e-15);
        let g: CatLabel = "1,000@pi/4".parse().unwrap();
        assert!(g.is_ghz());
        assert_eq!(g.to_string().parse::<CatLabel>().unwrap(), g);
        assert!((parse_angle("3*pi/16").unwrap() - 3.0 * std::f64::consts::PI / 16.0).abs() < 1e-15);
        assert!((parse_angle("pi/8").unwrap() - FRAC_PI_8).abs() < 1e-15);
    }

    #[test]
    fn ghz_state_examples() {
        assert!(matches!(ghz_state(1), Err(Error::BadN(1))));
        let g6 = ghz_state(6).unwrap();
        let sup = g6.support(1e-15);
        assert_eq!(sup.len(), 2);
        assert!(sup.iter().all(|(_, z)| (z.re - FRAC_1_SQRT_2).abs() < 1e-15));
        let g3 = ghz_state(3).unwrap();
        for q in 1..=3 {
            let e = entanglement_entropy(&g3, &Bipartition::new(3, [q]).unwrap()).unwrap();
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_same_tail_is_type_i() {
        let a = 0.3f64;
        for t in ["00", "01", "10", "11"] {
            let class = classify_pair(&label(0, t, a), &label(1, t, a)).unwrap();
            assert!(matches!(class, PairClass::TypeI(_)), "{t}: {class:?}");
        }
    }

    #[test]
    fn classify_p0_pairs_is_type_ii() {
        let class = classify_pair(&label(0, "00", 0.3), &label(0, "01", 0.3)).unwrap();
        let PairClass::TypeII(cert) = class else {
            panic!("{class:?}")
        };
        assert!(cert.is_single_qubit_cut());
    }

    #[test]
    fn classify_mixed_pair_found_by_search() {
        // {(0,00),(1,11)}: differs in p and in every tail bit
        let class = classify_pair(&label(0, "00", 0.3), &label(1, "11", 0.3)).unwrap();
        assert_eq!(class.name(), "TypeII");
    }

    #[test]
    fn classify_errors() {
        let a = label(0, "00", 0.3);
        assert!(matches!(classify_pair(&a, &a), Err(Error::LabelMismatch(_))));
        assert!(matches!(
            classify_pair(&a, &label(1, "00", 0.31)),
            Err(Error::LabelMismatch(_))
        ));
        assert!(matches!(
            classify_pair(&a, &label(1, "000", 0.3)),
            Err(Error::LabelMismatch(_))
        ));
    }

    #[test]
    fn classify_states_finds_sign_relabeling() {
        // Z on qubit 2 turns (0,00) into itself but flips the relative sign of (1,01)
        let a = cat_state(&label(0, "01", 0.3)).unwrap();
        let b = cat_state(&label(1, "01", 0.3)).unwrap();
        let z2 = |s: &PureState| s.apply_gate(&CMatrix::pauli_z(), &[2]).unwrap();
        let (za, zb) = (z2(&a), z2(&b));
        let class = classify_states(&za, &zb).unwrap();
        let PairClass::TypeI(cert) = class else {
            panic!("{class:?}")
        };
        // the certified relabeling, as an operator, is a signed permutation
        let op = cert.relabeling.operator(3);
        assert!(op.is_unitary(1e-15));
    }

    #[test]
    fn relabeling_operator_matches_sparse_action() {
        let r = Relabeling {
            flip_mask: 0b101,
            sign_mask: 0b011,
        };
        let s = cat_state(&label(1, "10", 0.4)).unwrap();
        let dense = r.operator(3).mul_vec(s.amplitudes()).unwrap();
        for (i, z) in r.apply(&s.support(0.0)) {
            assert_eq!(dense[i], z);
        }
    }

    #[test]
    fn validate_set_examples() {
        let a = 0.3f64;
        let r = validate_set(&[label(0, "00", a), label(1, "00", a)]).unwrap();
        assert!(r.contains_type_i_pair && r.orthogonal && r.equal_entanglement);

        let set = max_clonable_set(3, a).unwrap();
        let r = validate_set(&set).unwrap();
        assert_eq!(
            r,
            SetReport {
                orthogonal: true,
                equal_entanglement: true,
                contains_type_i_pair: false,
                cardinality: 4
            }
        );

        let r = validate_set(&[label(0, "00", 0.3), label(0, "01", 0.2)]).unwrap();
        assert!(!r.equal_entanglement);
        assert!(!r.contains_type_i_pair);

        assert!(validate_set(&[label(0, "00", a)]).is_err());
        assert!(validate_set(&[label(0, "00", a), label(0, "0", a)]).is_err());
    }

    #[test]
    fn max_clonable_set_examples() {
        let s3 = max_clonable_set(3, 0.3).unwrap();
        let tails: Vec<&[u8]> = s3.iter().map(|l| l.tail()).collect();
        assert_eq!(tails, vec![&[0, 0][..], &[0, 1], &[1, 0], &[1, 1]]);
        assert_eq!(max_clonable_set(2, 0.3).unwrap().len(), 2);
        assert!(matches!(max_clonable_set(1, 0.3), Err(Error::BadN(1))));
        assert!(matches!(max_clonable_set(3, 1.0), Err(Error::BadAlpha { .. })));

        // members are (I ⊗ P_t2 ⊗ ... ⊗ P_tn) applied to the all-zero-tail state
        for n in 2..=5 {
            let set = max_clonable_set(n, 0.3).unwrap();
            let base = cat_state(&set[0]).unwrap();
            for l in &set {
                let mut s = base.clone();
                for (k, &bit) in l.tail().iter().enumerate() {
                    s = s.apply_gate(&shift_operator(bit), &[k + 2]).unwrap();
                }
                assert!((fidelity(&s, &cat_state(l).unwrap()).unwrap() - 1.0).abs() < 1e-15);
                assert_eq!(s, cat_state(l).unwrap());
            }
        }
    }

    #[test]
    fn reduction_of_type_i_pair() {
        let a = 0.3f64;
        let (c, s) = (a.cos(), a.sin());
        let pa = cat_state(&label(0, "00", a)).unwrap();
        let pb = cat_state(&label(1, "00", a)).unwrap();
        let r = reduce_to_bipartite(&pa, &pb, &Bipartition::new(3, [1]).unwrap()).unwrap();
        assert_eq!(r.pattern, PairingPattern::Shared);
        assert!((r.a_coefficients[0] - c).abs() < 1e-12 && (r.a_coefficients[1] - s).abs() < 1e-12);
        assert!((r.b_in_a_basis[0][0] - C64::new(s, 0.0)).norm() < 1e-12);
        assert!((r.b_in_a_basis[1][1] - C64::new(-c, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reduction_of_type_ii_pair_on_certifying_cut() {
        let a = 0.3f64;
        let (c, s) = (a.cos(), a.sin());
        let pa = cat_state(&label(0, "00", a)).unwrap();
        let pb = cat_state(&label(0, "01", a)).unwrap();
        let cut = Bipartition::new(3, [1, 2]).unwrap();
        let r = reduce_to_bipartite(&pa, &pb, &cut).unwrap();
        assert_eq!(r.pattern, PairingPattern::Crossed);
        assert!((r.b_in_a_basis[0][1].norm() - c).abs() < 1e-12);
        assert!((r.b_in_a_basis[1][0].norm() - s).abs() < 1e-12);
        assert!((r.b_coefficients[0] - c).abs() < 1e-12);

        // across {1}|{2,3} the B-side supports are orthogonal
        let r = reduce_to_bipartite(&pa, &pb, &Bipartition::new(3, [1]).unwrap()).unwrap();
        assert_eq!(r.pattern, PairingPattern::Other);
        assert!((r.b_outside_weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduction_rejects_high_rank() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let r = PureState::random(4, &mut rng);
        let cut = Bipartition::new(4, [1, 2]).unwrap();
        assert!(matches!(
            reduce_to_bipartite(&r, &r, &cut),
            Err(Error::RankTooHigh { rank: 4 })
        ));
    }

    #[test]
    fn reduction_of_rank_two_random_state_is_normalized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        // single-qubit side A forces Schmidt rank <= 2
        let psi = PureState::random(3, &mut rng);
        let cut = Bipartition::new(3, [2]).unwrap();
        let r = reduce_to_bipartite(&psi, &psi, &cut).unwrap();
        let total: f64 = r.a_coefficients.iter().map(|c| c * c).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(r.pattern, PairingPattern::Shared);
    }
}
