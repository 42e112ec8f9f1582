//! LOCC protocols over `n` parties, each holding one qubit of an unknown
//! "original" state and one qubit of a known "blank" state.
//!
//! Composite register layout: qubits `1..=n` are the original copy and
//! `n+1..=2n` the blank copy, so party `i` owns qubits `i` and `n+i`. The
//! composite input is therefore `original ⊗ blank`.
//!
//! [`run`] expands every measurement outcome exhaustively, so cloning is
//! verified on all branches rather than sampled.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::Serialize;

use crate::catstates::ALPHA_TOL;
use crate::error::{Error, Result};
use crate::qstate::{fidelity, PureState};
use crate::tensorlab::{CMatrix, C64};

/// Tolerance on `sum_k M_k^dag M_k = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Branches below this probability are dropped.
pub const BRANCH_PROB_FLOOR: f64 = 1e-14;
/// A clone succeeds when every branch reaches at least `1 - CLONE_TOL` fidelity.
pub const CLONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    Original,
    Blank,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Original => "orig",
            Role::Blank => "blank",
        })
    }
}

/// One qubit slot: `party` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Slot {
    pub party: usize,
    pub role: Role,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.party, self.role)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Registers {
    n_parties: usize,
}

impl Registers {
    pub fn new(n_parties: usize) -> Result<Self> {
        if n_parties == 0 {
            return Err(Error::BadN(0));
        }
        Ok(Self { n_parties })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_parties
    }

    /// Global 1-based qubit index of a slot.
    pub fn qubit(&self, slot: Slot) -> Result<usize> {
        if slot.party == 0 || slot.party > self.n_parties {
            return Err(Error::BadTargets(format!(
                "party {} out of range 1..={}",
                slot.party, self.n_parties
            )));
        }
        Ok(match slot.role {
            Role::Original => slot.party,
            Role::Blank => self.n_parties + slot.party,
        })
    }

    pub fn slot(&self, qubit: usize) -> Option<Slot> {
        match qubit {
            q if q >= 1 && q <= self.n_parties => Some(Slot {
                party: q,
                role: Role::Original,
            }),
            q if q > self.n_parties && q <= 2 * self.n_parties => Some(Slot {
                party: q - self.n_parties,
                role: Role::Blank,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolStep {
    /// Unitary on the listed slots (first slot is the most significant qubit of `unitary`).
    Gate {
        slots: Vec<Slot>,
        unitary: CMatrix,
        name: String,
    },
    /// CNOT inside one party's lab.
    Cnot { party: usize, source: Role, target: Role },
    /// Measurement with Kraus operators `operators`; when `broadcast` the
    /// outcome is appended to the public transcript.
    Measure {
        slot: Slot,
        operators: Vec<CMatrix>,
        broadcast: bool,
    },
    /// Runs `step` only if broadcast message number `message` equals `outcome`.
    Conditional {
        message: usize,
        outcome: usize,
        step: Box<ProtocolStep>,
    },
}

impl ProtocolStep {
    pub fn local_gate(party: usize, roles: &[Role], unitary: CMatrix, name: &str) -> Self {
        ProtocolStep::Gate {
            slots: roles.iter().map(|&role| Slot { party, role }).collect(),
            unitary,
            name: name.to_string(),
        }
    }

    /// Slots touched by the quantum part of this step.
    pub fn slots(&self) -> Vec<Slot> {
        match self {
            ProtocolStep::Gate { slots, .. } => slots.clone(),
            ProtocolStep::Cnot { party, source, target } => vec![
                Slot {
                    party: *party,
                    role: *source,
                },
                Slot {
                    party: *party,
                    role: *target,
                },
            ],
            ProtocolStep::Measure { slot, .. } => vec![*slot],
            ProtocolStep::Conditional { step, .. } => step.slots(),
        }
    }

    fn describe(&self) -> (String, String) {
        match self {
            ProtocolStep::Gate { slots, name, .. } => {
                let ops: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
                (name.clone(), ops.join(","))
            }
            ProtocolStep::Cnot { party, source, target } => {
                ("CNOT".into(), format!("{party}.{source}->{party}.{target}"))
            }
            ProtocolStep::Measure {
                slot,
                operators,
                broadcast,
            } => (
                if *broadcast { "MEASURE+BROADCAST" } else { "MEASURE" }.into(),
                format!("{slot} ({} outcomes)", operators.len()),
            ),
            ProtocolStep::Conditional { message, outcome, step } => {
                let (op, operands) = step.describe();
                (format!("IF m{message}={outcome} {op}"), operands)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub name: String,
    pub registers: Registers,
    pub steps: Vec<ProtocolStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityViolation {
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for LocalityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)
    }
}

fn completeness_defect(ops: &[CMatrix]) -> Result<f64> {
    let dim = ops.first().map(|m| m.rows()).unwrap_or(2);
    let mut acc = CMatrix::zeros(dim, dim);
    for m in ops {
        acc.add_scaled(&m.adjoint().matmul(m)?, C64::new(1.0, 0.0))?;
    }
    Ok(acc.max_abs_diff(&CMatrix::identity(dim)))
}

/// `Ok(())` iff every step acts inside a single lab, measurements are
/// complete, and conditionals read only messages already broadcast.
pub fn locality_check(protocol: &Protocol) -> std::result::Result<(), LocalityViolation> {
    let regs = protocol.registers;
    let mut broadcasts = 0usize;
    for (index, step) in protocol.steps.iter().enumerate() {
        let fail = |reason: String| Err(LocalityViolation { step: index, reason });
        let slots = step.slots();
        if let Some(bad) = slots.iter().find(|s| s.party == 0 || s.party > regs.n_parties()) {
            return fail(format!("slot {bad} names a party outside 1..={}", regs.n_parties()));
        }
        if let Some(first) = slots.first() {
            if let Some(other) = slots.iter().find(|s| s.party != first.party) {
                return fail(format!(
                    "quantum operation spans parties {} and {}",
                    first.party, other.party
                ));
            }
        }
        let mut inner = step;
        let mut conditional = false;
        while let ProtocolStep::Conditional { message, step, .. } = inner {
            if *message >= broadcasts {
                return fail(format!(
                    "conditional reads message {message} but only {broadcasts} have been broadcast"
                ));
            }
            conditional = true;
            inner = step;
        }
        match inner {
            ProtocolStep::Measure {
                operators, broadcast, ..
            } => {
                match completeness_defect(operators) {
                    Ok(d) if d <= COMPLETENESS_TOL => {}
                    Ok(d) => return fail(format!("measurement operators incomplete (defect {d:e})")),
                    Err(e) => return fail(format!("malformed measurement operators: {e}")),
                }
                if *broadcast {
                    // message numbers must not depend on the branch
                    if conditional {
                        return fail("broadcast measurement inside a conditional".into());
                    }
                    broadcasts += 1;
                }
            }
            ProtocolStep::Cnot { source, target, .. } if source == target => {
                return fail("CNOT source and target coincide".into());
            }
            _ => {}
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub party: usize,
    pub operation: String,
    pub operands: String,
    /// Outcome and branch probability for measurements.
    pub outcome: Option<(usize, f64)>,
    pub skipped: bool,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step={} party={} op={} operands={}",
            self.step, self.party, self.operation, self.operands
        )?;
        if let Some((k, p)) = self.outcome {
            write!(f, " outcome={k} p={p:.12}")?;
        }
        if self.skipped {
            write!(f, " (skipped)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BranchOutcome {
    /// Broadcast messages in order.
    pub transcript: Vec<usize>,
    pub probability: f64,
    pub state: PureState,
    pub trace: Vec<TraceEntry>,
}

struct Partial {
    transcript: Vec<usize>,
    probability: f64,
    state: PureState,
    trace: Vec<TraceEntry>,
}

/// Executes `protocol` on `input`, returning every measurement branch in
/// depth-first order (lower outcome index first).
pub fn run(protocol: &Protocol, input: &PureState) -> Result<Vec<BranchOutcome>> {
    if let Err(v) = locality_check(protocol) {
        if v.reason.contains("measurement operators") {
            return Err(Error::IncompleteMeasurement {
                step: v.step,
                defect: f64::NAN,
            });
        }
        return Err(Error::Locality(v.to_string()));
    }
    let regs = protocol.registers;
    if input.n_qubits() != regs.n_qubits() {
        return Err(Error::BadDimension(format!(
            "{} parties need {} qubits, input has {}",
            regs.n_parties(),
            regs.n_qubits(),
            input.n_qubits()
        )));
    }
    let mut done = Vec::new();
    expand(
        protocol,
        0,
        Partial {
            transcript: Vec::new(),
            probability: 1.0,
            state: input.clone(),
            trace: Vec::new(),
        },
        &mut done,
    )?;
    Ok(done)
}

fn expand(protocol: &Protocol, from: usize, mut branch: Partial, done: &mut Vec<BranchOutcome>) -> Result<()> {
    let regs = protocol.registers;
    for index in from..protocol.steps.len() {
        let step = &protocol.steps[index];
        let (operation, operands) = step.describe();
        let party = step.slots().first().map(|s| s.party).unwrap_or(0);

        let mut active = step;
        let mut enabled = true;
        while let ProtocolStep::Conditional { message, outcome, step } = active {
            enabled &= branch.transcript.get(*message) == Some(outcome);
            active = step;
        }
        if !enabled {
            branch.trace.push(TraceEntry {
                step: index,
                party,
                operation,
                operands,
                outcome: None,
                skipped: true,
            });
            continue;
        }

        match active {
            ProtocolStep::Gate { slots, unitary, .. } => {
                let targets = slots.iter().map(|&s| regs.qubit(s)).collect::<Result<Vec<_>>>()?;
                branch.state = branch.state.apply_gate(unitary, &targets)?;
            }
            ProtocolStep::Cnot { party, source, target } => {
                let s = regs.qubit(Slot {
                    party: *party,
                    role: *source,
                })?;
                let t = regs.qubit(Slot {
                    party: *party,
                    role: *target,
                })?;
                branch.state = branch.state.apply_gate(&CMatrix::cnot(), &[s, t])?;
            }
            ProtocolStep::Measure {
                slot,
                operators,
                broadcast,
            } => {
                let defect = completeness_defect(operators)?;
                if defect > COMPLETENESS_TOL {
                    return Err(Error::IncompleteMeasurement { step: index, defect });
                }
                let q = regs.qubit(*slot)?;
                for (k, m) in operators.iter().enumerate() {
                    let post = branch.state.apply_operator(m, &[q])?;
                    let p_k = post.norm().powi(2);
                    if p_k < BRANCH_PROB_FLOOR {
                        continue;
                    }
                    let mut transcript = branch.transcript.clone();
                    if *broadcast {
                        transcript.push(k);
                    }
                    let mut trace = branch.trace.clone();
                    trace.push(TraceEntry {
                        step: index,
                        party,
                        operation: operation.clone(),
                        operands: operands.clone(),
                        outcome: Some((k, p_k)),
                        skipped: false,
                    });
                    let child = Partial {
                        transcript,
                        probability: branch.probability * p_k,
                        state: post.scaled(1.0 / p_k.sqrt()),
                        trace,
                    };
                    expand(protocol, index + 1, child, done)?;
                }
                return Ok(());
            }
            ProtocolStep::Conditional { .. } => unreachable!("conditionals unwrapped above"),
        }
        branch.trace.push(TraceEntry {
            step: index,
            party,
            operation,
            operands,
            outcome: None,
            skipped: false,
        });
    }
    done.push(BranchOutcome {
        transcript: branch.transcript,
        probability: branch.probability,
        state: branch.state,
        trace: branch.trace,
    });
    Ok(())
}

fn check_protocol_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= FRAC_PI_4 + ALPHA_TOL) {
        return Err(Error::BadAlpha {
            alpha,
            range: "(0, pi/4]",
        });
    }
    Ok(alpha.min(FRAC_PI_4))
}

/// Measurement pair `M0 = cos|0><0| + sin|1><1|`, `M1 = sin|0><0| + cos|1><1|`.
pub fn cat_filter_operators(alpha: f64) -> [CMatrix; 2] {
    let (c, s) = (alpha.cos(), alpha.sin());
    [CMatrix::from_real_diag(&[c, s]), CMatrix::from_real_diag(&[s, c])]
}

/// Clones any member of the `p = 0` family at angle `alpha` using a GHZ blank:
/// transversal CNOT original→blank, party 1 filters its blank qubit with
/// `{M0, M1}` and broadcasts `k`, then every party applies `X^k` to its blank.
pub fn theorem4_protocol(n: usize, alpha: f64) -> Result<Protocol> {
    if n < 2 {
        return Err(Error::BadN(n));
    }
    let alpha = check_protocol_alpha(alpha)?;
    let mut steps: Vec<ProtocolStep> = (1..=n)
        .map(|party| ProtocolStep::Cnot {
            party,
            source: Role::Original,
            target: Role::Blank,
        })
        .collect();
    steps.push(ProtocolStep::Measure {
        slot: Slot {
            party: 1,
            role: Role::Blank,
        },
        operators: cat_filter_operators(alpha).to_vec(),
        broadcast: true,
    });
    for party in 1..=n {
        steps.push(ProtocolStep::Conditional {
            message: 0,
            outcome: 1,
            step: Box::new(ProtocolStep::local_gate(party, &[Role::Blank], CMatrix::pauli_x(), "X")),
        });
    }
    Ok(Protocol {
        name: format!("theorem4(n={n}, alpha={alpha})"),
        registers: Registers::new(n)?,
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairKind {
    I,
    II,
}

/// GHZ pair cloners: kind I uses transversal CNOT blank→original, kind II
/// original→blank. Neither measures.
pub fn theorem5_protocol(n: usize, kind: PairKind) -> Result<Protocol> {
    if n < 2 {
        return Err(Error::BadN(n));
    }
    let (source, target) = match kind {
        PairKind::I => (Role::Blank, Role::Original),
        PairKind::II => (Role::Original, Role::Blank),
    };
    Ok(Protocol {
        name: format!("theorem5-{kind:?}(n={n})"),
        registers: Registers::new(n)?,
        steps: (1..=n)
            .map(|party| ProtocolStep::Cnot { party, source, target })
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchFidelity {
    pub transcript: Vec<usize>,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberReport {
    pub index: usize,
    pub branches: Vec<BranchFidelity>,
    pub min_fidelity: f64,
    pub total_probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CloneReport {
    pub members: Vec<MemberReport>,
    pub success: bool,
}

/// Runs `protocol` on `psi ⊗ blank` and scores every branch against `psi ⊗ psi`.
pub fn clone_member(
    protocol: &Protocol,
    psi: &PureState,
    blank: &PureState,
) -> Result<(MemberReport, Vec<BranchOutcome>)> {
    let target = psi.tensor(psi);
    let outcomes = run(protocol, &psi.tensor(blank))?;
    let branches = outcomes
        .iter()
        .map(|b| {
            Ok(BranchFidelity {
                transcript: b.transcript.clone(),
                probability: b.probability,
                fidelity: fidelity(&b.state, &target)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_fidelity = branches.iter().map(|b| b.fidelity).fold(f64::INFINITY, f64::min);
    let total_probability = branches.iter().map(|b| b.probability).sum();
    Ok((
        MemberReport {
            index: 0,
            branches,
            min_fidelity,
            total_probability,
        },
        outcomes,
    ))
}

pub fn verify_cloning(protocol: &Protocol, set: &[PureState], blank: &PureState) -> Result<CloneReport> {
    if let Err(v) = locality_check(protocol) {
        return Err(Error::Locality(v.to_string()));
    }
    let mut members = Vec::with_capacity(set.len());
    for (index, psi) in set.iter().enumerate() {
        let (mut report, _) = clone_member(protocol, psi, blank)?;
        report.index = index;
        members.push(report);
    }
    let success = members.iter().all(|m| m.min_fidelity >= 1.0 - CLONE_TOL);
    Ok(CloneReport { members, success })
}
