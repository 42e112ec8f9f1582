//! Local cloning of CAT states: numerics for pure multi-qubit states, LOCC
//! protocol simulation, pair classification and negativity witnesses.

pub mod catstates;
pub mod error;
pub mod locc;
pub mod qstate;
pub mod tensorlab;
pub mod witness;

pub use catstates::{
    cat_state, classify_pair, classify_states, ghz_state, max_clonable_set, validate_set, CatLabel, PairClass,
};
pub use error::{Error, Result};
pub use locc::{run, theorem4_protocol, theorem5_protocol, verify_cloning, CloneReport, PairKind, Protocol};
pub use qstate::{negativity, Bipartition, DensityOperator, PureState, StateDocument};
pub use tensorlab::{CMatrix, CVector, C64};
pub use witness::{witness_set, Case, SweepRow, Verdict, WitnessReport};
