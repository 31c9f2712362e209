//! Dynamical decoupling: sequences, frame analysis and dense simulations.

pub mod bb1;
pub mod chain;
pub mod motion;
pub mod sequence;
pub mod simulate;

pub use bb1::{bb1_sequence, Bb1};
pub use chain::{build_hamiltonian, LevelSet, SpinChainConfig, TermMask};
pub use motion::{
    gate_motion_phase, simulate_with_motion, MotionChannel, MotionConfig, MotionResult,
};
pub use sequence::{
    builtin_by_name, builtin_sequences, check_conditions, toggling_frames, Axis, BuiltinSequences,
    ConditionReport, PulseSequence, ToggleFrames, DEFAULT_DUTY, DEFAULT_TC_JSS,
};
pub use simulate::{
    simulate_gate, simulate_storage, ErrorTrace, GateOptions, GateResult, StorageOptions,
};
