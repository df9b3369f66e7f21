//! Simulation kernels for a single-electron carbon-nanotube quantum-dot
//! qubit: the spin⊗valley spectrum, single- and two-qubit gates, a
//! hyperfine-coupled nuclear-spin memory and the van-der-Waals statics of an
//! atom chain trapped inside the tube.

pub mod angular;
pub mod dotmodel;
pub mod gates;
pub mod memory;
pub mod qstate;
pub mod trap;
pub mod units;
