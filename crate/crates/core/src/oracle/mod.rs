//! Independent reference implementations used to cross-check the simulators.

pub mod enumeration;
pub mod statevec;
