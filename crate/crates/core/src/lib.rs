//! Vibronic electron transfer in donor–acceptor chains: exact open-system
//! reference dynamics, Trotter circuit emulation under hardware noise,
//! post-selection mitigation and the analysis built on top of them.

pub mod analysis;
pub mod bath;
pub mod circuit;
pub mod digest;
pub mod emulator;
pub mod error;
pub mod harness;
pub mod mitigation;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod series;
pub mod units;
