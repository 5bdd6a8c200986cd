//! Test support shared by the core and cli test suites: a brute-force
//! reference implementation of the keying pipeline and synthetic fixtures.

#![allow(dead_code)]

pub mod oracle;
pub mod synth;
