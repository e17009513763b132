//! Shared test support: brute-force oracles and random instance builders.
#![allow(dead_code)]

pub mod checks;
pub mod instances;
pub mod oracle;
pub mod props;
