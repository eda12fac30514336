//! Plant model, surrogate fitting, and the two-layer controller for a
//! multi-stack power-to-hydrogen plant fed through thyristor rectifiers.

pub mod config;
pub mod fitting;
pub mod mpc;
pub mod plant;
pub mod rectifier;
pub mod stack;
