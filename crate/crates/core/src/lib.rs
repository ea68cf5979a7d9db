//! Bounds, waiting-time distributions and simulators for quantum
//! networks and repeater chains.

pub mod capbounds;
pub mod export;
pub mod flows;
pub mod lp;
pub mod netmodel;
pub mod chain;
pub mod formulas;
pub mod disttrack;
pub mod markov;
pub mod montecarlo;
pub mod des;
