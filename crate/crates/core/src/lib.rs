//! Day-ahead scheduling of a hybrid AC/DC microgrid whose only storage is an
//! electric-vehicle fleet.

pub mod bnb;
pub mod formulation;
pub mod linalg;
pub mod model;
pub mod par;
pub mod powerflow;
pub mod qp;
pub mod qpsolver;
pub mod scenarios;
