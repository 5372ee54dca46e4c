//! Dynamics of the Wehler K3 automorphism: lattice criteria, exact spectral
//! data on the Néron–Severi lattice, surface arithmetic, orbit statistics and
//! Green-current diagnostics.

pub mod cli;
pub mod currents;
pub mod dynamics;
pub mod lattice;
pub mod picard;
pub mod scalar;
pub mod surface;
