//! Exact Auslander–Reiten computations for lattices over the symmetric
//! Kronecker order `A = O[X,Y]/(X², Y²)`, with `O` a complete discrete
//! valuation ring modelled as `F_p[ε]/(ε^N)`.

pub mod abar;
pub mod almost_split;
pub mod component;
pub mod dvr;
pub mod error;
pub mod hom;
pub mod kronecker;
pub mod lattice;
pub mod quiver;
pub mod verify;

pub use error::{Error, Result};
