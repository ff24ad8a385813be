#![no_std]
extern crate alloc;

pub mod arith;
pub mod classify;
pub mod config;
pub mod error;
pub mod group;
pub mod lattice;
pub mod manifolds;
pub mod matrix;
pub mod qform;
pub mod ratmod;
pub mod snf;
pub mod torsion;

pub use error::{Error, Result};
pub use matrix::IntMatrix;
pub use ratmod::RationalModZ;
pub use group::{Element, FinAbGroup, GroupHom};
pub use config::Bounds;
pub use qform::{Flavor, QuadraticFunction};
pub use lattice::{isometry_search, LatticeVerdict};
pub use torsion::{LinkingForm, QuadraticLinkingFunction, WilkensData};
