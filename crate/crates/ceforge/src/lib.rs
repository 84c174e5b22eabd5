//! Exact computation with poset-graded differential groups and their
//! Cartan-Eilenberg systems.
//!
//! The crate provides, over `Z`, `Q`, and prime fields:
//!
//! * finite posets with their down-set lattices and convex subsets;
//! * exact matrix arithmetic, Smith normal forms, and lattice solvers;
//! * finitely generated abelian groups, homomorphisms, and homology;
//! * poset-graded differential groups and filtration-compatible maps;
//! * the Cartan-Eilenberg system of a graded differential group, with
//!   checkable exactness, excision, and braid properties;
//! * constructive transfer of a system isomorphism to a filtered chain
//!   isomorphism;
//! * reduction of field-coefficient instances to connection matrices and a
//!   uniqueness certificate for Morse-Smale gradings.

pub mod error;
pub mod linalg;
pub mod poset;
pub mod fgab;
pub mod graded;
pub mod ce;
pub mod connection;
pub mod instance;
pub mod iso;

pub use error::{Error, Result};
