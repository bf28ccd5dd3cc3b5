//! Finite cylindric spaces built from finite relational structures.
//!
//! The crate covers first-order syntax, finite structures with an
//! isomorphism oracle, abstract finite cylindric spaces with their
//! substitution and permutation calculus, the topologization of a
//! structure, point relations, expansion spaces and model spaces.

pub mod bitset;
pub mod error;
pub mod expansion;
pub mod fol;
pub mod laws;
pub mod mapping;
pub mod model;
pub mod points;
pub mod space;
pub mod structure;
pub mod topo;

pub use bitset::{Partition, PointSet};
pub use error::{CylError, Result};
pub use fol::{free_vars, parse_formula, render, substitute_var, Formula, Signature};
pub use space::{parse_space, render_space, Ambient, Basis, BasisKind, CylSpace, Lift, VarMap};
pub use structure::{
    automorphisms, evaluate, parse_structure, pinned_isomorphism, pure_set, same_type_oracle,
    signatures_match, two_element_digraphs, FiniteStructure, Relation,
};
pub use model::{build_model_space, type_space, type_space_embedding, ModelSpace, TypeSpace};
pub use expansion::{build_expansion, enumerate_atoms, extend_to_atom, is_atom, Atom, Expansion, ExpansionContext, ExpansionOrder};
