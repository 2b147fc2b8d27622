//! Torus surgery on fibered 3- and 4-manifolds, made computational.
//!
//! The crate has three layers:
//!
//! * **Integer algebra** ([`surgery`]): surgery coefficients `(p, q, alpha)`,
//!   the unimodular regluing matrix on the boundary 3-torus, and the homology
//!   class of the regluing curve.
//! * **Analytic models** ([`maps`], [`grid`], [`fiber`]): closed-form model
//!   fibrations (multiple-fiber, Seifert, fold charts), exact and
//!   finite-difference Jacobians, grid scans that classify singular points,
//!   and a cell-marking fiber tracer with union-find component extraction.
//! * **Combinatorics** ([`pieces`], [`blf`]): round-handle decompositions
//!   that replace an exceptional-fiber or multiple-fiber neighborhood, the
//!   fold-circle base diagrams they induce, and assembled broken-fibration
//!   diagrams for elliptic surfaces with deterministic SVG/JSON output.
//!
//! The [`cli`] module exposes all of it behind one binary with a versioned
//! JSON output envelope.

pub mod blf;
pub mod cli;
pub mod fiber;
pub mod grid;
pub mod json;
pub mod maps;
pub mod pieces;
pub mod surgery;
