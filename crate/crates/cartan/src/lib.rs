//! Exact-arithmetic engine for Cartan's equivariant de Rham theory and the
//! Thom isomorphism on foliated model bundles.
//!
//! The crate provides, bottom up:
//!
//! - [`scalar`]: the exact coefficient field `Q(sqrt d)(omega^(1/2))` with
//!   `omega` standing for `2*pi`, plus numeric substitution;
//! - [`matrix`]: sparse exact linear algebra, kernel bases, and cochain
//!   complex windows;
//! - [`gca`]: free graded-commutative algebras and graded derivations;
//! - [`lie`]: Lie algebra presentations, coadjoint calculus, invariant
//!   polynomials, Pfaffians;
//! - [`gdgm`]: g-differential graded modules, axiom checking, basic
//!   subcomplexes and their cohomology, Weil complexes;
//! - [`weil`]: the Weil algebra in both generator systems, Koszul
//!   contraction, product decompositions;
//! - [`connection`]: connections, characteristic homomorphisms, the graded
//!   line, Cartan-Chern-Weil maps and their homotopies, equivariant
//!   extensions;
//! - [`forms`]: exterior calculus with Fourier-Gaussian-trig coefficients on
//!   model spaces `T^n x R^r x I^s`, pullbacks, exact and numeric fibre
//!   integration;
//! - [`mixed`]: Weil-algebra-valued differential forms;
//! - [`thom`]: Mathai-Quillen forms, Thom maps, the rotation homotopy
//!   operator, transgression, Euler forms;
//! - [`foliation`]: foliated torus models with truncated Fourier basic
//!   complexes and the Thom and Gysin checks on them;
//! - [`report`]: the named verification suites behind the CLI.

pub mod connection;
pub mod error;
pub mod foliation;
pub mod forms;
pub mod gca;
pub mod gdgm;
pub mod lie;
pub mod matrix;
pub mod mixed;
pub mod report;
pub mod scalar;
pub mod thom;
pub mod weil;

pub use error::CartanError;
pub use scalar::{NumericSubs, Scalar};
pub mod maps;
pub mod numeric;
