//! Rank-one operator diagrams on tensor-product wires.
//!
//! A diagram is a set of wires and time-stamped boxes. Each box is either a
//! rank-one operator `|Λ⟩⟨Ω|` on a subset of wires, one of its two halves, or a
//! single-wire unitary. The crate evaluates diagrams three ways (direct
//! simulation, path composition and staged composition of flow maps), compiles
//! connected components to a single `f ∘ g` canonical form and checks that all
//! of them agree.

pub mod tensor;
pub mod flow;
pub mod diagram;
pub mod eval;
pub mod random;
pub mod canon;
pub mod verify;
pub mod cli;

pub use num_complex::Complex64 as C64;
