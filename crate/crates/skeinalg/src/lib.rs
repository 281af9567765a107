//! Exact computations in colored Temperley-Lieb algebras.
//!
//! The crate is organized in layers:
//!
//! * [`ring`] — exact arithmetic in `Q[A, A^-1]` and its fraction field,
//!   quantum integers and the loop values `Δ_n`.
//! * [`skein`] — the brute-force diagrammatic engine: non-crossing
//!   matchings, stacking with loop evaluation, the bilinear form, and
//!   Kauffman-bracket resolution of braid words. Everything downstream is
//!   validated against this module.
//! * [`recoupling`] — Jones-Wenzl projectors, colored trivalent vertices,
//!   and the network evaluations `Δ_n`, `θ(a,b,c)`, `λ_a^{b,c}` both as
//!   diagrammatic oracles and as closed forms.
//! * [`cell`] — admissible sequences, the graph basis `G_{s,t}` of
//!   `TL_(k,i)` with its matrix-unit product, and round trips to the
//!   diagrammatic side.
//! * [`jm`] — Jucys-Murphy elements, their joint spectrum, and the
//!   interpolated primitive idempotents.
//! * [`twist`] — recursive tangles, closed-form pairings of their powers,
//!   full twists as JM products, and colored Jones polynomials of twist
//!   families.
//! * [`mahler`] — numeric Mahler measures (Jensen via root finding, torus
//!   quadrature), Lawton-limit experiments and twist-family convergence.

pub mod cell;
pub mod error;
pub mod jm;
pub mod mahler;
pub mod recoupling;
pub mod ring;
pub mod skein;
pub mod twist;

pub use error::{Result, SkeinError};
