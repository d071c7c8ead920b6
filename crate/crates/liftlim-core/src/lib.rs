//! Group-theoretic invariants of lifting spaces over inverse sequences of groups.
//!
//! A *tower* is an inverse sequence of finitely generated groups and bonding
//! homomorphisms, together with a coherent *thread* of subgroups (the bonding
//! image of each thread group lands in the previous one). Towers of this shape
//! arise as the fundamental-group data of inverse limits of covering spaces,
//! where the limit projection is a lifting projection (a fibration with unique
//! path lifting) but in general not a covering map.
//!
//! The crate provides three exact subgroup backends and a calculus on top:
//!
//! * [`lattice`]: subgroups of `Z^n` as integer lattices (Hermite and Smith
//!   normal forms, exact kernels, intersections, divisible cores),
//! * [`coset`]: finite-index subgroups of finitely presented groups via
//!   Todd-Coxeter coset enumeration with explicit budgets,
//! * [`stallings`]: finitely generated subgroups of free groups as folded
//!   core graphs,
//!
//! and [`tower`] combines them: coherence checking, Mittag-Leffler and
//! stability analysis, covering/strict-lifting classification, fibre
//! cardinality, fundamental-group membership, component counts, deck towers,
//! density of the limit lift, thread meets, lifting criteria and cofinal
//! restriction. [`gallery`] ships ready-made towers for the classical
//! examples (solenoids, the Warsaw-circle limit, the Hawaiian earring shadow,
//! product towers).
//!
//! Every analysis result carries a certainty tag: either `Certified` (a
//! symbolic rule closed the infinite tail) or `HorizonLimited(n)` (only the
//! first `n` stages were examined). No verdict is ever extrapolated silently.

pub mod coset;
pub mod gallery;
pub mod lattice;
pub mod stallings;
pub mod tower;
pub mod word;

pub use tower::{
    AnalysisReport, BaseModel, Certainty, GroupStage, StageGroup, StationaryTail, SubgroupHandle,
    Tower, TowerError,
};
pub use word::{Alphabet, GroupHom, Word};
