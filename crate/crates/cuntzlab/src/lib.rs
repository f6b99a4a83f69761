//! A desk-scale laboratory for classifying unital homomorphisms
//! C(Ω) → Mₙ(ℂ), Ω ⊂ ℂ compact, through their Cuntz-semigroup data.
//!
//! A homomorphism is represented by its rank measure: the finite atomic
//! measure on Ω whose value on an open set U is the rank of φ(f) for any
//! positive f supported exactly on U. The crate provides
//!
//! * discretized regions, open sets, and ℕ̄-valued lower-semicontinuous
//!   functions ([`region`], [`lsc`]);
//! * rank measures, functionals, and concrete diagonal realizations
//!   ([`morphism`]);
//! * the matching metric d_Cu on rank measures, the induced distance d_W on
//!   normal matrices, and a certified two-sided bracket for the unitary
//!   orbit distance d_U ([`metrics`]);
//! * almost δ-covers with per-condition certificates, a finite-dimensional
//!   lift with an enforced 6δ error budget, and an exact lift obtained as
//!   the limit of an aligned Cauchy sequence of normal matrices
//!   ([`lifting`]);
//! * numerically careful normal-matrix spectral tooling ([`matrix`]).

mod dsu;
pub mod error;
pub mod gen;
pub mod lifting;
pub mod lsc;
pub mod matrix;
pub mod metrics;
pub mod morphism;
pub mod region;
pub mod schema;
pub mod suite;

pub use error::{Error, Result};
pub use lifting::{
    build_cover, choose_annulus, components, exact_lift, exact_lift_traced, lift,
    ComponentPartition, CoverCertificates, DeltaCover, ExactLiftOutcome, LiftOutcome,
};
pub use lsc::{LscFn, Nat};
pub use matrix::{
    convergence_check, hausdorff, monomial_bound, operator_norm, CMat, NormalMatrix, SampledFn,
};
pub use metrics::{
    candidate_radii, d_cu, d_cu_bruteforce, d_u_bracket, d_w, hall_family, marriage_check,
    DuBracket, MatchingResult,
};
pub use morphism::{cu_of_hom, cu_of_normal, Atom, FinDimHom, Functional, RankMeasure};
pub use region::{Ball, OpenSet, Region};
