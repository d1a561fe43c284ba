//! Finite-dimensional commutative POVMs and their sharp reconstructions.
//!
//! A discrete positive operator-valued measure (POVM) whose effects
//! commute pairwise can be diagonalized in one common basis. Grouping the
//! basis vectors by their joint eigenvalue pattern yields a sharp
//! observable — the *sharp reconstruction* — from which the POVM is
//! recovered by classical post-processing, together with an extended
//! (dilated) space on which the POVM becomes projection-valued. This
//! crate builds those objects, certifies the function relations between
//! them, and decides three formal criteria for one observable being an
//! unsharp version of another.
//!
//! Module map:
//!
//! - [`linalg`]: Hermitian matrices, eigendecompositions, simultaneous
//!   diagonalization, PSD square roots, partial traces.
//! - [`povm`]: validated measurement models (POVMs, projection-valued
//!   measures, density matrices) and finite label functions.
//! - [`sharp`]: the sharp reconstruction, its eigenvalue table, the
//!   randomization identity, and function relations between observables.
//! - [`naimark`]: dilation of a POVM to a projection-valued measure on
//!   an extended space, with compressions back to the original space.
//! - [`injectivity`]: outcome functions with pairwise-distinct induced
//!   values, built by logged integer perturbations, and the resulting
//!   operator-equivalence certificates.
//! - [`unsharpness`]: deciders for the three ways a sharp observable
//!   witnesses the unsharpness of a POVM, membership tests against the
//!   sharp reconstruction, and system–ancilla models.
//! - [`presets`]: built-in example families with hand-checkable
//!   verdicts.
//! - [`io`]: JSON interchange with a canonical, byte-stable writer.

pub mod error;
pub mod injectivity;
pub mod io;
pub mod linalg;
pub mod naimark;
pub mod povm;
pub mod presets;
pub mod sharp;
pub mod tol;
pub mod unsharpness;

pub use error::{Error, Result};
pub use io::{load_model, model_from_json, model_to_canonical_json, save_model, Model, SCHEMA_VERSION};
pub use injectivity::{
    certify_equivalence, distinct_image_vector, distinct_image_vector_seeded, g_of_f,
    operators_equivalent, replay_perturbations, DistinctImage, EquivalenceCertificate,
    PerturbationStep,
};
pub use linalg::{
    eig_hermitian, partial_trace_second, psd_sqrt, simultaneous_diagonalize, CMatrix, EigenSystem,
    HermitianMatrix, SimultaneousDiagonalization,
};
pub use naimark::{dilate, naimark_operator, project_function, NaimarkDilation};
pub use povm::{
    CommutativityReport, DensityMatrix, DiscretePOVM, LabelFunction, PVMeasure,
};
pub use sharp::{
    build_table, function_between, sharp_reconstruction, verify_randomization, EigenvalueTable,
    FunctionBetween, RandomizationReport, SharpReconstruction,
};
pub use unsharpness::{
    check_def11, check_def12, check_def13, corollary3_check, least_squares_combination,
    membership_a1_a2prime, povm_from_ancilla, AncillaModel, AncillaReport, Def13Branch,
    Def13Report, FallbackSearch, ReconstructionMembership, UnsharpWitness,
};
