//! Quantum thermometry through heat: the score of a temperature measurement
//! split into trajectory and correlation heat, analytic results for two probe
//! models, and the mean-force picture at strong coupling.

pub mod closed_form;
pub mod engine;
pub mod error;
pub mod mean_force;
pub mod models;
pub mod tensor;

pub use engine::{HeatRecord, OutcomeHeat, Tamper, ThermometryScheme, PROB_FLOOR};
pub use error::{Error, Result};
pub use faer::complex_native::c64;
pub use mean_force::{MeanForceResult, MeanForceSolver, UrCheck};
pub use models::{BathMode, CompositeModel, ProjectiveMeasurement, SpectralDensity};
pub use tensor::{
    hermitian_eig, hermitian_func, hermitian_func_real, CMatrix, DensityMatrix, Eigen,
    HermitianOperator, HilbertSpace,
};
