//! Monge-Ampère measures: the atomic formula for model metrics, slope jumps of
//! piecewise-affine potentials on a line, the grid Laplacian on degenerating
//! curve fibres, and the experiments comparing them.

pub mod atomic;
pub mod experiments;
pub mod family;
pub mod grid;
pub mod line;

pub use atomic::{
    ma_model_metric, ma_pa_curve, pairing, pairing_symmetry, same_measure, Atom, AtomicMeasure, IntersectionTable,
    ModelMaReport, TableEntry,
};
pub use experiments::{cln_stability_check, weak_convergence_experiment};
pub use family::{Combine, CurveFamily, CurveTerm};
pub use grid::{ma_complex_curve, pushforward_log_radius, ComplexMa, GridConfig, GridMeasure, Pushforward};
pub use line::{w1, LineMeasure, LinePA};
