//! Linear stability of peer stage sets: zero-stability, A(α) angles, the
//! end-step contraction factor and transformed maximum norms.

mod curve;
mod matrix;
mod norms;

pub use curve::{
    evaluate_curve_point, project_onto_curve, scan_points, scan_q_curve, ScanOptions, ScanRecord,
    ScanRegion, CURVE_TOL, DEDUP_TOL, PROJECTION_MAX_STEPS, PROJECTION_STEP_CLIP, PROJECTION_STOP,
};
pub use matrix::{
    alpha_angle, alpha_angle_with_locus, alpha_from_locus, root_locus, stability_matrix,
    stability_report, zero_stability, AlphaResult, LocusSample, StabilityReport, ZeroStability,
    LOCUS_ZERO_TOL, SEMISIMPLE_RANK_TOL, UNIT_BAND, ZERO_STABILITY_TOL,
};
pub use norms::{
    adjoint_iteration_matrix, contraction_matrix, contraction_radius, contraction_samples,
    max_contraction, remark_x1, transformed_norm, NormDirection,
};
