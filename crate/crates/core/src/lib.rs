//! Numerical lab for the arclength of polynomial lemniscates `{|p| = 1}`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crofton;
pub mod experiments;
pub mod gauss;
pub mod poly;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod tracer;
pub mod verify;

pub use crofton::{
    circle_count_realpart, crofton_lemniscate_length, crofton_length, deficiency_integral,
    lemma1_check, line_count_modulus, line_count_realpart, CountField, CroftonError,
    CroftonEstimate, LineCoord, Sampler,
};
pub use experiments::{
    bounds_report, extremal_search, local_max_experiment, measure, ExperimentError, LengthBudget,
    Method, OscillationCase, OscillationReport, SearchBudget,
};
pub use num_complex::Complex64;
pub use poly::{perturbed_family, phi, psi, scale_param, JetValue, PolyError, Polynomial};
pub use quadrature::{
    area_capacity_check, integrate_over_e, length_area_v1, length_area_v2, pushforward_check,
    singular_mass, QuadBudget, QuadError, QuadratureResult, RegionE,
};
pub use report::{Assertion, Bounds, ExperimentReport, Meta, MethodValue};
pub use roots::{
    combined_roots, critical_points, find_roots, roots_of, Root, RootError, RootKind, RootSet,
};
pub use tracer::{
    lemniscate_length_trace, lemniscate_length_trace_with, realpart_curve_length, seed_points,
    trace_component, write_polyline_csv, CurveComponent, Lemniscate, RealPartCurve, TraceControl,
    TraceError,
};
pub use verify::{run_criterion, run_suite, CriterionResult, CRITERIA};
