//! Lexical complexity analysis toolkit.
//!
//! This crate bundles the pieces needed to study how hard words are for
//! non-native readers and how well simple models predict that difficulty:
//!
//! * [`dataset`] — annotated target-word instances, per-annotator rating
//!   matrices, group aggregates, and their TSV formats;
//! * [`features`] — per-word scalar features from corpus frequency lists,
//!   graded vocabulary lists, familiarity norms, and precomputed model
//!   outputs, with principled missing-value handling;
//! * [`stats`] — inter-annotator agreement (interval-scale Krippendorff
//!   alpha, mean pairwise correlation), the exact two-sample permutation
//!   test, a dependent-correlation test, and correlation/contrast tables;
//! * [`models`] — clipped ridge regression for graded complexity and
//!   class-weighted logistic regression for binary classification;
//! * [`eval`] — R^2 / macro-F1 and the four-setting group-vs-individual
//!   experiment runner with table- and plot-shaped outputs.
//!
//! Everything is deterministic: fits are closed-form or zero-initialized
//! Newton iterations, and all sampling takes explicit seeds.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod matrix;
pub mod models;
pub mod numeric;
pub mod stats;
mod util;

pub use dataset::{
    cwi_label, describe, group_majority, group_mean, load_dataset, load_instances, load_profiles,
    load_ratings, union, AnnotatorProfile, ComplexityView, CompositionTable, Dataset, Instance,
    LabelView, Origin, Provenance, RatingMatrix, Split,
};
pub use error::{Error, Result};
pub use eval::{
    complexity_histogram, difference_table, frequency_scatter, macro_f1, plot_data, r_squared,
    report_tables, run_all_settings, run_experiment, ExperimentConfig, ExperimentReport,
    ExperimentTask, SourceKind, TaskTable,
};
pub use features::{
    build_feature_matrix, coverage_mask, ExternalFeature, FamiliarityTable, FeatureMatrix,
    FreqUnit, FrequencyTable, LevelTable, Resource, ResourceSet,
};
pub use matrix::Matrix;
pub use models::{
    balanced_class_weights, lcp_to_cwi, logistic_fit, logistic_fit_weighted, logistic_predict,
    logistic_proba, ridge_fit, ridge_predict, ClassWeights, LogisticModel, RidgeModel,
};
pub use stats::{
    correlation_table, krippendorff_alpha_interval, mean_pairwise_pcc, origin_gap_analysis,
    pearson, permutation_test, permutation_test_with, steiger_test, CorrelationRow, OriginGapTable,
    PermutationMode, PermutationOptions, PermutationResult, SteigerResult,
};
pub use util::format_p;
