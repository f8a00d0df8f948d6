pub mod cutoff;
pub mod error;
pub mod jet;
pub mod quadrature;
pub mod metric_models;
pub mod section_space;
pub mod bergman_engine;
pub mod peak_sections;
pub mod fourier_bounds;
pub mod examples_suite;
