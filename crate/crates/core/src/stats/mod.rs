//! Pure numerical statistics: PCA over memory observations, Hotelling T²,
//! the F distribution, two-sample F-test, one-way ANOVA and Tukey HSD.
//!
//! Everything in this module is deterministic and reentrant; values are
//! plain data and can move freely across threads.

pub mod anova;
pub mod eigen;
pub mod matrix;
pub mod pca;
pub mod special;
pub mod tukey;

pub use anova::{f_cdf, one_way_anova, two_sample_f_test, AnovaResult, FTestResult};
pub use eigen::eigendecompose_symmetric;
pub use matrix::{Matrix, SampleMatrix};
pub use pca::{column_means, covariance_matrix, hotelling_t2, pca, PcaModel, TSquaredVector};
pub use tukey::{
    studentized_range_cdf, studentized_range_quantile, tukey_hsd, TukeyPair, TukeyResult,
};
