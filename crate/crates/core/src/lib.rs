//! Solvency classification of non-life insurers with C4.5 decision trees.
//!
//! The pipeline labels insurer-years by capital adequacy ratio, optionally
//! selects attributes by correlation-based merit, corrects class imbalance
//! by resampling or SMOTE, grows and prunes a C4.5 tree, and evaluates it
//! by stratified cross-validation or on a supplied test set.

pub mod balance;
pub mod cli;
pub mod config;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod feature_select;
pub mod tree;

pub use balance::{resample, smote, BalanceMode, BalanceTargets};
pub use dataset::{label_from_car, load_csv, write_csv, ActionLevel, CompanyRecord, Dataset, SolvencyClass};
pub use error::{Error, Result};
pub use eval::{cross_validate, evaluate_on, ConfusionMatrix, EvalReport};
pub use tree::{grow, LearnerParams, TreeModel, TreeNode};
