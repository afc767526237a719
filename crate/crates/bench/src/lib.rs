//! Shared fixtures for the criterion benchmarks.

use hms_core::hochschild::Truncation;
use hms_core::{Category, GradingData};

pub fn standard_category(n: usize) -> Category {
    Category::build(GradingData::standard(n).expect("n ≥ 3")).expect("valid grading")
}

pub fn trunc(arity_cap: usize, weight_cap: u32) -> Truncation {
    Truncation { arity_cap, weight_cap }
}
