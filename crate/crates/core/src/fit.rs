//! Placeholder.
pub struct FitError;
pub struct FitOptions;
pub struct FitResult;
pub struct ModelFamily;
