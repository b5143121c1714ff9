//! Placeholder.
pub struct DiagnosticsError;
pub struct EnvelopeResult;
pub struct KsResult;
pub struct ResidualProcess;
