//! Experiment harness (placeholder while the core builds).
