//! Experiment protocols (placeholder while the module is built).
