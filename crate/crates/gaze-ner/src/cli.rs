//! CLI layer (placeholder while the module is built).
