//! Acceptance checks for `cpdigraph`; see `tests/acceptance.rs`.
