//! Acceptance suite host; see tests/acceptance.rs.
