//! Holds the `acceptance` test target. Kept in its own package so that
//! `cargo test --workspace` runs it after the library and CLI tests.
