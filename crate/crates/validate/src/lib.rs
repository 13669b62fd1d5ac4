//! Holds the acceptance run in `tests/acceptance.rs`; there is no library
//! code. `cargo test -p sclab-validate` prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.
