//! Acceptance suite for the calibration workspace. Run it with
//! `cargo test -p dyncal-validation --test acceptance`; it prints one
//! PASS/FAIL line per criterion.
