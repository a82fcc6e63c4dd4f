//! Host crate of the `acceptance` test target. Run it with
//! `cargo test -p lattice-criteria --test acceptance`.
