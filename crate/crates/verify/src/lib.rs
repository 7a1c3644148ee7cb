//! Holds the `acceptance` test target; there is no library code here.
//! Run it with `cargo test -p corona-verify --test acceptance`.
