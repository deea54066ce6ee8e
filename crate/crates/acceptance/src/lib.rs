//! Holds the `acceptance` test target only; run it with
//! `cargo test -p vlc-acceptance --test acceptance`.
