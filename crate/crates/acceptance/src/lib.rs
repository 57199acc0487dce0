//! Host crate for the `acceptance` test target. It lives apart from the core
//! crate so that the core test targets all run before it.
