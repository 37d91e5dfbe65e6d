//! Output records shared by the `pcapacity` binary and its tests.

pub mod record;
