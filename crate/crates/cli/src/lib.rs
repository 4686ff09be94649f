//! Command implementations behind the `cirbo` binary.

pub mod commands;
pub mod config;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const PARTIAL: i32 = 2;
}

/// Environment variable that replaces configured seeds.
pub const SEED_ENV: &str = "CIR_BO_SEED";
