//! Configuration, dataset serialisation and experiment runner behind the
//! `adiff` command.

pub mod compare;
pub mod config;
pub mod io;
pub mod run;
pub mod systems;
