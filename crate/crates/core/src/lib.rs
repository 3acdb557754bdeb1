pub mod coeffring;
pub mod qseries;
pub mod partitions;
pub mod dsl;
pub mod catalog;
