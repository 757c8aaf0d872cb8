pub mod evaluate;
pub mod generate;
pub mod report;
pub mod sweep;
pub mod train;
