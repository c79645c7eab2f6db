pub mod checks;
pub mod fixtures;
pub mod montecarlo;
pub mod oracle;
