pub mod error;
pub mod frames;
pub mod hilbert;
pub mod linalg;
pub mod gram;
pub mod corpus;
pub mod stability;
pub mod battery;
pub mod cli;
