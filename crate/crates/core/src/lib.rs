pub mod algebra;
pub mod curve;
pub mod finite_field;
pub mod factor;
pub mod sections;
pub mod certify;
pub mod pipeline;
pub mod cli;
