pub mod algebra;
pub mod deformation;
pub mod error;
pub mod linalg;
pub mod massey;
pub mod matric;
pub mod matrix;
pub mod problem;
pub mod report;
pub mod scalar;
pub mod yoneda;
