pub mod linalg;
pub mod nondegeneracy;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod strategy;
pub mod uniformity;
