pub mod bidirected;
pub mod duality;
pub mod exactla;
pub mod gen;
pub mod json;
pub mod random;
pub mod spaces;
pub mod splitting;
pub mod suites;
pub mod tensor;
