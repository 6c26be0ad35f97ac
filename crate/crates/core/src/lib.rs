//! A workbench for the λσ-calculus of explicit substitutions: σ and λσ
//! normalization, the reduction of second-order unification to
//! unification modulo σ, and bounded solvers over simple terms.

pub mod rewrite;
pub mod solver;
pub mod sorts;
pub mod term;
pub mod transform;
