//! Seeded generators and reference implementations used by the test suites.

pub mod gen;
pub mod problems;
pub mod pure;

pub use gen::{sorted_term, sorted_terms, SortedTerm, TermGen};
pub use problems::{second_order_problem, substituted_case, SubstitutedCase};
