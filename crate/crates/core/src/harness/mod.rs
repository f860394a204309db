//! Built-in domains, manufactured solutions, convergence studies and checks.

pub mod config;
pub mod domains;
pub mod solutions;
pub mod study;
pub mod verify;

pub use config::StudyConfig;
pub use domains::{builtin_domain, builtin_template, load_geometry, parse_geometry, DomainTemplate, BUILTIN_DOMAINS};
pub use solutions::{builtin_solution, ManufacturedSolution, SolutionId, BUILTIN_SOLUTIONS};
pub use study::{run_study, solve_case, CaseOptions, CaseResult, StudyRow, StudyTable};
