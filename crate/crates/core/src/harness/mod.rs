//! Instance IO, generators, reference saddles and solver drivers.

pub mod generate;
pub mod instance;
pub mod reference;
pub mod solve;

pub use generate::{erm_from_data, generate_erm_instance, generate_quadratic_instance, GeneratedInstance, InstanceSpec};
pub use instance::InstanceDescription;
pub use reference::{reference_from_kkt, reference_saddle, ReferenceMethod, ReferenceSaddle};
pub use solve::{compare, solve_idapg, solve_pdpg, Comparison, IdapgOptions, PdpgOptions, RunSummary};
