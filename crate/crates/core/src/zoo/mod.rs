//! Concrete recurrence systems at desk scale: linear triangular systems
//! for oracle testing, layered MLP chains, masked autoregressive samplers,
//! and the three synthetic dependency chains.

mod mat;

pub mod linear;
pub mod made;
pub mod mlp;
pub mod presets;
pub mod synthetic;

pub use linear::{make_linear_triangular, LinearTriangular, LinearTriangularSpec, SparsityMask};
pub use made::{made_inverse_cdf_step, make_made, Made, MadeSpec};
pub use mlp::{make_layered_mlp, Activation, Connectivity, LayeredMlp, LayeredMlpSpec};
pub use presets::{sample_input, sample_system, Family, ALL_FAMILIES};
pub use synthetic::{make_synthetic, ChainKind, SyntheticChainSpec};
