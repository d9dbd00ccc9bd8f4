//! Compactifications of classical group manifolds as isotropic
//! Grassmannians, Cartan and Lyapunov projections, and finite-ball
//! certificates for Anosov representations of free groups.

pub mod anosov;
pub mod cartan;
pub mod compactify;
pub mod domains;
pub mod error;
pub mod forms;
pub mod io;
pub mod linalg;
pub mod model_spaces;
pub mod parallel;
pub mod scalars;
pub mod subspaces;
pub mod tolerances;

pub use error::{Error, Result};
pub use forms::{FormKind, FormSpec, Group, RootData, RootType};
pub use scalars::{MatK, Quaternion, ScalarTag};
pub use subspaces::Subspace;
pub use tolerances::Tolerances;
