//! Exact arithmetic in `Q`, the real quadratic field `F = Q(√D)` and the CM
//! extension `K = F(√Δ)`.

pub mod factor;
pub mod field;
pub mod ideal;
pub mod instance;
pub mod prime;
pub mod quad;
pub mod rational;

pub use field::QuadraticField;
pub use ideal::FIdeal;
pub use instance::{CmInstance, PrimePowerSpec, RelSplit};
pub use prime::{hensel_sqrt, FPlace, FPrime, PrimeKind};
pub use quad::QuadElem;
pub use rational::BigRat;
