//! Genus-one non-abelian theta functions for SU(n).

pub mod abelian;
pub mod checks;
pub mod cst;
pub mod error;
pub mod exact;
pub mod gram;
pub mod lattice;
pub mod nonabelian;
pub mod periods;
pub mod rootsys;
pub mod smith;
pub mod su2;
pub mod util;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use rootsys::{AffineOrbitWitness, RootSystem, Weight, WeylElement};
pub use abelian::{PolarizedTorus, ThetaEvaluator, ThetaLabel, ThetaValue};
pub use cst::{CharacterTable, ClassFunctionSeries, PsiDistribution};
pub use gram::{GramReport, QuadratureGrid};
pub use lattice::{GaussianSeries, Scaled};
pub use nonabelian::{EllipticModulus, NATheta, Symmetry, TorusPoint};
pub use periods::CanonicalBasisData;
pub use su2::{SU2Theta, Su2Family, Su2Psi};
