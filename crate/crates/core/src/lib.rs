//! Exact and estimated `L_q` discrepancies of point sets in the unit cube under dyadic
//! (XOR) shifts, the Rademacher-series decomposition of the local discrepancy, and
//! checkers for the mean-discrepancy bounds built on it.

pub mod decomposition;
pub mod discrepancy;
pub mod dyadic;
pub mod error;
pub mod exact;
pub mod exponent;
pub mod io;
pub mod mean;
pub mod pointset;
pub mod rademacher;
pub mod report;
pub mod theorem;

pub use decomposition::MicroLocalTable;
pub use discrepancy::{DiscrepancyResult, Method};
pub use dyadic::{BoxFlavor, DyadicPoint, DyadicScalar, ElementaryBox};
pub use error::{Error, Result};
pub use exact::Dyadic;
pub use exponent::Exponent;
pub use mean::{MeanDiscrepancyEstimate, ShiftMode, ShiftSearchResult};
pub use pointset::{GeneratorMatrices, NetCheckReport, PointSet};
pub use rademacher::{KhinchinConstants, RademacherPolynomial};
pub use theorem::{Theorem, TheoremReport, Verdict};
