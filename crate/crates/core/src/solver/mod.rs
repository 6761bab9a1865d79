//! Resonance solvers: Jost-function zeros and complex-scaled spectra.

pub mod jost;
pub mod operator;
pub mod resonance;
pub mod scaled;
pub mod union;
pub mod zeros;

pub use jost::{jost_solution, wronskian, wronskian_at, JostSettings, JostSolution, Ray};
pub use operator::{ModeOperator, OperatorKind};
pub use resonance::{
    dedupe, direct_search, lattice_search, pseudopole_seeds, Method, PseudopoleMatch, Resonance, ResonanceList,
    SearchReport, SearchSettings,
};
pub use scaled::{
    cheb_matrix, default_window, scaled_matrix, scaled_resonances, scaled_spectrum, ContourSpec, ScaledReport,
    ScaledSettings,
};
pub use union::{match_multisets, mirror, verify_union, IdentityCheck, Matching, UnionReport};
pub use zeros::{count_zeros, refine, CountSettings, Rect, RefineSettings, Refined, ZeroCount};
