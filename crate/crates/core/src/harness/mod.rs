//! Monte Carlo risk estimation, chain generators and the claim-verification
//! suite.

mod experiment;
mod generators;
pub mod oracles;
mod risk;
pub mod suite;
pub mod verify;

pub use experiment::{ExperimentConfig, FamilySource};
pub use generators::{
    generate_chain, generate_family, ChainFamilySpec, FamilyKind, FamilyParams, TaggedChain,
};
pub use risk::{
    empirical_risk, empirical_sample_complexity, wilson_interval, BudgetTally, ChainRisk,
    EstimatorConfig, RiskReport, SampleComplexityCurve,
};
pub use verify::{
    check_sandwiches, coupling_exactness, lazy_spectral_identity, projection_optimality,
    scan_pseudo_gap_ratios, verify_binomial_cost, verify_lazy_mixing_bound,
    verify_lazy_reversibilization_gap, BinomialCostReport, CouplingReport, GapIdentityReport,
    GapIdentityRow, LazyMixingReport, LazyMixingRow, ProjectionOptimalityReport, ProjectionRow,
    PseudoGapRatioEntry, PseudoGapRatioScan, ReversibilizationGapReport, ReversibilizationGapRow,
    SandwichReport, SandwichRow, TailRow,
};
