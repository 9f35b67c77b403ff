//! Limit laws and their empirical checks: Poisson total variation, mixed
//! Poisson degree laws, loop counts, asymptotic independence, branching
//! process survival, giant components and critical scaling.

pub mod degrees;
pub mod giant;
pub mod mixing;
pub mod pmf;
pub mod poisson;
pub mod survival;

pub use degrees::{
    conditional_degree_params, degree_fit_test, independence_test, loop_test, tail_slope,
    ConditionalParams, DegreeFit, FitOptions, IndependenceReport, LoopReport,
};
pub use giant::{
    giant_component_experiment, sample_configuration, scaling_exponent_experiment, theoretical_alpha,
    GiantEstimate, ScalingReport, ScalingRow, Slope,
};
pub use mixing::MixingSample;
pub use pmf::{mixed_poisson_marginal, mixed_poisson_pmf, BivariatePmf, Pmf, Side};
pub use poisson::{poisson_pmf, poisson_tv};
pub use survival::{
    solve_extinction, survival_fractions, Configuration, Direction, ExtinctionOptions,
    ExtinctionSolution, SurvivalReport,
};
