mod fit;
mod flat;
mod front_law;
mod ordering;
mod series;
mod window;

pub use fit::{fit_line, FitResult};
pub use flat::{flat_problem_checks, FlatProblem, FlatReport};
pub use front_law::{front_law_audit, FrontLawReport};
pub use ordering::{ordering_audit, search_alignment, Alignment, OrderingReport, Violation};
pub use series::{ErrorSample, ErrorSeries, FrontSample, FrontSeries};
pub use window::{
    burn_in, error_series, exp_rate_fit, inner_uniform_check, outer_support_max,
    relative_error_window, trend_check, InnerUniform, OuterSample,
};
