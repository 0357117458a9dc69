from .em import (
    ConditionalProbs,
    ExpectedCounts,
    FisherScoring,
    conditional_probs,
    log_likelihood,
    e_step,
    m_step_pi,
    m_step_lc,
    m_step_fisher,
    expected_complete_loglik,
    item_probs,
)
from .fitter import StartPolicy, StartPoint, FitResult, fit, run_em, posterior_memberships

__all__ = [
    "ConditionalProbs",
    "ExpectedCounts",
    "FisherScoring",
    "conditional_probs",
    "log_likelihood",
    "e_step",
    "m_step_pi",
    "m_step_lc",
    "m_step_fisher",
    "expected_complete_loglik",
    "item_probs",
    "StartPolicy",
    "StartPoint",
    "FitResult",
    "fit",
    "run_em",
    "posterior_memberships",
]
