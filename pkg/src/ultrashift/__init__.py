"""Ultrametric (2-adic) toolkit for the Bernoulli shift."""

from .dyadic import DyadicValue
from .errors import DomainError, EstimationError, StateError, UltrashiftError
from .estimators import (
    BakerPoint,
    EntropyReport,
    LyapunovReport,
    baker_saturation_demo,
    baker_step,
    entropy_analytic,
    entropy_empirical,
    lyapunov_euclidean,
    lyapunov_symbolic,
)
from .padic import (
    INFINITE,
    DigitExpansion,
    PAdicNorm,
    PrimeBase,
    digits,
    from_digits,
    padic_distance,
    padic_norm,
    valuation,
)
from .symbolic import (
    BinaryWord,
    DigitTail,
    DistanceReport,
    DivergenceSeries,
    PerturbationSpec,
    SequenceState,
    bernoulli_shift,
    divergence_series,
    perturb,
    random_state,
    to_dyadic,
    transition_time,
    tree_distance,
    tree_export,
    word_from_dyadic,
)

__version__ = "0.1.0"
