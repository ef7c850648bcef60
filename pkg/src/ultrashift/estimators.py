"""Lyapunov exponent and Kolmogorov entropy estimators for the Bernoulli shift.

The symbolic estimator works on exact tree distances, whose base-2
logarithms are integers, so the fitted exponent is an exact rational.
The Euclidean estimators work on ``x -> 2x mod 1`` in double precision
and serve as the conventional comparison. The baker's map demo shows
the Euclidean distance staying below the square's diagonal while the
horizontal separation keeps doubling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .dyadic import DyadicValue
from .errors import DomainError, EstimationError
from .symbolic import DigitTail, DivergenceSeries

LN2 = math.log(2.0)

SAMPLE_CHUNK = 1 << 16
_SAMPLE_TAG = 0x5A3D


@dataclass(frozen=True)
class LyapunovReport:
    lambda_base2: Fraction
    lambda_nats: float
    method: str
    window: tuple[int, int]
    points: int = 0


def _base2_report(slope: Fraction, method: str, window: tuple[int, int], points: int) -> LyapunovReport:
    return LyapunovReport(slope, float(slope) * LN2, method, window, points)


def least_squares_slope(xs, ys) -> Fraction:
    """Exact least-squares slope for integer (or rational) data."""
    k = len(xs)
    if k < 2:
        raise EstimationError("need at least two points to fit a slope")
    sx, sy = sum(xs), sum(ys)
    den = k * sum(x * x for x in xs) - sx * sx
    if den == 0:
        raise EstimationError("abscissae are all equal")
    num = k * sum(x * y for x, y in zip(xs, ys)) - sx * sy
    return Fraction(num) / Fraction(den)


def lyapunov_symbolic(series: DivergenceSeries,
                      window: Optional[tuple[int, int]] = None) -> LyapunovReport:
    """Slope of ``log2 d_n`` against ``n``, in bits per iteration.

    The default window is every entry before saturation. An explicit
    ``window=(n_start, n_end)`` is inclusive.
    """
    if window is None:
        entries = series.pre_saturation()
    else:
        lo, hi = window
        entries = [(n, d) for n, d in series.entries if lo <= n <= hi]
    if len(entries) < 2:
        raise EstimationError(f"window holds {len(entries)} point(s); need at least 2")
    if any(d.is_zero() for _, d in entries):
        raise EstimationError("zero distance inside the fitting window")
    ns = [n for n, _ in entries]
    try:
        exps = [d.log2() for _, d in entries]
    except DomainError as exc:
        raise EstimationError(str(exc)) from None
    slope = least_squares_slope(ns, exps)
    return _base2_report(slope, "symbolic-ultrametric", (ns[0], ns[-1]), len(ns))


def doubling_map(x: float) -> float:
    return (2.0 * x) % 1.0


def doubling_slope(x: float) -> float:
    # both branches 2x and 2x - 1; the cut at 1/2 is assigned the right branch
    return 2.0


def _circle_gap(a: float, b: float) -> float:
    d = (b - a) % 1.0
    return d if d <= 0.5 else d - 1.0


def lyapunov_euclidean(x0: float, n_iter: int, method: str = "derivative",
                       delta0: float = 1e-9) -> LyapunovReport:
    """Euclidean estimate for ``x -> 2x mod 1``.

    ``derivative`` averages ``log|f'(x_i)|`` along the orbit. Because
    ``|f'|`` is 2 everywhere, each term is exactly one bit and the result
    is ``ln 2`` without rounding. ``two-trajectory`` follows a companion
    orbit that is put back at distance ``delta0`` after every step and
    averages ``ln(delta'/delta0)``. Separations are measured on the circle
    so the wrap at 1 does not count as a jump.
    """
    if n_iter < 1:
        raise EstimationError("n_iter must be >= 1")
    if not 0.0 <= x0 < 1.0:
        raise DomainError(f"x0 must lie in [0, 1), got {x0}")

    if method == "derivative":
        bits = []
        x = x0
        for _ in range(n_iter):
            bits.append(math.log2(abs(doubling_slope(x))))
            x = doubling_map(x)
        slope = Fraction(math.fsum(bits)) / n_iter
        return _base2_report(slope, "euclidean-derivative", (0, n_iter - 1), n_iter)

    if method == "two-trajectory":
        if not delta0 > 0:
            raise DomainError("delta0 must be positive")
        x = x0
        y = (x0 + delta0) % 1.0
        logs = []
        for _ in range(n_iter):
            x, y = doubling_map(x), doubling_map(y)
            gap = _circle_gap(x, y)
            if gap == 0.0:
                raise EstimationError("trajectories merged; separation underflowed")
            logs.append(math.log(abs(gap) / delta0))
            y = (x + math.copysign(delta0, gap)) % 1.0
        nats = math.fsum(logs) / n_iter
        return LyapunovReport(Fraction(nats / LN2), nats, "euclidean-two-trajectory",
                              (0, n_iter - 1), n_iter)

    raise DomainError(f"unknown method {method!r}")


@dataclass(frozen=True)
class EntropyReport:
    level_n: int
    tau: DyadicValue
    speed_v: Fraction
    shannon_rate: float
    method: str
    k_paper: Optional[Fraction] = None
    k_plugin: Optional[Fraction] = None
    path_probability: Optional[Fraction] = None
    samples: Optional[int] = None
    distinct_paths: Optional[int] = None


def transition_tau(n: int) -> DyadicValue:
    """Time between sibling states at level ``n`` when the speed is 1.

    Sibling leaves agree up to level ``n - 1``, so they are ``2**(1-n)``
    apart, and at unit speed the time equals the distance.
    """
    return DyadicValue.power_of_two(1 - n)


def entropy_analytic(n: int) -> EntropyReport:
    """Entropy at tree level ``n`` with all ``2**n`` paths equally likely.

    ``k_paper`` is ``2 / (tau * 2**n)``, which equals 1 at every level.
    ``k_plugin`` puts ``p = 2**-n`` straight into
    ``-(1/(n tau)) sum p log2 p`` and comes out as ``1/tau = 2**(n-1)``.
    The two do not agree, so both are reported.
    """
    if n < 1:
        raise DomainError(f"level n must be >= 1, got {n}")
    tau = transition_tau(n)
    tau_q = tau.to_fraction()
    p = Fraction(1, 1 << n)
    # log2(2**-n) = -n exactly
    path_sum = (1 << n) * p * (-n)
    shannon = -path_sum / n
    k_plugin = -path_sum / (n * tau_q)
    k_paper = Fraction(2) / (tau_q * (1 << n))
    return EntropyReport(level_n=n, tau=tau, speed_v=Fraction(1), shannon_rate=float(shannon),
                         method="analytic", k_paper=k_paper, k_plugin=k_plugin,
                         path_probability=p)


def _path_counts(paths: np.ndarray) -> dict:
    n = paths.shape[1]
    if n <= 62:
        weights = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
        codes = paths.astype(np.int64) @ weights
        keys, counts = np.unique(codes, return_counts=True)
        return dict(zip(keys.tolist(), counts.tolist()))
    rows, counts = np.unique(paths, axis=0, return_counts=True)
    return {tuple(r): c for r, c in zip(rows.tolist(), counts.tolist())}


def _chunk_counts(tail: DigitTail, n: int, chunk: int, rows: int) -> dict:
    rng = tail.generator(_SAMPLE_TAG, chunk)
    return _path_counts(tail.draw(rng, (rows, n)))


def path_histogram(n: int, samples: int, tail: DigitTail, workers: int = 1) -> dict:
    """Counts of length-``n`` digit paths over ``samples`` draws.

    Random tails are sampled in chunks of :data:`SAMPLE_CHUNK` rows; chunk
    ``c`` uses the stream ``(seed, *stream, tag, c)``, so the merged
    histogram does not depend on ``workers``. A deterministic tail has a
    single path, its first ``n`` digits.
    """
    if not tail.is_random:
        return {tuple(tail.take(n)): samples}
    sizes = [min(SAMPLE_CHUNK, samples - start) for start in range(0, samples, SAMPLE_CHUNK)]
    jobs = list(enumerate(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _chunk_counts(tail, n, *job), jobs))
    else:
        parts = [_chunk_counts(tail, n, c, rows) for c, rows in jobs]
    total: dict = {}
    for part in parts:
        for key, count in part.items():
            total[key] = total.get(key, 0) + count
    return total


def entropy_empirical(n: int, samples: int, tail: DigitTail, workers: int = 1) -> EntropyReport:
    """Plug-in block entropy per digit from sampled paths (no bias correction)."""
    if n < 1:
        raise DomainError(f"level n must be >= 1, got {n}")
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    counts = np.array(sorted(path_histogram(n, samples, tail, workers).values()), dtype=np.float64)
    p = counts / samples
    h = float(-np.sum(p * np.log2(p))) / n
    # a lone path gives -1*log2(1) = -0.0
    h = abs(h) if h == 0 else h
    return EntropyReport(level_n=n, tau=transition_tau(n), speed_v=Fraction(1), shannon_rate=h,
                         method="empirical", samples=samples, distinct_paths=len(counts))


def binary_entropy(q: float) -> float:
    if q in (0.0, 1.0):
        return 0.0
    return -(q * math.log2(q) + (1 - q) * math.log2(1 - q))


@dataclass(frozen=True)
class BakerPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise DomainError(f"({self.x}, {self.y}) is outside the unit square")


def baker_step(pt: BakerPoint) -> BakerPoint:
    """Stretch horizontally by 2, cut at x = 1/2 and stack the right half on top."""
    if pt.x < 0.5:
        return BakerPoint(2.0 * pt.x, pt.y / 2.0)
    return BakerPoint(2.0 * pt.x - 1.0, (pt.y + 1.0) / 2.0)


def euclidean(a: BakerPoint, b: BakerPoint) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class BakerStep:
    n: int
    x_separation: float
    distance: float
    same_branch: bool
    doubled: Optional[bool]


@dataclass(frozen=True)
class BakerDemoReport:
    eps0: float
    iterations: int
    steps: tuple[BakerStep, ...] = field(repr=False)
    max_distance: float
    doubling_violations: int
    first_split: Optional[int]

    @property
    def bounded(self) -> bool:
        return self.max_distance <= math.sqrt(2.0)


def baker_saturation_demo(eps0: float, n: int, x0: float = 0.3183098861837907,
                          y0: float = 0.5) -> BakerDemoReport:
    """Follow two points starting ``eps0`` apart horizontally.

    At each step ``doubled`` records whether the x-separation became
    exactly twice its previous value; it is only defined when both points
    were on the same side of x = 1/2. ``first_split`` is the first step at
    which they were not.
    """
    if not eps0 > 0:
        raise DomainError("eps0 must be positive")
    if n < 0:
        raise DomainError("n must be >= 0")
    a = BakerPoint(x0, y0)
    b = BakerPoint(x0 + eps0, y0)
    steps = [BakerStep(0, abs(b.x - a.x), euclidean(a, b), (a.x < 0.5) == (b.x < 0.5), None)]
    violations = 0
    first_split = None
    for i in range(1, n + 1):
        same = (a.x < 0.5) == (b.x < 0.5)
        sep = abs(b.x - a.x)
        a, b = baker_step(a), baker_step(b)
        new_sep = abs(b.x - a.x)
        doubled = None
        if same:
            doubled = new_sep == 2.0 * sep
            violations += not doubled
        elif first_split is None:
            first_split = i - 1
        steps.append(BakerStep(i, new_sep, euclidean(a, b), (a.x < 0.5) == (b.x < 0.5), doubled))
    return BakerDemoReport(eps0, n, tuple(steps), max(s.distance for s in steps), violations, first_split)
