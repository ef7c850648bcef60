"""Binary words, the hierarchical-tree ultrametric and the Bernoulli shift.

A state ``0,a_1 a_2 ... a_N`` is stored as the integer ``m`` with
``m / 2**N`` equal to its value, so ``a_1`` is the most significant bit.
Two words sharing a common prefix of length ``L`` sit ``N - L`` levels
below their lowest common branch and are ``2**-L`` apart.

Shifting drops ``a_1`` and appends the next digit of the state's
:class:`DigitTail`, a deterministic stream standing in for the digits
beyond position ``N``.
"""

from __future__ import annotations

import threading
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .dyadic import ONE, ZERO, DyadicValue
from .errors import DomainError, StateError

_CHUNK = 4096


@dataclass(frozen=True)
class BinaryWord:
    value: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise DomainError(f"word length must be >= 1, got {self.length}")
        if not 0 <= self.value < (1 << self.length):
            raise DomainError(f"{self.value} does not fit in {self.length} binary digits")

    @classmethod
    def from_digits(cls, digits: Iterable[int]) -> BinaryWord:
        m = 0
        n = 0
        for a in digits:
            if a not in (0, 1):
                raise DomainError(f"binary digit must be 0 or 1, got {a!r}")
            m = (m << 1) | int(a)
            n += 1
        return cls(m, n)

    @classmethod
    def parse(cls, text: str) -> BinaryWord:
        """Accept ``"0110"``, ``"0,0110"`` or ``"0.0110"``."""
        s = text.strip()
        if s[:2] in ("0,", "0."):
            s = s[2:]
        if not s or set(s) - {"0", "1"}:
            raise DomainError(f"not a binary word: {text!r}")
        return cls(int(s, 2), len(s))

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(int(c) for c in str(self))

    def __getitem__(self, i: int) -> int:
        """Digit ``a_i`` with 1-based ``i``."""
        if not 1 <= i <= self.length:
            raise IndexError(i)
        return (self.value >> (self.length - i)) & 1

    def __len__(self):
        return self.length

    def __str__(self):
        return format(self.value, f"0{self.length}b")


def word_from_dyadic(m: int, n: int) -> BinaryWord:
    """Word of length ``n`` encoding ``m / 2**n``."""
    if n < 1:
        raise DomainError(f"word length must be >= 1, got {n}")
    if not 0 <= m < (1 << n):
        raise DomainError(f"m={m} outside [0, 2^{n})")
    return BinaryWord(m, n)


def to_dyadic(word: BinaryWord) -> DyadicValue:
    return DyadicValue(word.value, word.length)


def _stable_tag(tag: str | int) -> int:
    if isinstance(tag, int):
        return tag
    return zlib.crc32(tag.encode("utf-8"))


class DigitTail:
    """Deterministic stream of future digits ``a'``.

    Modes: ``uniform`` (fair coin), ``biased`` (digit 1 with probability
    ``q``), ``periodic`` (repeat ``pattern``) and ``explicit`` (a finite
    list; reading past its end raises :class:`StateError`).

    Random streams are keyed by ``(seed, *stream)`` through
    :class:`numpy.random.SeedSequence` and generated in fixed-size chunks,
    so digit ``i`` never depends on the order in which digits are read.
    """

    MODES = ("uniform", "biased", "periodic", "explicit")

    def __init__(self, mode: str = "uniform", seed: int = 0, *, q: float = 0.5,
                 pattern: Sequence[int] = (), stream: tuple[int, ...] = ()):
        if mode not in self.MODES:
            raise DomainError(f"unknown tail mode {mode!r}")
        if mode == "biased" and not 0.0 <= q <= 1.0:
            raise DomainError(f"bias q must lie in [0, 1], got {q}")
        if mode in ("periodic", "explicit"):
            pattern = tuple(int(a) for a in pattern)
            if any(a not in (0, 1) for a in pattern):
                raise DomainError("tail digits must be 0 or 1")
            if mode == "periodic" and not pattern:
                raise DomainError("periodic tail needs a non-empty pattern")
        else:
            pattern = ()
        if int(seed) < 0:
            raise DomainError(f"seed must be nonnegative, got {seed}")
        self.mode = mode
        self.seed = int(seed)
        self.q = float(q) if mode == "biased" else None
        self.pattern = pattern
        self.stream = tuple(int(s) for s in stream)
        self._buf = np.zeros(0, dtype=np.uint8)
        self._rng = None
        self._lock = threading.Lock()

    @classmethod
    def uniform(cls, seed: int = 0, stream: tuple[int, ...] = ()) -> DigitTail:
        return cls("uniform", seed, stream=stream)

    @classmethod
    def biased(cls, q: float, seed: int = 0, stream: tuple[int, ...] = ()) -> DigitTail:
        return cls("biased", seed, q=q, stream=stream)

    @classmethod
    def periodic(cls, pattern: Sequence[int]) -> DigitTail:
        return cls("periodic", pattern=pattern)

    @classmethod
    def explicit(cls, digits: Sequence[int]) -> DigitTail:
        return cls("explicit", pattern=digits)

    @property
    def is_random(self) -> bool:
        return self.mode in ("uniform", "biased")

    @property
    def limit(self) -> Optional[int]:
        """Number of available digits, or None when unbounded."""
        return len(self.pattern) if self.mode == "explicit" else None

    def _key(self):
        return (self.mode, self.seed, self.q, self.pattern, self.stream)

    def __eq__(self, other):
        if not isinstance(other, DigitTail):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.mode == "uniform":
            return f"DigitTail.uniform(seed={self.seed}, stream={self.stream})"
        if self.mode == "biased":
            return f"DigitTail.biased(q={self.q}, seed={self.seed}, stream={self.stream})"
        return f"DigitTail.{self.mode}({list(self.pattern)})"

    def derive(self, tag: str | int) -> DigitTail:
        """Independent stream keyed by ``(seed, *stream, tag)``.

        Deterministic modes have no randomness to split and return an
        equal tail.
        """
        if not self.is_random:
            return DigitTail(self.mode, pattern=self.pattern)
        return DigitTail(self.mode, self.seed, q=self.q if self.q is not None else 0.5,
                         stream=self.stream + (_stable_tag(tag),))

    def generator(self, *extra: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream + tuple(extra))
        return np.random.Generator(np.random.PCG64(ss))

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Fresh i.i.d. digits from this tail's distribution."""
        if self.mode == "uniform":
            return rng.integers(0, 2, size=shape, dtype=np.uint8)
        if self.mode == "biased":
            return (rng.random(shape) < self.q).astype(np.uint8)
        raise DomainError(f"{self.mode} tail has no distribution to draw from")

    def _extend(self, upto: int):
        with self._lock:
            if self._rng is None:
                self._rng = self.generator()
            while len(self._buf) <= upto:
                self._buf = np.concatenate([self._buf, self.draw(self._rng, _CHUNK)])

    def digit(self, i: int) -> int:
        if i < 0:
            raise IndexError(i)
        if self.mode == "periodic":
            return self.pattern[i % len(self.pattern)]
        if self.mode == "explicit":
            if i >= len(self.pattern):
                raise StateError(f"explicit tail exhausted after {len(self.pattern)} digits")
            return self.pattern[i]
        if i >= len(self._buf):
            self._extend(i)
        return int(self._buf[i])

    def take(self, n: int, start: int = 0) -> list[int]:
        return [self.digit(i) for i in range(start, start + n)]


@dataclass(frozen=True)
class SequenceState:
    word: BinaryWord
    tail: DigitTail = field(default_factory=DigitTail)
    step: int = 0

    @property
    def length(self) -> int:
        return self.word.length

    def next_digit(self) -> int:
        return self.tail.digit(self.step)


def random_state(n: int, seed: int = 0, index: int = 0) -> SequenceState:
    """State with a uniformly random word and tail, keyed by ``(seed, index)``."""
    tail = DigitTail.uniform(seed, stream=(index,))
    word = BinaryWord.from_digits(tail.derive("word").take(n))
    return SequenceState(word, tail)


def bernoulli_shift(state: SequenceState) -> SequenceState:
    """``0,a_1 a_2 ... a_N -> 0,a_2 ... a_N a'`` with ``a'`` read from the tail."""
    w = state.word
    a_new = state.next_digit()
    mask = (1 << w.length) - 1
    return SequenceState(BinaryWord(((w.value << 1) & mask) | a_new, w.length),
                         state.tail, state.step + 1)


def iterate(state: SequenceState, n: int) -> SequenceState:
    for _ in range(n):
        state = bernoulli_shift(state)
    return state


def trajectory(state: SequenceState, n: int) -> list[SequenceState]:
    """States ``f^0(s) ... f^n(s)``."""
    out = [state]
    for _ in range(n):
        state = bernoulli_shift(state)
        out.append(state)
    return out


@dataclass(frozen=True)
class DistanceReport:
    value: DyadicValue
    common_prefix: int
    m_levels: int
    length: int


def _check_lengths(x: BinaryWord, y: BinaryWord):
    if x.length != y.length:
        raise DomainError(f"word lengths differ: {x.length} vs {y.length}")


def common_prefix(x: BinaryWord, y: BinaryWord) -> int:
    _check_lengths(x, y)
    return x.length - (x.value ^ y.value).bit_length()


def tree_distance(x: BinaryWord, y: BinaryWord) -> DistanceReport:
    L = common_prefix(x, y)
    n = x.length
    value = ZERO if L == n else DyadicValue.power_of_two(-L)
    return DistanceReport(value, L, n - L, n)


def transition_time(x: BinaryWord, y: BinaryWord) -> DyadicValue:
    """Time to pass between two states; same ultrametric form as the distance."""
    return tree_distance(x, y).value


@dataclass(frozen=True)
class PerturbationSpec:
    """``eps = 2**-h * (1 + sum_i 2**-delta_i)``."""

    h: int
    deltas: tuple[int, ...] = ()

    def __post_init__(self):
        deltas = tuple(int(d) for d in self.deltas)
        if self.h < 1:
            raise DomainError(f"h must be >= 1, got {self.h}")
        if any(d < 1 for d in deltas):
            raise DomainError("offsets delta_i must be >= 1")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise DomainError("offsets delta_i must be strictly increasing")
        object.__setattr__(self, "deltas", deltas)

    @property
    def depth(self) -> int:
        """Position of the lowest set digit of eps."""
        return self.h + (self.deltas[-1] if self.deltas else 0)

    def epsilon(self) -> DyadicValue:
        eps = DyadicValue.power_of_two(-self.h)
        for d in self.deltas:
            eps = eps + DyadicValue.power_of_two(-self.h - d)
        return eps

    def exceeds_resolution(self, n: int) -> bool:
        return self.epsilon() > DyadicValue.power_of_two(-n)


def perturb(state: SequenceState, spec: PerturbationSpec) -> tuple[SequenceState, int]:
    """Add ``eps`` to the state's value modulo 1, with exact carries.

    Returns the perturbed state, carrying an independent tail, and the
    position of the first digit where the two words differ.
    """
    n = state.length
    if spec.depth > n:
        raise DomainError(f"perturbation reaches digit {spec.depth} beyond word length {n}")
    units = 1 << (n - spec.h)
    for d in spec.deltas:
        units += 1 << (n - spec.h - d)
    m = state.word.value
    new = (m + units) & ((1 << n) - 1)
    first_diff = n - (m ^ new).bit_length() + 1
    return SequenceState(BinaryWord(new, n), state.tail.derive("perturbed"), state.step), first_diff


@dataclass(frozen=True)
class DivergenceSeries:
    """Distances ``d(f^n a, f^n b)`` for ``n = 0 .. n_max``.

    ``saturation_index`` is the first ``n`` where the difference has
    reached the leading digit (distance 1) or vanished (distance 0); the
    doubling law is only guaranteed up to that point.
    """

    entries: tuple[tuple[int, DyadicValue], ...]
    saturation_index: Optional[int] = None

    def __post_init__(self):
        entries = tuple((int(n), d) for n, d in self.entries)
        if [n for n, _ in entries] != list(range(len(entries))):
            raise DomainError("series entries must be indexed 0, 1, 2, ...")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_distances(cls, distances: Sequence[DyadicValue],
                       saturation_index: Optional[int] = None) -> DivergenceSeries:
        return cls(tuple(enumerate(distances)), saturation_index)

    def __len__(self):
        return len(self.entries)

    @property
    def distances(self) -> list[DyadicValue]:
        return [d for _, d in self.entries]

    def exponents(self) -> list[Optional[int]]:
        """``log2 d_n`` as exact integers, None for zero distances."""
        return [None if d.is_zero() else d.log2() for _, d in self.entries]

    def pre_saturation(self) -> list[tuple[int, DyadicValue]]:
        """Entries strictly before saturation (all entries if none)."""
        if self.saturation_index is None:
            return list(self.entries)
        return list(self.entries[:self.saturation_index])


def divergence_series(a: SequenceState, b: SequenceState, n_max: int) -> DivergenceSeries:
    _check_lengths(a.word, b.word)
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    entries = []
    saturation = None
    for n in range(n_max + 1):
        if n:
            a, b = bernoulli_shift(a), bernoulli_shift(b)
        d = tree_distance(a.word, b.word).value
        entries.append((n, d))
        if saturation is None and (d == ONE or d.is_zero()):
            saturation = n
    return DivergenceSeries(tuple(entries), saturation)


def tree_export(words: Iterable[BinaryWord], name: str = "prefix_tree") -> str:
    """Graphviz DOT text for the binary prefix tree of ``words``.

    Digit 0 is the left child and digit 1 the right child; one node per
    prefix, edges labelled with the digit.
    """
    words = sorted(set(words), key=lambda w: (w.length, w.value))
    if not words:
        raise DomainError("tree_export needs at least one word")
    n = words[0].length
    if any(w.length != n for w in words):
        raise DomainError("all words must have the same length")

    prefixes = {""}
    for w in words:
        s = str(w)
        prefixes.update(s[:i] for i in range(1, n + 1))

    def node_id(prefix: str) -> str:
        return f"n_{prefix}" if prefix else "root"

    lines = [f"digraph {name} {{", "  graph [ordering=out];", "  node [shape=circle, label=\"\"];",
             "  root [shape=point];"]
    for prefix in sorted(prefixes, key=lambda s: (len(s), s)):
        if len(prefix) == n:
            lines.append(f'  {node_id(prefix)} [shape=box, label="0,{prefix}"];')
    # depth-first, 0 before 1, so ordering=out draws 0 on the left
    stack = [""]
    while stack:
        prefix = stack.pop()
        for digit in "01":
            child = prefix + digit
            if child in prefixes:
                port = "sw" if digit == "0" else "se"
                lines.append(f'  {node_id(prefix)} -> {node_id(child)} [label="{digit}", tailport={port}];')
        stack.extend(prefix + d for d in "10" if prefix + d in prefixes)
    lines.append("}")
    return "\n".join(lines) + "\n"
