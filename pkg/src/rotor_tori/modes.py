"""Sparse integer modes, weight sequences, frequencies and Fourier series.

A mode nu is a finitely supported integer vector indexed by Z; it labels the
harmonic e^{i nu . phi} of a function of (possibly infinitely many) angles.
The weighted norm

    |nu|_w = sum_j h_j |nu_j|,    h_j = h_{-j} > 0 nondecreasing in |j|,

with the convention h_j |nu_j| = 0 whenever nu_j = 0 (even for h_j = +inf),
controls the angular regularity.  Weights may be +inf outside a finite
window, which embeds the finite-dimensional problem into the same framework.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from .errors import DomainError, PotentialFormatError, ResourceLimitError

INF = math.inf


def _angle_bracket(j: int) -> int:
    """<j> = max(1, |j|)."""
    return max(1, abs(j))


# ---------------------------------------------------------------------------
# Mode
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mode:
    """Finite-support integer vector, stored as sorted (index, value) pairs.

    Immutable and hashable; zero values are never stored.
    """

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        idx = [j for j, _ in self.entries]
        if any(v == 0 for _, v in self.entries):
            raise DomainError(f"zero entry stored in mode {self.entries}")
        if idx != sorted(idx) or len(set(idx)) != len(idx):
            raise DomainError(f"mode indices not strictly increasing: {idx}")

    @staticmethod
    def from_dict(d: dict[int, int]) -> "Mode":
        return Mode(tuple(sorted((j, int(v)) for j, v in d.items() if v != 0)))

    @staticmethod
    def unit(j: int, v: int = 1) -> "Mode":
        return Mode(((j, v),)) if v != 0 else Mode()

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __getitem__(self, j: int) -> int:
        for i, v in self.entries:
            if i == j:
                return v
        return 0

    def __neg__(self) -> "Mode":
        return Mode(tuple((j, -v) for j, v in self.entries))

    def __add__(self, other: "Mode") -> "Mode":
        acc = dict(self.entries)
        for j, v in other.entries:
            w = acc.get(j, 0) + v
            if w == 0:
                acc.pop(j, None)
            else:
                acc[j] = w
        return Mode.from_dict(acc)

    def __sub__(self, other: "Mode") -> "Mode":
        return self + (-other)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.entries)

    def l1(self) -> int:
        return sum(abs(v) for _, v in self.entries)

    def sup(self) -> int:
        return max((abs(v) for _, v in self.entries), default=0)

    def dot(self, other: "Mode") -> int:
        """Integer dot product of two modes."""
        d = dict(other.entries)
        return sum(v * d.get(j, 0) for j, v in self.entries)

    def dense(self, window: "Window") -> np.ndarray:
        """Dense float vector of the mode on a window (error off-window)."""
        out = np.zeros(window.dim)
        for j, v in self.entries:
            out[window.offset(j)] = v
        return out

    def label(self) -> str:
        """Compact text form, e.g. '1:2 -1:-1' (empty mode -> '0')."""
        if not self.entries:
            return "0"
        return " ".join(f"{j}:{v}" for j, v in self.entries)

    @staticmethod
    def from_label(text: str) -> "Mode":
        text = text.strip()
        if text == "0" or not text:
            return Mode()
        d: dict[int, int] = {}
        for tok in text.split():
            j, _, v = tok.partition(":")
            d[int(j)] = d.get(int(j), 0) + int(v)
        return Mode.from_dict(d)


ZERO_MODE = Mode()


# ---------------------------------------------------------------------------
# Weight sequences
# ---------------------------------------------------------------------------

class WeightSequence:
    """The family {h_j} defining the weighted mode norm.

    Four kinds: log_power, polynomial, finite_window (an embedding that is
    +inf outside [-j0, j0]) and an explicit table.  h(j) = h(-j) and h is
    nondecreasing in |j|.
    """

    def __init__(self, kind: str, h: Callable[[int], float], describe: str):
        self.kind = kind
        self._h = h
        self.describe = describe

    # -- constructors ------------------------------------------------------

    @staticmethod
    def log_power(sigma: float) -> "WeightSequence":
        if sigma <= 0:
            raise DomainError("log_power exponent must be positive")
        def h(j: int) -> float:
            return math.log(1.0 + _angle_bracket(j)) ** sigma
        w = WeightSequence("log_power", h, f"log_power(sigma={sigma!r})")
        w.sigma = sigma
        return w

    @staticmethod
    def polynomial(alpha: float) -> "WeightSequence":
        if alpha <= 0:
            raise DomainError("polynomial exponent must be positive")
        def h(j: int) -> float:
            return float(_angle_bracket(j) ** alpha)
        w = WeightSequence("polynomial", h, f"polynomial(alpha={alpha!r})")
        w.alpha = alpha
        return w

    @staticmethod
    def finite_window(j0: int, inner: "WeightSequence | float" = 1.0) -> "WeightSequence":
        """Weights equal to `inner` on [-j0, j0] and +inf outside."""
        if j0 < 0:
            raise DomainError("window half-width must be nonnegative")
        if isinstance(inner, WeightSequence):
            base = inner._h
            tag = inner.describe
        else:
            c = float(inner)
            if c <= 0:
                raise DomainError("constant weight must be positive")
            base = lambda j: c
            tag = repr(c)
        def h(j: int) -> float:
            return base(j) if abs(j) <= j0 else INF
        w = WeightSequence("finite_window", h, f"finite_window(j0={j0}, inner={tag})")
        w.j0 = j0
        return w

    @staticmethod
    def table(values: Iterable[float], extension: "WeightSequence | None" = None) -> "WeightSequence":
        """Explicit h_0, h_1, ..., h_J; beyond J use `extension` or +inf."""
        vals = tuple(float(v) for v in values)
        if not vals or any(v <= 0 for v in vals):
            raise DomainError("table weights must be positive and nonempty")
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise DomainError("table weights must be nondecreasing")
        J = len(vals) - 1
        ext = extension._h if extension is not None else (lambda j: INF)
        def h(j: int) -> float:
            a = abs(j)
            return vals[a] if a <= J else ext(j)
        return WeightSequence("table", h, f"table({list(vals)!r}, ext={getattr(extension, 'describe', None)})")

    # -- queries ------------------------------------------------------------

    def h(self, j: int) -> float:
        return self._h(j)

    def active_indices(self, budget: float) -> list[int]:
        """All j with h_j <= budget, symmetric and finite by monotonicity."""
        if budget < self.h(0):
            return []
        out = [0]
        j = 1
        while self.h(j) <= budget:
            out += [-j, j]
            j += 1
        return sorted(out)

    def min_weight(self, budget: float | None = None) -> float:
        """min_j h_j; h is minimal at j = 0 by monotonicity."""
        return self.h(0)

    def c1(self) -> float:
        """Norm-comparison constant: ||nu||_1 <= c1 |nu|_w with c1 = 1/min h_j."""
        return 1.0 / self.min_weight()


def star_norm(nu: Mode, w: WeightSequence) -> float:
    """Weighted norm sum_j h_j |nu_j| (0 * inf = 0 since zeros are unstored)."""
    return sum(w.h(j) * abs(v) for j, v in nu.entries)


def mode_norms(nu: Mode, w: WeightSequence) -> tuple[float, int, int]:
    """(weighted, l1, sup) norms of a mode."""
    return star_norm(nu, w), nu.l1(), nu.sup()


def _canonical_key(nu: Mode, w: WeightSequence):
    return (star_norm(nu, w), nu.entries)


def canonical_sort(modes: Iterable[Mode], w: WeightSequence) -> list[Mode]:
    """Deterministic order: by weighted norm, then lexicographic entries."""
    return sorted(modes, key=lambda nu: _canonical_key(nu, w))


def enumerate_modes(w: WeightSequence, budget: float, exclude_zero: bool = True,
                    cap: int | None = None) -> list[Mode]:
    """All modes with |nu|_w <= budget, canonically ordered.

    Finiteness holds because only indices with h_j <= budget can carry a
    nonzero entry.  Raises ResourceLimitError past `cap` modes.
    """
    if budget < 0:
        raise DomainError("enumeration budget must be nonnegative")
    active = w.active_indices(budget)
    out: list[Mode] = []

    def rec(pos: int, remaining: float, acc: list[tuple[int, int]]):
        if cap is not None and len(out) > cap:
            raise ResourceLimitError(
                f"mode enumeration exceeded cap {cap}", partial_count=len(out))
        if pos == len(active):
            out.append(Mode(tuple(acc)))
            return
        j = active[pos]
        hj = w.h(j)
        top = int(math.floor(remaining / hj + 1e-12))
        for v in range(-top, top + 1):
            if v == 0:
                rec(pos + 1, remaining, acc)
            else:
                acc.append((j, v))
                rec(pos + 1, remaining - hj * abs(v), acc)
                acc.pop()

    rec(0, float(budget), [])
    if exclude_zero:
        out = [nu for nu in out if nu]
    return canonical_sort(out, w)


# ---------------------------------------------------------------------------
# Frequency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Symmetric index range [-half, half]."""

    half: int

    @property
    def dim(self) -> int:
        return 2 * self.half + 1

    @property
    def indices(self) -> range:
        return range(-self.half, self.half + 1)

    def offset(self, j: int) -> int:
        if abs(j) > self.half:
            raise DomainError(f"index {j} outside window [-{self.half}, {self.half}]")
        return j + self.half


@dataclass(frozen=True)
class Frequency:
    """Rotation vector on a finite window, with its decay class q > 1/2."""

    window: Window
    values: tuple[float, ...]
    q: float = 1.0

    def __post_init__(self):
        if len(self.values) != self.window.dim:
            raise DomainError("frequency values must fill the window")
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError("frequency entries must be finite")
        if self.q <= 0.5:
            raise DomainError("decay class q must exceed 1/2")

    @staticmethod
    def from_dict(vals: dict[int, float], q: float = 1.0) -> "Frequency":
        half = max(abs(j) for j in vals) if vals else 0
        win = Window(half)
        arr = [0.0] * win.dim
        for j, v in vals.items():
            arr[win.offset(j)] = float(v)
        return Frequency(win, tuple(arr), q)

    def component(self, j: int) -> float:
        return self.values[self.window.offset(j)]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def dot(self, nu: Mode) -> float:
        """omega . nu = sum_j omega_j nu_j; error if nu leaves the window."""
        return sum(self.component(j) * v for j, v in nu.entries)


def dot_frequency(omega: Frequency, nu: Mode) -> float:
    return omega.dot(nu)


# ---------------------------------------------------------------------------
# Fourier series
# ---------------------------------------------------------------------------

SCALAR = "scalar"
VECTOR = "vector"


class FourierSeries:
    """Sparse map Mode -> coefficient (complex scalar or window vector).

    When `reality` is set the container maintains Hermitian symmetry:
    the coefficient at -nu is the (componentwise) conjugate of the one at nu.
    """

    def __init__(self, value_kind: str = SCALAR, window: Window | None = None,
                 reality: bool = False):
        if value_kind not in (SCALAR, VECTOR):
            raise DomainError(f"unknown value kind {value_kind!r}")
        if value_kind == VECTOR and window is None:
            raise DomainError("vector-valued series needs a window")
        self.value_kind = value_kind
        self.window = window
        self.reality = reality
        self.terms: dict[Mode, complex | np.ndarray] = {}

    def copy(self) -> "FourierSeries":
        s = FourierSeries(self.value_kind, self.window, self.reality)
        s.terms = {nu: (c if np.isscalar(c) else c.copy()) for nu, c in self.terms.items()}
        return s

    def _zero(self):
        if self.value_kind == SCALAR:
            return 0j
        return np.zeros(self.window.dim, dtype=complex)

    def coefficient(self, nu: Mode):
        c = self.terms.get(nu)
        return self._zero() if c is None else c

    def set_term(self, nu: Mode, coeff) -> None:
        if self.value_kind == VECTOR:
            coeff = np.asarray(coeff, dtype=complex)
            if coeff.shape != (self.window.dim,):
                raise DomainError("coefficient shape must match the window")
        else:
            coeff = complex(coeff)
        self.terms[nu] = coeff

    def add_term(self, nu: Mode, coeff) -> None:
        self.terms[nu] = self.coefficient(nu) + (
            np.asarray(coeff, dtype=complex) if self.value_kind == VECTOR else complex(coeff))

    def prune(self, tol: float = 0.0) -> "FourierSeries":
        """Drop terms with magnitude <= tol (exact zeros by default)."""
        dead = [nu for nu, c in self.terms.items() if _coeff_mag(c) <= tol]
        for nu in dead:
            del self.terms[nu]
        return self

    def support(self) -> list[Mode]:
        return list(self.terms.keys())

    def modes_sorted(self, w: WeightSequence) -> list[Mode]:
        return canonical_sort(self.terms.keys(), w)

    def hermitian_defect(self) -> float:
        """Max |F_{-nu} - conj(F_nu)| over stored modes."""
        worst = 0.0
        for nu, c in self.terms.items():
            d = self.coefficient(-nu) - np.conj(c)
            worst = max(worst, _coeff_mag(d))
        return worst

    def check_reality(self, tol: float = 0.0) -> None:
        if self.reality and self.hermitian_defect() > tol:
            raise DomainError("Hermitian symmetry violated")

    def weighted_norm(self, s: float, w: WeightSequence) -> float:
        """sum_nu |F_nu|_X e^{s |nu|_w}; the vector magnitude is the sup."""
        if s < 0:
            raise DomainError("regularity parameter s must be nonnegative")
        total = 0.0
        for nu in self.modes_sorted(w):
            norm = star_norm(nu, w)
            if math.isinf(norm):
                raise DomainError(f"mode {nu.label()} has infinite weighted norm")
            total += _coeff_mag(self.terms[nu]) * math.exp(s * norm)
        return total

    def scale(self, factor: complex) -> "FourierSeries":
        s = self.copy()
        for nu in s.terms:
            s.terms[nu] = s.terms[nu] * factor
        return s

    def phase_shift(self, phi0: np.ndarray, window: Window) -> "FourierSeries":
        """Multiply each coefficient by e^{i nu . phi0}."""
        s = self.copy()
        for nu in list(s.terms):
            phase = sum(phi0[window.offset(j)] * v for j, v in nu.entries)
            s.terms[nu] = s.terms[nu] * complex(math.cos(phase), math.sin(phase))
        return s

    def evaluate(self, phi: np.ndarray, window: Window):
        """Pointwise value sum_nu F_nu e^{i nu . phi} (complex)."""
        acc = self._zero()
        for nu, c in self.terms.items():
            phase = sum(phi[window.offset(j)] * v for j, v in nu.entries)
            acc = acc + c * complex(math.cos(phase), math.sin(phase))
        return acc

    def sup_coefficient(self) -> float:
        return max((_coeff_mag(c) for c in self.terms.values()), default=0.0)

    def __len__(self) -> int:
        return len(self.terms)


def _coeff_mag(c) -> float:
    if np.isscalar(c):
        return abs(c)
    return float(np.max(np.abs(c))) if len(c) else 0.0


def series_norm(series: FourierSeries, s: float, w: WeightSequence) -> float:
    return series.weighted_norm(s, w)


# ---------------------------------------------------------------------------
# Potential parsing
# ---------------------------------------------------------------------------

def parse_potential(text: str) -> FourierSeries:
    """Parse the textual potential format into a Hermitian scalar series.

    One term per line.  `cos: j1 [j2 ...] -> c` declares the pair
    f_{+-nu} = c with nu = e_{j1} + e_{j2} + ...; `term: j:n,... -> re,im`
    declares a raw coefficient and its conjugate mirror.  `#` starts a
    comment.
    """
    series = FourierSeries(SCALAR, reality=True)
    declared: set[Mode] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, tail = line.partition("->")
        if not sep:
            raise PotentialFormatError(f"line {lineno}: missing '->' in {line!r}")
        head, tail = head.strip(), tail.strip()
        if head.startswith("cos"):
            idx_part = head[3:].lstrip()
            if not idx_part.startswith(":"):
                raise PotentialFormatError(f"line {lineno}: expected 'cos:'")
            try:
                idx = [int(t) for t in idx_part[1:].split()]
                amp = float(tail)
            except ValueError as exc:
                raise PotentialFormatError(f"line {lineno}: {exc}") from exc
            if not idx:
                raise PotentialFormatError(f"line {lineno}: cosine term needs indices")
            nu = Mode()
            for j in idx:
                nu = nu + Mode.unit(j)
            _declare(series, declared, nu, complex(amp, 0.0), lineno)
        elif head.startswith("term"):
            body = head[4:].lstrip()
            if not body.startswith(":"):
                raise PotentialFormatError(f"line {lineno}: expected 'term:'")
            d: dict[int, int] = {}
            for tok in body[1:].split(","):
                tok = tok.strip()
                if not tok:
                    continue
                try:
                    j_s, n_s = tok.split(":")
                    d[int(j_s)] = d.get(int(j_s), 0) + int(n_s)
                except ValueError as exc:
                    raise PotentialFormatError(f"line {lineno}: bad index pair {tok!r}") from exc
            parts = tail.split(",")
            if len(parts) != 2:
                raise PotentialFormatError(f"line {lineno}: coefficient must be 're,im'")
            try:
                c = complex(float(parts[0]), float(parts[1]))
            except ValueError as exc:
                raise PotentialFormatError(f"line {lineno}: bad coefficient") from exc
            _declare(series, declared, Mode.from_dict(d), c, lineno)
        else:
            raise PotentialFormatError(f"line {lineno}: unrecognized term {line!r}")
    return series


def _declare(series: FourierSeries, declared: set[Mode], nu: Mode, c: complex,
             lineno: int) -> None:
    if not nu:
        if c.imag != 0.0:
            raise PotentialFormatError(
                f"line {lineno}: zero mode must have zero imaginary part")
        if nu in declared:
            raise PotentialFormatError(f"line {lineno}: duplicate declaration of the zero mode")
        declared.add(nu)
        series.set_term(nu, c)
        return
    if nu in declared or (-nu) in declared:
        raise PotentialFormatError(
            f"line {lineno}: mode {nu.label()} (or its mirror) declared twice")
    declared.add(nu)
    declared.add(-nu)
    series.set_term(nu, c)
    series.set_term(-nu, c.conjugate())


def load_potential(path) -> FourierSeries:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_potential(fh.read())
