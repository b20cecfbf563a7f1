"""Small-divisor arithmetic.

Provides the worst-divisor sequence beta(m) = min{|omega . nu| : 0 < |nu|_w
<= 2^m}, its Bryuno partial sums, the dyadic scale sequence m_n at which
beta halves, step scale functions and propagators, Diophantine checks, the
analytic lower-bound sequence for Diophantine frequencies, and Monte-Carlo
measure estimation of the Diophantine set.

beta(m) is computed exactly: all coordinates but one are enumerated and the
last is rounded to the nearest integer minimizer, which keeps deep budgets
(2^m up to ~2^14 on few-index windows) tractable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResonanceError, TruncationError
from .modes import (Frequency, Mode, WeightSequence, _angle_bracket,
                    enumerate_modes, star_norm)

SCALE_ZERO = "ZERO"

_RESONANCE_TOL = 1e-300


# ---------------------------------------------------------------------------
# Beta sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BetaSequence:
    """Nonincreasing positive sequence beta(m), m = 0..m_max, with witnesses."""

    values: tuple[float, ...]
    witnesses: tuple[Mode | None, ...]
    provenance: str

    def __post_init__(self):
        for a, b in zip(self.values, self.values[1:]):
            if b > a:
                raise DomainError("beta sequence must be nonincreasing")
        if any(v <= 0 for v in self.values):
            raise DomainError("beta sequence must be positive")

    @property
    def m_max(self) -> int:
        return len(self.values) - 1

    def __call__(self, m: int) -> float:
        if not 0 <= m <= self.m_max:
            raise TruncationError(f"beta({m}) beyond computed depth {self.m_max}")
        return self.values[m]


def _min_divisor(omega: Frequency, w: WeightSequence, budget: float):
    """Exact (min |omega . nu|, witness) over 0 < |nu|_w <= budget."""
    active = w.active_indices(budget)
    for j in active:
        omega.window.offset(j)  # domain error if the window is too small
    if not active:
        return math.inf, None
    h = {j: w.h(j) for j in active}
    om = {j: omega.component(j) for j in active}
    if len(active) == 1:
        j = active[0]
        return abs(om[j]), Mode.unit(j, 1)

    j0 = max(active, key=lambda j: (abs(om[j]), j))
    if om[j0] == 0.0:
        return 0.0, Mode.unit(active[0], 1)
    others = [j for j in active if j != j0]
    j1 = max(others, key=lambda j: (budget / h[j], j))
    rest = sorted((j for j in others if j != j1), key=lambda j: (-h[j], j))
    om0, om1, h0, h1 = om[j0], om[j1], h[j0], h[j1]

    best_val = math.inf
    best_wit: Mode | None = None

    def visit(r2: float, used: float, assignment: list[tuple[int, int]]):
        nonlocal best_val, best_wit
        rem = budget - used
        b1 = int(math.floor(rem / h1 + 1e-12))
        v1 = np.arange(-b1, b1 + 1, dtype=np.int64)
        r = r2 + om1 * v1
        b0 = np.floor((rem - h1 * np.abs(v1)) / h0 + 1e-12)
        tstar = -r / om0
        tf = np.clip(np.floor(tstar), -b0, b0)
        tc = np.clip(np.ceil(tstar), -b0, b0)
        cf = np.abs(r + om0 * tf)
        cc = np.abs(r + om0 * tc)
        vals = np.minimum(cf, cc)
        ts = np.where(cf <= cc, tf, tc)
        if not assignment:
            # slice through nu = 0: the rounding coordinate must be nonzero
            i0 = b1
            if b0[i0] >= 1:
                vals[i0] = abs(om0)
                ts[i0] = 1.0
            else:
                vals[i0] = math.inf
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            parts = dict(assignment)
            if int(v1[i]) != 0:
                parts[j1] = int(v1[i])
            if int(ts[i]) != 0:
                parts[j0] = int(ts[i])
            best_wit = Mode.from_dict(parts)

    def rec(pos: int, r2: float, used: float, assignment: list[tuple[int, int]]):
        if pos == len(rest):
            visit(r2, used, assignment)
            return
        j = rest[pos]
        top = int(math.floor((budget - used) / h[j] + 1e-12))
        for v in range(-top, top + 1):
            if v == 0:
                rec(pos + 1, r2, used, assignment)
            else:
                assignment.append((j, v))
                rec(pos + 1, r2 + om[j] * v, used + h[j] * abs(v), assignment)
                assignment.pop()

    rec(0, 0.0, 0.0, [])
    return best_val, best_wit


def beta_sequence(omega: Frequency, w: WeightSequence, m_max: int) -> BetaSequence:
    """Empirical beta(m) for m = 0..m_max with argmin witnesses.

    Requires the frequency window to cover every index with h_j <= 2^m_max;
    an exactly vanishing divisor raises ResonanceError with its witness.
    """
    if m_max < 0:
        raise DomainError("m_max must be nonnegative")
    for j in w.active_indices(2.0 ** m_max):
        omega.window.offset(j)
    values, witnesses = [], []
    for m in range(m_max + 1):
        val, wit = _min_divisor(omega, w, 2.0 ** m)
        if val < _RESONANCE_TOL:
            raise ResonanceError(
                f"resonant frequency: omega . nu = 0 at nu = {wit.label() if wit else '?'}",
                witness=wit)
        values.append(val)
        witnesses.append(wit)
    return BetaSequence(tuple(values), tuple(witnesses),
                        provenance=f"empirical(window={omega.window.half}, w={w.describe})")


def analytic_beta_floor(m: int, gamma: float, k1: float, k2: float, sigma: float) -> float:
    """(gamma/K1) exp(-K2 2^m (log 2^m)^{-(sigma-1)}), valid for m >= 1."""
    if m < 1:
        raise DomainError("analytic beta floor needs m >= 1")
    if sigma <= 2:
        raise DomainError("analytic beta floor needs sigma > 2")
    if gamma <= 0 or k1 <= 0 or k2 < 0:
        raise DomainError("gamma, K1 must be positive and K2 nonnegative")
    return (gamma / k1) * math.exp(-k2 * 2.0 ** m * (m * math.log(2.0)) ** (-(sigma - 1.0)))


def analytic_beta_sequence(m_max: int, gamma: float, k1: float, k2: float,
                           sigma: float) -> BetaSequence:
    """BetaSequence backed by the analytic floor; beta(0) = gamma/K1."""
    vals = [gamma / k1] + [analytic_beta_floor(m, gamma, k1, k2, sigma)
                           for m in range(1, m_max + 1)]
    return BetaSequence(tuple(vals), tuple([None] * (m_max + 1)),
                        provenance=f"analytic_lower_bound(gamma={gamma!r}, K1={k1!r}, "
                                   f"K2={k2!r}, sigma={sigma!r})")


# ---------------------------------------------------------------------------
# Bryuno partial sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BryunoSum:
    """Partial sums of sum_m 2^{-m} log(1/beta(m))."""

    value: float
    partials: tuple[float, ...]
    last_increment: float


def bryuno_sum(beta: BetaSequence, m_stop: int) -> BryunoSum:
    """Sum over m = 1..m_stop of 2^{-m} log(1/beta(m))."""
    if m_stop > beta.m_max:
        raise TruncationError(f"requested depth {m_stop} exceeds beta range {beta.m_max}")
    total = 0.0
    partials = []
    inc = 0.0
    for m in range(1, m_stop + 1):
        if not math.isfinite(beta(m)):
            raise DomainError("bryuno sum needs finite beta values")
        inc = 2.0 ** (-m) * math.log(1.0 / beta(m))
        total += inc
        partials.append(total)
    return BryunoSum(total, tuple(partials), inc)


# ---------------------------------------------------------------------------
# Scale sequences and propagators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleSequence:
    """Indices m_n at which beta has halved: m_0 = 0 and m_{n+1} is the
    smallest m with 2 beta(m) <= beta(m_n).  `truncated` marks that no
    further halving happens within the computed beta range."""

    values: tuple[int, ...]
    truncated: bool

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n: int) -> int:
        return self.values[n]


def scale_sequence(beta: BetaSequence) -> ScaleSequence:
    if not math.isfinite(beta(0)):
        raise DomainError("scale sequence needs a finite beta(0)")
    ms = [0]
    while True:
        prev = beta(ms[-1])
        nxt = None
        for m in range(ms[-1] + 1, beta.m_max + 1):
            if 2.0 * beta(m) <= prev:
                nxt = m
                break
        if nxt is None:
            return ScaleSequence(tuple(ms), truncated=True)
        ms.append(nxt)
        if nxt == beta.m_max:
            return ScaleSequence(tuple(ms), truncated=False)


def scale_of(x: float, beta: BetaSequence, ms: ScaleSequence):
    """Divisor shell of x: the unique n with beta(m_n)/4 <= |x| < beta(m_{n-1})/4.

    Returns SCALE_ZERO for x = 0 and None when |x| lies deeper than the
    computed range.
    """
    if x == 0.0:
        return SCALE_ZERO
    ax = abs(x)
    for n in range(len(ms.values)):
        if ax >= 0.25 * beta(ms[n]):
            return n
    return None


def propagator(x: float, n: int, beta: BetaSequence, ms: ScaleSequence) -> float:
    """Per-line factor Psi_n(x)/x^2 with the convention 1 at x = 0."""
    if x == 0.0:
        return 1.0
    return 1.0 / (x * x) if scale_of(x, beta, ms) == n else 0.0


# ---------------------------------------------------------------------------
# Diophantine machinery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiophantineParams:
    gamma: float
    mu1: float
    mu2: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise DomainError("gamma must be positive")
        if self.mu2 <= 1:
            raise DomainError("mu2 must exceed 1")

    def validate_against(self, q: float) -> None:
        if self.mu1 <= 1 + q:
            raise DomainError(f"mu1 must exceed 1 + q = {1 + q}")


def divisor_product(nu: Mode, mu1: float, mu2: float) -> float:
    """prod_j (1 + <j>^mu1 |nu_j|^mu2) over the support of nu."""
    out = 1.0
    for j, v in nu.entries:
        out *= 1.0 + _angle_bracket(j) ** mu1 * abs(v) ** mu2
    return out


@dataclass(frozen=True)
class DiophantineResult:
    passed: bool
    witness: Mode | None
    checked: int
    margin: float  # min |omega.nu| * prod / gamma over checked modes (>=1 iff pass)


def diophantine_check(omega: Frequency, p: DiophantineParams, w: WeightSequence,
                      budget: float, cap: int | None = None) -> DiophantineResult:
    """Truncated membership check |omega.nu| >= gamma / prod_j(1+<j>^mu1 |nu_j|^mu2)
    for all modes with 0 < |nu|_w <= budget; returns the first violator."""
    p.validate_against(omega.q)
    modes = enumerate_modes(w, budget, exclude_zero=True, cap=cap)
    margin = math.inf
    witness = None
    passed = True
    for nu in modes:
        stat = abs(omega.dot(nu)) * divisor_product(nu, p.mu1, p.mu2) / p.gamma
        if stat < margin:
            margin = stat
        if stat < 1.0 and passed:
            passed = False
            witness = nu
    return DiophantineResult(passed, witness, len(modes), margin)


# ---------------------------------------------------------------------------
# Product sup bound and calibration
# ---------------------------------------------------------------------------

def _nonneg_profiles(w: WeightSequence, budget: float):
    """(weighted norm, product-profile entries) for all nonnegative modes
    with 0 < |nu|_w <= budget.  The divisor product depends only on |nu_j|,
    so nonnegative profiles suffice for maxima."""
    active = w.active_indices(budget)
    out: list[tuple[float, tuple[tuple[int, int], ...]]] = []

    def rec(pos: int, used: float, acc: list[tuple[int, int]]):
        if pos == len(active):
            if acc:
                out.append((used, tuple(acc)))
            return
        j = active[pos]
        hj = w.h(j)
        top = int(math.floor((budget - used) / hj + 1e-12))
        for v in range(0, top + 1):
            if v == 0:
                rec(pos + 1, used, acc)
            else:
                acc.append((j, v))
                rec(pos + 1, used + hj * v, acc)
                acc.pop()

    rec(0, 0.0, [])
    return out


def divisor_product_sup(w: WeightSequence, budget: float, mu1: float, mu2: float) -> float:
    """lhs of the product bound: max over 0 < |nu|_w <= budget of the
    divisor product (1.0 for an empty enumeration)."""
    best = 1.0
    for _, entries in _nonneg_profiles(w, budget):
        prod = 1.0
        for j, v in entries:
            prod *= 1.0 + _angle_bracket(j) ** mu1 * v ** mu2
        best = max(best, prod)
    return best


def calibrate_product_constants(w: WeightSequence, mu1: float, mu2: float,
                                grid: list[float] | None = None) -> tuple[float, float]:
    """Smallest (K1, K2) with lhs(N) <= K1 exp(K2 N / (log N)^{sigma-1}) on the grid.

    K1 is pinned to max(1, lhs at the smallest grid point); the minimal K2
    follows by solving the bound at each grid point and taking the max.
    """
    sigma = getattr(w, "sigma", None)
    if w.kind != "log_power" or sigma is None or sigma <= 2:
        raise DomainError("calibration needs a log_power weight with sigma > 2")
    if grid is None:
        grid = [float(n) for n in range(2, 13)]
    grid = sorted(grid)
    if grid[0] <= 1:
        raise DomainError("calibration grid must start above 1")
    lhs0 = divisor_product_sup(w, grid[0], mu1, mu2)
    k1 = max(1.0, lhs0)
    k2 = 0.0
    for n in grid:
        lhs = divisor_product_sup(w, n, mu1, mu2)
        if lhs > k1:
            k2 = max(k2, math.log(n) ** (sigma - 1.0) * math.log(lhs / k1) / n)
    return k1, k2


@dataclass(frozen=True)
class ProductBound:
    lhs: float
    rhs: float
    k1: float
    k2: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def product_sup_bound(w: WeightSequence, budget: float, mu1: float, mu2: float,
                      k1: float | None = None, k2: float | None = None) -> ProductBound:
    """Compare the exhaustive product maximum against K1 e^{K2 N/(log N)^{sigma-1}}.

    Uncalibrated constants are calibrated on the default grid first.
    """
    sigma = getattr(w, "sigma", None)
    if w.kind != "log_power" or sigma is None or sigma <= 2:
        raise DomainError("product bound is defined for log_power weights with sigma > 2")
    if budget <= 1:
        raise DomainError("budget must exceed 1")
    if k1 is None or k2 is None:
        k1, k2 = calibrate_product_constants(w, mu1, mu2)
    lhs = divisor_product_sup(w, budget, mu1, mu2)
    rhs = k1 * math.exp(k2 * budget / math.log(budget) ** (sigma - 1.0))
    return ProductBound(lhs, rhs, k1, k2)


# ---------------------------------------------------------------------------
# Measure estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureEstimate:
    fraction: float
    gamma: float
    mu1: float
    mu2: float
    q: float
    rho: float
    budget: float
    samples: int
    seed: int


def _measure_min_stats(q: float, rho: float, w: WeightSequence, budget: float,
                       mu1: float, mu2: float, samples: int, seed: int,
                       chunk: int = 256) -> np.ndarray:
    """Per-sample min over modes of |omega.nu| * divisor product.

    Frequencies are drawn uniformly from the product ball
    prod_j [-<j>^{-q} rho, <j>^{-q} rho] on the window {h_j <= budget},
    using a counter-based generator keyed by the seed.
    """
    modes = enumerate_modes(w, budget, exclude_zero=True)
    # keep one representative per +-nu pair: both give the same statistic
    half = [nu for nu in modes if nu.entries[0][1] > 0]
    active = w.active_indices(budget)
    col = {j: i for i, j in enumerate(active)}
    mat = np.zeros((len(half), len(active)))
    prods = np.ones(len(half))
    for i, nu in enumerate(half):
        for j, v in nu.entries:
            mat[i, col[j]] = v
            prods[i] *= 1.0 + _angle_bracket(j) ** mu1 * abs(v) ** mu2
    widths = np.array([_angle_bracket(j) ** (-q) * rho for j in active])
    rng = np.random.Generator(np.random.Philox(key=seed))
    stats = np.empty(samples)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        omegas = rng.uniform(-1.0, 1.0, size=(n, len(active))) * widths
        dots = np.abs(omegas @ mat.T) * prods
        stats[done:done + n] = dots.min(axis=1)
        done += n
    return stats


def measure_estimate(p: DiophantineParams, q: float, rho: float, w: WeightSequence,
                     budget: float, samples: int, seed: int) -> MeasureEstimate:
    """Monte-Carlo fraction of sampled frequencies passing the truncated
    Diophantine condition at the given budget; deterministic for a seed."""
    if samples < 1:
        raise DomainError("need at least one sample")
    p.validate_against(q)
    stats = _measure_min_stats(q, rho, w, budget, p.mu1, p.mu2, samples, seed)
    frac = float(np.mean(stats >= p.gamma))
    return MeasureEstimate(frac, p.gamma, p.mu1, p.mu2, q, rho, budget, samples, seed)
