"""Torus synthesis, residual/action diagnostics and threshold constants.

Collects the order-by-order coefficients into an evaluable quasi-periodic
displacement u(phi) = sum_k eps^k sum_nu u_nu^(k) e^{i nu . phi}, measures
how well it solves the conjugacy equation at finite truncation, and
computes the convergence-threshold constants

    C0  = (16 c1 / (s beta(m_{n0})))^2 ||f||_{2s},
    C0' = c0 (16 c1 / (s beta(m_{n0})))^4 ||f||_{2s},
    eps1 = 1/C0',   eps2 = eps1 (s - s2)/(s - s2 + 2),

where n0 is the smallest index making the dyadic tail of the divisor sums
small: 8 sum_{n > n0} 2^{-m_n} log(1/beta(m_n)) < s/2.  The infinite part
of that tail is certified through a Diophantine product majorant on
finite-window weights (assumed to hold past the checked truncation).  A
gamma-rescaled variant divides beta by gamma and multiplies C0' by
gamma^{-2}, which is how the improved gamma^2 threshold scaling arises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, TruncationError
from .lindstedt import OrderedCoefficients, _FieldWorkspace, expand, field_order
from .modes import (FourierSeries, Frequency, Mode, VECTOR, WeightSequence,
                    Window, ZERO_MODE, star_norm, _angle_bracket)
from .smalldiv import BetaSequence, DiophantineParams, ScaleSequence
from .trees import TreeEngine


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

@dataclass
class SeriesSolution:
    """Truncated displacement series with its generating data."""

    f: FourierSeries
    omega: Frequency
    weights: WeightSequence
    window: Window
    beta: BetaSequence
    ms: ScaleSequence
    eps: float
    depth: int
    engine: str
    s: float
    s2: float
    coefficients: OrderedCoefficients = field(repr=False, default=None)
    per_order_norms: list[float] = field(default_factory=list)
    kernel_residuals: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not (0 < self.s2 < self.s):
            raise DomainError("regularity parameters must satisfy 0 < s2 < s")


def synthesize(f: FourierSeries, omega: Frequency, w: WeightSequence,
               window: Window, beta: BetaSequence, ms: ScaleSequence,
               eps: float, depth: int, engine: str = "recursion",
               s: float = 0.5, s2: float = 0.25,
               cap: int | None = None) -> SeriesSolution:
    """Compute the displacement coefficients with the chosen engine."""
    if depth < 1:
        raise DomainError("series depth must be at least 1")
    if engine == "recursion":
        u, residuals = expand(f, omega, beta, ms, window, depth)
    elif engine == "trees":
        te = TreeEngine(f, omega, beta, ms, window, cap=cap)
        u = OrderedCoefficients(window)
        for k in range(1, depth + 1):
            series = FourierSeries(VECTOR, window)
            for mom, vec in te.coefficients(k).items():
                nu = Mode.from_dict({j: int(mom[window.offset(j)])
                                     for j in window.indices})
                series.set_term(nu, np.array(vec, dtype=complex))
            u.append(series)
        residuals = []
    else:
        raise DomainError(f"unknown engine {engine!r}")
    sol = SeriesSolution(f, omega, w, window, beta, ms, float(eps), depth, engine, s, s2)
    sol.coefficients = u
    sol.per_order_norms = [u.order(k).weighted_norm(s, w) for k in range(1, depth + 1)]
    sol.kernel_residuals = residuals
    return sol


def evaluate_displacement(sol: SeriesSolution, phi: np.ndarray,
                          imag_tol: float = 1e-12) -> np.ndarray:
    """Real displacement vector at the angle phi."""
    phi = np.asarray(phi, dtype=float)
    acc = np.zeros(sol.window.dim, dtype=complex)
    scale = 1.0
    for k in range(1, sol.depth + 1):
        scale *= sol.eps
        acc += scale * sol.coefficients.order(k).evaluate(phi, sol.window)
    resid = float(np.max(np.abs(acc.imag))) if len(acc) else 0.0
    if resid > imag_tol:
        raise DomainError(f"imaginary displacement residue {resid:.3e} exceeds {imag_tol:.1e}")
    return acc.real


def displacement_table(sol: SeriesSolution):
    """Flattened (mode matrix, coefficient matrix) with eps^k folded in,
    for vectorized evaluation over many angles."""
    rows = []
    coefs = []
    scale = 1.0
    for k in range(1, sol.depth + 1):
        scale *= sol.eps
        for nu, vec in sorted(sol.coefficients.order(k).terms.items(),
                              key=lambda t: t[0].entries):
            rows.append(nu.dense(sol.window))
            coefs.append(scale * np.asarray(vec))
    if not rows:
        return np.zeros((0, sol.window.dim)), np.zeros((0, sol.window.dim), dtype=complex)
    return np.array(rows), np.array(coefs)


def evaluate_displacement_many(sol: SeriesSolution, phis: np.ndarray,
                               imag_tol: float = 1e-12) -> np.ndarray:
    """Displacement at many angles at once; phis has shape (S, dim)."""
    modes, coefs = displacement_table(sol)
    if len(modes) == 0:
        return np.zeros_like(np.asarray(phis, dtype=float))
    phases = np.exp(1j * (np.asarray(phis, dtype=float) @ modes.T))
    vals = phases @ coefs
    resid = float(np.max(np.abs(vals.imag)))
    if resid > imag_tol:
        raise DomainError(f"imaginary displacement residue {resid:.3e} exceeds {imag_tol:.1e}")
    return vals.real


# ---------------------------------------------------------------------------
# Residual diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualOrder:
    order: int
    series: FourierSeries
    sup: float        # largest coefficient magnitude of the residual order
    field_sup: float  # magnitude scale of the underlying field order


def residual_orders(sol: SeriesSolution) -> list[ResidualOrder]:
    """Residual coefficients of (omega.d)^2 u + eps grad f(phi+u), order by
    order in eps up to depth + 2.

    Orders <= depth vanish up to rounding by construction; depth+1 and
    depth+2 are the leading exact residual of the truncation."""
    window = sol.window
    u = sol.coefficients
    ws = _FieldWorkspace(sol.f, u, window)
    out = []
    for kappa in range(1, sol.depth + 3):
        fld = field_order(sol.f, u, kappa, window, workspace=ws, allow_truncated=True)
        res = FourierSeries(VECTOR, window)
        for nu, vec in fld.terms.items():
            res.add_term(nu, vec)
        if kappa <= sol.depth:
            for nu, vec in u.order(kappa).terms.items():
                x = sol.omega.dot(nu)
                res.add_term(nu, -(x * x) * np.asarray(vec))
        res.prune(0.0)
        out.append(ResidualOrder(kappa, res, res.sup_coefficient(), fld.sup_coefficient()))
    return out


def residual_spectrum(sol: SeriesSolution) -> FourierSeries:
    """Combined residual series sum_kappa eps^kappa R^(kappa)."""
    total = FourierSeries(VECTOR, sol.window)
    for ro in residual_orders(sol):
        scale = sol.eps ** ro.order
        for nu, vec in ro.series.terms.items():
            total.add_term(nu, scale * np.asarray(vec))
    return total


# ---------------------------------------------------------------------------
# Action diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionCurve:
    values: np.ndarray          # (S, dim) real action vectors
    lq_norm: float              # max over samples of sup_j |I_j| <j>^q
    m_norm: float               # max over samples of sup_j |e^{s2 h_j} (I_j - omega_j)|
    triangle_bound: float       # sum_k eps^k sum_nu |omega.nu| ||u_nu^(k)||_inf
    sup_deviation: float        # max over samples of sup_j |I_j - omega_j|


def action_curve(sol: SeriesSolution, phis: np.ndarray) -> ActionCurve:
    """I(phi) = omega + sum_k eps^k sum_nu i (omega.nu) u_nu^(k) e^{i nu.phi}."""
    window = sol.window
    modes, coefs = displacement_table(sol)
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    om = sol.omega.as_array()
    if len(modes):
        xdots = modes @ om
        weighted = (1j * xdots)[:, None] * coefs
        vals = np.exp(1j * (phis @ modes.T)) @ weighted
        dev = vals.real + 0.0
    else:
        dev = np.zeros((len(phis), window.dim))
    values = om[None, :] + dev
    brackets = np.array([float(_angle_bracket(j)) for j in window.indices])
    hvals = np.array([sol.weights.h(j) for j in window.indices])
    lq = float(np.max(np.abs(values) * brackets ** sol.omega.q))
    finite = np.isfinite(hvals)
    mweights = np.where(finite, np.exp(sol.s2 * np.where(finite, hvals, 0.0)), np.inf)
    devmax = np.abs(dev)
    m_norm = float(np.max(np.where(devmax > 0, devmax * mweights, 0.0)))
    triangle = 0.0
    scale = 1.0
    for k in range(1, sol.depth + 1):
        scale *= sol.eps
        for nu, vec in sol.coefficients.order(k).terms.items():
            triangle += scale * abs(sol.omega.dot(nu)) * float(np.max(np.abs(vec)))
    return ActionCurve(values, lq, m_norm, triangle, float(np.max(devmax)))


# ---------------------------------------------------------------------------
# Threshold constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaledThreshold:
    """Thresholds from the gamma-proportional analytic divisor floor, in the
    plain normalization and in the gamma-rescaled one (beta/gamma with the
    gain gamma^2 folded into the per-order constant)."""

    gamma: float
    n0_plain: int
    eps1_plain: float
    n0_scaled: int
    eps1_scaled: float
    eps2_scaled: float


@dataclass(frozen=True)
class Thresholds:
    c0: float
    c1: float
    f_norm: float
    n0: int
    beta_n0: float
    big_c0: float
    big_c0_prime: float
    eps1_bar: float
    eps2_bar: float
    tail_terms: tuple[float, ...]
    tail_remainder_bound: float
    scaled: tuple[ScaledThreshold, ...] = ()


def _tail_majorant_coeffs(w: WeightSequence, omega: Frequency,
                          p: DiophantineParams) -> tuple[float, float]:
    """(A, B) with log(1/beta(m)) <= A + B m for Diophantine omega on a
    finite-window weight: beta(m) >= gamma / prod_j (1 + <j>^mu1 (2^m/h_j)^mu2)."""
    active = [j for j in omega.window.indices if math.isfinite(w.h(j))]
    if any(math.isfinite(w.h(j)) for j in
           (omega.window.half + 1, -(omega.window.half + 1))):
        raise TruncationError(
            "tail certification needs weights that are infinite outside the window")
    a = math.log(1.0 / p.gamma)
    for j in active:
        a += math.log1p(_angle_bracket(j) ** p.mu1 * w.h(j) ** (-p.mu2))
    b = len(active) * p.mu2 * math.log(2.0)
    return a, b


def _smallest_tail_index(terms: list[float], remainder: float, s: float) -> int:
    """Least n0 with 8 (sum_{n>n0} terms + remainder) < s/2."""
    n_max = len(terms) - 1
    for n0 in range(n_max + 1):
        tail = sum(terms[n0 + 1:]) + remainder
        if 8.0 * tail < 0.5 * s:
            return n0
    raise TruncationError(
        "divisor tail not certifiable at the computed beta depth; increase m_max")


def _window_divisor_floor(w: WeightSequence, omega: Frequency,
                          p: DiophantineParams, m_top: int) -> list[float]:
    """Analytic floor gamma / prod_j (1 + <j>^mu1 (2^m/h_j)^mu2), m = 0..m_top.

    Valid for Diophantine frequencies on a finite-window weight: every mode
    with |nu|_w <= 2^m has |nu_j| <= 2^m / h_j."""
    active = [j for j in omega.window.indices if math.isfinite(w.h(j))]
    out = []
    for m in range(m_top + 1):
        logprod = 0.0
        for j in active:
            logprod += math.log1p(_angle_bracket(j) ** p.mu1 * (2.0 ** m / w.h(j)) ** p.mu2)
        out.append(p.gamma * math.exp(-logprod))
    return out


def _floor_threshold(values: list[float], gamma_div: float, gain: float,
                     a_coef: float, b_coef: float, s: float, s2: float,
                     c0: float, c1: float, f_norm: float) -> tuple[int, float]:
    """(n0, eps1) for a divisor floor, optionally gamma-rescaled.

    `gamma_div` divides the floor values; `gain` multiplies the resulting
    threshold (gamma^2 for the rescaled normalization)."""
    from .smalldiv import BetaSequence, scale_sequence
    vals = [v / gamma_div for v in values]
    seq = BetaSequence(tuple(vals), tuple([None] * len(vals)), "analytic-window-floor")
    mseq = scale_sequence(seq)
    m_top = mseq[mseq.n_max]
    terms = [2.0 ** (-mseq[n]) * math.log(1.0 / seq(mseq[n]))
             for n in range(mseq.n_max + 1)]
    rem_a = a_coef + math.log(gamma_div)
    remainder = 2.0 ** (-m_top) * rem_a + b_coef * 2.0 ** (-m_top) * (m_top + 2.0)
    n0 = _smallest_tail_index(terms, remainder, s)
    eps1 = gain / (c0 * (16.0 * c1 / (s * seq(mseq[n0]))) ** 4 * f_norm)
    return n0, eps1


def threshold_estimates(f: FourierSeries, omega: Frequency, w: WeightSequence,
                        s: float, s2: float, beta: BetaSequence, ms: ScaleSequence,
                        dioph: DiophantineParams, c0: float = 1.0,
                        scaled_gammas: tuple[float, ...] = ()) -> Thresholds:
    """Convergence threshold constants from the computed beta sequence.

    The tail past the computed depth is majorized through the Diophantine
    product bound at the given parameters (membership is assumed beyond the
    checked truncation; see the report header for the assumption)."""
    if not (0 < s2 < s):
        raise DomainError("need 0 < s2 < s")
    if c0 <= 0:
        raise DomainError("c0 must be positive")
    c1 = w.c1()
    f_norm = f.weighted_norm(2.0 * s, w)
    if f_norm == 0:
        raise DomainError("thresholds need a nonzero potential")
    a_coef, b_coef = _tail_majorant_coeffs(w, omega, dioph)
    m_top = ms[ms.n_max]
    terms = [2.0 ** (-ms[n]) * math.log(1.0 / beta(ms[n]))
             for n in range(ms.n_max + 1)]
    remainder = 2.0 ** (-m_top) * a_coef + b_coef * 2.0 ** (-m_top) * (m_top + 2.0)
    n0 = _smallest_tail_index(terms, remainder, s)
    beta_n0 = beta(ms[n0])
    ratio = 16.0 * c1 / (s * beta_n0)
    big_c0 = ratio ** 2 * f_norm
    big_c0_prime = c0 * ratio ** 4 * f_norm
    eps1 = 1.0 / big_c0_prime
    shrink = (s - s2) / (s - s2 + 2.0)
    scaled = []
    for gam in scaled_gammas:
        pg = DiophantineParams(gam, dioph.mu1, dioph.mu2)
        a_g = a_coef - math.log(dioph.gamma) + math.log(1.0 / gam)
        m_floor = 8
        while 8.0 * 2.0 ** (-m_floor) * (abs(a_g) + b_coef * (m_floor + 2.0)) >= 0.25 * s:
            m_floor += 4
            if m_floor > 200:
                raise TruncationError("analytic floor tail does not certify")
        floor_vals = _window_divisor_floor(w, omega, pg, m_floor)
        n0_p, eps1_p = _floor_threshold(floor_vals, 1.0, 1.0, a_g, b_coef,
                                        s, s2, c0, c1, f_norm)
        n0_s, eps1_s = _floor_threshold(floor_vals, gam, gam ** 2, a_g, b_coef,
                                        s, s2, c0, c1, f_norm)
        scaled.append(ScaledThreshold(gam, n0_p, eps1_p, n0_s, eps1_s,
                                      eps1_s * shrink))
    return Thresholds(c0, c1, f_norm, n0, beta_n0, big_c0, big_c0_prime,
                      eps1, eps1 * shrink, tuple(terms), remainder, tuple(scaled))


def radius_from_norms(norms: list[float]) -> float:
    """Root-test fit over the top half of a per-order norm sequence:
    1/exp(slope of log norms against the order).  nan when degenerate."""
    depth = len(norms)
    if depth < 4:
        raise DomainError("empirical radius needs at least four orders")
    k_lo = math.ceil(depth / 2)
    ks = np.arange(k_lo, depth + 1, dtype=float)
    vals = np.array(norms[k_lo - 1:depth], dtype=float)
    if np.any(vals <= 0.0):
        return math.nan
    slope = np.polyfit(ks, np.log(vals), 1)[0]
    return float(math.exp(-slope))


def empirical_radius(sol: SeriesSolution) -> float:
    """Root-test convergence-radius estimate from the computed orders."""
    return radius_from_norms(sol.per_order_norms)
