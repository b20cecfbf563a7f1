"""Order-by-order Fourier recursion for the torus displacement coefficients.

Writing the displacement as u = sum_k eps^k u^(k) and inserting it into the
conjugacy equation (omega . d_phi)^2 u = -eps grad f(phi + u) yields, order
by order,

    (omega . nu)^2 u_nu^(k) = F_nu^(k-1),

where F^(k-1) collects the order-(k-1) terms of grad f(phi + u):

    F_nu^(k-1) = sum_{p>=0} (1/p!) sum_{k_1+..+k_p = k-1, k_i>=1}
                 sum_{nu_0+..+nu_p = nu} f_{nu_0} i^{p+1} nu_0
                 prod_r (nu_0 . u_{nu_r}^{(k_r)}),

with the p = 0 term f_nu (i nu) present exactly at k = 1.  The nu = 0
component of F is not solved for: it vanishes identically for solutions of
the recursion (the translation-invariance identity), and `kernel_residual`
measures how well the computed orders satisfy that.

The base point phi_0 enters only through the substitution
f_nu -> f_nu e^{i nu . phi_0}; use `phase_shifted` to apply it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, TruncationError
from .modes import (SCALAR, VECTOR, FourierSeries, Mode, Window, ZERO_MODE)
from .smalldiv import BetaSequence, ScaleSequence, SCALE_ZERO, scale_of


@dataclass
class OrderedCoefficients:
    """Displacement coefficients u^(k), k = 1..K, as vector-valued series.

    Every stored mode is nonzero (the average of u is fixed to 0) and the
    coefficients satisfy u^(k)_{-nu} = conj(u^(k)_nu) componentwise.
    """

    window: Window
    orders: list[FourierSeries] = field(default_factory=list)
    normalization: str = "field-over-divisor-squared"

    @property
    def depth(self) -> int:
        return len(self.orders)

    def order(self, k: int) -> FourierSeries:
        if not 1 <= k <= self.depth:
            raise DomainError(f"order {k} not computed (depth {self.depth})")
        return self.orders[k - 1]

    def append(self, series: FourierSeries) -> None:
        if ZERO_MODE in series.terms:
            raise DomainError("displacement orders must have zero average")
        self.orders.append(series)

    def reality_defect(self) -> float:
        return max((s.hermitian_defect() for s in self.orders), default=0.0)


def compositions(total: int, parts: int):
    """Ordered tuples of `parts` positive integers summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def phase_shifted(f: FourierSeries, phi0: np.ndarray, window: Window) -> FourierSeries:
    """f with coefficients rotated to the base point phi0."""
    return f.phase_shift(np.asarray(phi0, dtype=float), window)


def _part_multisets(total: int):
    """Nondecreasing tuples of positive parts summing to `total`, with the
    inverse multiplicity factor 1/prod_j m_j! that turns the ordered
    composition sum with its 1/p! into a sum over multisets."""
    out: list[tuple[tuple[int, ...], float]] = []

    def rec(remaining: int, minimum: int, acc: list[int]):
        if remaining == 0:
            mult = 1.0
            i = 0
            while i < len(acc):
                j = i
                while j < len(acc) and acc[j] == acc[i]:
                    j += 1
                mult *= math.factorial(j - i)
                i = j
            out.append((tuple(acc), 1.0 / mult))
            return
        for part in range(minimum, remaining + 1):
            acc.append(part)
            rec(remaining - part, part, acc)
            acc.pop()

    rec(total, 1, [])
    return out


class _FieldWorkspace:
    """Memoized contraction series and their convolutions for one f and one
    coefficient table.  Safe to reuse while orders are only appended."""

    def __init__(self, f: FourierSeries, u: OrderedCoefficients, window: Window):
        self.f = f
        self.u = u
        self.window = window
        self.f_modes = [nu for nu in sorted(f.terms.keys(), key=lambda m: m.entries) if nu]
        self.dense = {nu0: nu0.dense(window) for nu0 in self.f_modes}
        self.grad = {nu0: 1j * self.dense[nu0] for nu0 in self.f_modes}
        # per (nu0, order): {mode: i (nu0 . u_mode)}
        self._contr: dict[tuple[Mode, int], dict[Mode, complex]] = {}
        # per (nu0, sorted parts): convolution of the contraction series
        self._conv: dict[tuple[Mode, tuple[int, ...]], dict[Mode, complex]] = {}

    def contraction(self, nu0: Mode, order: int) -> dict[Mode, complex]:
        key = (nu0, order)
        got = self._contr.get(key)
        if got is None:
            nu0d = self.dense[nu0]
            got = {}
            for mode, vec in sorted(self.u.order(order).terms.items(),
                                    key=lambda t: t[0].entries):
                c = 1j * complex(np.dot(nu0d, vec))
                if c != 0.0:
                    got[mode] = c
            self._contr[key] = got
        return got

    def convolution(self, nu0: Mode, parts: tuple[int, ...]) -> dict[Mode, complex]:
        key = (nu0, parts)
        got = self._conv.get(key)
        if got is not None:
            return got
        if len(parts) == 1:
            got = self.contraction(nu0, parts[0])
        else:
            left = self.convolution(nu0, parts[:-1])
            right = self.contraction(nu0, parts[-1])
            got = {}
            for ma, ca in left.items():
                for mb, cb in right.items():
                    m = ma + mb
                    got[m] = got.get(m, 0.0) + ca * cb
        self._conv[key] = got
        return got


def field_order(f: FourierSeries, u: OrderedCoefficients, k: int,
                window: Window, workspace: _FieldWorkspace | None = None,
                allow_truncated: bool = False) -> FourierSeries:
    """Order-(k-1) coefficient map of grad f(phi + u), vector valued.

    Orders 1..k-1 of u must be present unless `allow_truncated` is set, in
    which case missing high orders count as zero (the residual of a
    truncated series).  The nu = 0 coefficient is kept in the output (it is
    the kernel diagnostic); other consumers divide by the squared divisor
    or drop it.
    """
    if k < 1:
        raise DomainError("order must be at least 1")
    if u.depth < k - 1 and not allow_truncated:
        raise DomainError(f"need orders up to {k - 1}, have {u.depth}")
    ws = workspace if workspace is not None else _FieldWorkspace(f, u, window)
    out = FourierSeries(VECTOR, window)

    if k == 1:
        for nu0 in ws.f_modes:
            out.add_term(nu0, f.terms[nu0] * ws.grad[nu0])
        out.prune()
        return out

    # scalar sums keyed by (target mode, nu0); vectors materialized at the end
    acc: dict[tuple[Mode, Mode], complex] = {}
    for parts, weight in _part_multisets(k - 1):
        if parts[-1] > u.depth:
            continue  # involves a truncated-away order
        for nu0 in ws.f_modes:
            base = f.terms[nu0] * weight
            for mode, cval in ws.convolution(nu0, parts).items():
                key = (nu0 + mode, nu0)
                acc[key] = acc.get(key, 0.0) + base * cval
    for (target, nu0), scal in sorted(acc.items(),
                                      key=lambda t: (t[0][0].entries, t[0][1].entries)):
        out.add_term(target, scal * ws.grad[nu0])
    out.prune()
    return out


def lindstedt_order(f: FourierSeries, omega, beta: BetaSequence, ms: ScaleSequence,
                    u: OrderedCoefficients, k: int,
                    fld: FourierSeries | None = None) -> FourierSeries:
    """Solve order k of the recursion: u_nu^(k) = F_nu^(k-1) / (omega . nu)^2.

    The divisor is assigned its unique scale first; a divisor deeper than
    the computed beta range raises TruncationError naming the mode.
    A precomputed field series may be passed to avoid recomputation.
    """
    window = u.window
    if fld is None:
        fld = field_order(f, u, k, window)
    out = FourierSeries(VECTOR, window)
    for nu in sorted(fld.terms.keys(), key=lambda m: m.entries):
        if not nu:
            continue  # kernel direction: not solved here
        x = omega.dot(nu)
        n = scale_of(x, beta, ms)
        if n is None:
            raise TruncationError(
                f"divisor at mode {nu.label()} below computed beta range (|x|={abs(x):.3e})")
        if n == SCALE_ZERO:
            raise TruncationError(f"exact resonance at mode {nu.label()}")
        out.set_term(nu, fld.terms[nu] / (x * x))
    return out


def kernel_residual(f: FourierSeries, u: OrderedCoefficients, k: int,
                    window: Window) -> float:
    """Sup-component magnitude of the nu = 0 coefficient of F^(k-1).

    Vanishes (up to rounding) whenever orders 1..k-1 solve the recursion.
    """
    fld = field_order(f, u, k, window)
    c = fld.terms.get(ZERO_MODE)
    return 0.0 if c is None else float(np.max(np.abs(c)))


def expand(f: FourierSeries, omega, beta: BetaSequence, ms: ScaleSequence,
           window: Window, depth: int,
           phi0: np.ndarray | None = None) -> tuple[OrderedCoefficients, list[float]]:
    """Run the recursion to the requested depth.

    Returns the coefficients and the per-order kernel residuals."""
    if depth < 1:
        raise DomainError("depth must be at least 1")
    fs = f if phi0 is None else phase_shifted(f, phi0, window)
    u = OrderedCoefficients(window)
    ws = _FieldWorkspace(fs, u, window)
    residuals = []
    for k in range(1, depth + 1):
        fld = field_order(fs, u, k, window, workspace=ws)
        c0 = fld.terms.get(ZERO_MODE)
        residuals.append(0.0 if c0 is None else float(np.max(np.abs(c0))))
        u.append(lindstedt_order(fs, omega, beta, ms, u, k, fld=fld))
    return u, residuals
