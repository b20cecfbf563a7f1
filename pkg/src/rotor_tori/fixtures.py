"""Reference systems used by the test-bench and the CLI defaults."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modes import (FourierSeries, Frequency, Mode, WeightSequence, Window,
                    parse_potential)

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

GOLDEN_POTENTIAL = "cos: 0 -> 0.5\ncos: 0 1 -> 0.5\n"


@dataclass(frozen=True)
class RotatorSystem:
    weights: WeightSequence
    window: Window
    omega: Frequency
    f: FourierSeries
    s: float
    s2: float


def golden_three_rotator() -> RotatorSystem:
    """Three rotators with unit weights on {-1, 0, 1}, frequencies
    (sqrt 2, 1, golden ratio) and the two-harmonic cosine coupling."""
    return RotatorSystem(
        weights=WeightSequence.finite_window(1, 1.0),
        window=Window(1),
        omega=Frequency.from_dict({-1: math.sqrt(2.0), 0: 1.0, 1: GOLDEN_RATIO}, q=1.0),
        f=parse_potential(GOLDEN_POTENTIAL),
        s=0.5,
        s2=0.25,
    )


def log_weights(sigma: float = 2.5) -> WeightSequence:
    """Unbounded logarithmic weights used for the Diophantine calibrations."""
    return WeightSequence.log_power(sigma)


def random_cosine_potential(seed: int, harmonics: int, window: Window,
                            max_entry: int = 2, amplitude: float = 0.5) -> FourierSeries:
    """Seeded random cosine potential supported inside the window.

    Draws `harmonics` distinct nonzero modes with entries in
    [-max_entry, max_entry] and uniform amplitudes below `amplitude`."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    chosen: list[Mode] = []
    lines = []
    while len(chosen) < harmonics:
        entries = {j: int(rng.integers(-max_entry, max_entry + 1))
                   for j in window.indices}
        nu = Mode.from_dict(entries)
        if not nu or nu in chosen or -nu in chosen:
            continue
        chosen.append(nu)
        amp = float(rng.uniform(0.1, 1.0)) * amplitude
        lines.append("term: " + ",".join(f"{j}:{v}" for j, v in nu.entries)
                     + f" -> {amp!r},0.0")
    return parse_potential("\n".join(lines) + "\n")


def random_frequency(seed: int, window: Window, q: float = 1.0,
                     rho: float = 2.0, floor: float = 0.35) -> Frequency:
    """Seeded frequency vector with components bounded away from zero."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    vals = {}
    for j in window.indices:
        mag = float(rng.uniform(floor, rho)) * max(1, abs(j)) ** (-q)
        vals[j] = mag if rng.uniform() < 0.5 else -mag
    return Frequency.from_dict(vals, q=q)


def triple_resonant_potential() -> FourierSeries:
    """Cosine harmonics at e_{-1}, e_1 and e_{-1}+e_1: the support admits
    three-mode zero sums, so odd-order self-energies are populated."""
    return parse_potential(
        "cos: -1 -> 0.5\ncos: 1 -> 0.5\ncos: -1 1 -> 0.25\n")
