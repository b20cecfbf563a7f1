"""Command-line front end.

Subcommands map one-to-one onto the library operations:

  betaseq bryuno dioph measure expand trees cancel synthesize validate
  thresholds all

Configuration comes from a JSON file (--config) with flag overrides; every
report echoes the effective configuration in its header.  Reports are
written under --out only after the computation has fully succeeded, as CSV
or JSON plus a rendered PNG figure.  Exit codes: 0 ok, 2 configuration
error, 3 resonance or truncation, 4 resource cap, 5 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import reports
from .errors import (ConfigError, DomainError, PotentialFormatError,
                     ResonanceError, ResourceLimitError, RotorToriError,
                     TruncationError)
from .fixtures import GOLDEN_POTENTIAL
from .integrate import integrate_ode, validate_torus
from .lindstedt import expand
from .modes import (Frequency, Mode, WeightSequence, Window, ZERO_MODE,
                    parse_potential, star_norm)
from .renorm import cancellation_report
from .smalldiv import (BetaSequence, DiophantineParams, ScaleSequence,
                       beta_sequence, bryuno_sum, diophantine_check,
                       measure_estimate, propagator, scale_of, scale_sequence)
from .torus import (SeriesSolution, empirical_radius, residual_spectrum,
                    synthesize, threshold_estimates)
from .trees import TreeEngine, enumerate_trees, line_momenta, tree_value

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESONANCE = 3
EXIT_RESOURCE = 4
EXIT_ACCEPTANCE = 5


class AcceptanceFailure(RotorToriError):
    pass


DEFAULT_CONFIG = {
    "weights": {"kind": "finite_window", "j0": 1, "constant": 1.0},
    "frequency": {"values": {"-1": math.sqrt(2.0), "0": 1.0,
                             "1": (1.0 + math.sqrt(5.0)) / 2.0}, "q": 1.0},
    "potential_text": GOLDEN_POTENTIAL,
    "potential": None,
    "s": 0.5,
    "s2": 0.25,
    "rho": 1.0,
    "gamma": 0.01,
    "gamma_list": [0.001, 0.003, 0.01],
    "scaled_gammas": [0.001, 0.01, 0.1],
    "mu1": 2.5,
    "mu2": 1.5,
    "c0": 1.0,
    "K": 6,
    "eps": [0.001],
    "m_max": 10,
    "budget": 4.0,
    "samples": 500,
    "seed": 0,
    "dt": 0.001,
    "T": 50.0,
    "stride": 100,
    "k_max": 3,
    "tree_order": 4,
    "mode_cap": 2_000_000,
    "tree_cap": 2_000_000,
    "out": "out",
}


@dataclass
class RunConfig:
    """Validated runtime configuration with constructed domain objects."""

    raw: dict
    weights: WeightSequence
    omega: Frequency
    window: Window
    f: object
    dioph: DiophantineParams
    out: Path
    echo: dict = field(default_factory=dict)

    def __getattr__(self, name):
        raw = object.__getattribute__(self, "raw")
        if name in raw:
            return raw[name]
        raise AttributeError(name)


def _build_weights(spec: dict) -> WeightSequence:
    kind = spec.get("kind")
    if kind == "finite_window":
        inner = spec.get("inner")
        if inner is not None:
            return WeightSequence.finite_window(int(spec["j0"]), _build_weights(inner))
        return WeightSequence.finite_window(int(spec["j0"]),
                                            float(spec.get("constant", 1.0)))
    if kind == "log_power":
        return WeightSequence.log_power(float(spec["sigma"]))
    if kind == "polynomial":
        return WeightSequence.polynomial(float(spec["alpha"]))
    if kind == "table":
        ext = spec.get("extension")
        return WeightSequence.table([float(v) for v in spec["values"]],
                                    _build_weights(ext) if ext else None)
    raise ConfigError(f"unknown weight kind {kind!r}")


def _build_frequency(spec: dict) -> Frequency:
    q = float(spec.get("q", 1.0))
    if "values" in spec:
        vals = {int(j): float(v) for j, v in spec["values"].items()}
        return Frequency.from_dict(vals, q=q)
    if "sample" in spec:
        samp = spec["sample"]
        half = int(samp["window"])
        rho = float(samp.get("rho", 1.0))
        rng = np.random.Generator(np.random.Philox(key=int(samp.get("seed", 0))))
        vals = {}
        for j in range(-half, half + 1):
            width = max(1, abs(j)) ** (-q) * rho
            vals[j] = float(rng.uniform(-width, width))
        return Frequency.from_dict(vals, q=q)
    raise ConfigError("frequency spec needs 'values' or 'sample'")


def load_config(args) -> RunConfig:
    raw = dict(DEFAULT_CONFIG)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        for key in loaded:
            if key not in DEFAULT_CONFIG:
                raise ConfigError(f"unknown config key {key!r}")
        raw.update(loaded)
    for key in ("out", "seed", "m_max", "K", "gamma", "dt", "T", "samples",
                "budget", "k_max", "engine"):
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    if getattr(args, "eps", None) is not None:
        raw["eps"] = [float(v) for v in args.eps]
    raw.setdefault("engine", "recursion")

    if raw["s"] <= 0 or not (0 < raw["s2"] < raw["s"]):
        raise ConfigError("need s > 0 and 0 < s2 < s")
    if raw["K"] < 1 or raw["m_max"] < 0 or raw["samples"] < 1:
        raise ConfigError("K, m_max, samples out of range")
    if raw["dt"] <= 0 or raw["T"] <= 0 or raw["rho"] <= 0:
        raise ConfigError("dt, T, rho must be positive")
    if not raw["eps"]:
        raise ConfigError("eps list must be nonempty")
    try:
        weights = _build_weights(raw["weights"])
        omega = _build_frequency(raw["frequency"])
        dioph = DiophantineParams(float(raw["gamma"]), float(raw["mu1"]),
                                  float(raw["mu2"]))
        dioph.validate_against(omega.q)
        if raw["potential"]:
            text = Path(raw["potential"]).read_text(encoding="utf-8")
        else:
            text = raw["potential_text"]
        f = parse_potential(text)
    except (DomainError, PotentialFormatError, OSError) as exc:
        raise ConfigError(str(exc)) from exc

    echo = {k: v for k, v in sorted(raw.items())
            if k not in ("potential_text",) and v is not None}
    echo = {k: (v if not isinstance(v, (dict, list)) else json.dumps(v, sort_keys=True))
            for k, v in echo.items()}
    return RunConfig(raw, weights, omega, omega.window, f, dioph,
                     Path(raw["out"]), echo)


def _beta(cfg: RunConfig) -> tuple[BetaSequence, ScaleSequence]:
    beta = beta_sequence(cfg.omega, cfg.weights, int(cfg.m_max))
    return beta, scale_sequence(beta)


def _synthesize(cfg: RunConfig, eps: float, depth: int | None = None,
                engine: str | None = None) -> SeriesSolution:
    beta, ms = _beta(cfg)
    return synthesize(cfg.f, cfg.omega, cfg.weights, cfg.window, beta, ms,
                      eps=eps, depth=depth or int(cfg.K),
                      engine=engine or cfg.raw.get("engine", "recursion"),
                      s=float(cfg.s), s2=float(cfg.s2), cap=int(cfg.tree_cap))


def _coeff_rows(sol: SeriesSolution):
    rows = []
    for k in range(1, sol.depth + 1):
        series = sol.coefficients.order(k)
        for nu in series.modes_sorted(sol.weights):
            vec = series.terms[nu]
            for j in sol.window.indices:
                c = vec[sol.window.offset(j)]
                rows.append((k, nu.label(), j, float(c.real), float(c.imag)))
    return rows


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_betaseq(cfg: RunConfig) -> int:
    beta, ms = _beta(cfg)
    rows = [(m, 2.0 ** m, beta(m),
             beta.witnesses[m].label() if beta.witnesses[m] else "")
            for m in range(beta.m_max + 1)]
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_csv(cfg.out / "betaseq.csv",
                      ["m", "two_pow_m", "beta", "witness_mode"], rows, cfg.echo)
    reports.write_json(cfg.out / "betaseq.json", {
        "config": cfg.echo,
        "scale_sequence": list(ms.values),
        "truncated": ms.truncated,
    })
    reports.betaseq_figure(cfg.out / "betaseq.png",
                           [r[0] for r in rows], [r[2] for r in rows])
    print(f"betaseq: m_max={beta.m_max} scales={list(ms.values)}")
    return EXIT_OK


def cmd_bryuno(cfg: RunConfig) -> int:
    beta, _ = _beta(cfg)
    bs = bryuno_sum(beta, beta.m_max)
    rows = [(m, bs.partials[m - 1] - (bs.partials[m - 2] if m > 1 else 0.0),
             bs.partials[m - 1]) for m in range(1, beta.m_max + 1)]
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_csv(cfg.out / "bryuno.csv", ["m", "increment", "partial_sum"],
                      rows, cfg.echo)
    reports.write_json(cfg.out / "bryuno.json", {
        "config": cfg.echo,
        "value": bs.value,
        "last_increment": bs.last_increment,
    })
    reports.bryuno_figure(cfg.out / "bryuno.png",
                          [r[0] for r in rows], [r[2] for r in rows])
    print(f"bryuno: partial sum to m={beta.m_max} is {bs.value:.6f}")
    return EXIT_OK


def cmd_dioph(cfg: RunConfig) -> int:
    res = diophantine_check(cfg.omega, cfg.dioph, cfg.weights,
                            float(cfg.budget), cap=int(cfg.mode_cap))
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_json(cfg.out / "dioph.json", {
        "config": cfg.echo,
        "passed": res.passed,
        "witness": res.witness.label() if res.witness else None,
        "checked": res.checked,
        "margin": res.margin,
        "gamma": cfg.dioph.gamma,
        "mu1": cfg.dioph.mu1,
        "mu2": cfg.dioph.mu2,
        "N": float(cfg.budget),
    })
    print(f"dioph: {'pass' if res.passed else 'fail'} over {res.checked} modes "
          f"(margin {res.margin:.3e})")
    return EXIT_OK


def cmd_measure(cfg: RunConfig) -> int:
    gammas = [float(g) for g in cfg.gamma_list] or [cfg.dioph.gamma]
    runs = []
    for gamma in sorted(gammas):
        p = DiophantineParams(gamma, cfg.dioph.mu1, cfg.dioph.mu2)
        est = measure_estimate(p, cfg.omega.q, float(cfg.rho), cfg.weights,
                               float(cfg.budget), int(cfg.samples), int(cfg.seed))
        runs.append({
            "gamma": est.gamma, "mu1": est.mu1, "mu2": est.mu2, "q": est.q,
            "rho": est.rho, "N": est.budget, "samples": est.samples,
            "seed": est.seed, "fraction": est.fraction,
        })
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_json(cfg.out / "measure.json", {"config": cfg.echo, "runs": runs})
    reports.measure_figure(cfg.out / "measure.png",
                           [r["gamma"] for r in runs],
                           [r["fraction"] for r in runs])
    for r in runs:
        print(f"measure: gamma={r['gamma']:.3e} fraction={r['fraction']:.4f}")
    return EXIT_OK


def cmd_expand(cfg: RunConfig) -> int:
    sol = _synthesize(cfg, float(cfg.eps[0]), engine="recursion")
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_csv(cfg.out / "coeffs.csv", ["k", "mode", "j", "re", "im"],
                      _coeff_rows(sol), cfg.echo)
    reports.write_json(cfg.out / "expand.json", {
        "config": cfg.echo,
        "per_order_norms": sol.per_order_norms,
        "kernel_residuals": sol.kernel_residuals,
    })
    reports.norms_figure(cfg.out / "expand.png",
                         list(range(1, sol.depth + 1)), sol.per_order_norms,
                         sol.kernel_residuals)
    print(f"expand: K={sol.depth}, worst kernel residual "
          f"{max(sol.kernel_residuals):.3e}")
    return EXIT_OK


def cmd_trees(cfg: RunConfig) -> int:
    beta, ms = _beta(cfg)
    rec = _synthesize(cfg, 1.0, engine="recursion")
    engine = TreeEngine(cfg.f, cfg.omega, beta, ms, cfg.window,
                        cap=int(cfg.tree_cap))
    deviations = []
    for k in range(1, int(cfg.K) + 1):
        series = rec.coefficients.order(k)
        worst = 0.0
        for nu in series.support():
            a = series.coefficient(nu)
            b = engine.coefficient(k, nu)
            den = float(np.max(np.abs(a))) or 1.0
            worst = max(worst, float(np.max(np.abs(a - b))) / den)
        deviations.append(worst)
    dump_rows = []
    dump_order = min(int(cfg.tree_order), int(cfg.K))
    for t in enumerate_trees(dump_order, None, list(cfg.f.terms.keys()),
                             cap=int(cfg.tree_cap)):
        if t.momentum == ZERO_MODE:
            continue
        labels = ";".join(sub.mode.label() for _, sub in t.nodes())
        moms, divs, scales = [], [], []
        for addr, sub in t.nodes():
            x = cfg.omega.dot(sub.momentum)
            moms.append(sub.momentum.label())
            divs.append(reports.fmt(x))
            scales.append(str(scale_of(x, beta, ms)))
        val = tree_value(t, cfg.f, cfg.omega, beta, ms, cfg.window).vector
        dump_rows.append((dump_order, t.shape(), labels, ";".join(moms),
                          ";".join(divs), ";".join(scales),
                          reports.fmt(float(np.max(np.abs(val))))))
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_csv(cfg.out / "trees.csv",
                      ["k", "shape", "labels", "line_momenta", "line_divisors",
                       "line_scales", "value_sup"], dump_rows, cfg.echo)
    reports.write_json(cfg.out / "trees.json", {
        "config": cfg.echo,
        "per_order_deviation": deviations,
        "trees_enumerated": engine.count,
    })
    reports.trees_figure(cfg.out / "trees.png",
                         list(range(1, len(deviations) + 1)),
                         [len(engine.coefficients(k)) for k in
                          range(1, len(deviations) + 1)])
    print(f"trees: max deviation vs recursion {max(deviations):.3e} "
          f"({engine.count} trees)")
    return EXIT_OK


def cmd_cancel(cfg: RunConfig) -> int:
    beta, ms = _beta(cfg)
    rows = cancellation_report(int(cfg.k_max), cfg.f, cfg.omega, beta, ms,
                               cfg.window, cap=int(cfg.tree_cap))
    table = [(r.k, r.n, r.norm_m0, r.norm_dm0, r.raw_scale, r.ratio0, r.ratio1,
              r.remainder_x, r.remainder_norm) for r in rows]
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_csv(cfg.out / "cancel.csv",
                      ["k", "n", "norm_M0", "norm_dM0", "raw_scale", "ratio0",
                       "ratio1", "remainder_x", "remainder_norm"],
                      table, cfg.echo)
    reports.cancel_figure(cfg.out / "cancel.png",
                          [f"({r.k},{r.n})" for r in rows],
                          [r.ratio0 for r in rows], [r.ratio1 for r in rows])
    worst0 = max((r.ratio0 for r in rows), default=0.0)
    worst1 = max((r.ratio1 for r in rows), default=0.0)
    print(f"cancel: worst ratios {worst0:.3e} (value) {worst1:.3e} (derivative)")
    return EXIT_OK


def _thresholds_payload(cfg: RunConfig, sol: SeriesSolution) -> dict:
    th = threshold_estimates(cfg.f, cfg.omega, cfg.weights, float(cfg.s),
                             float(cfg.s2), sol.beta, sol.ms, cfg.dioph,
                             c0=float(cfg.c0),
                             scaled_gammas=tuple(float(g) for g in cfg.scaled_gammas))
    return {
        "c0": th.c0, "c1": th.c1, "f_norm": th.f_norm, "n0": th.n0,
        "beta_n0": th.beta_n0, "C0": th.big_c0, "C0_prime": th.big_c0_prime,
        "eps1_bar": th.eps1_bar, "eps2_bar": th.eps2_bar,
        "tail_remainder_bound": th.tail_remainder_bound,
        "scaled": [{
            "gamma": s.gamma, "n0_plain": s.n0_plain, "eps1_plain": s.eps1_plain,
            "n0_scaled": s.n0_scaled, "eps1_scaled": s.eps1_scaled,
            "eps2_scaled": s.eps2_scaled,
        } for s in th.scaled],
    }


def cmd_synthesize(cfg: RunConfig) -> int:
    sol = _synthesize(cfg, float(cfg.eps[0]))
    eps_hat = empirical_radius(sol) if sol.depth >= 4 else math.nan
    payload = {
        "config": cfg.echo,
        "epsilon": sol.eps,
        "K": sol.depth,
        "engine": sol.engine,
        "per_order_norms": sol.per_order_norms,
        "epsilon_hat": None if math.isnan(eps_hat) else eps_hat,
        "thresholds": _thresholds_payload(cfg, sol),
    }
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_json(cfg.out / "synthesize.json", payload)
    reports.write_csv(cfg.out / "coeffs.csv", ["k", "mode", "j", "re", "im"],
                      _coeff_rows(sol), cfg.echo)
    reports.norms_figure(cfg.out / "synthesize.png",
                         list(range(1, sol.depth + 1)), sol.per_order_norms,
                         sol.kernel_residuals or None)
    print(f"synthesize: K={sol.depth} engine={sol.engine} "
          f"eps_hat={eps_hat:.3e} eps1_bar={payload['thresholds']['eps1_bar']:.3e}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    sol = _synthesize(cfg, float(cfg.eps[0]), engine="recursion")
    result = validate_torus(sol, float(cfg.dt), float(cfg.T), int(cfg.stride))
    rows = [(float(t), float(e)) for t, e in zip(result.times, result.errors)]
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_csv(cfg.out / "validate.csv", ["t", "torus_error"], rows, cfg.echo)
    reports.write_json(cfg.out / "validate.json", {
        "config": cfg.echo,
        "sup_error": result.sup_error,
        "energy_drift": result.energy_drift,
    })
    reports.validate_figure(cfg.out / "validate.png",
                            [r[0] for r in rows], [r[1] for r in rows])
    print(f"validate: sup torus error {result.sup_error:.3e}, "
          f"energy drift {result.energy_drift:.3e}")
    return EXIT_OK


def cmd_thresholds(cfg: RunConfig) -> int:
    sol = _synthesize(cfg, float(cfg.eps[0]), depth=max(4, int(cfg.K)))
    payload = {"config": cfg.echo, **_thresholds_payload(cfg, sol)}
    eps_hat = empirical_radius(sol)
    payload["epsilon_hat"] = None if math.isnan(eps_hat) else eps_hat
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_json(cfg.out / "thresholds.json", payload)
    if payload["scaled"]:
        reports.thresholds_figure(cfg.out / "thresholds.png",
                                  [s["gamma"] for s in payload["scaled"]],
                                  [s["eps1_plain"] for s in payload["scaled"]],
                                  [s["eps1_scaled"] for s in payload["scaled"]])
    print(f"thresholds: n0={payload['n0']} eps1_bar={payload['eps1_bar']:.3e} "
          f"eps2_bar={payload['eps2_bar']:.3e}")
    return EXIT_OK


def cmd_all(cfg: RunConfig) -> int:
    checks: list[tuple[str, bool, str]] = []
    beta, ms = _beta(cfg)

    # scale machinery: halving and partition of unity
    halving = all(2.0 * beta(ms[n + 1]) <= beta(ms[n]) for n in range(ms.n_max))
    xs = [0.3 * beta(ms[n]) for n in range(ms.n_max + 1)]
    partition = all(
        sum(1 for n in range(ms.n_max + 1)
            if propagator(x, n, beta, ms) != 0.0) == 1
        and abs(sum(propagator(x, n, beta, ms)
                    for n in range(ms.n_max + 1)) * x * x - 1.0) < 1e-12
        for x in xs)
    checks.append(("scale_halving", halving, f"scales={list(ms.values)}"))
    checks.append(("partition_of_unity", partition, f"{len(xs)} probes"))

    # kernel residuals
    sol = _synthesize(cfg, float(cfg.eps[0]), engine="recursion")
    worst_kernel = max(sol.kernel_residuals)
    checks.append(("kernel_identity", worst_kernel <= 1e-12,
                   f"worst {worst_kernel:.2e}"))

    # tree expansion agreement at low order
    engine = TreeEngine(cfg.f, cfg.omega, beta, ms, cfg.window,
                        cap=int(cfg.tree_cap))
    worst_dev = 0.0
    for k in range(1, min(int(cfg.K), 4) + 1):
        series = sol.coefficients.order(k)
        for nu in series.support():
            a = series.coefficient(nu)
            b = engine.coefficient(k, nu)
            den = float(np.max(np.abs(a))) or 1.0
            worst_dev = max(worst_dev, float(np.max(np.abs(a - b))) / den)
    checks.append(("tree_oracle_agreement", worst_dev <= 1e-10,
                   f"worst {worst_dev:.2e}"))

    # cancellations
    rows = cancellation_report(min(int(cfg.k_max), 3), cfg.f, cfg.omega, beta,
                               ms, cfg.window, cap=int(cfg.tree_cap))
    worst0 = max((r.ratio0 for r in rows), default=0.0)
    worst1 = max((r.ratio1 for r in rows), default=0.0)
    checks.append(("self_energy_value_cancellation", worst0 <= 1e-10,
                   f"worst {worst0:.2e}"))
    checks.append(("self_energy_derivative_cancellation", worst1 <= 1e-9,
                   f"worst {worst1:.2e}"))

    # residual scaling order
    eps = float(cfg.eps[0])
    r1 = residual_spectrum(_synthesize(cfg, eps)).sup_coefficient()
    r2 = residual_spectrum(_synthesize(cfg, 2.0 * eps)).sup_coefficient()
    ratio = r2 / r1 if r1 > 0 else math.inf
    checks.append(("residual_order", ratio >= 2.0 ** (int(cfg.K) + 0.5),
                   f"ratio {ratio:.1f}"))

    # trajectory validation
    result = validate_torus(sol, float(cfg.dt), float(cfg.T), int(cfg.stride))
    checks.append(("ode_validation", result.sup_error <= 1e-6,
                   f"sup {result.sup_error:.2e}"))

    # thresholds and empirical radius
    radius_sol = sol if sol.depth >= 4 else _synthesize(cfg, eps, depth=4)
    eps_hat = empirical_radius(radius_sol)
    th = _thresholds_payload(cfg, sol)
    checks.append(("radius_above_threshold",
                   (not math.isnan(eps_hat)) and eps_hat >= th["eps1_bar"],
                   f"eps_hat {eps_hat:.2e} vs {th['eps1_bar']:.2e}"))
    if len(th["scaled"]) >= 2:
        lg = np.log([s["gamma"] for s in th["scaled"]])
        lr = np.log([s["eps1_scaled"] / s["eps1_plain"] for s in th["scaled"]])
        slope = float(np.polyfit(lg, lr, 1)[0])
        checks.append(("gamma_squared_trend", abs(slope + 2.0) <= 0.2,
                       f"slope {slope:.3f}"))

    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_json(cfg.out / "all.json", {
        "config": cfg.echo,
        "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in checks],
    })
    failed = [n for n, ok, _ in checks if not ok]
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if failed:
        raise AcceptanceFailure(f"failed checks: {', '.join(failed)}")
    return EXIT_OK


HANDLERS = {
    "betaseq": cmd_betaseq,
    "bryuno": cmd_bryuno,
    "dioph": cmd_dioph,
    "measure": cmd_measure,
    "expand": cmd_expand,
    "trees": cmd_trees,
    "cancel": cmd_cancel,
    "synthesize": cmd_synthesize,
    "validate": cmd_validate,
    "thresholds": cmd_thresholds,
    "all": cmd_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotor-tori",
        description="Perturbative invariant tori of weakly coupled rotators")
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--m-max", dest="m_max", type=int)
    parser.add_argument("-K", "--depth", dest="K", type=int)
    parser.add_argument("--eps", nargs="+", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--T", type=float)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--budget", type=float, help="mode-norm budget N")
    parser.add_argument("--k-max", dest="k_max", type=int)
    parser.add_argument("--engine", choices=["recursion", "trees"])
    parser.add_argument("command", choices=sorted(HANDLERS))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResonanceError, TruncationError) as exc:
        print(f"resonance/truncation: {exc}", file=sys.stderr)
        return EXIT_RESONANCE
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except AcceptanceFailure as exc:
        print(f"acceptance failure: {exc}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
