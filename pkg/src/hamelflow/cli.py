"""Batch front end: config parsing, run orchestration, artifact emission.

Artifacts per run: per-mode radial profiles as CSV (`r, re, im`), a
machine-readable JSON summary, and plot-ready decay data for |u - V|.
Identical config and seed produce byte-identical summaries.

Exit codes: 0 success, 2 invalid configuration, 3 the fixed-point
iteration left the contraction regime or hit its step limit (diagnostics
are still written), 1 unexpected I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .background import HamelParameters
from .errors import AdmissibilityError, ContractionError, IterationError, TailError
from .forcing import FAMILIES, build_family
from .grid import RadialGrid
from .nonlinear import (
    PicardDiagnostics,
    compute_lambda,
    default_threads,
    picard_iterate,
    reconstruct_u,
    x_norm,
)
from .profiles import l1_weighted_norm
from .verification import fit_decay, make_test_suite, weak_ns_residual

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONTRACTION = 3


@dataclass
class RunConfig:
    alpha: float = 0.0
    gamma: float = 3.0
    rho: float = 2.5
    mode_cutoff: int = 2
    panels: int = 64
    gauss_order: int = 8
    r_max: float = 1.0e3
    max_iter: int = 50
    tol: float = 1.0e-10
    family: str = "power"
    epsilon: float = 1.0e-3
    coefficients: dict = field(default_factory=lambda: {0: 1.0, 1: 1.0})
    seed: int = 0
    output_dir: str = "out"
    threads: int | None = None
    family_options: dict = field(default_factory=dict)

    def validate(self) -> HamelParameters:
        try:
            params = HamelParameters(self.alpha, self.gamma, self.rho)
        except AdmissibilityError as exc:
            raise AdmissibilityError(
                f"parameters outside Theorem hypotheses: {exc}") from exc
        if self.mode_cutoff < 0:
            raise AdmissibilityError(f"mode_cutoff={self.mode_cutoff} must be >= 0")
        if self.tol <= 0:
            raise AdmissibilityError(f"tol={self.tol} must be positive")
        if self.family not in FAMILIES:
            raise AdmissibilityError(
                f"unknown forcing family {self.family!r}; "
                f"available families: {', '.join(FAMILIES)}")
        return params


def _coerce_coefficients(raw) -> dict:
    return {int(k): complex(v).real if complex(v).imag == 0 else complex(v)
            for k, v in raw.items()}


def parse_config(argv=None) -> RunConfig:
    """Build a RunConfig from flags, optionally seeded by a JSON config file."""
    ap = argparse.ArgumentParser(
        prog="hamelflow",
        description="Steady exterior-cylinder flow solver: per-mode linear solves "
                    "plus fixed-point iteration around a swirling background.")
    ap.add_argument("--config", type=str, help="JSON file with RunConfig keys")
    for name, typ in (("alpha", float), ("gamma", float), ("rho", float),
                      ("mode-cutoff", int), ("panels", int), ("gauss-order", int),
                      ("r-max", float), ("max-iter", int), ("tol", float),
                      ("epsilon", float), ("seed", int), ("threads", int)):
        ap.add_argument(f"--{name}", type=typ, default=None)
    ap.add_argument("--family", type=str, default=None,
                    help=f"forcing family: {', '.join(FAMILIES)}")
    ap.add_argument("--coefficients", type=str, default=None,
                    help='JSON map of mode to coefficient, e.g. \'{"0": 1.0, "1": 0.5}\'')
    ap.add_argument("--output-dir", type=str, default=None)
    ns = ap.parse_args(argv)

    cfg = RunConfig()
    if ns.config:
        with open(ns.config) as fh:
            data = json.load(fh)
        forcing = data.pop("forcing", {})
        for key, value in data.items():
            if not hasattr(cfg, key):
                raise AdmissibilityError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
        if forcing:
            cfg.family = forcing.pop("family", cfg.family)
            cfg.epsilon = forcing.pop("epsilon", cfg.epsilon)
            if "coefficients" in forcing:
                cfg.coefficients = _coerce_coefficients(forcing.pop("coefficients"))
            cfg.family_options = forcing
    for attr, flag in (("alpha", "alpha"), ("gamma", "gamma"), ("rho", "rho"),
                       ("mode_cutoff", "mode_cutoff"), ("panels", "panels"),
                       ("gauss_order", "gauss_order"), ("r_max", "r_max"),
                       ("max_iter", "max_iter"), ("tol", "tol"),
                       ("epsilon", "epsilon"), ("seed", "seed"),
                       ("threads", "threads"), ("family", "family"),
                       ("output_dir", "output_dir")):
        value = getattr(ns, flag)
        if value is not None:
            setattr(cfg, attr, value)
    if ns.coefficients:
        cfg.coefficients = _coerce_coefficients(json.loads(ns.coefficients))
    cfg.coefficients = _coerce_coefficients(cfg.coefficients)
    return cfg


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)}")


def _write_profiles(out_dir: Path, fieldv):
    prof_dir = out_dir / "profiles"
    prof_dir.mkdir(parents=True, exist_ok=True)
    r = fieldv.grid.r_nodes
    for n in sorted(fieldv.modes):
        for tag, p in zip(("vr", "vt", "v3"), fieldv.modes[n]):
            lines = ["r,re,im"]
            for j in range(len(r)):
                lines.append(f"{r[j]:.17g},{p.values[j].real:.17g},{p.values[j].imag:.17g}")
            (prof_dir / f"mode_{n:+d}_{tag}.csv").write_text("\n".join(lines) + "\n")


def _write_decay(out_dir: Path, radii, amplitude):
    lines = ["r,amplitude"]
    for r, a in zip(radii, amplitude):
        lines.append(f"{r:.17g},{a:.17g}")
    (out_dir / "decay.csv").write_text("\n".join(lines) + "\n")


def run(config: RunConfig) -> int:
    """Execute one configured solve and write its artifacts."""
    try:
        params = config.validate()
        grid = RadialGrid.build(config.panels, config.gauss_order, config.r_max)
        forcing = build_family(config.family, grid, params, config.epsilon,
                               coefficients=config.coefficients, seed=config.seed,
                               cutoff=config.mode_cutoff, **config.family_options)
        forcing.validate(params)
    except (AdmissibilityError, TailError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = config.threads if config.threads is not None else default_threads()

    summary = {
        "config": {
            **{k: getattr(config, k) for k in
               ("alpha", "gamma", "rho", "mode_cutoff", "panels", "gauss_order",
                "r_max", "max_iter", "tol", "family", "epsilon", "seed")},
            "coefficients": {str(k): v for k, v in sorted(config.coefficients.items())},
        },
        "lambda_formula_c0_1": compute_lambda(params, 1.0),
    }

    try:
        fieldv, diag = picard_iterate(forcing, params, grid,
                                      max_iter=config.max_iter, tol=config.tol,
                                      threads=threads)
    except (ContractionError, IterationError) as exc:
        summary["picard"] = exc.diagnostics.as_dict() if exc.diagnostics else {}
        summary["error"] = str(exc)
        _dump_summary(out_dir, summary)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONTRACTION

    g_norm, f_norm = forcing.norms(params.rho)
    summary["picard"] = diag.as_dict()
    summary["forcing_norms"] = {"g_l1": g_norm, "F_l1": f_norm}
    summary["solution_norms"] = {
        "x_rho": x_norm(fieldv, params.rho),
        "value_l1": l1_weighted_norm(
            {n: fieldv.modes[n] for n in fieldv.modes}, params.rho - 1.0),
    }

    accessor = reconstruct_u(fieldv, params)
    amplitude = accessor.remainder_rms_nodes()
    _write_profiles(out_dir, fieldv)
    _write_decay(out_dir, grid.r_nodes, amplitude)

    if np.max(amplitude) > 0:
        window = (10.0, grid.r_max / 3.0)
        try:
            fit = fit_decay((grid.r_nodes, amplitude), window, grid=grid)
            summary["decay_fit"] = dataclasses.asdict(fit)
        except ValueError as exc:
            summary["decay_fit"] = {"error": str(exc)}
    else:
        summary["decay_fit"] = None

    suite_modes = tuple(sorted({min(m, config.mode_cutoff) for m in (0, 1, 2)}))
    suite = make_test_suite(grid, modes=suite_modes)
    summary["weak_residual"] = weak_ns_residual(fieldv, forcing, params, suite)["residual"]

    _dump_summary(out_dir, summary)
    return EXIT_OK


def _dump_summary(out_dir: Path, summary: dict):
    (out_dir / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=1, default=_json_default) + "\n")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        config = parse_config(argv)
    except (AdmissibilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
