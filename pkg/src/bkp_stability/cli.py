"""Command-line front end.

Option values resolve in increasing priority: built-in defaults, ``BKP_*``
environment variables, a ``--config`` file (flat ``key = value`` text or any
artifact written by this tool), explicit flags.

Exit status: 0 success, 2 invalid arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import artifacts, criteria, eigen, reduced, region
from .params import BlochSpec, DomainError, PhysicalParams, Sigma, VerdictKind
from .wave import NewtonFailure, newton_refine, stokes_wave

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
ENV_PREFIX = "BKP_"
SWEEP_AXES = ("b", "kappa", "k", "a", "ell", "xi")
SWEEP_TASKS = ("spectrum", "threshold", "band", "region")


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    pass


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _float_pair(v) -> Optional[Tuple[float, float]]:
    if v is None or v == "":
        return None
    if isinstance(v, str):
        parts = v.replace(",", " ").split()
    else:
        parts = list(v)
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {v!r}")
    return (float(parts[0]), float(parts[1]))


def _str_list(v) -> List[str]:
    if v is None or v == "":
        return []
    if isinstance(v, str):
        return [s for s in v.replace(";", " ").split() if s]
    return [str(s) for s in v]


def _opt_float(v):
    return None if v is None or v == "" or v == "None" else float(v)


def _opt_int(v):
    return None if v is None or v == "" or v == "None" else int(v)


# name -> (converter, default). Every entry is a flag ``--name`` (underscores as dashes).
OPTIONS: Dict[str, Tuple[Callable[[Any], Any], Any]] = {
    "b": (_opt_float, None),
    "kappa": (float, 2.0),
    "k": (float, 1.0),
    "a": (float, 0.0),
    "sigma": (int, -1),
    "ell": (float, 0.0),
    "xi": (float, 0.0),
    "modes": (int, 32),
    "tol": (float, 1e-12),
    "growth_tol": (_opt_float, None),
    "conv_tol": (float, 1e-10),
    "format": (str, "json"),
    "workers": (_opt_int, None),
    "seed": (int, 0),
    "verify": (int, 0),
    "timing": (_bool, False),
    "bracket": (_float_pair, None),
    "ell_sq_min": (_opt_float, None),
    "ell_sq_max": (_opt_float, None),
    "steps": (int, eigen.DEFAULT_BAND_STEPS),
    "mode": (str, "periodic"),
    "b_min": (float, -4.0),
    "b_max": (float, 6.0),
    "k2_min": (float, 0.0),
    "k2_max": (float, 10.0),
    "nb": (int, 200),
    "nk": (int, 200),
    "axis": (_str_list, []),
    "task": (str, "spectrum"),
}
# options that locate inputs/outputs and are not part of a run's identity
NOT_RECORDED = ("workers",)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--b", type=float, help="family parameter b (b != -1)")
    g.add_argument("--kappa", type=float, help="dispersion constant kappa > 0 (default 2)")
    g.add_argument("--k", type=float, help="longitudinal wave number k > 0 (default 1)")
    g.add_argument("--a", type=float, help="wave amplitude (default 0)")
    g.add_argument("--sigma", type=int, choices=(-1, 1), help="transverse sign (default -1)")
    g.add_argument("--ell", type=float, help="transverse wave number (default 0)")
    g.add_argument("--xi", type=float, help="Floquet exponent in (-1/2, 1/2] (default 0)")
    n = common.add_argument_group("numerics")
    n.add_argument("--modes", type=int, help="Fourier truncation N (default 32)")
    n.add_argument("--tol", type=float, help="Newton residual tolerance (default 1e-12)")
    n.add_argument("--growth-tol", type=float, help="instability threshold on Re(lambda)")
    n.add_argument("--conv-tol", type=float, help="truncation-convergence tolerance (default 1e-10)")
    o = common.add_argument_group("output")
    o.add_argument("--out", help="output file (default stdout)")
    o.add_argument("--format", choices=("json", "csv", "svg"), help="artifact format (default json)")
    o.add_argument("--workers", type=int, help="worker processes for sweeps (default: CPU count)")
    o.add_argument("--seed", type=int, help="seed for sampled verification (default 0)")
    o.add_argument("--verify", type=int, help="eigen-validate this many random region cells")
    o.add_argument("--timing", action="store_const", const=True, help="record runtime_ms (breaks byte-identical output)")
    o.add_argument("--config", help="key = value file, or an artifact to re-run")

    parser = argparse.ArgumentParser(prog="bkp-stability", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("wave", parents=[common], help="Stokes and Newton-refined wave")
    sub.add_parser("spectrum", parents=[common], help="Bloch spectrum at one (ell, xi)")
    p_th = sub.add_parser("threshold", parents=[common], help="bisect the transverse threshold in ell^2")
    p_th.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"), help="ell^2 bracket")
    p_band = sub.add_parser("band", parents=[common], help="locate the instability band in ell^2")
    p_band.add_argument("--ell-sq-min", type=float)
    p_band.add_argument("--ell-sq-max", type=float)
    p_band.add_argument("--steps", type=int, help="grid points before edge refinement")
    p_reg = sub.add_parser("region", parents=[common], help="closed-form stability map over (b, k^2)")
    _region_args(p_reg)
    p_sw = sub.add_parser("sweep", parents=[common], help="run a task over a parameter grid")
    p_sw.add_argument("--axis", action="append", metavar="NAME=LO:HI:STEPS", help=f"one of {', '.join(SWEEP_AXES)}")
    p_sw.add_argument("--task", choices=SWEEP_TASKS)
    p_sw.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    p_sw.add_argument("--steps", type=int)
    _region_args(p_sw)
    return parser


def _region_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("periodic", "bloch"))
    p.add_argument("--b-min", type=float)
    p.add_argument("--b-max", type=float)
    p.add_argument("--k2-min", type=float)
    p.add_argument("--k2-max", type=float)
    p.add_argument("--nb", type=int, help="cells along b (default 200)")
    p.add_argument("--nk", type=int, help="cells along k^2 (default 200)")


def resolve(args: argparse.Namespace, environ: Optional[dict] = None) -> dict:
    environ = os.environ if environ is None else environ
    values = {}
    for name, (conv, default) in OPTIONS.items():
        values[name] = default
    for name, (conv, _) in OPTIONS.items():
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _convert(name, conv, raw, "environment")
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = artifacts.load_config(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        for key, raw in file_cfg.items():
            key = key.replace("-", "_")
            if key not in OPTIONS:
                raise UsageError(f"unknown config key {key!r}")
            values[key] = _convert(key, OPTIONS[key][0], raw, "config")
    for name, (conv, _) in OPTIONS.items():
        raw = getattr(args, name, None)
        if raw is not None:
            values[name] = _convert(name, conv, raw, "flag")
    if values["workers"] is None:
        values["workers"] = os.cpu_count() or 1
    return values


def _convert(name, conv, raw, where):
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid {where} value for {name}: {raw!r} ({exc})") from exc


def recorded(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k not in NOT_RECORDED}


# ---------------------------------------------------------------------------
# helpers


def _params(cfg: dict) -> PhysicalParams:
    if cfg["b"] is None:
        raise UsageError("--b is required")
    return PhysicalParams(cfg["b"], cfg["kappa"], cfg["k"], Sigma(cfg["sigma"]))


def _spec(cfg: dict) -> BlochSpec:
    return BlochSpec(cfg["ell"], cfg["xi"], cfg["modes"])


def _wave(cfg: dict, p: PhysicalParams):
    return newton_refine(stokes_wave(p, cfg["a"]), p, cfg["modes"], cfg["tol"])


def _closed_form(p: PhysicalParams, a: float, xi: float):
    xf, _ = criteria.fold_xi(xi)
    if xf == 0:
        return criteria.classify_periodic(p, a)
    return criteria.classify_bloch(xf, p)


def _reduced(p: PhysicalParams, a: float, spec: BlochSpec):
    xf, _ = criteria.fold_xi(spec.xi)
    if xf == 0:
        return reduced.lambda_periodic(p, a, spec.ell_sq)
    if p.sigma != Sigma.MINUS_ONE:
        return None
    eps = spec.ell_sq - criteria.ell_thresholds(xf, p).ellc_sq
    return reduced.lambda_bloch(p, a, eps, xf)


# ---------------------------------------------------------------------------
# commands; each returns (payload dict, csv columns, csv rows, status)


def cmd_wave(cfg: dict):
    p = _params(cfg)
    s = stokes_wave(p, cfg["a"])
    r = newton_refine(s, p, cfg["modes"], cfg["tol"])
    payload = {
        "stokes": s.as_dict(),
        "refined": r.as_dict(),
        "amplitude_cap": s.amplitude_cap,
        "amplitude_cap_note": "asymptotic validity radius in a is a tool choice",
    }
    rows = [(j, s.cos_coeffs.get(j, 0.0), float(r.cos_coeffs[j])) for j in range(r.n_modes + 1)]
    return payload, ("j", "stokes", "refined"), rows, EXIT_OK


def cmd_spectrum(cfg: dict):
    p, spec = _params(cfg), _spec(cfg)
    w = _wave(cfg, p)
    res = eigen.spectrum(w, spec, p)
    verdict = eigen.classify(res, cfg["growth_tol"])
    conv = eigen.convergence_check(w, spec, p)
    status = EXIT_OK
    notes = []
    if verdict.kind == VerdictKind.UNCERTIFIED:
        status = EXIT_NUMERIC
        notes.append(verdict.case_label)
    if not conv <= cfg["conv_tol"]:
        status = EXIT_NUMERIC
        notes.append(f"truncation not converged: {conv!r} > {cfg['conv_tol']!r}")
    red = _reduced(p, cfg["a"], spec)
    payload = {
        "spectrum": res.as_dict(),
        "verdict": verdict.as_dict(),
        "closed_form": _closed_form(p, cfg["a"], spec.xi).as_dict(),
        "convergence": conv,
        "reduced": red.as_dict() if red else None,
        "notes": notes,
    }
    near = set(map(complex, res.near_origin))
    rows = [(i, z.real, z.imag, int(complex(z) in near)) for i, z in enumerate(res.eigenvalues)]
    return payload, ("index", "re", "im", "near_origin"), rows, status


def cmd_threshold(cfg: dict):
    p, spec = _params(cfg), _spec(cfg)
    w = _wave(cfg, p)
    try:
        th = eigen.threshold_bisect(cfg["a"], p, spec, cfg["bracket"], None, cfg["growth_tol"], w)
    except eigen.ThresholdError as exc:
        raise NumericFailure(str(exc)) from exc
    conv = max(eigen.convergence_check(w, spec.with_ell(math.sqrt(x)), p) for x in th.bracket_outer)
    status = EXIT_OK if conv <= cfg["conv_tol"] else EXIT_NUMERIC
    payload = {
        "threshold": th.as_dict(),
        "closed_form": _closed_form(p, cfg["a"], spec.xi).as_dict(),
        "convergence": conv,
    }
    row = (th.ell_star_sq, th.prediction, th.bracket[0], th.bracket[1], th.iterations, conv)
    return payload, ("ell_star_sq", "prediction", "lower", "upper", "iterations", "convergence"), [row], status


def cmd_band(cfg: dict):
    p = _params(cfg)
    rng = None
    if cfg["ell_sq_min"] is not None or cfg["ell_sq_max"] is not None:
        if cfg["ell_sq_min"] is None or cfg["ell_sq_max"] is None:
            raise UsageError("give both --ell-sq-min and --ell-sq-max")
        rng = (cfg["ell_sq_min"], cfg["ell_sq_max"])
    w = _wave(cfg, p)
    band = eigen.band_scan(p, cfg["a"], cfg["xi"], rng, cfg["steps"], cfg["modes"], None, cfg["growth_tol"], w)
    probe = band.center if band.found else 0.5 * (band.ell_sq_grid[0] + band.ell_sq_grid[-1])
    conv = eigen.convergence_check(w, BlochSpec(math.sqrt(probe), cfg["xi"], cfg["modes"]), p)
    status = EXIT_OK if conv <= cfg["conv_tol"] else EXIT_NUMERIC
    payload = {
        "band": band.as_dict(),
        "found": band.found,
        "closed_form": _closed_form(p, cfg["a"], cfg["xi"]).as_dict(),
        "convergence": conv,
    }
    rows = [(lo, hi) for lo, hi in band.intervals]
    return payload, ("lower", "upper"), rows, status


def _grid_from(cfg: dict) -> region.RegionGrid:
    xi = cfg["xi"] if cfg["mode"] == "bloch" else None
    if xi is not None and not (0 < xi <= 0.5):
        raise UsageError("bloch region maps need --xi in (0, 1/2]")
    return region.region_grid(
        cfg["mode"],
        Sigma(cfg["sigma"]),
        (cfg["b_min"], cfg["b_max"]),
        (cfg["k2_min"], cfg["k2_max"]),
        (cfg["nb"], cfg["nk"]),
        xi,
        cfg["kappa"],
    )


def cmd_region(cfg: dict):
    try:
        grid = _grid_from(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    checks = region.verify_cells(grid, cfg["verify"], cfg["seed"], cfg["a"] or 0.01, cfg["kappa"], cfg["modes"]) if cfg["verify"] else []
    rows = []
    for i, b in enumerate(grid.b_values):
        for j, k2 in enumerate(grid.k2_values):
            v = grid.verdicts[i][j]
            rows.append((float(b), float(k2), v.kind.value, v.case_label, v.witness))
    payload = {
        "mode": grid.mode,
        "sigma": int(grid.sigma),
        "xi": grid.xi,
        "b_values": grid.b_values,
        "k2_values": grid.k2_values,
        "verdicts": [[v.kind.value for v in row] for row in grid.verdicts],
        "case_labels": sorted({v.case_label for row in grid.verdicts for v in row}),
        "verification": checks,
    }
    status = EXIT_OK
    if checks and not all(c["agree"] for c in checks):
        payload["verification_note"] = "some sampled cells disagree; see entries with agree=false"
    return payload, ("b", "k2", "verdict", "case_label", "witness"), rows, status, grid


# ---------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = (
    "verdict",
    "case_label",
    "witness",
    "max_real",
    "ell_star_sq",
    "band_lower",
    "band_upper",
    "runtime_ms",
)


def parse_axis(text: str) -> Tuple[str, np.ndarray]:
    try:
        name, rng = text.split("=", 1)
        lo, hi, steps = rng.split(":")
        name = name.strip().replace("-", "_")
        steps = int(steps)
        lo, hi = float(lo), float(hi)
    except ValueError as exc:
        raise UsageError(f"axis must look like NAME=LO:HI:STEPS, got {text!r}") from exc
    if name not in SWEEP_AXES:
        raise UsageError(f"axis name must be one of {SWEEP_AXES}, got {name!r}")
    if steps < 1:
        raise UsageError("axis needs at least one step")
    return name, np.linspace(lo, hi, steps)


def sweep_cell(job: Tuple[dict, str, bool]) -> dict:
    """One sweep task; top-level so it can run in a worker process."""
    cfg, task, timing = job
    t0 = time.perf_counter()
    row: Dict[str, Any] = {c: None for c in SWEEP_COLUMNS}
    try:
        p = _params(cfg)
        if task == "region":
            v = _closed_form(p, cfg["a"] or 1.0, cfg["xi"])
            row.update(verdict=v.kind.value, case_label=v.case_label, witness=v.witness)
        else:
            w = _wave(cfg, p)
            spec = _spec(cfg)
            if task == "spectrum":
                res = eigen.spectrum(w, spec, p)
                v = eigen.classify(res, cfg["growth_tol"])
                row.update(verdict=v.kind.value, case_label=v.case_label, witness=v.witness, max_real=res.max_real)
            elif task == "threshold":
                th = eigen.threshold_bisect(cfg["a"], p, spec, cfg["bracket"], None, cfg["growth_tol"], w)
                v = _closed_form(p, cfg["a"], cfg["xi"])
                row.update(verdict=v.kind.value, case_label=v.case_label, witness=th.prediction, ell_star_sq=th.ell_star_sq)
            else:
                band = eigen.band_scan(p, cfg["a"], cfg["xi"], None, cfg["steps"], cfg["modes"], None, cfg["growth_tol"], w)
                v = _closed_form(p, cfg["a"], cfg["xi"])
                row.update(verdict=v.kind.value, case_label=v.case_label, witness=v.witness, max_real=float(np.max(band.max_real)))
                if band.found:
                    row.update(band_lower=band.primary[0], band_upper=band.primary[1])
    except Exception as exc:  # a failed cell is reported in its row, the sweep continues
        row.update(verdict="FAILED", case_label=f"{type(exc).__name__}: {exc}")
    if timing:
        row["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    return row


def cmd_sweep(cfg: dict):
    axes = [parse_axis(a) for a in cfg["axis"]]
    names = [n for n, _ in axes]
    if len(set(names)) != len(names):
        raise UsageError("duplicate sweep axis")
    if cfg["task"] not in SWEEP_TASKS:
        raise UsageError(f"task must be one of {SWEEP_TASKS}")
    points = list(itertools.product(*(vals for _, vals in axes))) if axes else [()]
    jobs = []
    for point in points:
        cell = dict(cfg)
        cell.update({n: float(v) for n, v in zip(names, point)})
        jobs.append((cell, cfg["task"], cfg["timing"]))
    if cfg["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            results = list(pool.map(sweep_cell, jobs))  # map keeps input order
    else:
        results = [sweep_cell(j) for j in jobs]
    columns = tuple(names) + SWEEP_COLUMNS
    rows = [tuple(float(v) for v in point) + tuple(r[c] for c in SWEEP_COLUMNS) for point, r in zip(points, results)]
    payload = {"task": cfg["task"], "columns": list(columns), "rows": [list(r) for r in rows]}
    status = EXIT_NUMERIC if any(r["verdict"] == "FAILED" for r in results) else EXIT_OK
    return payload, columns, rows, status


# ---------------------------------------------------------------------------


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None, environ: Optional[dict] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args, environ)
        fmt = cfg["format"]
        if fmt not in ("json", "csv", "svg"):
            raise UsageError(f"unknown format {fmt!r}")
        if fmt == "svg" and args.command != "region":
            raise UsageError("svg output is only available for region maps")
        t0 = time.perf_counter()
        command = args.command
        handler = {
            "wave": cmd_wave,
            "spectrum": cmd_spectrum,
            "threshold": cmd_threshold,
            "band": cmd_band,
            "region": cmd_region,
            "sweep": cmd_sweep,
        }[command]
        result = handler(cfg)
        grid = result[4] if command == "region" else None
        payload, columns, rows, status = result[:4]
        prov = artifacts.provenance(command, recorded(cfg))
        if cfg["timing"]:
            payload["runtime_ms"] = (time.perf_counter() - t0) * 1e3
        payload["provenance"] = prov
        if fmt == "json":
            text = artifacts.dumps_json(payload)
        elif fmt == "csv":
            if cfg["timing"] and "runtime_ms" not in columns:
                columns = tuple(columns) + ("runtime_ms",)
                rows = [tuple(r) + (payload["runtime_ms"],) for r in rows]
            text = artifacts.dumps_csv(prov, columns, rows)
        else:
            text = region.render_svg(grid, artifacts.svg_metadata(prov))
        _emit(text, args.out)
        return status
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailure, NewtonFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))
