"""Command-line experiments: ``tauberlab <command> [--config FILE] ...``.

Every run writes ``<command>.csv`` and ``<command>.json`` into ``--out``.
Exit status is 0 when every asserted inequality holds, 3 when one is
violated (the summary lists the offending CSV rows) and 2 on usage errors.

Randomness: one 64-bit ``--seed`` feeds a numpy ``SeedSequence``; each
subtask draws from its own PCG64 stream keyed by the subtask name, so adding
a subtask never shifts another's numbers.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

import mpmath as mp
import numpy as np

from . import __version__
from .laplace_tauber import CATALOGUE_IDS, catalogue, study_csv, tauber_convergence_study
from .oscillatory import rl_csv, verify_rl
from .pnt_experiments import mertens_profile, pnt_profile, psi_to_pi_scan
from .pvariation import PiecewiseFunction, p_variation, p_variation_bruteforce
from .reports import csv_text
from .semigroup import build_semigroup, convolution_identity_check, fit_density
from .zeta_boundary import DEFAULT_GAMMA, LEMMA_IDS, diagnostic_csv, lemma_diagnostic, lemma_grid

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 2, 3

DEFAULT_SEMIGROUP = {"generator": "classical", "x_max": 1e4}


class ConfigError(ValueError):
    pass


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for the subtask ``name``."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


def _pmap(fn: Callable, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def _get(cfg: dict, key: str, default, kind=None):
    value = cfg.get(key, default)
    if kind is not None:
        try:
            value = kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config field {key!r}: {exc}") from None
    return value


def _floats(values) -> list[float]:
    return [float(v) for v in values]


def _semigroup(cfg: dict):
    sg = cfg.get("semigroup", DEFAULT_SEMIGROUP)
    if not isinstance(sg, dict) or "generator" not in sg or "x_max" not in sg:
        raise ConfigError("semigroup needs 'generator' and 'x_max'")
    return build_semigroup(sg)


def _violations(command: str, flags) -> list[str]:
    # row 1 is the header, data rows start at 2
    return [f"{command}.csv:row {i + 2}" for i, bad in enumerate(flags) if bad]


def _random_step(rng, pieces: int) -> PiecewiseFunction:
    nodes = np.unique(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, pieces - 1)]))
    return PiecewiseFunction.step(nodes, rng.uniform(-1, 1, nodes.size - 1), (0.0, 1.0))


# --- commands -------------------------------------------------------------------


def cmd_pvar(cfg, seed, tol, threads):
    ps = _floats(cfg.get("p", [1, 1.5, 2, 3]))
    if "functions" in cfg:
        fs = [PiecewiseFunction.from_json(json.dumps(f)) for f in cfg["functions"]]
    else:
        rng = stream(seed, "pvar")
        n, nodes = _get(cfg, "n_functions", 20, int), _get(cfg, "nodes", 10, int)
        fs = []
        for _ in range(n):
            x = np.unique(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, nodes - 2)]))
            fs.append(PiecewiseFunction.linear(x, rng.uniform(-1, 1, x.size)))

    def one(item):
        i, f = item
        out = []
        for p in ps:
            dp = p_variation(f, p).value
            bf = p_variation_bruteforce(f, p) if f.value_sequence().size <= 12 else math.nan
            out.append((i, p, dp, bf, abs(dp - bf) if bf == bf else math.nan))
        return out

    rows = [r for chunk in _pmap(one, list(enumerate(fs)), threads) for r in chunk]
    tol = 1e-12 if tol is None else tol
    bad = [r[4] > tol for r in rows]
    text = csv_text(["f_id", "p", "value", "bruteforce", "deviation"], rows)
    devs = [r[4] for r in rows if r[4] == r[4]]
    return text, {"functions": len(fs), "max_deviation": max(devs, default=0.0)}, bad


def cmd_rl_check(cfg, seed, tol, threads):
    rng = stream(seed, "rl-check")
    n, pieces = _get(cfg, "n_functions", 100, int), _get(cfg, "max_pieces", 50, int)
    xs = _floats(cfg.get("x", [0.5] + [2.0**j for j in range(15)]))
    ps = _floats(cfg.get("p", [1, 2, 3]))
    fs = {str(i): _random_step(rng, int(rng.integers(1, pieces + 1))) for i in range(n)}
    slack = 1e-9 if tol is None else tol
    reports = [r for chunk in _pmap(lambda p: verify_rl(fs, xs, p, slack), ps, threads) for r in chunk]
    summary = {"records": len(reports), "max_ratio": max(r.ratio for r in reports), "slack": slack}
    return rl_csv(reports), summary, [r.tags["violated"] for r in reports]


def cmd_tauber(cfg, seed, tol, threads):
    signal = _get(cfg, "signal", "exp_linear")
    if signal not in CATALOGUE_IDS:
        raise ConfigError(f"signal must be one of {', '.join(CATALOGUE_IDS)}")
    study = tauber_convergence_study(
        catalogue(signal), _get(cfg, "p", 1.0, float), _get(cfg, "k", 0.25, float),
        cfg.get("R_rule", 0.5), _floats(cfg.get("T_grid", [10, 100, 1000])),
        implied_constant=cfg.get("implied_constant"),
    )
    slack = 1e-9 if tol is None else tol
    summary = {"signal": signal, "fitted_constant": study.fitted_constant, "decreasing": study.decreasing,
               "flags": list(study.flags)}
    return study_csv(study), summary, [r.violated(slack) for r in study.reports]


def cmd_semigroup_build(cfg, seed, tol, threads):
    table = _semigroup(cfg)
    xs = np.geomspace(1, table.x_max, 200)
    ok = np.abs(table.M_many(xs)) <= table.N_many(xs)
    summary = {"records": len(table), "primes": len(table.primes), "N": table.N(table.x_max),
               "pi": table.pi(table.x_max), "psi": table.psi(table.x_max), "M": table.M(table.x_max)}
    if table.x_max >= 1e3:
        fit = fit_density(table)
        summary["density"] = {"A": fit.A, "gamma": fit.gamma, "flag": fit.flag}
    bad = [False] * len(table)
    if not ok.all():
        bad[0] = True
    return table.to_csv(), summary, bad


def cmd_zeta_scan(cfg, seed, tol, threads):
    table = _semigroup(cfg)
    ids = cfg.get("lemmas", list(LEMMA_IDS))
    unknown = set(ids) - set(LEMMA_IDS)
    if unknown:
        raise ConfigError(f"unknown lemma ids {sorted(unknown)}")
    gammas = {**DEFAULT_GAMMA, **cfg.get("gamma", {})}
    level = _get(cfg, "level", 0, int)
    diags = _pmap(lambda i: lemma_diagnostic(table, i, lemma_grid(i, level), gammas[i]), ids, threads)
    summary = {"fitted_constants": {d.lemma_id: d.fitted_constant for d in diags},
               "tail_flags": {d.lemma_id: int(np.sum(d.tail_flags)) for d in diags}}
    bad = []
    for d in diags:
        bad.extend([not d.finite] + [False] * (len(d.grid) - 1))
    return diagnostic_csv(diags), summary, bad


def _profile_command(kind):
    def run(cfg, seed, tol, threads):
        table = _semigroup(cfg)
        gamma = _get(cfg, "gamma", 3.0, float)
        points = _get(cfg, "points", 40, int)
        prof = (pnt_profile if kind == "pnt" else mertens_profile)(table, gamma, points=points)
        summary = prof.summary()
        bad = [False] * prof.x_grid.size
        if kind == "pnt":
            xs = [10.0**j for j in range(2, 20) if 10.0**j <= table.x_max]
            chain = psi_to_pi_scan(table, xs)
            summary["chain"] = {"x": xs, "C": [r.tags["C"] for r in chain],
                                "C_measured": [r.tags["C_measured"] for r in chain]}
            if not all(r.tags["chain_holds"] and not r.violated() for r in chain):
                summary["chain_violation"] = True
                bad[-1] = True
        else:
            ok = np.abs(prof.count) <= table.N_many(prof.x_grid)
            bad = [not v for v in ok]
        return prof.to_csv(), summary, bad
    return run


def cmd_identities(cfg, seed, tol, threads):
    table = _semigroup(cfg)
    tol = 1e-9 if tol is None else tol
    which = cfg.get("which", ["lambda_log", "mu_unit"])
    reports = _pmap(lambda w: convolution_identity_check(table, w, tolerance=tol), which, threads)
    text = csv_text(["identity", "x", "records", "max_deviation", "tolerance"],
                    ((r.tags["identity"], r.grid_point, r.tags["records"], r.lhs, r.rhs) for r in reports))
    summary = {"max_deviation": max(r.lhs for r in reports), "tolerance": tol}
    return text, summary, [r.lhs > tol for r in reports]


COMMANDS = {
    "pvar": cmd_pvar,
    "rl-check": cmd_rl_check,
    "tauber": cmd_tauber,
    "semigroup-build": cmd_semigroup_build,
    "zeta-scan": cmd_zeta_scan,
    "pnt": _profile_command("pnt"),
    "mertens": _profile_command("mertens"),
    "identities": cmd_identities,
}


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating, mp.mpf)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    return value


def run(command: str, cfg: dict, seed: int = 0, out: Path | str = ".", threads: int = 1,
        tolerance: float | None = None) -> int:
    """Execute one experiment and write its CSV and JSON summary; returns the exit status."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    text, summary, bad = COMMANDS[command](cfg, seed, tolerance, max(1, threads))
    violations = _violations(command, bad)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{command}.csv").write_text(text, encoding="utf-8", newline="\n")
    report = {
        "command": command,
        "seed": seed,
        "config": cfg,
        "versions": {"tauberlab": __version__, "numpy": np.__version__, "mpmath": mp.__version__},
        "summary": summary,
        "violations": violations,
        "status": "violated" if violations else "ok",
    }
    (out / f"{command}.json").write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8", newline="\n")
    return EXIT_VIOLATION if violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tauberlab", description="Tauberian and semigroup experiments.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="JSON file with command parameters")
    parser.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--tolerance", type=float, default=None, help="override the command's tolerance")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must fit in 64 unsigned bits")
    cfg = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config must be a JSON object")
    try:
        status = run(args.command, cfg, args.seed, args.out, args.threads, args.tolerance)
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        print(f"tauberlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if status:
        print(f"tauberlab {args.command}: invariant violated, see {args.out / (args.command + '.json')}",
              file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
