"""Command-line front end.

    blaschke-threshold <command> [options]

Options may also come from a ``--config`` file of ``key = value`` lines
(keys are option names with dashes or underscores; ``#`` starts a comment).
Flags given on the command line override the file.

Exit codes: 0 success, 1 usage or domain error, 2 a verification that was
expected to pass failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import _accel
from . import io as bio
from .blaschke import (
    envelope_lower_bound,
    envelope_upper_bound,
    product_log_bounds,
    product_modulus,
)
from .construction import (
    ThresholdTarget,
    adaptive_construction,
    uniform_stack,
    witness_min_on_zeros,
)
from .covering import (
    c1_estimate,
    corona_eta,
    divergence_witness,
    gmn_eta_of_epsilon,
    halfplane_grids,
    verify_halfplane_covering,
    verify_rowwise_covering,
    wep_sum,
)
from .errors import BudgetError, CacheError, ConstructionError, DomainError, IllConditionedGram
from .geometry import Point, cayley
from .modelop import FAMILIES, delta_sweep, section_zeros, witness_targets
from .ric import BlockOperator, decay_table, enumerate_index

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2

COMMANDS = ("construct", "verify-covering", "verify-bounds", "corona", "gmn", "witness", "sweep-c1", "ric-demo", "figure1")
DEFAULT_STACK = {
    "construct": "adaptive",
    "verify-covering": "uniform",
    "verify-bounds": "uniform",
    "corona": "adaptive",
    "gmn": "uniform",
    "witness": "uniform",
    "sweep-c1": "adaptive",
    "ric-demo": "adaptive",
    "figure1": "uniform",
}
# Defaults applied after merging flags and the config file.
DEFAULTS = {
    "rho": 1.0,
    "levels": None,  # per stack: 8 uniform, 4 adaptive
    "tol": 1e-9,
    "corona_c": 1.0,
    "threads": 0,
    "epsilon_offset": 1e-6,
    "grid": "400,400",
    "top": 16,
    "points": 10000,
    "delta_list": None,
    "n_list": None,
    "per_row": None,
    "family": "witness",
    "r": 2,
    "j_list": "3,6,10,12",
    "k_min": -3,
    "k_max": 2,
    "mode": "pass-expected",
}


class UsageError(Exception):
    pass


def _floats(text) -> list[float]:
    return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def _ints(text) -> list[int]:
    return [int(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("zero set")
    ex = g.add_mutually_exclusive_group()
    ex.add_argument("--alpha", type=float, help="row parameter alpha (sets delta1 = 1/sqrt(1+2 alpha^2))")
    ex.add_argument("--delta1", type=float, help="target threshold in (0, 1)")
    g.add_argument("--stack", choices=("uniform", "adaptive"), help="zero-set construction")
    g.add_argument("--rho", type=float)
    g.add_argument("--levels", type=int, help="constructed levels")
    g.add_argument("--cache", help="zero-set cache: written by construct, read by the others when present")
    o = common.add_argument_group("run")
    o.add_argument("--config", help="key = value file with defaults for any option")
    o.add_argument("--out", help="output CSV path")
    o.add_argument("--tol", type=float, help="tail tolerance for certified products")
    o.add_argument("--threads", type=int, help="worker threads for grid kernels (0 = numba default)")
    o.add_argument("--no-timestamp", action="store_true", default=None, help="omit the timestamp header line")

    p = argparse.ArgumentParser(prog="blaschke-threshold", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("construct", parents=[common], help="build a zero set and optionally cache it")

    c = sub.add_parser("verify-covering", parents=[common], help="grid check of the half-plane covering")
    c.add_argument("--epsilon", type=float, help="absolute epsilon (overrides the offset)")
    c.add_argument("--epsilon-offset", type=float, help="epsilon = delta1 + offset")
    c.add_argument("--grid", help="samples per strip as n_re,n_im")
    c.add_argument("--top", type=int, help="worst points written to the report")
    c.add_argument("--mode", choices=("pass-expected", "exploratory"))

    b = sub.add_parser("verify-bounds", parents=[common], help="certified products against the two-sided envelope")
    b.add_argument("--points", type=int, help="number of log-spaced heights")

    cr = sub.add_parser("corona", parents=[common], help="grid lower bound for |f| + |B| with the witness f")
    cr.add_argument("--grid")

    gm = sub.add_parser("gmn", parents=[common], help="|B| off the epsilon-neighbourhoods of the zeros")
    gm.add_argument("--epsilon", type=float)
    gm.add_argument("--grid")

    sub.add_parser("witness", parents=[common], help="divergence lower bounds 1/|B(v_n)| - 1")

    sw = sub.add_parser("sweep-c1", parents=[common], help="finite-section inverse norms over delta and N")
    sw.add_argument("--delta-list")
    sw.add_argument("--n-list")
    sw.add_argument("--per-row", type=int, help="zeros per row on each side of the axis")
    sw.add_argument("--family", choices=FAMILIES)
    sw.add_argument("--corona-c", type=float)

    rd = sub.add_parser("ric-demo", parents=[common], help="best r-part partition value versus J")
    rd.add_argument("--r", type=int)
    rd.add_argument("--j-list")
    rd.add_argument("--per-row", type=int)

    f = sub.add_parser("figure1", parents=[common], help="zero coordinates and the four circles around v_1")
    f.add_argument("--k-min", type=int)
    f.add_argument("--k-max", type=int)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over defaults, then range-check."""
    cfg = dict(DEFAULTS)
    if args.config:
        file_cfg = read_config(args.config)
        unknown = set(file_cfg) - set(vars(args)) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(file_cfg)
    if args.alpha is not None or args.delta1 is not None:
        cfg.pop("alpha", None)
        cfg.pop("delta1", None)
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command"):
            cfg[k] = v
    if cfg.get("alpha") is not None and cfg.get("delta1") is not None:
        raise UsageError("--alpha and --delta1 are mutually exclusive")
    cmd = args.command
    cfg["stack"] = cfg.get("stack") or DEFAULT_STACK[cmd]
    if cfg.get("alpha") is None and cfg.get("delta1") is None:
        cfg["alpha"] = 1.0
    try:
        if cfg.get("delta1") is not None:
            target = ThresholdTarget.from_delta1(float(cfg["delta1"]))
        else:
            target = ThresholdTarget.from_alpha(float(cfg["alpha"]))
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    cfg["alpha"], cfg["delta1"] = target.alpha, target.delta1
    cfg["rho"] = float(cfg["rho"])
    if cfg["levels"] is None:
        cfg["levels"] = 8 if cfg["stack"] == "uniform" else 4
    cfg["levels"] = int(cfg["levels"])
    for key in ("tol", "corona_c", "epsilon_offset"):
        cfg[key] = float(cfg[key])
    for key in ("threads", "top", "points", "r", "k_min", "k_max"):
        cfg[key] = int(cfg[key])
    if cfg["per_row"] is None:
        cfg["per_row"] = 1 if cmd == "ric-demo" else 3
    cfg["per_row"] = int(cfg["per_row"])
    cfg["no_timestamp"] = str(cfg.get("no_timestamp", False)).lower() in ("1", "true", "yes", "on")
    if not cfg["rho"] > 0:
        raise UsageError("rho must be positive")
    if cfg["levels"] < 1 or (cfg["stack"] == "adaptive" and cfg["levels"] < 2):
        raise UsageError("levels must be >= 1 (>= 2 for the adaptive stack)")
    if not cfg["tol"] > 0:
        raise UsageError("tol must be positive")
    if cfg["threads"] < 0:
        raise UsageError("threads must be >= 0")
    if cfg["per_row"] < 1:
        raise UsageError("per-row must be >= 1")
    if not cfg["corona_c"] > 0:
        raise UsageError("corona-c must be positive")
    if cfg.get("epsilon") is not None:
        cfg["epsilon"] = float(cfg["epsilon"])
        if not 0 < cfg["epsilon"] < 1:
            raise UsageError("epsilon must lie in (0, 1)")
    return cfg


def load_or_build(cfg: dict, write: bool = False):
    path = cfg.get("cache")
    if path and Path(path).exists() and not write:
        spec, witness = bio.load_cache(path)
        return spec, witness
    if cfg["stack"] == "uniform":
        spec, witness = uniform_stack(cfg["alpha"], cfg["rho"], cfg["levels"])
    else:
        spec, witness = adaptive_construction(
            ThresholdTarget.from_alpha(cfg["alpha"]), rho=cfg["rho"], n_levels=cfg["levels"]
        )
    if path and write:
        bio.save_cache(path, spec, witness)
    return spec, witness


def _grid_pair(text) -> tuple[int, int]:
    vals = _ints(text)
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) < 2:
        raise UsageError("grid must be n_re,n_im with both >= 2")
    return vals[0], vals[1]


def _emit(cfg, command, spec, witness, columns, rows, default_name) -> Path:
    out = Path(cfg.get("out") or default_name)
    shown = {k: v for k, v in cfg.items() if k not in ("out", "no_timestamp") and v is not None}
    header = bio.header_lines(command, shown, bio.spec_hash(spec, witness), timestamp=not cfg["no_timestamp"])
    bio.write_csv(out, header, columns, rows)
    return out


# ------------------------------------------------------------ commands


def cmd_construct(cfg):
    spec, witness = load_or_build(cfg, write=True)
    rows = [(lev, r.alpha, r.gamma) for lev, r in zip(spec.row_levels, spec.rows)]
    if cfg.get("out"):
        _emit(cfg, "construct", spec, witness, ("level", "alpha", "gamma"), rows, "construct.csv")
    print(f"{len(spec.rows)} rows, {len(witness.v)} witness points, spec hash {bio.spec_hash(spec, witness)}")
    if cfg["stack"] == "adaptive":
        print("m_n per level: " + " ".join(str(lev.m_n) for lev in spec.kind.levels))
        print(f"min |f| over zeros: {witness_min_on_zeros(spec, witness):.17g} (delta1 = {cfg['delta1']:.17g})")
    return EXIT_OK


def cmd_verify_covering(cfg):
    spec, witness = load_or_build(cfg)
    grid = _grid_pair(cfg["grid"])
    if cfg.get("epsilon") is not None:
        eps = cfg["epsilon"]
        rep = verify_halfplane_covering(spec, eps, grid, top_k=cfg["top"])
        rows = rep.csv_rows()
    else:
        # each strip at its own row threshold plus the offset
        rep, margins = verify_rowwise_covering(spec, cfg["epsilon_offset"], grid, top_k=cfg["top"])
        eps = rep.epsilon
        rows = [(re, im, d, bool(m < 0.0)) for (re, im, d), m in zip(rep.top, margins)]
    _emit(cfg, "verify-covering", spec, witness, ("re", "im", "min_dist", "pass"), rows, "covering.csv")
    verdict = "PASS" if rep.passed else "FAIL"
    print(
        f"{verdict}: max min-distance {rep.max_min_dist:.17g} vs epsilon {eps:.17g} at "
        f"{rep.worst.real:.17g}+{rep.worst.imag:.17g}i over {rep.n_points} samples "
        f"(resolution {rep.resolution:.3g})"
    )
    if not rep.passed and cfg["mode"] == "pass-expected":
        return EXIT_FAILED
    return EXIT_OK


def envelope_check(spec, n_points: int, tol: float):
    """Certified |B| on a log grid of heights against both envelope bounds."""
    k = spec.kind
    ys = np.geomspace(1e-3 * k.alpha / k.rho, 1e3 * k.alpha / k.rho, n_points)
    xs = (np.arange(n_points) % 97) / 97.0 / k.rho
    lo, hi = product_log_bounds(spec, xs, ys, tol)
    rows, bad = [], 0
    for x, y, l, h in zip(xs, ys, lo, hi):
        lower = upper = math.nan
        ok = True
        if y <= 0.999 * k.alpha / k.rho:
            lower = envelope_lower_bound(k.alpha, k.beta, k.rho, y)
            ok = math.exp(h) >= lower
        elif y > k.alpha / k.rho:
            upper = envelope_upper_bound(k.alpha, k.beta, k.rho, y)
            ok = math.exp(l) <= upper
        bad += not ok
        rows.append((float(x), float(y), math.exp(l), math.exp(h), lower, upper, ok))
    return rows, bad


def cmd_verify_bounds(cfg):
    spec, witness = load_or_build(cfg)
    if not spec.is_uniform():
        raise UsageError("verify-bounds needs the uniform stack")
    rows, bad = envelope_check(spec, cfg["points"], cfg["tol"])
    cols = ("re", "im", "modulus_lo", "modulus_hi", "lower_bound", "upper_bound", "pass")
    _emit(cfg, "verify-bounds", spec, witness, cols, rows, "bounds.csv")
    print(f"{'PASS' if bad == 0 else 'FAIL'}: {bad} violations over {len(rows)} points")
    return EXIT_OK if bad == 0 else EXIT_FAILED


def cmd_corona(cfg):
    spec, witness = load_or_build(cfg)
    n_re, n_im = _grid_pair(cfg["grid"] if cfg["grid"] != DEFAULTS["grid"] else "64,64")
    rows = []
    for i, v in enumerate(witness.v):
        rep = corona_eta(witness, spec, [v], cfg["tol"])
        rows.append((f"v{i}", v.re, v.im, rep.eta))
    rep = corona_eta(witness, spec, halfplane_grids(spec, n_re, n_im), cfg["tol"])
    rows.append(("grid", rep.argmin.real, rep.argmin.imag, rep.eta))
    _emit(cfg, "corona", spec, witness, ("label", "re", "im", "eta"), rows, "corona.csv")
    print(f"grid min of |f|+|B|: {rep.eta:.17g}; along witnesses: " + " ".join(f"{r[3]:.3g}" for r in rows[:-1]))
    return EXIT_OK


def cmd_gmn(cfg):
    spec, witness = load_or_build(cfg)
    eps = cfg["epsilon"] if cfg.get("epsilon") is not None else 0.5
    rows = []
    for i, v in enumerate(witness.v):
        val = product_modulus(spec, v, cfg["tol"])
        d = float(np.min(np.abs(v.z - _nearby_zeros(spec)) / np.abs(v.z - np.conj(_nearby_zeros(spec)))))
        rows.append((i, v.re, v.im, val.lo, val.hi, d, wep_sum(spec, cayley(v))))
    _emit(cfg, "gmn", spec, witness, ("n", "re", "im", "modulus_lo", "modulus_hi", "min_dist", "wep"), rows, "gmn.csv")
    n_re, n_im = _grid_pair(cfg["grid"] if cfg["grid"] != DEFAULTS["grid"] else "64,64")
    rep = gmn_eta_of_epsilon(spec, eps, halfplane_grids(spec, n_re, n_im), cfg["tol"])
    print(f"min certified |B| off the {eps:g}-neighbourhoods: {rep.eta:.17g} over {rep.n_qualifying} grid points")
    print("|B(v_n)| upper ends: " + " ".join(f"{r[4]:.3g}" for r in rows))
    return EXIT_OK


def _nearby_zeros(spec) -> np.ndarray:
    return np.array([r.zero(k) for r in spec.rows for k in (-2, -1, 0, 1)])


def cmd_witness(cfg):
    spec, witness = load_or_build(cfg)
    rows = []
    for n, v in enumerate(witness.v):
        floor = math.nan
        if spec.is_uniform():
            k = spec.kind
            if v.im > k.alpha / k.rho:
                floor = 1.0 / envelope_upper_bound(k.alpha, k.beta, k.rho, v.im) - 1.0
        rows.append((n, v.im, divergence_witness(spec, witness, n, cfg["tol"]), floor))
    _emit(cfg, "witness", spec, witness, ("n", "im", "divergence", "envelope_floor"), rows, "witness.csv")
    print("1/|B(v_n)| - 1: " + " ".join(f"{r[2]:.4g}" for r in rows))
    return EXIT_OK


def cmd_sweep_c1(cfg):
    spec, witness = load_or_build(cfg)
    n_zeros = len(section_zeros(spec, cfg["per_row"]))
    n_list = _ints(cfg["n_list"]) if cfg["n_list"] else sorted({1, max(1, n_zeros // 4), max(1, n_zeros // 2), n_zeros})
    delta_list = _floats(cfg["delta_list"]) if cfg["delta_list"] else [
        round(spec.delta1 - 0.15, 6), round(spec.delta1 + 0.15, 6), 1.0
    ]
    rows = delta_sweep(spec, witness, delta_list, n_list, cfg["per_row"], cfg["corona_c"], (cfg["family"],))
    cols = ("delta", "N", "sigma_min", "inverse_norm", "eta", "c1_upper", "gram_condition")
    out = [(r.delta, r.n, r.sigma_min, r.inverse_norm, r.eta, r.c1_upper, r.gram_condition) for r in rows]
    _emit(cfg, "sweep-c1", spec, witness, cols, out, "sweep_c1.csv")
    for r in rows:
        print(f"delta={r.delta:.6f} N={r.n:4d} inverse_norm={r.inverse_norm:.6g} c1_upper={r.c1_upper:.6g}")
    return EXIT_OK


def cmd_ric_demo(cfg):
    spec, witness = load_or_build(cfg)
    j_list = _ints(cfg["j_list"])
    if not j_list or min(j_list) < 1:
        raise UsageError("j-list needs positive indices")
    n_max = enumerate_index(max(j_list))[0]
    zeros = section_zeros(spec, cfg["per_row"])[:n_max]
    if len(zeros) < n_max:
        raise UsageError(f"J={max(j_list)} needs {n_max} zeros, only {len(zeros)} enumerated")
    a = BlockOperator.from_data(zeros, witness_targets(witness, zeros))
    rows = decay_table(a, cfg["r"], j_list)
    out = [(r.r, r.j, r.best_value, r.partitions_searched) for r in rows]
    _emit(cfg, "ric-demo", spec, witness, ("r", "J", "best_value", "partitions_searched"), out, "ric.csv")
    for r in rows:
        print(f"r={r.r} J={r.j:3d} best={r.best_value:.6g} searched={r.partitions_searched}")
    return EXIT_OK


def figure1_data(spec, witness, k_min: int, k_max: int):
    """Zero coordinates per level and the four threshold circles meeting at v_1."""
    zeros = [(lev, k, z.real, z.imag) for lev, r in zip(spec.row_levels, spec.rows) for k in range(k_min, k_max + 1) for z in [r.zero(k)]]
    eps = spec.delta1
    circles = []
    for lev in (0, 1):
        r = spec.rows[lev]
        for sign in (-1, 1):
            lam = complex(sign, r.alpha) / r.gamma
            # {|b_lam| = eps} is the Euclidean circle below
            c = complex(lam.real, lam.imag * (1 + eps * eps) / ((1 - eps) * (1 + eps)))
            rad = 2 * eps * lam.imag / ((1 - eps) * (1 + eps))
            circles.append((lev, sign, c.real, c.imag, rad))
    return zeros, circles


def cmd_figure1(cfg):
    spec, witness = load_or_build(cfg)
    if len(spec.rows) < 2:
        raise UsageError("figure1 needs at least two rows")
    zeros, circles = figure1_data(spec, witness, cfg["k_min"], cfg["k_max"])
    out = _emit(cfg, "figure1", spec, witness, ("level", "k", "re", "im"), zeros, "figure1.csv")
    circ_cfg = dict(cfg, out=str(out.with_name(out.stem + "_circles.csv")))
    _emit(circ_cfg, "figure1", spec, witness, ("level", "sign", "center_re", "center_im", "radius"), circles, "")
    print(f"{len(zeros)} zeros and {len(circles)} circles written to {out}")
    return EXIT_OK


HANDLERS = {
    "construct": cmd_construct,
    "verify-covering": cmd_verify_covering,
    "verify-bounds": cmd_verify_bounds,
    "corona": cmd_corona,
    "gmn": cmd_gmn,
    "witness": cmd_witness,
    "sweep-c1": cmd_sweep_c1,
    "ric-demo": cmd_ric_demo,
    "figure1": cmd_figure1,
}


def run(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve(args)
        _accel.set_threads(cfg["threads"])
        return HANDLERS[args.command](cfg)
    except (UsageError, DomainError, CacheError, BudgetError, ConstructionError, IllConditionedGram, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
