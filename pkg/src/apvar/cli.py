"""Command-line orchestration: zero-cache lifecycle, identity verification,
Monte Carlo simulation, variance scans, q-averages, and correlation reports.

Every command is deterministic given its configuration; reports embed the
effective configuration and the package version.  Exit codes: 0 success,
2 zero-certification failure, 3 missing inputs, 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__, hq, psi, zerostats
from .characters import conductor_sum_identities, select_C
from .lfun import find_zeros, read_zeroset, write_zeroset

EXIT_OK = 0
EXIT_UNCERTIFIED = 2
EXIT_MISSING = 3
EXIT_VERIFY_FAILED = 4

_DEFAULTS = {
    "q": "3",
    "qmax": None,
    "x": 10**6,
    "Q": 10**4,
    "T": 100.0,
    "seed": 1,
    "n": 10**5,
    "eps": "0.05,0.1,0.2,0.3,0.4,0.5",
    "out": ".",
    "cache": "zeros_cache",
    "threads": 1,
}


def _read_config(path: str) -> dict:
    cfg = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {raw.rstrip()}")
            key, value = (part.strip() for part in line.split("=", 1))
            cfg[key] = value
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apvar",
        description="numerical laboratory for the variance of primes in "
        "arithmetic progressions and its random model",
    )
    parser.add_argument("command", choices=[
        "zeros", "verify", "simulate", "variance", "average", "fg", "correlate"])
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--q", help="modulus or comma-separated moduli")
    parser.add_argument("--qmax", type=int, help="use all moduli 3..qmax")
    parser.add_argument("--x", type=int, help="x ceiling for prime-side sums")
    parser.add_argument("--Q", type=int, help="modulus ceiling for averages")
    parser.add_argument("--T", type=float, help="zero-search height")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--n", type=int, help="Monte Carlo sample count")
    parser.add_argument("--eps", help="comma-separated deviation grid")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--cache", help="zero cache directory")
    parser.add_argument("--threads", type=int, help="worker cap (reserved)")
    return parser


def _effective_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(_read_config(args.config))
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["x"] = int(cfg["x"])
    cfg["Q"] = int(cfg["Q"])
    cfg["T"] = float(cfg["T"])
    cfg["seed"] = int(cfg["seed"])
    cfg["n"] = int(cfg["n"])
    cfg["threads"] = int(cfg["threads"])
    if cfg["qmax"] is not None:
        cfg["q_list"] = list(range(3, int(cfg["qmax"]) + 1))
    else:
        cfg["q_list"] = [int(tok) for tok in str(cfg["q"]).split(",")]
    cfg["eps_list"] = [float(tok) for tok in str(cfg["eps"]).split(",")]
    return cfg


def _json_report(path: str, payload: dict, cfg: dict) -> None:
    payload = dict(payload)
    payload["config"] = {
        k: cfg[k] for k in ("q_list", "x", "Q", "T", "seed", "n", "eps_list")
    }
    payload["version"] = __version__
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_zero_map(q: int, cache_dir: str) -> dict:
    """Zero sets for q strictly from cache; KeyError -> missing input."""
    out = {}
    for chi in select_C(q):
        star = chi.primitive()
        if star.label not in out:
            out[star.label] = read_zeroset(cache_dir, star.label)
        conj = star.conjugate()
        if conj.label not in out:
            zs = out[star.label]
            from .lfun import ZeroSet

            out[conj.label] = ZeroSet(
                label=conj.label, conductor=zs.conductor, parity=zs.parity,
                T=zs.T, ordinates=zs.ordinates, certified=zs.certified,
                is_real=zs.is_real, signs=None if zs.is_real else -zs.signs,
            )
    return out


def cmd_zeros(cfg: dict) -> int:
    cache = cfg["cache"]
    os.makedirs(cache, exist_ok=True)
    status = EXIT_OK
    for q in cfg["q_list"]:
        reps = select_C(q)
        if not reps:
            print(f"q={q}: no non-principal characters, nothing to do")
            continue
        for chi in reps:
            star = chi.primitive()
            try:
                cached = read_zeroset(cache, star.label)
            except (OSError, ValueError):
                cached = None
            if cached is not None and cached.T >= cfg["T"] - 1e-9:
                zs = cached
                origin = "cached"
            else:
                zs = find_zeros(star, cfg["T"])
                write_zeroset(zs, cache)
                origin = "computed"
            flag = "certified" if zs.certified else "UNCERTIFIED"
            print(f"{star.label}: {zs.ordinates.size} ordinates to T={zs.T:g} "
                  f"({origin}, {flag})")
            if not zs.certified:
                status = EXIT_UNCERTIFIED
    return status


def cmd_verify(cfg: dict) -> int:
    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    for q in (3, 4, 7, 12):
        for x in (10**3, 10**4):
            vd = psi.variance_direct(x, q)
            vc = psi.variance_via_characters(x, q)
            check(f"orthogonality q={q} x={x}",
                  abs(vd - vc) <= 1e-9 * max(vd, 1.0))
    for q in (3, 8, 36, 101):
        s1, _, rhs = conductor_sum_identities(q)
        check(f"conductor sum q={q}", abs(s1 - rhs) <= 1e-10 * max(abs(rhs), 1.0))
    for q in cfg["q_list"]:
        try:
            zeros = _load_zero_map(q, cfg["cache"])
        except (OSError, ValueError):
            print(f"missing or unreadable zero cache for q={q}")
            return EXIT_MISSING
        for chi in select_C(q):
            star = chi.primitive()
            rep = zerostats.b_chi(star, zeros[star.label])
            gap = rep.closed_form - rep.truncated_sum
            check(
                f"zero-sum bracket {star.label}",
                rep.usable and 0.0 < gap <= 1.1 * rep.tail_estimate,
            )
    return EXIT_OK if failures == 0 else EXIT_VERIFY_FAILED


def cmd_simulate(cfg: dict) -> int:
    q = cfg["q_list"][0]
    try:
        zeros = _load_zero_map(q, cfg["cache"])
    except (OSError, ValueError):
        print(f"zero cache missing for q={q}; run `apvar zeros` first")
        return EXIT_MISSING
    if not all(zs.certified for zs in zeros.values()):
        return EXIT_UNCERTIFIED
    weights = hq.weights_map(q, zeros, T_cut=min(cfg["T"], 150.0))
    batch = hq.sample_hq(q, weights, seed=cfg["seed"], n=cfg["n"])
    report = zerostats.var_hq_exact(q, zeros)
    tails = hq.tail_report(q, batch, [e for e in cfg["eps_list"] if 0 < e <= 9])
    payload = {
        "q": q,
        "seed": cfg["seed"],
        "n": cfg["n"],
        "mean_mc": float(batch.values.mean()),
        "mean_exact": report.mean_exact,
        "var_mc": float(batch.values.var()),
        "var_exact": report.var_exact,
        "tails": [
            {"eps": t.eps, "emp": t.empirical, "emp_stderr": t.stderr,
             "chernoff": t.chernoff, "gauss": t.gaussian}
            for t in tails
        ],
    }
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(cfg["out"], f"simulate_q{q}.json")
    _json_report(path, payload, cfg)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_variance(cfg: dict) -> int:
    os.makedirs(cfg["out"], exist_ok=True)
    for q in cfg["q_list"]:
        grid = psi.geometric_grid(cfg["x"])
        series = psi.variance_series(
            q, math.log(float(grid[0])), math.log(float(cfg["x"])), grid.size
        )
        path = os.path.join(cfg["out"], f"variance_q{q}.csv")
        psi.write_variance_csv(series, path)
        print(f"wrote {path} ({series.y.size} rows)")
    return EXIT_OK


def cmd_average(cfg: dict) -> int:
    empirical, montgomery, hooley = psi.average_over_q(cfg["x"], cfg["Q"])
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(
        cfg["out"], f"average_x{cfg['x']}_Q{cfg['Q']}.csv"
    )
    psi.write_average_csv(cfg["Q"], empirical, hooley, path)
    print(f"empirical={empirical:.6g} montgomery={montgomery:.6g} "
          f"hooley={hooley:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_fg(cfg: dict) -> int:
    q = cfg["q_list"][0]
    ratio, lhs, rhs = psi.fg_secondary_compare(cfg["x"], q)
    payload = {"q": q, "x": cfg["x"], "ratio": ratio, "lhs": lhs, "rhs": rhs}
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(cfg["out"], f"fg_q{q}.json")
    _json_report(path, payload, cfg)
    print(f"V(x;q)/x = {lhs:.6g}, prediction {rhs:.6g}, ratio {ratio:.4f}")
    return EXIT_OK


def cmd_correlate(cfg: dict) -> int:
    q = cfg["q_list"][0]
    try:
        zeros = _load_zero_map(q, cfg["cache"])
    except (OSError, ValueError):
        print(f"zero cache missing for q={q}; run `apvar zeros` first")
        return EXIT_MISSING
    T = min(zs.T for zs in zeros.values())
    u = min(T, 50.0)
    payload = {
        "q": q,
        "pair_correlation": [
            {"Y": Y, "value": zerostats.pair_correlation_T(q, Y, zeros)}
            for Y in (0.0, 10.0, 100.0, 1000.0)
        ],
        "close_pairs": [
            {"U": u, "S": S, "count": zerostats.close_pair_count(q, u, S, zeros)}
            for S in (0.5, 1.0, 2.0)
        ],
    }
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(cfg["out"], f"correlate_q{q}.json")
    _json_report(path, payload, cfg)
    print(f"wrote {path}")
    return EXIT_OK


_COMMANDS = {
    "zeros": cmd_zeros,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "variance": cmd_variance,
    "average": cmd_average,
    "fg": cmd_fg,
    "correlate": cmd_correlate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _effective_config(args)
    except (OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    return _COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
