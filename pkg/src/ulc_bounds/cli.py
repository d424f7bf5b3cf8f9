"""``ulc-bounds`` command line.

Exit status: 0 when every check passes, 1 when a mathematical check fails,
2 on malformed input or configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bounds, distributions, extremizers
from .intrinsic_volumes import (
    BodyError,
    body_from_dict,
    body_to_dict,
    corollary6_check,
    intrinsic_volumes,
    zk_summary,
)
from .distributions import DiscretePMF, PMFError

log = logging.getLogger("ulc_bounds")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
BOUND_COLUMNS = ["t", "side", "exact", "theorem1", "corollary2", "johnson_c", "johnson"]
DOMINATION_TOL = 1e-10


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")
    if any(not math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"non-finite value in {text!r}")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _load_json(path: Optional[str]):
    if path is None:
        raise ConfigError("--input is required for this command")
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None


def _load_pmf(path: Optional[str]) -> DiscretePMF:
    return DiscretePMF.from_dict(_load_json(path))


def _grid(args, default: Sequence[float]) -> list[float]:
    grid = list(args.t_grid) if args.t_grid is not None else list(default)
    if not grid:
        raise ConfigError("--t-grid must be nonempty")
    if any(t < 0 for t in grid):
        raise ConfigError("--t-grid values must be nonnegative")
    return grid


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


# -- commands ----------------------------------------------------------------
# each returns (exit status, JSON payload, CSV header, CSV rows)

def cmd_check(args):
    pmf = _load_pmf(args.input)
    lc = distributions.is_log_concave(pmf)
    viol = distributions.first_ulc_violation(pmf)
    report = {"log_concave": lc, "ulc": viol is None, "first_violation": viol}
    summary = "ulc: true" if viol is None else f"ulc: false, first_violation: n={viol}"
    print(summary, file=sys.stderr)
    row = [lc, viol is None, viol]
    return (EXIT_OK if viol is None else EXIT_FAIL), report, ["log_concave", "ulc", "first_violation"], [row]


def cmd_bound(args):
    pmf = _load_pmf(args.input) if args.input is not None else None
    mu = None
    if pmf is None:
        if args.mean is None:
            raise ConfigError("bound needs --input PMF or --mean")
        if not args.mean > 0:
            raise ConfigError("--mean must be positive")
        mu = args.mean
    if args.c is not None and len(args.c) > 1:
        raise ConfigError("bound takes at most one --c value; use 'compare' for several")
    c = args.c[0] if args.c else None
    if c is not None and not c > 0:
        raise ConfigError("--c must be positive")
    grid = _grid(args, [0.0, 0.5, 1.0, 2.0, 4.0])
    reports = [bounds.tail_bound_report(t, side, pmf=pmf, mu=mu, c=c)
               for t in grid for side in ("upper", "lower")]
    status = EXIT_OK
    rows = []
    for rep in reports:
        if rep.exact is not None and rep.exact > rep.theorem1 + DOMINATION_TOL:
            log.warning("exact tail exceeds bound at t=%s side=%s", rep.t, rep.side)
            status = EXIT_FAIL
        jc = rep.johnson.c if rep.johnson else None
        jv = rep.johnson.value if rep.johnson else None
        rows.append([rep.t, rep.side, rep.exact, rep.theorem1, rep.corollary2, jc, jv])
    payload = {"mean": mu if pmf is None else distributions.mean(pmf),
               "rows": [r.to_dict() for r in reports]}
    return status, payload, BOUND_COLUMNS, rows


def _lemma_points(args):
    ps = args.p if args.p is not None else [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
    ks = args.k if args.k is not None else list(range(0, 11))
    ls = args.l if args.l is not None else list(range(0, 31))
    if any(p <= 0 for p in ps) or any(k < 0 for k in ks):
        raise ConfigError("--p must be positive and --k nonnegative")
    pts = []
    for p in ps:
        for k in ks:
            for l in ([k] if args.degenerate else ls):
                if k <= l:
                    pts.append(extremizers.ExtremizerParams(p, k, l))
    if not pts:
        raise ConfigError("no (p, k, l) with k <= l in the requested ranges")
    return pts


def cmd_verify_lemma(args):
    pts = _lemma_points(args)
    t_grid = args.t_grid if args.t_grid is not None else extremizers.default_t_grid()
    y_grid = np.geomspace(0.01, 20.0, 200)
    rows, items = [], []
    all_hold = True
    for prm in pts:
        dom = extremizers.verify_mgf_domination(prm, t_grid)
        f1 = abs(extremizers.f_value(prm, 1.0))
        fp1 = abs(extremizers.f_prime(prm, 1.0))
        f2_min = float(np.min(extremizers.f_second(prm, y_grid)))
        psi_ok = extremizers.psi_log_concavity_check(prm.k, prm.l, prm.p)
        holds = dom.holds and f1 <= 1e-10 and fp1 <= 1e-10 and f2_min >= -1e-10 and psi_ok
        all_hold &= holds
        item = dom.to_dict()
        item.update({"f_at_1": f1, "f_prime_at_1": fp1, "f_second_min": f2_min,
                     "psi_log_concave": psi_ok, "holds": holds})
        items.append(item)
        rows.append([prm.p, prm.k, prm.l, dom.worst_gap, f1, fp1, f2_min, psi_ok, holds])
    header = ["p", "k", "l", "worst_gap", "f_at_1", "f_prime_at_1", "f_second_min",
              "psi_log_concave", "holds"]
    if len(items) == 1:
        payload = items[0]
    else:
        payload = {"holds": all_hold, "worst_gap": max(i["worst_gap"] for i in items),
                   "points": items}
    return (EXIT_OK if all_hold else EXIT_FAIL), payload, header, rows


def cmd_intrinsic(args):
    try:
        body = body_from_dict(_load_json(args.input))
    except BodyError as exc:
        raise ConfigError(str(exc)) from None
    profile = intrinsic_volumes(body)
    grid = _grid(args, [0.5, 1.0])
    root = math.sqrt(profile.dim)
    if any(t > root * (1 + 1e-12) for t in grid):
        raise ConfigError(f"--t-grid values must not exceed sqrt(n) = {root:.6g}")
    checks = [corollary6_check(profile, t) for t in grid]
    summary = zk_summary(profile)
    payload = {"body": body_to_dict(body), "profile": profile.to_dict(),
               **summary, "corollary6": [c.to_dict() for c in checks]}
    header = ["t", "deviation", "mean", "upper_exact", "lower_exact", "exact", "bound",
              "trivial_upper", "small_mean_bound", "holds"]
    rows = [[c.t, c.deviation, c.mean, c.upper_exact, c.lower_exact, c.exact, c.bound,
             c.trivial_upper, c.small_mean_bound, c.holds] for c in checks]
    status = EXIT_OK if all(c.holds for c in checks) else EXIT_FAIL
    return status, payload, header, rows


def cmd_compare(args):
    if args.input is not None:
        mu = distributions.mean(_load_pmf(args.input))
    elif args.mean is not None:
        mu = args.mean
    else:
        raise ConfigError("compare needs --mean or --input")
    if not mu > 0:
        raise ConfigError("mean must be positive")
    cs = list(args.c or [])
    cap = 1.0 / mu
    for c in cs:
        if not c > 0:
            raise ConfigError(f"c must be positive, got {c}")
        if c > cap * (1 + 1e-12):
            raise ConfigError(f"c={c} exceeds 1/mean={cap:.17g}; outside the ULC regime")
    grid = _grid(args, [0.5, 1.0, 2.0, 4.0])
    header = ["t", "theorem1"] + [f"johnson[c={c:.17g}]" for c in cs]
    rows, items = [], []
    status = EXIT_OK
    for t in grid:
        th = bounds.theorem1_upper(mu, t)
        js = [bounds.johnson_bound(c, t) for c in cs]
        if any(th > j * (1 + 1e-12) for j in js):
            status = EXIT_FAIL
        rows.append([t, th] + js)
        items.append({"t": t, "theorem1": th,
                      "johnson": [{"c": c, "value": j} for c, j in zip(cs, js)]})
    return status, {"mean": mu, "rows": items}, header, rows


def cmd_sweep(args):
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    header = ["sample_seed", "offset", "size", "mean", "variance", "variance_holds",
              "worst_upper_gap", "worst_lower_gap", "holds"]
    rows, items = [], []
    all_hold = True
    for i in range(args.samples):
        seed = args.seed + i
        pmf = distributions.random_ulc(seed, args.max_support)
        item = sweep_item(pmf)
        item["sample_seed"] = seed
        all_hold &= item["holds"]
        items.append(item)
        rows.append([seed, pmf.offset, len(pmf.masses), item["mean"], item["variance"],
                     item["variance_holds"], item["worst_upper_gap"], item["worst_lower_gap"],
                     item["holds"]])
    payload = {"holds": all_hold, "samples": items}
    return (EXIT_OK if all_hold else EXIT_FAIL), payload, header, rows


def sweep_item(pmf: DiscretePMF) -> dict:
    """Tail domination at every integer threshold plus the variance bound."""
    mu = distributions.mean(pmf)
    worst_up = worst_lo = -math.inf
    if mu > 0:
        for j in range(pmf.lower, pmf.upper + 1):
            if j >= mu:
                gap = distributions.survival(pmf, j) - bounds.theorem1_upper(mu, j - mu)
                worst_up = max(worst_up, gap)
            if j <= mu:
                gap = distributions.cdf(pmf, j) - bounds.theorem1_lower(mu, mu - j)
                worst_lo = max(worst_lo, gap)
    var = distributions.variance(pmf)
    var_ok = var <= mu + 1e-12
    holds = var_ok and worst_up <= DOMINATION_TOL and worst_lo <= DOMINATION_TOL
    return {"offset": pmf.offset, "size": len(pmf.masses), "mean": mu, "variance": var,
            "variance_holds": var_ok,
            "worst_upper_gap": worst_up if math.isfinite(worst_up) else None,
            "worst_lower_gap": worst_lo if math.isfinite(worst_lo) else None,
            "holds": holds}


# -- output ------------------------------------------------------------------

def render(fmt: str, payload, header, rows, config: dict) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()
    doc = {"config": config, "report": payload}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_output(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="PMF or body JSON file ('-' for stdin)")
    common.add_argument("--mean", type=float, help="mean for mean-only bound mode")
    common.add_argument("--t-grid", type=_float_list, help="comma-separated thresholds")
    common.add_argument("--c", type=_float_list, help="comma-separated Johnson constants")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--output", help="output path (written atomically)")

    ap = argparse.ArgumentParser(prog="ulc-bounds",
                                 description="Concentration bounds for ultra log-concave pmfs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="log-concavity and ULC predicates")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("bound", parents=[common], help="tail bound table")
    p.set_defaults(func=cmd_bound)
    p = sub.add_parser("verify-lemma", parents=[common],
                       help="MGF comparison sweep over truncated Poisson extremizers")
    p.add_argument("--p", type=_float_list, help="tilts p")
    p.add_argument("--k", type=_int_list, help="lower support endpoints")
    p.add_argument("--l", type=_int_list, help="upper support endpoints")
    p.add_argument("--degenerate", action="store_true", help="only k = l (point masses)")
    p.set_defaults(func=cmd_verify_lemma)
    p = sub.add_parser("intrinsic", parents=[common], help="intrinsic volume report")
    p.set_defaults(func=cmd_intrinsic)
    p = sub.add_parser("compare", parents=[common], help="theorem 1 vs Johnson's bound")
    p.set_defaults(func=cmd_compare)
    p = sub.add_parser("sweep", parents=[common], help="seeded random ULC domination sweep")
    p.add_argument("--max-support", type=int, default=40)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("ULC_BOUNDS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    args = ap.parse_args(argv)
    log.info("running %s with %s", args.command, _config(args))
    try:
        status, payload, header, rows = args.func(args)
    except (ConfigError, PMFError, BodyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    write_output(render(args.format, payload, header, rows, _config(args)), args.output)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
