"""idq: optimize, bound, gen, verify and sweep from the command line.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
``IDQ_WORKERS`` sets the worker count for verify and sweep.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from functools import partial

import numpy as np

from . import bounds, suites
from .construct import (
    double_quantize,
    geometric_quantizer,
    greedy_top_quantizer,
    map_quantizer,
    one_hot_quantizer,
    quantizer_entropy,
)
from .core import JointDistribution, mutual_information, quantized_mi
from .exact import GuardError, binary_dp_values, brute_force_quantizer, optimal_binary_quantizer
from .fileio import ChannelFile, ChannelFileError, digest, read_channel_file, write_channel_file
from .instances import (
    BmsHardSpec,
    KlPairSpec,
    bec_instance,
    bms_hard_instance,
    bsc_product_instance,
    dilute_to_beta,
    kl_pair_instance,
    map_vs_z_instance,
    mod4_information,
    mod4_instance,
    random_instance,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def run_report(command: list[str], results: dict, elapsed: float, seed=None, j=None) -> dict:
    return {
        "command": command,
        "digest": digest(j) if j is not None else None,
        "results": _jsonable(results),
        "timing": {"seconds": elapsed},
        "seed": seed,
    }


def _parse_method(spec: str) -> tuple[str, list[str]]:
    name, _, rest = spec.partition(":")
    args = [a for a in rest.split(",") if a] if rest else []
    return name, args


def _float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{what}: expected a number, got {text!r}") from None


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{what}: expected an integer, got {text!r}") from None


# -- optimize ------------------------------------------------------------------


def optimize(j: JointDistribution, method: str, M: int | None) -> dict:
    name, args = _parse_method(method)
    beta = mutual_information(j)
    plan = None

    def need_levels():
        if M is None:
            raise UsageError(f"method {name!r} needs --levels")
        if M < 1:
            raise UsageError("--levels must be at least 1")
        return M

    if name == "dp":
        if j.K != 2:
            raise UsageError(f"dp needs a binary input; this file has |X| = {j.K} (try brute)")
        q = optimal_binary_quantizer(j, need_levels()).quantizer
    elif name == "brute":
        q = brute_force_quantizer(j, need_levels()).quantizer
    elif name == "greedy":
        q = greedy_top_quantizer(j, need_levels())
    elif name == "map":
        if j.K != 2:
            raise UsageError("map needs a binary input")
        q = map_quantizer(j)
    elif name == "geometric":
        if len(args) != 1:
            raise UsageError("use geometric:ETA")
        if j.K != 2:
            raise UsageError("geometric needs a binary input (try onehot)")
        q, plan = geometric_quantizer(j, _float(args[0], "eta"))
    elif name == "onehot":
        if len(args) not in (1, 2):
            raise UsageError("use onehot:ETA or onehot:ETA,K")
        k = _int(args[1], "k") if len(args) == 2 else None
        q, plan = one_hot_quantizer(j, _float(args[0], "eta"), k)
    elif name == "double":
        if len(args) != 1:
            raise UsageError("use double:K")
        q = double_quantize(j, need_levels(), _int(args[0], "K"))
    else:
        raise UsageError(f"unknown method {name!r}")
    value = quantized_mi(j, q)
    out = {
        "method": method,
        "levels": q.num_levels,
        "occupied_levels": q.occupied,
        "labels": q.labels.tolist(),
        "mi": value,
        "I_XY": beta,
        "fraction": value / beta if beta > 0 else None,
        "output_entropy": quantizer_entropy(j, q),
    }
    if plan is not None:
        out["plan"] = plan.as_dict()
    return out


# -- bound -----------------------------------------------------------------------


def bound(K: int, M: int, beta: float | None, which: str) -> dict:
    name, args = _parse_method(which)

    def need_beta():
        if beta is None:
            raise UsageError(f"bound {name!r} needs --beta")
        return beta

    if name == "id2":
        if K != 2:
            raise UsageError("id2 is the binary bound; use idk for |X| > 2")
        return id_report(bounds.id2_bounds(M, need_beta()))
    if name == "idk":
        out = id_report(bounds.idK_bounds(M, K, need_beta()))
        if K > 2:
            value, best = bounds.idK_lower(M, K, beta)
            out.update(lower=value, best_k=best)
        return out
    if name == "dc":
        kt, improved = bounds.degrading_cost_bounds(K, M)
        return {
            "nu": bounds.nu(K),
            "kt_bound": kt,
            "improved": improved,
            "improved_valid": improved is not None,
            "vacuous": min(kt, improved if improved is not None else kt) >= math.log2(K),
        }
    if name == "sdpi":
        if len(args) != 1:
            raise UsageError("use sdpi:N")
        tight, relaxed = bounds.sdpi_bound(_int(args[0], "n"), M, need_beta())
        return {"tight": tight, "relaxed": relaxed}
    if name == "thm4":
        b = need_beta()
        out = {"upper": bounds.hard_family_upper(M, b), "vacuous": bounds.hard_family_upper(M, b) >= b}
        if b < 0.5:
            out["simplified"] = bounds.hard_family_shorthand(M, b)
            out["simplified_dominates"] = out["simplified"] >= out["upper"]
        return out
    if name == "budgets":
        if len(args) not in (1, 2):
            raise UsageError("use budgets:ETA or budgets:ETA,K")
        k = _int(args[1], "k") if len(args) == 2 else None
        lb = bounds.level_budgets(_float(args[0], "eta"), need_beta(), K, k)
        return {"Mbar2": lb.Mbar2, "MbarK": lb.MbarK, "Mtilde": lb.Mtilde}
    if name == "entcode":
        if len(args) != 1:
            raise UsageError("use entcode:ETA")
        return {"entropy": bounds.entropy_coding_bound(_float(args[0], "eta"), need_beta())}
    if name == "map":
        return {"lower": max(bounds.map_lower_bound(need_beta()), 0.0)}
    if name == "highsnr":
        lo, up = bounds.high_snr_bounds(need_beta())
        return {"lower": lo, "upper": up}
    raise UsageError(f"unknown bound {name!r}")


def id_report(rep: bounds.BoundReport) -> dict:
    out = rep.as_dict()
    out["best_lower"] = rep.best("lower")
    out["best_upper"] = rep.best("upper")
    return out


# -- gen ------------------------------------------------------------------------


def _need(ns, *names):
    missing = [n for n in names if getattr(ns, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"family {ns.family!r} needs {flags}")


def generate(ns) -> ChannelFile:
    fam = ns.family
    if fam == "bec":
        _need(ns, "beta")
        return ChannelFile(bec_instance(ns.beta), y_labels=["0", "1", "?"], meta={"family": fam, "beta": ns.beta})
    if fam == "bmshard":
        if ns.r is None:
            _need(ns, "beta")
            spec = BmsHardSpec.for_beta(ns.beta, ns.n_bins)
        else:
            spec = BmsHardSpec(ns.r, ns.n_bins)
        meta = {"family": fam, "r": spec.r, "n_bins": spec.n_bins, "beta_formula": spec.beta_formula}
        return ChannelFile(bms_hard_instance(spec), meta=meta)
    if fam == "mapz":
        _need(ns, "beta", "delta")
        return ChannelFile(
            map_vs_z_instance(ns.beta, ns.delta),
            y_labels=["0g", "1g", "0b", "1b"],
            meta={"family": fam, "beta": ns.beta, "delta": ns.delta},
        )
    if fam == "mod4":
        _need(ns, "delta")
        return ChannelFile(mod4_instance(ns.delta), meta={"family": fam, "delta": ns.delta})
    if fam == "klpair":
        _need(ns, "k", "T", "alpha")
        spec = KlPairSpec(ns.k, ns.T, ns.alpha)
        p, q, closed = kl_pair_instance(spec)
        # the pair is stored as a two-row channel with a uniform input
        j = JointDistribution([0.5, 0.5], np.vstack([p, q]))
        meta = {"family": fam, "k": ns.k, "T": ns.T, "alpha": ns.alpha, "closed_form": closed}
        return ChannelFile(j, x_labels=["P", "Q"], meta=meta)
    if fam == "bscprod":
        _need(ns, "n", "beta")
        return ChannelFile(bsc_product_instance(ns.n, ns.beta), meta={"family": fam, "n": ns.n, "beta": ns.beta})
    if fam == "random":
        _need(ns, "K", "N", "seed")
        j = random_instance(ns.K, ns.N, ns.seed, ns.dirichlet)
        meta = {"family": fam, "K": ns.K, "N": ns.N, "seed": ns.seed, "dirichlet": ns.dirichlet}
        return ChannelFile(j, meta=meta)
    if fam == "dilute":
        _need(ns, "channel", "beta")
        src = read_channel_file(ns.channel)
        meta = {"family": fam, "beta": ns.beta, "source": digest(src.joint)}
        return ChannelFile(dilute_to_beta(src.joint, ns.beta), x_labels=src.x_labels, meta=meta)
    raise UsageError(f"unknown family {fam!r}")


# -- sweep ----------------------------------------------------------------------


def _grid(ns) -> list[float]:
    given = [ns.values is not None, ns.linspace is not None, ns.logspace is not None]
    if sum(given) != 1:
        raise UsageError("give exactly one of --values, --linspace, --logspace")
    if ns.values is not None:
        return [_float(v, "--values") for v in ns.values.split(",") if v.strip()]
    a, b, n = ns.linspace or ns.logspace
    n = int(n)
    if n < 1:
        raise UsageError("grid needs at least one point")
    if ns.linspace:
        return np.linspace(a, b, n).tolist()
    if a <= 0 or b <= 0:
        raise UsageError("--logspace endpoints must be positive")
    return np.geomspace(a, b, n).tolist()


def _sweep_m(j: JointDistribution, m: float) -> dict:
    M = int(round(m))
    beta = mutual_information(j)
    if j.K == 2:
        value = float(binary_dp_values(j, M)[M - 1])
        lower = beta * bounds.f_lower(bounds.sandwich_argument(M, beta)) if beta > 0 else 0.0
    else:
        value = brute_force_quantizer(j, M).value
        lower = bounds.idK_lower(M, j.K, beta)[0] if 0 < beta <= math.log2(j.K) else 0.0
    upper = beta * bounds.f_upper(bounds.sandwich_argument(M, beta)) if beta > 0 else 0.0
    return {"M": M, "value": value, "beta": beta, "fraction": value / beta if beta else 0.0,
            "lower": lower, "upper": upper}


def _sweep_eta(j: JointDistribution, eta: float) -> dict:
    q, plan = geometric_quantizer(j, eta)
    value = quantized_mi(j, q)
    beta = mutual_information(j)
    return {"eta": eta, "levels": q.num_levels, "occupied": q.occupied, "value": value,
            "target": eta * beta, "fraction": value / beta if beta else 0.0}


def _sweep_beta(M: int, beta: float) -> dict:
    j = bec_instance(beta)
    value = optimal_binary_quantizer(j, M).value
    t = bounds.sandwich_argument(M, beta)
    return {"beta": beta, "M": M, "bec_value": value, "bec_fraction": value / beta,
            "lower": beta * bounds.f_lower(t), "upper": beta * bounds.f_upper(t),
            "hard_family_upper": bounds.hard_family_upper(M, beta),
            "map_lower": max(bounds.map_lower_bound(beta), 0.0)}


def _sweep_delta(delta: float) -> dict:
    j = mod4_instance(delta)
    two = brute_force_quantizer(j, 2).value
    four = brute_force_quantizer(j, 4).value
    return {"delta": delta, "I": mod4_information(delta), "I2": two, "I4": four,
            "superadditive": int(2 * two < four)}


def sweep(ns) -> list[dict]:
    grid = _grid(ns)
    if ns.axis in ("M", "eta"):
        if ns.channel is None:
            raise UsageError(f"sweep over {ns.axis} needs --channel")
        j = read_channel_file(ns.channel).joint
        if ns.axis == "M":
            if any(g < 1 or g != int(g) for g in grid):
                raise UsageError("M values must be positive integers")
            fn = partial(_sweep_m, j)
        else:
            if j.K != 2:
                raise UsageError("eta sweep runs the binary geometric quantizer; need |X| = 2")
            fn = partial(_sweep_eta, j)
    elif ns.axis == "beta":
        fn = partial(_sweep_beta, ns.levels or 2)
    else:
        fn = _sweep_delta
    return suites._map(fn, grid)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


# -- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idq", description="Mutual-information-preserving quantizers.")
    sub = p.add_subparsers(dest="cmd", required=True)

    o = sub.add_parser("optimize", help="quantize a channel file")
    o.add_argument("--channel", required=True, help="channel file (JSON)")
    o.add_argument("--levels", "-M", type=int, help="number of quantization levels M")
    o.add_argument("--method", default="dp",
                   help="dp | brute | greedy | map | geometric:ETA | onehot:ETA[,K] | double:K")

    b = sub.add_parser("bound", help="evaluate closed-form bounds")
    b.add_argument("--K", type=int, default=2, help="input alphabet size")
    b.add_argument("--levels", "-M", type=int, default=2)
    b.add_argument("--beta", type=float, help="I(X;Y) in bits")
    b.add_argument("--which", default="id2",
                   help="id2 | idk | dc | sdpi:N | thm4 | budgets:ETA[,K] | entcode:ETA | map | highsnr")

    g = sub.add_parser("gen", help="write an instance to a channel file")
    g.add_argument("family", choices=["bec", "bmshard", "mapz", "mod4", "klpair", "bscprod", "random", "dilute"])
    g.add_argument("--out", required=True)
    g.add_argument("--beta", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--r", type=float)
    g.add_argument("--n-bins", type=int, default=4096)
    g.add_argument("--k", type=int)
    g.add_argument("--T", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--n", type=int)
    g.add_argument("--K", type=int)
    g.add_argument("--N", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--dirichlet", type=float, default=1.0)
    g.add_argument("--channel", help="source file for dilute")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=sorted(suites.SUITES))
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--count", type=int, help="instances (suite default if omitted)")

    s = sub.add_parser("sweep", help="tabulate a quantity over a grid as CSV")
    s.add_argument("--axis", required=True, choices=["M", "beta", "eta", "delta"])
    s.add_argument("--values", help="comma-separated grid")
    s.add_argument("--linspace", nargs=3, type=float, metavar=("START", "STOP", "NUM"))
    s.add_argument("--logspace", nargs=3, type=float, metavar=("START", "STOP", "NUM"))
    s.add_argument("--channel", help="channel file for the M and eta axes")
    s.add_argument("--levels", "-M", type=int, help="fixed M for the beta axis (default 2)")
    s.add_argument("--out", help="CSV path (stdout if omitted)")

    for sp in (o, b, g, v, s):
        sp.add_argument("--json", action="store_true", help="print a JSON run report")
    return p


def _print_human(cmd: str, results: dict) -> None:
    for key, val in results.items():
        if key in ("labels", "plan", "entries", "failures", "rows"):
            continue
        print(f"{key}: {val}")
    if cmd == "bound" and "entries" in results:
        for e in results["entries"]:
            print(f"  {e['kind']:5s} {e['name']}: {e['value']!r}  ({e['source']})")
    if cmd == "optimize":
        labels = results["labels"]
        shown = " ".join(map(str, labels[:64]))
        if len(labels) > 64:
            shown += f" ... ({len(labels)} outputs, use --json for all)"
        print("labels:", shown)
    for f in results.get("failures", [])[:20]:
        print("FAIL", json.dumps(_jsonable(f)))


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    start = time.perf_counter()
    j, seed, status = None, None, EXIT_OK
    try:
        if ns.cmd == "optimize":
            j = read_channel_file(ns.channel).joint
            results = optimize(j, ns.method, ns.levels)
        elif ns.cmd == "bound":
            results = bound(ns.K, ns.levels, ns.beta, ns.which)
        elif ns.cmd == "gen":
            if ns.family == "random" and ns.seed is None:
                raise UsageError("random needs an explicit --seed")
            cf = generate(ns)
            write_channel_file(ns.out, cf)
            j, seed = cf.joint, ns.seed
            results = {"family": ns.family, "path": ns.out, "K": j.K, "N": j.N,
                       "I_XY": mutual_information(j), "meta": cf.meta}
        elif ns.cmd == "verify":
            seed = ns.seed
            fn = suites.SUITES[ns.suite]
            res = fn(ns.seed, ns.count) if ns.count is not None else fn(ns.seed)
            results = res.as_dict()
            status = EXIT_OK if res.ok else EXIT_FAIL
        else:
            rows = sweep(ns)
            text = rows_to_csv(rows)
            if ns.out:
                with open(ns.out, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
            elif not ns.json:
                sys.stdout.write(text)
            results = {"axis": ns.axis, "points": len(rows), "out": ns.out, "rows": rows}
    except (UsageError, ChannelFileError, GuardError, ValueError, OSError) as exc:
        print(f"idq {ns.cmd}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = time.perf_counter() - start
    if ns.json:
        print(json.dumps(run_report(["idq", *argv], results, elapsed, seed, j), indent=1))
    elif ns.cmd != "sweep" or ns.out:
        _print_human(ns.cmd, results)
    return status


if __name__ == "__main__":
    sys.exit(main())
