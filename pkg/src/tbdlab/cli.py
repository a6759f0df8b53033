"""Command-line entry point: ``tbdlab {bound,verify,simulate,experiment}``.

Options can come from ``--config FILE`` (a JSON object keyed by option
name, dashes or underscores) and from flags; flags win. Results go to stdout
or, with ``--output``, to a file written atomically (csv and plotdata also
get a ``<output>.json`` sidecar with the full record). Exit status: 0 on
success, 1 when ``verify`` finds a violation, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Optional

import numpy as np

from . import bounds, exactcheck, harness, processes
from .graphs import load_pattern, pattern_stats

SCHEMA_VERSION = 1
MAX_REMOVAL_N = 64


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits and insertion-ordered keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool, str, np.number)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "to_dict"):
        return dumps(obj.to_dict(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)) and any(isinstance(v, (dict, list, tuple)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}")
    elif isinstance(obj, (list, tuple)):
        yield prefix, " ".join(_cell(v) for v in obj)
    else:
        yield prefix, _cell(obj)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v)).strip('"')
    return "" if v is None else str(v)


def to_csv(result: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = result.get("csv_rows")
    if rows:
        w.writerow(list(rows[0].keys()))
        for r in rows:
            w.writerow([_cell(v) for v in r.values()])
    else:
        w.writerow(["key", "value"])
        for k, v in _flatten({k: v for k, v in result.items() if k != "plot"}):
            w.writerow([k, v])
    return buf.getvalue()


def to_plotdata(result: dict) -> str:
    series = result.get("plot")
    if not series:
        raise ConfigError(f"plotdata output is not available for {result.get('command')!r}")
    lines = []
    for name, pts in series.items():
        lines.append(f"# {name}")
        lines.extend(f"{_cell(float(x))} {_cell(float(y))}" for x, y in pts)
        lines.append("")
    return "\n".join(lines)


def render(result: dict, fmt: str) -> str:
    if fmt == "json":
        body = {k: v for k, v in result.items() if k not in ("csv_rows", "plot")}
        return dumps(body) + "\n"
    if fmt == "csv":
        return to_csv(result)
    if fmt == "plotdata":
        return to_plotdata(result)
    raise ConfigError(f"unknown format {fmt!r}")


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text) -> list:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _add_common(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), help="JSON file of option values; flags override it")
    p.add_argument("--seed", type=int, default=d(0), help="master seed (64-bit)")
    p.add_argument("--parallelism", type=int, default=d(1), help="worker processes")
    p.add_argument("--output", default=d(None), help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("json", "csv", "plotdata"), default=d("json"), help="output format")


def build_parser(suppress: bool = False) -> argparse.ArgumentParser:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="tbdlab", description="Typical bounded differences toolkit", formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="evaluate a closed-form tail bound", formatter_class=fmt)
    b.add_argument("--formula", choices=("bdi", "tbdi", "bernoulli", "bennett", "truncation", "janson"), default=d("tbdi"))
    b.add_argument("--N", type=int, default=d(None), help="broadcast scalar profile entries to N coordinates")
    b.add_argument("--c", default=d(None), help="typical Lipschitz constants (comma list or scalar)")
    b.add_argument("--d", default=d(None), help="worst-case Lipschitz constants (defaults to c)")
    b.add_argument("--gamma", default=d("1"), help="compensation factors")
    b.add_argument("--p", default=d(None), help="per-coordinate probabilities for the 0-1 bounds")
    b.add_argument("--q", default=d(None), help="lower bounds on outcome probabilities (two-sided errors)")
    b.add_argument("--t", type=float, default=d(None), help="deviation")
    b.add_argument("--gamma-fail", type=float, default=d(None), help="P(not Gamma), for the bad-event budget")
    b.add_argument("--two-valued", action="store_true", default=d(False), help="binary coordinates (factor 4)")
    b.add_argument("--two-sided", action="store_true", default=d(False), help="use the two-sided error terms")
    b.add_argument("--asymmetric", action="store_true", default=d(False))
    b.add_argument("--monotone-bad-prob", type=float, default=d(None), help="P(B) for the monotone refinement")
    b.add_argument("--s", type=float, default=d(None), help="global range bound for the truncation shift")
    b.add_argument("--monotone", action="store_true", default=d(False), help="local monotonicity (no shift)")
    b.add_argument("--mu", type=float, default=d(None), help="mean (janson)")
    b.add_argument("--delta", type=float, default=d(None), help="pair-correlation term (janson)")
    _add_common(b, suppress)

    v = sub.add_parser("verify", help="run an exact verification suite", formatter_class=fmt)
    v.add_argument("--suite", choices=("product-spaces", "martingales", "equivalence"), default=d("product-spaces"))
    v.add_argument("--instances", type=int, default=d(1000), help="random spaces (or paired runs for equivalence)")
    v.add_argument("--pattern", action="append", default=d(None), help="pattern for the equivalence suite (default K3)")
    v.add_argument("--alpha", type=float, default=d(1e-3), help="chi-square significance for equivalence")
    _add_common(v, suppress)

    s = sub.add_parser("simulate", help="run a random graph process", formatter_class=fmt)
    s.add_argument("--variant", choices=processes.VARIANTS, default=d("reverse_addition"))
    s.add_argument("--pattern", action="append", default=d(None), help="pattern name or file; repeat for a family (default K3)")
    s.add_argument("--n", type=int, default=d(64))
    s.add_argument("--m-cap", type=int, default=d(None), help="stop after this many traversed pairs")
    s.add_argument("--truncate", action="store_true", default=d(False), help="truncate at n^(2-1/m2) (ln n)^2")
    s.add_argument("--p-cap", type=float, default=d(None), help="birth-time cutoff")
    s.add_argument("--replications", type=int, default=d(1))
    s.add_argument("--max-removal-n", type=int, default=d(MAX_REMOVAL_N), help="size cap for the removal variants")
    s.add_argument("--accepted", action="store_true", default=d(False), help="include run-length encoded decisions")
    _add_common(s, suppress)

    e = sub.add_parser("experiment", help="run a Monte Carlo experiment", formatter_class=fmt)
    e.add_argument("name", choices=("triangle", "reverse", "coupling", "lipschitz", "equivalence"))
    e.add_argument("--pattern", action="append", default=d(None), help="pattern name or file (default K3)")
    e.add_argument("--n", type=int, default=d(None), help="vertex count (triangle 200, coupling 100, lipschitz 60, equivalence 5)")
    e.add_argument("--p", type=float, default=d(None), help="edge probability (triangle)")
    e.add_argument("--p-exponent", type=float, default=d(-0.55), help="p = n^x when --p is absent (triangle)")
    e.add_argument("--eps", type=float, default=d(0.1), help="codegree cap exponent (triangle)")
    e.add_argument("--t-rel", type=float, default=d(0.5), help="relative deviation (triangle)")
    e.add_argument("--real-threshold", action="store_true", default=d(False), help="do not round the codegree cap down")
    e.add_argument("--trials", type=int, default=d(None), help="replications (triangle 2000, reverse 300, coupling 1000, lipschitz 1000, equivalence 10000)")
    e.add_argument("--grid", default=d("64,128,256,512"), help="n values (reverse)")
    e.add_argument("--no-truncate", action="store_true", default=d(False), help="run to the end (reverse)")
    e.add_argument("--m", type=int, default=d(None), help="truncation length (coupling, lipschitz); default n^(2-1/m2)(ln n)^2")
    _add_common(e, suppress)
    return parser


def resolve(argv) -> argparse.Namespace:
    """Defaults, then the config file, then explicit flags."""
    args = build_parser().parse_args(argv)
    explicit = vars(build_parser(suppress=True).parse_args(argv))
    merged = vars(args).copy()
    cfg_path = explicit.get("config")
    if cfg_path:
        try:
            with open(cfg_path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file {cfg_path!r} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config file {cfg_path!r}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, val in data.items():
            k = key.replace("-", "_")
            if k not in merged or k in ("command", "config"):
                raise ConfigError(f"unknown config key {key!r} for {args.command}")
            merged[k] = val
    merged.update(explicit)
    ns = argparse.Namespace(**merged)
    if ns.parallelism < 1:
        raise ConfigError("parallelism must be at least 1")
    if not 0 <= ns.seed < 2**64:
        raise ConfigError("seed must fit in 64 unsigned bits")
    return ns


@contextmanager
def executor(parallelism: int, jobs: int = 1000):
    if parallelism <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        chunk = max(1, jobs // (8 * parallelism))
        yield lambda fn, it: pool.map(fn, it, chunksize=chunk)


def _patterns(ns) -> tuple:
    specs = ns.pattern or ["K3"]
    if isinstance(specs, str):
        specs = [specs]
    try:
        return tuple(load_pattern(s) for s in specs)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc.args[0]) if exc.args else str(exc)) from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _broadcast(name, text, N):
    if text is None:
        return None
    vals = _floats(text)
    if len(vals) == 1 and N is not None:
        vals = vals * N
    if N is not None and len(vals) != N:
        raise ConfigError(f"--{name} has {len(vals)} entries, expected {N}")
    return vals


def cmd_bound(ns) -> tuple:
    if ns.formula == "janson":
        if ns.mu is None or ns.delta is None:
            raise ConfigError("janson needs --mu and --delta")
        value = bounds.janson_zero_bound(ns.mu, ns.delta)
        res = {"formula": "janson", "mu": ns.mu, "delta": ns.delta, "value": value}
        return res, 0
    if ns.t is None:
        raise ConfigError("--t is required")
    if ns.c is None:
        raise ConfigError("--c is required")
    N = ns.N
    c = _broadcast("c", ns.c, N)
    N = len(c)
    try:
        prof = bounds.LipschitzProfile(
            c=c,
            d=_broadcast("d", ns.d, N) or c,
            gamma=_broadcast("gamma", ns.gamma, N),
            p=_broadcast("p", ns.p, N),
            q=_broadcast("q", ns.q, N),
        )
        errors = bounds.two_sided_error(prof) if ns.two_sided else None
        if ns.formula == "bdi":
            tb = bounds.bdi_bound(prof, ns.t)
        elif ns.formula == "tbdi":
            tb = bounds.tbdi_bound(prof, ns.t, gamma_fail=ns.gamma_fail, two_valued=ns.two_valued, errors=errors)
        elif ns.formula in ("bernoulli", "bennett"):
            tb = bounds.tbdi_bernoulli_bound(
                prof, ns.t, bennett=ns.formula == "bennett", asymmetric=ns.asymmetric,
                monotone_bad_prob=ns.monotone_bad_prob, gamma_fail=ns.gamma_fail, errors=errors,
            )
        else:
            if ns.s is None or ns.gamma_fail is None:
                raise ConfigError("truncation needs --s and --gamma-fail")
            tb = bounds.truncation_bound(prof, ns.t, ns.s, ns.gamma_fail, monotone=ns.monotone, two_valued=ns.two_valued)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = {"formula": ns.formula, "N": N, "t": ns.t}
    res.update(tb.to_dict())
    return res, 0


def cmd_verify(ns) -> tuple:
    if ns.instances < 1:
        raise ConfigError("instances must be at least 1")
    if ns.suite == "equivalence":
        pats = _patterns(ns)
        exact_add = harness.exact_addition_distribution(4, pats)
        exact_rem = harness.exact_removal_distribution(4, pats)
        with executor(ns.parallelism, ns.instances) as mfn:
            chi = harness.equivalence_chi2(5, pats, ns.instances, seed=ns.seed, map_fn=mfn)
        exact_ok = exact_add == exact_rem
        chi_ok = chi["p_value"] >= ns.alpha
        res = {
            "suite": "equivalence",
            "exact_n4_addition": {str(k): str(v) for k, v in exact_add.items()},
            "exact_n4_removal": {str(k): str(v) for k, v in exact_rem.items()},
            "exact_match": exact_ok,
            "chi2_n5": chi,
            "alpha": ns.alpha,
            "violations": int(not exact_ok) + int(not chi_ok),
        }
        return res, 0 if exact_ok and chi_ok else 1
    lemmas = ns.suite == "martingales"
    with executor(ns.parallelism, ns.instances) as mfn:
        out = exactcheck.run_suite(ns.instances, ns.seed, lemmas=lemmas, map_fn=mfn)
    res = {
        "suite": ns.suite,
        "instances": out.instances,
        "checks": out.checks,
        "violations": len(out.violations),
        "violation_records": out.violations[:20],
    }
    return res, 0 if out.ok else 1


def _simulate_one(i: int, cfg: processes.ProcessConfig, accepted: bool) -> dict:
    return processes.run(cfg.with_(replication_index=i)).to_record(include_accepted=accepted)


def cmd_simulate(ns) -> tuple:
    pats = _patterns(ns)
    if ns.variant in ("reverse_removal", "h_removal") and ns.n > ns.max_removal_n:
        raise ConfigError(f"{ns.variant} is capped at n <= {ns.max_removal_n}; raise --max-removal-n to override")
    if ns.replications < 1:
        raise ConfigError("replications must be at least 1")
    m_cap = ns.m_cap
    if ns.truncate:
        if m_cap is not None:
            raise ConfigError("--truncate and --m-cap are exclusive")
        m_cap = processes.truncation_length(ns.n, pats)
    try:
        cfg = processes.ProcessConfig(
            n=ns.n, patterns=pats, variant=ns.variant, m_cap=m_cap, p_cap=ns.p_cap, seed=ns.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if ns.variant == "h_removal" and len(pats) != 1:
        raise ConfigError("h_removal takes a single pattern")
    from functools import partial

    with executor(ns.parallelism, ns.replications) as mfn:
        runs = list(mfn(partial(_simulate_one, cfg=cfg, accepted=ns.accepted), range(ns.replications)))
    finals = np.array([r["final_edges"] for r in runs], dtype=float)
    res = {
        "variant": ns.variant,
        "patterns": [str(H) for H in pats],
        "n": ns.n,
        "m_cap": m_cap,
        "p_cap": ns.p_cap,
        "replications": ns.replications,
        "mean_final_edges": float(finals.mean()),
        "std_final_edges": float(finals.std(ddof=1)) if finals.size > 1 else 0.0,
        "runs": runs,
        "csv_rows": [{k: v for k, v in r.items() if k != "accepted_rle"} for r in runs],
        "plot": {"final_edges": [(r["seed"][1], r["final_edges"]) for r in runs]},
    }
    return res, 0


def cmd_experiment(ns) -> tuple:
    pats = _patterns(ns)
    name = ns.name
    trials = ns.trials
    if trials is not None and trials < 1:
        raise ConfigError("trials must be at least 1")
    if name == "triangle":
        n = ns.n or 200
        p = ns.p if ns.p is not None else n ** ns.p_exponent
        trials = trials or 2000
        try:
            cfg = harness.TriangleConfig(
                n=n, p=p, eps=ns.eps, t_rel=ns.t_rel, trials=trials, seed=ns.seed,
                integer_threshold=not ns.real_threshold,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        with executor(ns.parallelism, trials) as mfn:
            rep = harness.triangle_experiment(cfg, map_fn=mfn)
        return rep, 0
    if name == "reverse":
        grid = tuple(_ints(ns.grid))
        trials = trials or 300
        try:
            cfg = harness.ReverseConfig(patterns=pats, grid=grid, trials=trials, seed=ns.seed, truncate=not ns.no_truncate)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        with executor(ns.parallelism, trials) as mfn:
            rep = harness.reverse_process_experiment(cfg, map_fn=mfn)
        rows = []
        for r in rep["rows"]:
            for stat in ("m", "mean", "std", "std_over_sqrt_mean", "log_window", "min", "max"):
                rows.append({"n": r["n"], "statistic": stat, "value": r[stat]})
        rep["csv_rows"] = rows
        rep["plot"] = {"log_n_vs_log_mean": rep["fit"]["points"]} if rep["fit"] else {}
        return rep, 0
    if name == "coupling":
        if len(pats) < 1:
            raise ConfigError("coupling needs a pattern")
        n = ns.n or 100
        trials = trials or 1000
        try:
            with executor(ns.parallelism, trials) as mfn:
                rep = harness.coupling_experiment(pats, n, trials, seed=ns.seed, m=ns.m, map_fn=mfn)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return rep, 0
    if name == "lipschitz":
        if len(pats) != 1:
            raise ConfigError("lipschitz takes a single pattern")
        n = ns.n or 60
        trials = trials or 1000
        try:
            with executor(ns.parallelism, trials) as mfn:
                rep = harness.lipschitz_sweep(pats[0], n, m=ns.m, sweeps=trials, seed=ns.seed, map_fn=mfn)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return rep, 0
    n = ns.n or 5
    if n > 6:
        raise ConfigError("the equivalence experiment runs the removal variant; keep n <= 6")
    trials = trials or 10000
    with executor(ns.parallelism, trials) as mfn:
        rep = harness.equivalence_chi2(n, pats, trials, seed=ns.seed, map_fn=mfn)
    return rep, 0


COMMANDS = {"bound": cmd_bound, "verify": cmd_verify, "simulate": cmd_simulate, "experiment": cmd_experiment}


def main(argv: Optional[list] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        ns = resolve(argv)
        result, status = COMMANDS[ns.command](ns)
        header = {"schema_version": SCHEMA_VERSION, "command": ns.command if ns.command != "experiment" else f"experiment {ns.name}"}
        header.update(result)
        text = render(header, ns.format)
    except ConfigError as exc:
        print(f"tbdlab: configuration error: {exc}", file=sys.stderr)
        return 2
    except exactcheck.EnumerationCapError as exc:
        print(f"tbdlab: cap exceeded: {exc}", file=sys.stderr)
        return 2
    if ns.output:
        write_atomic(ns.output, text)
        if ns.format != "json":
            # tabular formats drop nested fields, so keep the full record alongside
            write_atomic(ns.output + ".json", render(header, "json"))
        if ns.command == "bound":
            print(f"value {_cell(result.get('value'))} exponent {_cell(result.get('exponent', math.nan))}")
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
