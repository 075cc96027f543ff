"""Command-line entry point: ``sharedcache plan|bounds|simulate|rates|sweep``.

Every command reads a JSON config holding the system description (see
:func:`sharedcache.model.system_from_dict`) and optionally any of the
command options below; flags given on the command line win. Results go to
``--out`` or stdout. Failures print a JSON object on stderr and exit
non-zero (2 for invalid input, 1 for a failed run).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from .delivery import SCHEMES, plan_delivery, predicted_count_thm3, worst_case_count
from .ecc import CodeTableMiss, UnsupportedCode
from .indexcoding import ALPHA_LIMIT, KAPPA_LIMIT, compute_bounds
from .model import ConfigError, binomial, system_from_dict
from .sim import (
    EXHAUSTIVE_DEMAND_LIMIT,
    ChannelConfig,
    Sampled,
    convex_envelope,
    demand_sweep,
    optimal_ecc_worst_rate,
    rate_bounds,
    run_session,
)

COMMANDS = ("plan", "bounds", "simulate", "rates", "sweep")

# option name -> (type check, default)
OPTIONS = {
    "scheme": (str, "improved"),
    "delta": (int, 0),
    "code_delta": (int, None),
    "errors": (str, "exhaustive"),
    "seed": (int, 0),
    "out": (str, None),
    "skip_oracles": (bool, False),
    "alpha_limit": (int, ALPHA_LIMIT),
    "kappa_limit": (int, KAPPA_LIMIT),
    "sweep": (str, "exhaustive"),
    "demand_limit": (int, EXHAUSTIVE_DEMAND_LIMIT),
}


class RunError(Exception):
    """A run that completed but did not meet its post-conditions."""

    def __init__(self, message: str, detail: dict | None = None):
        super().__init__(message)
        self.detail = detail or {}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sharedcache", description="Shared-cache coded caching toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON system/run config")
        p.add_argument("--scheme", choices=SCHEMES)
        p.add_argument("--delta", type=int, help="corrupted packets the channel may inject")
        p.add_argument("--code-delta", type=int, dest="code_delta", help="errors the code is built for (default: --delta)")
        p.add_argument("--errors", help="exhaustive or random:N")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--skip-oracles", action="store_true", default=None, dest="skip_oracles")
        p.add_argument("--alpha-limit", type=int, dest="alpha_limit")
        p.add_argument("--kappa-limit", type=int, dest="kappa_limit")
        p.add_argument("--sweep", help="demand source for 'sweep': exhaustive or sampled:N")
        p.add_argument("--demand-limit", type=int, dest="demand_limit")
    return ap


def load_run_config(path: Path, args: argparse.Namespace) -> tuple:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    cfg, assoc, demands = system_from_dict(raw, extra_fields=OPTIONS)
    opts = {}
    for key, (kind, default) in OPTIONS.items():
        value = getattr(args, key, None)
        if value is None:
            value = raw.get(key, default)
        if value is not None:
            if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
                raise ConfigError(key, f"expected an integer, got {value!r}")
            if not isinstance(value, kind):
                raise ConfigError(key, f"expected {kind.__name__}, got {value!r}")
        opts[key] = value
    if opts["scheme"] not in SCHEMES:
        raise ConfigError("scheme", f"expected one of {SCHEMES}")
    for key in ("delta", "seed", "alpha_limit", "kappa_limit", "demand_limit"):
        if opts[key] < 0:
            raise ConfigError(key, "must be non-negative")
    if opts["code_delta"] is not None and opts["code_delta"] < 0:
        raise ConfigError("code_delta", "must be non-negative")
    return cfg, assoc, demands, opts


def _need_demands(demands):
    if demands is None:
        raise ConfigError("demands", "this command needs a demand vector")
    return demands


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_plan(cfg, assoc, demands, opts) -> None:
    plan = plan_delivery(opts["scheme"], cfg, assoc, _need_demands(demands))
    lines = plan.log_lines()
    doc = plan.to_json()
    doc["rate"] = str(plan.rate)
    doc["log"] = lines
    _emit(_dump(doc), opts["out"])
    for line in lines:
        print(line, file=sys.stderr)


def cmd_bounds(cfg, assoc, demands, opts) -> None:
    report = compute_bounds(
        cfg, assoc, _need_demands(demands), not opts["skip_oracles"], opts["alpha_limit"], opts["kappa_limit"]
    )
    if report.skipped and not report.bounds_meet and not opts["skip_oracles"]:
        raise RunError(
            "oracle limit exceeded while the bounds differ; raise the limits or pass --skip-oracles",
            {"bounds": report.to_json()},
        )
    _emit(_dump(report.to_json()), opts["out"])


def cmd_simulate(cfg, assoc, demands, opts) -> None:
    channel = ChannelConfig.parse(opts["delta"], opts["errors"])
    report = run_session(
        cfg,
        assoc,
        _need_demands(demands),
        opts["scheme"],
        channel,
        opts["seed"],
        code_delta=opts["code_delta"],
        run_oracles=False,
    )
    doc = report.to_json()
    _emit(_dump(doc), opts["out"])
    if not report.ok:
        raise RunError(
            f"{report.patterns_failed} of {report.patterns_tested} error patterns were not decoded",
            {"failures": doc["failures"]},
        )


def rate_rows(cfg, assoc, demands, scheme: str, delta: int) -> list[dict]:
    coded = dict(optimal_ecc_worst_rate(cfg, assoc, delta))
    rows = []
    for t in range(1, cfg.num_caches + 1):
        gamma = Fraction(t, cfg.num_caches)
        sub = binomial(cfg.num_caches, t)
        lo, hi = rate_bounds(coded[gamma])
        row = {
            "gamma": str(gamma),
            "rate_uncoded": str(Fraction(worst_case_count(cfg, assoc, t), sub)),
            "rate_coded": str(lo),
            "rate_coded_upper": str(hi),
            "scheme": scheme,
            "delta": delta,
            "sc_count": "",
            "improved_count": "",
            "thm3_predicted": "",
            "improved_rate": "",
            "row": "point",
        }
        if demands is not None:
            cfg_t = cfg.with_t(t)
            sc = len(plan_delivery("sc", cfg_t, assoc, demands))
            imp = len(plan_delivery("improved", cfg_t, assoc, demands))
            row.update(
                sc_count=sc,
                improved_count=imp,
                thm3_predicted=predicted_count_thm3(cfg_t, assoc, demands),
                improved_rate=str(Fraction(imp, sub)),
            )
        rows.append(row)
    return rows


RATE_COLUMNS = (
    "gamma", "rate_uncoded", "rate_coded", "rate_coded_upper", "scheme", "delta",
    "sc_count", "improved_count", "thm3_predicted", "improved_rate", "row",
)


def cmd_rates(cfg, assoc, demands, opts) -> None:
    rows = rate_rows(cfg, assoc, demands, opts["scheme"], opts["delta"])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RATE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    # envelope vertices; the coded series uses the achievable (upper) end
    for series, column in (("uncoded", "rate_uncoded"), ("coded", "rate_coded_upper")):
        env = convex_envelope([(Fraction(r["gamma"]), Fraction(r[column])) for r in rows])
        for x, y in env.vertices:
            blank = dict.fromkeys(RATE_COLUMNS, "")
            blank.update(gamma=str(x), scheme=opts["scheme"], delta=opts["delta"], row=f"envelope_{series}")
            blank["rate_uncoded" if series == "uncoded" else "rate_coded"] = str(y)
            writer.writerow(blank)
    _emit(buf.getvalue(), opts["out"])


def cmd_sweep(cfg, assoc, demands, opts) -> None:
    spec = opts["sweep"]
    if spec == "exhaustive":
        source = "exhaustive"
    else:
        head, _, tail = spec.partition(":")
        if head != "sampled" or not tail.isdigit() or int(tail) < 1:
            raise ConfigError("sweep", f"expected 'exhaustive' or 'sampled:N', got {spec!r}")
        source = Sampled(int(tail), opts["seed"])
    stats = demand_sweep(cfg, assoc, source, opts["scheme"], opts["demand_limit"])
    doc = stats.to_json()
    doc["source"] = spec
    doc["worst_case_formula"] = worst_case_count(cfg, assoc)
    _emit(_dump(doc), opts["out"])


HANDLERS = {
    "plan": cmd_plan,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "rates": cmd_rates,
    "sweep": cmd_sweep,
}


def _fail(kind: str, message: str, code: int, **extra) -> int:
    err = {"error": kind, "message": message}
    err.update(extra)
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, assoc, demands, opts = load_run_config(args.config, args)
        HANDLERS[args.command](cfg, assoc, demands, opts)
    except ConfigError as exc:
        return _fail("config", str(exc), 2, field=exc.field)
    except (UnsupportedCode, CodeTableMiss) as exc:
        return _fail("code", str(exc), 1)
    except RunError as exc:
        return _fail("run", str(exc), 1, **exc.detail)
    except ValueError as exc:
        return _fail("value", str(exc), 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
