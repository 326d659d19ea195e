"""``mogbench`` command line.

Subcommands::

    generate-scene   write one seeded scene
    run opo|apt|pta  run a protocol and write its JSON-lines log
    calibrate-sop    measure the single-object baseline
    ar               availability rate over fresh scenes
    metrics          summarize a log into a metrics report
    ingest           convert an external CSV trial log into a native log
    report           render a saved JSON report as a table or CSV

Failures print one line ``error: <code>: <message>`` on stderr and exit
with status 1 (2 for usage errors).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Sequence

import yaml

from .config import RunConfig, config_digest, config_from_mapping
from .errors import ConfigError, MogBenchError
from .logio import dumps_log, ingest_external, parse_log, report, report_from_json, report_to_json
from .metrics import summarize
from .protocols import (
    RunLog,
    run_apt_repeated,
    run_availability,
    run_opo,
    run_pta_repeated,
    sop_calibration,
)
from .scene import generate_scene, scene_to_text


class UsageError(MogBenchError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser, *, counts: bool = True) -> None:
    p.add_argument("--config", help="YAML run configuration; flags override its values")
    p.add_argument("--seed", type=int, help="master seed (required here or in --config)")
    p.add_argument("--object", help="catalog label, e.g. cube_m_s")
    p.add_argument("--scenario", choices=["surface", "pile"])
    p.add_argument("--scene-size", type=int, dest="scene_size")
    p.add_argument("--bin", type=float, nargs=2, metavar=("W", "H"))
    p.add_argument("--hand", help="builtin hand name")
    p.add_argument("--capacity-override", type=int, dest="capacity_override")
    p.add_argument("--slip-prob", type=float, dest="slip_prob")
    p.add_argument("--jitter", type=float, dest="jitter_frac")
    p.add_argument("--planner", choices=["auto", "cluster", "grid"])
    p.add_argument("--count-policy", choices=["greedy", "conservative", "fixed"], dest="count_policy")
    p.add_argument("--fixed-p", type=int, dest="fixed_p")
    p.add_argument("--trials", type=int)
    p.add_argument("--max-rounds", type=int, dest="max_rounds")
    p.add_argument("--sop-trials", type=int, dest="sop_trials")
    if counts:
        p.add_argument("--p", type=int)
        p.add_argument("--n-target", type=int, dest="n_target")
    p.add_argument("-o", "--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mogbench", description="Multi-object grasping benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate-scene", help="write one seeded scene")
    _add_config_flags(g, counts=False)

    r = sub.add_parser("run", help="run a protocol and write its log")
    r.add_argument("protocol", choices=["opo", "apt", "pta"])
    _add_config_flags(r)
    r.add_argument("--jobs", type=int, default=1, help="worker processes")

    c = sub.add_parser("calibrate-sop", help="measure the single-object baseline")
    _add_config_flags(c, counts=False)

    a = sub.add_parser("ar", help="availability rate of k-object grasps")
    _add_config_flags(a, counts=False)
    a.add_argument("--k", type=int, dest="p", help="objects per grasp")

    m = sub.add_parser("metrics", help="summarize a log")
    m.add_argument("log")
    m.add_argument("--format", choices=["text-table", "csv", "json"], default="text-table")
    m.add_argument("-o", "--output")

    i = sub.add_parser("ingest", help="convert an external CSV log")
    i.add_argument("csv")
    i.add_argument("--protocol", choices=["opo", "apt", "pta"])
    i.add_argument("--map", action="append", default=[], metavar="CANONICAL=COLUMN", help="column rename")
    i.add_argument("-o", "--output")

    rp = sub.add_parser("report", help="render a JSON report")
    rp.add_argument("report")
    rp.add_argument("--format", choices=["text-table", "csv"], default="text-table")
    rp.add_argument("-o", "--output")
    return parser


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def config_from_args(args: argparse.Namespace, protocol: str) -> RunConfig:
    data: dict[str, Any] = {}
    if args.config:
        loaded = yaml.safe_load(_read(args.config))
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError("configuration must be a key-value mapping")
        data = dict(loaded or {})
    data["protocol"] = protocol
    for key in ("seed", "object", "scenario", "scene_size", "trials", "max_rounds", "sop_trials", "output", "p", "n_target"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if args.bin is not None:
        data["bin"] = list(args.bin)
    hand = data.get("hand")
    if args.hand is not None:
        hand = args.hand
    extra = {k: getattr(args, k) for k in ("capacity_override", "slip_prob") if getattr(args, k) is not None}
    if extra:
        hand = {"base": hand or "trifinger"} if hand is None or isinstance(hand, str) else dict(hand)
        hand.update(extra)
    if hand is not None:
        data["hand"] = hand
    if args.jitter_frac is not None:
        data["time"] = {**(data.get("time") or {}), "jitter_frac": args.jitter_frac}
    planner = {
        k: v
        for k, v in (("kind", args.planner), ("count_policy", args.count_policy), ("fixed_p", args.fixed_p))
        if v is not None
    }
    if planner:
        data["planner"] = {**(data.get("planner") or {}), **planner}
    return config_from_mapping(data)


def _log_for(cfg: RunConfig, **fields) -> RunLog:
    return RunLog(cfg.protocol, cfg.seed, cfg.digest(), cfg.canonical(), **fields)


def _cmd_generate(args) -> int:
    cfg = config_from_args(args, "opo")
    scene = generate_scene(cfg.spec, cfg.scene_size, cfg.scenario, cfg.bin, cfg.seed)
    _write(cfg.output, scene_to_text(scene))
    return 0


def _cmd_run(args) -> int:
    cfg = config_from_args(args, args.protocol)
    env = cfg.env()
    if cfg.protocol == "opo":
        log = _log_for(cfg, trials=tuple(run_opo(env, cfg.p, args.jobs)), target=cfg.p)
    else:
        runs = run_apt_repeated(env, cfg.n_target, args.jobs) if cfg.protocol == "apt" else run_pta_repeated(env, args.jobs)
        target = cfg.n_target if cfg.protocol == "apt" else None
        log = _log_for(cfg, runs=tuple(runs), calibration=sop_calibration(env, cfg.sop_trials), target=target)
    _write(cfg.output, dumps_log(log))
    return 0


def _cmd_calibrate(args) -> int:
    cfg = config_from_args(args, "sop-calibrate")
    _write(cfg.output, dumps_log(_log_for(cfg, calibration=sop_calibration(cfg.env(), cfg.sop_trials))))
    return 0


def _cmd_ar(args) -> int:
    cfg = config_from_args(args, "ar")
    records = run_availability(cfg.env(), cfg.p)
    _write(cfg.output, dumps_log(_log_for(cfg, availability=tuple(records), target=cfg.p)))
    return 0


def _cmd_metrics(args) -> int:
    metrics = summarize(parse_log(_read(args.log)))
    text = report_to_json(metrics) if args.format == "json" else report(metrics, args.format)
    _write(args.output, text)
    return 0


def _cmd_ingest(args) -> int:
    mapping = {}
    for item in args.map:
        canonical, sep, column = item.partition("=")
        if not sep or not canonical or not column:
            raise UsageError(f"--map expects CANONICAL=COLUMN, got {item!r}")
        mapping[canonical] = column
    log = ingest_external(_read(args.csv), mapping, args.protocol)
    digest = config_digest({"source": "external", "protocol": log.protocol, "mapping": mapping})
    log = RunLog(log.protocol, None, digest, {"mapping": mapping}, "external", log.trials, log.runs)
    _write(args.output, dumps_log(log))
    return 0


def _cmd_report(args) -> int:
    _write(args.output, report(report_from_json(_read(args.report)), args.format))
    return 0


_COMMANDS = {
    "generate-scene": _cmd_generate,
    "run": _cmd_run,
    "calibrate-sop": _cmd_calibrate,
    "ar": _cmd_ar,
    "metrics": _cmd_metrics,
    "ingest": _cmd_ingest,
    "report": _cmd_report,
}


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: usage: {_one_line(exc)}", file=sys.stderr)
        return 2
    except MogBenchError as exc:
        print(f"error: {exc.code}: {_one_line(exc)}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {_one_line(exc.strerror or exc)}: {exc.filename or ''}".rstrip(": "), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: validation: {_one_line(exc)}", file=sys.stderr)
        return 1
