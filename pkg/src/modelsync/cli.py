"""Operator entry point: serve, simulate, export, replay, score."""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

from . import canonical
from .errors import ModelSyncError
from .history import parse_palette
from .instruments import sus_score, tlx_raw
from .plantuml import to_plantuml
from .sim import convergence_scenario, load_scenario, report_json, run_scenario
from .storage import load_oplog, load_snapshot, save_snapshot
from .sync import replay

_BUNDLED_SCENARIOS = Path(__file__).parent / "scenarios"


def _tlx_value(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 100:
        raise argparse.ArgumentTypeError(f"{text} not in 0..100")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelsync", description="Collaborative UML model engine")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="host collaborative sessions")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=7350)
    serve.add_argument("--persist-dir", default=None)

    simulate = sub.add_parser("simulate", help="run a scripted multi-client simulation")
    simulate.add_argument("--scenario", required=True, help="scenario file, or bundled name (cinema, convergence)")
    simulate.add_argument("--clients", type=int, default=None)
    simulate.add_argument("--latency-ms", type=int, default=None)
    simulate.add_argument("--jitter-ms", type=int, default=None)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--duplicate", action="store_true", default=None)
    simulate.add_argument("--report", default=None, help="write the report here instead of stdout")

    export = sub.add_parser("export", help="convert a model snapshot")
    export.add_argument("--in", dest="infile", required=True)
    export.add_argument("--format", choices=("json", "plantuml"), default="json")
    export.add_argument("--out", default=None)

    replay_cmd = sub.add_parser("replay", help="rebuild a model from an oplog")
    replay_cmd.add_argument("--log", required=True)
    replay_cmd.add_argument("--out", required=True)

    score = sub.add_parser("score", help="score questionnaire instruments")
    group = score.add_mutually_exclusive_group(required=True)
    group.add_argument("--sus", type=int, nargs=10, choices=range(1, 6), metavar="A")
    group.add_argument("--tlx", type=_tlx_value, nargs=6, metavar="V")

    return parser


def _palette_from_env():
    spec = os.environ.get("MODELSYNC_PALETTE")
    return parse_palette(spec) if spec else None


def _resolve_scenario(args) -> dict:
    name = args.scenario
    if name in ("convergence", "convergence.json"):
        scenario = convergence_scenario()
    else:
        path = Path(name)
        if not path.exists():
            bundled = _BUNDLED_SCENARIOS / (name if name.endswith(".json") else f"{name}.json")
            if bundled.exists():
                path = bundled
            else:
                raise ModelSyncError(f"scenario {name!r} not found")
        scenario = load_scenario(path)
    if args.seed is not None:
        scenario["seed"] = args.seed
    network = scenario.setdefault("network", {})
    if args.latency_ms is not None:
        network["latency_ms"] = args.latency_ms
    if args.jitter_ms is not None:
        network["jitter_ms"] = args.jitter_ms
    if args.duplicate is not None:
        network["duplicate"] = args.duplicate
    if args.clients is not None:
        bots = scenario.get("bots", [])
        if not bots:
            raise ModelSyncError("scenario has no bots to scale")
        scaled = []
        for i in range(args.clients):
            spec = dict(bots[i % len(bots)])
            spec["name"] = spec["name"] if i < len(bots) else f"{spec['name']}+{i}"
            scaled.append(spec)
        scenario["bots"] = scaled
    return scenario


def _cmd_serve(args) -> int:
    from .net import serve as serve_async

    try:
        asyncio.run(serve_async(args.host, args.port, persist_dir=args.persist_dir, palette=_palette_from_env()))
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_simulate(args) -> int:
    scenario = _resolve_scenario(args)
    report = run_scenario(scenario, palette=_palette_from_env())
    text = report_json(report)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0 if report["convergence"]["converged"] else 1


def _cmd_export(args) -> int:
    doc = load_snapshot(args.infile)
    if args.format == "plantuml":
        text = to_plantuml(doc)
    else:
        text = json.dumps(doc.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_replay(args) -> int:
    log = load_oplog(args.log)
    doc = replay(log)
    save_snapshot(doc, args.out)
    print(canonical.digest(doc.to_dict()))
    return 0


def _cmd_score(args) -> int:
    if args.sus is not None:
        value = sus_score(args.sus)
    else:
        value = tlx_raw(args.tlx)
    print(f"{value:g}")
    return 0


_HANDLERS = {
    "serve": _cmd_serve,
    "simulate": _cmd_simulate,
    "export": _cmd_export,
    "replay": _cmd_replay,
    "score": _cmd_score,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ModelSyncError, OSError, json.JSONDecodeError) as err:
        print(f"modelsync: error: {err}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
