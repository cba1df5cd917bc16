"""Command line entry point: ``rseri validate|score|report|fixture``.

Exit codes: 0 success, 1 validation failure, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from .config import ConfigError, PipelineConfig
from .ingest import IngestError

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("rseri")


def _load(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config)
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        cfg.set(key.strip(), yaml.safe_load(raw))
    if getattr(args, "threads", None):
        cfg.set("threads", args.threads)
    return cfg


def cmd_validate(args) -> int:
    from .pipeline import validate
    rep = validate(_load(args))
    print(json.dumps(rep.as_dict(), indent=2))
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_score(args) -> int:
    from .pipeline import score, validate
    cfg = _load(args)
    rep = validate(cfg)
    for w in rep.warnings:
        log.warning(w)
    if not rep.ok:
        for e in rep.errors:
            log.error(e)
        return EXIT_INVALID
    res = score(cfg, args.out, args.threads)
    c = res.manifest["counts"]
    print(f"scored {c['scored']} of {c['active']} active stations "
          f"({c['excluded']} excluded, {c['dropped_inactive']} inactive) "
          f"-> {res.out_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .pipeline import report
    cfg = _load(args)
    doc = report(cfg, args.out)
    out = cfg.output_dir(args.out)
    for row in doc["risk_summary"]:
        print(f"{row['label']:<18} {row['high']:>6} {row['low']:>6} "
              f"{row['high_pct']:>6.1f}%")
    print(f"report written to {out}")
    return EXIT_OK


def cmd_fixture(args) -> int:
    from .fixture import REFERENCE_N, generate_fixture
    n = args.n if args.n is not None else (
        REFERENCE_N if args.match_paper_marginals else 50)
    out = Path(args.out or "fixture")
    path = generate_fixture(out, seed=args.seed, n=n,
                            match_paper_marginals=args.match_paper_marginals)
    print(f"fixture written; config at {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rseri",
        description="Charging-station resilience scoring from hazard layers.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required,
                        help="pipeline YAML config")
        sp.add_argument("--out", help="output directory (overrides config "
                        "and $RSERI_OUT)")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config knob, e.g. thresholds.road_m=1500")

    common(sub.add_parser("validate", help="check inputs and config"))
    common(sub.add_parser("score", help="score chargers, write CSV/GeoJSON"))
    common(sub.add_parser("report", help="tables, series and figures"))
    fx = sub.add_parser("fixture", help="generate a synthetic dataset")
    fx.add_argument("--out", help="target directory (default ./fixture)")
    fx.add_argument("--seed", type=int, default=0)
    fx.add_argument("--n", type=int, default=None)
    fx.add_argument("--match-paper-marginals", action="store_true")
    return p


COMMANDS = {"validate": cmd_validate, "score": cmd_score,
            "report": cmd_report, "fixture": cmd_fixture}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, IngestError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.error("%s: %s", type(exc).__name__, exc)
        if args.verbose:
            raise
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
