"""Command-line runner: ``verify run`` and ``verify list-suites``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .report import Report
from .suites import SUITES, checks_of, load_config, run_suite

CSV_COLUMNS = ("suite", "case", "value", "tolerance", "pass")

_RATIO_PLOT = '''"""Ratio spread per case across grid levels."""
import json
import sys

import matplotlib.pyplot as plt

reports = json.load(open(sys.argv[1] if len(sys.argv) > 1 else "{json}"))
rows = [r for r in reports if r["case"].count("/") == 3]
fig, ax = plt.subplots(figsize=(8, 0.3 * len(rows) + 2))
for i, r in enumerate(rows):
    for j, lv in enumerate(r["values"]["levels"]):
        ax.scatter(lv["ratios"], [i + 0.15 * j] * len(lv["ratios"]), s=8, color="C%d" % j)
ax.set_yticks(range(len(rows)), [r["case"] for r in rows], fontsize=6)
ax.set_xscale("log")
ax.set_xlabel("numerator / denominator")
fig.tight_layout()
fig.savefig("ratios.png", dpi=150)
'''

_ENVELOPE_PLOT = '''"""Envelope suprema at the two refinement levels."""
import json
import sys

import matplotlib.pyplot as plt

reports = json.load(open(sys.argv[1] if len(sys.argv) > 1 else "{json}"))
labels, lo, hi = [], [], []
for r in reports:
    for key, entry in r["values"].items():
        labels.append(r["case"] + " " + key)
        lo.append(entry["sup"][0])
        hi.append(entry["sup"][-1])
fig, ax = plt.subplots(figsize=(8, 0.25 * len(labels) + 2))
ax.barh(range(len(labels)), [h / l - 1 for l, h in zip(lo, hi)])
ax.axvline(0.05, color="k", ls=":")
ax.axvline(-0.05, color="k", ls=":")
ax.set_yticks(range(len(labels)), labels, fontsize=6)
ax.set_xlabel("relative change under doubling")
fig.tight_layout()
fig.savefig("envelopes.png", dpi=150)
'''


def reports_to_csv(reports: list[Report]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow((r.suite, r.case, repr(r.value), repr(r.tolerance), "pass" if r.passed else "fail"))
    return buf.getvalue()


def reports_to_json(reports: list[Report]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=True)


def reports_from_json(text: str) -> list[Report]:
    return [Report.from_dict(d) for d in json.loads(text)]


def emit_outputs(reports: list[Report], out: str | Path, stem: str, plots: bool = False) -> list[Path]:
    """Write <stem>.csv and <stem>.json (and plot scripts) into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{stem}.csv", out / f"{stem}.json"]
    paths[0].write_text(reports_to_csv(reports))
    paths[1].write_text(reports_to_json(reports))
    if plots:
        template = {"equivalence": _RATIO_PLOT, "envelopes": _ENVELOPE_PLOT}.get(stem)
        if template:
            p = out / f"plot_{stem}.py"
            p.write_text(template.replace("{json}", f"{stem}.json"))
            paths.append(p)
    return paths


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verify", description="Run numerical verification suites.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one suite")
    run.add_argument("--suite", choices=SUITES)
    run.add_argument("--config", type=Path, help="JSON config file")
    run.add_argument("--out", help="output directory")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--threads", type=int, help="worker threads")
    run.add_argument("--checks", nargs="+", help="subset of checks in the suite")
    run.add_argument("--plots", action="store_true", help="also write plot scripts")
    sub.add_parser("list-suites", help="list suites and their checks")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-suites":
        for s in SUITES:
            print(f"{s}: {', '.join(checks_of(s))}")
        return 0
    try:
        data = json.loads(args.config.read_text()) if args.config else {}
        cfg = load_config(data, suite=args.suite, seed=args.seed, out=args.out, threads=args.threads,
                          checks=args.checks)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    reports = run_suite(cfg)
    paths = emit_outputs(reports, cfg.out, cfg.suite, args.plots)
    failed = [r.case for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} cases passed; wrote {', '.join(map(str, paths))}")
    if failed:
        print("failing cases: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
