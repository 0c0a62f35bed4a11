"""Command line front end for the bundled experiments.

Each run prints one PASS/FAIL line per check plus an overall line, and exits
with status 0 on success and 2 on any failed check.  Options not used by the
selected experiment are ignored by it.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import EXPERIMENTS, run_experiment


def _parse_pattern(text):
    if not text or any(c not in "01" for c in text):
        raise argparse.ArgumentTypeError("pattern must be a nonempty string of 0s and 1s")
    return tuple(int(c) for c in text)


def build_parser():
    p = argparse.ArgumentParser(
        prog="feec",
        description="Finite element differential-form demonstrations.",
    )
    p.add_argument("experiment", choices=sorted(EXPERIMENTS), help="experiment id")
    p.add_argument("--levels", type=int, help="number of refinement levels")
    p.add_argument("--r", type=int, help="polynomial degree")
    p.add_argument("--pattern", type=_parse_pattern, help="family bits, e.g. 10")
    p.add_argument("--bc", choices=["natural", "essential"], help="boundary treatment")
    p.add_argument("--out", help="directory for verdict, tables, curves, figures")
    p.add_argument("--seed", type=int, help="random seed where applicable")
    p.add_argument("--config", help="JSON file of keyword arguments")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    kwargs = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            print("config file must contain a JSON object", file=sys.stderr)
            return 2
        if isinstance(loaded.get("pattern"), str):
            loaded["pattern"] = _parse_pattern(loaded["pattern"])
        kwargs.update(loaded)
    for key in ("levels", "r", "pattern", "bc", "out", "seed"):
        value = getattr(args, key)
        if value is not None:
            kwargs[key] = value
    verdict = run_experiment(args.experiment, **kwargs)
    for c in verdict["checks"]:
        status = "PASS" if c["pass"] else "FAIL"
        print(f"[{status}] {c['name']}: value={c['value']} {c['comparison']} {c['threshold']}")
    print(f"{verdict['experiment']}: {'PASS' if verdict['pass'] else 'FAIL'}")
    return 0 if verdict["pass"] else 2


if __name__ == "__main__":
    sys.exit(main())
