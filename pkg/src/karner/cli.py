"""Command-line entry point: ``karner <experiment> [--config PATH] [--set K=V ...]``.

Exit status is 0 when every row passes, 1 when any row fails and 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiments import KINDS, ConfigError, ExperimentConfig, run


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser():
    parser = argparse.ArgumentParser(prog="karner", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", metavar="PATH", help="JSON file with overrides")
        p.add_argument("--set", metavar="K=V", action="append", default=[],
                       help="override one key (dotted path, JSON value)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, help="base random seed")
        p.add_argument("--dump-config", action="store_true",
                       help="print the effective configuration and exit")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args):
    config = ExperimentConfig.default(args.kind)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        kind = data.pop("kind", args.kind)
        if kind != args.kind:
            raise ConfigError(f"config is for {kind!r}, not {args.kind!r}")
        params = data.pop("params", {})
        config.update(data)
        config.update(params)
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects K=V, got {item!r}")
        config.set(key.strip(), _parse_value(value))
    if args.out is not None:
        config.out = args.out
    if args.seed is not None:
        config.seed = args.seed
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args)
        if args.dump_config:
            config.validate()
            print(json.dumps(config.as_dict(), indent=2, sort_keys=True))
            return 0
        record = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    csv_path, summary_path = record.write(config.out)
    n_pass = sum(bool(r["passed"]) for r in record.rows)
    print(f"{record.experiment}: {n_pass}/{len(record.rows)} rows passed "
          f"({record.wall_clock:.2f}s) -> {csv_path}")
    return 0 if record.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
