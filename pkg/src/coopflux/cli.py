"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analytics import sign_test
from .errors import CoopfluxError, InvalidConfig, InvalidCounts
from .harness import analyze, build_config, compare_founders, read_config_file, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _grid(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("simulation parameters (override the config file)")
    g.add_argument("--config", type=Path, help="flat key = value config file")
    g.add_argument("--b", type=float, help="temptation to defect (>= 1)")
    g.add_argument("--epsilon", type=float, help="selection pressure in [0, 1)")
    g.add_argument("--m", type=int, help="edges per new node")
    g.add_argument("--nodes-per-generation", type=int)
    g.add_argument("--n-max", type=int, help="maximum network size")
    g.add_argument("--truncation-percent", "-X", type=float, help="percent deleted per truncation")
    g.add_argument("--model", choices=["epa", "fluctuation", "static"])
    g.add_argument("--deletion-mode", choices=["least_fit", "random"])
    g.add_argument("--generations", type=int)
    g.add_argument("--founder", help="k3-c, k3-d or random")
    g.add_argument("--founder-n", type=int)
    g.add_argument("--founder-mean-degree", type=float)
    g.add_argument("--founder-coop-probability", type=float)
    g.add_argument("--seed", type=int, help="accepted for completeness; replicate seeds derive from --master-seed")
    g.add_argument("--prune-components", action="store_true", default=None)
    g.add_argument("--attach-to-newcomers", action="store_true", default=None,
                   help="nodes added earlier in a growth step may receive edges")
    g.add_argument("--replicates", type=int)
    g.add_argument("--master-seed", type=int)
    g.add_argument("--output-dir", "-o", type=Path)
    g.add_argument("--jobs", "-j", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopflux", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replicates of a single parameter point")
    _add_sim_flags(run)

    sw = sub.add_parser("sweep", help="replicates over a b x X grid")
    _add_sim_flags(sw)
    sw.add_argument("--b-grid", type=_grid, help="e.g. '1.0,1.2,1.4'")
    sw.add_argument("--x-grid", type=_grid, help="truncation percents, e.g. '2.5,5,10'")

    cmp_ = sub.add_parser("compare", help="C- vs D-founded arms, paired sign test per X")
    _add_sim_flags(cmp_)
    cmp_.add_argument("--b-grid", type=_grid)
    cmp_.add_argument("--x-grid", type=_grid)

    st = sub.add_parser("signtest", help="exact two-tailed sign test for n pairs, k wins")
    st.add_argument("n", type=int)
    st.add_argument("k", type=int)

    an = sub.add_parser("analyze", help="recompute summaries from stored series files")
    an.add_argument("output_dir", type=Path)
    an.add_argument("--last-k", type=int, default=20)
    an.add_argument("--out", type=Path, help="write JSON here instead of stdout")
    return parser


_NOT_CONFIG = {"command", "config", "verbose"}


def _config_from(args: argparse.Namespace):
    file_values = read_config_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    return build_config(file_values, flags)


def _emit(obj, out: Path | None = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        if args.command == "signtest":
            try:
                result = sign_test(args.n, args.k)
            except InvalidCounts as exc:
                raise InvalidConfig(str(exc)) from None
            _emit({"n": result.n, "k": result.k, "p_value": result.p_value})
        elif args.command == "analyze":
            _emit(analyze(args.output_dir, args.last_k), args.out)
        elif args.command == "compare":
            _emit({"comparisons": compare_founders(_config_from(args))})
        else:
            config = _config_from(args)
            if args.command == "run" and (config.b_grid or config.x_grid):
                raise InvalidConfig("'run' takes a single point; use 'sweep' for grids")
            points = run_experiment(config)
            _emit({"output_dir": str(config.output_dir), "points": [
                {"b": p.b, "truncation_percent": p.truncation_percent, "mean": p.summary["mean"],
                 "ci95": p.summary["ci95"]} for p in points]})
    except InvalidConfig as exc:
        print(f"coopflux: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CoopfluxError, OSError) as exc:
        print(f"coopflux: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
