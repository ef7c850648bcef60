"""Command-line front end.

Every run writes exactly one document (CSV, JSON, or DOT for ``tree``) to
standard output or ``--output``. Exit status is 0 on success, 1 for usage
errors and 2 when a library routine rejects its input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, Optional

from . import __version__
from .dyadic import DyadicValue
from .errors import UltrashiftError
from .estimators import (
    baker_saturation_demo,
    entropy_analytic,
    entropy_empirical,
    lyapunov_euclidean,
    lyapunov_symbolic,
)
from .padic import INFINITE, PAdicNorm, PrimeBase, _as_rational, digits, padic_distance, padic_norm, valuation
from .symbolic import (
    BinaryWord,
    DigitTail,
    PerturbationSpec,
    SequenceState,
    divergence_series,
    perturb,
    random_state,
    trajectory,
    transition_time,
    tree_distance,
    tree_export,
)

DEFAULT_N = 64
DEFAULT_SAMPLES = 1 << 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _int_at_least(lo: int):
    def convert(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {value}")
        return value
    convert.__name__ = f"int>={lo}"
    return convert


def _unit_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _digit_list(text: str) -> list[int]:
    s = text.replace(",", "").replace(" ", "")
    if set(s) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"expected binary digits, got {text!r}")
    return [int(c) for c in s]


def _int_list(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def exact(value) -> Optional[dict]:
    """Symbolic form (authoritative) plus a decimal rendering."""
    if value is None:
        return None
    if isinstance(value, (DyadicValue, PAdicNorm)):
        return {"symbolic": value.symbolic(), "decimal": float(value)}
    if isinstance(value, (int, Fraction)):
        return {"symbolic": str(value), "decimal": float(value)}
    raise TypeError(type(value))


def _flatten(doc: dict) -> dict:
    row = {}
    for key, value in doc.items():
        if isinstance(value, dict) and set(value) == {"symbolic", "decimal"}:
            row[key] = value["symbolic"]
            row[f"{key}_decimal"] = value["decimal"]
        elif isinstance(value, (list, tuple)):
            row[key] = " ".join(str(v) for v in value)
        else:
            row[key] = "" if value is None else value
    return row


def _tail_from(args) -> DigitTail:
    mode = args.tail
    if mode == "uniform":
        return DigitTail.uniform(args.seed)
    if mode == "biased":
        return DigitTail.biased(args.q, args.seed)
    if args.pattern is None:
        raise UsageError(f"--tail {mode} requires --pattern")
    return DigitTail(mode, args.seed, pattern=args.pattern)


# each command returns (json_body, csv_rows); csv_rows is a list of flat dicts


def cmd_padic(args):
    p = PrimeBase(args.p)
    x = _as_rational(args.x)
    body: dict[str, Any] = {"operation": args.op, "p": p.p, "x": str(x)}
    if args.op == "distance":
        if args.y is None:
            raise UsageError("padic distance needs two operands")
        y = _as_rational(args.y)
        body.update(y=str(y), result=exact(padic_distance(x, y, p)))
    elif args.y is not None:
        raise UsageError(f"padic {args.op} takes one operand")
    elif args.op == "valuation":
        r = valuation(x, p)
        body["result"] = "INFINITE" if r == INFINITE else r
    elif args.op == "norm":
        body["result"] = exact(padic_norm(x, p))
    else:
        if not isinstance(x, int):
            raise UsageError("padic digits needs a nonnegative integer")
        body["result"] = list(digits(x, p).digits)
    return body, [_flatten(body)]


def cmd_distance(args):
    if args.padic:
        p = PrimeBase(args.p)
        x, y = _as_rational(args.x), _as_rational(args.y)
        body = {"metric": "padic", "p": p.p, "x": str(x), "y": str(y),
                "distance": exact(padic_distance(x, y, p))}
    else:
        x, y = BinaryWord.parse(args.x), BinaryWord.parse(args.y)
        rep = tree_distance(x, y)
        body = {"metric": "tree", "x": str(x), "y": str(y), "length": rep.length,
                "common_prefix": rep.common_prefix, "m_levels": rep.m_levels,
                "distance": exact(rep.value)}
    return body, [_flatten(body)]


def cmd_time(args):
    x, y = BinaryWord.parse(args.x), BinaryWord.parse(args.y)
    body = {"x": str(x), "y": str(y), "length": x.length, "time": exact(transition_time(x, y))}
    return body, [_flatten(body)]


def _initial_state(args) -> SequenceState:
    if args.word is not None:
        return SequenceState(BinaryWord.parse(args.word), _tail_from(args))
    if args.tail == "uniform":
        return random_state(args.N, args.seed)
    tail = _tail_from(args)
    word_tail = DigitTail.uniform(args.seed).derive("word")
    return SequenceState(BinaryWord.from_digits(word_tail.take(args.N)), tail)


def cmd_shift(args):
    states = trajectory(_initial_state(args), args.n)
    rows = []
    for i, s in enumerate(states):
        rows.append({"n": s.step, "word": str(s.word),
                     "born_digit": "" if i == 0 else s.word[s.length],
                     "value": exact(DyadicValue(s.word.value, s.length))})
    body = {"length": states[0].length, "iterations": args.n,
            "trajectory": rows}
    return body, [_flatten(r) for r in rows]


def cmd_lyapunov(args):
    if args.method == "symbolic":
        start = _initial_state(args)
        spec = PerturbationSpec(args.h, tuple(args.deltas))
        other, eff_h = perturb(start, spec)
        n_max = args.n if args.n is not None else start.length
        series = divergence_series(start, other, n_max)
        rep = lyapunov_symbolic(series)
        body = {"lambda_base2": exact(rep.lambda_base2), "lambda_nats": rep.lambda_nats,
                "method": rep.method, "window": list(rep.window), "points": rep.points,
                "length": start.length, "h": spec.h, "deltas": list(spec.deltas),
                "epsilon": exact(spec.epsilon()), "effective_h": eff_h,
                "saturation_index": series.saturation_index,
                "series": [{"n": n, "distance": exact(d),
                            "log2_distance": None if d.is_zero() else d.log2()}
                           for n, d in series.entries]}
    else:
        method = args.method.removeprefix("euclidean-")
        n_iter = args.n if args.n is not None else 10_000
        rep = lyapunov_euclidean(args.x0, n_iter, method, args.delta0)
        body = {"lambda_base2": exact(rep.lambda_base2), "lambda_nats": rep.lambda_nats,
                "method": rep.method, "window": list(rep.window), "points": rep.points,
                "x0": args.x0, "delta0": args.delta0}
    summary = {k: v for k, v in body.items() if k != "series"}
    return body, [_flatten(summary)]


def cmd_entropy(args):
    if args.method == "analytic":
        rep = entropy_analytic(args.n)
    else:
        rep = entropy_empirical(args.n, args.samples, _tail_from(args), args.workers)
    body = {"method": rep.method, "level_n": rep.level_n, "tau": exact(rep.tau),
            "speed_v": exact(rep.speed_v), "shannon_rate": rep.shannon_rate,
            "k_paper": exact(rep.k_paper), "k_plugin": exact(rep.k_plugin),
            "path_probability": exact(rep.path_probability), "samples": rep.samples,
            "distinct_paths": rep.distinct_paths}
    if args.method == "empirical":
        body["tail"] = args.tail
        body["q"] = args.q if args.tail == "biased" else None
    return body, [_flatten(body)]


def cmd_tree(args):
    if args.complete is not None:
        if args.words:
            raise UsageError("give either words or --complete, not both")
        words = [BinaryWord(m, args.complete) for m in range(1 << args.complete)]
    elif not args.words:
        raise UsageError("tree needs at least one word (or --complete N)")
    else:
        words = [BinaryWord.parse(w) for w in args.words]
    dot = tree_export(words)
    body = {"words": sorted(str(w) for w in set(words)), "dot": dot}
    return body, None


def cmd_baker(args):
    rep = baker_saturation_demo(args.eps0, args.n, args.x0, args.y0)
    rows = [{"n": s.n, "x_separation": s.x_separation, "distance": s.distance,
             "same_branch": s.same_branch, "doubled": s.doubled} for s in rep.steps]
    body = {"eps0": rep.eps0, "iterations": rep.iterations, "max_distance": rep.max_distance,
            "bound": 2 ** 0.5, "bounded": rep.bounded,
            "doubling_violations": rep.doubling_violations, "first_split": rep.first_split,
            "steps": rows}
    return body, [_flatten(r) for r in rows]


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", metavar="PATH", help="write here instead of standard output")
    common.add_argument("--config", metavar="PATH", help="JSON file of option defaults")
    common.add_argument("--seed", type=_int_at_least(0), default=0)

    prime = _Parser(add_help=False)
    prime.add_argument("--p", type=_int_at_least(2), default=2, help="prime base (default 2)")

    tails = _Parser(add_help=False)
    tails.add_argument("--tail", choices=DigitTail.MODES, default="uniform")
    tails.add_argument("--q", type=_unit_float, default=0.5, help="P(digit = 1) for --tail biased")
    tails.add_argument("--pattern", type=_digit_list, help="digits for periodic/explicit tails")

    words = _Parser(add_help=False)
    words.add_argument("--word", help="initial word, e.g. 0110 (random of length --N otherwise)")
    words.add_argument("--N", type=_int_at_least(1), default=DEFAULT_N, help="word length")

    parser = _Parser(prog="ultrashift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("padic", parents=[common, prime], help="p-adic valuation, norm, distance, digits")
    p.add_argument("op", choices=("valuation", "norm", "distance", "digits"))
    p.add_argument("x")
    p.add_argument("y", nargs="?")
    p.set_defaults(func=cmd_padic)

    p = sub.add_parser("distance", parents=[common, prime], help="tree distance between binary words")
    p.add_argument("--padic", action="store_true", help="treat operands as rationals, use the p-adic metric")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("time", parents=[common], help="ultrametric transition time between words")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_time)

    p = sub.add_parser("shift", parents=[common, words, tails], help="iterate the Bernoulli shift")
    p.add_argument("--n", type=_int_at_least(0), default=10, help="number of shifts")
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("lyapunov", parents=[common, words, tails], help="Lyapunov exponent estimate")
    p.add_argument("--method", choices=("symbolic", "euclidean-derivative", "euclidean-two-trajectory"),
                   default="symbolic")
    p.add_argument("--h", type=_int_at_least(1), default=20, help="leading scale of eps = 2^-h(...)")
    p.add_argument("--deltas", type=_int_list, default=[], help="offsets delta_i, comma separated")
    p.add_argument("--n", type=_int_at_least(1), help="iterations (default: N, or 10000 for euclidean)")
    p.add_argument("--x0", type=float, default=0.613)
    p.add_argument("--delta0", type=_positive_float, default=1e-9)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("entropy", parents=[common, tails], help="Kolmogorov entropy")
    p.add_argument("--method", choices=("analytic", "empirical"), default="analytic")
    p.add_argument("--n", type=_int_at_least(1), default=10, help="tree level / path length")
    p.add_argument("--samples", type=_int_at_least(1), default=DEFAULT_SAMPLES)
    p.add_argument("--workers", type=_int_at_least(1), default=1)
    p.set_defaults(func=cmd_entropy)

    # own copies of the common options: parent actions are shared objects
    p = sub.add_parser("tree", help="Graphviz prefix tree of binary words")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--output", "-o", metavar="PATH", help="write here instead of standard output")
    p.add_argument("--config", metavar="PATH", help="JSON file of option defaults")
    p.add_argument("--seed", type=_int_at_least(0), default=0)
    p.add_argument("words", nargs="*")
    p.add_argument("--complete", type=_int_at_least(1), metavar="N", help="all 2^N words of length N")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("baker", parents=[common], help="baker's map Euclidean saturation demo")
    p.add_argument("--eps0", type=_positive_float, default=1e-6)
    p.add_argument("--n", type=_int_at_least(0), default=1000)
    p.add_argument("--x0", type=_unit_float, default=0.3183098861837907)
    p.add_argument("--y0", type=_unit_float, default=0.5)
    p.set_defaults(func=cmd_baker)

    parser._subparser_map = sub.choices
    return parser


def _config_tokens(parser: _Parser, argv: list[str]) -> list[str]:
    """Turn ``--config file.json`` into option tokens placed before argv."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return argv
    command = next((t for t in argv if t in parser._subparser_map), None)
    if command is None:
        return argv
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    sub = parser._subparser_map[command]
    by_dest = {a.dest: a for a in sub._actions if a.option_strings}
    tokens = []
    for key, value in cfg.items():
        action = by_dest.get(key.replace("-", "_").lstrip("_"))
        if action is None or action.dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        flag = action.option_strings[-1] if action.option_strings[-1].startswith("--") else action.option_strings[0]
        if action.nargs == 0:
            if value:
                tokens.append(flag)
        elif isinstance(value, list):
            tokens += [flag, ",".join(str(v) for v in value)]
        else:
            tokens += [flag, str(value)]
    idx = argv.index(command) + 1
    return argv[:idx] + tokens + argv[idx:]


def _config_echo(args) -> dict:
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key == "func":
            continue
        echo[key] = value
    return echo


def _render(args, body, rows) -> str:
    if args.format == "json":
        doc = {"command": args.command, "version": __version__, "config": _config_echo(args),
               "report": body}
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.format == "dot":
        return body["dot"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def run(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_config_tokens(parser, argv))
        body, rows = args.func(args)
        text = _render(args, body, rows)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except UltrashiftError as exc:
        print(f"ultrashift: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
