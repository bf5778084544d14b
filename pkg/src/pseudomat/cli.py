"""Command-line front end for the moment engines and independence checkers.

One subcommand per engine: exact partition sums, fock operator moments,
Monte Carlo and Wick evaluation of random block matrices, cross-engine
comparison, and the independence certifiers.  Tabular results go to CSV
(or JSON with --format json); check reports are always JSON.  Summary
lines go to stderr so piped output stays machine-readable.

Exit codes: 0 success, 1 validation error, 2 capacity error, 3 a FAIL
verdict under --strict.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction

from .comb_moments import (
    ArrayShape,
    MomentMatrix,
    limit_moment,
    mixed_limit_moment,
    symmetric_mixed_limit_moment,
    weighted_limit_moment,
    weighted_mixed_limit_moment,
    weighted_symmetric_mixed_limit_moment,
)
from .errors import CapacityError, ValidationError
from .fock import FockState, OperatorSpec, moment as fock_moment_of
from .partitions import LabelTuple, enumerate_pair_partitions
from .randmat import (
    WICK_MAX_LEGS,
    WICK_MAX_SIZE,
    BlockLayout,
    mc_mixed_moment,
    wick_exact_moment,
)
from . import independence as ind

CSV_HEADER = "# pseudomat-csv v1"
FORMAT_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """Argparse that reports bad usage as a validation error (exit 1)."""

    def error(self, message):
        raise ValidationError(message)


# -- input parsing -----------------------------------------------------------


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"cannot parse rational number {text!r}") from None


def _fraction_list(text: str) -> list[Fraction]:
    return [_fraction(part) for part in text.split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse integer list {text!r}") from None


_ORDERED_TOKEN = re.compile(r"\((\d+),(\d+)\)")
_SET_TOKEN = re.compile(r"\{(\d+)(?:,(\d+))?\}")


def parse_word(text: str) -> LabelTuple:
    """Parse "(1,2)(2,1)" into an ordered word or "{1,2}{2,3}" into sets."""
    compact = re.sub(r"\s", "", text)
    for pattern, symmetric in ((_ORDERED_TOKEN, False), (_SET_TOKEN, True)):
        if re.fullmatch(f"(?:{pattern.pattern})+", compact):
            pairs = [(int(i), int(j or i)) for i, j in pattern.findall(compact)]
            if symmetric:
                return LabelTuple.from_sets(pairs)
            return LabelTuple.from_ordered(pairs)
    raise ValidationError(
        f"cannot parse word {text!r}; use \"(i,j)(k,l)...\" or \"{{i,j}}{{k,l}}...\""
    )


def _parse_state(text: str):
    text = text.strip()
    if text in ("phi", "psi", "tau"):
        return text
    for head in ("psi", "tau"):
        if text.startswith(head + ":"):
            try:
                return (head, int(text[len(head) + 1:]))
            except ValueError:
                break
    raise ValidationError(
        f"cannot parse state {text!r}; use phi, psi, psi:j, tau, or tau:q"
    )


_SHAPES = {
    "square": ArrayShape.square,
    "lower-triangular": ArrayShape.lower_triangular,
    "lower_triangular": ArrayShape.lower_triangular,
    "diagonal": ArrayShape.diagonal,
}


def _build_matrix(args, r_hint: int | None = None) -> MomentMatrix:
    """MomentMatrix from --r/--u/--d/--shape with all-ones/uniform defaults."""
    r = getattr(args, "r", None)
    u_text = getattr(args, "u", None)
    d_text = getattr(args, "d", None)
    if r is None:
        if u_text is not None:
            flat = _fraction_list(u_text)
            r = int(round(len(flat) ** 0.5))
            if r * r != len(flat):
                raise ValidationError(
                    f"--u has {len(flat)} entries, not a square count"
                )
        elif d_text is not None:
            r = len(_fraction_list(d_text))
        elif r_hint is not None:
            r = r_hint
        else:
            raise ValidationError("need --r (or --u/--d/a word to infer it from)")
    if r < 1:
        raise ValidationError(f"need r >= 1, got {r}")
    if u_text is None:
        u = [[Fraction(1)] * r for _ in range(r)]
    else:
        flat = _fraction_list(u_text)
        if len(flat) != r * r:
            raise ValidationError(f"--u needs {r * r} entries for r={r}")
        u = [flat[k * r:(k + 1) * r] for k in range(r)]
    d = None if d_text is None else _fraction_list(d_text)
    if d is not None and len(d) != r:
        raise ValidationError(f"--d needs {r} entries for r={r}")
    shape_name = getattr(args, "shape", None) or "square"
    return MomentMatrix.from_values(u, d, _SHAPES[shape_name]())


# -- output plumbing ---------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(subcommand: str, header: list[str], rows: list[list]) -> str:
    """Versioned, timestamp-free CSV text; reruns are byte-identical."""
    buf = io.StringIO()
    buf.write(f"{CSV_HEADER} {subcommand}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _emit_table(args, subcommand: str, header: list[str], rows: list[list]) -> None:
    fmt = getattr(args, "format", "csv")
    if fmt == "json":
        payload = {
            "format_version": FORMAT_VERSION,
            "subcommand": subcommand,
            "columns": header,
            "rows": [[_fmt(x) for x in row] for row in rows],
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = render_csv(subcommand, header, rows)
    _write_out(args, text)


def _write_out(args, text: str) -> None:
    path = getattr(args, "output", None)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(message: str) -> None:
    print(message, file=sys.stderr)


# -- fock/comb twins for a labeled word --------------------------------------


def _fock_word_value(word: LabelTuple, mat: MomentMatrix, state_token) -> float:
    if word.symmetric:
        if state_token == "phi":
            raise ValidationError(
                "symmetric words live in the truncated model; use psi states"
            )
        factory = OperatorSpec.sym_trunc_gauss
    else:
        factory = OperatorSpec.gauss if state_token == "phi" \
            else OperatorSpec.trunc_gauss
    ops = [factory(i, j) for i, j in word.pairs]
    if state_token == "phi":
        state = FockState.vacuum()
    elif state_token == "psi":
        state = FockState.from_weights(mat.d)
    else:
        state = FockState.vector(state_token[1])
    return fock_moment_of(ops, state, mat)


def _comb_word_value(word: LabelTuple, mat: MomentMatrix, state_token) -> Fraction:
    if word.symmetric:
        if state_token == "psi":
            return weighted_symmetric_mixed_limit_moment(word, mat)
        if state_token == "phi":
            raise ValidationError(
                "symmetric words live in the truncated model; use psi states"
            )
        return symmetric_mixed_limit_moment(word, mat, state_token[1])
    if state_token == "phi":
        return mixed_limit_moment(word, mat, 0)
    if state_token == "psi":
        return weighted_mixed_limit_moment(word, mat)
    return mixed_limit_moment(word, mat, state_token[1])


def _require_psi(state_token, allow_phi: bool = True):
    if isinstance(state_token, tuple) and state_token[0] == "tau":
        raise ValidationError("tau states apply to matrix functionals only")
    if state_token == "tau":
        raise ValidationError("tau states apply to matrix functionals only")
    if not allow_phi and state_token == "phi":
        raise ValidationError("this subcommand needs a psi state")
    return state_token


# -- subcommand handlers -----------------------------------------------------


def _cmd_partitions(args) -> int:
    parts = enumerate_pair_partitions(args.m)
    rows = []
    for k, part in enumerate(parts):
        covering = sum(1 for idx in range(len(part.blocks)) if part.is_covering(idx))
        rows.append([k, str(part), len(part.blocks), covering])
    _emit_table(args, "partitions",
                ["index", "partition", "blocks", "covering_blocks"], rows)
    _summary(f"{len(parts)} non-crossing pair partitions of {args.m} legs")
    return 0


def _cmd_limit_moments(args) -> int:
    mat = _build_matrix(args)
    if args.weighted:
        values = [(m, weighted_limit_moment(m, mat)) for m in range(1, args.max_m + 1)]
        which = "weighted psi"
    else:
        j = args.j
        if not (0 <= j <= mat.r):
            raise ValidationError(f"--j must be in 0..{mat.r}")
        values = [(m, limit_moment(m, mat, j)) for m in range(1, args.max_m + 1)]
        which = "phi" if j == 0 else f"psi:{j}"
    _emit_table(args, "limit-moments", ["m", "moment"],
                [[m, v] for m, v in values])
    _summary(f"limit moments of the full sum under {which}, m <= {args.max_m}")
    return 0


def _cmd_fock_moment(args) -> int:
    word = parse_word(args.word)
    state = _require_psi(_parse_state(args.state))
    mat = _build_matrix(args, r_hint=word.max_label())
    value = _fock_word_value(word, mat, state)
    _emit_table(args, "fock-moment", ["word", "state", "value"],
                [[word, args.state.strip(), value]])
    _summary(f"fock moment {word} under {args.state.strip()} = {value!r}")
    return 0


def _cmd_mixed(args) -> int:
    word = parse_word(args.word)
    if word.symmetric:
        raise ValidationError("mixed takes an ordered word; use symmetric-mixed")
    mat = _build_matrix(args, r_hint=word.max_label())
    if args.weighted:
        value = weighted_mixed_limit_moment(word, mat)
        which = "weighted psi"
    else:
        if not (0 <= args.j <= mat.r):
            raise ValidationError(f"--j must be in 0..{mat.r}")
        value = mixed_limit_moment(word, mat, args.j)
        which = "phi" if args.j == 0 else f"psi:{args.j}"
    _emit_table(args, "mixed", ["word", "state", "moment"],
                [[word, which, value]])
    _summary(f"mixed limit moment {word} under {which} = {value}")
    return 0


def _cmd_symmetric_mixed(args) -> int:
    word = parse_word(args.word)
    if not word.symmetric:
        raise ValidationError("symmetric-mixed takes a set word like {1,2}{2,3}")
    mat = _build_matrix(args, r_hint=word.max_label())
    if args.weighted:
        value = weighted_symmetric_mixed_limit_moment(word, mat)
        which = "weighted psi"
    else:
        if not (1 <= args.j <= mat.r):
            raise ValidationError(f"--j must be in 1..{mat.r}")
        value = symmetric_mixed_limit_moment(word, mat, args.j)
        which = f"psi:{args.j}"
    _emit_table(args, "symmetric-mixed", ["word", "state", "moment"],
                [[word, which, value]])
    _summary(f"symmetric mixed limit moment {word} under {which} = {value}")
    return 0


def _mc_state(args, r: int) -> tuple[int | None, str]:
    token = _parse_state(args.state)
    if token == "tau":
        return None, "tau"
    if isinstance(token, tuple) and token[0] == "tau":
        q = token[1]
        if not (1 <= q <= r):
            raise ValidationError(f"trace block {q} outside 1..{r}")
        return q, f"tau:{q}"
    raise ValidationError("mc/wick states are tau (full trace) or tau:q")


def _cmd_mc(args) -> int:
    word = parse_word(args.word)
    if not word.symmetric:
        raise ValidationError("mc takes a set word over symmetric blocks")
    mat = _build_matrix(args, r_hint=word.max_label())
    trace_block, functional = _mc_state(args, mat.r)
    if trace_block is None:
        limit = weighted_symmetric_mixed_limit_moment(word, mat)
    else:
        limit = symmetric_mixed_limit_moment(word, mat, trace_block)
    rows = []
    for n in _int_list(args.n):
        layout = BlockLayout.equal_blocks(mat.r, n)
        est = mc_mixed_moment(word, layout, mat.u, args.trials, args.seed,
                              trace_block=trace_block, entries=args.entries)
        wick = None
        if word.m <= WICK_MAX_LEGS and n <= WICK_MAX_SIZE:
            wick = float(wick_exact_moment(word, layout, mat.u,
                                           trace_block=trace_block,
                                           entries=args.entries))
        rows.append([n, functional, est.value, est.stderr, wick,
                     float(limit), abs(est.value - float(limit))])
    _emit_table(args, "mc",
                ["n", "functional", "mc_mean", "mc_stderr", "wick_exact",
                 "fock_limit", "abs_error"], rows)
    _summary(f"mc {word} under {functional}: limit {float(limit)!r}, "
             f"final abs_error {rows[-1][-1]!r} at n={rows[-1][0]}")
    return 0


def _cmd_wick(args) -> int:
    word = parse_word(args.word)
    if not word.symmetric:
        raise ValidationError("wick takes a set word over symmetric blocks")
    mat = _build_matrix(args, r_hint=word.max_label())
    trace_block, functional = _mc_state(args, mat.r)
    rows = []
    for n in _int_list(args.n):
        layout = BlockLayout.equal_blocks(mat.r, n)
        value = wick_exact_moment(word, layout, mat.u,
                                  trace_block=trace_block, entries=args.entries)
        rows.append([n, functional, value, float(value)])
    _emit_table(args, "wick", ["n", "functional", "wick_exact", "approx"], rows)
    _summary(f"wick {word} under {functional} at n in {args.n}")
    return 0


def _cmd_compare(args) -> int:
    word = parse_word(args.word)
    state = _require_psi(_parse_state(args.state))
    mat = _build_matrix(args, r_hint=word.max_label())
    comb = _comb_word_value(word, mat, state)
    fock = _fock_word_value(word, mat, state)
    diff = abs(float(comb) - fock)
    _emit_table(args, "compare",
                ["word", "state", "comb", "fock", "abs_diff"],
                [[word, args.state.strip(), float(comb), fock, diff]])
    _summary(f"compare {word} under {args.state.strip()}: abs_diff {diff!r}")
    return 0


def _parse_outer_blocks(text: str) -> list[tuple[int, ...]]:
    groups = []
    for chunk in text.split(";"):
        if chunk.strip():
            groups.append(tuple(_int_list(chunk)))
    if not groups:
        raise ValidationError(f"cannot parse outer blocks {text!r}")
    return groups


def _check_instance(args):
    """Build (labels, units/sequence, oracle, states, checker) per --instance."""
    kind = args.instance
    if kind in ("plain-array", "truncated-array", "symmetric-array", "block-sums"):
        mat = _build_matrix(args)
        if kind == "plain-array":
            inst = ind.plain_array_instance(mat)
            checker = ind.check_matricial_freeness
        elif kind == "truncated-array":
            inst = ind.truncated_array_instance(mat)
            checker = ind.check_matricial_freeness
        elif kind == "symmetric-array":
            inst = ind.symmetric_array_instance(mat)
            checker = ind.check_symmetric_matricial_freeness
        else:
            outer = _parse_outer_blocks(args.outer)
            inst = ind.block_sum_instance(mat, outer,
                                          truncated=not args.plain_generators)
            checker = ind.check_matricial_freeness
        return lambda: checker(
            inst["labels"], inst["units"], inst["oracle"],
            inst["diagonal_states"], max_degree=args.degree, tol=args.tol,
            max_words=args.max_words)
    if kind == "matrix-blocks":
        mat = _build_matrix(args)
        layout = BlockLayout.equal_blocks(mat.r, args.n)
        labels = None
        if args.labels == "offdiag":
            labels = [frozenset((p, q))
                      for p in range(1, mat.r + 1)
                      for q in range(p + 1, mat.r + 1)]
        inst = ind.matrix_symmetric_instance(layout, mat.u, args.trials,
                                             args.seed, labels=labels,
                                             entries=args.entries)
        states = inst["diagonal_states"]
        if args.trace_block is not None:
            states = [("tau", args.trace_block)]
        return lambda: ind.check_symmetric_matricial_freeness(
            inst["labels"], inst["units"], inst["oracle"], states,
            max_degree=args.degree, tol=args.tol, max_words=args.max_words)
    mat = _build_matrix(args)
    if kind == "rows-free":
        token = _require_psi(_parse_state(args.state))
        truncated = token != "phi"
        oracle = ind.family_oracle(mat, ind.row_sum_family(mat, truncated=truncated))
        fams = list(range(1, mat.r + 1))
        return lambda: ind.check_freeness(fams, oracle, token,
                                          max_degree=args.degree, tol=args.tol,
                                          max_words=args.max_words)
    if kind == "rows-monotone":
        oracle = ind.family_oracle(mat, ind.row_sum_family(mat))
        seq = tuple(range(1, mat.r + 1))
        return lambda: ind.check_monotone(seq, oracle, "phi",
                                          max_degree=args.degree, tol=args.tol,
                                          max_words=args.max_words)
    if kind == "diagonal-boolean":
        oracle = ind.family_oracle(mat, ind.diagonal_family(mat))
        fams = list(range(1, mat.r + 1))
        return lambda: ind.check_boolean(fams, oracle, "phi",
                                         max_degree=args.degree, tol=args.tol,
                                         max_words=args.max_words)
    raise ValidationError(f"unknown check instance {kind!r}")


def _cmd_check(args) -> int:
    run = _check_instance(args)
    report = run()
    _write_out(args, report.to_json() + "\n")
    _summary(report.summary_line())
    if args.strict and not report.passed:
        return 3
    return 0


# -- parser wiring ------------------------------------------------------------


def _add_array_opts(p: _Parser) -> None:
    p.add_argument("--r", type=int, help="number of colors (inferred if omitted)")
    p.add_argument("--u", help="row-major variance profile, e.g. 1,2,2,3 or 1/2,...")
    p.add_argument("--d", help="dimension weights, e.g. 0.5,0.5 (uniform default)")
    p.add_argument("--shape", choices=sorted(_SHAPES), default="square")


def _add_output_opts(p: _Parser, formats: bool = True) -> None:
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    if formats:
        p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> _Parser:
    parser = _Parser(prog="pseudomat",
                     description="limit moments of random pseudomatrices, "
                                 "three independent ways, plus independence "
                                 "certification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partitions", help="enumerate non-crossing pair partitions")
    p.add_argument("--m", type=int, required=True, help="number of legs")
    _add_output_opts(p)
    p.set_defaults(func=_cmd_partitions)

    p = sub.add_parser("limit-moments", help="moments of the full generator sum")
    _add_array_opts(p)
    p.add_argument("--j", type=int, default=0,
                   help="state color; 0 is the vacuum (default)")
    p.add_argument("--weighted", action="store_true",
                   help="d-weighted combination of the vector states")
    p.add_argument("--max-m", type=int, default=8)
    _add_output_opts(p)
    p.set_defaults(func=_cmd_limit_moments)

    p = sub.add_parser("fock-moment", help="operator moment of a labeled word")
    p.add_argument("--word", required=True)
    p.add_argument("--state", default="phi", help="phi, psi, or psi:j")
    _add_array_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=_cmd_fock_moment)

    p = sub.add_parser("mixed", help="exact mixed limit moment of an ordered word")
    p.add_argument("--word", required=True)
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--weighted", action="store_true")
    _add_array_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=_cmd_mixed)

    p = sub.add_parser("symmetric-mixed",
                       help="exact symmetric mixed limit moment of a set word")
    p.add_argument("--word", required=True)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--weighted", action="store_true")
    _add_array_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=_cmd_symmetric_mixed)

    p = sub.add_parser("mc", help="Monte Carlo block-moment convergence table")
    p.add_argument("--word", required=True, help="set word like {1,2}{1,2}")
    p.add_argument("--n", required=True, help="matrix sizes, e.g. 40,80,160")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--state", default="tau:1", help="tau (full trace) or tau:q")
    p.add_argument("--entries", choices=["real", "complex"], default="real")
    _add_array_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("wick", help="exact finite-n moment by Wick pairing")
    p.add_argument("--word", required=True)
    p.add_argument("--n", required=True, help="matrix sizes, e.g. 3,6,12")
    p.add_argument("--state", default="tau:1")
    p.add_argument("--entries", choices=["real", "complex"], default="real")
    _add_array_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=_cmd_wick)

    p = sub.add_parser("compare", help="comb vs fock value of one word")
    p.add_argument("--word", required=True)
    p.add_argument("--state", default="psi:1")
    _add_array_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("check", help="run an independence certifier")
    p.add_argument("--instance", required=True,
                   choices=["plain-array", "truncated-array", "symmetric-array",
                            "block-sums", "matrix-blocks", "rows-free",
                            "rows-monotone", "diagonal-boolean"])
    _add_array_opts(p)
    p.add_argument("--degree", type=int, default=6)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-words", type=int, default=ind.DEFAULT_MAX_WORDS)
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when the verdict is FAIL")
    p.add_argument("--outer", default="1,2;3,4",
                   help="block-sums: outer grouping like 1,2;3,4")
    p.add_argument("--plain-generators", action="store_true",
                   help="block-sums: plain instead of truncated generators")
    p.add_argument("--n", type=int, default=3, help="matrix-blocks: matrix size")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels", choices=["all", "offdiag"], default="all",
                   help="matrix-blocks: which block labels to certify")
    p.add_argument("--trace-block", type=int, default=None,
                   help="matrix-blocks: restrict to one partial trace")
    p.add_argument("--entries", choices=["real", "complex"], default="real")
    p.add_argument("--state", default="phi",
                   help="rows-free: phi (plain sums) or psi/psi:j (truncated)")
    _add_output_opts(p, formats=False)
    p.set_defaults(func=_cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
