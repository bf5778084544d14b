#!/usr/bin/env python3
"""Monte Carlo convergence of block moments toward their operator limits.

Runs every symmetric-block word of the requested lengths through the MC
estimator at a ladder of matrix sizes, sharing samples per size, and
writes one CSV row per (word, n) with the exact limit and the error.
Reruns with the same seed are byte-identical.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from pseudomat.cli import render_csv, _fraction_list, _int_list  # noqa: E402
from pseudomat.comb_moments import MomentMatrix  # noqa: E402
from pseudomat.comb_moments import (  # noqa: E402
    symmetric_mixed_limit_moment,
    weighted_symmetric_mixed_limit_moment,
)
from pseudomat.partitions import LabelTuple  # noqa: E402
from pseudomat.randmat import (  # noqa: E402
    WICK_MAX_LEGS,
    WICK_MAX_SIZE,
    BlockLayout,
    mc_mixed_moments_batch,
    wick_exact_moment,
)


def block_words(r: int, lengths: list[int]) -> list[LabelTuple]:
    """All set-label words of the given lengths over the r-color blocks."""
    labels = [(p, q) for p in range(1, r + 1) for q in range(p, r + 1)]
    words = []
    for m in lengths:
        for combo in itertools.product(labels, repeat=m):
            words.append(LabelTuple.from_sets(combo))
    return words


def run(u, d, lengths, sizes, trials, seed, trace_block):
    mat = MomentMatrix.from_values(u, d)
    words = block_words(mat.r, lengths)
    if trace_block is None:
        limits = [float(weighted_symmetric_mixed_limit_moment(w, mat))
                  for w in words]
        functional = "tau"
    else:
        limits = [float(symmetric_mixed_limit_moment(w, mat, trace_block))
                  for w in words]
        functional = f"tau:{trace_block}"
    rows = []
    for n in sizes:
        layout = BlockLayout.equal_blocks(mat.r, n)
        ests = mc_mixed_moments_batch(words, layout, mat.u, trials, seed,
                                      trace_block=trace_block)
        for word, est, limit in zip(words, ests, limits):
            wick = None
            if word.m <= WICK_MAX_LEGS and n <= WICK_MAX_SIZE:
                wick = float(wick_exact_moment(word, layout, mat.u,
                                               trace_block=trace_block))
            rows.append([str(word), n, functional, est.value, est.stderr,
                         wick, limit, abs(est.value - limit)])
    rows.sort(key=lambda row: (row[0], row[1]))
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--u", default="1,2,2,3", help="row-major variance profile")
    ap.add_argument("--d", default=None, help="dimension weights (uniform default)")
    ap.add_argument("--lengths", default="2,4")
    ap.add_argument("--sizes", default="40,80,160")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20260815)
    ap.add_argument("--trace-block", type=int, default=None,
                    help="partial trace block; full trace when omitted")
    ap.add_argument("--output", "-o", default=None)
    args = ap.parse_args(argv)

    u_flat = _fraction_list(args.u)
    r = int(round(len(u_flat) ** 0.5))
    u = [u_flat[k * r:(k + 1) * r] for k in range(r)]
    d = None if args.d is None else _fraction_list(args.d)
    rows = run(u, d, _int_list(args.lengths), _int_list(args.sizes),
               args.trials, args.seed, args.trace_block)

    text = render_csv("convergence", ["word", "n", "functional", "mc_mean",
                                      "mc_stderr", "wick_exact", "fock_limit",
                                      "abs_error"], rows)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    final_n = max(_int_list(args.sizes))
    finals = [row for row in rows if row[1] == final_n]
    worst = max(finals, key=lambda row: row[-1])
    print(f"{len(finals)} words at n={final_n}: worst abs_error "
          f"{worst[-1]:.4f} on {worst[0]} (stderr {worst[4]:.4f})",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
