"""Compare the table and steinberg presentations of standard pairs.

For each (pair type, q) the script builds both presentations, enumerates the
cosets of the trivial subgroup and prints the orders, relator counts and
timings next to the order of the matrix realization.

    python3 scripts/strategy_compare.py --case A2:2 --case C2:2 --case A2:3
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

from amalgam import grouporacle as go
from amalgam import presentation as pr
from amalgam.todd_coxeter import todd_coxeter

DEFAULT_CASES = ["A1:2", "A1:3", "A1:4", "A2:2", "A1xA1:2", "C2:2"]


@dataclass
class CompareConfig:
    cases: list[str] = field(default_factory=lambda: list(DEFAULT_CASES))
    method: str = "hlt"


def _timed(fn):
    start = time.perf_counter()
    value = fn()
    return value, time.perf_counter() - start


def compare(pair: str, q: int, method: str) -> dict:
    oracle = len(go.standard_pair_realization(pair, q).group)
    table, t_build = _timed(lambda: pr.table_template(pair, q))
    names = [f"g{k}" for k in range(len(table.symbols))]
    t_idx, t_enum = _timed(lambda: todd_coxeter(names, table.relators, strategy=method).index)
    st, s_build = _timed(lambda: pr.edge_group_presentation(pair, q, strategy="steinberg"))
    s_idx, s_enum = _timed(lambda: todd_coxeter(st.generators, st.relators,
                                                strategy=method).index)
    return {"case": f"{pair}({q})", "oracle": oracle,
            "table": (t_idx, len(table.relators), t_build + t_enum),
            "steinberg": (s_idx, len(st.relators), s_build + s_enum)}


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--case", action="append", dest="cases",
                    help="PAIR:q, e.g. A2:3; repeat for several")
    ap.add_argument("--method", choices=["hlt", "felsch"], default="hlt")
    args = vars(ap.parse_args(argv))
    cfg = CompareConfig(cases=args["cases"] or list(DEFAULT_CASES), method=args["method"])
    print(f"{'case':<10} {'oracle':>7} {'table':>22} {'steinberg':>22}")
    for case in cfg.cases:
        pair, q = case.split(":")
        row = compare(pair, int(q), cfg.method)
        cols = [f"{o} /{n:>5} rel /{s:6.2f}s" for o, n, s in (row["table"], row["steinberg"])]
        print(f"{row['case']:<10} {row['oracle']:>7} {cols[0]:>22} {cols[1]:>22}")


if __name__ == "__main__":
    main()
