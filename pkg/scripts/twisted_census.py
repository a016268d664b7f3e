"""Census of theta-twisted involutions on an n-cycle with the antipodal twist.

Counts Inv^theta and delta^theta by length up to a radius and checks that
every twisted involution u factors as w theta(w)^-1 with l(w) = l(u)/2.

    python3 scripts/twisted_census.py --n 8 --radius 8
"""
from __future__ import annotations

import argparse
from collections import Counter
from dataclasses import dataclass

from amalgam.coxeter import CoxeterSystem, twisted_decomposition, twisted_involutions
from amalgam.diagram import parse_diagram


@dataclass
class CensusConfig:
    n: int = 8
    radius: int = 8


def cycle(n: int):
    lines = [f"v {i}" for i in range(1, n + 1)]
    lines += [f"e {i} {i % n + 1} m=3" for i in range(1, n + 1)]
    return parse_diagram("\n".join(lines))


def run(cfg: CensusConfig) -> dict:
    if cfg.n % 2:
        raise SystemExit("the antipodal twist needs an even cycle")
    sys_ = CoxeterSystem.from_diagram(cycle(cfg.n))
    theta = tuple((i + cfg.n // 2) % cfg.n for i in range(cfg.n))
    rep = twisted_involutions(sys_, theta, cfg.radius)
    halves = all(2 * len(twisted_decomposition(sys_, theta, u)) == len(u) for u in rep.inv)
    return {"inv": Counter(len(u) for u in rep.inv),
            "delta": Counter(len(u) for u in rep.delta_image),
            "equal": rep.inv == rep.delta_image, "halves": halves}


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=CensusConfig.n)
    ap.add_argument("--radius", type=int, default=CensusConfig.radius)
    cfg = CensusConfig(**vars(ap.parse_args(argv)))
    res = run(cfg)
    print(f"{'length':>6} {'Inv':>6} {'delta':>6}")
    for length in sorted(set(res["inv"]) | set(res["delta"])):
        print(f"{length:>6} {res['inv'][length]:>6} {res['delta'][length]:>6}")
    print(f"sets equal: {res['equal']}; l(w) = l(u)/2 for all u: {res['halves']}")


if __name__ == "__main__":
    main()
