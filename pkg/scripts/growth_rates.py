"""Growth rates of the complete label-4 diagrams and their lattice verdicts.

For each n the script prints the certified interval for the smallest pole
rho, the growth rate omega = 1/rho, and, for each requested q, whether the
series sum_w q^-l(w) converges.

    python3 scripts/growth_rates.py --n-max 12 --q 2 3 4
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field

from amalgam.growth import dominating_diagram, growth_rate, growth_series, lattice_check


@dataclass
class GrowthConfig:
    n_min: int = 3
    n_max: int = 10
    q_values: list[int] = field(default_factory=lambda: [2, 3, 4, 5])
    output: str | None = None


def run(cfg: GrowthConfig) -> list[dict]:
    rows = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        start = time.perf_counter()
        d = dominating_diagram(n)
        g = growth_series(d)
        r = growth_rate(d, g)
        verdicts = {q: lattice_check(d, q).series_converges_at_1_over_q for q in cfg.q_values}
        rows.append({"n": n, "rho": [float(r.rho_lo), float(r.rho_hi)],
                     "omega": [float(r.omega_lo), float(r.omega_hi)],
                     "converges": verdicts, "seconds": round(time.perf_counter() - start, 3)})
    return rows


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-min", type=int, default=GrowthConfig.n_min)
    ap.add_argument("--n-max", type=int, default=GrowthConfig.n_max)
    ap.add_argument("--q", type=int, nargs="+", dest="q_values", default=[2, 3, 4, 5])
    ap.add_argument("-o", "--output", help="write the rows as JSON")
    cfg = GrowthConfig(**vars(ap.parse_args(argv)))
    rows = run(cfg)
    header = f"{'n':>4} {'omega_lo':>12} {'omega_hi':>12}  " + " ".join(
        f"q={q}" for q in cfg.q_values)
    print(header)
    for row in rows:
        marks = " ".join(f"{'yes' if row['converges'][q] else 'no':>{len(f'q={q}')}}"
                         for q in cfg.q_values)
        print(f"{row['n']:>4} {row['omega'][0]:>12.8f} {row['omega'][1]:>12.8f}  {marks}")
    if cfg.output:
        with open(cfg.output, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
