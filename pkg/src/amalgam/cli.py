"""Command-line front end: ``amalgam <subcommand> [options] FILE``.

Exit codes: 0 success, 1 domain error (bad input data, failed gate,
enumeration overflow), 2 usage error. Text reports are byte-stable; ``--json``
emits the same data with the documented key order.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import classify as cl
from . import presentation as pr
from .coxeter import CoxeterSystem, format_word, twisted_decomposition, twisted_involutions
from .diagram import DiagramError, classify_subdiagrams, double_cover, girth, parse_diagram
from .growth import growth_rate, growth_series, lattice_check, series_coefficients
from .todd_coxeter import EnumerationOverflow, default_max_cosets, todd_coxeter


class DomainError(Exception):
    """Raised for input that parses but is rejected by the mathematics."""


@dataclass
class RunConfig:
    subcommand: str
    inputs: list[str]
    q: int | None = None
    flavor: str = "CT"
    strategy: str = "table"
    radius: int = 6
    max_cosets: int | None = None
    output: str | None = None
    fmt: str = "neutral"
    as_json: bool = False
    extra: dict = field(default_factory=dict)


# -- helpers -------------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror or exc}") from None


def _diagram(path: str):
    return parse_diagram(_read(path), name=Path(path).stem)


def _is_neutral(text: str) -> bool:
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith("#"):
            return s.startswith("gen ") or s.startswith("rel ")
    return False


def _presentation(cfg: RunConfig) -> pr.Presentation:
    """Presentation from a neutral file, or built from a descriptor file."""
    path = cfg.inputs[0]
    text = _read(path)
    if _is_neutral(text):
        p = pr.parse_neutral(text)
    else:
        a = cl.parse_descriptor(text, name=Path(path).stem)
        p = pr.amalgam_presentation(a, cfg.strategy)
    return pr.add_relators(p, cfg.extra.get("relators") or [])


def _bool(b: bool) -> str:
    return "true" if b else "false"


def _emit(cfg: RunConfig, data: dict, text_lines: list[str]) -> str:
    if cfg.as_json:
        return json.dumps(data, indent=2) + "\n"
    return "\n".join(text_lines) + "\n"


# -- subcommands ---------------------------------------------------------------------

def cmd_check(cfg: RunConfig) -> tuple[int, str]:
    d = _diagram(cfg.inputs[0])
    q = cfg.q or 2
    rep = classify_subdiagrams(d, q)
    gates = cl.gate_failures(d, cfg.flavor, q)
    g = girth(d)
    data = {"vertices": len(d.vertices), "edges": len(d.edges),
            "connected": d.is_connected(), "three_spherical": rep.three_spherical,
            "offending_triples": [list(t) for t in rep.offending_triples],
            "has_C2_2": rep.has_C2_2, "girth": None if g == float("inf") else int(g),
            "gate_failures": gates, "ok": not gates}
    lines = [f"vertices: {data['vertices']}", f"edges: {data['edges']}",
             f"connected: {_bool(data['connected'])}",
             f"three_spherical: {_bool(rep.three_spherical)}",
             f"has_C2_2: {_bool(rep.has_C2_2)}",
             f"girth: {'inf' if data['girth'] is None else data['girth']}"]
    lines += [f"offending triple: {' '.join(t)}" for t in rep.offending_triples]
    lines += [f"gate failure: {msg}" for msg in gates]
    lines.append("ok" if not gates else "rejected")
    return (0 if not gates else 1), _emit(cfg, data, lines)


def cmd_classify(cfg: RunConfig) -> tuple[int, str]:
    d = _diagram(cfg.inputs[0])
    q = _need_q(cfg)
    classes = cl.enumerate_delta_classes(d, cfg.flavor, q)
    reps = [cl.descriptor_report(a) for a in classes]
    flavor = cl.normalize_flavor(cfg.flavor)
    if flavor == cl.CT:
        n_or = sum(1 for r in reps if r["orientable"])
        head = f"{len(reps)} classes: {n_or} orientable, {len(reps) - n_or} non-orientable"
    else:
        n_or = None
        head = f"{len(reps)} classes"
    lines = [head]
    for k, a in enumerate(classes, start=1):
        delta = " ".join(f"{i}-{j}:{x}" for (i, j), x in zip(a.excess, a.delta)) or "(tree)"
        tag = ""
        if flavor == cl.CT:
            tag = " orientable" if reps[k - 1]["orientable"] else " non-orientable"
        lines.append(f"class {k}: {delta}{tag}")
    data = {"flavor": flavor, "q": q, "classes": len(reps), "orientable": n_or,
            "representatives": reps}
    return 0, _emit(cfg, data, lines)


def cmd_cover(cfg: RunConfig) -> tuple[int, str]:
    a = cl.parse_descriptor(_read(cfg.inputs[0]), name=Path(cfg.inputs[0]).stem)
    ori = cl.orientability(a)
    if ori.orientable:
        raise DomainError("descriptor is orientable; the double cover is disconnected")
    c = double_cover(a.diagram, ori.omega_star)
    lift = cl.lift_to_cover(a, c)
    lifted_ori = cl.orientability(lift.descriptor)
    fibers = [{"base_edge": list(f.base_edge), "kind": f.kind,
               "cycles": [list(cy) for cy in f.cycles],
               "holonomy": [str(h) for h in f.holonomy]} for f in lift.fibers]
    data = {"cover_vertices": len(c.cover.vertices), "cover_edges": len(c.cover.edges),
            "deck": {v: c.deck[v] for v in c.cover.vertices},
            "fibers": fibers, "lifted": cl.descriptor_report(lift.descriptor),
            "lifted_orientable": lifted_ori.orientable}
    lines = [f"cover vertices: {data['cover_vertices']}",
             f"cover edges: {data['cover_edges']}",
             "deck: " + " ".join(f"{v}->{c.deck[v]}" for v in c.cover.vertices)]
    for f in fibers:
        lines.append(f"fiber over {'-'.join(f['base_edge'])}: {f['kind']} "
                     + " | ".join(" ".join(cy) for cy in f["cycles"])
                     + " holonomy " + ",".join(f["holonomy"]))
    lines.append(f"lifted orientable: {_bool(lifted_ori.orientable)}")
    lines.append(cl.format_descriptor(lift.descriptor).rstrip("\n"))
    return 0, _emit(cfg, data, lines)


def cmd_growth(cfg: RunConfig) -> tuple[int, str]:
    d = _diagram(cfg.inputs[0])
    g = growth_series(d)
    terms = cfg.extra.get("terms", 10)
    coeffs = series_coefficients(g, terms)
    r = growth_rate(d, g)
    rho = None if r.finite else [str(r.rho_lo), str(r.rho_hi)]
    data = {"numerator": list(g.numerator), "denominator": list(g.denominator),
            "coefficients": coeffs, "finite": r.finite, "rho": rho,
            "omega": [float(r.omega_lo), float(r.omega_hi)]}
    lines = [f"series: {g}", "coefficients: " + " ".join(map(str, coeffs))]
    if r.finite:
        lines.append("finite group: omega = 1")
    else:
        lines.append(f"rho in [{float(r.rho_lo):.12g}, {float(r.rho_hi):.12g}]")
        lines.append(f"omega in [{float(r.omega_lo):.12g}, {float(r.omega_hi):.12g}]")
    return 0, _emit(cfg, data, lines)


def cmd_lattice(cfg: RunConfig) -> tuple[int, str]:
    d = _diagram(cfg.inputs[0])
    q = _need_q(cfg)
    rep = lattice_check(d, q)
    data = {"q": q, "converges": rep.series_converges_at_1_over_q,
            "omega": [float(rep.omega.omega_lo), float(rep.omega.omega_hi)],
            "paper_bound": rep.paper_bound_satisfied, "dominated": rep.dominated,
            "three_spherical": rep.three_spherical}
    lines = [f"q: {q}", f"converges={_bool(data['converges'])}",
             f"omega in [{data['omega'][0]:.12g}, {data['omega'][1]:.12g}]",
             f"paper_bound={_bool(rep.paper_bound_satisfied)}",
             f"dominated={_bool(rep.dominated)}",
             f"three_spherical={_bool(rep.three_spherical)}"]
    return 0, _emit(cfg, data, lines)


def cmd_twisted(cfg: RunConfig) -> tuple[int, str]:
    d = _diagram(cfg.inputs[0])
    sys_ = CoxeterSystem.from_diagram(d)
    images = cfg.extra.get("theta")
    if not images:
        raise DomainError("--theta is required")
    imgs = [s for s in images.replace(",", " ").split() if s]
    if len(imgs) != len(d.vertices):
        raise DomainError(f"--theta needs {len(d.vertices)} images, got {len(imgs)}")
    theta = dict(zip(d.vertices, imgs))
    try:
        rep = twisted_involutions(sys_, theta, cfg.radius)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    even = all(len(u) % 2 == 0 for u in rep.inv)
    decomp_ok = all(len(twisted_decomposition(sys_, theta, u)) * 2 == len(u) for u in rep.inv)
    by_len: dict[int, int] = {}
    for u in rep.inv:
        by_len[len(u)] = by_len.get(len(u), 0) + 1
    data = {"radius": cfg.radius, "inv": len(rep.inv), "delta": len(rep.delta_image),
            "equal": rep.equal_up_to_R, "even_lengths": even, "decompositions_ok": decomp_ok,
            "by_length": {str(k): by_len[k] for k in sorted(by_len)}}
    lines = [f"radius: {cfg.radius}", f"|Inv^theta|: {len(rep.inv)}",
             f"|delta^theta|: {len(rep.delta_image)}", f"equal: {_bool(rep.equal_up_to_R)}",
             f"even lengths: {_bool(even)}", f"decompositions: {_bool(decomp_ok)}",
             "by length: " + " ".join(f"{k}:{by_len[k]}" for k in sorted(by_len))]
    if cfg.extra.get("list"):
        lines += [f"  {format_word(u)}" for u in sorted(rep.inv, key=lambda w: (len(w), w))]
    return (0 if rep.equal_up_to_R else 1), _emit(cfg, data, lines)


def _write_or_return(cfg: RunConfig, text: str) -> str:
    if cfg.output:
        try:
            Path(cfg.output).write_text(text)
        except OSError as exc:
            raise DomainError(f"cannot write {cfg.output}: {exc.strerror or exc}") from None
        return f"wrote {cfg.output}\n"
    return text


def cmd_present(cfg: RunConfig) -> tuple[int, str]:
    p = _presentation(cfg)
    if cfg.as_json:
        data = {"generators": list(p.generators),
                "relators": [p.word_text(r) for r in p.relators],
                "metadata": {k: p.metadata[k] for k in sorted(p.metadata)}}
        return 0, _write_or_return(cfg, json.dumps(data, indent=2) + "\n")
    return 0, _write_or_return(cfg, pr.export(p, cfg.fmt))


def cmd_export_gap(cfg: RunConfig) -> tuple[int, str]:
    return 0, _write_or_return(cfg, pr.export_gap(_presentation(cfg)))


def cmd_abelianize(cfg: RunConfig) -> tuple[int, str]:
    inv = pr.abelianization(_presentation(cfg))
    data = {"invariants": list(inv.factors), "trivial": inv.trivial}
    return 0, _emit(cfg, data, [f"abelianization: {inv}"])


def _subgroup(p: pr.Presentation, spec: str | None):
    if spec is None or spec.strip() in ("", "trivial"):
        return []
    return [pr.parse_word(p, w) for w in spec.split(";") if w.strip()]


def cmd_enumerate(cfg: RunConfig) -> tuple[int, str]:
    p = _presentation(cfg)
    H = _subgroup(p, cfg.extra.get("subgroup"))
    cap = cfg.max_cosets or default_max_cosets()
    try:
        t = todd_coxeter(p.generators, p.relators, H, max_cosets=cap,
                         strategy=cfg.extra.get("method", "hlt"))
    except EnumerationOverflow as exc:
        raise DomainError(f"enumeration overflow: more than {exc.max_cosets} cosets") from None
    log = t.log
    data = {"index": t.index, "strategy": log.strategy, "max_live": log.max_live,
            "total_defined": log.total_defined, "coincidences": log.coincidences}
    lines = [f"index {t.index}", f"strategy: {log.strategy}",
             f"max live cosets: {log.max_live}", f"total defined: {log.total_defined}",
             f"coincidences: {log.coincidences}"]
    if cfg.extra.get("table"):
        Path(cfg.extra["table"]).write_text(t.to_csv())
    return 0, _emit(cfg, data, lines)


def _need_q(cfg: RunConfig) -> int:
    if cfg.q is None:
        raise UsageError("--q is required")
    return cfg.q


class UsageError(Exception):
    pass


COMMANDS = {
    "check": cmd_check, "classify": cmd_classify, "cover": cmd_cover,
    "growth": cmd_growth, "lattice": cmd_lattice, "twisted": cmd_twisted,
    "present": cmd_present, "abelianize": cmd_abelianize,
    "enumerate": cmd_enumerate, "export-gap": cmd_export_gap,
}


# -- argument parsing ----------------------------------------------------------------

def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="amalgam", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add(name, help_, inp="diagram file"):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input", help=inp)
        sp.add_argument("--json", action="store_true", dest="as_json",
                        help="machine-readable output")
        return sp

    sp = add("check", "diagram gates (3-spherical, C2(2), tree conditions)")
    sp.add_argument("--q", type=_positive)
    sp.add_argument("--flavor", default="CT")
    sp = add("classify", "enumerate delta classes and orientability")
    sp.add_argument("--q", type=_positive, required=True)
    sp.add_argument("--flavor", default="CT")
    add("cover", "double cover of a non-orientable CT descriptor", "descriptor file")
    sp = add("growth", "growth series and growth rate")
    sp.add_argument("--terms", type=int, default=10)
    sp = add("lattice", "lattice criterion at 1/q")
    sp.add_argument("--q", type=_positive, required=True)
    sp = add("twisted", "twisted involutions versus delta^theta on a ball")
    sp.add_argument("--theta", required=True,
                    help="images of the vertices (in diagram order), comma separated")
    sp.add_argument("--radius", type=int, default=6)
    sp.add_argument("--list", action="store_true", help="list the twisted involutions")
    pres_inp = "descriptor file or neutral presentation file"
    for name, help_ in (("present", "build and export a presentation"),
                        ("abelianize", "abelian invariants"),
                        ("enumerate", "Todd-Coxeter coset enumeration"),
                        ("export-gap", "export a presentation for GAP")):
        sp = add(name, help_, pres_inp)
        sp.add_argument("--strategy", choices=("table", "steinberg"), default="table")
        sp.add_argument("--relator", action="append", default=[], dest="relators",
                        help="extra relator in the n<v>/x<v> word grammar (repeatable)")
        if name in ("present", "export-gap"):
            sp.add_argument("-o", "--output")
        if name == "present":
            sp.add_argument("--format", choices=("neutral", "gap"), default="neutral",
                            dest="fmt")
        if name == "enumerate":
            sp.add_argument("--subgroup", default="trivial",
                            help="'trivial' or ';'-separated generating words")
            sp.add_argument("--method", choices=("hlt", "felsch"), default="hlt")
            sp.add_argument("--max-cosets", type=_positive)
            sp.add_argument("--table", help="write the coset table as CSV")
    return ap


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    known = {"subcommand", "input", "q", "flavor", "strategy", "radius", "max_cosets",
             "output", "fmt", "as_json"}
    extra = {k: v for k, v in vars(ns).items() if k not in known}
    cfg = RunConfig(ns.subcommand, [ns.input], q=getattr(ns, "q", None),
                    flavor=getattr(ns, "flavor", "CT"), strategy=getattr(ns, "strategy", "table"),
                    radius=getattr(ns, "radius", 6), max_cosets=getattr(ns, "max_cosets", None),
                    output=getattr(ns, "output", None), fmt=getattr(ns, "fmt", "neutral"),
                    as_json=ns.as_json, extra=extra)
    try:
        cfg.flavor = cl.normalize_flavor(cfg.flavor)
    except cl.ClassifyError as exc:
        raise UsageError(str(exc)) from None
    return cfg


def dispatch(argv) -> tuple[int, str, str]:
    """Run one subcommand; returns (exit code, stdout text, stderr text)."""
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse already printed its message
        return (0 if exc.code == 0 else 2), "", ""
    except UsageError as exc:
        return 2, "", f"amalgam: error: {exc}\n"
    try:
        code, out = COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        return 2, "", f"amalgam {cfg.subcommand}: error: {exc}\n"
    except (DomainError, DiagramError, cl.ClassifyError, pr.PresentationError,
            ValueError) as exc:
        return 1, "", f"amalgam {cfg.subcommand}: {exc}\n"
    return code, out, ""


def main(argv=None) -> int:
    code, out, err = dispatch(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
