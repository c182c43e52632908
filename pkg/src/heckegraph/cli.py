"""Command line front end: configs, graph exports, theorem checks and figure goldens."""
from __future__ import annotations

import argparse
import difflib
import json
import re
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .algebra import field_of_order, parse_point, parse_polynomial, prime_power
from .graph import (
    build_graph,
    check_covering,
    check_out_degree,
    check_pgl_descent,
    forget_map,
    graph_to_dot,
    graph_to_json,
    identify_change_of_ramification,
)
from .local_hecke import LocalHeckeDatum, UnsupportedSubgroupError, coset_reps, oracle_verify
from .moduli import INF, BundleType, level_from_coordinates
from .regularity import check_fibers, check_monodromy, is_regular
from .spectra import LayeringError, eigen_report, formula_dim
from .subgroups import EnumerationBoundError, RamificationDatum, RamPoint, SubgroupLabel

EXIT_OK, EXIT_VIOLATION, EXIT_BAD_INPUT = 0, 1, 2
MODES = ("PGL2", "GL2")
CORE_KEYS = ("q", "mode", "x", "ramification", "window", "max_q")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)
        self.line = line


def _key_lines(text: str, key: str) -> list[int]:
    return [text.count("\n", 0, m.start()) + 1 for m in re.finditer(rf'"{re.escape(key)}"\s*:', text)]


@dataclass
class JobConfig:
    q: int
    mode: str = "PGL2"
    x: str = "t"
    ramification: list[dict] = field(default_factory=list)
    window: int = 4
    max_q: int = 9
    options: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"q": self.q, "mode": self.mode, "x": self.x,
               "ramification": [dict(e) for e in self.ramification], "window": self.window}
        if self.max_q != 9:
            out["max_q"] = self.max_q
        out.update(self.options)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def datum(self) -> RamificationDatum:
        F = field_of_order(self.q)
        x = parse_point(F, self.x)
        entries = tuple(RamPoint(parse_point(F, e["point"]), int(e["depth"]),
                                 SubgroupLabel.parse(str(e["subgroup"]))) for e in self.ramification)
        return RamificationDatum(F, x, entries, self.mode)


def parse_config(text: str, source: str = "<config>") -> JobConfig:
    """Parse and validate a JSON job config; errors carry the offending line."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, source) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object", 1, source)

    def line(key, k=0):
        ls = _key_lines(text, key)
        return ls[k] if k < len(ls) else None

    def need_int(key, lo=None):
        v = raw[key]
        if not isinstance(v, int) or isinstance(v, bool) or (lo is not None and v < lo):
            raise ConfigError(f"{key} must be an integer" + (f" >= {lo}" if lo is not None else ""),
                              line(key), source)
        return v

    if "q" not in raw:
        raise ConfigError("missing required key 'q'", 1, source)
    q = need_int("q", 2)
    max_q = need_int("max_q", 2) if "max_q" in raw else 9
    try:
        prime_power(q)
    except ValueError:
        raise ConfigError(f"q = {q} is not a prime power", line("q"), source) from None
    if q > max_q:
        raise ConfigError(f"q = {q} exceeds the bound {max_q}", line("q"), source)
    mode = raw.get("mode", "PGL2")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}", line("mode"), source)
    window = need_int("window", 0) if "window" in raw else 4
    F = field_of_order(q)
    x = raw.get("x", "t")
    try:
        parse_point(F, str(x))
    except ValueError as exc:
        raise ConfigError(f"Hecke point: {exc}", line("x"), source) from None
    ram = raw.get("ramification", [])
    if not isinstance(ram, list):
        raise ConfigError("ramification must be a list", line("ramification"), source)
    base = text.find('"ramification"')
    tail = text[base:] if base >= 0 else ""
    offset = text.count("\n", 0, base) if base >= 0 else 0
    seen: dict = {}
    entries = []
    for i, e in enumerate(ram):
        pl = _key_lines(tail, "point")
        at = (pl[i] + offset) if i < len(pl) else line("ramification")
        if not isinstance(e, dict) or set(e) - {"point", "depth", "subgroup"} or "point" not in e:
            raise ConfigError(f"ramification[{i}] needs keys point, depth, subgroup", at, source)
        try:
            pt = parse_point(F, str(e["point"]))
        except ValueError as exc:
            raise ConfigError(f"ramification[{i}].point: {exc}", at, source) from None
        if pt in seen:
            raise ConfigError(f"ramification[{i}] repeats the point {pt.label} (first at line {seen[pt]})",
                              at, source)
        seen[pt] = at
        depth = e.get("depth", 1)
        if not isinstance(depth, int) or isinstance(depth, bool) or depth < 1:
            raise ConfigError(f"ramification[{i}].depth must be an integer >= 1", at, source)
        try:
            SubgroupLabel.parse(str(e.get("subgroup", "G"))).normalized(2)
        except ValueError as exc:
            raise ConfigError(f"ramification[{i}].subgroup: {exc}", at, source) from None
        entries.append({"point": str(e["point"]), "depth": depth, "subgroup": str(e.get("subgroup", "G"))})
    options = {k: v for k, v in raw.items() if k not in CORE_KEYS}
    cfg = JobConfig(q, mode, str(x), entries, window, max_q, options)
    try:
        cfg.datum()
    except ValueError as exc:
        raise ConfigError(str(exc), line("ramification") or 1, source) from None
    return cfg


def load_config(path: str) -> JobConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(exc), None, path) from None
    return parse_config(text, path)


# --- helpers ---------------------------------------------------------------------------

def _emit(payload, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _window(cfg: JobConfig, args) -> int:
    return args.window if args.window is not None else cfg.window


def _sub_datum(cfg: JobConfig, key: str) -> RamificationDatum:
    """The datum with the points listed under options[key] forgotten."""
    D = cfg.datum()
    names = cfg.options.get(key)
    if not isinstance(names, list) or not names:
        raise ConfigError(f"option '{key}' must list the points to forget")
    drop = {parse_point(D.field, str(n)) for n in names}
    missing = drop - set(D.points)
    if missing:
        raise ConfigError(f"cannot forget unramified point(s) {sorted(p.label for p in missing)}")
    return D.restrict([p for p in D.points if p not in drop])


def _coarser_datum(cfg: JobConfig) -> RamificationDatum:
    D = cfg.datum()
    changes = cfg.options.get("coarser")
    if not isinstance(changes, list) or not changes:
        raise ConfigError("option 'coarser' must list {point, subgroup} replacements")
    for e in changes:
        D = D.replace(parse_point(D.field, str(e["point"])), SubgroupLabel.parse(str(e["subgroup"])))
    return D


# --- commands --------------------------------------------------------------------------------

def cmd_build(cfg: JobConfig, args) -> int:
    G = build_graph(cfg.datum(), _window(cfg, args))
    _emit(graph_to_dot(G) if args.format == "dot" else graph_to_json(G), args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    """Re-render a graph JSON file (as written by build) in the requested format."""
    data = json.loads(Path(args.graph).read_text())
    if args.format == "json":
        _emit(data, args.out)
        return EXIT_OK
    ids = {v["key"]: f"v{i}" for i, v in enumerate(data["vertices"])}
    lines = ["digraph hecke {"]
    for v in data["vertices"]:
        tag = v["key"].replace("|", " | ", 1).replace('"', '\\"')
        style = ", style=dashed" if v.get("boundary") else ""
        lines.append(f'  {ids[v["key"]]} [label="{tag}"{style}];')
    for e in data["edges"]:
        lines.append(f'  {ids[e["src"]]} -> {ids[e["dst"]]} [label="{e["mult"]}"];')
    lines.append("}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_local_cosets(args) -> int:
    try:
        datum = LocalHeckeDatum(args.n, args.r, args.q, args.deg_x, args.depth,
                                SubgroupLabel.parse(args.subgroup))
        case, reps = coset_reps(datum)
        rep = oracle_verify(datum)
    except (UnsupportedSubgroupError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except EnumerationBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    out = dict(datum.to_json(), case=case, ok=rep.ok, count=rep.count, disjoint=rep.disjoint,
               covers=rep.covers, reps_in_K=rep.reps_in_K, kernel_in_S=rep.kernel_in_S, index=rep.index,
               representatives=[list(t.entries) for t in reps])
    _emit(out, args.out)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def run_check(cfg: JobConfig, name: str, window: int) -> dict:
    """Run one named check and return its report with an 'ok' flag."""
    D = cfg.datum()
    if name == "out-degree":
        rep = check_out_degree(build_graph(D, window))
    elif name == "covering":
        D2 = _sub_datum(cfg, "forget")
        rep = check_covering(forget_map(build_graph(D, window), build_graph(D2, window)))
        rep["ok"] = rep["is_covering"]
    elif name == "fibers":
        D2 = _sub_datum(cfg, "forget")
        rep = check_fibers(forget_map(build_graph(D, window), build_graph(D2, window)))
    elif name == "monodromy":
        D2 = _sub_datum(cfg, "forget")
        rep = check_monodromy(forget_map(build_graph(D, window), build_graph(D2, window)))
    elif name == "regularity":
        pts = cfg.options.get("points")
        pts = [parse_point(D.field, str(p)) for p in pts] if pts else None
        r = is_regular(D, pts)
        rep = {"ok": r.regular, "regular": r.regular, "transversal_sizes": r.transversal_sizes}
        if r.regular:
            rep["T_D"] = [list(t) for t in r.common.sorted()]
        else:
            rep["witness"] = [[list(m) for m in taus] for taus in r.witness]
    elif name == "pgl-descent":
        rep = check_pgl_descent(D, window)
    elif name == "change-of-ramification":
        rep = identify_change_of_ramification(build_graph(D, window), build_graph(_coarser_datum(cfg), window))
    else:
        raise ConfigError(f"unknown check {name!r}")
    return rep


def cmd_check(cfg: JobConfig, args, name: str) -> int:
    rep = run_check(cfg, name, _window(cfg, args))
    rep = dict(rep, check=name)
    _emit(rep, args.out)
    return EXIT_OK if rep["ok"] else EXIT_VIOLATION


def cmd_eig_dim(cfg: JobConfig, args) -> int:
    D = cfg.datum()
    G = build_graph(D, _window(cfg, args))
    samples = int(cfg.options.get("samples", 5))
    rep = eigen_report(G, formula_dim(D), samples, args.seed)
    rep["match"] = rep["formula_dim"] is None or rep["formula_dim"] == rep["generic_dim"]
    _emit(rep, args.out)
    ok = rep["match"] and all(s["dim"] == rep["generic_dim"] for s in rep["samples"])
    return EXIT_OK if ok else EXIT_VIOLATION


# --- figure goldens -------------------------------------------------------------------------

def catalogue() -> list[str]:
    root = resources.files("heckegraph") / "goldens"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_golden(figure: str) -> dict:
    if figure not in catalogue():
        raise ConfigError(f"unknown figure {figure!r}; known: {', '.join(catalogue())}")
    return json.loads((resources.files("heckegraph") / "goldens" / f"{figure}.json").read_text())


def _field_code(F, text: str) -> int:
    coeffs = parse_polynomial(F, text)
    if len(coeffs) > 1:
        raise ConfigError(f"{text!r} is not a constant")
    return coeffs[0] if coeffs else 0


def _named_level(G, names: str, level) -> tuple:
    """Level tuple from a golden's vertex name (coordinates or matrices)."""
    D = G.datum
    if names == "coordinates":
        return level_from_coordinates([INF if c == INF else _field_code(D.field, c) for c in level], D)
    out = []
    for e, m in zip(D.entries, level):
        R = e.ring()
        out.append(tuple(R.code([_field_code(D.field, s)]) for row in m for s in row))
    return tuple(out)


def _render(figure: str, classes: dict, edges: list) -> str:
    doc = {"figure": figure, "classes": classes, "edges": sorted(edges, key=lambda e: e["src"])}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def repro(figure: str) -> tuple[str, str, dict]:
    """(expected, computed) renderings of a golden figure plus extra reports."""
    gold = load_golden(figure)
    cfg = parse_config(json.dumps(gold["config"]), f"golden:{figure}")
    D = cfg.datum()
    G = build_graph(D, cfg.window)
    sp = G.space

    def vertex(entry):
        gap, level = entry
        return sp.canonical(BundleType(gap, 0), _named_level(G, gold["names"], level))

    exp_edges, got_edges = [], []
    for e in gold["edges"]:
        v = vertex(e["src"])
        want: dict[str, int] = {}
        for dst, m in e["out"]:
            k = G.key(vertex(dst))
            want[k] = want.get(k, 0) + m
        have = {G.key(w): m for w, m in G.edges[v].items()}
        if not e["complete"]:
            have = {k: have.get(k, 0) for k in want}
        exp_edges.append({"src": G.key(v), "out": want, "complete": e["complete"]})
        got_edges.append({"src": G.key(v), "out": have, "complete": e["complete"]})
    exp_classes = {str(k): v for k, v in gold["classes"].items()}
    got_classes = {k: sp.orbit_count(BundleType(int(k), 0)) for k in exp_classes}
    extra = {}
    if "refines" in gold:
        finer = D.replace(D.x, SubgroupLabel.parse(gold["refines"]["subgroup"]))
        rep = identify_change_of_ramification(build_graph(finer, cfg.window), G)
        extra["refines"] = rep["ok"] == gold["refines"]["ok"]
    return _render(figure, exp_classes, exp_edges), _render(figure, got_classes, got_edges), extra


def cmd_repro(args) -> int:
    figures = catalogue() if args.figure == "all" else [args.figure]
    status = EXIT_OK
    for fig in figures:
        expected, computed, extra = repro(fig)
        if args.out and len(figures) == 1:
            Path(args.out).write_text(computed)
        same = expected.encode() == computed.encode() and all(extra.values())
        print(f"{fig}: {'match' if same else 'MISMATCH'}")
        if not same:
            status = EXIT_VIOLATION
            sys.stderr.writelines(difflib.unified_diff(expected.splitlines(True), computed.splitlines(True),
                                                       f"{fig} (golden)", f"{fig} (computed)"))
            for k, v in extra.items():
                if not v:
                    print(f"{fig}: {k} check failed", file=sys.stderr)
    return status


# --- entry point ------------------------------------------------------------------------------

CHECK_COMMANDS = {"check-covering": "covering", "check-regularity": "regularity",
                  "check-pgl": "pgl-descent", "check-change": "change-of-ramification"}
CHECKS = ("covering", "regularity", "pgl-descent", "change-of-ramification", "out-degree", "fibers",
          "monodromy")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heckegraph", description="Hecke graphs of PGL2/GL2 over P^1 with level structure")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON job config")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--window", type=int, help="override the bundle window N")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized samples")
        return p

    for name in ("build",):
        common(sub.add_parser(name, help="build a window graph")).add_argument(
            "--format", choices=("json", "dot"), default="json")
    p = common(sub.add_parser("export", help="re-render a graph JSON file"), config=False)
    p.add_argument("--graph", required=True)
    p.add_argument("--format", choices=("json", "dot"), default="dot")
    p = common(sub.add_parser("local-cosets", help="local Hecke coset representatives with oracle check"),
               config=False)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--deg-x", type=int, default=1)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--subgroup", default="B")
    for name in CHECK_COMMANDS:
        common(sub.add_parser(name, help=f"run the {CHECK_COMMANDS[name]} check"))
    p = common(sub.add_parser("check", help="run a named check"))
    p.add_argument("--check", choices=CHECKS, required=True)
    common(sub.add_parser("eig-dim", help="generic eigenspace dimension via cusp propagation"))
    p = sub.add_parser("repro", help="compare a worked example graph with its golden")
    p.add_argument("figure", help="figure id or 'all'")
    p.add_argument("--out")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            return cmd_export(args)
        if args.command == "local-cosets":
            return cmd_local_cosets(args)
        if args.command == "repro":
            return cmd_repro(args)
        cfg = load_config(args.config)
        if args.command == "build":
            return cmd_build(cfg, args)
        if args.command == "eig-dim":
            return cmd_eig_dim(cfg, args)
        name = args.check if args.command == "check" else CHECK_COMMANDS[args.command]
        return cmd_check(cfg, args, name)
    except (ConfigError, LayeringError, EnumerationBoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
