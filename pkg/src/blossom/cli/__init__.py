"""
CLI Component

Command-line front end for reproducible batch runs. A RunConfig is parsed
from argv (optionally seeded from a named preset), dispatched to the
library components, and rendered as a plain-text report whose bytes
depend only on the config.

Key responsibilities:
- RunConfig parsing, presets and compiled-in safety caps
- Enumeration dumps and the orient/close/open file commands
- Exhaustive verification suites over the bijections
- Series coefficient dumps and identity checks
- Report rendering and exit codes (0 ok, 1 failed check, 2 usage)
"""

import argparse
import json
import logging
import os
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import pandas as pd

from ..blossoming import (
    MAX_TREE_EDGES, blossoming_code, blossoming_from_record, closure, complete_closure,
    decompose_doubly_rooted, enumerate_well_charged_trees, format_blossoming, glue,
    is_well_charged, open_blossoming, open_pointed, opening, orient_tree, tree_weight,
)
from ..mobiles import (
    MAX_LABELING_VERTICES, check_commutation, check_d_blossoming_mobile, check_geodesic_relation,
    check_labeled_mobile, geodesic_labeling, labelings_satisfying_conditions, lift_orientation,
    mobile_round_indegrees, phi_BDG, phi_BF, restrict_orientation, round_indegrees,
    subdivide_to_bipartite, upsilon_d,
)
from ..orientation import (
    alpha_dk_orientation, classify_tightness, format_orientation, minimal_alpha_d,
    orientation_from_record, outdegrees, quasi_eulerian_minimal, tightness_by_flow,
)
from ..planar_map import (
    MAX_MAP_EDGES, MAX_SPIN_EDGES, MAX_SPIN_VERTICES, Color, DegreeProfile, PlaneMap,
    canonical_code, dual, enumerate_bipartite_plane_maps, enumerate_bipartite_planar_maps,
    enumerate_doubly_rooted_maps, enumerate_pointed_maps, enumerate_spin_maps, format_map,
    map_from_record, parse_record, split_records, weight,
)
from ..series import (
    MAX_SERIES_ORDER, MAX_T_ORDER, ClosedFormCatalog, TruncatedSeries, doubly_rooted_series,
    ising_from_bipartite, ising_ring, ising_series, plane_map_series, q_from_p, quartic_P,
    quartic_closed_forms, series_from_weights, solve_Q, solve_tree_system,
)

logger = logging.getLogger(__name__)

REPORT_HEADER = "# blossom-report v1"
DEFAULT_PRESETS = "configs/run_configs.json"
THREADS_ENV = "BLOSSOM_THREADS"
MAX_NU_CAP = 4

CAPS = {
    "edges": MAX_MAP_EDGES,
    "tree_edges": MAX_TREE_EDGES,
    "order": MAX_SERIES_ORDER,
    "t_order": MAX_T_ORDER,
    "vertices": MAX_SPIN_VERTICES,
    "nu_cap": MAX_NU_CAP,
}

COMMANDS = {
    "enumerate": ("maps", "trees", "spin-maps"),
    "orient": (),
    "close": (),
    "open": (),
    "verify": ("bijection", "roundtrip", "tightness", "trumpets", "geodesic", "mobiles",
               "doubly-rooted"),
    "series": ("trees", "plane-maps", "quartic", "quartic-ising"),
}

# Not part of the report echo: they change how a run executes, never its result.
_EXECUTION_FIELDS = ("threads", "verbose")


class UsageError(ValueError):
    """Bad command line or config text; exit code 2."""


def command_name(group: str, target: Optional[str] = None) -> str:
    """``verify`` + ``doubly-rooted`` -> ``verify_doubly_rooted``."""
    return group if not target else f"{group}_{target.replace('-', '_')}"


COMMAND_NAMES = tuple(command_name(group, target)
                      for group, targets in COMMANDS.items()
                      for target in (targets or (None,)))


# ----------------------------------------------------------------------
# Configuration
# ----------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    edges: int = 3
    tree_edges: int = 4
    order: int = 4
    t_order: int = 8
    nu_cap: int = 2
    vertices: int = 2
    max_degree: Optional[int] = None
    degrees: Optional[List[int]] = None
    d: Optional[int] = None
    charge: int = 0
    tau: Optional[int] = None
    sign: str = "minus"
    root_color: str = "w"
    input: Optional[str] = None
    output: Optional[str] = None
    seed: int = 0
    threads: int = 1
    verbose: bool = False

    def validate(self) -> None:
        if self.command not in COMMAND_NAMES:
            raise UsageError(f"Unknown command: {self.command}")
        for name, cap in CAPS.items():
            value = getattr(self, name)
            if value < 0:
                raise UsageError(f"--{name.replace('_', '-')} must be non-negative, got {value}")
            if value > cap:
                raise UsageError(f"--{name.replace('_', '-')} {value} exceeds the compiled-in cap {cap}")
        if self.d is not None and self.d < 1:
            raise UsageError(f"--d must be at least 1, got {self.d}")
        if self.max_degree is not None and self.max_degree < 1:
            raise UsageError(f"--max-degree must be at least 1, got {self.max_degree}")
        if self.degrees is not None and (not self.degrees or min(self.degrees) < 1):
            raise UsageError(f"--degrees must list positive degrees, got {self.degrees}")
        if self.sign not in ("minus", "plus"):
            raise UsageError(f"Unknown sign: {self.sign}")
        if self.root_color not in ("w", "b"):
            raise UsageError(f"Unknown root color: {self.root_color}")
        if self.threads < 1:
            raise UsageError(f"thread count must be positive, got {self.threads}")

    def to_text(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"Invalid config text: {e}") from e
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"Unknown config keys: {unknown}")
        config = cls(**data)
        config.validate()
        return config

    def echo(self) -> str:
        data = {k: v for k, v in asdict(self).items() if k not in _EXECUTION_FIELDS}
        return json.dumps(data, sort_keys=True)


def load_presets(path: str = DEFAULT_PRESETS) -> Dict[str, Dict]:
    """Named presets from a JSON file; a missing file means no presets."""
    try:
        with open(path, 'r') as f:
            data = json.load(f)
        presets = data.get("presets", {})
        logger.debug(f"Loaded {len(presets)} presets from {path}")
        return presets
    except FileNotFoundError:
        logger.warning(f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in config: {e}")
    return {}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blossom",
        description="Blossoming bijections for bipartite plane maps: enumeration, "
                    "verification suites and series.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("target", nargs="?", help="sub-command of enumerate, verify and series")
    parser.add_argument("--preset", type=str, help="named preset from the presets file")
    parser.add_argument("--presets-file", type=str, default=DEFAULT_PRESETS)
    parser.add_argument("--edges", type=int)
    parser.add_argument("--tree-edges", type=int)
    parser.add_argument("--order", type=int, help="series order, in edges")
    parser.add_argument("--t-order", type=int)
    parser.add_argument("--nu-cap", type=int)
    parser.add_argument("--vertices", type=int, help="quartic vertices for spin maps")
    parser.add_argument("--max-degree", type=int)
    parser.add_argument("--degrees", type=int, nargs="+")
    parser.add_argument("--d", type=int)
    parser.add_argument("--charge", type=int)
    parser.add_argument("--tau", type=int, help="1-based vertex index")
    parser.add_argument("--sign", choices=["minus", "plus"])
    parser.add_argument("--root-color", choices=["w", "b"])
    parser.add_argument("--input", type=str)
    parser.add_argument("--output", type=str)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--verbose", action="store_true")
    return parser


def parse_config(argv: List[str]) -> RunConfig:
    """Build a validated RunConfig; usage errors exit with code 2."""
    parser = _parser()
    args = parser.parse_args(argv)
    targets = COMMANDS[args.command]
    if targets and args.target not in targets:
        parser.error(f"{args.command} needs one of: {', '.join(targets)}")
    if not targets and args.target is not None:
        parser.error(f"{args.command} takes no sub-command")

    values: Dict = {}
    if args.preset:
        presets = load_presets(args.presets_file)
        if args.preset not in presets:
            parser.error(f"Unknown preset: {args.preset}")
        values.update(presets[args.preset])
    for f in fields(RunConfig):
        given = getattr(args, f.name, None)
        if f.name != "command" and given is not None and given is not False:
            values[f.name] = given
    if "threads" not in values:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            values["threads"] = int(raw)
        except ValueError:
            parser.error(f"{THREADS_ENV} must be an integer, got {raw!r}")
    values["command"] = command_name(args.command, args.target)

    unknown = sorted(set(values) - {f.name for f in fields(RunConfig)})
    if unknown:
        parser.error(f"Unknown preset keys: {unknown}")
    config = RunConfig(**values)
    try:
        config.validate()
    except UsageError as e:
        parser.error(str(e))
    return config


# ----------------------------------------------------------------------
# Report
# ----------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    """Sections and checks in insertion order; phase timings stay out of the text."""
    command: str
    echo: str
    sections: List[Tuple[str, str]] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)
    phases: Dict[str, float] = field(default_factory=dict)

    def table(self, title: str, rows: List[Dict], columns: Optional[List[str]] = None) -> pd.DataFrame:
        frame = pd.DataFrame(rows, columns=columns)
        body = frame.to_string(index=False) if len(frame) else "(empty)"
        self.sections.append((title, body))
        return frame

    def text(self, title: str, body: str) -> None:
        self.sections.append((title, body.rstrip() or "(empty)"))

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(CheckResult(name, bool(passed), detail))
        logger.info(f"{'PASS' if passed else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
        return bool(passed)

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.phases[name] = elapsed
            logger.info(f"phase {name}: {elapsed:.3f}s")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[CheckResult]:
        return next((c for c in self.checks if not c.passed), None)

    def render(self) -> str:
        lines = [REPORT_HEADER, f"# command: {self.command}", f"# config: {self.echo}"]
        for title, body in self.sections:
            lines += ["", f"## {title}", body]
        lines += ["", "## checks"]
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f" ({c.detail})" if c.detail else ""))
        if not self.checks:
            lines.append("(none)")
        return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------

def _fan_out(fn: Callable, items: Iterable, threads: int) -> List:
    """Map ``fn`` over ``items`` keeping their order."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _guarded(fn: Callable) -> Callable:
    """Wrap a per-object check so domain errors count as a failure."""
    def run(item):
        try:
            return bool(fn(item)), ""
        except (ValueError, ArithmeticError) as e:
            logger.debug(f"{fn.__name__}: {e}")
            return False, str(e)
    run.__name__ = fn.__name__
    return run


def _tally(report: Report, name: str, outcomes: List[Tuple[bool, str]]) -> Tuple[int, int]:
    failures = [detail for ok, detail in outcomes if not ok]
    detail = f"{len(failures)} of {len(outcomes)} failed" + (f"; first: {failures[0]}" if failures and failures[0] else "")
    report.check(name, not failures, detail if failures else f"{len(outcomes)} objects")
    return len(outcomes), len(failures)


def _max_degree(m: PlaneMap) -> int:
    return max([m.degree(v) for v in range(m.num_vertices)] + [1])


def _profile_columns(profile: DegreeProfile) -> Dict[str, str]:
    return {"white degrees": " ".join(map(str, profile.white_degrees)) or "-",
            "black degrees": " ".join(map(str, profile.black_degrees)) or "-"}


def _read_records(config: RunConfig) -> List[str]:
    if not config.input:
        raise UsageError(f"{config.command} needs --input")
    with open(config.input, 'r') as f:
        return split_records(f.read())


def _emit(config: RunConfig, report: Report, title: str, records: List[str]) -> None:
    text = "\n\n".join(records)
    if config.output:
        with open(config.output, 'w') as f:
            f.write(text + "\n")
        logger.info(f"{len(records)} records saved to {config.output}")
        report.text(title, f"{len(records)} records written to {config.output}")
    else:
        report.text(title, text)


def _grade(monomial: Dict[str, int]) -> int:
    """Degree sum of a monomial in x_k / y_k variables."""
    return sum(int(var[1:]) * x for var, x in monomial.items() if var[0] in "xy" and var[1:].isdigit())


def _coefficient_rows(s: TruncatedSeries, keep: Optional[Callable[[Dict[str, int]], bool]] = None) -> List[Dict]:
    rows = []
    for monomial, c in s.monomials():
        if keep is None or keep(monomial):
            body = " ".join(f"{v}^{x}" for v, x in sorted(monomial.items())) or "1"
            rows.append({"monomial": body, "coefficient": str(c)})
    return sorted(rows, key=lambda r: r["monomial"])


# ----------------------------------------------------------------------
# enumerate / orient / close / open
# ----------------------------------------------------------------------

def _enumerate_maps(config: RunConfig, report: Report) -> None:
    rows, records = [], []
    for n in range(config.edges + 1):
        plane = enumerate_bipartite_plane_maps(n, max_white_degree=config.max_degree)
        planar = enumerate_bipartite_planar_maps(n)
        rows.append({"edges": n, "rooted planar": len(planar), "rooted plane": len(plane)})
        if n == config.edges:
            records = [format_map(m) for m in plane]
    report.table("counts", rows)
    _emit(config, report, f"plane maps with {config.edges} edges", records)


def _enumerate_trees(config: RunConfig, report: Report) -> None:
    trees = enumerate_well_charged_trees(config.charge, config.tree_edges, config.max_degree,
                                         Color(config.root_color), degrees=config.degrees)
    frame = pd.DataFrame([{"tree edges": t.num_edges(), "stems": len(t.stem_darts())} for t in trees],
                         columns=["tree edges", "stems"])
    counts = frame.groupby(["tree edges", "stems"]).size().reset_index(name="trees")
    report.table("counts", counts.to_dict("records"), ["tree edges", "stems", "trees"])
    _emit(config, report, f"well-charged trees of charge {config.charge}",
          [format_blossoming(t) for t in trees])


def _enumerate_spin_maps(config: RunConfig, report: Report) -> None:
    spin_maps = enumerate_spin_maps(n_vertices=config.vertices, degree=4)
    frame = pd.DataFrame([{"monochromatic edges": s.mono_count,
                           "white vertices": sum(1 for c in s.spins if c is Color.WHITE)}
                          for _, s in spin_maps],
                         columns=["monochromatic edges", "white vertices"])
    counts = frame.groupby(["monochromatic edges", "white vertices"]).size().reset_index(name="maps")
    report.table("counts", counts.to_dict("records"), ["monochromatic edges", "white vertices", "maps"])
    _emit(config, report, f"quartic spin maps with {config.vertices} vertices",
          [format_map(m, s) for m, s in spin_maps])


def _orient(config: RunConfig, report: Report) -> None:
    records, rows = [], []
    for i, text in enumerate(_read_records(config), 1):
        m = map_from_record(parse_record(text))
        d = config.d or max(DegreeProfile.of(m).max_white, 1)
        if config.tau is None:
            o = minimal_alpha_d(m, d)
        else:
            tau = config.tau - 1
            o = alpha_dk_orientation(m, tau, d, m.degree(tau), config.sign)
            if not report.check(f"record {i}: alpha_(d,k)^{config.sign} exists", o is not None):
                continue
        for v, out in enumerate(outdegrees(m, o)):
            rows.append({"record": i, "vertex": v + 1, "color": m.color(v).value if m.colors else "-",
                         "degree": m.degree(v), "outdegree": f"{out}/{o.k}"})
        records.append(format_map(m) + "\n" + format_orientation(o))
    report.table("outdegrees", rows)
    _emit(config, report, "oriented maps", records)


def _close(config: RunConfig, report: Report) -> None:
    records = []
    for i, text in enumerate(_read_records(config), 1):
        tree = blossoming_from_record(parse_record(text))
        witness = is_well_charged(tree)
        detail = "" if witness.ok else witness.violations[0][1]
        if not report.check(f"record {i}: well-charged", witness.ok, detail):
            continue
        if tree.charge() == 0:
            closed = closure(tree)
            body = format_map(closed.to_plane_map())
            if closed.values is not None:
                body += "\n" + format_orientation(closed.orientation())
        else:
            m, tau = complete_closure(tree)
            body = format_map(m) + f"\ntau {tau + 1}"
        records.append(body)
    _emit(config, report, "closed maps", records)


def _open(config: RunConfig, report: Report) -> None:
    records = []
    for i, text in enumerate(_read_records(config), 1):
        record = parse_record(text)
        m = map_from_record(record)
        try:
            if "tau" in record:
                tau = int(record["tau"][0]) - 1
                tree = open_pointed(m, tau, config.d or _max_degree(m))
            else:
                if "values" in record:
                    o = orientation_from_record(record)
                else:
                    o = minimal_alpha_d(m, config.d or max(DegreeProfile.of(m).max_white, 1))
                tree = opening(m, o)
        except ValueError as e:
            report.check(f"record {i}: opening", False, str(e))
            continue
        report.check(f"record {i}: opening", True)
        records.append(format_blossoming(tree))
    _emit(config, report, "blossoming trees", records)


# ----------------------------------------------------------------------
# verify suites
# ----------------------------------------------------------------------

def _verify_bijection(config: RunConfig, report: Report) -> None:
    trees = enumerate_well_charged_trees(0, config.edges, root_color=Color.WHITE)
    closed = _fan_out(lambda t: closure(t).to_plane_map(), trees, config.threads)
    tree_codes = [canonical_code(m) for m in closed]
    tree_counts = Counter((m.num_edges, DegreeProfile.of(m)) for m in closed)

    map_counts: Counter = Counter()
    map_codes = set()
    for n in range(config.edges + 1):
        for m in enumerate_bipartite_plane_maps(n):
            map_counts[(n, DegreeProfile.of(m))] += 1
            map_codes.add(canonical_code(m))

    rows = []
    for n, profile in sorted(set(tree_counts) | set(map_counts),
                             key=lambda key: (key[0], key[1].white_degrees, key[1].black_degrees)):
        rows.append({"edges": n, **_profile_columns(profile),
                     "trees": tree_counts[(n, profile)], "maps": map_counts[(n, profile)]})
    report.table("counts by degree profile", rows)
    mismatched = [r for r in rows if r["trees"] != r["maps"]]
    report.check("profile counts match", not mismatched,
                 f"{len(mismatched)} profiles differ" if mismatched else f"{len(rows)} profiles")
    report.check("closure is injective", len(set(tree_codes)) == len(tree_codes),
                 f"{len(tree_codes)} trees")
    report.check("closure image is every plane map", set(tree_codes) == map_codes)


def _verify_roundtrip(config: RunConfig, report: Report) -> None:
    def tree_round_trip(tree):
        delta = max([tree.degree(v) for v in range(len(tree.vertices))] + [1])
        for d in (delta, delta + 1):
            oriented = orient_tree(tree, d)
            if blossoming_code(open_blossoming(closure(oriented))) != blossoming_code(oriented):
                return False
        return True

    def map_round_trip(m):
        tree = opening(m, minimal_alpha_d(m, _max_degree(m)))
        return canonical_code(closure(tree).to_plane_map()) == canonical_code(m)

    trees = enumerate_well_charged_trees(0, config.tree_edges)
    maps = [m for n in range(1, config.edges + 1) for m in enumerate_bipartite_plane_maps(n)]
    rows = []
    for name, fn, items in (("opening after closure on trees", tree_round_trip, trees),
                            ("closure after opening on maps", map_round_trip, maps)):
        total, failed = _tally(report, name, _fan_out(_guarded(fn), items, config.threads))
        rows.append({"round trip": name, "objects": total, "mismatches": failed})
    report.table("round trips", rows)


def _verify_tightness(config: RunConfig, report: Report) -> None:
    def verdicts(pointed):
        m, tau = pointed
        return (m.color(tau).value, classify_tightness(m, tau).verdict.value,
                tightness_by_flow(m, tau, _max_degree(m)).value)

    pointed = [p for n in range(1, config.edges + 1) for p in enumerate_pointed_maps(n)]
    results = _fan_out(verdicts, pointed, config.threads)
    counts = Counter(results)
    rows = [{"tau color": c, "by cuts": cut, "by flows": flow, "maps": counts[(c, cut, flow)]}
            for c, cut, flow in sorted(counts)]
    report.table("tightness verdicts", rows)
    disagreements = sum(n for (c, cut, flow), n in counts.items() if cut != flow)
    report.check("cut and flow verdicts agree", disagreements == 0,
                 f"{disagreements} of {len(results)} disagree" if disagreements else f"{len(results)} pointed maps")


def _verify_trumpets(config: RunConfig, report: Report) -> None:
    rows = []
    for k in range(1, min(3, config.edges) + 1):
        for charge, tau_color, verdict in ((k, Color.BLACK, "trumpet"), (-k, Color.WHITE, "cornet")):
            trees = enumerate_well_charged_trees(charge, config.edges, root_color=Color.WHITE)
            closed = _fan_out(complete_closure, trees, config.threads)
            tree_codes = [canonical_code(m, marked=False, pointed=tau) for m, tau in closed]
            tree_counts = Counter((m.num_edges, DegreeProfile.of(m, skip=[tau])) for m, tau in closed)

            candidates = [(m, tau) for n in range(1, config.edges + 1)
                          for m, tau in enumerate_pointed_maps(n, Color.WHITE, tau_color)
                          if m.degree(tau) == k]
            tight = [(m, tau) for (m, tau), v in zip(candidates, _fan_out(
                lambda p: classify_tightness(*p).verdict.value, candidates, config.threads)) if v == verdict]
            map_codes = {canonical_code(m, marked=False, pointed=tau) for m, tau in tight}
            map_counts = Counter((m.num_edges, DegreeProfile.of(m, skip=[tau])) for m, tau in tight)

            for n, profile in sorted(set(tree_counts) | set(map_counts),
                                     key=lambda key: (key[0], key[1].white_degrees, key[1].black_degrees)):
                rows.append({"kind": verdict, "k": k, "edges": n, **_profile_columns(profile),
                             "trees": tree_counts[(n, profile)], "maps": map_counts[(n, profile)]})
            same = tree_counts == map_counts
            report.check(f"{verdict}s with k={k}: counts match", same,
                         f"{len(trees)} trees, {len(tight)} maps")
            report.check(f"{verdict}s with k={k}: complete closure is a bijection",
                         len(set(tree_codes)) == len(tree_codes) and set(tree_codes) == map_codes)
    report.table("counts by degree profile", rows)


def _verify_geodesic(config: RunConfig, report: Report) -> None:
    maps = [m for n in range(1, config.edges + 1) for m in enumerate_bipartite_plane_maps(n)]

    def relation(m):
        d = max(DegreeProfile.of(m).max_white, 1)
        return check_geodesic_relation(m, minimal_alpha_d(m, d), d)

    def unique_labeling(m):
        d = dual(m)
        return labelings_satisfying_conditions(d) == [geodesic_labeling(d).labels]

    general = {}
    for n in range(1, min(config.edges, MAX_SPIN_EDGES) + 1):
        for m, _ in enumerate_spin_maps(degree=None, n_edges=n):
            general.setdefault(canonical_code(m, marked=False), m)

    def pull_back(m):
        o = quasi_eulerian_minimal(m)
        lifted = lift_orientation(m, o)
        delta = max(m.degree(v) for v in range(m.num_vertices))
        return (lifted.values == minimal_alpha_d(subdivide_to_bipartite(m), delta).values
                and restrict_orientation(m, lifted) == o)

    small = [m for m in maps if m.num_faces <= MAX_LABELING_VERTICES]
    rows = []
    for name, fn, items in (("label drop equals orientation value minus one", relation, maps),
                            ("local conditions force the geodesic labeling", unique_labeling, small),
                            ("quasi-Eulerian minimal lifts to minimal alpha_Delta",
                             pull_back, [general[c] for c in sorted(general)])):
        total, failed = _tally(report, name, _fan_out(_guarded(fn), items, config.threads))
        rows.append({"property": name, "maps": total, "failures": failed})
    report.table("geodesic labelings", rows)


def _verify_mobiles(config: RunConfig, report: Report) -> None:
    maps = [m for n in range(1, config.edges + 1) for m in enumerate_bipartite_plane_maps(n)
            if m.num_faces >= 2]
    cases = [(m, d) for m in maps for d in (max(DegreeProfile.of(m).max_white, 1),
                                              max(DegreeProfile.of(m).max_white, 1) + 1)]

    def commutation(case):
        return check_commutation(*case)

    def direct_mobile(case):
        m, d = case
        o = minimal_alpha_d(m, d)
        b = phi_BF(m, o)
        return (check_d_blossoming_mobile(b, d).ok
                and b.excess() == len(m.faces[m.outer_face])
                and mobile_round_indegrees(b) == round_indegrees(m, o))

    def labeled_mobile(case):
        return check_labeled_mobile(phi_BDG(dual(case[0]))).ok

    def rebuilt_mobile(case):
        m, d = case
        return check_d_blossoming_mobile(upsilon_d(phi_BDG(dual(m)), d), d).ok

    rows = []
    for name, fn in (("phi_BF of the dual equals upsilon_d of phi_BDG", commutation),
                     ("phi_BF output is a d-blossoming mobile", direct_mobile),
                     ("phi_BDG output is a labeled mobile", labeled_mobile),
                     ("upsilon_d output is a d-blossoming mobile", rebuilt_mobile)):
        total, failed = _tally(report, name, _fan_out(_guarded(fn), cases, config.threads))
        rows.append({"property": name, "cases": total, "failures": failed})
    report.table("mobiles", rows)


def _verify_doubly_rooted(config: RunConfig, report: Report) -> None:
    def pair_code(pair):
        (m1, tau1), (m2, tau2) = pair
        return (canonical_code(m1, marked=False, pointed=tau1),
                canonical_code(m2, marked=False, pointed=tau2))

    rows = []
    pair_series = solve_tree_system(max(config.edges, 1), max(config.edges, 1))
    for colors in ("ww", "wb", "bb"):
        doubly = [entry for n in range(1, config.edges + 1)
                  for entry in enumerate_doubly_rooted_maps(n, colors)]
        codes = {canonical_code(m, marked=False, second_root=r2) for m, r2 in doubly}

        def fiber(entry):
            m, r2 = entry
            pair = decompose_doubly_rooted(m, m.root_dart, r2)
            k = pair[0][0].degree(pair[0][1])
            glued = [glue(pair[0], pair[1], r) for r in range(k)]
            glued_codes = [canonical_code(g, marked=False, second_root=s) for g, s in glued]
            back = [pair_code(decompose_doubly_rooted(g, g.root_dart, s)) for g, s in glued]
            return (canonical_code(m, marked=False, second_root=r2) in glued_codes
                    and len(set(glued_codes)) == k
                    and set(glued_codes) <= codes
                    and all(b == pair_code(pair) for b in back)), pair_code(pair), k

        def checked(entry):
            try:
                return fiber(entry)
            except ValueError as e:
                logger.debug(f"fiber check: {e}")
                return False, None, 0

        results = _fan_out(checked, doubly, config.threads)
        failures = sum(1 for ok, _, _ in results if not ok)
        report.check(f"{colors}: gluing inverts the decomposition", failures == 0,
                     f"{failures} of {len(results)} failed" if failures else f"{len(results)} maps")
        fibers = {code: k for ok, code, k in results if code is not None}
        report.check(f"{colors}: decomposition is k-to-one", sum(fibers.values()) == len(doubly),
                     f"{len(fibers)} pairs, {len(doubly)} maps")

        ring = pair_series.ring
        oracle = series_from_weights(ring, [weight(m, "planar") for m, _ in doubly])
        identity = doubly_rooted_series(pair_series, colors) == oracle
        report.check(f"{colors}: doubly rooted series matches enumeration", identity)
        rows.append({"root colors": colors, "maps": len(doubly), "trumpet-cornet pairs": len(fibers),
                     "fiber failures": failures})
    report.table("doubly rooted maps", rows)


# ----------------------------------------------------------------------
# series
# ----------------------------------------------------------------------

def _tree_degrees(config: RunConfig) -> Tuple[int, Optional[List[int]]]:
    max_degree = config.max_degree or max(min(config.order, 4), 1)
    return max_degree, config.degrees


def _series_trees(config: RunConfig, report: Report) -> None:
    max_degree, degrees = _tree_degrees(config)
    with report.phase("tree system"):
        pair = solve_tree_system(max_degree, config.order, degrees=degrees)
    n = config.order
    rows = []
    for color, series, charges in ((Color.WHITE, pair.W, range(0, 2 * n + 1)),
                                   (Color.BLACK, pair.B, range(-2 * n, 2))):
        weights = []
        for k in charges:
            trees = enumerate_well_charged_trees(k, n, root_color=color, planted=True,
                                                 degrees=pair.degrees)
            weights += [tree_weight(t) for t in trees]
            component = pair.component(color, k)
            if not component.is_zero():
                name = f"{'W' if color is Color.WHITE else 'B'}_{k}"
                rows.append({"series": name, "terms": len(component.terms),
                             "trees": len(trees)})
        oracle = series_from_weights(pair.ring, weights)
        name = "W" if color is Color.WHITE else "B"
        report.check(f"{name} equals the planted tree enumeration", series == oracle,
                     f"{len(weights)} planted trees")
    report.table("tree series components", rows)
    report.table("W_0 coefficients", _coefficient_rows(pair.component(Color.WHITE, 0)))
    if config.output:
        _emit(config, report, "dumps", [f"# W\n{pair.W.dump()}", f"# B\n{pair.B.dump()}"])


def _series_plane_maps(config: RunConfig, report: Report) -> None:
    max_degree, degrees = _tree_degrees(config)
    with report.phase("tree system"):
        pair = solve_tree_system(max_degree, config.order, degrees=degrees)
    allowed = set(pair.degrees)
    series = plane_map_series(pair)
    weights, rows = [], []
    for n in range(1, config.order + 1):
        maps = [m for m in enumerate_bipartite_plane_maps(n)
                if all(m.degree(v) in allowed for v in range(m.num_vertices))]
        weights += [weight(m, "plane") for m in maps]
        rows.append({"edges": n, "plane maps": len(maps)})
    report.table("enumerated plane maps", rows)
    report.check("plane map series equals the enumeration",
                 series == series_from_weights(pair.ring, weights), f"{len(weights)} maps")
    report.table("coefficients", _coefficient_rows(series))
    if config.output:
        _emit(config, report, "dumps", [series.dump()])


def _series_quartic(config: RunConfig, report: Report) -> None:
    n = config.order
    with report.phase("quartic P"):
        P = quartic_P(n, cross_check=False)
        pair = solve_tree_system(4, n, degrees=(2, 4))
    u = P.ring.var("u")
    B1 = pair.component(Color.BLACK, 1).to_ring(P.ring)
    report.check("P equals u(1 + B_1) from the tree system", u * (1 + B1) == P)
    report.check("P solves its equation", ClosedFormCatalog.p_equation(P) == P)
    with report.phase("closed forms"):
        forms = quartic_closed_forms(P)
    report.check("d/du M_o equals the plane closed form", forms.planar.differentiate("u") == forms.plane)
    x4 = P.ring.var("x4")
    denominator = ClosedFormCatalog.pol_denominator(P) * x4
    report.check("Pol equals 9 x4 (9 P^2 x4 y4 - 1) M_(o,4)",
                 forms.planar_root4 * denominator == ClosedFormCatalog.pol(P),
                 f"exact to grade {forms.planar_root4.ring.order}")

    plane = plane_map_series(pair).to_ring(P.ring)
    report.check("plane closed form equals the tree-system plane series", forms.plane == plane)

    # maps with degrees in {2, 4} have an even number of edges
    enumerated = min(n, 4)
    # M_(o,4) comes out of a division by x4 and is exact two edges short of P
    enumerated4 = min(enumerated, forms.planar_root4.ring.order // 2)
    planar, rooted4 = [], []
    for e in range(1, enumerated + 1):
        for m in enumerate_bipartite_planar_maps(e):
            if all(m.degree(v) in (2, 4) for v in range(m.num_vertices)):
                planar.append(weight(m, "planar"))
                if m.degree(m.root_vertex) == 4 and e <= enumerated4:
                    rooted4.append(weight(m, "planar"))
    ring = P.ring.with_order(2 * enumerated)
    report.check("planar closed form equals the enumeration",
                 forms.planar.to_ring(ring) == series_from_weights(ring, planar),
                 f"{len(planar)} maps up to {enumerated} edges")
    ring4 = P.ring.with_order(2 * enumerated4)
    report.check("M_(o,4) equals the enumeration",
                 forms.planar_root4.to_ring(ring4) == series_from_weights(ring4, rooted4),
                 f"{len(rooted4)} maps up to {enumerated4} edges")
    report.table("P coefficients", _coefficient_rows(P, lambda mono: _grade(mono) <= 8))
    report.table("M_(o,4) coefficients", _coefficient_rows(forms.planar_root4,
                                                           lambda mono: _grade(mono) <= 8))
    if config.output:
        _emit(config, report, "dumps", [f"# P\n{P.dump()}", f"# planar\n{forms.planar.dump()}",
                                         f"# planar_root4\n{forms.planar_root4.dump()}"])


def _series_quartic_ising(config: RunConfig, report: Report) -> None:
    t_order = config.t_order
    with report.phase("Lagrangian Q"):
        Q = solve_Q(t_order, check_positive=True)
    report.check("Q has non-negative integer coefficients", Q.is_nonnegative_integral())
    report.check("Q solves the Lagrangian equation", ClosedFormCatalog.lagrangian(Q) == Q)
    positivity = Counter()
    for monomial, c in Q.monomials():
        positivity[monomial.get("t", 0)] += 1
    report.table("Q terms by t order", [{"t order": j, "terms": positivity[j]} for j in sorted(positivity)])

    via_p = min(t_order, 8)
    with report.phase("Q from P"):
        from_p = q_from_p(via_p, config.nu_cap)
    report.check(f"Q equals t Theta^-1(t P^square) to t^{via_p}",
                 Q.to_ring(from_p.ring) == from_p)

    exact = t_order - 4
    if exact < 2:
        report.text("I_o", f"t-order {t_order} leaves no exact I_o coefficient")
        return
    with report.phase("I_o"):
        ising = ising_series(Q)
    via_bipartite = min(exact, 6)
    from_m4 = ising_from_bipartite(via_bipartite, config.nu_cap)
    report.check(f"Theta^-1 of the square substitution in M_(o,4) equals I_o to t^{via_bipartite}",
                 ising.to_ring(from_m4.ring) == from_m4)

    vertices = min(MAX_SPIN_VERTICES, exact // 2)
    rename = {"x4": "x", "y4": "y"}
    weights = []
    for nv in range(1, vertices + 1):
        for m, spins in enumerate_spin_maps(n_vertices=nv, degree=4):
            if spins.spins[m.root_vertex] is Color.WHITE:
                weights.append({rename.get(v, v): x for v, x in weight(m, "ising", spins).items()})
    ring = ising_ring(2 * vertices)
    report.check(f"I_o equals the spin map enumeration up to {vertices} vertices",
                 ising.to_ring(ring) == series_from_weights(ring, weights), f"{len(weights)} spin maps")
    report.table("I_o coefficients", _coefficient_rows(ising.to_ring(ring)))
    if config.output:
        _emit(config, report, "dumps", [f"# Q\n{Q.dump()}", f"# I\n{ising.to_ring(ising_ring(exact)).dump()}"])


HANDLERS: Dict[str, Callable[[RunConfig, Report], None]] = {
    "enumerate_maps": _enumerate_maps,
    "enumerate_trees": _enumerate_trees,
    "enumerate_spin_maps": _enumerate_spin_maps,
    "orient": _orient,
    "close": _close,
    "open": _open,
    "verify_bijection": _verify_bijection,
    "verify_roundtrip": _verify_roundtrip,
    "verify_tightness": _verify_tightness,
    "verify_trumpets": _verify_trumpets,
    "verify_geodesic": _verify_geodesic,
    "verify_mobiles": _verify_mobiles,
    "verify_doubly_rooted": _verify_doubly_rooted,
    "series_trees": _series_trees,
    "series_plane_maps": _series_plane_maps,
    "series_quartic": _series_quartic,
    "series_quartic_ising": _series_quartic_ising,
}


def run(config: RunConfig) -> Report:
    """Dispatch ``config`` and collect its report; library errors propagate."""
    config.validate()
    report = Report(config.command, config.echo())
    logger.info(f"Running {config.command}")
    with report.phase(config.command):
        HANDLERS[config.command](config, report)
    return report


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_config(argv)
    except SystemExit as e:
        return 0 if not e.code else 2
    logging.getLogger().setLevel(logging.DEBUG if config.verbose else logging.INFO)
    try:
        report = run(config)
    except UsageError as e:
        logger.error(f"{config.command}: {e}")
        return 2
    except (ValueError, ArithmeticError, OSError) as e:
        logger.error(f"{config.command} failed: {e}")
        return 1
    sys.stdout.write(report.render())
    failure = report.first_failure()
    if failure is not None:
        logger.error(f"check failed: {failure.name}" + (f" ({failure.detail})" if failure.detail else ""))
        return 1
    return 0
