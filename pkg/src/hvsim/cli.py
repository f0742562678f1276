"""Command-line harness: load a problem file, run experiments, emit reports.

Problem files are JSON with complex numbers as [re, im] pairs and matrices
row-major. Reports are JSON (or CSV tables) whose numeric payload is a pure
function of the input bytes and the seed, so identical runs are
byte-identical. Exit codes: 0 all checks passed, 1 a check failed, 2 bad
input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bell import (
    ChshConfig,
    check_boolean_homomorphism,
    chsh_terms,
    common_refinement_quadruple,
    fiber_chsh_functions,
    joint_propositions,
)
from .borel import BorelSet, Interval, PiecewiseAffineFunction
from .errors import HvError, LoadError, NotCommuting
from .hidden import ClassicalObservable, compose, quantile_function, reduced_operator, sample
from .linalg import commutes, eigh, ensure_hermitian, ensure_projector, max_abs
from .quantum import PureState, functional_calculus, prob

DEFAULT_SAMPLES = 100_000
DEFAULT_SEED = 0
CHSH_SLACK = 1e-9


@dataclass(frozen=True)
class Tolerances:
    """Overridable numeric tolerances; defaults match the library operations."""

    hermitian_tol: float = 1e-10
    projector_tol: float = 1e-9
    cluster_tol: float = 1e-8
    meet_tol: float = 1e-8
    commute_tol: float = 1e-9
    snap_tol: float = 1e-9
    weight_floor: float = 1e-12
    reconstruction_tol: float = 1e-8
    roundtrip_tol: float = 1e-8
    pushforward_tol: float = 1e-10
    homomorphism_tol: float = 1e-8
    sector_snap_tol: float = 1e-6


@dataclass(frozen=True)
class ProblemFile:
    dimension: int
    tolerances: Tolerances
    operators: dict
    states: dict
    borel_sets: dict
    functions: dict
    experiments: list
    source: str
    digest: str


def _parse_complex_entry(entry, where: str) -> complex:
    if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
        raise LoadError(f"{where}: complex entries must be [re, im] pairs")
    re, im = entry
    try:
        return complex(float(re), float(im))
    except (TypeError, ValueError) as exc:
        raise LoadError(f"{where}: non-numeric complex entry {entry!r}") from exc


def _parse_matrix(rows, dim: int, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != dim:
        raise LoadError(f"{where}: expected {dim} rows")
    out = np.empty((dim, dim), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise LoadError(f"{where}: row {i} must have {dim} entries")
        for j, entry in enumerate(row):
            out[i, j] = _parse_complex_entry(entry, where)
    return out


def _parse_state(components, dim: int, where: str) -> PureState:
    if not isinstance(components, list) or len(components) != dim:
        raise LoadError(f"{where}: expected {dim} components")
    vec = np.array([_parse_complex_entry(c, where) for c in components])
    try:
        return PureState(vec)
    except ValueError as exc:
        raise LoadError(f"{where}: {exc}") from exc


def _parse_endpoint(value, where: str) -> float:
    if value is None:
        raise LoadError(f"{where}: interval endpoints must be numbers or '-inf'/'inf'")
    if isinstance(value, str):
        if value in ("-inf", "inf"):
            return float(value)
        raise LoadError(f"{where}: bad endpoint {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise LoadError(f"{where}: bad endpoint {value!r}") from exc


def _parse_borel(pieces, where: str) -> BorelSet:
    if not isinstance(pieces, list):
        raise LoadError(f"{where}: a Borel set is a list of interval objects")
    intervals = []
    for spec in pieces:
        if not isinstance(spec, dict):
            raise LoadError(f"{where}: intervals are objects with lo/hi/flags")
        try:
            intervals.append(
                Interval(
                    _parse_endpoint(spec.get("lo", "-inf"), where),
                    _parse_endpoint(spec.get("hi", "inf"), where),
                    bool(spec.get("lo_closed", False)),
                    bool(spec.get("hi_closed", False)),
                )
            )
        except ValueError as exc:
            raise LoadError(f"{where}: {exc}") from exc
    return BorelSet(tuple(intervals))


def _parse_function(spec, where: str) -> PiecewiseAffineFunction:
    if not isinstance(spec, dict):
        raise LoadError(f"{where}: functions are objects with breakpoints/pieces/breakpoint_values")
    try:
        return PiecewiseAffineFunction(
            tuple(float(x) for x in spec.get("breakpoints", [])),
            tuple((float(m), float(q)) for m, q in spec.get("pieces", [])),
            tuple(float(v) for v in spec.get("breakpoint_values", [])),
        )
    except (TypeError, ValueError) as exc:
        raise LoadError(f"{where}: {exc}") from exc


def _read_source(source: str) -> tuple[bytes, str]:
    path = Path(source)
    if path.exists():
        return path.read_bytes(), str(path)
    from importlib import resources

    name = source if source.endswith(".json") else source + ".json"
    ref = resources.files("hvsim") / "fixtures" / name
    if ref.is_file():
        return ref.read_bytes(), f"hvsim:fixtures/{name}"
    raise LoadError(f"no such file or bundled fixture: {source}")


def load_problem(source: str) -> ProblemFile:
    """Read and validate a problem file (path or bundled fixture name)."""
    raw, display = _read_source(source)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LoadError(f"{display}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise LoadError(f"{display}: top level must be an object")
    try:
        dim = int(doc["dimension"])
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"{display}: missing or bad 'dimension'") from exc
    if dim < 1:
        raise LoadError(f"{display}: dimension must be positive")

    tol_doc = doc.get("tolerances", {})
    known = {f.name for f in fields(Tolerances)}
    unknown = set(tol_doc) - known
    if unknown:
        raise LoadError(f"{display}: unknown tolerance keys {sorted(unknown)}")
    tolerances = replace(Tolerances(), **{k: float(v) for k, v in tol_doc.items()})

    operators = {}
    for name, rows in doc.get("operators", {}).items():
        matrix = _parse_matrix(rows, dim, f"{display}: operator {name!r}")
        operators[name] = ensure_hermitian(matrix, tolerances.hermitian_tol)
    states = {
        name: _parse_state(vec, dim, f"{display}: state {name!r}")
        for name, vec in doc.get("states", {}).items()
    }
    borel_sets = {
        name: _parse_borel(spec, f"{display}: borel set {name!r}")
        for name, spec in doc.get("borel_sets", {}).items()
    }
    functions = {
        name: _parse_function(spec, f"{display}: function {name!r}")
        for name, spec in doc.get("functions", {}).items()
    }

    experiments = doc.get("experiments", [])
    if not isinstance(experiments, list):
        raise LoadError(f"{display}: 'experiments' must be a list")
    lookup = {
        "operator": operators,
        "state": states,
        "borel": borel_sets,
        "function": functions,
        "e1": operators,
        "e2": operators,
        "f1": operators,
        "f2": operators,
    }
    for i, block in enumerate(experiments):
        if not isinstance(block, dict) or "kind" not in block:
            raise LoadError(f"{display}: experiment {i} needs a 'kind'")
        for key, table in lookup.items():
            if key in block and block[key] not in table:
                raise LoadError(
                    f"{display}: experiment {i} references unknown {key} {block[key]!r}"
                )

    return ProblemFile(
        dimension=dim,
        tolerances=tolerances,
        operators=operators,
        states=states,
        borel_sets=borel_sets,
        functions=functions,
        experiments=experiments,
        source=display,
        digest=hashlib.sha256(raw).hexdigest(),
    )


def _named(problem: ProblemFile, table: str, name: str):
    store = getattr(problem, table)
    if name not in store:
        raise LoadError(f"unknown {table[:-1]} {name!r}")
    return store[name]


def _floats(a) -> list[float]:
    return [float(x) for x in np.asarray(a).reshape(-1)]


def _borel_json(b: BorelSet) -> list:
    out = []
    for iv in b.intervals:
        lo = "-inf" if math.isinf(iv.lo) else iv.lo
        hi = "inf" if math.isinf(iv.hi) else iv.hi
        out.append({"lo": lo, "hi": hi, "lo_closed": iv.lo_closed, "hi_closed": iv.hi_closed})
    return out


# ---------------------------------------------------------------------------
# experiment runners


def run_spectra(problem: ProblemFile, operator: str) -> dict:
    tol = problem.tolerances
    matrix = _named(problem, "operators", operator)
    dec = eigh(matrix, cluster_tol=tol.cluster_tol, hermitian_tol=tol.hermitian_tol)
    residual = max_abs(dec.operator() - matrix)
    return {
        "kind": "spectra",
        "operator": operator,
        "eigenvalues": _floats(dec.eigenvalues),
        "multiplicities": list(dec.ranks),
        "projector_traces": [float(np.trace(p).real) for p in dec.projectors],
        "reconstruction_residual": residual,
        "checks": {"reconstruction_ok": residual <= tol.reconstruction_tol},
    }


def run_prob(problem: ProblemFile, operator: str, state: str, borel: str) -> dict:
    tol = problem.tolerances
    dec = eigh(_named(problem, "operators", operator), cluster_tol=tol.cluster_tol)
    h = _named(problem, "states", state)
    events = _named(problem, "borel_sets", borel)
    value = prob(dec, h, events, snap_tol=tol.snap_tol)
    return {
        "kind": "prob",
        "operator": operator,
        "state": state,
        "borel": borel,
        "events": _borel_json(events),
        "probability": value,
        "checks": {"in_unit_interval": 0.0 <= value <= 1.0},
    }


def run_quantile(problem: ProblemFile, operator: str, state: str) -> dict:
    tol = problem.tolerances
    dec = eigh(_named(problem, "operators", operator), cluster_tol=tol.cluster_tol)
    h = _named(problem, "states", state)
    q = quantile_function(dec, h, weight_floor=tol.weight_floor)
    atom_probs = [
        prob(dec, h, BorelSet.point(float(v)), snap_tol=tol.snap_tol) for v in q.values
    ]
    defect = max(
        abs(float(l) - p) for l, p in zip(q.lengths(), atom_probs)
    )
    return {
        "kind": "quantile",
        "operator": operator,
        "state": state,
        "cuts": _floats(q.cuts),
        "values": _floats(q.values),
        "atom_probabilities": atom_probs,
        "pushforward_defect": defect,
        "checks": {"pushforward_ok": defect <= tol.pushforward_tol},
    }


def run_verify(problem: ProblemFile, operator: str, state: str, samples: int, seed: int) -> dict:
    tol = problem.tolerances
    dec = eigh(_named(problem, "operators", operator), cluster_tol=tol.cluster_tol)
    h = _named(problem, "states", state)
    report = sample(ClassicalObservable(dec), h, samples, seed, observable_id=operator)
    budgets = 4.0 * np.sqrt(report.predicted * (1.0 - report.predicted) / float(samples))
    deviations = np.abs(report.empirical - report.predicted)
    within = bool(np.all(deviations <= budgets))
    return {
        "kind": "verify",
        "operator": operator,
        "state": state,
        "samples": int(samples),
        "seed": int(seed),
        "outcomes": _floats(report.outcomes),
        "predicted": _floats(report.predicted),
        "empirical": _floats(report.empirical),
        "deviations": _floats(deviations),
        "budgets": _floats(budgets),
        "max_abs_deviation": report.max_abs_deviation,
        "chi_square": report.chi_square,
        "checks": {"within_budget": within},
    }


def run_roundtrip(problem: ProblemFile, operator: str, function: str | None) -> dict:
    tol = problem.tolerances
    matrix = _named(problem, "operators", operator)
    dec = eigh(matrix, cluster_tol=tol.cluster_tol)
    obs = ClassicalObservable(dec)
    identity_residual = max_abs(reduced_operator(obs, snap_tol=tol.snap_tol) - matrix)
    result = {
        "kind": "roundtrip",
        "operator": operator,
        "function": function,
        "identity_residual": identity_residual,
        "checks": {"identity_roundtrip_ok": identity_residual <= tol.roundtrip_tol},
    }
    if function is not None:
        g = _named(problem, "functions", function)
        target = functional_calculus(dec, g)
        post_residual = max_abs(
            reduced_operator(compose(g, obs), snap_tol=tol.snap_tol) - target
        )
        result["post_residual"] = post_residual
        result["checks"]["post_roundtrip_ok"] = post_residual <= tol.roundtrip_tol
    return result


def run_chsh(problem: ProblemFile, e1: str, e2: str, f1: str, f2: str, state: str) -> dict:
    tol = problem.tolerances
    names = {"e1": e1, "e2": e2, "f1": f1, "f2": f2}
    try:
        projectors = {
            key: ensure_projector(_named(problem, "operators", name), tol.projector_tol)
            for key, name in names.items()
        }
    except ValueError as exc:
        raise LoadError(str(exc)) from exc
    h = _named(problem, "states", state)
    cfg = ChshConfig(projectors["e1"], projectors["e2"], projectors["f1"], projectors["f2"], h)
    terms = chsh_terms(cfg, meet_tol=tol.meet_tol)
    value = float(abs(terms[0, 0] - terms[0, 1]) + abs(terms[1, 0] + terms[1, 1]))

    pair_names = [("e1", "f1"), ("e1", "f2"), ("e2", "f1"), ("e2", "f2")]
    cross_commuting = {
        f"{a}{b}": commutes(projectors[a], projectors[b], tol.commute_tol)
        for a, b in pair_names
    }
    result = {
        "kind": "chsh",
        "projectors": names,
        "state": state,
        "expectations": [[terms[i, j] for j in range(2)] for i in range(2)],
        "chsh_value": value,
        "cross_pairs_commute": cross_commuting,
        "checks": {"classical_bound_respected": value <= 2.0 + CHSH_SLACK},
    }

    if all(cross_commuting.values()):
        consistent = True
        for a, b in pair_names:
            prop_a, prop_b = joint_propositions(
                projectors[a],
                projectors[b],
                commute_tol=tol.commute_tol,
                sector_snap_tol=tol.sector_snap_tol,
            )
            consistent &= check_boolean_homomorphism(
                prop_a, prop_b, tol=tol.homomorphism_tol, snap_tol=tol.snap_tol
            )
            consistent &= commutes(projectors[a], projectors[b], tol.commute_tol)
        result["checks"]["joint_propositions_consistent"] = bool(consistent)

    try:
        quad = common_refinement_quadruple(
            cfg.e1,
            cfg.e2,
            cfg.f1,
            cfg.f2,
            commute_tol=tol.commute_tol,
            sector_snap_tol=tol.sector_snap_tol,
        )
    except NotCommuting as exc:
        result["proposition_intersections_admitted"] = False
        result["admission_failure"] = str(exc)
    else:
        result["proposition_intersections_admitted"] = True
        functions = fiber_chsh_functions(quad, h, snap_tol=tol.snap_tol)
        integral_value = functions.chsh_value()
        result["fiber_chsh_value"] = integral_value
        result["checks"]["pointwise_identity_ok"] = functions.pointwise_identity_holds()
        result["checks"]["fiber_integrals_match"] = (
            abs(integral_value - value) <= 1e-9
        )
    return result


# ---------------------------------------------------------------------------
# dispatch and output

_REQUIRED = {
    "spectra": ("operator",),
    "prob": ("operator", "state", "borel"),
    "quantile": ("operator", "state"),
    "verify": ("operator", "state"),
    "roundtrip": ("operator",),
    "chsh": ("e1", "e2", "f1", "f2", "state"),
}


def _experiment_blocks(problem: ProblemFile, command: str, args: argparse.Namespace) -> list[dict]:
    """Experiments to run: the flag-specified one, else the file's matching blocks."""
    required = _REQUIRED[command]
    given = {key: getattr(args, key, None) for key in required}
    if all(v is not None for v in given.values()):
        block = dict(given)
        block["kind"] = command
        if command == "verify":
            block["samples"] = args.samples
        if command == "roundtrip":
            block["function"] = args.function
        return [block]
    if any(v is not None for v in given.values()):
        missing = sorted(k for k, v in given.items() if v is None)
        raise LoadError(f"{command}: missing {', '.join('--' + m for m in missing)}")
    blocks = [dict(b) for b in problem.experiments if b.get("kind") == command]
    if not blocks:
        raise LoadError(f"no {command!r} experiment in {problem.source} and no names given")
    for block in blocks:
        absent = sorted(k for k in required if k not in block)
        if absent:
            raise LoadError(f"{command} experiment block lacks {', '.join(absent)}")
    return blocks


def _run_block(problem: ProblemFile, block: dict, args: argparse.Namespace, seed: int) -> dict:
    kind = block["kind"]
    if kind == "spectra":
        return run_spectra(problem, block["operator"])
    if kind == "prob":
        return run_prob(problem, block["operator"], block["state"], block["borel"])
    if kind == "quantile":
        return run_quantile(problem, block["operator"], block["state"])
    if kind == "verify":
        samples = args.samples or block.get("samples") or DEFAULT_SAMPLES
        block_seed = seed if args.seed is not None else block.get("seed", seed)
        return run_verify(problem, block["operator"], block["state"], int(samples), int(block_seed))
    if kind == "roundtrip":
        return run_roundtrip(problem, block["operator"], block.get("function"))
    if kind == "chsh":
        return run_chsh(
            problem, block["e1"], block["e2"], block["f1"], block["f2"], block["state"]
        )
    raise LoadError(f"unknown experiment kind {kind!r}")


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("HV_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise LoadError(f"HV_SEED must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def _csv_rows(results: list[dict]) -> list[list]:
    rows: list[list] = []
    for idx, result in enumerate(results):
        if result["kind"] == "verify":
            rows.append(["result", "outcome", "predicted", "empirical", "deviation", "budget"])
            for k, outcome in enumerate(result["outcomes"]):
                rows.append(
                    [
                        idx,
                        repr(outcome),
                        repr(result["predicted"][k]),
                        repr(result["empirical"][k]),
                        repr(result["deviations"][k]),
                        repr(result["budgets"][k]),
                    ]
                )
        else:
            rows.append(["result", "key", "value"])
            for key, value in result.items():
                if key == "checks":
                    for name, flag in value.items():
                        rows.append([idx, f"check:{name}", flag])
                else:
                    rows.append([idx, key, json.dumps(value)])
    return rows


def _emit(report: dict, args: argparse.Namespace) -> None:
    if args.format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerows(_csv_rows(report["results"]))
        text = buffer.getvalue()
    else:
        text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hv",
        description="Run hidden-variable model experiments from a problem file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", required=True, help="problem file path or bundled fixture name")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (fallback: HV_SEED, then 0)")
        p.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("spectra", help="eigenvalues, multiplicities, reconstruction residual")
    common(p)
    p.add_argument("--operator")

    p = sub.add_parser("prob", help="probability of a Borel event at a state")
    common(p)
    p.add_argument("--operator")
    p.add_argument("--state")
    p.add_argument("--borel")

    p = sub.add_parser("quantile", help="fiber quantile step of an observable at a state")
    common(p)
    p.add_argument("--operator")
    p.add_argument("--state")

    p = sub.add_parser("verify", help="Monte Carlo check that sampling matches the quantum law")
    common(p)
    p.add_argument("--operator")
    p.add_argument("--state")

    p = sub.add_parser("roundtrip", help="reduce the fiber observable back to its operator")
    common(p)
    p.add_argument("--operator")
    p.add_argument("--function", default=None)

    p = sub.add_parser("chsh", help="meet-based CHSH value and boolean-algebra diagnostics")
    common(p)
    p.add_argument("--e1")
    p.add_argument("--e2")
    p.add_argument("--f1")
    p.add_argument("--f2")
    p.add_argument("--state")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        problem = load_problem(args.input)
        seed = _resolve_seed(args)
        blocks = _experiment_blocks(problem, args.command, args)
        results = [_run_block(problem, block, args, seed) for block in blocks]
    except (HvError, ValueError) as exc:
        print(f"hv: error: {exc}", file=sys.stderr)
        return 2

    passed = all(all(r["checks"].values()) for r in results)
    report = {
        "tool": "hv",
        "version": __version__,
        "command": args.command,
        "input": problem.source,
        "input_digest": problem.digest,
        "seed": seed,
        "results": results,
        "passed": passed,
        "duration_seconds": time.perf_counter() - started,
    }
    _emit(report, args)
    return 0 if passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
