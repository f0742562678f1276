"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Sample counts, instance counts and tolerances are fixed here and
must not be loosened.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import (
    rand_borel,
    rand_commuting_projectors,
    rand_hermitian,
    rand_noncommuting_projectors,
    rand_piecewise_affine,
    rand_state,
)
from hvsim import (
    ClassicalObservable,
    NotCommuting,
    PiecewiseAffineFunction,
    PropositionQuadruple,
    check_boolean_homomorphism,
    commutes,
    compose,
    eigh,
    expectation,
    fiber_chsh_functions,
    fiber_integral,
    functional_calculus,
    joint_propositions,
    max_abs,
    proposition_from,
    proposition_projector,
    reduced_operator,
    sample,
)
from hvsim.cli import main as cli_main


def _pass(num: int, text: str) -> None:
    print(f"PASS criterion {num}: {text}")


def test_criterion_1_sampling_reproduces_quantum_statistics():
    rng = np.random.default_rng(2026)
    started = time.perf_counter()
    n_samples = 100_000
    case = 0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        dec = eigh(rand_hermitian(rng, n))
        obs = ClassicalObservable(dec)
        for _ in range(10):
            h = rand_state(rng, n)
            report = sample(obs, h, n_samples, seed=40_000 + case)
            case += 1
            budgets = 4.0 * np.sqrt(
                report.predicted * (1.0 - report.predicted) / n_samples
            )
            deviations = np.abs(report.empirical - report.predicted)
            assert np.all(deviations <= budgets), (
                f"case {case}: deviation {deviations.max():.2e} over budget"
            )
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"took {elapsed:.1f}s"
    _pass(1, f"500 sampled distributions within 4-sigma budgets in {elapsed:.1f}s")


def test_criterion_2_exact_fiber_integrals():
    rng = np.random.default_rng(2027)
    identity = PiecewiseAffineFunction.identity()
    for _ in range(500):
        n = int(rng.integers(2, 8))
        dec = eigh(rand_hermitian(rng, n))
        h = rand_state(rng, n)
        obs = ClassicalObservable(dec)
        assert fiber_integral(identity, obs, h) == pytest.approx(
            expectation(dec, h), abs=1e-9
        )
        g = rand_piecewise_affine(rng, eigenvalues=dec.eigenvalues)
        assert fiber_integral(g, obs, h) == pytest.approx(
            expectation(eigh(functional_calculus(dec, g)), h), abs=1e-9
        )
    _pass(2, "500 exact step integrals match operator expectations at 1e-9")


def test_criterion_3_quotient_round_trips():
    rng = np.random.default_rng(2028)
    for k in range(200):
        n = int(rng.integers(2, 7))
        t = rand_hermitian(rng, n)
        dec = eigh(t)
        obs = ClassicalObservable(dec)
        assert max_abs(reduced_operator(obs) - t) <= 1e-8
        # every third map is forced to contain a flat (non-injective) piece
        g = rand_piecewise_affine(rng, eigenvalues=dec.eigenvalues)
        if k % 3 == 0:
            flat = PiecewiseAffineFunction.step(float(dec.eigenvalues.mean()), -1.0, 1.0)
            images = sorted({flat(float(v)) for v in dec.eigenvalues})
            g = flat if len(images) < n else g
        composed = compose(g, obs)
        assert max_abs(
            reduced_operator(composed) - functional_calculus(dec, g)
        ) <= 1e-8
    _pass(3, "200 reduction round trips at 1e-8, non-injective maps included")


def test_criterion_4_singlet_fixture_reaches_two_root_two(tmp_path):
    out = tmp_path / "singlet.json"
    code = cli_main(["chsh", "--input", "singlet_chsh", "--out", str(out)])
    assert code == 1  # the classical bound flag fails, by design
    section = json.loads(out.read_text())["results"][0]
    value = section["chsh_value"]
    assert value == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-6)
    assert value > 2.0
    assert section["checks"]["classical_bound_respected"] is False
    assert section["proposition_intersections_admitted"] is False
    _pass(4, f"bundled singlet fixture gives {value:.7f} = 2*sqrt(2) within 1e-6")


def test_criterion_5_shared_backing_quadruples_respect_the_bound():
    rng = np.random.default_rng(2029)
    for _ in range(500):
        n = int(rng.integers(2, 7))
        dec = eigh(rand_hermitian(rng, n))
        quad = PropositionQuadruple(
            *(proposition_from(dec, rand_borel(rng, avoid=dec.eigenvalues)) for _ in range(4))
        )
        h = rand_state(rng, n)
        functions = fiber_chsh_functions(quad, h)
        assert functions.pointwise_identity_holds()
        assert functions.chsh_value() <= 2.0 + 1e-9
    _pass(5, "500 quadruples: pointwise identity exact, integrated CHSH <= 2 + 1e-9")


def test_criterion_6_commutation_gates_proposition_intersections():
    rng = np.random.default_rng(2030)
    for _ in range(1000):
        e, f = rand_commuting_projectors(rng, 4)
        a, b = joint_propositions(e, f)
        assert check_boolean_homomorphism(a, b)
        ea, eb = proposition_projector(a), proposition_projector(b)
        assert commutes(ea, eb)
        assert max_abs(ea - e) < 1e-8 and max_abs(eb - f) < 1e-8
    for _ in range(1000):
        e, f = rand_noncommuting_projectors(rng, 4)
        with pytest.raises(NotCommuting):
            joint_propositions(e, f)
    _pass(6, "1000 commuting pairs accepted and verified; 1000 non-commuting rejected")


CLI_RUNS = [
    ["spectra", "--input", "pauli", "--operator", "z"],
    ["prob", "--input", "pauli", "--operator", "z", "--state", "plus", "--borel", "nonpositive"],
    ["quantile", "--input", "pauli", "--operator", "z", "--state", "plus"],
    ["verify", "--input", "pauli", "--operator", "z", "--state", "plus",
     "--samples", "20000", "--seed", "7"],
    ["roundtrip", "--input", "pauli", "--operator", "z", "--function", "absolute"],
    ["chsh", "--input", "singlet_chsh"],
    ["chsh", "--input", "commuting_chsh"],
]


def test_criterion_7_cli_determinism(tmp_path):
    for k, argv in enumerate(CLI_RUNS):
        payloads = []
        for attempt in range(2):
            out = tmp_path / f"run{k}_{attempt}.json"
            cli_main(argv + ["--out", str(out)])
            report = json.loads(out.read_text())
            report.pop("duration_seconds")  # wall-clock time is metadata
            payloads.append(json.dumps(report, sort_keys=True))
        assert payloads[0] == payloads[1], f"run {argv} was not reproducible"
    _pass(7, "every CLI command reproduces byte-identical numeric payloads")
