"""Meet-based correlation operators, the CHSH functional, and the boolean side.

Two couples of projectors define four correlation operators built from
projector meets; the CHSH combination of their expectations is bounded by 2
whenever the couples come from propositions over one shared backing, because
the corresponding fiber functions satisfy a pointwise identity. Commuting
projectors admit such propositions constructively via a joint relabeling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .borel import BorelSet
from .errors import BackingMismatch, DegenerateLabeling, DimensionMismatch, NotCommuting, OutOfDomain
from .linalg import (
    COMMUTE_TOL,
    MEET_TOL,
    SpectralDecomposition,
    _readonly,
    commutes,
    ensure_projector,
    ensure_same_dim,
    max_abs,
    eigh,
    projector_join,
    projector_meet,
)
from .quantum import SNAP_TOL, PureState, spectral_projector
from .hidden import Proposition

SECTOR_SNAP_TOL = 1e-6
HOMOMORPHISM_TOL = 1e-8


def correlation_operator(e, f, meet_tol: float = MEET_TOL) -> np.ndarray:
    """Sector-signed sum of the four meets of a projector pair and its complements:
    (e and f) + (not-e and not-f) - (not-e and f) - (e and not-f)."""
    e = ensure_projector(e)
    f = ensure_projector(f)
    n = ensure_same_dim(e, f)
    eye = np.eye(n)
    both = projector_meet(e, f, meet_tol)
    neither = projector_meet(eye - e, eye - f, meet_tol)
    only_f = projector_meet(eye - e, f, meet_tol)
    only_e = projector_meet(e, eye - f, meet_tol)
    return _readonly(both + neither - only_f - only_e)


@dataclass(frozen=True)
class ChshConfig:
    """Two couples of projectors plus the state to evaluate at."""

    e1: np.ndarray
    e2: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    state: PureState

    def __post_init__(self):
        for name in ("e1", "e2", "f1", "f2"):
            object.__setattr__(self, name, ensure_projector(getattr(self, name)))
        n = ensure_same_dim(self.e1, self.e2, self.f1, self.f2)
        if n != self.state.dim:
            raise DimensionMismatch(f"projector dim {n} vs state dim {self.state.dim}")

    def couples(self) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
        return (self.e1, self.e2), (self.f1, self.f2)


def chsh_terms(cfg: ChshConfig, meet_tol: float = MEET_TOL) -> np.ndarray:
    """2x2 array of correlation expectations, indexed by (couple one, couple two)."""
    es, fs = cfg.couples()
    h = cfg.state.vector
    out = np.empty((2, 2))
    for i, e in enumerate(es):
        for j, f in enumerate(fs):
            t = correlation_operator(e, f, meet_tol)
            out[i, j] = float(np.vdot(h, t @ h).real)
    return out


def chsh_value(cfg: ChshConfig, meet_tol: float = MEET_TOL) -> float:
    """|<T11> - <T12>| + |<T21> + <T22>| at the configured state."""
    t = chsh_terms(cfg, meet_tol)
    return float(abs(t[0, 0] - t[0, 1]) + abs(t[1, 0] + t[1, 1]))


def _same_backing(a: SpectralDecomposition, b: SpectralDecomposition) -> bool:
    if a is b:
        return True
    return (
        a.eigenvalues.shape == b.eigenvalues.shape
        and a.projectors.shape == b.projectors.shape
        and float(np.max(np.abs(a.eigenvalues - b.eigenvalues))) <= 1e-10
        and max_abs(a.projectors - b.projectors) <= 1e-10
    )


@dataclass(frozen=True)
class PropositionQuadruple:
    """Two couples of propositions over one shared backing, so every boolean
    combination of them is again a proposition."""

    a1: Proposition
    a2: Proposition
    b1: Proposition
    b2: Proposition

    def __post_init__(self):
        ref = self.a1.backing
        for name in ("a2", "b1", "b2"):
            if not _same_backing(ref, getattr(self, name).backing):
                raise BackingMismatch(f"proposition {name} has a different backing")

    @property
    def backing(self) -> SpectralDecomposition:
        return self.a1.backing

    def projectors(self, snap_tol: float = SNAP_TOL) -> tuple[np.ndarray, ...]:
        return tuple(
            spectral_projector(p.backing, p.borel, snap_tol)
            for p in (self.a1, self.a2, self.b1, self.b2)
        )

    def config(self, state: PureState, snap_tol: float = SNAP_TOL) -> ChshConfig:
        e1, e2, f1, f2 = self.projectors(snap_tol)
        return ChshConfig(e1, e2, f1, f2, state)


@dataclass(frozen=True)
class FiberChshFunctions:
    """The four +-1 step functions of a quadruple on one fiber, on a shared partition.

    signs[i, j, k] is the value of function (i, j) on the cell
    (cuts[k], cuts[k+1]]; lengths are the cell measures.
    """

    cuts: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        cuts = np.array(self.cuts, dtype=np.float64)
        signs = np.array(self.signs, dtype=np.int8)
        if signs.shape != (2, 2, len(cuts) - 1):
            raise ValueError("signs must be (2, 2, cells)")
        object.__setattr__(self, "cuts", _readonly(cuts))
        object.__setattr__(self, "signs", _readonly(signs))

    def lengths(self) -> np.ndarray:
        return np.diff(self.cuts)

    def evaluate(self, i: int, j: int, t: float) -> int:
        if not 0.0 < t < 1.0:
            raise OutOfDomain(f"fiber coordinate {t!r} outside (0, 1)")
        cell = int(np.searchsorted(self.cuts, t, side="left")) - 1
        return int(self.signs[i, j, cell])

    def pointwise_identity_holds(self) -> bool:
        """|f11 - f12| + |f21 + f22| equals 2 on every cell, in exact integer arithmetic."""
        s = self.signs.astype(np.int64)
        combo = np.abs(s[0, 0] - s[0, 1]) + np.abs(s[1, 0] + s[1, 1])
        return bool(np.all(combo == 2))

    def integrals(self) -> np.ndarray:
        """2x2 array of fiber integrals of the four step functions."""
        return (self.signs.astype(np.float64) * self.lengths()).sum(axis=2)

    def chsh_value(self) -> float:
        t = self.integrals()
        return float(abs(t[0, 0] - t[0, 1]) + abs(t[1, 0] + t[1, 1]))


def fiber_chsh_functions(
    quad: PropositionQuadruple, state: PureState, snap_tol: float = SNAP_TOL
) -> FiberChshFunctions:
    """Restrict the quadruple's four correlation functions to the fiber of a state."""
    dec = quad.backing
    if dec.dim != state.dim:
        raise DimensionMismatch(f"backing dim {dec.dim} vs state dim {state.dim}")
    w = dec.weights(state.vector)
    raw_cuts = np.concatenate(([0.0], np.cumsum(w)))
    raw_cuts[-1] = 1.0
    keep = np.diff(raw_cuts) > 0
    lambdas = dec.eigenvalues[keep]
    cuts = np.concatenate(([0.0], np.cumsum(np.diff(raw_cuts)[keep])))
    cuts[-1] = 1.0

    def side(p: Proposition) -> np.ndarray:
        return np.array(
            [1 if p.borel.contains(float(lam), snap_tol) else -1 for lam in lambdas],
            dtype=np.int8,
        )

    sa = (side(quad.a1), side(quad.a2))
    sb = (side(quad.b1), side(quad.b2))
    signs = np.empty((2, 2, len(lambdas)), dtype=np.int8)
    for i in range(2):
        for j in range(2):
            signs[i, j] = sa[i] * sb[j]
    return FiberChshFunctions(cuts, signs)


def _sector_decomposition(
    operator: np.ndarray, n_labels: int, sector_snap_tol: float
) -> SpectralDecomposition:
    dec = eigh(operator)
    labels = np.rint(dec.eigenvalues)
    drift = float(np.max(np.abs(dec.eigenvalues - labels)))
    if drift > sector_snap_tol:
        raise DegenerateLabeling(
            f"joint eigenvalue {drift:.3e} away from integer sector label"
        )
    if labels.min() < 0 or labels.max() > n_labels - 1:
        raise DegenerateLabeling(f"sector labels outside 0..{n_labels - 1}")
    grouped: dict[float, np.ndarray] = {}
    for label, proj in zip(labels, dec.projectors):
        key = float(label)
        grouped[key] = grouped.get(key, 0) + proj
    keys = sorted(grouped)
    return SpectralDecomposition(np.array(keys), np.array([grouped[k] for k in keys]))


def joint_propositions(
    e,
    f,
    commute_tol: float = COMMUTE_TOL,
    sector_snap_tol: float = SECTOR_SNAP_TOL,
) -> tuple[Proposition, Proposition]:
    """Build propositions over one backing whose projectors are a commuting pair.

    The operator e + 2f labels the four joint sectors with integers 0..3
    (binary encoding); the propositions select the sectors where each
    projector acts as the identity, so every boolean combination maps to the
    corresponding meet.
    """
    e = ensure_projector(e)
    f = ensure_projector(f)
    ensure_same_dim(e, f)
    if not commutes(e, f, commute_tol):
        raise NotCommuting(f"commutator exceeds {commute_tol:.1e}")
    dec = _sector_decomposition(e + 2.0 * f, 4, sector_snap_tol)
    prop_e = Proposition(dec, BorelSet.points((1.0, 3.0)))
    prop_f = Proposition(dec, BorelSet.points((2.0, 3.0)))
    return prop_e, prop_f


def common_refinement_quadruple(
    e1,
    e2,
    f1,
    f2,
    commute_tol: float = COMMUTE_TOL,
    sector_snap_tol: float = SECTOR_SNAP_TOL,
) -> PropositionQuadruple:
    """Host two couples of projectors as propositions over one shared backing.

    Requires the whole family to commute pairwise; the backing is the joint
    sector operator sum(2^k P_k) with integer labels 0..15, and each
    proposition selects the labels where its bit is set.
    """
    ps = [ensure_projector(p) for p in (e1, e2, f1, f2)]
    ensure_same_dim(*ps)
    names = ("e1", "e2", "f1", "f2")
    for i in range(4):
        for j in range(i + 1, 4):
            if not commutes(ps[i], ps[j], commute_tol):
                raise NotCommuting(f"{names[i]} and {names[j]} do not commute")
    joint = sum((2.0**k) * p for k, p in enumerate(ps))
    dec = _sector_decomposition(joint, 16, sector_snap_tol)
    props = [
        Proposition(dec, BorelSet.points([float(m) for m in range(16) if m & (1 << k)]))
        for k in range(4)
    ]
    return PropositionQuadruple(props[0], props[1], props[2], props[3])


def check_boolean_homomorphism(
    a: Proposition,
    b: Proposition,
    tol: float = HOMOMORPHISM_TOL,
    snap_tol: float = SNAP_TOL,
) -> bool:
    """Verify the projector map respects the boolean algebra generated by two propositions.

    Checks, within tol: every atom intersection maps to the meet of the
    mapped projectors, every pairwise union to the join, and complements to
    orthocomplements. When the check passes, the two projectors commute;
    this conclusion is re-verified and a failure would be a genuine defect.
    """
    if not _same_backing(a.backing, b.backing):
        raise BackingMismatch("propositions do not share a backing")
    dec = a.backing
    n = dec.dim
    eye = np.eye(n)

    def eps(events: BorelSet) -> np.ndarray:
        return spectral_projector(dec, events, snap_tol)

    ea = eps(a.borel)
    eb = eps(b.borel)
    sides_a = ((a.borel, ea), (a.borel.complement(), eye - ea))
    sides_b = ((b.borel, eb), (b.borel.complement(), eye - eb))

    ok = True
    for set_a, proj_a in sides_a:
        for set_b, proj_b in sides_b:
            if max_abs(eps(set_a & set_b) - projector_meet(proj_a, proj_b)) > tol:
                ok = False
            if max_abs(eps(set_a | set_b) - projector_join(proj_a, proj_b)) > tol:
                ok = False
    if max_abs(eps(a.borel.complement()) - (eye - ea)) > tol:
        ok = False
    if max_abs(eps(b.borel.complement()) - (eye - eb)) > tol:
        ok = False
    if ok and not commutes(ea, eb):
        raise AssertionError("boolean homomorphism held but projectors do not commute")
    return ok
