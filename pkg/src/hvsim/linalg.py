"""Dense complex linear algebra for small Hilbert spaces.

Hermitian eigendecomposition via cyclic complex Jacobi rotations, spectral
projectors grouped by eigenvalue cluster, and the projector lattice
operations (meet, join, commutation test) the rest of the package builds on.
All values are immutable after construction; every operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, NotHermitian

HERMITIAN_TOL = 1e-10
PROJECTOR_TOL = 1e-9
CLUSTER_TOL = 1e-8
MEET_TOL = 1e-8
COMMUTE_TOL = 1e-9
RESOLUTION_TOL = 1e-8
JACOBI_OFF_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def max_abs(a: np.ndarray) -> float:
    """Entrywise max norm."""
    return float(np.max(np.abs(a)))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def as_complex_matrix(entries) -> np.ndarray:
    """Coerce to a square complex128 array."""
    m = np.array(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def ensure_same_dim(*matrices: np.ndarray) -> int:
    dims = {m.shape[0] for m in matrices}
    if len(dims) != 1:
        raise DimensionMismatch(f"operands have mixed dimensions {sorted(dims)}")
    return dims.pop()


def ensure_hermitian(matrix, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Check M = M* within tol (max norm, default 1e-10); return (M + M*)/2."""
    m = as_complex_matrix(matrix)
    defect = max_abs(m - m.conj().T)
    if defect > tol:
        raise NotHermitian(f"self-adjointness defect {defect:.3e} exceeds tol {tol:.1e}")
    return _readonly((m + m.conj().T) / 2.0)


def ensure_projector(matrix, tol: float = PROJECTOR_TOL) -> np.ndarray:
    """Check Hermitian, idempotent within tol (default 1e-9), near-integer trace."""
    p = ensure_hermitian(matrix, tol)
    defect = max_abs(p @ p - p)
    if defect > tol:
        raise ValueError(f"idempotence defect {defect:.3e} exceeds tol {tol:.1e}")
    trace = float(np.trace(p).real)
    if abs(trace - round(trace)) > 1e-6:
        raise ValueError(f"projector trace {trace!r} is not near an integer")
    return p


def projector_rank(p: np.ndarray) -> int:
    return int(round(float(np.trace(p).real)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Strictly increasing distinct eigenvalues with orthogonal spectral projectors.

    The projectors resolve the identity and are mutually orthogonal within
    1e-8; degenerate eigenspaces appear as single projectors of rank > 1.
    """

    eigenvalues: np.ndarray
    projectors: np.ndarray

    def __post_init__(self):
        evs = np.array(self.eigenvalues, dtype=np.float64)
        prs = np.array(self.projectors, dtype=np.complex128)
        if evs.ndim != 1 or prs.ndim != 3 or prs.shape[1] != prs.shape[2]:
            raise DimensionMismatch("eigenvalues must be (m,), projectors (m, n, n)")
        if len(evs) != len(prs) or len(evs) == 0:
            raise DimensionMismatch("need one projector per eigenvalue, at least one")
        if not np.all(np.diff(evs) > 0):
            raise ValueError("eigenvalues must be strictly increasing")
        n = prs.shape[1]
        resolution = max_abs(prs.sum(axis=0) - np.eye(n))
        if resolution > RESOLUTION_TOL:
            raise ValueError(f"projectors do not resolve the identity ({resolution:.3e})")
        for k in range(len(prs)):
            ensure_projector(prs[k])
            for l in range(k + 1, len(prs)):
                if max_abs(prs[k] @ prs[l]) > RESOLUTION_TOL:
                    raise ValueError(f"projectors {k} and {l} are not orthogonal")
        object.__setattr__(self, "eigenvalues", _readonly(evs))
        object.__setattr__(self, "projectors", _readonly(prs))

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(projector_rank(p) for p in self.projectors)

    def operator(self) -> np.ndarray:
        """Reconstruct the source operator as the eigenvalue-weighted projector sum."""
        return _readonly(np.einsum("k,kij->ij", self.eigenvalues, self.projectors))

    def weights(self, vector: np.ndarray) -> np.ndarray:
        """Per-eigenvalue probabilities <v, P_k v> / <v, v>, clipped at 0."""
        w = np.einsum("i,kij,j->k", vector.conj(), self.projectors, vector).real
        return np.clip(w / float(np.vdot(vector, vector).real), 0.0, None)


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt((np.abs(off) ** 2).sum()))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """One two-sided Jacobi rotation annihilating a[p, q] (and a[q, p])."""
    apq = a[p, q]
    mag = abs(apq)
    phase = apq / mag
    tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = (t * c) * phase
    sc = s.conjugate()

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - sc * col_q
    a[:, q] = s * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = sc * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - sc * vq
    v[:, q] = s * vp + c * vq


def eigh(
    matrix,
    cluster_tol: float = CLUSTER_TOL,
    hermitian_tol: float = HERMITIAN_TOL,
    off_tol: float = JACOBI_OFF_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> SpectralDecomposition:
    """Spectral decomposition of a self-adjoint matrix.

    Cyclic complex Jacobi iteration, converging when the off-diagonal
    Frobenius norm falls below off_tol (default 1e-12) relative to the
    largest input entry; raises ConvergenceFailure after max_sweeps
    (default 100) sweeps. Eigenvalues closer than cluster_tol (default
    1e-8) are merged into one cluster, eigenvalue set to their mean, so
    degenerate eigenspaces come out as single basis-independent projectors.
    """
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    a = ensure_hermitian(matrix, hermitian_tol).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    threshold = off_tol * max(1.0, max_abs(a))

    sweeps = 0
    while _off_norm(a) > threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceFailure(
                f"off-diagonal norm {_off_norm(a):.3e} above {threshold:.3e} "
                f"after {max_sweeps} sweeps"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, v, p, q)
        sweeps += 1

    raw = np.diag(a).real
    order = np.argsort(raw, kind="stable")
    raw = raw[order]
    vecs = v[:, order]

    clusters: list[list[int]] = [[0]]
    for i in range(1, n):
        if raw[i] - raw[i - 1] <= cluster_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    values = np.array([raw[idx].mean() for idx in clusters])
    projectors = np.empty((len(clusters), n, n), dtype=np.complex128)
    for k, idx in enumerate(clusters):
        cols = vecs[:, idx]
        p = cols @ cols.conj().T
        projectors[k] = (p + p.conj().T) / 2.0
    return SpectralDecomposition(values, projectors)


def projector_meet(e, f, meet_tol: float = MEET_TOL) -> np.ndarray:
    """Orthogonal projector onto range(e) intersected with range(f).

    The null space of the positive semidefinite operator (I-e) + (I-f) is
    exactly the common range, so the meet is the sum of its spectral
    projectors with eigenvalue below meet_tol (default 1e-8).
    """
    e = ensure_projector(e)
    f = ensure_projector(f)
    n = ensure_same_dim(e, f)
    eye = np.eye(n)
    dec = eigh((eye - e) + (eye - f))
    meet = np.zeros((n, n), dtype=np.complex128)
    for lam, proj in zip(dec.eigenvalues, dec.projectors):
        if lam < meet_tol:
            meet += proj
    return _readonly(meet)


def projector_join(e, f, meet_tol: float = MEET_TOL) -> np.ndarray:
    """Orthogonal projector onto span(range(e) union range(f)), as I - meet(I-e, I-f)."""
    e = ensure_projector(e)
    f = ensure_projector(f)
    n = ensure_same_dim(e, f)
    eye = np.eye(n)
    return _readonly(eye - projector_meet(eye - e, eye - f, meet_tol))


def commutes(e, f, tol: float = COMMUTE_TOL) -> bool:
    """True iff the commutator ef - fe vanishes within tol (max norm, default 1e-9)."""
    e = ensure_projector(e)
    f = ensure_projector(f)
    ensure_same_dim(e, f)
    return max_abs(e @ f - f @ e) <= tol
