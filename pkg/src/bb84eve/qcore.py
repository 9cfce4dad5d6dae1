"""Small-dimension complex linear algebra and the fixed bases used throughout.

Kets are 1-D ``complex128`` arrays, operators are square ``complex128``
arrays. Joint Alice/Eve objects are ordered Alice-major (Alice's qubit is
the most significant index).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "KET_X", "KET_Y", "KET_U", "KET_V",
    "EigenSystem",
    "as_ket", "as_operator", "projector", "is_hermitian", "psd_sqrt",
    "tensor_product", "partial_trace_first", "hermitian_eigensystem",
    "trace_norm", "probe_ket", "canonical_probe_basis", "bell_basis",
    "uv_from_xy", "xy_from_uv", "FUCHS_PROBE_ORDER",
]

SQRT1_2 = 1.0 / np.sqrt(2.0)

KET_X = np.array([1.0, 0.0], dtype=complex)
KET_Y = np.array([0.0, 1.0], dtype=complex)
KET_U = SQRT1_2 * (KET_X + KET_Y)
KET_V = SQRT1_2 * (KET_X - KET_Y)
for _k in (KET_X, KET_Y, KET_U, KET_V):
    _k.flags.writeable = False

# x-y <-> u-v change of coordinates; it is its own inverse.
_HADAMARD = SQRT1_2 * np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex)

# Alternative probe ordering |xx>, |yy>, |xy>, |yx> expressed as indices of the
# default ordering |xx>, |yx>, |xy>, |yy>.
FUCHS_PROBE_ORDER = (0, 3, 2, 1)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def as_ket(amplitudes, normalized: bool = False, tol: float = 1e-12) -> np.ndarray:
    """Validate and copy ``amplitudes`` into a read-only complex vector."""
    k = np.array(amplitudes, dtype=complex).reshape(-1)
    if k.size == 0:
        raise ValueError("ket must have positive dimension")
    if not np.all(np.isfinite(k)):
        raise ValueError("ket amplitudes must be finite")
    if normalized and abs(np.linalg.norm(k) - 1.0) > tol:
        raise ValueError(f"ket is not normalized: norm = {np.linalg.norm(k)!r}")
    return _frozen(k)


def as_operator(entries, hermitian: bool = False, tol: float = 1e-12) -> np.ndarray:
    m = np.array(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"operator must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("operator entries must be finite")
    if hermitian and not is_hermitian(m, tol):
        raise ValueError("operator is not Hermitian")
    return _frozen(m)


def projector(k: np.ndarray) -> np.ndarray:
    """|k><k|"""
    k = np.asarray(k, dtype=complex)
    return np.outer(k, k.conj())


def is_hermitian(op: np.ndarray, tol: float = 1e-12) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and bool(
        np.max(np.abs(op - op.conj().T), initial=0.0) <= tol
    )


def psd_sqrt(op: np.ndarray) -> np.ndarray:
    """Square root of a non-negative Hermitian operator (negative rounding noise clipped)."""
    w, v = np.linalg.eigh(np.asarray(op, dtype=complex))
    # sqrt turns 1e-17 rounding noise into 3e-9; drop it
    w = np.where(w > 1e-14 * max(1.0, float(np.max(np.abs(w)))), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two kets, ``a`` as the major index."""
    return _frozen(np.kron(as_ket(a), as_ket(b)))


def partial_trace_first(op: np.ndarray, first_dim: int = 2) -> np.ndarray:
    """Trace out the leading (Alice) factor of a bipartite operator."""
    op = np.asarray(op, dtype=complex)
    n = op.shape[0]
    if op.ndim != 2 or op.shape[1] != n or first_dim <= 0 or n % first_dim:
        raise ValueError(
            f"cannot trace a factor of dimension {first_dim} out of shape {op.shape}"
        )
    rest = n // first_dim
    return np.einsum("ijik->jk", op.reshape(first_dim, rest, first_dim, rest))


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in descending order; ``eigenvectors[i]`` belongs to ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v.T * self.eigenvalues) @ v.conj()

    def projectors(self) -> np.ndarray:
        return np.einsum("ni,nj->nij", self.eigenvectors, self.eigenvectors.conj())


def _fix_phase(vec: np.ndarray, tol: float) -> np.ndarray:
    idx = np.flatnonzero(np.abs(vec) > tol)
    if idx.size == 0:
        return vec
    c = vec[idx[0]]
    return vec * (abs(c) / c)


def _cluster_basis(vectors: np.ndarray, tol: float) -> np.ndarray:
    """Deterministic orthonormal basis for span(vectors): Gram-Schmidt over projected canonical axes."""
    k, n = vectors.shape
    proj = vectors.T @ vectors.conj()
    out: list[np.ndarray] = []
    for axis in np.eye(n, dtype=complex):
        w = proj @ axis
        for u in out:
            w = w - (u.conj() @ w) * u
        # second pass keeps orthogonality at machine precision
        for u in out:
            w = w - (u.conj() @ w) * u
        nrm = np.linalg.norm(w)
        if nrm > 1e-6:
            out.append(w / nrm)
        if len(out) == k:
            break
    return np.array(out)


def hermitian_eigensystem(op: np.ndarray, tol: float = 1e-9) -> EigenSystem:
    """Eigendecomposition of a Hermitian operator with deterministic tie-breaking.

    Eigenvalues are returned in descending order. Eigenvalues closer than
    ``tol`` form a cluster whose eigenvectors are replaced by a Gram-Schmidt
    basis seeded with the canonical axes, so degenerate inputs always give
    the same vectors. Each eigenvector is then rotated in phase so that its
    first component with magnitude above ``tol`` is real and positive.

    Raises
    ------
    ValueError
        If ``op`` is not Hermitian within ``tol``.
    """
    op = np.asarray(op, dtype=complex)
    if not is_hermitian(op, tol):
        raise ValueError("hermitian_eigensystem requires a Hermitian operator")
    w, v = np.linalg.eigh(0.5 * (op + op.conj().T))
    order = np.argsort(-w, kind="stable")
    w, vecs = w[order], v[:, order].T.copy()

    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and w[stop - 1] - w[stop] < tol:
            stop += 1
        if stop - start > 1:
            vecs[start:stop] = _cluster_basis(vecs[start:stop], tol)
        start = stop

    vecs = np.array([_fix_phase(x, tol) for x in vecs])
    return EigenSystem(_frozen(w), _frozen(vecs))


def trace_norm(op: np.ndarray, tol: float = 1e-9) -> float:
    """Sum of absolute eigenvalues of a Hermitian operator."""
    op = np.asarray(op, dtype=complex)
    if not is_hermitian(op, tol):
        raise ValueError("trace_norm requires a Hermitian operator")
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (op + op.conj().T)))))


def probe_ket(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    # The first-listed probe qubit is the minor index, so |y>|x> is axis 1.
    return tensor_product(second, first)


def canonical_probe_basis(permutation: Sequence[int] | None = None) -> np.ndarray:
    """Canonical probe basis as rows: |xx>, |yx>, |xy>, |yy>.

    ``permutation`` reorders the rows, e.g. ``FUCHS_PROBE_ORDER`` gives
    |xx>, |yy>, |xy>, |yx>.
    """
    basis = np.array([
        probe_ket(KET_X, KET_X),
        probe_ket(KET_Y, KET_X),
        probe_ket(KET_X, KET_Y),
        probe_ket(KET_Y, KET_Y),
    ])
    if permutation is not None:
        perm = list(permutation)
        if sorted(perm) != [0, 1, 2, 3]:
            raise ValueError(f"not a permutation of 0..3: {permutation!r}")
        basis = basis[perm]
    return _frozen(basis)


def bell_basis() -> np.ndarray:
    """Rows Phi+, Phi-, Psi+, Psi- built on the canonical probe basis."""
    e = canonical_probe_basis()
    return _frozen(SQRT1_2 * np.array([
        e[0] + e[3],
        e[0] - e[3],
        e[2] + e[1],
        e[2] - e[1],
    ]))


def uv_from_xy(k: np.ndarray) -> np.ndarray:
    """Re-express a qubit ket between x-y and u-v coordinates (involutive)."""
    k = as_ket(k)
    if k.shape != (2,):
        raise ValueError("uv_from_xy expects a qubit ket")
    return _frozen(_HADAMARD @ k)


xy_from_uv = uv_from_xy
