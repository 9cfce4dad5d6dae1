"""Eve's probe interactions: construction, joint states, disturbance.

An interaction is specified by the four probe vectors it leaves behind,

    |X> = sqrt(1-D_xy) |x>|xi_x> + sqrt(D_xy) |y>|zeta_x>
    |Y> = sqrt(1-D_xy) |y>|xi_y> + sqrt(D_xy) |x>|zeta_y>

with span{xi_x, xi_y} orthogonal to span{zeta_x, zeta_y}. Probe vectors are
always stored in ambient canonical coordinates (|xx>, |yx>, |xy>, |yy>).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .qcore import (
    KET_U, KET_V, KET_X, KET_Y,
    as_ket, canonical_probe_basis, projector,
)

__all__ = [
    "DisturbancePair", "DCoefficients", "InteractionVectors", "JointStates",
    "InteractionDocumentError",
    "d_coefficients", "check_orthogonal", "check_orthonormal_basis",
    "one_param_rotation", "build_optimal_general", "build_fuchs_unequal",
    "build_fuchs_equal", "build_one_param", "build_rotated", "build_family",
    "permute_basis", "joint_states", "uv_interaction_vectors",
    "measure_disturbance", "to_document", "from_document",
    "FAMILIES", "ONE_PARAM_TO_FUCHS_UNEQUAL",
]

CONSTRUCTION_TOL = 1e-12
VALIDATION_TOL = 1e-10

# build_one_param(d, 1) component i sits at component ONE_PARAM_TO_FUCHS_UNEQUAL[i]
# of build_fuchs_unequal(d).
ONE_PARAM_TO_FUCHS_UNEQUAL = (0, 3, 1, 2)

FAMILIES = ("general", "fuchs1", "fuchs2", "one-param", "rotated")


def _check_rate(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 0.5:
        raise ValueError(f"{name} must lie in [0, 1/2], got {value!r}")
    return value


@dataclass(frozen=True)
class DisturbancePair:
    """Bob's error rates for signals in the x-y and u-v bases."""

    d_xy: float
    d_uv: float

    def __post_init__(self):
        object.__setattr__(self, "d_xy", _check_rate("d_xy", self.d_xy))
        object.__setattr__(self, "d_uv", _check_rate("d_uv", self.d_uv))

    @classmethod
    def equal(cls, d: float) -> "DisturbancePair":
        return cls(d, d)

    @property
    def is_equal(self) -> bool:
        return self.d_xy == self.d_uv


@dataclass(frozen=True)
class DCoefficients:
    d_plus: float
    d_minus: float


def d_coefficients(d: float) -> DCoefficients:
    """Mixing weights ((sqrt(1-d) + sqrt(d))/sqrt2, (sqrt(1-d) - sqrt(d))/sqrt2)."""
    d = _check_rate("d", d)
    a, b = math.sqrt(1.0 - d), math.sqrt(d)
    return DCoefficients((a + b) / math.sqrt(2.0), (a - b) / math.sqrt(2.0))


@dataclass(frozen=True)
class InteractionVectors:
    """The probe vectors (xi_x, xi_y, zeta_x, zeta_y).

    When ``signals == "uv"`` the four fields hold (xi_u, xi_v, zeta_u, zeta_v)
    instead. ``basis`` only records where the vectors came from.
    """

    xi_x: np.ndarray
    xi_y: np.ndarray
    zeta_x: np.ndarray
    zeta_y: np.ndarray
    basis: str = "canonical"
    signals: str = "xy"

    def __post_init__(self):
        names = self.names
        for attr, name in zip(("xi_x", "xi_y", "zeta_x", "zeta_y"), names):
            v = as_ket(getattr(self, attr))
            if v.shape != (4,):
                raise ValueError(f"{name} must have 4 components, got {v.shape[0]}")
            norm = float(np.linalg.norm(v))
            if abs(norm - 1.0) > VALIDATION_TOL:
                raise ValueError(f"{name} is not unit norm (norm = {norm:.12g})")
            object.__setattr__(self, attr, v)
        for i in (0, 1):
            for j in (2, 3):
                overlap = abs(np.vdot(self.vectors[i], self.vectors[j]))
                if overlap > VALIDATION_TOL:
                    raise ValueError(
                        f"{names[i]} and {names[j]} are not orthogonal "
                        f"(|<{names[i]}|{names[j]}>| = {overlap:.3g})"
                    )

    @property
    def names(self) -> tuple[str, str, str, str]:
        if self.signals == "uv":
            return ("xi_u", "xi_v", "zeta_u", "zeta_v")
        return ("xi_x", "xi_y", "zeta_x", "zeta_y")

    @property
    def vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.xi_x, self.xi_y, self.zeta_x, self.zeta_y)

    def as_matrix(self) -> np.ndarray:
        """Rows are the four vectors in canonical coordinates."""
        return np.array(self.vectors)


def _from_rows(rows, basis: str) -> InteractionVectors:
    return InteractionVectors(*rows, basis=basis)


def check_orthonormal_basis(basis, tol: float = VALIDATION_TOL) -> np.ndarray:
    b = np.array(basis, dtype=complex)
    if b.shape != (4, 4):
        raise ValueError(f"basis must be 4 kets of dimension 4, got shape {b.shape}")
    err = np.max(np.abs(b.conj() @ b.T - np.eye(4)))
    if err > tol:
        raise ValueError(f"basis is not orthonormal (max Gram deviation {err:.3g})")
    return b


def check_orthogonal(r, tol: float = VALIDATION_TOL) -> np.ndarray:
    """Validate a real 4x4 orthogonal matrix."""
    r = np.array(r, dtype=float)
    if r.shape != (4, 4):
        raise ValueError(f"rotation must be 4x4, got shape {r.shape}")
    err = np.max(np.abs(r.T @ r - np.eye(4)))
    if err > tol:
        raise ValueError(f"matrix is not orthogonal (max |R^T R - I| = {err:.3g})")
    return r


def one_param_rotation(a: float) -> np.ndarray:
    """Block rotation with rows E_0..E_3 = (sqrt a, -sqrt(1-a)), (sqrt(1-a), sqrt a) per block."""
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0, 1], got {a!r}")
    s, c = math.sqrt(a), math.sqrt(1.0 - a)
    block = np.array([[s, -c], [c, s]])
    r = np.zeros((4, 4))
    r[:2, :2] = block
    r[2:, 2:] = block
    return r


def build_optimal_general(d: DisturbancePair, basis=None, label: str | None = None) -> InteractionVectors:
    """Optimal interaction written on an orthonormal basis E_0..E_3 (rows of ``basis``).

    xi_x = D+ E_0 + D- E_1,   xi_y = D- E_0 + D+ E_1,
    zeta_x = D+ E_2 + D- E_3, zeta_y = D- E_2 + D+ E_3,
    with D+- taken from d_uv.
    """
    if basis is None:
        e = canonical_probe_basis().astype(complex)
        label = label or "canonical"
    else:
        e = check_orthonormal_basis(basis)
        label = label or "supplied"
    c = d_coefficients(d.d_uv)
    p, m = c.d_plus, c.d_minus
    return _from_rows(
        [p * e[0] + m * e[1], m * e[0] + p * e[1], p * e[2] + m * e[3], m * e[2] + p * e[3]],
        label,
    )


def build_fuchs_unequal(d: DisturbancePair) -> InteractionVectors:
    """Bell-basis construction for arbitrary (D_xy, D_uv)."""
    c = d_coefficients(d.d_uv)
    p, m = c.d_plus, c.d_minus
    return _from_rows(
        [[p, 0, 0, m], [m, 0, 0, p], [0, p, m, 0], [0, m, p, 0]],
        "canonical",
    )


def build_fuchs_equal(d: float) -> InteractionVectors:
    """Equal-error construction: xi_y, zeta_y tilted by sin(alpha) = 2 sqrt(d(1-d))."""
    c = d_coefficients(d)
    cos_a = 2.0 * c.d_plus * c.d_minus
    sin_a = c.d_plus ** 2 - c.d_minus ** 2
    return _from_rows(
        [[1, 0, 0, 0], [cos_a, sin_a, 0, 0], [0, 0, 1, 0], [0, 0, cos_a, sin_a]],
        "canonical",
    )


def build_one_param(d: DisturbancePair, a: float) -> InteractionVectors:
    """One-parameter family, coefficients written out directly in canonical coordinates."""
    a = float(a)
    if not math.isfinite(a) or not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0, 1], got {a!r}")
    c = d_coefficients(d.d_uv)
    p, m = c.d_plus, c.d_minus
    s, t = math.sqrt(a), math.sqrt(1.0 - a)
    first = (p * s + m * t, m * s - p * t)
    second = (m * s + p * t, p * s - m * t)
    return _from_rows(
        [
            [first[0], first[1], 0, 0],
            [second[0], second[1], 0, 0],
            [0, 0, first[0], first[1]],
            [0, 0, second[0], second[1]],
        ],
        f"one-param(a={a!r})",
    )


def build_rotated(d: DisturbancePair, r) -> InteractionVectors:
    """Optimal interaction on the basis e = R eps (rows of R give E_lambda in canonical coordinates)."""
    r = check_orthogonal(r)
    return build_optimal_general(d, r.astype(complex), label="rotated")


def build_family(family: str, d: DisturbancePair, a: float | None = None, r=None) -> InteractionVectors:
    """Dispatch by family name; ``fuchs2`` takes its probe vectors from d_uv."""
    if family == "general":
        return build_optimal_general(d)
    if family == "fuchs1":
        return build_fuchs_unequal(d)
    if family == "fuchs2":
        return build_fuchs_equal(d.d_uv)
    if family == "one-param":
        return build_one_param(d, 0.5 if a is None else a)
    if family == "rotated":
        if r is None:
            raise ValueError("rotated family needs a rotation matrix")
        return build_rotated(d, r)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def permute_basis(iv: InteractionVectors, perm) -> InteractionVectors:
    """Move component i of every vector to position perm[i]."""
    perm = list(perm)
    if sorted(perm) != [0, 1, 2, 3]:
        raise ValueError(f"not a permutation of 0..3: {perm!r}")
    rows = np.zeros((4, 4), dtype=complex)
    rows[:, perm] = iv.as_matrix()
    return InteractionVectors(*rows, basis=f"{iv.basis}|perm{tuple(perm)}", signals=iv.signals)


@dataclass(frozen=True)
class JointStates:
    """Post-interaction Alice/Eve states (8-dim, Alice-major)."""

    X: np.ndarray
    Y: np.ndarray
    U: np.ndarray | None = None
    V: np.ndarray | None = None
    d: DisturbancePair | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("X", "Y", "U", "V"):
            v = getattr(self, name)
            if v is None:
                continue
            v = as_ket(v)
            if v.shape != (8,):
                raise ValueError(f"joint state {name} must be 8-dimensional")
            if abs(np.linalg.norm(v) - 1.0) > VALIDATION_TOL:
                raise ValueError(f"joint state {name} is not unit norm")
            object.__setattr__(self, name, v)

    @property
    def has_uv(self) -> bool:
        return self.U is not None and self.V is not None


def joint_states(iv: InteractionVectors, d: DisturbancePair, include_uv: bool = True) -> JointStates:
    if iv.signals != "xy":
        raise ValueError("joint_states expects x-y interaction vectors")
    a, b = math.sqrt(1.0 - d.d_xy), math.sqrt(d.d_xy)
    X = a * np.kron(KET_X, iv.xi_x) + b * np.kron(KET_Y, iv.zeta_x)
    Y = a * np.kron(KET_Y, iv.xi_y) + b * np.kron(KET_X, iv.zeta_y)
    U = V = None
    if include_uv:
        U = (X + Y) / math.sqrt(2.0)
        V = (X - Y) / math.sqrt(2.0)
    return JointStates(X, Y, U, V, d=d)


def uv_interaction_vectors(iv: InteractionVectors, d: DisturbancePair) -> InteractionVectors:
    """Probe vectors (xi_u, xi_v, zeta_u, zeta_v) seen by u-v signals.

    Raises ValueError at d_uv = 0, where zeta_u and zeta_v are undefined.
    """
    if d.d_uv <= 0.0:
        raise ValueError("uv_interaction_vectors is undefined at d_uv = 0")
    a, b = math.sqrt(1.0 - d.d_xy), math.sqrt(d.d_xy)
    xs, xd = iv.xi_x + iv.xi_y, iv.xi_x - iv.xi_y
    zs, zd = iv.zeta_x + iv.zeta_y, iv.zeta_y - iv.zeta_x
    n_xi = 2.0 * math.sqrt(1.0 - d.d_uv)
    n_zeta = 2.0 * math.sqrt(d.d_uv)
    return InteractionVectors(
        (a * xs + b * zs) / n_xi,
        (a * xs - b * zs) / n_xi,
        (a * xd + b * zd) / n_zeta,
        (a * xd - b * zd) / n_zeta,
        basis=iv.basis,
        signals="uv",
    )


def _error_weight(state: np.ndarray, wrong: np.ndarray) -> float:
    b = np.kron(projector(wrong), np.eye(4))
    return float(np.real(np.vdot(state, b @ state)))


def _snap(v: float) -> float:
    # rounding can push an exact 0 or 1/2 slightly outside the domain
    if -CONSTRUCTION_TOL < v < 0.5 + CONSTRUCTION_TOL:
        return min(max(v, 0.0), 0.5)
    return v


def measure_disturbance(js: JointStates) -> DisturbancePair:
    """Bob's average error rates read off the joint states."""
    if not js.has_uv:
        raise ValueError("measure_disturbance needs the U, V joint states")
    d_xy = 0.5 * (_error_weight(js.X, KET_Y) + _error_weight(js.Y, KET_X))
    d_uv = 0.5 * (_error_weight(js.U, KET_V) + _error_weight(js.V, KET_U))
    return DisturbancePair(_snap(d_xy), _snap(d_uv))


class InteractionDocumentError(ValueError):
    """Malformed interaction document; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def to_document(iv: InteractionVectors, d: DisturbancePair) -> dict[str, Any]:
    doc: dict[str, Any] = {"basis": iv.basis, "d_xy": d.d_xy, "d_uv": d.d_uv}
    for name, v in zip(("xi_x", "xi_y", "zeta_x", "zeta_y"), iv.vectors):
        doc[name] = [[float(z.real), float(z.imag)] for z in v]
    return doc


def _parse_vector(doc: Mapping[str, Any], name: str) -> np.ndarray:
    if name not in doc:
        raise InteractionDocumentError(f"missing field {name!r}", name)
    raw = doc[name]
    if not isinstance(raw, list) or len(raw) != 4:
        raise InteractionDocumentError(f"field {name!r} must be a list of 4 [re, im] pairs", name)
    out = np.empty(4, dtype=complex)
    for i, pair in enumerate(raw):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise InteractionDocumentError(f"{name}[{i}] must be a two-element [re, im] number array", name)
        out[i] = complex(pair[0], pair[1])
    return out


def from_document(doc: Mapping[str, Any]) -> tuple[InteractionVectors, DisturbancePair]:
    if not isinstance(doc, Mapping):
        raise InteractionDocumentError("interaction document must be a JSON object")
    basis = doc.get("basis", "canonical")
    if not isinstance(basis, str):
        raise InteractionDocumentError("field 'basis' must be a string", "basis")
    rates = {}
    for name in ("d_xy", "d_uv"):
        if name not in doc:
            raise InteractionDocumentError(f"missing field {name!r}", name)
        value = doc[name]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InteractionDocumentError(f"field {name!r} must be a number", name)
        rates[name] = value
    try:
        d = DisturbancePair(rates["d_xy"], rates["d_uv"])
    except ValueError as exc:
        raise InteractionDocumentError(str(exc), "d_xy" if "d_xy" in str(exc) else "d_uv") from None
    vectors = [_parse_vector(doc, name) for name in ("xi_x", "xi_y", "zeta_x", "zeta_y")]
    try:
        iv = InteractionVectors(*vectors, basis=basis)
    except ValueError as exc:
        msg = str(exc)
        hits = [(msg.find(n), n) for n in ("xi_x", "xi_y", "zeta_x", "zeta_y") if n in msg]
        named = min(hits)[1] if hits else None
        raise InteractionDocumentError(str(exc), named) from None
    return iv, d
