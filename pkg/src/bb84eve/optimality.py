"""Closed-form bounds and the optimality checks built on them.

Eigen slots follow the labelling of the optimal discrimination operator:
slot 0 holds the largest eigenvalue, slot 1 the most negative, slot 2 the
second largest and slot 3 the remaining one, i.e. (g0, -g0, g2, -g2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .interaction import (
    DisturbancePair, InteractionVectors, JointStates,
    d_coefficients, joint_states, measure_disturbance,
)
from .measurement import (
    EQUAL_PRIORS, OutcomeStats, Povm,
    eve_density, gamma_operator, outcome_statistics,
)
from .qcore import (
    KET_U, KET_V, KET_X, KET_Y, EigenSystem,
    hermitian_eigensystem, projector, psd_sqrt,
)

__all__ = [
    "BoundReport", "Prop3Report", "CanonicalForm", "FullReport",
    "phi", "gain_bound", "mi_bound", "theoretical_eigenvalues", "d_pattern",
    "slot_order", "slot_ordered", "check_prop3", "canonicalize", "full_report",
    "perturbed_povm",
]

VERIFY_TOL = 1e-10
ACCEPT_TOL = 1e-9
SLOT_ORDER = (0, 3, 1, 2)


def _rate(d: float) -> float:
    d = float(d)
    if not math.isfinite(d) or not 0.0 <= d <= 0.5:
        raise ValueError(f"error rate must lie in [0, 1/2], got {d!r}")
    return d


def phi(z: float) -> float:
    """(1+z) ln(1+z) + (1-z) ln(1-z), with 0 ln 0 = 0."""
    z = float(z)
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"phi is evaluated on [0, 1], got {z!r}")
    left = (1.0 + z) * math.log1p(z)
    right = 0.0 if z == 1.0 else (1.0 - z) * math.log1p(-z)
    return left + right


def gain_bound(d_other: float) -> float:
    """Largest information gain compatible with error rate ``d_other`` in the conjugate basis."""
    d = _rate(d_other)
    return 2.0 * math.sqrt(d * (1.0 - d))


def mi_bound(d_other: float) -> float:
    """Largest mutual information (nats) compatible with ``d_other``."""
    return 0.5 * phi(min(gain_bound(d_other), 1.0))


def theoretical_eigenvalues(d: DisturbancePair) -> np.ndarray:
    """(g0, -g0, g2, -g2) of the discrimination operator of an optimal interaction."""
    c = d_coefficients(d.d_uv)
    half_gap = 0.5 * (c.d_plus ** 2 - c.d_minus ** 2)
    g0 = half_gap * (1.0 - d.d_xy)
    g2 = half_gap * d.d_xy
    return np.array([g0, -g0, g2, -g2])


def d_pattern(d_uv: float) -> np.ndarray:
    """Coefficient matrix <E_lambda|v> every optimal interaction has in its eigen slots.

    Rows are xi_x, xi_y, zeta_x, zeta_y; columns are slots 0..3.
    """
    c = d_coefficients(d_uv)
    p, m = c.d_plus, c.d_minus
    return np.array([
        [p, m, 0.0, 0.0],
        [m, p, 0.0, 0.0],
        [0.0, 0.0, p, m],
        [0.0, 0.0, m, p],
    ])


def slot_order(es: EigenSystem) -> list[int]:
    """Indices into a descending eigensystem, listed slot by slot."""
    if len(es) != 4:
        raise ValueError("slot ordering needs a 4-dimensional eigensystem")
    return list(SLOT_ORDER)


def slot_ordered(es: EigenSystem) -> EigenSystem:
    order = slot_order(es)
    return EigenSystem(es.eigenvalues[order], es.eigenvectors[order])


def _is_degenerate(eigenvalues: np.ndarray, tol: float) -> bool:
    w = np.sort(eigenvalues)
    return bool(np.any(np.diff(w) < tol))


# --------------------------------------------------------------------------- bounds


@dataclass(frozen=True)
class BoundReport:
    g_bound: float
    i_bound: float
    g_achieved: float
    i_achieved: float

    @property
    def slack_g(self) -> float:
        return self.g_bound - self.g_achieved

    @property
    def slack_i(self) -> float:
        return self.i_bound - self.i_achieved


# --------------------------------------------------------------------------- proportionality conditions


@dataclass(frozen=True)
class Prop3Report:
    """Per-outcome sign and residuals of the two proportionality conditions.

    ``inferred`` marks the mirror (u-v signal) direction, which is derived by
    symmetry rather than written out.
    """

    epsilon: tuple[int, ...]
    residual_u: tuple[float, ...]
    residual_v: tuple[float, ...]
    verdict: bool
    basis: str = "xy"
    inferred: bool = False
    note: str = ""

    @property
    def max_residual(self) -> float:
        return max(self.residual_u + self.residual_v, default=0.0)


def check_prop3(
    js: JointStates,
    povm: Povm,
    d: DisturbancePair,
    basis: str = "xy",
    tol: float = ACCEPT_TOL,
) -> Prop3Report:
    """Check |V_lu> = eps sqrt(D/(1-D)) |U_lu> and |U_lv> = eps sqrt(D/(1-D)) |V_lv>.

    For ``basis="xy"`` (Eve gains on x-y signals) the vectors are
    (B_u (x) sqrt(E_l)) applied to |U>, |V>, with D = d_uv. ``basis="uv"`` is
    the mirror: X, Y and B_x, B_y swap roles with U, V and B_u, B_v, and
    D = d_xy. The sign eps_l is the least-squares fit of both conditions.
    """
    if not js.has_uv:
        raise ValueError("check_prop3 needs U, V joint states")
    if basis == "xy":
        first, second, b_first, b_second, rate = js.U, js.V, KET_U, KET_V, d.d_uv
    elif basis == "uv":
        first, second, b_first, b_second, rate = js.X, js.Y, KET_X, KET_Y, d.d_xy
    else:
        raise ValueError(f"basis must be 'xy' or 'uv', got {basis!r}")
    inferred = basis == "uv"
    n = len(povm)
    if rate == 0.0:
        return Prop3Report(
            (1,) * n, (0.0,) * n, (0.0,) * n, True, basis, inferred,
            note="error rate is zero: conditions hold trivially",
        )
    f = math.sqrt(rate / (1.0 - rate))
    pb1, pb2 = projector(b_first), projector(b_second)
    eps, res_u, res_v = [], [], []
    for e in povm.elements:
        root = psd_sqrt(e)
        op1, op2 = np.kron(pb1, root), np.kron(pb2, root)
        u_l1, v_l1 = op1 @ first, op1 @ second
        u_l2, v_l2 = op2 @ first, op2 @ second
        fit = np.real(np.vdot(u_l1, v_l1) + np.vdot(v_l2, u_l2))
        s = -1 if fit < 0 else 1
        eps.append(s)
        res_u.append(float(np.linalg.norm(v_l1 - s * f * u_l1)))
        res_v.append(float(np.linalg.norm(u_l2 - s * f * v_l2)))
    verdict = all(r < tol for r in res_u + res_v)
    return Prop3Report(tuple(eps), tuple(res_u), tuple(res_v), verdict, basis, inferred)


def perturbed_povm(povm: Povm, angle: float = 0.1, slots: tuple[int, int] = (0, 1)) -> Povm:
    """Rotate two projective outcomes into each other by ``angle`` radians."""
    if povm.vectors is None:
        raise ValueError("perturbation needs a projective POVM given by vectors")
    v = np.array(povm.vectors)
    i, j = slots
    c, s = math.cos(angle), math.sin(angle)
    v[i], v[j] = c * povm.vectors[i] + s * povm.vectors[j], -s * povm.vectors[i] + c * povm.vectors[j]
    return Povm.from_vectors(v)


# --------------------------------------------------------------------------- canonical form


@dataclass(frozen=True)
class CanonicalForm:
    """An interaction written in the slot-ordered eigenbasis of its discrimination operator.

    ``coefficients[k, s]`` is <E_s|v_k> for v = (xi_x, xi_y, zeta_x, zeta_y).
    ``permutation[s]`` is the index of the raw (descending) eigenvector placed
    in slot s and ``signs[s]`` the sign applied to it.
    """

    coefficients: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    permutation: tuple[int, ...]
    signs: tuple[int, ...]
    unique: bool
    pattern: np.ndarray
    max_deviation: float
    max_imag: float

    @property
    def matches_pattern(self) -> bool:
        return self.max_deviation < ACCEPT_TOL and self.max_imag < ACCEPT_TOL


def canonicalize(
    iv: InteractionVectors,
    d: DisturbancePair,
    tol: float = ACCEPT_TOL,
    gamma: np.ndarray | None = None,
) -> CanonicalForm:
    """Map an interaction to its coefficient matrix in the eigen slots.

    Signs are fixed so that <E_0|xi_x>, <E_1|xi_x>, <E_2|zeta_x>, <E_3|zeta_x>
    are non-negative (falling back to the y partner when that overlap
    vanishes). ``unique`` is False when the discrimination operator has a
    repeated eigenvalue, where the eigen slots are not determined.
    """
    if gamma is None:
        js = joint_states(iv, d, include_uv=False)
        gamma = gamma_operator(eve_density(js, "x"), eve_density(js, "y"), EQUAL_PRIORS)
    es = hermitian_eigensystem(gamma, tol)
    perm = slot_order(es)
    vecs = es.eigenvectors[perm].copy()
    vals = es.eigenvalues[perm]
    raw = vecs.conj() @ iv.as_matrix().T  # [slot, vector]
    signs = []
    preference = {0: (0, 1), 1: (0, 1), 2: (2, 3), 3: (2, 3)}
    for s in range(4):
        sign = 1
        for k in preference[s]:
            c = raw[s, k]
            if abs(c) > tol:
                # a complex overlap cannot be made real by a sign; leave it to max_imag
                sign = -1 if c.real < 0 else 1
                break
        signs.append(sign)
        vecs[s] *= sign
    coeff = (vecs.conj() @ iv.as_matrix().T).T
    pattern = d_pattern(d.d_uv)
    return CanonicalForm(
        coefficients=np.real(coeff),
        eigenvalues=vals,
        eigenvectors=vecs,
        permutation=tuple(perm),
        signs=tuple(signs),
        unique=not _is_degenerate(es.eigenvalues, tol),
        pattern=pattern,
        max_deviation=float(np.max(np.abs(np.real(coeff) - pattern))),
        max_imag=float(np.max(np.abs(np.imag(coeff)))),
    )


# --------------------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class FullReport:
    d: DisturbancePair
    measured: DisturbancePair
    bounds: BoundReport
    prop3: Prop3Report
    canonical: CanonicalForm
    stats: OutcomeStats
    povm: Povm
    gamma: np.ndarray
    theoretical: np.ndarray = field(repr=False)

    @property
    def degenerate(self) -> bool:
        return not self.canonical.unique

    @property
    def d_uv_consistent(self) -> bool:
        return abs(self.measured.d_uv - self.d.d_uv) < ACCEPT_TOL

    @property
    def optimal(self) -> bool:
        return abs(self.bounds.slack_g) < ACCEPT_TOL and abs(self.bounds.slack_i) < ACCEPT_TOL


def full_report(iv: InteractionVectors, d: DisturbancePair) -> FullReport:
    """Joint states -> densities -> Gamma -> optimal POVM -> statistics -> bounds -> proportionality check -> canonical form.

    Bounds use Bob's u-v error rate as measured from the joint states, which
    equals ``d.d_uv`` for every optimal family.
    """
    js = joint_states(iv, d, include_uv=True)
    measured = measure_disturbance(js)
    rho_x, rho_y = eve_density(js, "x"), eve_density(js, "y")
    gamma = gamma_operator(rho_x, rho_y, EQUAL_PRIORS)
    canon = canonicalize(iv, d, gamma=gamma)
    povm = Povm.from_vectors(canon.eigenvectors)
    stats = outcome_statistics(iv, d, povm, EQUAL_PRIORS)
    bounds = BoundReport(
        g_bound=gain_bound(measured.d_uv),
        i_bound=mi_bound(measured.d_uv),
        g_achieved=stats.gain_total,
        i_achieved=stats.mutual_info,
    )
    prop3 = check_prop3(js, povm, measured)
    return FullReport(
        d=d, measured=measured, bounds=bounds, prop3=prop3, canonical=canon,
        stats=stats, povm=povm, gamma=gamma, theoretical=theoretical_eigenvalues(d),
    )
