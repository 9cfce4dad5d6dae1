"""Eve's side: reduced states, the discrimination operator, POVMs and outcome statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interaction import DisturbancePair, InteractionVectors, JointStates, joint_states
from .qcore import hermitian_eigensystem, partial_trace_first, projector, trace_norm

__all__ = [
    "PriorPair", "EQUAL_PRIORS", "Povm", "OutcomeStats",
    "eve_density", "eve_densities", "gamma_operator", "optimal_povm",
    "likelihoods_from_vectors", "outcome_statistics", "mutual_information",
]

ZERO_OUTCOME = 1e-15


@dataclass(frozen=True)
class PriorPair:
    p_x: float = 0.5
    p_y: float = 0.5

    def __post_init__(self):
        if self.p_x < 0 or self.p_y < 0 or abs(self.p_x + self.p_y - 1.0) > 1e-12:
            raise ValueError(f"priors must be non-negative and sum to 1, got ({self.p_x}, {self.p_y})")

    @property
    def is_equal(self) -> bool:
        return self.p_x == self.p_y


EQUAL_PRIORS = PriorPair(0.5, 0.5)


@dataclass(frozen=True)
class Povm:
    """Outcome operators E_lambda on the 4-dimensional probe.

    ``vectors`` is set when every element is the rank-1 projector onto the
    corresponding row.
    """

    elements: np.ndarray
    vectors: np.ndarray | None = None

    def __post_init__(self):
        el = np.array(self.elements, dtype=complex)
        if el.ndim != 3 or el.shape[1:] != (4, 4):
            raise ValueError(f"POVM elements must be 4x4 operators, got shape {el.shape}")
        for i, e in enumerate(el):
            if np.max(np.abs(e - e.conj().T)) > 1e-10:
                raise ValueError(f"POVM element {i} is not Hermitian")
            if np.linalg.eigvalsh(e).min() < -1e-10:
                raise ValueError(f"POVM element {i} is not non-negative")
        err = np.max(np.abs(el.sum(axis=0) - np.eye(4)))
        if err > 1e-10:
            raise ValueError(f"POVM elements do not sum to identity (max deviation {err:.3g})")
        el.flags.writeable = False
        object.__setattr__(self, "elements", el)
        if self.vectors is not None:
            v = np.array(self.vectors, dtype=complex)
            v.flags.writeable = False
            object.__setattr__(self, "vectors", v)

    @classmethod
    def from_vectors(cls, vectors) -> "Povm":
        """Projective measurement onto the rows of ``vectors``."""
        v = np.array(vectors, dtype=complex)
        return cls(np.einsum("ni,nj->nij", v, v.conj()), v)

    def __len__(self) -> int:
        return len(self.elements)

    def reordered(self, order) -> "Povm":
        order = list(order)
        return Povm(self.elements[order], None if self.vectors is None else self.vectors[order])


def eve_density(js: JointStates, signal: str) -> np.ndarray:
    """Eve's reduced state for Alice's signal ``"x"``, ``"y"``, ``"u"`` or ``"v"``."""
    try:
        state = {"x": js.X, "y": js.Y, "u": js.U, "v": js.V}[signal]
    except KeyError:
        raise ValueError(f"unknown signal {signal!r}") from None
    if state is None:
        raise ValueError(f"joint state for signal {signal!r} was not computed")
    return partial_trace_first(projector(state), 2)


def eve_densities(iv: InteractionVectors, d: DisturbancePair) -> tuple[np.ndarray, np.ndarray]:
    js = joint_states(iv, d, include_uv=False)
    return eve_density(js, "x"), eve_density(js, "y")


def gamma_operator(rho_x: np.ndarray, rho_y: np.ndarray, priors: PriorPair = EQUAL_PRIORS) -> np.ndarray:
    """p_x rho_x - p_y rho_y."""
    return priors.p_x * np.asarray(rho_x) - priors.p_y * np.asarray(rho_y)


def optimal_povm(gamma: np.ndarray, tol: float = 1e-9) -> tuple[Povm, float]:
    """Projectors onto the eigenbasis of ``gamma`` and the gain they reach, tr|gamma|.

    The eigenvectors come in descending eigenvalue order with the tie-breaking
    of :func:`hermitian_eigensystem`.
    """
    es = hermitian_eigensystem(gamma, tol)
    return Povm.from_vectors(es.eigenvectors), trace_norm(gamma, tol)


def likelihoods_from_vectors(iv: InteractionVectors, d: DisturbancePair, vectors) -> tuple[np.ndarray, np.ndarray]:
    """P_lx, P_ly for a rank-1 projective POVM, from squared overlaps with the probe vectors."""
    v = np.asarray(vectors, dtype=complex)
    ov = lambda k: np.abs(v.conj() @ k) ** 2
    p_lx = (1.0 - d.d_xy) * ov(iv.xi_x) + d.d_xy * ov(iv.zeta_x)
    p_ly = (1.0 - d.d_xy) * ov(iv.xi_y) + d.d_xy * ov(iv.zeta_y)
    return p_lx, p_ly


@dataclass(frozen=True)
class OutcomeStats:
    """Per-outcome arrays (index lambda) and the two aggregates, gain and mutual information in nats."""

    p_lx: np.ndarray
    p_ly: np.ndarray
    q: np.ndarray
    q_x_post: np.ndarray
    q_y_post: np.ndarray
    gain_l: np.ndarray
    gain_total: float
    mutual_info: float
    priors: PriorPair = EQUAL_PRIORS

    def rows(self, bits: bool = False) -> list[dict]:
        """Flat records, one per outcome plus a final aggregate row."""
        unit = 1.0 / math.log(2.0) if bits else 1.0
        out = [
            {
                "outcome": str(i),
                "p_lx": float(self.p_lx[i]),
                "p_ly": float(self.p_ly[i]),
                "q": float(self.q[i]),
                "q_x_post": float(self.q_x_post[i]),
                "q_y_post": float(self.q_y_post[i]),
                "gain": float(self.gain_l[i]),
                "mutual_info": "",
            }
            for i in range(len(self.q))
        ]
        out.append({
            "outcome": "total",
            "p_lx": float(self.p_lx.sum()),
            "p_ly": float(self.p_ly.sum()),
            "q": float(self.q.sum()),
            "q_x_post": "",
            "q_y_post": "",
            "gain": self.gain_total,
            "mutual_info": self.mutual_info * unit,
        })
        return out


def outcome_statistics(
    iv: InteractionVectors,
    d: DisturbancePair,
    povm: Povm,
    priors: PriorPair = EQUAL_PRIORS,
) -> OutcomeStats:
    """Likelihoods, posteriors and gains of ``povm`` against the interaction.

    Likelihoods are tr(rho E_lambda). Outcomes whose marginal is below 1e-15
    get zero gain and even posteriors; they carry no weight in the totals.
    """
    rho_x, rho_y = eve_densities(iv, d)
    el = povm.elements
    p_lx = np.real(np.einsum("ij,nji->n", rho_x, el))
    p_ly = np.real(np.einsum("ij,nji->n", rho_y, el))
    q = priors.p_x * p_lx + priors.p_y * p_ly
    live = q > ZERO_OUTCOME
    safe_q = np.where(live, q, 1.0)
    q_x_post = np.where(live, priors.p_x * p_lx / safe_q, priors.p_x)
    q_y_post = np.where(live, priors.p_y * p_ly / safe_q, priors.p_y)
    gain_l = np.where(live, np.abs(q_x_post - q_y_post), 0.0)
    gain_total = float(np.sum(np.abs(priors.p_x * p_lx - priors.p_y * p_ly)))
    stats = OutcomeStats(p_lx, p_ly, q, q_x_post, q_y_post, gain_l, gain_total, 0.0, priors)
    object.__setattr__(stats, "mutual_info", mutual_information(stats))
    return stats


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def mutual_information(stats: OutcomeStats) -> float:
    """I = H(priors) + sum_l q(l) (Q_xl ln Q_xl + Q_yl ln Q_yl), in nats.

    With equal priors H(priors) = ln 2. Uses 0 ln 0 = 0 and skips outcomes
    with q < 1e-15.
    """
    pr = stats.priors
    h = -float(_xlogx(np.array([pr.p_x, pr.p_y])).sum())
    live = stats.q > ZERO_OUTCOME
    cond = _xlogx(stats.q_x_post) + _xlogx(stats.q_y_post)
    value = h + float(np.sum(np.where(live, stats.q * cond, 0.0)))
    return min(max(value, 0.0), h)
