"""Brute-force competitors for the closed-form optima.

Every sample is drawn from its own stream ``numpy.random.default_rng((seed, i))``,
so trial ``i`` is the same whatever ``trials`` is and results are pure
functions of the :class:`SampleConfig`.

Sampling distributions:

* orthogonal matrices: QR of a 4x4 standard normal matrix, columns rescaled
  so that R has a positive diagonal (Haar measure on O(4));
* unitary bases (``complex_=True``): same recipe on a complex normal matrix;
* interaction parameters alpha, beta, mu, nu: independent uniform on [0, 1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .interaction import DisturbancePair, InteractionVectors, check_orthogonal, d_coefficients
from .measurement import EQUAL_PRIORS, Povm, eve_densities, gamma_operator, optimal_povm, outcome_statistics
from .qcore import hermitian_eigensystem

__all__ = [
    "SampleConfig", "RandomInteraction",
    "random_orthogonal", "random_orthogonals", "random_unitaries",
    "random_povm", "random_povm_bases", "povm_gains", "max_gain_search",
    "interaction_from_params", "random_interaction", "random_interactions",
    "optimal_params", "closed_form_gains", "closed_form_gain_error",
]


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 0
    trials: int = 1000

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.trials) < 1:
            raise ValueError("trials must be positive")


def _haar_fix(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = np.where(np.abs(diag) > 0, diag / np.abs(diag), 1.0)
    return q * phase[..., None, :]


@lru_cache(maxsize=16)
def _orthogonal_batch(seed: int, trials: int) -> np.ndarray:
    z = np.stack([np.random.default_rng((seed, i)).standard_normal((4, 4)) for i in range(trials)])
    q, r = np.linalg.qr(z)
    out = _haar_fix(q, r)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=16)
def _unitary_batch(seed: int, trials: int) -> np.ndarray:
    z = np.stack([
        (lambda g: g.standard_normal((4, 4)) + 1j * g.standard_normal((4, 4)))(
            np.random.default_rng((seed, i, 1))
        )
        for i in range(trials)
    ])
    q, r = np.linalg.qr(z)
    out = _haar_fix(q, r)
    out.flags.writeable = False
    return out


def random_orthogonals(cfg: SampleConfig) -> np.ndarray:
    """``cfg.trials`` Haar-random 4x4 orthogonal matrices, shape (trials, 4, 4)."""
    return _orthogonal_batch(int(cfg.seed), int(cfg.trials))


def random_orthogonal(cfg: SampleConfig) -> np.ndarray:
    return np.array(random_orthogonals(SampleConfig(cfg.seed, 1))[0])


def random_unitaries(cfg: SampleConfig) -> np.ndarray:
    return _unitary_batch(int(cfg.seed), int(cfg.trials))


def random_povm_bases(cfg: SampleConfig, complex_: bool = False) -> np.ndarray:
    """Rows of each matrix are the measurement vectors of one random projective POVM."""
    return random_unitaries(cfg) if complex_ else random_orthogonals(cfg)


def random_povm(cfg: SampleConfig, complex_: bool = False) -> Povm:
    """One random rank-1 projective POVM (trial 0 of ``cfg.seed``)."""
    return Povm.from_vectors(random_povm_bases(SampleConfig(cfg.seed, 1), complex_)[0])


def povm_gains(gamma: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """sum_l |<e_l|gamma|e_l>| for every basis in a (n, 4, 4) stack of row bases."""
    diag = np.einsum("nki,ij,nkj->nk", bases.conj(), gamma, bases)
    return np.abs(diag.real).sum(axis=1)


def max_gain_search(rho_x: np.ndarray, rho_y: np.ndarray, cfg: SampleConfig, complex_: bool = False) -> float:
    """Best equal-prior gain over random projective POVMs plus the eigenprojector POVM."""
    gamma = gamma_operator(rho_x, rho_y, EQUAL_PRIORS)
    sampled = povm_gains(gamma, random_povm_bases(cfg, complex_))
    eigen = povm_gains(gamma, hermitian_eigensystem(gamma).eigenvectors[None])
    return float(max(sampled.max(), eigen[0]))


@dataclass(frozen=True)
class RandomInteraction:
    interaction: InteractionVectors
    alpha: float
    beta: float
    mu: float
    nu: float
    basis: np.ndarray


def interaction_from_params(alpha: float, beta: float, mu: float, nu: float, basis=None, label: str = "params") -> InteractionVectors:
    """xi_x = sqrt(a) E0 + sqrt(1-a) E1, xi_y likewise with beta; zeta_x, zeta_y on E2, E3 with mu, nu."""
    for name, v in (("alpha", alpha), ("beta", beta), ("mu", mu), ("nu", nu)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
    e = np.eye(4) if basis is None else check_orthogonal(basis)
    pair = lambda t, i, j: math.sqrt(t) * e[i] + math.sqrt(1.0 - t) * e[j]
    return InteractionVectors(pair(alpha, 0, 1), pair(beta, 0, 1), pair(mu, 2, 3), pair(nu, 2, 3), basis=label)


def optimal_params(d_uv: float) -> tuple[float, float, float, float]:
    """alpha = mu = D+^2, beta = nu = 1 - alpha."""
    a = d_coefficients(d_uv).d_plus ** 2
    return a, 1.0 - a, a, 1.0 - a


def random_interactions(d: DisturbancePair, cfg: SampleConfig, eigen_aligned: bool = False) -> list[RandomInteraction]:
    """Random interactions in the general (alpha, beta, mu, nu) form on a random orthogonal basis.

    With ``eigen_aligned`` the partners are tied, beta = 1 - alpha and
    nu = 1 - mu, which is exactly when the construction basis diagonalizes
    the discrimination operator. ``d`` does not enter the vectors; it is
    accepted so callers pair each sample with the rates they will use.
    """
    del d
    out = []
    for i in range(int(cfg.trials)):
        g = np.random.default_rng((int(cfg.seed), i, 2))
        z = g.standard_normal((4, 4))
        alpha, beta, mu, nu = g.random(4)
        if eigen_aligned:
            beta, nu = 1.0 - alpha, 1.0 - mu
        q, r = np.linalg.qr(z)
        basis = _haar_fix(q, r)
        iv = interaction_from_params(alpha, beta, mu, nu, basis, label="random")
        out.append(RandomInteraction(iv, float(alpha), float(beta), float(mu), float(nu), basis))
    return out


def random_interaction(d: DisturbancePair, cfg: SampleConfig, eigen_aligned: bool = False) -> InteractionVectors:
    return random_interactions(d, SampleConfig(cfg.seed, 1), eigen_aligned)[0].interaction


def closed_form_gains(ri: RandomInteraction, d: DisturbancePair) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-outcome gains of the eigenprojector POVM next to the closed forms of their slots.

    Each measured outcome is matched to the construction-basis vector it
    overlaps most. Returns (measured, closed, smallest best overlap); the
    overlap is 1 exactly when the construction basis diagonalizes Gamma.
    """
    rho_x, rho_y = eve_densities(ri.interaction, d)
    povm, _ = optimal_povm(gamma_operator(rho_x, rho_y))
    stats = outcome_statistics(ri.interaction, d, povm)
    a, b, m, n = ri.alpha, ri.beta, ri.mu, ri.nu
    closed = np.array([
        abs(a - b) / (a + b),
        abs(b - a) / (2.0 - a - b),
        abs(m - n) / (m + n),
        abs(n - m) / (2.0 - m - n),
    ])
    overlap = np.abs(povm.vectors.conj() @ ri.basis.T)
    return stats.gain_l, closed[overlap.argmax(axis=1)], float(overlap.max(axis=1).min())


def closed_form_gain_error(ri: RandomInteraction, d: DisturbancePair) -> float:
    measured, closed, overlap = closed_form_gains(ri, d)
    return float(max(np.max(np.abs(measured - closed)), 1.0 - overlap))
