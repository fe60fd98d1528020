"""Forward parametrization: parameters -> latent covariance -> observed covariance."""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction

from .graph import LatentFactorGraph, bits
from .linalg import RMatrix, SingularMatrixError

MAX_REDRAWS = 100


@lru_cache(maxsize=None)
def _primes(n: int) -> tuple[int, ...]:
    out: list[int] = []
    k = 2
    while len(out) < n:
        if all(k % p for p in out if p * p <= k):
            out.append(k)
        k += 1
    return tuple(out)


def first_primes(n: int) -> list[int]:
    return list(_primes(n))


def prime_pool(g: LatentFactorGraph) -> tuple[int, ...]:
    n_free = len(g.directed) + len(g.latent_edges) + g.d
    return _primes(max(40, 3 * n_free))


@dataclass(frozen=True)
class ParameterSet:
    """Edge weights ``Lambda[u][w]`` for u -> w, loadings ``Gamma[h][v]`` and noise variances."""

    Lambda: RMatrix
    Gamma: RMatrix
    Omega_diag: RMatrix

    def check(self, g: LatentFactorGraph) -> None:
        """Raise ValueError if supports, shapes or positivity disagree with ``g``."""
        d, ell = g.d, g.ell
        if self.Lambda.shape != (d, d) or self.Gamma.shape != (ell, d) or self.Omega_diag.shape != (d, d):
            raise ValueError("parameter shapes do not match the graph")
        edges = set(g.directed)
        for u in range(d):
            for w in range(d):
                if self.Lambda[u, w] != 0 and (u, w) not in edges:
                    raise ValueError(f"Lambda has weight on non-edge {g.observed[u]}->{g.observed[w]}")
        ledges = set(g.latent_edges)
        for h in range(ell):
            for w in range(d):
                if self.Gamma[h, w] != 0 and (h, w) not in ledges:
                    raise ValueError(f"Gamma has weight on non-edge {g.latent[h]}->{g.observed[w]}")
        for i in range(d):
            for j in range(d):
                x = self.Omega_diag[i, j]
                if (i == j and x <= 0) or (i != j and x != 0):
                    raise ValueError("Omega_diag must be diagonal with positive entries")

    def to_json(self) -> dict:
        return {
            "Lambda": self.Lambda.to_json(),
            "Gamma": self.Gamma.to_json(),
            "Omega_diag": self.Omega_diag.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ParameterSet":
        return cls(
            RMatrix.from_json(data["Lambda"]),
            RMatrix.from_json(data["Gamma"]),
            RMatrix.from_json(data["Omega_diag"]),
        )


def omega(p: ParameterSet) -> RMatrix:
    """Latent covariance: diagonal noise plus the factor part Gamma^T Gamma."""
    if p.Gamma.nrows == 0:
        return p.Omega_diag
    return p.Omega_diag + p.Gamma.T @ p.Gamma


def _i_minus(lam: RMatrix) -> RMatrix:
    return RMatrix.identity(lam.nrows) - lam


def sigma(p: ParameterSet) -> RMatrix:
    """Observed covariance (I - Lambda)^{-T} Omega (I - Lambda)^{-1}."""
    try:
        n = _i_minus(p.Lambda).inverse()
    except SingularMatrixError:
        raise SingularMatrixError("I - Lambda is singular") from None
    return n.T @ omega(p) @ n


def omega_from_sigma(sig: RMatrix, lam: RMatrix) -> RMatrix:
    """(I - Lambda)^T Sigma (I - Lambda); raises if I - Lambda is singular."""
    m = _i_minus(lam)
    if m.det() == 0:
        raise SingularMatrixError("I - Lambda is singular")
    return m.T @ sig @ m


def sample_params(g: LatentFactorGraph, seed: int, mode: str = "primes") -> ParameterSet:
    """Deterministic random parameters supported on the graph.

    ``primes`` puts distinct primes on every free coordinate (edge weights,
    loadings and noise variances); ``small-rationals`` draws numerator and
    denominator from 1..97. Singular I - Lambda is re-drawn a bounded number
    of times.
    """
    rng = random.Random(seed)
    d, ell = g.d, g.ell
    n_free = len(g.directed) + len(g.latent_edges) + d
    pool = prime_pool(g)
    for _ in range(MAX_REDRAWS):
        if mode == "primes":
            vals = [Fraction(x) for x in rng.sample(pool, n_free)]
        elif mode == "small-rationals":
            vals = [Fraction(rng.randint(1, 97), rng.randint(1, 97)) for _ in range(n_free)]
        else:
            raise ValueError(f"unknown sampling mode {mode!r}")
        it = iter(vals)
        lam = [[Fraction(0)] * d for _ in range(d)]
        for u, w in g.directed:
            lam[u][w] = next(it)
        gam = [[Fraction(0)] * d for _ in range(ell)]
        for h, w in g.latent_edges:
            gam[h][w] = next(it)
        om = [[Fraction(0)] * d for _ in range(d)]
        for i in range(d):
            om[i][i] = next(it)
        L = RMatrix(lam)
        if _i_minus(L).det() != 0:
            return ParameterSet(L, RMatrix(gam) if ell else RMatrix.zeros(0, d), RMatrix(om))
    raise SingularMatrixError("could not sample regular Lambda")


def lambda_support_mask(g: LatentFactorGraph, v: int) -> list[int]:
    """Observed parents of ``v`` in index order."""
    return list(bits(g.pa_mask(v)))
