"""Jacobian-rank dimension tests for the latent-factor parametrization.

Ranks are exact (integer Bareiss elimination) at random points whose
coordinates are distinct primes. A rank at one point lower-bounds the generic
rank, so every reported dimension is a maximum over trials.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
import math

from .graph import LatentFactorGraph, MixedGraph
from .linalg import integer_rank
from .model import ParameterSet, sample_params, _i_minus


@dataclass
class DimReport:
    d: int
    n_directed: int
    dim_im_tau: int
    dim_theta: int
    dim_image: int
    verdict: str  # "finite-to-one" | "infinite-to-one" | "trivially-infinite"
    trials: int
    note: str = "ranks are maxima over random prime points; a lower bound on the generic rank"

    def to_json(self) -> dict:
        return asdict(self)


def _upper(d: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i, d)]


def _scaled_int(rows) -> list[list[int]]:
    """Multiply a rational matrix by the lcm of its denominators."""
    m = 1
    for r in rows:
        for x in r:
            m = math.lcm(m, x.denominator)
    return [[int(x * m) for x in r] for r in rows]


@dataclass
class _Point:
    """Integer parameter point: Lambda, Gamma, Omega_diag entries, and N scaled to integers."""

    lam: list[list[int]]
    gam: list[list[int]]
    om_diag: list[int]
    N: list[list[int]]


def _point(g: LatentFactorGraph, seed: int) -> _Point:
    p: ParameterSet = sample_params(g, seed)
    d = g.d
    lam = _scaled_int(p.Lambda.rows())
    gam = _scaled_int(p.Gamma.rows()) if g.ell else []
    om = [int(p.Omega_diag[i, i]) for i in range(d)] if all(
        p.Omega_diag[i, i].denominator == 1 for i in range(d)) else None
    if om is None:
        raise ValueError("dimension tests expect integer sample points")
    # Neumann series terminates for acyclic support; otherwise invert exactly
    N = [[int(i == j) for j in range(d)] for i in range(d)]
    term = [row[:] for row in N]
    for _ in range(d):
        term = [[sum(term[i][k] * lam[k][j] for k in range(d) if term[i][k]) for j in range(d)] for i in range(d)]
        if not any(any(r) for r in term):
            break
        N = [[a + b for a, b in zip(r, s)] for r, s in zip(N, term)]
    else:
        N = _scaled_int(_i_minus(p.Lambda).inverse().rows())
    return _Point(lam, gam, om, N)


def _tau_columns(g: LatentFactorGraph, p: _Point) -> list[list[int]]:
    """Derivatives of the upper triangle of Omega in each loading and noise variance.

    Every column is homogeneous in the parameters, so a common rescaling of
    Gamma only rescales columns and leaves the rank unchanged.
    """
    coords = _upper(g.d)
    cols = []
    for h, v in g.latent_edges:
        row = p.gam[h]
        cols.append([(row[j] if i == v else 0) + (row[i] if j == v else 0) for i, j in coords])
    for v in range(g.d):
        cols.append([int(i == v and j == v) for i, j in coords])
    return cols


def _sigma_columns(g: LatentFactorGraph, p: _Point) -> list[list[int]]:
    """Derivatives of the upper triangle of Sigma in every free parameter.

    With N = (I - Lambda)^{-1}: an edge weight u -> w moves Sigma by S + S^T
    where S_ij = Sigma_iu N_wj; a latent-covariance direction dOmega moves it
    by N^T dOmega N. N, Omega and Gamma are rescaled to integers first, which
    multiplies each column by a nonzero constant.
    """
    d = g.d
    coords = _upper(d)
    N = p.N
    gam = p.gam
    Om = [[(p.om_diag[i] if i == j else 0) + sum(r[i] * r[j] for r in gam) for j in range(d)] for i in range(d)]
    ON = [[sum(Om[i][k] * N[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    sig = [[sum(N[k][i] * ON[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    cols = []
    for u, w in g.directed:
        cols.append([sig[i][u] * N[w][j] + sig[j][u] * N[w][i] for i, j in coords])
    for h, v in g.latent_edges:
        # dOmega = e_v g^T + g e_v^T, so N^T dOmega N = a b^T + b a^T with a = N_v., b = N^T g
        a = N[v]
        b = [sum(gam[h][k] * N[k][j] for k in range(d)) for j in range(d)]
        cols.append([a[i] * b[j] + b[i] * a[j] for i, j in coords])
    for v in range(d):
        a = N[v]
        cols.append([a[i] * a[j] for i, j in coords])
    return cols


def _rank(cols: list[list[int]]) -> int:
    if not cols:
        return 0
    return integer_rank([list(c) for c in cols])


def dim_im_tau(g: LatentFactorGraph, seed: int = 0, trials: int = 3) -> int:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    bound = min(len(g.latent_edges) + g.d, g.d * (g.d + 1) // 2)
    best = 0
    for t in range(trials):
        p = _point(g, _trial_seed(seed, t))
        best = max(best, _rank(_tau_columns(g, p)))
        if best == bound:
            break
    return best


def is_trivially_infinite(g: LatentFactorGraph, seed: int = 0, trials: int = 3) -> bool:
    return len(g.directed) + dim_im_tau(g, seed, trials) > g.d * (g.d + 1) // 2


def _trial_seed(seed: int, t: int) -> int:
    return seed * 1_000_003 + t


def dim_report(g: LatentFactorGraph, seed: int = 0, trials: int = 3) -> DimReport:
    """Jacobian ranks of the latent map and of the full parametrization, with the verdict."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    d = g.d
    moments = d * (d + 1) // 2
    tau_bound = min(len(g.latent_edges) + d, moments)
    n_dir = len(g.directed)
    r_tau = r_full = 0
    used = 0
    for t in range(trials):
        p = _point(g, _trial_seed(seed, t))
        used += 1
        r_tau = max(r_tau, _rank(_tau_columns(g, p)))
        if n_dir + r_tau > moments:
            if r_tau == tau_bound:
                break
            continue
        r_full = max(r_full, _rank(_sigma_columns(g, p)))
        if r_tau == tau_bound and r_full == n_dir + r_tau:
            break
    dim_theta = n_dir + r_tau
    if dim_theta > moments:
        verdict = "trivially-infinite"
        if r_full == 0:
            r_full = _rank(_sigma_columns(g, _point(g, _trial_seed(seed, 0))))
    elif r_full == dim_theta:
        verdict = "finite-to-one"
    else:
        verdict = "infinite-to-one"
    return DimReport(d, n_dir, r_tau, dim_theta, r_full, verdict, used)


def is_finite_to_one(g: LatentFactorGraph, seed: int = 0, trials: int = 3) -> str:
    return dim_report(g, seed, trials).verdict


def mixed_trivially_infinite(m: MixedGraph) -> bool:
    """More free parameters (edges, variances, covariances) than covariance entries."""
    return len(m.directed) + m.d + len(m.bidirected) > m.d * (m.d + 1) // 2
