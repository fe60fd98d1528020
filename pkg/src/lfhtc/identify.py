"""Exact recovery of edge weights from a covariance matrix, driven by a certificate.

For each certified node v with triple (Y, Z, H) one square linear system
M (lambda; psi) = c is assembled from Sigma and the columns of Lambda solved
earlier, then solved by fraction-free elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .criterion import Certificate, HtcTriple
from .graph import LatentFactorGraph, bits
from .linalg import RMatrix, SingularMatrixError, solve
from .model import omega_from_sigma


class MissingColumnError(LookupError):
    """A system tried to read a column of Lambda that has not been solved yet."""


class DegenerateCovarianceError(ArithmeticError):
    """The recovery system is singular: Sigma lies on the non-generic exceptional set."""

    def __init__(self, v: str):
        super().__init__(f"non-generic covariance input: singular system for node {v!r}")
        self.v = v


class KnownLambda:
    """Partially solved Lambda whose unknown columns cannot be read."""

    def __init__(self, d: int):
        self.d = d
        self._cols: dict[int, list[Fraction]] = {}

    def set_column(self, j: int, values: list[Fraction]) -> None:
        self._cols[j] = list(values)

    def known(self, j: int) -> bool:
        return j in self._cols

    def column(self, j: int) -> list[Fraction]:
        try:
            return self._cols[j]
        except KeyError:
            raise MissingColumnError(f"column {j} of Lambda is not known yet") from None

    def to_matrix(self) -> RMatrix:
        zero = [Fraction(0)] * self.d
        cols = [self._cols.get(j, zero) for j in range(self.d)]
        return RMatrix([[cols[j][i] for j in range(self.d)] for i in range(self.d)])


@dataclass
class RecoverySystem:
    v: int
    parents: list[int]
    Z: list[int]
    Y: list[int]
    M: RMatrix
    c: list[Fraction]

    @property
    def n(self) -> int:
        return len(self.parents)

    @property
    def r(self) -> int:
        return len(self.Z)


def _left(sig, lam: KnownLambda, y: int, j: int) -> Fraction:
    """[(I - Lambda)^T Sigma]_{y, j}; reads column y of Lambda."""
    col = lam.column(y)
    return sig[y][j] - sum((col[k] * sig[k][j] for k in range(len(sig)) if col[k]), Fraction(0))


def _right(sig, lam: KnownLambda, y: int, z: int) -> Fraction:
    """[Sigma (I - Lambda)]_{y, z}; reads column z of Lambda."""
    col = lam.column(z)
    return sig[y][z] - sum((sig[y][k] * col[k] for k in range(len(sig)) if col[k]), Fraction(0))


def _both(sig, lam: KnownLambda, y: int, z: int) -> Fraction:
    """[(I - Lambda)^T Sigma (I - Lambda)]_{y, z}; reads columns y and z."""
    cz = lam.column(z)
    out = _left(sig, lam, y, z)
    for k in range(len(sig)):
        if cz[k]:
            out -= _left(sig, lam, y, k) * cz[k]
    return out


def build_system(g: LatentFactorGraph, triple: HtcTriple, sig: RMatrix, known: KnownLambda) -> RecoverySystem:
    v = g.obs_index(triple.v)
    Y = sorted(g.obs_index(y) for y in triple.Y)
    Z = sorted(g.obs_index(z) for z in triple.Z)
    pa = list(bits(g.pa_mask(v)))
    reach = g.htr_mask(g.obs_mask(triple.Z) | (1 << v), g.lat_mask(triple.H))
    s = sig.rows()
    rows, c = [], []
    for y in Y:
        if (reach >> y) & 1:
            rows.append([_left(s, known, y, p) for p in pa] + [_both(s, known, y, z) for z in Z])
            c.append(_left(s, known, y, v))
        else:
            rows.append([s[y][p] for p in pa] + [_right(s, known, y, z) for z in Z])
            c.append(s[y][v])
    return RecoverySystem(v, pa, Z, Y, RMatrix(rows, len(pa) + len(Z)), c)


def solve_column(sys: RecoverySystem) -> tuple[list[Fraction], list[Fraction]]:
    """Solve for the edge weights into v (parent order) and the auxiliary psi."""
    size = sys.n + sys.r
    if sys.M.shape != (size, size):
        raise ValueError(f"system is {sys.M.shape}, expected square of size {size}")
    if size == 0:
        return [], []
    try:
        x = solve(sys.M.rows(), sys.c)
    except SingularMatrixError:
        raise DegenerateCovarianceError(str(sys.v)) from None
    return x[: sys.n], x[sys.n:]


def recover_all(g: LatentFactorGraph, cert: Certificate, sig: RMatrix) -> tuple[RMatrix, RMatrix]:
    """Solve every column of Lambda in certificate order, then Omega."""
    if sig.shape != (g.d, g.d) or not sig.is_symmetric():
        raise ValueError(f"Sigma must be a symmetric {g.d}x{g.d} matrix")
    covered = [e.v for e in cert.entries]
    if sorted(covered) != sorted(g.observed):
        missing = sorted(set(g.observed) - set(covered))
        raise ValueError(f"certificate does not cover every node (missing {missing})")
    known = KnownLambda(g.d)
    for e in cert.entries:
        v = g.obs_index(e.v)
        col = [Fraction(0)] * g.d
        if not e.trivial:
            system = build_system(g, e.triple, sig, known)
            try:
                lam, _ = solve_column(system)
            except DegenerateCovarianceError:
                raise DegenerateCovarianceError(e.v) from None
            for p, x in zip(system.parents, lam):
                col[p] = x
        elif g.pa_mask(v):
            raise ValueError(f"node {e.v!r} marked trivial but has observed parents")
        known.set_column(v, col)
    lam = known.to_matrix()
    return lam, omega_from_sigma(sig, lam)
