"""Pairwise 1/r potential sums and their exact derivative tensors.

The potential of a configuration ``q`` with masses ``m`` is

    V(q) = sum_{i<j} m_i m_j / |q_i - q_j|

which is homogeneous of degree -1 in the coordinates.  Everything here is a
pure function of masses and coordinates; masses may be signed, and the only
hard domain restriction is the pairwise collision floor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CollisionError, NonRealSpectrumWarning

__all__ = [
    "COLLISION_FLOOR",
    "MassVector",
    "Configuration",
    "HessianW",
    "eval_potential",
    "gradient",
    "acceleration",
    "hessian_w",
    "third_contract",
]

COLLISION_FLOOR = 1e-14

# |sum(m) - 1| below this counts as normalized
_SUM_TOL = 1e-12


@dataclass
class MassVector:
    """Masses of the bodies, in body order.

    ``normalized`` records whether the total mass is 1 to within 1e-12; it is
    computed, not user-supplied.  Signed masses are allowed.
    """

    values: np.ndarray
    normalized: bool = field(init=False)

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.ndim != 1 or v.size < 2:
            raise ValueError("mass vector needs at least two entries")
        if not np.all(np.isfinite(v)):
            raise ValueError("masses must be finite")
        self.values = v
        self.normalized = bool(abs(v.sum() - 1.0) <= _SUM_TOL)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def all_positive(self) -> bool:
        return bool(np.all(self.values > 0.0))

    def rescaled(self, factor: float) -> "MassVector":
        return MassVector(self.values * factor)


@dataclass
class Configuration:
    """Positions of ``n`` bodies in dimension ``d``, one row per body."""

    coords: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.coords, dtype=float)
        if q.ndim == 1:
            q = q[:, None]
        if q.ndim != 2 or q.shape[0] < 2:
            raise ValueError("configuration needs an (n, d) array with n >= 2")
        if not np.all(np.isfinite(q)):
            raise ValueError("coordinates must be finite")
        self.coords = q

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def flat(self) -> np.ndarray:
        return self.coords.reshape(-1)


def as_mass_array(masses) -> np.ndarray:
    if isinstance(masses, MassVector):
        return masses.values
    return MassVector(np.asarray(masses, dtype=float)).values


def as_coord_array(coords) -> np.ndarray:
    if isinstance(coords, Configuration):
        return coords.coords
    return Configuration(np.asarray(coords, dtype=float)).coords


def _pair_data(q: np.ndarray):
    """Pairwise separations; raises below the collision floor."""
    diff = q[:, None, :] - q[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    n = q.shape[0]
    iu = np.triu_indices(n, k=1)
    dmin = dist[iu].min()
    if dmin <= COLLISION_FLOOR:
        pair = np.unravel_index(np.argmin(dist[iu]), (len(iu[0]),))
        i, j = iu[0][pair[0]], iu[1][pair[0]]
        raise CollisionError(
            f"bodies {i} and {j} are separated by {dmin:.3e} "
            f"(floor {COLLISION_FLOOR:.1e})"
        )
    return diff, dist


def eval_potential(masses, coords) -> float:
    """Sum of m_i m_j / r_ij over unordered pairs."""
    m = as_mass_array(masses)
    q = as_coord_array(coords)
    _, dist = _pair_data(q)
    n = q.shape[0]
    iu = np.triu_indices(n, k=1)
    return float(np.sum(m[iu[0]] * m[iu[1]] / dist[iu]))


def gradient(masses, coords) -> np.ndarray:
    """Gradient dV/dq as an (n, d) array.

    Row i is sum_{j != i} m_i m_j (q_j - q_i) / r_ij^3, so the acceleration
    field of the attractive dynamics is row i divided by m_i.
    """
    m = as_mass_array(masses)
    q = as_coord_array(coords)
    diff, dist = _pair_data(q)
    n = q.shape[0]
    inv3 = np.zeros_like(dist)
    off = ~np.eye(n, dtype=bool)
    inv3[off] = dist[off] ** -3
    w = (m[:, None] * m[None, :]) * inv3
    return -np.einsum("ij,ijk->ik", w, diff)


def acceleration(masses, coords) -> np.ndarray:
    """Acceleration field (1/m_i) dV/dq_i as an (n, d) array."""
    m = as_mass_array(masses)
    return gradient(m, coords) / m[:, None]


def _w_matrix(m: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Mass-scaled Hessian W with rows grouped by body: index (i, a) -> i*d + a."""
    diff, dist = _pair_data(q)
    n, d = q.shape
    off = ~np.eye(n, dtype=bool)
    inv3 = np.zeros_like(dist)
    inv5 = np.zeros_like(dist)
    inv3[off] = dist[off] ** -3
    inv5[off] = dist[off] ** -5
    # per-pair d x d kernel: (3 u u^T - r^2 I) / r^5
    kern = 3.0 * inv5[:, :, None, None] * np.einsum("ija,ijb->ijab", diff, diff)
    kern -= inv3[:, :, None, None] * np.eye(d)[None, None, :, :]
    wij = -m[None, :, None, None] * kern
    diag = -wij.sum(axis=1)
    wij[np.arange(n), np.arange(n)] = diag
    return wij.transpose(0, 2, 1, 3).reshape(n * d, n * d)


@dataclass
class HessianW:
    """Mass-scaled Hessian of V at a configuration.

    ``matrix`` is (n*d, n*d) with flat index i*d + a for body i, axis a.  It is
    similar to a symmetric matrix through diag(sqrt(m)) when all masses are
    positive, so the spectrum is then real.
    """

    matrix: np.ndarray
    masses: MassVector
    config: Configuration

    def spectrum(self) -> np.ndarray:
        """Real-sorted eigenvalues; warns if signed masses yield complex ones."""
        if self.masses.all_positive():
            return np.sort(self._symmetric_eigh()[0])
        vals = np.linalg.eigvals(self.matrix)
        if np.max(np.abs(vals.imag)) > 1e-8 * max(1.0, np.max(np.abs(vals))):
            warnings.warn(
                "complex eigenvalues in mass-scaled Hessian spectrum",
                NonRealSpectrumWarning,
            )
        return np.sort(vals.real)

    def _symmetric_eigh(self):
        m = self.masses.values
        d = self.config.d
        s = np.repeat(np.sqrt(m), d)
        sym = self.matrix * (s[:, None] / s[None, :])
        sym = 0.5 * (sym + sym.T)
        vals, vecs = np.linalg.eigh(sym)
        return vals, vecs, s

    def eigenpairs(self):
        """Eigenvalues and right eigenvectors of W, mass-orthonormal.

        Columns x of the returned matrix satisfy W x = lambda x and
        sum_i m_i |x_i|^2 = 1, with the first nonzero component positive.
        Positive masses only.
        """
        if not self.masses.all_positive():
            raise ValueError("eigenpairs requires positive masses")
        vals, vecs, s = self._symmetric_eigh()
        x = vecs / s[:, None]
        for col in range(x.shape[1]):
            lead = np.flatnonzero(np.abs(x[:, col]) > 1e-12 * np.abs(x[:, col]).max())
            if lead.size and x[lead[0], col] < 0:
                x[:, col] = -x[:, col]
        return vals, x


def hessian_w(masses, coords) -> HessianW:
    """Mass-scaled Hessian W_(ia)(jb) = (1/m_i) d^2 V / dq_(ia) dq_(jb)."""
    mv = masses if isinstance(masses, MassVector) else MassVector(masses)
    cf = coords if isinstance(coords, Configuration) else Configuration(coords)
    return HessianW(_w_matrix(mv.values, cf.coords), mv, cf)


def _as_directions(n: int, d: int, vec) -> np.ndarray:
    x = np.asarray(vec, dtype=float)
    if x.shape == (n, d):
        return x
    if x.shape == (n * d,):
        return x.reshape(n, d)
    if d == 1 and x.shape == (n,):
        return x[:, None]
    raise ValueError(f"direction vector must have shape ({n},{d}) or ({n * d},)")


def third_contract(masses, coords, x, y, z) -> float:
    """Contraction D^3 V(q)[X, Y, Z] of the unscaled third derivative tensor.

    For each pair the 1/r kernel contributes
      -15 (u.x)(u.y)(u.z)/r^7 + 3[(u.x)(y.z)+(u.y)(x.z)+(u.z)(x.y)]/r^5
    with u the separation and x, y, z the per-pair direction differences.
    """
    m = as_mass_array(masses)
    q = as_coord_array(coords)
    n, d = q.shape
    X = _as_directions(n, d, x)
    Y = _as_directions(n, d, y)
    Z = _as_directions(n, d, z)
    diff, dist = _pair_data(q)
    iu = np.triu_indices(n, k=1)
    u = diff[iu]
    r = dist[iu]
    dx = (X[:, None, :] - X[None, :, :])[iu]
    dy = (Y[:, None, :] - Y[None, :, :])[iu]
    dz = (Z[:, None, :] - Z[None, :, :])[iu]
    ux = np.einsum("pk,pk->p", u, dx)
    uy = np.einsum("pk,pk->p", u, dy)
    uz = np.einsum("pk,pk->p", u, dz)
    xy = np.einsum("pk,pk->p", dx, dy)
    xz = np.einsum("pk,pk->p", dx, dz)
    yz = np.einsum("pk,pk->p", dy, dz)
    core = -15.0 * ux * uy * uz / r**7 + 3.0 * (ux * yz + uy * xz + uz * xy) / r**5
    return float(np.sum(m[iu[0]] * m[iu[1]] * core))
