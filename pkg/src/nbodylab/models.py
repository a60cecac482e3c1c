"""Restricted n-body models that integrate in closed form, plus a simulator.

Two constructions are covered.  The planar 5-body model pins a mass -1/4 at
the origin with four unit masses kept antisymmetric in pairs; an orthogonal
change of variables splits the restricted flow into two independent Kepler
problems.  The spatial n+3 model rides a regular polygon of unit masses with
a balancing central mass and a symmetric vertical pair of masses 4*alpha; on
its three-dimensional invariant subspace only one inter-cluster distance
survives and the flow is a central-force problem.

The simulator integrates Hamilton's equations for small chart Hamiltonians
(and for full n-body systems) with conservation diagnostics attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CollisionError, StepFailureError
from .potential import (
    Configuration,
    MassVector,
    acceleration,
    eval_potential,
    gradient,
)

__all__ = [
    "FIVE_BODY_MASSES",
    "restricted_potential_5body",
    "decouple_matrix",
    "decouple_5body",
    "central_mass_cancellation_check",
    "polygon_alpha",
    "polygon_configuration",
    "absolute_equilibrium_check",
    "n3_masses",
    "n3_configuration",
    "n3_effective_potential",
    "InvariantSubspace",
    "five_body_subspace",
    "n3_subspace",
    "colinear_subspace",
    "check_invariant_subspace",
    "NBodyChart",
    "PairedOrbitsChart",
    "CentralForceChart",
    "RotatedChart",
    "TrajectoryRecord",
    "simulate",
    "circular_orbit_state",
    "kepler_period",
    "conic_residual",
    "five_body_midpoints",
]

_SEPARATION_FLOOR = 1e-8

FIVE_BODY_MASSES = MassVector(np.array([-0.25, 1.0, 1.0, 1.0, 1.0]))

# pair strength of each decoupled Kepler subsystem of the 5-body chart
FIVE_BODY_KAPPA = 2.0 ** -0.5


def restricted_potential_5body(q4) -> float:
    """Potential of the 5-body model on its parallelogram chart.

    The chart is z = (q21, q22, q31, q32): positions of bodies 2 and 3, with
    bodies 4 and 5 at their antipodes and the -1/4 mass fixed at the origin.
    Only two mutual distances survive the cancellations; the full potential
    restricted to the subspace is exactly twice this chart value, and the
    unit-mass chart flow reproduces the restricted dynamics.
    """
    q21, q22, q31, q32 = np.asarray(q4, dtype=float)
    s1 = (q21 - q31) ** 2 + (q22 - q32) ** 2
    s2 = (q21 + q31) ** 2 + (q22 + q32) ** 2
    if min(s1, s2) <= _SEPARATION_FLOOR**2:
        raise CollisionError("chart point collapses a surviving distance")
    return s1**-0.5 + s2**-0.5


def _restricted_gradient_5body(q4):
    q21, q22, q31, q32 = q4
    s1 = (q21 - q31) ** 2 + (q22 - q32) ** 2
    s2 = (q21 + q31) ** 2 + (q22 + q32) ** 2
    if min(s1, s2) <= _SEPARATION_FLOOR**2:
        raise CollisionError("chart point collapses a surviving distance")
    f1 = -(s1 ** -1.5)
    f2 = -(s2 ** -1.5)
    return np.array([
        f1 * (q21 - q31) + f2 * (q21 + q31),
        f1 * (q22 - q32) + f2 * (q22 + q32),
        -f1 * (q21 - q31) + f2 * (q21 + q31),
        -f1 * (q22 - q32) + f2 * (q22 + q32),
    ])


def decouple_matrix() -> np.ndarray:
    """Orthogonal map splitting the 5-body chart into two Kepler planes."""
    s = 2.0 ** -0.5
    return np.array([
        [s, 0.0, -s, 0.0],
        [0.0, s, 0.0, -s],
        [s, 0.0, s, 0.0],
        [0.0, s, 0.0, s],
    ])


def decouple_5body(q4):
    """Split a chart point into the two decoupled Kepler plane positions."""
    y = decouple_matrix() @ np.asarray(q4, dtype=float)
    return y[:2].copy(), y[2:].copy()


def central_mass_cancellation_check(r: float) -> float:
    """|central repulsion - antipodal attraction| at distance r, identically 0.

    A mass -1/4 at the origin repels a unit mass at distance r with force
    (1/4)/r^2, which equals the pull of a unit mass at the antipode, distance
    2r: 1/(2r)^2.
    """
    if r <= 0:
        raise ValueError("distance must be positive")
    return abs(0.25 / r**2 - 1.0 / (2.0 * r) ** 2)


# ---------------------------------------------------------------------------
# polygon equilibria and the n+3 model


def polygon_alpha(n: int) -> float:
    """Central mass magnitude balancing a unit regular n-gon of unit masses.

    With this mass at the center the net force on every vertex vanishes
    (absolute equilibrium): the value is one quarter of the cosecant sum.
    """
    if n < 2:
        raise ValueError("polygon needs at least 2 vertices")
    return 0.25 * sum(1.0 / math.sin(k * math.pi / n) for k in range(1, n))


def _polygon_vertices(n: int) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(ang), np.sin(ang)])


def polygon_configuration(n: int):
    """Unit n-gon of unit masses plus the balancing central mass.

    Returns (masses, configuration) with the center listed last; the whole
    arrangement is an absolute equilibrium.
    """
    coords = np.vstack([_polygon_vertices(n), np.zeros((1, 2))])
    masses = MassVector(np.concatenate([np.ones(n), [-polygon_alpha(n)]]))
    return masses, Configuration(coords)


def absolute_equilibrium_check(masses, coords) -> float:
    """Max-norm of the potential gradient over all bodies."""
    return float(np.max(np.abs(gradient(masses, coords))))


def n3_masses(n: int) -> MassVector:
    """Masses (1,...,1, -alpha, 4 alpha, 4 alpha) of the spatial n+3 model."""
    a = polygon_alpha(n)
    return MassVector(np.concatenate([np.ones(n), [-a, 4.0 * a, 4.0 * a]]))


def n3_configuration(n: int, beta: float = 1.0, theta: float = 0.0,
                     height: float = 1.0) -> Configuration:
    """Point of the n+3 invariant subspace: scaled/rotated polygon + pair.

    Bodies 1..n sit on the polygon dilated by beta and rotated by theta, the
    balancing mass sits at the origin, and the two masses 4*alpha sit at
    (0, 0, +-height).
    """
    coords = np.zeros((n + 3, 3))
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    coords[:n, :2] = beta * (_polygon_vertices(n) @ rot.T)
    coords[n + 1, 2] = height
    coords[n + 2, 2] = -height
    return Configuration(coords)


def n3_effective_potential(n: int, state3) -> float:
    """Central-force potential of the n+3 model on its 3-dim subspace.

    The chart coordinates are (first vertex x, first vertex y, height of the
    upper pair body); every cluster-internal interaction cancels and the
    remaining 2n cross terms share the single distance |state3|.  Equals the
    full potential restricted to the subspace exactly (no additive constant).
    """
    s = np.asarray(state3, dtype=float)
    d = float(np.linalg.norm(s))
    if d <= _SEPARATION_FLOOR:
        raise CollisionError("chart point collapses the cluster distance")
    return 8.0 * n * polygon_alpha(n) / d


# ---------------------------------------------------------------------------
# invariant subspaces


@dataclass
class InvariantSubspace:
    """Linear subspace of a configuration space with its mass vector.

    ``basis`` is (n*d, k) with orthonormal columns; flattening is body-major
    (body i, axis a) -> i*d + a.
    """

    masses: MassVector
    d: int
    basis: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=float)
        gram = self.basis.T @ self.basis
        if np.max(np.abs(gram - np.eye(self.basis.shape[1]))) > 1e-12:
            raise ValueError("subspace basis is not orthonormal")

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    def point(self, coeffs) -> Configuration:
        flat = self.basis @ np.asarray(coeffs, dtype=float)
        return Configuration(flat.reshape(-1, self.d))


def five_body_subspace() -> InvariantSubspace:
    """Parallelogram subspace of the planar 5-body model (dimension 4)."""
    basis = np.zeros((10, 4))
    s = 2.0 ** -0.5
    for col, (body, axis) in enumerate(((1, 0), (1, 1), (2, 0), (2, 1))):
        basis[body * 2 + axis, col] = s
        basis[(body + 2) * 2 + axis, col] = -s
    return InvariantSubspace(FIVE_BODY_MASSES, 2, basis, "five-body parallelogram")


def n3_subspace(n: int) -> InvariantSubspace:
    """Polygon rotation-dilation plus vertical-pair subspace (dimension 3)."""
    verts = _polygon_vertices(n)
    dof = 3 * (n + 3)
    basis = np.zeros((dof, 3))
    for i in range(n):
        basis[3 * i + 0, 0] = verts[i, 0]
        basis[3 * i + 1, 0] = verts[i, 1]
        basis[3 * i + 0, 1] = -verts[i, 1]
        basis[3 * i + 1, 1] = verts[i, 0]
    basis[:, 0] /= math.sqrt(n)
    basis[:, 1] /= math.sqrt(n)
    basis[3 * (n + 1) + 2, 2] = 2.0 ** -0.5
    basis[3 * (n + 2) + 2, 2] = -(2.0 ** -0.5)
    return InvariantSubspace(n3_masses(n), 3, basis, f"{n}+3 polygon-and-pair")


def colinear_subspace(masses) -> InvariantSubspace:
    """Axis subspace of a planar problem (all second coordinates zero)."""
    mv = masses if isinstance(masses, MassVector) else MassVector(masses)
    basis = np.zeros((2 * mv.n, mv.n))
    for i in range(mv.n):
        basis[2 * i, i] = 1.0
    return InvariantSubspace(mv, 2, basis, "colinear axis")


def check_invariant_subspace(sub: InvariantSubspace, samples: int = 50,
                             seed: int = 0, min_separation: float = 0.1) -> dict:
    """Max leakage of the acceleration field out of the subspace.

    Random points in the span are drawn with a rejection rule keeping all
    bodies at least min_separation apart; at each the acceleration vector is
    projected off the span and its relative norm recorded.
    """
    rng = np.random.default_rng(seed)
    b = sub.basis
    k = b.shape[1]
    leakages = []
    rejected = 0
    while len(leakages) < samples:
        coeffs = rng.normal(size=k) * rng.uniform(0.5, 2.0)
        cfg = sub.point(coeffs)
        diff = cfg.coords[:, None, :] - cfg.coords[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=-1))
        np.fill_diagonal(dist, np.inf)
        if dist.min() < min_separation:
            rejected += 1
            if rejected > 100 * samples:
                raise RuntimeError("rejection sampling stalled")
            continue
        acc = acceleration(sub.masses, cfg).reshape(-1)
        norm = np.linalg.norm(acc)
        leak = np.linalg.norm(acc - b @ (b.T @ acc)) / max(norm, 1e-300)
        leakages.append(float(leak))
    return {
        "label": sub.label,
        "samples": len(leakages),
        "rejected": rejected,
        "max_leakage": max(leakages),
        "leakages": leakages,
    }


# ---------------------------------------------------------------------------
# chart Hamiltonians


class NBodyChart:
    """Full n-body system in d dimensions as a chart Hamiltonian."""

    def __init__(self, masses, d: int):
        self.masses = masses if isinstance(masses, MassVector) else MassVector(masses)
        self.d = d
        self.dof = self.masses.n * d
        self.dof_masses = np.repeat(self.masses.values, d)
        self.name = f"{self.masses.n}-body d={d}"

    def _config(self, q):
        return Configuration(np.asarray(q, dtype=float).reshape(-1, self.d))

    def potential(self, q) -> float:
        return eval_potential(self.masses, self._config(q))

    def gradient(self, q) -> np.ndarray:
        return gradient(self.masses, self._config(q)).reshape(-1)

    def min_separation(self, q) -> float:
        c = self._config(q).coords
        diff = c[:, None, :] - c[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=-1))
        np.fill_diagonal(dist, np.inf)
        return float(dist.min())

    def integrals(self, q, p) -> dict:
        c = np.asarray(q, dtype=float).reshape(-1, self.d)
        mom = np.asarray(p, dtype=float).reshape(-1, self.d)
        out = {"energy": float((p**2 / (2.0 * self.dof_masses)).sum()
                               - self.potential(q))}
        for a in range(self.d):
            out[f"momentum_{'xyz'[a]}"] = float(mom[:, a].sum())
        if self.d == 2:
            out["angular_momentum"] = float(
                (c[:, 0] * mom[:, 1] - c[:, 1] * mom[:, 0]).sum())
        elif self.d == 3:
            ell = np.cross(c, mom).sum(axis=0)
            for a in range(3):
                out[f"angular_momentum_{'xyz'[a]}"] = float(ell[a])
        return out


class PairedOrbitsChart:
    """5-body parallelogram chart: two decoupled Kepler problems.

    State is z = (q21, q22, q31, q32) with unit chart masses; the integrals
    are the two decoupled plane energies and angular momenta.
    """

    dof = 4
    name = "five-body paired orbits"

    def __init__(self):
        self.dof_masses = np.ones(4)
        self._mix = decouple_matrix()

    def potential(self, q) -> float:
        return restricted_potential_5body(q)

    def gradient(self, q) -> np.ndarray:
        return _restricted_gradient_5body(np.asarray(q, dtype=float))

    def min_separation(self, q) -> float:
        y1, y2 = decouple_5body(q)
        return math.sqrt(2.0) * min(np.linalg.norm(y1), np.linalg.norm(y2))

    def integrals(self, q, p) -> dict:
        y = self._mix @ np.asarray(q, dtype=float)
        w = self._mix @ np.asarray(p, dtype=float)
        r1 = np.linalg.norm(y[:2])
        r2 = np.linalg.norm(y[2:])
        e1 = 0.5 * (w[0] ** 2 + w[1] ** 2) - FIVE_BODY_KAPPA / r1
        e2 = 0.5 * (w[2] ** 2 + w[3] ** 2) - FIVE_BODY_KAPPA / r2
        return {
            "pair_energy_1": float(e1),
            "pair_energy_2": float(e2),
            "pair_angular_momentum_1": float(y[0] * w[1] - y[1] * w[0]),
            "pair_angular_momentum_2": float(y[2] * w[3] - y[3] * w[2]),
            "energy": float(e1 + e2),
        }


class CentralForceChart:
    """Single particle, unit mass, potential kappa/|q|."""

    def __init__(self, kappa: float, dof: int = 3, name: str = "central force"):
        self.kappa = float(kappa)
        self.dof = dof
        self.dof_masses = np.ones(dof)
        self.name = name

    def potential(self, q) -> float:
        r = float(np.linalg.norm(q))
        if r <= _SEPARATION_FLOOR:
            raise CollisionError("central-force chart at the origin")
        return self.kappa / r

    def gradient(self, q) -> np.ndarray:
        qa = np.asarray(q, dtype=float)
        r = float(np.linalg.norm(qa))
        if r <= _SEPARATION_FLOOR:
            raise CollisionError("central-force chart at the origin")
        return -self.kappa * qa / r**3

    def min_separation(self, q) -> float:
        return float(np.linalg.norm(q))

    def integrals(self, q, p) -> dict:
        qa = np.asarray(q, dtype=float)
        pa = np.asarray(p, dtype=float)
        out = {"energy": float(0.5 * (pa**2).sum() - self.potential(q))}
        if self.dof == 2:
            out["angular_momentum"] = float(qa[0] * pa[1] - qa[1] * pa[0])
        elif self.dof == 3:
            ell = np.cross(qa, pa)
            for a in range(3):
                out[f"angular_momentum_{'xyz'[a]}"] = float(ell[a])
        return out


class RotatedChart:
    """Chart seen through an orthogonal change of variables q -> R q."""

    def __init__(self, inner, rot):
        rot = np.asarray(rot, dtype=float)
        if np.max(np.abs(rot @ rot.T - np.eye(rot.shape[0]))) > 1e-12:
            raise ValueError("rotation matrix is not orthogonal")
        if not np.allclose(inner.dof_masses, inner.dof_masses[0]):
            raise ValueError("orthogonal carrier needs equal chart masses")
        self.inner = inner
        self.rot = rot
        self.dof = inner.dof
        self.dof_masses = inner.dof_masses
        self.name = f"{inner.name} (rotated)"

    def potential(self, q):
        return self.inner.potential(self.rot @ np.asarray(q, dtype=float))

    def gradient(self, q):
        return self.rot.T @ self.inner.gradient(self.rot @ np.asarray(q, dtype=float))

    def min_separation(self, q):
        return self.inner.min_separation(self.rot @ np.asarray(q, dtype=float))

    def integrals(self, q, p):
        qa = self.rot @ np.asarray(q, dtype=float)
        pa = self.rot @ np.asarray(p, dtype=float)
        return self.inner.integrals(qa, pa)


# ---------------------------------------------------------------------------
# simulation


@dataclass
class TrajectoryRecord:
    """Sampled Hamiltonian trajectory with conservation diagnostics.

    ``states`` stacks positions then momenta per row; ``drift`` maps each
    declared integral to max |I(t) - I(0)| / |I(0)| (absolute when I(0) is
    numerically zero).
    """

    chart_name: str
    times: np.ndarray
    states: np.ndarray
    integral_names: list
    integral_series: np.ndarray
    drift: dict = field(init=False)
    rhs_evaluations: int = 0

    def __post_init__(self):
        ref = self.integral_series[0]
        dev = np.max(np.abs(self.integral_series - ref[None, :]), axis=0)
        scale = np.where(np.abs(ref) > 1e-12, np.abs(ref), 1.0)
        self.drift = {
            name: float(dev[i] / scale[i]) for i, name in enumerate(self.integral_names)
        }

    def positions(self) -> np.ndarray:
        return self.states[:, : self.states.shape[1] // 2]

    def momenta(self) -> np.ndarray:
        return self.states[:, self.states.shape[1] // 2:]


def simulate(chart, q0, p0, t_end: float, rtol: float = 1e-12,
             atol: float = 1e-13, samples: int = 2001) -> TrajectoryRecord:
    """Integrate Hamilton's equations on a chart with an 8th-order scheme.

    Adaptive embedded Runge-Kutta of order 8 with tight tolerances keeps the
    declared first integrals near machine accuracy; a separation floor inside
    the right-hand side converts near-collisions into StepFailureError.
    """
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if q0.shape != (chart.dof,) or p0.shape != (chart.dof,):
        raise ValueError(f"state must have {chart.dof} positions and momenta")
    if chart.min_separation(q0) <= _SEPARATION_FLOOR:
        raise CollisionError("initial state below the separation floor")
    nev = [0]

    def rhs(_t, state):
        nev[0] += 1
        q, p = state[: chart.dof], state[chart.dof:]
        if chart.min_separation(q) <= _SEPARATION_FLOOR:
            raise StepFailureError("separation floor reached during a step")
        return np.concatenate([p / chart.dof_masses, chart.gradient(q)])

    sol = solve_ivp(
        rhs,
        (0.0, float(t_end)),
        np.concatenate([q0, p0]),
        method="DOP853",
        t_eval=np.linspace(0.0, float(t_end), samples),
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StepFailureError(f"integrator stopped: {sol.message}")
    states = sol.y.T
    names = list(chart.integrals(q0, p0).keys())
    series = np.empty((states.shape[0], len(names)))
    for i, row in enumerate(states):
        vals = chart.integrals(row[: chart.dof], row[chart.dof:])
        series[i] = [vals[name] for name in names]
    return TrajectoryRecord(chart.name, sol.t, states, names, series, nev[0])


def circular_orbit_state(kappa: float, radius: float, mass: float = 1.0):
    """Planar circular orbit of the -kappa/r Hamiltonian: (q2, p2, period)."""
    speed = math.sqrt(kappa / (mass * radius))
    q = np.array([radius, 0.0])
    p = np.array([0.0, mass * speed])
    return q, p, kepler_period(kappa, radius, mass)


def kepler_period(kappa: float, semi_major: float, mass: float = 1.0) -> float:
    return 2.0 * math.pi * math.sqrt(mass * semi_major**3 / kappa)


def conic_residual(points) -> float:
    """Normalized residual of a focal-conic fit 1/r = A + B cos + C sin.

    Least squares over the sampled planar points with the focus at the
    origin; the max deviation is scaled by the mean inverse radius.  Kepler
    arcs fit to integrator accuracy, anything else does not.
    """
    pts = np.asarray(points, dtype=float)
    r = np.sqrt((pts**2).sum(axis=1))
    if np.min(r) <= _SEPARATION_FLOOR:
        raise CollisionError("conic sample at the focus")
    u = 1.0 / r
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    design = np.column_stack([np.ones_like(u), np.cos(theta), np.sin(theta)])
    coef, *_ = np.linalg.lstsq(design, u, rcond=None)
    resid = np.abs(design @ coef - u)
    return float(resid.max() / u.mean())


def five_body_midpoints(record: TrajectoryRecord):
    """Side-center trajectories of the parallelogram, one per Kepler plane."""
    mix = decouple_matrix()
    y = record.positions() @ mix.T
    s = 2.0 ** -0.5
    return s * y[:, :2], s * y[:, 2:]
