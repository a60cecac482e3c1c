"""Trace bound and eigenvalue-pair elimination for the colinear 4-body problem.

The configuration is gauged as (-rho1, -1, 1, rho2) with rho1 >= rho2 > 1.
At each shape the central-configuration equations leave a one-parameter affine
family of (possibly signed) masses, and the trace of the mass-scaled Hessian
is affine along it, so its maximum over the positive-mass segment is attained
where one mass vanishes.  A dense sweep of those boundary values yields the
numerical bound trace < 70, which caps the candidate eigenvalue pairs at 26;
determinant matching (Z0) and third-derivative contractions (Z1..Z4) then
eliminate all but the survivors.

Sweeps here are numerical evidence on a finite grid, not certified bounds;
every exported summary carries that caveat.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .admissibility import admissible_values, odd_family_predicate
from .central import mass_line_4body, solve_masses_4body
from .errors import EmptyFeasibleSetError, InvalidKError, RankDeficiencyError
from .potential import Configuration, MassVector, hessian_w, third_contract

__all__ = [
    "SWEEP_CAVEAT",
    "PAIR_EIGENVALUES",
    "ORDER2_CONDITION_COUNTS",
    "TraceSweepResult",
    "PairCandidate",
    "trace_4body",
    "boundary_maxima",
    "feasible_mass_interval",
    "trace_sweep",
    "enumerate_pairs",
    "pair_feasibility",
    "order2_exclusion_4body",
    "condition_count",
    "classify_pairs",
]

SWEEP_CAVEAT = (
    "numerical evidence from a finite grid sweep, not a certified bound"
)

# admissible eigenvalues > 2 that can appear in a pair with sum < 68
PAIR_EIGENVALUES = (5, 9, 14, 20, 27, 35, 44, 54)

# vanishing third-derivative conditions imposed at second order on each pair
# that survives the determinant elimination
ORDER2_CONDITION_COUNTS = {
    (5, 5): 4, (5, 14): 4, (5, 27): 4, (14, 44): 4,
    (5, 20): 3, (5, 35): 3, (5, 44): 3, (5, 54): 3,
    (5, 9): 2, (9, 27): 2, (9, 44): 2,
    (9, 35): 1, (9, 54): 1,
    (9, 20): 0,
}

_POSITIVITY_TOL = 1e-12


def _positions(rho1, rho2):
    r1 = np.atleast_1d(np.asarray(rho1, dtype=float))
    r2 = np.atleast_1d(np.asarray(rho2, dtype=float))
    pos = np.empty(r1.shape + (4,))
    pos[..., 0] = -r1
    pos[..., 1] = -1.0
    pos[..., 2] = 1.0
    pos[..., 3] = r2
    return pos


def _line_batch(rho1, rho2):
    """Mass lines with multiplier -1 at the literal configurations.

    Solves, for every shape in the batch, the 5x5 system in (m, center) with
    gauge m3 = t; returns (positions, m0, dm, tr0, dtr) where masses are
    m0 + t*dm and the Hessian trace is tr0 + t*dtr.
    """
    pos = _positions(rho1, rho2)
    n = pos.shape[0]
    diff = pos[:, None, :] - pos[:, :, None]        # [cell, i, j] = c_j - c_i
    dist = np.abs(diff)
    off = ~np.eye(4, dtype=bool)
    inv3 = np.zeros_like(dist)
    inv3[:, off] = dist[:, off] ** -3

    a = np.zeros((n, 5, 5))
    a[:, :4, :4] = diff * inv3
    a[:, :4, 4] = 1.0
    a[:, 4, 2] = 1.0
    rhs = np.zeros((n, 5, 2))
    rhs[:, :4, 0] = -pos
    rhs[:, 4, 1] = 1.0
    sol = np.linalg.solve(a, rhs)
    m0, dm = sol[:, :4, 0], sol[:, :4, 1]

    pair_inv3 = 2.0 * inv3
    tr0 = np.einsum("nij,nj->n", pair_inv3, m0)
    dtr = np.einsum("nij,nj->n", pair_inv3, dm)
    return pos, m0, dm, tr0, dtr


def _w_batch(pos, masses):
    """1D mass-scaled Hessians, one 4x4 matrix per batch entry."""
    diff = pos[:, None, :] - pos[:, :, None]
    dist = np.abs(diff)
    off = ~np.eye(4, dtype=bool)
    inv3 = np.zeros_like(dist)
    inv3[:, off] = dist[:, off] ** -3
    w = -2.0 * masses[:, None, :] * inv3
    idx = np.arange(4)
    w[:, idx, idx] = -w.sum(axis=2)
    return w


def _third_invariant(w):
    """Sum of 3x3 principal minors from power traces."""
    p1 = np.trace(w, axis1=1, axis2=2)
    p2 = np.einsum("nij,nji->n", w, w)
    p3 = np.einsum("nij,njk,nki->n", w, w, w)
    return (p1**3 - 3.0 * p1 * p2 + 2.0 * p3) / 6.0


def trace_4body(rho1: float, rho2: float, m3: float) -> float:
    """Trace of the mass-scaled Hessian at the 4-body cc, multiplier -1.

    The masses come from the normalized affine family (total 1) at the shape
    (-rho1, -1, 1, rho2); the configuration is rescaled so the multiplier is
    exactly -1.  Affine in m3 for rho1 > rho2 and constant in m3 on the
    symmetric locus rho1 = rho2.
    """
    line = mass_line_4body(rho1, rho2)
    masses = line.masses(m3)
    alpha = line.multiplier(m3)
    if alpha >= 0:
        raise RankDeficiencyError(f"nonnegative multiplier {alpha} at ({rho1}, {rho2})")
    gamma = (-alpha) ** (1.0 / 3.0)
    center = masses.values @ _positions(rho1, rho2)[0] / masses.total
    scaled = gamma * (_positions(rho1, rho2)[0] - center)
    w = hessian_w(masses, Configuration(scaled))
    return float(np.trace(w.matrix))


def feasible_mass_interval(rho1: float, rho2: float):
    """Open m3 interval where all four normalized line masses are positive.

    Same total-mass-1 parametrization as trace_4body and solve_masses_4body,
    so traces at the interval endpoints land on the boundary_maxima values.
    """
    line = mass_line_4body(rho1, rho2)
    lo, hi = _interval(line.intercept, line.slope)
    if lo >= hi:
        raise EmptyFeasibleSetError(
            f"no positive-mass m3 at shape ({rho1}, {rho2})"
        )
    return float(lo), float(hi)


def _interval(m0, dm):
    lo, hi = -np.inf, np.inf
    for a, b in zip(m0, dm):
        if b > _POSITIVITY_TOL:
            lo = max(lo, -a / b)
        elif b < -_POSITIVITY_TOL:
            hi = min(hi, -a / b)
        elif a <= 0.0:
            return np.inf, -np.inf
    return lo, hi


def boundary_maxima(rho1: float, rho2: float):
    """Trace values M1..M4 at the m3 roots where each line mass vanishes.

    Raises EmptyFeasibleSetError when no m3 makes all masses positive; the
    M_i themselves are defined from the affine family regardless of the sign
    of the remaining masses at each root.
    """
    _, m0, dm, tr0, dtr = _line_batch([rho1], [rho2])
    m0, dm, tr0, dtr = m0[0], dm[0], tr0[0], dtr[0]
    lo, hi = _interval(m0, dm)
    if lo >= hi:
        raise EmptyFeasibleSetError(
            f"no positive-mass m3 at shape ({rho1}, {rho2})"
        )
    out = []
    for i in range(4):
        if abs(dm[i]) <= _POSITIVITY_TOL:
            out.append(math.nan)
        else:
            out.append(float(tr0 + (-m0[i] / dm[i]) * dtr))
    return tuple(out)


# ---------------------------------------------------------------------------
# trace sweep


@dataclass
class TraceSweepResult:
    """Grid sweep of the boundary trace maxima.

    ``rows`` holds one entry per feasible cell: (rho1, rho2, which_boundary,
    m3_at_max, trace_max) with m3 reported in the normalized (total-mass-1)
    parametrization so trace_4body reproduces trace_max.  ``caveat`` states
    that the sweep is numerical evidence only.
    """

    rho_max: float
    cells: int
    global_max: float
    argmax: tuple  # (rho1, rho2, m3_normalized, which_boundary)
    rows: list
    violations: list
    empty_cells: int
    refined: bool
    caveat: str = SWEEP_CAVEAT


def _sweep_chunk(args):
    r1, r2 = args
    pos, m0, dm, tr0, dtr = _line_batch(r1, r2)
    n = r1.size
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    lo_idx = np.full(n, -1)
    hi_idx = np.full(n, -1)
    for i in range(4):
        b = dm[:, i]
        root = np.where(np.abs(b) > _POSITIVITY_TOL, -m0[:, i] / np.where(
            np.abs(b) > _POSITIVITY_TOL, b, 1.0), np.nan)
        up = b > _POSITIVITY_TOL
        take = up & (root > lo)
        lo = np.where(take, root, lo)
        lo_idx = np.where(take, i, lo_idx)
        down = b < -_POSITIVITY_TOL
        take = down & (root < hi)
        hi = np.where(take, root, hi)
        hi_idx = np.where(take, i, hi_idx)
        flat = (~up) & (~down) & (m0[:, i] <= 0.0)
        lo = np.where(flat, np.inf, lo)
    feasible = (lo < hi) & np.isfinite(lo) & np.isfinite(hi)
    lo_s = np.where(feasible, lo, 0.0)
    hi_s = np.where(feasible, hi, 0.0)
    tr_lo = np.where(feasible, tr0 + lo_s * dtr, -np.inf)
    tr_hi = np.where(feasible, tr0 + hi_s * dtr, -np.inf)
    pick_hi = tr_hi >= tr_lo
    best = np.where(pick_hi, tr_hi, tr_lo)
    bt = np.where(pick_hi, hi_s, lo_s)
    bwhich = np.where(pick_hi, hi_idx, lo_idx)
    # normalized third mass at the chosen endpoint, for trace_4body round trips
    mass_at = m0 + bt[:, None] * dm
    total = mass_at.sum(axis=1)
    m3_norm = np.where(np.abs(total) > 1e-300, mass_at[:, 2] / total, np.nan)
    return r1, r2, feasible, best, m3_norm, bwhich + 1


def _grid_axes(rho_max, cells):
    step = (rho_max - 1.0) / cells
    return 1.0 + step * np.arange(1, cells + 1)


def trace_sweep(rho_max: float = 20.0, cells: int = 400, jobs: int | None = None,
                refine: bool = True, keep_rows: bool = True) -> TraceSweepResult:
    """Sweep boundary trace maxima over the grid (1, rho_max]^2, rho1 >= rho2."""
    axis = _grid_axes(rho_max, cells)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    mask = g1 >= g2
    r1 = g1[mask]
    r2 = g2[mask]

    chunk = 20_000
    pieces = [(r1[i:i + chunk], r2[i:i + chunk]) for i in range(0, r1.size, chunk)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_chunk, pieces))
    else:
        results = [_sweep_chunk(p) for p in pieces]

    rows = []
    violations = []
    empty = 0
    gmax = -np.inf
    argmax = (math.nan,) * 4
    for cr1, cr2, feas, best, m3n, which in results:
        empty += int((~feas).sum())
        idx = np.flatnonzero(feas)
        for j in idx:
            row = (float(cr1[j]), float(cr2[j]), int(which[j]),
                   float(m3n[j]), float(best[j]))
            if keep_rows:
                rows.append(row)
            if best[j] >= 70.0:
                violations.append(row)
            if best[j] > gmax:
                gmax = float(best[j])
                argmax = (row[0], row[1], row[3], row[2])

    refined = False
    if refine and np.isfinite(gmax):
        refined = True
        span = (rho_max - 1.0) / cells
        c1, c2 = argmax[0], argmax[1]
        for _ in range(3):
            a1 = np.clip(np.linspace(c1 - span, c1 + span, 25), 1.0 + 1e-9, rho_max)
            a2 = np.clip(np.linspace(c2 - span, c2 + span, 25), 1.0 + 1e-9, rho_max)
            l1, l2 = np.meshgrid(a1, a2, indexing="ij")
            keep = l1 >= l2
            cr1, cr2, feas, best, m3n, which = _sweep_chunk((l1[keep], l2[keep]))
            if feas.any():
                j = int(np.argmax(np.where(feas, best, -np.inf)))
                if best[j] > gmax:
                    gmax = float(best[j])
                    argmax = (float(cr1[j]), float(cr2[j]), float(m3n[j]), int(which[j]))
                    c1, c2 = argmax[0], argmax[1]
            span /= 12.0

    return TraceSweepResult(rho_max, cells, gmax, argmax, rows, violations,
                            empty, refined)


# ---------------------------------------------------------------------------
# eigenvalue pair pipeline


@dataclass
class PairCandidate:
    """One unordered eigenvalue pair with pipeline status and evidence."""

    pair: tuple
    status: str = "enumerated"
    evidence: dict = field(default_factory=dict)

    @property
    def eigenvalue_sum(self) -> int:
        return self.pair[0] + self.pair[1]


def enumerate_pairs() -> list[PairCandidate]:
    """All unordered admissible pairs > 2 with eigenvalue sum below 68."""
    vals = [v for v in admissible_values(68.0) if 2 < v and v + 5 < 68]
    assert tuple(vals) == PAIR_EIGENVALUES
    out = []
    for i, a in enumerate(vals):
        for b in vals[i:]:
            if a + b < 68:
                out.append(PairCandidate((a, b)))
    return out


def _pair_key(pair) -> tuple:
    a, b = sorted(int(v) for v in pair)
    if (a, b) not in {c.pair for c in enumerate_pairs()}:
        raise InvalidKError(f"{{{a},{b}}} is not an enumerated eigenvalue pair")
    return a, b


def _z0_grid(pair, rho_max, cells):
    """Z0 over the strict rho1 > rho2 grid, with the trace matched in m3."""
    lam1, lam2 = pair
    axis = _grid_axes(rho_max, cells)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    mask = g1 > g2
    r1, r2 = g1[mask], g2[mask]
    z0 = np.full(r1.shape, np.nan)
    chunk = 20_000
    for i in range(0, r1.size, chunk):
        s = slice(i, i + chunk)
        z0[s] = _z0_points(pair, r1[s], r2[s])
    return r1, r2, z0, g1, g2, mask


def _z0_points(pair, r1, r2):
    lam1, lam2 = pair
    pos, m0, dm, tr0, dtr = _line_batch(r1, r2)
    target = 2.0 + lam1 + lam2
    t = (target - tr0) / dtr
    masses = m0 + t[:, None] * dm
    w = _w_batch(pos, masses)
    return _third_invariant(w) / 2.0 - lam1 * lam2


def _bisect_zero(pair, p, q, iters=60):
    """Refine a sign change of Z0 along the segment p -> q; None on a pole."""
    fp = float(_z0_points(pair, np.array([p[0]]), np.array([p[1]]))[0])
    fq = float(_z0_points(pair, np.array([q[0]]), np.array([q[1]]))[0])
    if not (np.isfinite(fp) and np.isfinite(fq)) or fp * fq > 0:
        return None
    scale = min(abs(fp), abs(fq))
    for _ in range(iters):
        mid = (0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]))
        fm = float(_z0_points(pair, np.array([mid[0]]), np.array([mid[1]]))[0])
        if not np.isfinite(fm):
            return None
        if fp * fm <= 0:
            q, fq = mid, fm
        else:
            p, fp = mid, fm
    mid = (0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]))
    fm = float(_z0_points(pair, np.array([mid[0]]), np.array([mid[1]]))[0])
    # a genuine zero shrinks |Z0| below the bracket scale; a pole grows
    if abs(fm) < max(1e-6, 1e-3 * scale):
        return mid
    return None


def _grid_sign_changes(r_all, z_all, mask):
    """Index pairs of horizontally/vertically adjacent cells with a sign flip."""
    z = np.full(mask.shape, np.nan)
    z[mask] = z_all
    flips = []
    sign = np.sign(z)
    flip = (sign[:-1, :] * sign[1:, :]) < 0
    for i, j in zip(*np.nonzero(flip)):
        flips.append(((i, j), (i + 1, j)))
    flip = (sign[:, :-1] * sign[:, 1:]) < 0
    for i, j in zip(*np.nonzero(flip)):
        flips.append(((i, j), (i, j + 1)))
    return flips, z


def pair_feasibility(pair, symmetric: bool = False, rho_max: float = 20.0,
                     cells: int = 240) -> PairCandidate:
    """Search for shapes whose nontrivial Hessian eigenvalues match the pair.

    Non-symmetric mode scans rho1 > rho2 > 1 without mass positivity (the
    trace equation is solved in closed form from the affine family, then the
    determinant condition Z0 = 0 is located by sign change + bisection).
    Symmetric mode scans the rho1 = rho2 locus, where the trace pins the
    shape, the third invariant pins m3, and all masses must come out positive.
    """
    key = _pair_key(pair)
    cand = PairCandidate(key)
    if symmetric:
        return _symmetric_feasibility(cand, rho_max)

    r1, r2, z0, g1, g2, mask = _z0_grid(key, rho_max, cells)
    finite = np.isfinite(z0)
    flips, zfull = _grid_sign_changes(r1, z0, mask)
    hits = []
    for (i1, j1), (i2, j2) in flips:
        p = (g1[i1, j1], g2[i1, j1])
        q = (g1[i2, j2], g2[i2, j2])
        hit = _bisect_zero(key, p, q)
        if hit is not None:
            hits.append(hit)
            if len(hits) >= 8:
                break
    cand.evidence = {
        "mode": "nonsymmetric",
        "grid_cells": int(finite.sum()),
        "sign_changes": len(flips),
        "zeros_confirmed": len(hits),
        "min_abs_z0": float(np.nanmin(np.abs(z0))) if finite.any() else math.nan,
        "zero_samples": [tuple(map(float, h)) for h in hits[:4]],
        "caveat": SWEEP_CAVEAT,
    }
    cand.status = "feasible" if hits else "excluded-by-Z0"
    return cand


def _symmetric_trace_root(target, rho_max):
    """Solve trace(rho) = target on the symmetric locus by bisection."""
    lo, hi = 1.0 + 1e-6, rho_max

    def f(rho):
        _, m0, dm, tr0, dtr = _line_batch([rho], [rho])
        return tr0[0] - target

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _z0_cubic_roots(pos, m0, dm, prod):
    """Real roots in t of Z0(t), an exact cubic along the mass line."""
    ts = np.arange(4.0)
    masses = m0[None, :] + ts[:, None] * dm[None, :]
    w = _w_batch(np.repeat(pos[None, :], 4, axis=0), masses)
    z = _third_invariant(w) / 2.0 - prod
    coeffs = np.linalg.solve(np.vander(ts, increasing=True), z)  # ascending
    c = coeffs[::-1]
    scale = np.max(np.abs(c))
    c = c[np.argmax(np.abs(c) > 1e-14 * scale):]
    if c.size <= 1:
        return np.array([])
    roots = np.roots(c)
    real = roots[np.abs(roots.imag) <= 1e-9 * (1.0 + np.abs(roots))].real
    # polish with two Newton steps on the exact cubic
    for _ in range(2):
        val = np.polyval(coeffs[::-1], real)
        der = np.polyval(np.polyder(coeffs[::-1]), real)
        real = real - val / np.where(np.abs(der) > 1e-300, der, 1.0)
    return np.sort(real)


def _symmetric_feasibility(cand, rho_max):
    lam1, lam2 = cand.pair
    rho = _symmetric_trace_root(2.0 + lam1 + lam2, rho_max)
    solutions = []
    if rho is not None:
        pos, m0, dm, tr0, dtr = _line_batch([rho], [rho])
        for t_root in _z0_cubic_roots(pos[0], m0[0], dm[0], lam1 * lam2):
            if np.all(m0[0] + t_root * dm[0] > 0):
                solutions.append((float(rho), float(t_root)))
    cand.evidence = {
        "mode": "symmetric",
        "trace_root_rho": None if rho is None else float(rho),
        "positive_mass_solutions": solutions,
        "caveat": SWEEP_CAVEAT,
    }
    cand.status = "feasible" if solutions else "excluded-by-Z0"
    return cand


# ---------------------------------------------------------------------------
# second-order exclusion on the invariant plane


def _plane_basis(rho1, rho2):
    w1 = np.array([2.0, -1.0 - rho1, rho1 - 1.0, 0.0])
    w2 = np.array([0.0, rho2 - 1.0, -1.0 - rho2, 2.0])
    return w1 / np.linalg.norm(w1), w2 / np.linalg.norm(w2)


def _plane_contractions(rho1, rho2, masses):
    w1, w2 = _plane_basis(rho1, rho2)
    mv = MassVector(masses)
    cf = Configuration(_positions([rho1], [rho2])[0][:, None])
    return tuple(
        third_contract(mv, cf, x, y, z)
        for x, y, z in ((w1, w1, w1), (w1, w1, w2), (w1, w2, w2), (w2, w2, w2))
    )


def _mass_at_trace(pair, rho1, rho2):
    lam1, lam2 = pair
    pos, m0, dm, tr0, dtr = _line_batch([rho1], [rho2])
    t = (2.0 + lam1 + lam2 - tr0[0]) / dtr[0]
    return m0[0] + t * dm[0]


def order2_exclusion_4body(pair, rho_max: float = 20.0, cells: int = 240,
                           threshold: float = 1e-3) -> PairCandidate:
    """Evaluate the four plane contractions along the determinant locus.

    Requires the pair to sit in the eigenvalue family b(2b+3) with the span
    condition, so that vanishing of all contractions on the invariant plane
    is necessary for integrability.  Reports "order2-excluded" when the
    contraction system stays bounded away from zero on the entire sampled
    locus (both the strict rho1 > rho2 branch and the symmetric one).
    """
    key = _pair_key(pair)
    if not odd_family_predicate(key):
        raise InvalidKError(
            f"{{{key[0]},{key[1]}}} is outside the eigenvalue family handled here"
        )
    cand = PairCandidate(key)
    lam1, lam2 = key

    # non-symmetric branch: walk the Z0 = 0 locus column by column
    r1, r2, z0, g1, g2, mask = _z0_grid(key, rho_max, cells)
    flips, _ = _grid_sign_changes(r1, z0, mask)
    locus = []
    for (i1, j1), (i2, j2) in flips:
        hit = _bisect_zero(key, (g1[i1, j1], g2[i1, j1]), (g1[i2, j2], g2[i2, j2]))
        if hit is not None:
            locus.append(hit)
    nonsym_min = math.inf
    for rho1, rho2 in locus:
        masses = _mass_at_trace(key, rho1, rho2)
        zs = _plane_contractions(rho1, rho2, masses)
        nonsym_min = min(nonsym_min, max(abs(z) for z in zs))

    # symmetric branch: trace pins rho, Z0 pins m3, m3 > 0 required
    sym_points = []
    sym_min = math.inf
    rho = _symmetric_trace_root(2.0 + lam1 + lam2, rho_max)
    if rho is not None:
        pos, m0, dm, tr0, dtr = _line_batch([rho], [rho])
        for t_root in _z0_cubic_roots(pos[0], m0[0], dm[0], lam1 * lam2):
            if t_root <= 0:
                continue
            sym_points.append((float(rho), float(t_root)))
            masses = m0[0] + t_root * dm[0]
            zs = _plane_contractions(rho, rho, masses)
            sym_min = min(sym_min, max(abs(z) for z in zs))

    worst = min(nonsym_min, sym_min)
    cand.evidence = {
        "nonsym_locus_points": len(locus),
        "nonsym_min_max_contraction": None if math.isinf(nonsym_min) else nonsym_min,
        "sym_solutions": sym_points,
        "sym_min_max_contraction": None if math.isinf(sym_min) else sym_min,
        "threshold": threshold,
        "caveat": SWEEP_CAVEAT,
    }
    cand.status = "order2-excluded" if worst > threshold else "feasible"
    return cand


def condition_count(pair) -> int:
    """Second-order condition count for a pair surviving the Z0 elimination."""
    key = _pair_key(pair)
    if key not in ORDER2_CONDITION_COUNTS:
        raise InvalidKError(
            f"{{{key[0]},{key[1]}}} was already eliminated by the determinant step"
        )
    return ORDER2_CONDITION_COUNTS[key]


def classify_pairs(rho_max: float = 20.0, cells: int = 240,
                   jobs: int | None = None) -> list[PairCandidate]:
    """Full pipeline: enumerate, Z0-eliminate, order-2 exclude."""
    out = []
    for cand in enumerate_pairs():
        staged = pair_feasibility(cand.pair, symmetric=False,
                                  rho_max=rho_max, cells=cells)
        if staged.status == "feasible" and odd_family_predicate(staged.pair):
            excl = order2_exclusion_4body(staged.pair, rho_max=rho_max, cells=cells)
            if excl.status == "order2-excluded":
                excl.evidence = {**staged.evidence, **excl.evidence}
                out.append(excl)
                continue
        if staged.status == "feasible":
            staged.evidence["order2_conditions"] = ORDER2_CONDITION_COUNTS.get(
                staged.pair)
        out.append(staged)
    return out
