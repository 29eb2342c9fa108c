"""Effective r-spin data on irreducible rational nodal curves.

A solution is a configuration ``x, y, z`` together with the roots of a
polynomial ``P`` of degree ``d`` such that

(i)  ``R = P^r prod (t - z_i)^m_i / prod (t - x_j)(t - y_j)`` has opposite
     residues at every pair ``x_j, y_j``, and
(ii) no nonzero polynomial ``f`` of degree ``< d`` has
     ``f(x_j)/P(x_j) = f(y_j)/P(y_j)`` for all ``j``.

``d = 0`` is handled by continuation from the symmetric base point, ``d = 1``
by adding one extra zero of weight ``r``, and ``d >= 2`` on a best-effort basis.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import (
    DegenerateConfiguration,
    DegenerateTarget,
    InvalidInput,
    PolynomialVanishesAtPole,
    RankDeficient,
    SolverExhausted,
    TrackingFailed,
)
from .numerics import DEFAULT_POLICY, point_gap, scaled_product
from .rational_forms import complex_to_json
from .residue_system import (
    Configuration,
    StratumWeights,
    choose_gauge,
    choose_x,
    configuration_problems,
    continue_to,
    normalized_system,
    relative_residual,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 8
DEFAULT_SPREAD = 10.0
MAX_SPREAD = 1e6
MAX_CONDITION = 1e10
TARGET_RADIUS = 0.05


@dataclass(frozen=True)
class SpinData:
    g: int
    r: int
    m: tuple = ()
    d: int = None

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        if self.g < 1:
            raise InvalidInput(f"g must be >= 1, got {self.g}")
        if self.r < 2:
            raise InvalidInput(f"r must be >= 2, got {self.r}")
        if any(v < 0 for v in self.m):
            raise InvalidInput(f"weights must be nonnegative: {self.m}")
        rest = 2 * self.g - 2 - sum(self.m)
        if self.d is None:
            if rest < 0 or rest % self.r:
                raise InvalidInput(
                    f"2g-2-sum(m) = {rest} is not a nonnegative multiple of r = {self.r}")
            object.__setattr__(self, "d", rest // self.r)
        elif self.d < 0 or sum(self.m) + self.r * self.d != 2 * self.g - 2:
            raise InvalidInput(
                f"sum(m) + r*d = {sum(self.m) + self.r * self.d} != 2g-2 = {2 * self.g - 2}")

    @property
    def n(self):
        return len(self.m)

    def to_json(self):
        return {"g": self.g, "r": self.r, "n": self.n, "m": list(self.m), "d": self.d}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["g"]), int(data["r"]), tuple(data.get("m", ())), data.get("d"))


@dataclass(frozen=True)
class ProblemSolution:
    """Configuration (``z`` holds the ``n`` marked points only) plus roots of ``P``."""

    config: Configuration
    p_roots: tuple
    cond1_residual: float
    cond2_rank: int
    cond2_required: int
    attempts: int = 1
    spread: float = DEFAULT_SPREAD

    @property
    def accepted(self):
        return self.cond2_rank == self.cond2_required

    def to_json(self):
        out = self.config.to_json()
        out.update({
            "p_roots": [complex_to_json(v) for v in self.p_roots],
            "cond1_residual": self.cond1_residual,
            "cond2_rank": self.cond2_rank,
            "cond2_required": self.cond2_required,
            "attempts": self.attempts,
            "spread": self.spread,
        })
        return out


def merged(sd, sol):
    """Weights and configuration with the roots of ``P`` appended as zeros."""
    w = StratumWeights(sd.m + (sd.r,) * len(sol.p_roots), sd.g)
    c = Configuration(sol.config.x, sol.config.y, sol.config.z + tuple(sol.p_roots))
    return w, c


def sample_targets(n, radius, rng, pol=DEFAULT_POLICY):
    """``n`` points uniform on a disk, pairwise at least ``2 * distinct_margin`` apart."""
    pts = []
    while len(pts) < n:
        rad = radius * np.sqrt(rng.uniform())
        ang = rng.uniform(0, 2 * np.pi)
        p = complex(rad * np.cos(ang), rad * np.sin(ang))
        if all(point_gap(p, q) >= 2 * pol.distinct_margin for q in pts) and \
                point_gap(p, 0) >= 2 * pol.distinct_margin:
            pts.append(p)
    return pts


def _attempt_rng(seed, attempt):
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, attempt])


def _spread_for(attempt):
    return min(DEFAULT_SPREAD * 10.0 ** ((attempt + 1) // 2), MAX_SPREAD) if attempt else DEFAULT_SPREAD


def _parameters(w, spread, pol):
    """Ladder ``x``, escalating the spread while the gauge is ill-conditioned."""
    while True:
        x = choose_x(w.g, spread)
        cond = choose_gauge(w, np.array(x), pol).condition
        if cond <= MAX_CONDITION or spread * 10 > MAX_SPREAD:
            return x, spread
        spread *= 10


def _solve_weights(w, pol, seed, budget, offset=0):
    """Continuation solve for a weight list with retries; returns ``(config, attempt, spread)``."""
    failures = []
    for attempt in range(offset, offset + budget):
        rng = _attempt_rng(seed, attempt)
        x, spread = _parameters(w, _spread_for(attempt), pol)
        radius = TARGET_RADIUS * min(abs(v) for v in x)
        targets = sample_targets(w.n, radius, rng, pol)
        try:
            c = continue_to(w, x, targets, pol)
        except (TrackingFailed, DegenerateTarget, DegenerateConfiguration) as exc:
            log.info("attempt %d failed: %s", attempt, exc)
            failures.append(f"attempt {attempt}: {exc}")
            continue
        return c, attempt, spread
    raise SolverExhausted(f"no solution after {budget} attempts", failures)


def solve_d0(sd, pol=DEFAULT_POLICY, seed=0, budget=DEFAULT_BUDGET):
    if sd.d != 0:
        raise InvalidInput(f"solve_d0 needs d = 0, got d = {sd.d}")
    w = StratumWeights(sd.m, sd.g)
    c, attempt, spread = _solve_weights(w, pol, seed, budget)
    sol = ProblemSolution(c, (), 0.0, 0, 0, attempt + 1, spread)
    return _certified(sd, sol, pol)


def solve_d1(sd, pol=DEFAULT_POLICY, seed=0, budget=DEFAULT_BUDGET):
    """Solve with one extra zero of weight ``r``; that zero is the root of ``P``."""
    if sd.d != 1:
        raise InvalidInput(f"solve_d1 needs d = 1, got d = {sd.d}")
    w = StratumWeights(sd.m + (sd.r,), sd.g)
    c, attempt, spread = _solve_weights(w, pol, seed, budget)
    base = Configuration(c.x, c.y, c.z[: sd.n])
    sol = ProblemSolution(base, (c.z[-1],), 0.0, 0, 1, attempt + 1, spread)
    return _certified(sd, sol, pol)


def _problem_residuals(k, x, y, z):
    """Normalized residuals ``F_j / Res_{x_j}`` of the full system."""
    active = k > 0
    G, Gy, Gz = normalized_system(k[active], x, y, z[active])
    Jz = np.zeros((len(x), len(z)), dtype=complex)
    Jz[:, active] = Gz
    return G, Gy, Jz


def gauss_newton_polish(sd, sol, pol=DEFAULT_POLICY, iterations=8):
    """Minimal-norm Gauss-Newton on all unknowns ``(z, y, roots of P)``.

    The equation with the largest residue is dropped (it is implied), so the
    step solves a full-row-rank ``(g-1) x (n+g+d)`` system.
    """
    w, c = merged(sd, sol)
    x, y, z = c.arrays()
    k = np.array(w.weights, dtype=float)
    if sd.g == 1 or not np.any(k):
        return sol
    drop = choose_gauge(w, x, pol).drop
    rows = [i for i in range(sd.g) if i != drop]
    scale = np.concatenate([np.maximum(1.0, np.abs(z)), np.maximum(1.0, np.abs(y))])
    G, _, _ = _problem_residuals(k, x, y, z)
    res = float(np.max(np.abs(G)))
    for _ in range(iterations):
        if res <= 1e-3 * pol.residual_tol:
            break
        G, Gy, Gz = _problem_residuals(k, x, y, z)
        J = np.hstack([Gz, Gy])[rows] * scale[None, :]
        try:
            step = numerics.minnorm_step(J, -G[rows], pol) * scale
        except RankDeficient:
            break
        z_new = z + step[: len(z)]
        y_new = y + step[len(z):]
        trial = Configuration(tuple(x), tuple(y_new), tuple(z_new))
        if configuration_problems(trial, pol, w.weights):
            break
        G_new, _, _ = _problem_residuals(k, x, y_new, z_new)
        new_res = float(np.max(np.abs(G_new)))
        if not new_res < res:
            break
        y, z, res = y_new, z_new, new_res
    n = sd.n
    config = Configuration(tuple(x), tuple(y), tuple(z[:n]))
    return ProblemSolution(config, tuple(z[n:]), sol.cond1_residual, sol.cond2_rank,
                           sol.cond2_required, sol.attempts, sol.spread)


def solve_general(sd, pol=DEFAULT_POLICY, seed=0, budget=DEFAULT_BUDGET, start=None):
    """Best-effort solve for ``d >= 2``.

    Each attempt takes a randomized start (a continuation toward random
    targets for the merged weight list, or the explicit ``start`` solution for
    the first attempt), polishes it by minimal-norm Gauss-Newton on all
    unknowns and keeps it only if both conditions certify.
    """
    if sd.d < 2:
        raise InvalidInput(f"solve_general needs d >= 2, got d = {sd.d}")
    w = StratumWeights(sd.m + (sd.r,) * sd.d, sd.g)
    failures = []
    for attempt in range(budget):
        try:
            if start is not None and attempt == 0:
                cand = start
                merged_c = merged(sd, cand)[1]
                merged_c.validate(pol, w.weights)
            else:
                c, _, spread = _solve_weights(w, pol, seed, 1, offset=attempt)
                cand = ProblemSolution(Configuration(c.x, c.y, c.z[: sd.n]), c.z[sd.n:],
                                       0.0, 0, sd.d, attempt + 1, spread)
            cand = gauss_newton_polish(sd, cand, pol)
            sol = _certified(sd, cand, pol, attempts=attempt + 1)
        except (SolverExhausted, DegenerateConfiguration, PolynomialVanishesAtPole) as exc:
            failures.append(f"attempt {attempt}: {type(exc).__name__}: {exc}")
            continue
        if sol.cond1_residual <= pol.residual_tol and sol.cond2_rank == sd.d:
            return sol
        failures.append(f"attempt {attempt}: residual {sol.cond1_residual:.3g}, "
                        f"rank {sol.cond2_rank} < {sd.d}")
    raise SolverExhausted(f"no certified solution after {budget} attempts", failures)


def solve(sd, pol=DEFAULT_POLICY, seed=0, budget=DEFAULT_BUDGET):
    if sd.d == 0:
        return solve_d0(sd, pol, seed, budget)
    if sd.d == 1:
        return solve_d1(sd, pol, seed, budget)
    return solve_general(sd, pol, seed, budget)


def _certified(sd, sol, pol, attempts=None):
    """Recompute both conditions from scratch and store them on the solution."""
    w, c = merged(sd, sol)
    res = relative_residual(w, c, pol)
    if sd.d:
        rank, _ = numerics.numeric_rank(numerics.equilibrate(condition2_matrix(sol, pol)), pol)
    else:
        rank = 0
    return ProblemSolution(sol.config, tuple(sol.p_roots), res, rank, sd.d,
                           sol.attempts if attempts is None else attempts, sol.spread)


def recertify(sd, sol, pol=DEFAULT_POLICY):
    """Verdict ``(residual_ok, rank_ok)`` recomputed from a fresh form."""
    fresh = _certified(sd, sol, pol)
    return fresh.cond1_residual <= pol.residual_tol, fresh.cond2_rank == sd.d


def evaluate_P(roots, t):
    return scaled_product([t - q for q in roots])


def condition2_matrix(sol, pol=DEFAULT_POLICY):
    """``g x d`` matrix with entries ``x_j^l / P(x_j) - y_j^l / P(y_j)``."""
    roots = list(sol.p_roots)
    d = len(roots)
    x, y = sol.config.x, sol.config.y
    M = np.zeros((len(x), d), dtype=complex)
    for j, (xj, yj) in enumerate(zip(x, y)):
        Px, Py = evaluate_P(roots, xj), evaluate_P(roots, yj)
        for t, Pt in ((xj, Px), (yj, Py)):
            scale = max(1.0, abs(t)) ** d
            if abs(Pt) < pol.distinct_margin * scale:
                raise PolynomialVanishesAtPole(f"|P({t})| = {abs(Pt):.3g}")
        for l in range(d):
            M[j, l] = xj ** l / Px - yj ** l / Py
    return M


def minor_rank(M, pol=DEFAULT_POLICY):
    """Largest ``k`` with a ``k x k`` minor above the relative cutoff (brute force)."""
    M = numerics.equilibrate(M)
    rows, cols = M.shape
    for k in range(min(rows, cols), 0, -1):
        for ri in itertools.combinations(range(rows), k):
            for ci in itertools.combinations(range(cols), k):
                sub = M[np.ix_(ri, ci)]
                if abs(np.linalg.det(sub)) > pol.rank_cutoff ** k:
                    return k
    return 0


def to_irreducible_nodal(sol, sd, pol=DEFAULT_POLICY):
    """One-component curve with self-nodes ``x_j ~ y_j``."""
    from .nodal_curves import irreducible_curve
    return irreducible_curve(sd, sol.config, sol.p_roots, pol=pol)
