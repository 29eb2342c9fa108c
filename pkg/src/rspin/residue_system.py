"""Residue-cancellation equations on the projective line and their solver.

For weights ``k`` (summing to ``2g - 2``), fixed parameters ``x`` and unknowns
``y``, ``z`` the form is

    R(t) dt = prod (t - z_i)^k_i / prod (t - x_j)(t - y_j) dt

and the equations are ``F_j = Res_{x_j} R + Res_{y_j} R = 0``.  The residue
theorem makes ``sum_j F_j`` vanish identically, so only ``g - 1`` of the
equations are independent.  The path tracker works with the normalized
equations ``G_j = F_j / Res_{x_j} R = 1 + rho_j`` where ``rho_j`` is a product
of factors close to ``-1`` near the symmetric base point; this keeps every
quantity O(1) no matter how widely the ``x_j`` are spread.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import (
    DegenerateConfiguration,
    DegenerateFactor,
    DegenerateTarget,
    InvalidBaseParameters,
    InvalidInput,
    RankDeficient,
    SingularMatrix,
    TrackingFailed,
)
from .numerics import DEFAULT_POLICY, point_gap, scaled_product
from .rational_forms import FactoredRationalForm, complex_to_json, residue_simple

log = logging.getLogger(__name__)

INITIAL_STEP = 1.0 / 8
MIN_STEP = 1e-12
MAX_NEWTON = 12


@dataclass(frozen=True)
class StratumWeights:
    weights: tuple
    g: int

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(k) for k in self.weights))
        if self.g < 1:
            raise InvalidInput(f"genus must be positive, got {self.g}")
        if any(k < 0 for k in self.weights):
            raise InvalidInput(f"weights must be nonnegative: {self.weights}")
        if sum(self.weights) != 2 * self.g - 2:
            raise InvalidInput(
                f"weights {self.weights} sum to {sum(self.weights)}, expected {2 * self.g - 2}")

    @property
    def n(self):
        return len(self.weights)


@dataclass(frozen=True)
class Configuration:
    """Points ``x`` (parameters), ``y`` and ``z`` of the residue system."""

    x: tuple
    y: tuple
    z: tuple

    def __post_init__(self):
        for name in ("x", "y", "z"):
            vals = tuple(complex(v) for v in getattr(self, name))
            if not all(np.isfinite(v) for v in vals):
                raise InvalidInput(f"{name} has non-finite entries")
            object.__setattr__(self, name, vals)
        if len(self.x) != len(self.y):
            raise InvalidInput("x and y must have the same length")

    @property
    def g(self):
        return len(self.x)

    def arrays(self):
        return (np.array(self.x, dtype=complex), np.array(self.y, dtype=complex),
                np.array(self.z, dtype=complex))

    def validate(self, pol=DEFAULT_POLICY, weights=None):
        """Raise ``DegenerateConfiguration`` unless the distinctness rules hold.

        ``z`` entries may coincide with each other.  When ``weights`` is given,
        ``z`` entries of weight 0 are exempt from the disjointness checks.
        """
        problems = configuration_problems(self, pol, weights)
        if problems:
            raise DegenerateConfiguration("; ".join(problems))

    def to_json(self):
        return {
            "x": [complex_to_json(v) for v in self.x],
            "y": [complex_to_json(v) for v in self.y],
            "z": [complex_to_json(v) for v in self.z],
        }


def configuration_problems(c, pol=DEFAULT_POLICY, weights=None):
    m = pol.distinct_margin
    z = list(c.z) if weights is None else [zi for zi, k in zip(c.z, weights) if k > 0]
    problems = []
    for name, pts in (("x", c.x), ("y", c.y)):
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if point_gap(pts[i], pts[j]) < m:
                    problems.append(f"{name}[{i}] and {name}[{j}] coincide")
    for i, yi in enumerate(c.y):
        for j, xj in enumerate(c.x):
            if point_gap(yi, xj) < m:
                problems.append(f"y[{i}] meets x[{j}]")
        for j, zj in enumerate(z):
            if point_gap(yi, zj) < m:
                problems.append(f"y[{i}] meets z[{j}]")
    for i, xi in enumerate(c.x):
        for j, zj in enumerate(z):
            if point_gap(xi, zj) < m:
                problems.append(f"x[{i}] meets z[{j}]")
    return problems


# ----------------------------------------------------------------------------
# the map F and its Jacobian


def residue_form(w, c, pol=DEFAULT_POLICY):
    """The form ``R(t) dt`` for weights ``w`` over configuration ``c``."""
    if len(c.z) != w.n or c.g != w.g:
        raise InvalidInput(f"configuration shape (g={c.g}, N={len(c.z)}) does not match "
                           f"weights (g={w.g}, N={w.n})")
    c.validate(pol, w.weights)
    try:
        return FactoredRationalForm.build(
            zeros=list(zip(c.z, w.weights)),
            poles=[(p, 1) for p in c.x + c.y],
            pol=pol,
        )
    except DegenerateFactor as exc:
        raise DegenerateConfiguration(str(exc)) from exc


def pair_residues(w, c, pol=DEFAULT_POLICY):
    """Residues ``(A, B)`` of ``R`` at the ``x_j`` and at the ``y_j``."""
    f = residue_form(w, c, pol)
    A = np.array([residue_simple(f, xj) for xj in c.x], dtype=complex)
    B = np.array([residue_simple(f, yj) for yj in c.y], dtype=complex)
    return A, B


def system_F(w, c, pol=DEFAULT_POLICY):
    A, B = pair_residues(w, c, pol)
    return A + B


def relative_residual(w, c, pol=DEFAULT_POLICY):
    """``max_j |F_j| / max(|A_j|, |B_j|)``, the per-node relative residual."""
    A, B = pair_residues(w, c, pol)
    return _relative(A, B)


def _relative(A, B):
    if len(A) == 0:
        return 0.0
    scale = np.maximum(np.abs(A), np.abs(B))
    F = np.abs(A + B)
    out = np.zeros(len(A))
    nz = scale > 0
    out[nz] = F[nz] / scale[nz]
    return float(np.max(out))


def jacobian_analytic(w, c, pol=DEFAULT_POLICY):
    """Closed-form ``(dF/dy, dF/dz)`` by logarithmic differentiation."""
    A, B = pair_residues(w, c, pol)
    if w.g == 1:
        # two simple poles: F vanishes identically, so does its differential
        return np.zeros((1, 1), dtype=complex), np.zeros((1, w.n), dtype=complex)
    x, y, z = c.arrays()
    k = np.array(w.weights, dtype=float)
    return _jacobian_from_residues(A, B, k, x, y, z)


def _jacobian_from_residues(A, B, k, x, y, z):
    g, N = len(x), len(z)
    Jy = np.zeros((g, g), dtype=complex)
    Jz = np.zeros((g, N), dtype=complex)
    for j in range(g):
        Jy[j, :] += A[j] / (x[j] - y)
        others = np.arange(g) != j
        Jy[j, others] += B[j] / (y[j] - y[others])
        diag = -np.sum(1.0 / (y[j] - x)) - np.sum(1.0 / (y[j] - y[others]))
        if N:
            diag += np.sum(k / (y[j] - z))
            Jz[j, :] = -k * A[j] / (x[j] - z) - k * B[j] / (y[j] - z)
        Jy[j, j] += B[j] * diag
    return Jy, Jz


def _raw_residues(k, x, y, z):
    """``(A, B)`` without validity checks (finite differences, base point)."""
    g = len(x)
    A = np.zeros(g, dtype=complex)
    B = np.zeros(g, dtype=complex)
    for j in range(g):
        others = [i for i in range(g) if i != j]
        A[j] = scaled_product(
            [x[j] - zi for zi in z] + [x[j] - x[i] for i in others] + [x[j] - yi for yi in y],
            list(k) + [-1] * (len(others) + g))
        B[j] = scaled_product(
            [y[j] - zi for zi in z] + [y[j] - xi for xi in x] + [y[j] - y[i] for i in others],
            list(k) + [-1] * (g + len(others)))
    return A, B


def fd_jacobian(w, c, step=None, pol=DEFAULT_POLICY):
    """Central finite-difference ``(dF/dy, dF/dz)`` with relative step."""
    h = pol.fd_step if step is None else step
    x, y, z = c.arrays()
    k = list(w.weights)
    g, N = len(x), len(z)
    Jy = np.zeros((g, g), dtype=complex)
    Jz = np.zeros((g, N), dtype=complex)
    for col in range(g):
        d = h * max(1.0, abs(y[col]))
        yp, ym = y.copy(), y.copy()
        yp[col] += d
        ym[col] -= d
        Jy[:, col] = (sum(_raw_residues(k, x, yp, z)) - sum(_raw_residues(k, x, ym, z))) / (2 * d)
    for col in range(N):
        d = h * max(1.0, abs(z[col]))
        zp, zm = z.copy(), z.copy()
        zp[col] += d
        zm[col] -= d
        Jz[:, col] = (sum(_raw_residues(k, x, y, zp)) - sum(_raw_residues(k, x, y, zm))) / (2 * d)
    return Jy, Jz


def column_sum_defect(Jy, Jz):
    """Max over columns of ``|sum_j J[j, k]| / sum_j |J[j, k]|`` for ``[dF/dy | dF/dz]``."""
    J = np.hstack([Jy, Jz])
    if J.size == 0:
        return 0.0
    absum = np.sum(np.abs(J), axis=0)
    absum[absum == 0] = 1.0
    return float(np.max(np.abs(J.sum(axis=0)) / absum))


def fd_agreement(analytic, numeric):
    """Max entrywise discrepancy, relative to the largest entry of its row."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    if analytic.size == 0:
        return 0.0
    rowscale = np.max(np.abs(analytic), axis=1, keepdims=True)
    rowscale[rowscale == 0] = 1.0
    return float(np.max(np.abs(analytic - numeric) / rowscale))


# ----------------------------------------------------------------------------
# normalized equations used by the tracker


def normalized_system(k, x, y, z):
    """``G = 1 + rho`` and its Jacobians ``(dG/dy, dG/dz)``."""
    g, N = len(x), len(z)
    G = np.empty(g, dtype=complex)
    Gy = np.zeros((g, g), dtype=complex)
    Gz = np.zeros((g, N), dtype=complex)
    for j in range(g):
        others = np.arange(g) != j
        xo, yo = x[others], y[others]
        factors = np.concatenate([
            (x[j] - xo) / (y[j] - yo),
            (x[j] - yo) / (y[j] - xo),
        ])
        rho = -np.prod(factors)
        if N:
            rho *= np.prod(((y[j] - z) / (x[j] - z)) ** k)
        G[j] = 1.0 + rho
        dlog = np.zeros(g, dtype=complex)
        dlog[others] = 1.0 / (y[j] - yo) - 1.0 / (x[j] - yo)
        dlog[j] = -np.sum(1.0 / (y[j] - xo)) - np.sum(1.0 / (y[j] - yo))
        if N:
            dlog[j] += np.sum(k / (y[j] - z))
            Gz[j] = rho * (k / (x[j] - z) - k / (y[j] - z))
        Gy[j] = rho * dlog
    return G, Gy, Gz


def _log_residue_magnitudes(k, x, y, z):
    g = len(x)
    out = np.empty(g)
    for j in range(g):
        others = np.arange(g) != j
        val = -np.sum(np.log(np.abs(x[j] - x[others]))) - np.sum(np.log(np.abs(x[j] - y)))
        if len(z):
            with np.errstate(divide="ignore"):
                val += np.sum(k * np.log(np.abs(x[j] - z)))
        out[j] = val
    return out


@dataclass(frozen=True)
class Gauge:
    """Which equation is dropped and which ``y`` is frozen."""

    drop: int
    frozen: int
    condition: float


def choose_gauge(w, x, pol=DEFAULT_POLICY):
    """Pick the gauge at the base point and report the reduced condition number.

    The dropped equation is the one with the largest residue (it is implied
    by the others with the smallest relative error amplification); the frozen
    unknown is the largest component of the null vector of ``dG/dy``.
    Conditioning is measured on the row-normalized system in relative
    coordinates ``y_k / max(1, |x_k|)``.
    """
    x = np.asarray(x, dtype=complex)
    g = len(x)
    if g == 1:
        return Gauge(0, 0, 1.0)
    k = np.array(w.weights, dtype=float)
    y = -x
    z = np.zeros(w.n, dtype=complex)
    _, Gy, _ = normalized_system(k, x, y, z)
    J = Gy * _colscale(x)[None, :]
    drop = int(np.argmax(_log_residue_magnitudes(k, x, y, z)))
    _, _, Vh = np.linalg.svd(J)
    frozen = int(np.argmax(np.abs(Vh[-1])))
    rows = [i for i in range(g) if i != drop]
    cols = [i for i in range(g) if i != frozen]
    s = np.linalg.svd(J[np.ix_(rows, cols)], compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    return Gauge(drop, frozen, cond)


def _colscale(x):
    return np.maximum(1.0, np.abs(x))


# ----------------------------------------------------------------------------
# the base point and the linearizations


def choose_x(g, spread=10.0):
    """Geometric ladder ``x_j = spread**(g - j)``, ``j = 1..g``."""
    if g < 1:
        raise InvalidInput("g must be >= 1")
    if not spread > 1:
        raise InvalidInput("spread must exceed 1")
    return [complex(float(spread) ** (g - j)) for j in range(1, g + 1)]


def base_point(w, x, pol=DEFAULT_POLICY):
    """The symmetric configuration ``y = -x``, ``z = 0``."""
    x = [complex(v) for v in x]
    if len(x) != w.g:
        raise InvalidBaseParameters(f"need {w.g} parameters, got {len(x)}")
    m = pol.distinct_margin
    for i, xi in enumerate(x):
        if point_gap(xi, 0) < m:
            raise InvalidBaseParameters(f"x[{i}] = {xi} is zero")
        for j in range(len(x)):
            if j > i and point_gap(xi, x[j]) < m:
                raise InvalidBaseParameters(f"x[{i}] and x[{j}] coincide")
            if point_gap(xi, -x[j]) < m:
                raise InvalidBaseParameters(f"x[{i}] = -x[{j}]")
    return Configuration(tuple(x), tuple(-v for v in x), (0j,) * w.n)


def lineareq_matrix(x, g=None):
    """Matrix ``M`` of the linear system ``M t = 0`` attached to ``x``.

    ``M[j, j] = x_j * sum_{k != j} 1/(x_j - x_k) - (2g - 2)`` and
    ``M[j, k] = -x_j / (x_j - x_k)``.
    """
    x = np.asarray(x, dtype=complex)
    g = len(x) if g is None else g
    if len(x) != g:
        raise InvalidInput("len(x) must equal g")
    M = np.zeros((g, g), dtype=complex)
    for j in range(g):
        for kk in range(g):
            if kk != j:
                M[j, kk] = -x[j] / (x[j] - x[kk])
                M[j, j] += x[j] / (x[j] - x[kk])
        M[j, j] -= 2 * g - 2
    return M


def tangenteq_matrix(w, x):
    """Coefficients of the published linearization at the base point.

    Columns are ``(dz_1..dz_N, dy_1..dy_g)``; every row carries the same
    dz-coefficients ``2 k_i`` and the dy-block is ``lineareq_matrix(x)``.
    """
    x = np.asarray(x, dtype=complex)
    g = len(x)
    T = np.zeros((g, w.n + g), dtype=complex)
    T[:, : w.n] = 2 * np.array(w.weights, dtype=float)[None, :]
    T[:, w.n:] = lineareq_matrix(x, g)
    return T


def _fd_log_difference(w, c, step):
    """Finite-difference Jacobian of ``log(LHS/RHS)`` of the pairwise equations.

    ``LHS/RHS = -1/rho``; columns ordered ``(z, y)``.
    """
    x, y, z = c.arrays()
    k = np.array(w.weights, dtype=float)

    def L(yv, zv):
        G, _, _ = normalized_system(k, x, yv, zv)
        return -np.log(-(G - 1.0))

    g, N = len(x), len(z)
    J = np.zeros((g, N + g), dtype=complex)
    for col in range(N + g):
        yp, ym, zp, zm = y.copy(), y.copy(), z.copy(), z.copy()
        if col < N:
            d = step * max(1.0, abs(z[col]))
            zp[col] += d
            zm[col] -= d
        else:
            d = step * max(1.0, abs(y[col - N]))
            yp[col - N] += d
            ym[col - N] -= d
        J[:, col] = (L(yp, zp) - L(ym, zm)) / (2 * d)
    return J


def _row_discrepancy(T, L):
    """Per-row mismatch after the best complex rescaling of ``L`` onto ``T``."""
    worst = 0.0
    for t_row, l_row in zip(T, L):
        denom = np.vdot(l_row, l_row)
        c = np.vdot(l_row, t_row) / denom if denom != 0 else 0.0
        tn = np.linalg.norm(t_row)
        err = np.linalg.norm(c * l_row - t_row) / (tn if tn > 0 else 1.0)
        worst = max(worst, float(err))
    return worst


@dataclass
class ResidueSystemReport:
    weights: tuple
    x: list
    residual: np.ndarray
    jacobian_y: np.ndarray
    jacobian_z: np.ndarray
    empirical_rank_y: int
    fd_agreement: float
    singular_values_y: list = field(default_factory=list)
    column_sum_max: float = 0.0
    lineareq_rank: int = 0
    lineareq_singular_values: list = field(default_factory=list)
    tangenteq_discrepancy: float = 0.0
    reduced_condition: float = 0.0
    fd_step: float = 0.0

    def to_json(self):
        def mat(M):
            return [[complex_to_json(v) for v in row] for row in np.asarray(M)]

        return {
            "weights": list(self.weights),
            "x": [complex_to_json(v) for v in self.x],
            "residual": [complex_to_json(v) for v in self.residual],
            "jacobian_y": mat(self.jacobian_y),
            "jacobian_z": mat(self.jacobian_z),
            "empirical_rank_y": self.empirical_rank_y,
            "singular_values_y": list(self.singular_values_y),
            "fd_agreement": self.fd_agreement,
            "column_sum_max": self.column_sum_max,
            "lineareq_rank": self.lineareq_rank,
            "lineareq_singular_values": list(self.lineareq_singular_values),
            "tangenteq_discrepancy": self.tangenteq_discrepancy,
            "reduced_condition": self.reduced_condition,
            "fd_step": self.fd_step,
        }


def residue_system_report(w, x, pol=DEFAULT_POLICY):
    """Linear-algebra diagnostics of the system at the base point.

    ``empirical_rank_y`` is the numeric rank of the finite-difference
    ``dF/dy`` after normalizing each row by its residue scale and each column
    by ``max(1, |x_k|)``.  The published linearization is compared against
    the finite-difference differential of the log-ratio equations
    (``tangenteq_discrepancy``); the two are not forced to agree.
    """
    c = base_point(w, x, pol)
    xa, ya, za = c.arrays()
    k = list(w.weights)
    A, B = _raw_residues(k, xa, ya, za)
    F = A + B
    Jy, Jz = _jacobian_from_residues(A, B, np.array(k, dtype=float), xa, ya, za)
    FJy, FJz = fd_jacobian(w, c, pol=pol)
    agreement = max(fd_agreement(Jy, FJy), fd_agreement(Jz, FJz) if w.n else 0.0)
    rowscale = np.maximum(np.abs(A), np.abs(B))
    rowscale[rowscale == 0] = 1.0
    normalized = FJy / rowscale[:, None] * _colscale(xa)[None, :]
    rank, sv = numerics.numeric_rank(normalized, pol)
    colsum = column_sum_defect(Jy, Jz)
    M = lineareq_matrix(xa, w.g)
    lrank, lsv = numerics.numeric_rank(M, pol)
    T = tangenteq_matrix(w, xa)
    L = _fd_log_difference(w, c, pol.fd_step)
    return ResidueSystemReport(
        weights=w.weights,
        x=list(c.x),
        residual=F,
        jacobian_y=Jy,
        jacobian_z=Jz,
        empirical_rank_y=rank,
        fd_agreement=agreement,
        singular_values_y=sv,
        column_sum_max=colsum,
        lineareq_rank=lrank,
        lineareq_singular_values=lsv,
        tangenteq_discrepancy=_row_discrepancy(T, L),
        reduced_condition=choose_gauge(w, xa, pol).condition,
        fd_step=pol.fd_step,
    )


# ----------------------------------------------------------------------------
# continuation


def _solve_reduced(Gy, rhs, gauge, colscale, pol):
    """Step for the square reduced system, or a min-norm step as fallback."""
    g = Gy.shape[0]
    rows = [i for i in range(g) if i != gauge.drop]
    cols = [i for i in range(g) if i != gauge.frozen]
    J = Gy[np.ix_(rows, cols)] * colscale[cols][None, :]
    step = np.zeros(g, dtype=complex)
    try:
        if numerics.numeric_rank(J, pol)[0] < len(rows):
            raise SingularMatrix("reduced Jacobian is rank-deficient")
        step[cols] = numerics.lu_solve(J, rhs[rows], pol) * colscale[cols]
    except SingularMatrix:
        log.debug("reduced Jacobian singular, falling back to min-norm step")
        Jfull = Gy[rows, :] * colscale[None, :]
        step = numerics.minnorm_step(Jfull, rhs[rows], pol) * colscale
    return step


def _separated(x, y, z_active, pol):
    c = Configuration(tuple(x), tuple(y), tuple(z_active))
    return not configuration_problems(c, pol)


class _Tracker:
    def __init__(self, w, x, pol):
        self.w = w
        self.pol = pol
        weights = np.array(w.weights, dtype=float)
        self.active = weights > 0
        self.k = weights[self.active]
        self.x = np.asarray(x, dtype=complex)
        self.colscale = _colscale(self.x)
        self.gauge = choose_gauge(w, self.x, pol)
        self.rows = [i for i in range(w.g) if i != self.gauge.drop]

    def residual(self, y, z):
        G, _, _ = normalized_system(self.k, self.x, y, z)
        return float(np.max(np.abs(G[self.rows]))), G

    def correct(self, y, z, tol):
        """Newton on the reduced system; returns ``(ok, iterations, y, residual)``."""
        res, _ = self.residual(y, z)
        y = y.copy()
        for it in range(MAX_NEWTON + 1):
            if res <= tol:
                return True, it, y, res
            if it == MAX_NEWTON:
                break
            G, Gy, _ = normalized_system(self.k, self.x, y, z)
            try:
                step = _solve_reduced(Gy, -G, self.gauge, self.colscale, self.pol)
            except (SingularMatrix, RankDeficient):
                return False, it, y, res
            if np.max(np.abs(step) / self.colscale) > 0.25:
                return False, it, y, res
            y_new = y + step
            if not _separated(self.x, y_new, z, self.pol):
                return False, it, y, res
            new_res, _ = self.residual(y_new, z)
            if not np.isfinite(new_res) or (it > 0 and new_res > 2 * res):
                return False, it, y, res
            y, res = y_new, new_res
        return False, MAX_NEWTON, y, res

    def polish(self, y, z, rounds=6):
        res, _ = self.residual(y, z)
        for _ in range(rounds):
            G, Gy, _ = normalized_system(self.k, self.x, y, z)
            try:
                step = _solve_reduced(Gy, -G, self.gauge, self.colscale, self.pol)
            except (SingularMatrix, RankDeficient):
                break
            y_new = y + step
            new_res, _ = self.residual(y_new, z)
            if not new_res < res:
                break
            y, res = y_new, new_res
        return y, res

    def track(self, z_target):
        pol = self.pol
        tol_inner = max(1e-3 * pol.residual_tol, 1e-14)
        y = -self.x.copy()
        z = np.zeros_like(z_target)
        s, h, easy = 0.0, INITIAL_STEP, 0
        res = 0.0
        while s < 1.0:
            s_new = min(1.0, s + h)
            z_new = s_new * z_target
            G, Gy, Gz = normalized_system(self.k, self.x, y, z)
            ok = False
            try:
                dy = _solve_reduced(Gy, -(Gz @ (z_new - z)), self.gauge, self.colscale, pol)
                y_pred = y + dy
                if _separated(self.x, y_pred, z_new, pol):
                    ok, its, y_corr, res = self.correct(y_pred, z_new, tol_inner)
            except (SingularMatrix, RankDeficient):
                ok = False
            if ok:
                y, z, s = y_corr, z_new, s_new
                easy = easy + 1 if its <= 3 else 0
                if easy >= 3:
                    h, easy = min(2 * h, 1.0), 0
            else:
                h, easy = h / 2, 0
                if h < MIN_STEP:
                    raise TrackingFailed(h, res)
        y, res = self.polish(y, z)
        return y, z, res


def continue_to(w, x, z_target, pol=DEFAULT_POLICY):
    """Track the base point along ``z(s) = s * z_target`` up to ``s = 1``.

    Returns a configuration whose ``z`` equals ``z_target`` and whose relative
    residual is at most ``pol.residual_tol``.
    """
    z_target = np.asarray([complex(v) for v in z_target], dtype=complex)
    if len(z_target) != w.n:
        raise InvalidInput(f"need {w.n} targets, got {len(z_target)}")
    base = base_point(w, x, pol)
    m = pol.distinct_margin
    for i in range(len(z_target)):
        for j in range(i + 1, len(z_target)):
            if point_gap(z_target[i], z_target[j]) < m:
                raise DegenerateTarget(f"targets {i} and {j} coincide")
        for xj in base.x:
            if point_gap(z_target[i], xj) < m:
                raise DegenerateTarget(f"target {i} meets a parameter x")
    if w.g == 1 or w.n == 0 or not any(w.weights):
        return Configuration(base.x, base.y, tuple(z_target))
    tracker = _Tracker(w, base.x, pol)
    y, _, _ = tracker.track(z_target[tracker.active])
    result = Configuration(base.x, tuple(y), tuple(z_target))
    problems = configuration_problems(result, pol, w.weights)
    if problems:
        raise DegenerateTarget("; ".join(problems))
    final = relative_residual(w, result, pol)
    if not final <= pol.residual_tol:
        raise TrackingFailed(0.0, final, f"final residual {final:.3g} above tolerance")
    return result


def newton_polish(w, c, pol=DEFAULT_POLICY):
    """A few reduced Newton steps at fixed ``x`` and ``z``."""
    if c.g == 1 or not any(w.weights):
        return c
    tracker = _Tracker(w, c.x, pol)
    x, y, z = c.arrays()
    y, _ = tracker.polish(y, z[tracker.active])
    return Configuration(c.x, tuple(y), c.z)
