"""Dense complex linear algebra and tolerance handling.

Every matrix here is a two-dimensional ``numpy.ndarray`` of ``complex128``
and every scalar a Python ``complex``.  Factorizations are delegated to
LAPACK through numpy/scipy; this module owns the error contracts and the
scaling conventions built on top of them.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.linalg

from .errors import InvalidInput, RankDeficient, SingularMatrix

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TolerancePolicy:
    """Relative tolerances used throughout the package.

    Attributes
    ----------
    residual_tol : float
        Acceptance bound on relative residue residuals.
    rank_cutoff : float
        Singular values below ``rank_cutoff * sigma_max`` count as zero.
    distinct_margin : float
        Two points ``p, q`` are distinct when
        ``|p - q| >= distinct_margin * max(1, |p|, |q|)``.
    fd_step : float
        Relative step of central finite differences.
    """

    residual_tol: float = 1e-9
    rank_cutoff: float = 1e-8
    distinct_margin: float = 1e-6
    fd_step: float = 1e-6

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidInput(f"{name} must be a positive finite number, got {value!r}")
        if self.residual_tol >= 1 or self.rank_cutoff >= 1:
            raise InvalidInput("residual_tol and rank_cutoff must be < 1")

    _ENV = {
        "residual_tol": "RSPIN_RESIDUAL_TOL",
        "rank_cutoff": "RSPIN_RANK_CUTOFF",
        "distinct_margin": "RSPIN_DISTINCT_MARGIN",
        "fd_step": "RSPIN_FD_STEP",
    }

    @classmethod
    def from_env(cls, environ=None, **overrides):
        """Defaults, then ``RSPIN_*`` environment variables, then ``overrides``."""
        environ = os.environ if environ is None else environ
        values = {}
        for field, var in cls._ENV.items():
            if var in environ:
                try:
                    values[field] = float(environ[var])
                except ValueError as exc:
                    raise InvalidInput(f"{var}={environ[var]!r} is not a number") from exc
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def tightened(self, factor):
        return replace(self, residual_tol=self.residual_tol / factor)

    def to_json(self):
        return asdict(self)


DEFAULT_POLICY = TolerancePolicy()


def as_matrix(A):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise InvalidInput(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput("matrix has non-finite entries")
    return A


def as_vector(b):
    b = np.asarray(b, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(b)):
        raise InvalidInput("vector has non-finite entries")
    return b


def lu_solve(A, b, pol=DEFAULT_POLICY):
    """Solve ``A s = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrix
        If some pivot is below ``pol.rank_cutoff`` times the largest
        column norm of ``A``.
    """
    A = as_matrix(A)
    b = as_vector(b)
    n, m = A.shape
    if n != m:
        raise InvalidInput(f"lu_solve needs a square matrix, got {A.shape}")
    if b.shape[0] != n:
        raise InvalidInput(f"right-hand side has length {b.shape[0]}, expected {n}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    scale = np.max(np.linalg.norm(A, axis=0))
    if scale == 0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported through SingularMatrix below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < pol.rank_cutoff * scale:
        raise SingularMatrix(
            f"pivot {np.min(pivots):.3g} below cutoff {pol.rank_cutoff * scale:.3g}")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def singular_values(A):
    A = as_matrix(A)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def numeric_rank(A, pol=DEFAULT_POLICY):
    """Return ``(rank, singular_values)`` with values in nonincreasing order."""
    A = as_matrix(A)
    if A.size == 0:
        return 0, []
    s = singular_values(A)
    if s[0] == 0:
        return 0, s.tolist()
    rank = int(np.count_nonzero(s > pol.rank_cutoff * s[0]))
    return rank, s.tolist()


def minnorm_step(J, r, pol=DEFAULT_POLICY):
    """Minimal-norm solution of the underdetermined system ``J s = r``.

    Computed from the SVD of ``J``.  Raises ``RankDeficient`` when ``J``
    does not have full row rank at ``pol.rank_cutoff``.
    """
    J = as_matrix(J)
    r = as_vector(r)
    rows, cols = J.shape
    if rows > cols:
        raise InvalidInput(f"minnorm_step needs rows <= cols, got {J.shape}")
    if r.shape[0] != rows:
        raise InvalidInput(f"right-hand side has length {r.shape[0]}, expected {rows}")
    if rows == 0:
        return np.zeros(cols, dtype=complex)
    U, s, Vh = np.linalg.svd(J, full_matrices=False)
    rank = int(np.count_nonzero(s > pol.rank_cutoff * s[0])) if s[0] > 0 else 0
    if rank < rows:
        raise RankDeficient(f"rank {rank} < {rows} rows")
    return Vh.conj().T @ ((U.conj().T @ r) / s)


def equilibrate(A):
    """Scale rows, then columns, of ``A`` to unit max-norm.

    Zero rows and columns are left untouched.  Rank is unchanged.
    """
    A = as_matrix(A).copy()
    if A.size == 0:
        return A
    rmax = np.max(np.abs(A), axis=1)
    rmax[rmax == 0] = 1.0
    A /= rmax[:, None]
    cmax = np.max(np.abs(A), axis=0)
    cmax[cmax == 0] = 1.0
    A /= cmax[None, :]
    return A


def point_gap(p, q):
    """Relative separation ``|p - q| / max(1, |p|, |q|)``."""
    return abs(p - q) / max(1.0, abs(p), abs(q))


def scaled_product(bases, powers=None):
    """Product of ``bases[i] ** powers[i]`` without intermediate over/underflow.

    The running product is renormalized to a mantissa and a power-of-two
    exponent after every factor; factors are taken in increasing order of
    modulus.  Negative powers divide.
    """
    bases = [complex(b) for b in bases]
    if powers is None:
        powers = [1] * len(bases)
    mant = 1.0 + 0.0j
    expo = 0
    order = sorted(range(len(bases)), key=lambda i: abs(bases[i]))
    for i in order:
        b, k = bases[i], int(powers[i])
        if k == 0:
            continue
        if b == 0:
            if k < 0:
                raise ZeroDivisionError("negative power of zero")
            return 0j
        bm, be = math.frexp(abs(b))
        unit = b / abs(b)
        # b = unit * bm * 2**be with 0.5 <= bm < 1
        step = 1 if k > 0 else -1
        for _ in range(abs(k)):
            if step > 0:
                mant *= unit * bm
                expo += be
            else:
                mant /= unit * bm
                expo -= be
            m, e = math.frexp(abs(mant))
            if e:
                mant = mant / abs(mant) * m
                expo += e
    return _ldexp_complex(mant, expo)


def _ldexp_complex(mant, expo):
    mag = abs(mant)
    if mag == 0:
        return 0j
    m, e = math.frexp(mag)
    total = e + expo
    if total > 1024:
        raise OverflowError("product overflows float64")
    if total < -1074:
        return 0j
    return (mant / mag) * math.ldexp(m, total)
