"""Factored rational 1-forms on the projective line.

A form is stored as ``scale * prod (t - z)**m / prod (t - p)**k  dt`` and is
never expanded into polynomial coefficients.  Residues are computed from the
factored data: simple poles by the closed product formula, higher-order poles
and the point at infinity by a Taylor recurrence on the logarithmic
derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFactor, EvaluationAtPole, InvalidInput, NotAPole, NotASimplePole
from .numerics import DEFAULT_POLICY, point_gap, scaled_product


def _merge(points):
    """Merge exactly repeated points, summing their multiplicities."""
    merged = {}
    for p, k in points:
        p = complex(p)
        k = int(k)
        if k < 0:
            raise InvalidInput(f"negative multiplicity {k}")
        if k == 0:
            continue
        merged[p] = merged.get(p, 0) + k
    return tuple(merged.items())


@dataclass(frozen=True)
class FactoredRationalForm:
    """The 1-form ``scale * prod(t - z_i)^m_i / prod(t - p_j)^k_j dt``.

    Use :meth:`build` to construct from possibly repeated points; the
    constructor itself expects already-merged tuples.
    """

    scale: complex
    zeros: tuple
    poles: tuple

    @classmethod
    def build(cls, zeros=(), poles=(), scale=1.0, pol=DEFAULT_POLICY):
        """Merge exact repeats and reject near-coincident factor points.

        Raises ``DegenerateFactor`` when two distinct points are closer than
        ``pol.distinct_margin`` (relative), or when a zero meets a pole.
        """
        zeros = _merge(zeros)
        poles = _merge(poles)
        scale = complex(scale)
        if scale == 0 or not np.isfinite(scale):
            raise InvalidInput("scale must be finite and nonzero")
        pts = [(p, "zero") for p, _ in zeros] + [(p, "pole") for p, _ in poles]
        for p, _ in pts:
            if not np.isfinite(p):
                raise InvalidInput(f"non-finite factor point {p}")
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                (p, kp), (q, kq) = pts[i], pts[j]
                if point_gap(p, q) < pol.distinct_margin:
                    raise DegenerateFactor(f"{kp} {p} and {kq} {q} are not separated")
        return cls(scale, zeros, poles)

    @property
    def zero_degree(self):
        return sum(m for _, m in self.zeros)

    @property
    def pole_degree(self):
        return sum(k for _, k in self.poles)

    def pole_order(self, p, pol=DEFAULT_POLICY):
        """Order of the pole at (a point matching) ``p``, or 0."""
        q = self.match_pole(p, pol)
        return 0 if q is None else dict(self.poles)[q]

    def match_pole(self, p, pol=DEFAULT_POLICY):
        for q, _ in self.poles:
            if point_gap(p, q) < pol.distinct_margin:
                return q
        return None

    def match_zero(self, p, pol=DEFAULT_POLICY):
        for q, _ in self.zeros:
            if point_gap(p, q) < pol.distinct_margin:
                return q
        return None

    def scaled(self, factor):
        return FactoredRationalForm(self.scale * complex(factor), self.zeros, self.poles)

    def pullback_affine(self, alpha, beta):
        """Pull back along ``t = alpha * s + beta``."""
        alpha = complex(alpha)
        beta = complex(beta)
        if alpha == 0:
            raise InvalidInput("alpha must be nonzero")
        zeros = tuple(((p - beta) / alpha, m) for p, m in self.zeros)
        poles = tuple(((p - beta) / alpha, k) for p, k in self.poles)
        scale = self.scale * alpha ** (self.zero_degree - self.pole_degree + 1)
        return FactoredRationalForm(scale, zeros, poles)

    def to_json(self):
        return {
            "scale": complex_to_json(self.scale),
            "zeros": [[complex_to_json(p), m] for p, m in self.zeros],
            "poles": [[complex_to_json(p), k] for p, k in self.poles],
        }

    @classmethod
    def from_json(cls, data, pol=DEFAULT_POLICY):
        return cls.build(
            zeros=[(complex_from_json(p), m) for p, m in data["zeros"]],
            poles=[(complex_from_json(p), k) for p, k in data["poles"]],
            scale=complex_from_json(data["scale"]),
            pol=pol,
        )


def complex_to_json(z):
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise InvalidInput(f"complex numbers serialize as [re, im], got {v!r}")
    return complex(float(v[0]), float(v[1]))


def evaluate(f, t):
    """Value of the coefficient function of ``f`` at ``t``."""
    t = complex(t)
    for p, _ in f.poles:
        if t == p:
            raise EvaluationAtPole(f"t = {t} is a pole")
    bases = [f.scale] + [t - z for z, _ in f.zeros] + [t - p for p, _ in f.poles]
    powers = [1] + [m for _, m in f.zeros] + [-k for _, k in f.poles]
    return scaled_product(bases, powers)


def _find_pole(f, p):
    p = complex(p)
    for q, k in f.poles:
        if q == p:
            return q, k
    raise NotAPole(f"{p} is not a pole of the form")


def residue_simple(f, p):
    """Residue at a simple pole, by the closed product formula."""
    q, k = _find_pole(f, p)
    if k != 1:
        raise NotASimplePole(f"pole at {q} has order {k}")
    bases = [f.scale] + [q - z for z, _ in f.zeros] + [q - s for s, _ in f.poles if s != q]
    powers = [1] + [m for _, m in f.zeros] + [-o for s, o in f.poles if s != q]
    return scaled_product(bases, powers)


def _taylor_from_logderivative(a0, ell, n_terms):
    """Coefficients ``a_n`` of ``h`` from ``h(0) = a0`` and ``h'/h = sum ell_n u^n``."""
    a = [complex(a0)]
    for n in range(n_terms - 1):
        acc = sum(a[i] * ell[n - i] for i in range(n + 1))
        a.append(acc / (n + 1))
    return a


def residue_general(f, p):
    """Residue at a pole of any order.

    With ``h = (t - p)^k f`` the residue is the ``(k-1)``-th Taylor coefficient
    of ``h`` at ``p``; the coefficients follow from ``h' = h * (log h)'``, whose
    expansion is an explicit geometric series in each factor.
    """
    q, k = _find_pole(f, p)
    others_z = list(f.zeros)
    others_p = [(s, o) for s, o in f.poles if s != q]
    bases = [f.scale] + [q - z for z, _ in others_z] + [q - s for s, _ in others_p]
    powers = [1] + [m for _, m in others_z] + [-o for _, o in others_p]
    h0 = scaled_product(bases, powers)
    if k == 1:
        return h0
    ell = []
    for n in range(k - 1):
        sign = (-1) ** n
        term = sum(m * sign / (q - z) ** (n + 1) for z, m in others_z)
        term -= sum(o * sign / (q - s) ** (n + 1) for s, o in others_p)
        ell.append(term)
    return _taylor_from_logderivative(h0, ell, k)[k - 1]


def residue_at_infinity(f):
    """Residue of ``f`` at infinity (``-`` the ``1/t`` coefficient at infinity)."""
    gap = f.zero_degree - f.pole_degree
    n = gap + 1
    if n < 0:
        return 0j
    # f = scale * t**gap * g(1/t),  g(w) = prod(1 - z w)^m / prod(1 - p w)^k
    ell = []
    for j in range(n):
        term = -sum(m * z ** (j + 1) for z, m in f.zeros)
        term += sum(k * p ** (j + 1) for p, k in f.poles)
        ell.append(term)
    b = _taylor_from_logderivative(1.0, ell, n + 1)
    return -f.scale * b[n]


def residues(f):
    """All finite residues as a list of ``(pole, residue)`` pairs."""
    return [(p, residue_general(f, p)) for p, _ in f.poles]


def divisor_degree_check(f):
    """True when the form has neither zero nor pole at infinity."""
    return f.zero_degree - f.pole_degree == -2
