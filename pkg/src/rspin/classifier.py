"""Connected components of moduli of effective r-spin curves.

The components of the space for ``(g, r, m)`` correspond to those of the
stratum of abelian differentials ``H(r, ..., r, m_1, ..., m_n)`` with ``r``
repeated ``d`` times, and the counts below are the resulting case tables for
``g = 2``, ``g = 3`` and ``g >= 4``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OutsideClassificationTable


@dataclass(frozen=True)
class ClassificationVerdict:
    count: int
    case_label: str
    stratum: tuple
    dimension: int

    def to_json(self):
        return {
            "count": self.count,
            "case_label": self.case_label,
            "stratum": list(self.stratum),
            "dimension": self.dimension,
        }


def stratum_signature(sd):
    """Zero orders of the associated differential: ``d`` copies of ``r``, then ``m``."""
    return (sd.r,) * sd.d + tuple(sd.m)


def dimension(sd):
    return 2 * sd.g - 2 + sd.d + sd.n


def _genus3_label(r, m):
    n = len(m)
    if m == (4,):
        return "C2-i"
    if m == (2, 2):
        return "C2-ii"
    if r == 4 and n == 0:
        return "C2-iii"
    if r == 2 and m == (2,):
        return "C2-iv"
    if r == 2 and n == 0:
        return "C2-v"
    return None


def _three_components(g, r, m):
    n = len(m)
    odd = g % 2 == 1
    if n == 1 and m[0] == 2 * g - 2:
        return "C1-i"
    if n == 2 and m[0] == m[1] == g - 1 and odd:
        return "C1-ii"
    if r == 2 * g - 2 and n == 0:
        return "C1-iii"
    if r == g - 1 and n == 1 and m[0] == g - 1 and odd:
        return "C1-iv"
    if r == g - 1 and n == 0 and odd:
        return "C1-v"
    return None


def _two_components(g, r, m, d):
    n = len(m)
    even_g = g % 2 == 0
    if r % 2 == 0 and all(v % 2 == 0 for v in m):
        return "C1-even"
    if d == 0 and all(v % 2 == 0 for v in m):
        return "C1-even-d0"
    if n == 2 and m[0] == m[1] == g - 1 and even_g:
        return "C1-a"
    if r == g - 1 and n == 1 and m[0] == g - 1 and even_g:
        return "C1-b"
    if r == g - 1 and n == 0 and even_g:
        return "C1-c"
    return None


def classify(sd):
    """Number of connected components, with the matching case label.

    Three-component cases are tested before the parity cases, since some
    data (for instance ``m = (g-1, g-1)`` with ``g`` odd) satisfy both.
    """
    g, r, m = sd.g, sd.r, tuple(sd.m)
    if g < 2:
        raise OutsideClassificationTable(f"no component table for g = {g}")
    stratum = stratum_signature(sd)
    dim = dimension(sd)
    if g == 2:
        return ClassificationVerdict(1, "C2-g2", stratum, dim)
    if g == 3:
        label = _genus3_label(r, m)
        if label:
            return ClassificationVerdict(2, label, stratum, dim)
        return ClassificationVerdict(1, "generic-connected", stratum, dim)
    label = _three_components(g, r, m)
    if label:
        return ClassificationVerdict(3, label, stratum, dim)
    label = _two_components(g, r, m, sd.d)
    if label:
        return ClassificationVerdict(2, label, stratum, dim)
    return ClassificationVerdict(1, "generic-connected", stratum, dim)
