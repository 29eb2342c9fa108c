"""Shared generators for tests."""

import numpy as np

from rspin.residue_system import Configuration, StratumWeights


def random_weights(rng, g, max_parts=None):
    """Random composition of 2g - 2 into positive parts."""
    total = 2 * g - 2
    parts = []
    while total > 0:
        k = int(rng.integers(1, total + 1))
        parts.append(k)
        total -= k
        if max_parts and len(parts) == max_parts - 1 and total:
            parts.append(total)
            break
    return StratumWeights(tuple(parts), g)


def random_configuration(rng, w, radius=2.0, min_gap=0.3):
    """Well-separated random (x, y, z) in a disk."""
    pts = []
    need = 2 * w.g + w.n
    while len(pts) < need:
        p = complex(*rng.uniform(-radius, radius, 2))
        if all(abs(p - q) >= min_gap for q in pts):
            pts.append(p)
    g = w.g
    return Configuration(tuple(pts[:g]), tuple(pts[g:2 * g]), tuple(pts[2 * g:]))
