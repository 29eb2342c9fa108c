"""Rational nodal curves carrying an effective spin divisor.

A curve is a list of projective lines glued at pairs of points.  Each
component carries one rational 1-form; together they define a section of the
dualizing sheaf when every node preimage is a simple pole and the two
residues at each node cancel.  The builders produce wheels of lines whose
divisor ``D`` satisfies ``r D + sum m_i p_i = (eta)`` and ``h^0(D) = 1``.
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import (
    AuxiliarySolutionMismatch,
    BasisPoleAtNode,
    DisconnectedCurve,
    InvalidCaseData,
    InvalidCurve,
    InvalidInput,
    PreimageNotSimplePole,
    RSpinError,
)
from .numerics import DEFAULT_POLICY, point_gap
from .rational_forms import (
    FactoredRationalForm,
    complex_from_json,
    complex_to_json,
    divisor_degree_check,
    residue_simple,
)
from .spin_solver import SpinData, solve_d0

log = logging.getLogger(__name__)

WHEEL_A = 2.0 + 0j
MARKED_BASE = 3.0


@dataclass(frozen=True)
class Component:
    id: int
    label: str


@dataclass(frozen=True)
class CurvePoint:
    component: int
    point: complex

    def to_json(self):
        return {"component": self.component, "point": complex_to_json(self.point)}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["component"]), complex_from_json(data["point"]))


@dataclass(frozen=True)
class NodalCurve:
    """Components, nodes, marked points, divisor and one 1-form per component.

    ``nodes`` holds pairs of :class:`CurvePoint`; ``marked_points`` and
    ``divisor`` hold ``(CurvePoint, weight)`` pairs; ``forms`` maps component
    id to a :class:`FactoredRationalForm`.  Construction checks that all
    special points on a component are pairwise separated and that every
    component has exactly one form.  Connectivity is left to the certifier.
    """

    components: tuple
    nodes: tuple
    marked_points: tuple
    divisor: tuple
    forms: dict
    spin_data: SpinData = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise InvalidCurve("component ids are not unique")
        if set(self.forms) != set(ids):
            raise InvalidCurve("need exactly one form per component")
        known = set(ids)
        for pt in self.special_points():
            if pt.component not in known:
                raise InvalidCurve(f"point on unknown component {pt.component}")
        problems = disjointness_problems(self, DEFAULT_POLICY)
        if problems:
            raise InvalidCurve("; ".join(problems))

    def special_points(self):
        for a, b in self.nodes:
            yield a
            yield b
        for p, _ in self.marked_points:
            yield p
        for p, _ in self.divisor:
            yield p

    @property
    def r(self):
        if self.spin_data is None:
            raise InvalidInput("curve carries no spin data")
        return self.spin_data.r

    def to_json(self):
        return {
            "spin_data": None if self.spin_data is None else self.spin_data.to_json(),
            "components": [{"id": c.id, "label": c.label} for c in self.components],
            "nodes": [[a.to_json(), b.to_json()] for a, b in self.nodes],
            "marked_points": [{**p.to_json(), "weight": w} for p, w in self.marked_points],
            "divisor": [{**p.to_json(), "multiplicity": k} for p, k in self.divisor],
            "forms": [{"component": cid, **self.forms[cid].to_json()}
                      for cid in sorted(self.forms)],
            "meta": _jsonable(self.meta),
        }

    @classmethod
    def from_json(cls, data, pol=DEFAULT_POLICY):
        try:
            sd = data.get("spin_data")
            return cls(
                components=tuple(Component(int(c["id"]), str(c["label"])) for c in data["components"]),
                nodes=tuple((CurvePoint.from_json(a), CurvePoint.from_json(b)) for a, b in data["nodes"]),
                marked_points=tuple((CurvePoint.from_json(p), int(p["weight"]))
                                    for p in data["marked_points"]),
                divisor=tuple((CurvePoint.from_json(p), int(p["multiplicity"])) for p in data["divisor"]),
                forms={int(f["component"]): FactoredRationalForm.from_json(f, pol) for f in data["forms"]},
                spin_data=None if sd is None else SpinData.from_json(sd),
                meta=dict(data.get("meta") or {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidCurve(f"malformed curve JSON: {exc!r}") from exc


def _jsonable(meta):
    out = {}
    for key, value in meta.items():
        out[key] = complex_to_json(value) if isinstance(value, complex) else value
    return out


def disjointness_problems(curve, pol=DEFAULT_POLICY):
    by_comp = {}
    for kind, items in (("node", [a for pair in curve.nodes for a in pair]),
                        ("marked", [p for p, _ in curve.marked_points]),
                        ("divisor", [p for p, _ in curve.divisor])):
        for p in items:
            by_comp.setdefault(p.component, []).append((kind, p.point))
    problems = []
    for cid, pts in by_comp.items():
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                (k1, p), (k2, q) = pts[i], pts[j]
                if point_gap(p, q) < pol.distinct_margin:
                    problems.append(f"{k1} point {p} and {k2} point {q} collide on component {cid}")
    return problems


# ----------------------------------------------------------------------------
# builders


def _roots_of_unity(r):
    return [cmath.exp(2j * cmath.pi * j / r) for j in range(1, r + 1)]


def wheel_form(r, a=WHEEL_A, b=None):
    """``t^r dt / ((t^r - 1)(t - a)(t - b))`` with ``b = a * exp(2 pi i / r)``."""
    if b is None:
        b = a * cmath.exp(2j * cmath.pi / r)
    poles = [(z, 1) for z in _roots_of_unity(r)] + [(a, 1), (b, 1)]
    return FactoredRationalForm.build(zeros=[(0j, r)], poles=poles)


class _Builder:
    """Accumulates components and gluings of a wheel."""

    def __init__(self, sd):
        self.sd = sd
        self.components = []
        self.nodes = []
        self.marked = []
        self.divisor = []
        self.forms = {}

    def component(self, label, form):
        cid = len(self.components)
        self.components.append(Component(cid, label))
        self.forms[cid] = form
        return cid

    def glue(self, ca, pa, cb, pb):
        self.nodes.append((CurvePoint(ca, complex(pa)), CurvePoint(cb, complex(pb))))

    def curve(self, **meta):
        return NodalCurve(tuple(self.components), tuple(self.nodes), tuple(self.marked),
                          tuple(self.divisor), dict(self.forms), self.sd, meta)

    def wheel_pairs(self, pairs):
        """Add ``pairs`` couples ``(C_s, C'_s)`` with the a~b and zeta_j gluings."""
        r = self.sd.r
        R = wheel_form(r)
        zeta = _roots_of_unity(r)
        a = WHEEL_A
        b = a * cmath.exp(2j * cmath.pi / r)
        ids = []
        for s in range(1, pairs + 1):
            c = self.component(f"C_{s}", R)
            cp = self.component(f"C'_{s}", R.scaled(-1))
            ids.append((c, cp))
            self.glue(c, a, c, b)
            self.glue(cp, a, cp, b)
            for j in range(2, r + 1):
                self.glue(c, zeta[j - 1], cp, zeta[j - 1])
            self.divisor.append((CurvePoint(c, 0j), 1))
            self.divisor.append((CurvePoint(cp, 0j), 1))
        for s in range(pairs - 1):
            self.glue(ids[s][0], zeta[0], ids[s + 1][1], zeta[0])
        return ids, R


def build_case1(sd, pol=DEFAULT_POLICY):
    """Wheel of ``d/2`` pairs for ``d`` even and all weights zero."""
    if sd.d < 2 or sd.d % 2 or any(sd.m):
        raise InvalidCaseData(f"case 1 needs even d >= 2 and zero weights, got {sd}")
    bld = _Builder(sd)
    ids, _ = bld.wheel_pairs(sd.d // 2)
    zeta1 = _roots_of_unity(sd.r)[0]
    bld.glue(ids[-1][0], zeta1, ids[0][1], zeta1)
    for i, w in enumerate(sd.m):
        bld.marked.append((CurvePoint(ids[0][0], complex(MARKED_BASE + i)), w))
    return bld.curve(case="case1")


def _check_aux(aux, weights, genus, pol):
    c = aux.config
    if c.g != genus or len(c.z) != len(weights) or aux.p_roots:
        raise AuxiliarySolutionMismatch(
            f"auxiliary solution has g={c.g}, {len(c.z)} points; expected g={genus}, "
            f"{len(weights)} points")
    if not aux.cond1_residual <= pol.residual_tol:
        raise AuxiliarySolutionMismatch(f"auxiliary residual {aux.cond1_residual:.3g} too large")


def _core_form(c, weights, pol):
    return FactoredRationalForm.build(
        zeros=list(zip(c.z, weights)), poles=[(p, 1) for p in c.x + c.y], pol=pol)


def _attach_core(bld, ids, R, core, c, lam_index=0):
    """Glue the core component into the wheel; returns the scaling factor."""
    zeta1 = _roots_of_unity(bld.sd.r)[0]
    x1, y1 = c.x[lam_index], c.y[lam_index]
    lam = residue_simple(R, zeta1) / residue_simple(core, x1)
    form = core.scaled(lam)
    cid = bld.component("C_0", form)
    for j in range(c.g):
        if j != lam_index:
            bld.glue(cid, c.x[j], cid, c.y[j])
    bld.glue(ids[-1][0], zeta1, cid, y1)
    bld.glue(cid, x1, ids[0][1], zeta1)
    return cid, lam


def build_case2(sd, aux, pol=DEFAULT_POLICY):
    """Wheel of ``d/2`` pairs closed through a core carrying the marked points.

    ``aux`` solves the residue problem for weights ``m`` at genus
    ``sum(m)/2 + 1``; its form, rescaled to match the wheel at ``zeta_1``,
    lives on the core ``C_0``.
    """
    total = sum(sd.m)
    if sd.d < 2 or sd.d % 2 or total == 0:
        raise InvalidCaseData(f"case 2 needs even d >= 2 and positive weights, got {sd}")
    _check_aux(aux, sd.m, total // 2 + 1, pol)
    bld = _Builder(sd)
    ids, R = bld.wheel_pairs(sd.d // 2)
    c = aux.config
    core = _core_form(c, sd.m, pol)
    cid, lam = _attach_core(bld, ids, R, core, c)
    for zi, w in zip(c.z, sd.m):
        bld.marked.append((CurvePoint(cid, zi), w))
    return bld.curve(case="case2", scale=lam)


def build_case3(sd, aux, pol=DEFAULT_POLICY):
    """Odd ``d``: ``(d-1)/2`` pairs and a core with an extra zero of order ``r``.

    ``aux`` solves the residue problem for weights ``(r, m_1, ..., m_n)``; its
    first point becomes the divisor point of the core.  For ``d = 1`` there is
    no wheel and the core keeps all of its self-nodes.
    """
    if sd.d % 2 == 0:
        raise InvalidCaseData(f"case 3 needs odd d, got {sd}")
    weights = (sd.r,) + sd.m
    q = sum(weights)
    _check_aux(aux, weights, q // 2 + 1, pol)
    bld = _Builder(sd)
    c = aux.config
    core = _core_form(c, weights, pol)
    pairs = (sd.d - 1) // 2
    if pairs == 0:
        cid = bld.component("C_0", core)
        for j in range(c.g):
            bld.glue(cid, c.x[j], cid, c.y[j])
        lam = 1.0 + 0j
    else:
        ids, R = bld.wheel_pairs(pairs)
        cid, lam = _attach_core(bld, ids, R, core, c)
    bld.divisor.insert(0, (CurvePoint(cid, c.z[0]), 1))
    for zi, w in zip(c.z[1:], sd.m):
        bld.marked.append((CurvePoint(cid, zi), w))
    return bld.curve(case="case3", scale=lam)


def irreducible_curve(sd, config, p_roots=(), pol=DEFAULT_POLICY):
    """``P^1`` with ``x_j`` glued to ``y_j``, marked ``z_i`` and ``D`` = roots of ``P``."""
    if len(config.z) != sd.n or len(p_roots) != sd.d or config.g != sd.g:
        raise InvalidInput("solution does not match the spin data")
    form = FactoredRationalForm.build(
        zeros=list(zip(config.z, sd.m)) + [(q, sd.r) for q in p_roots],
        poles=[(p, 1) for p in config.x + config.y], pol=pol)
    bld = _Builder(sd)
    cid = bld.component("C_0", form)
    for xj, yj in zip(config.x, config.y):
        bld.glue(cid, xj, cid, yj)
    for zi, w in zip(config.z, sd.m):
        bld.marked.append((CurvePoint(cid, zi), w))
    roots = {}
    for q in p_roots:
        roots[complex(q)] = roots.get(complex(q), 0) + 1
    for q, k in roots.items():
        bld.divisor.append((CurvePoint(cid, q), k))
    return bld.curve(case="irreducible")


def build_nodal(sd, pol=DEFAULT_POLICY, seed=0, budget=8):
    """Pick the construction for ``sd`` and solve its auxiliary problem."""
    if sd.d == 0:
        sol = solve_d0(sd, pol, seed, budget)
        return irreducible_curve(sd, sol.config, (), pol)
    if sd.d % 2:
        weights = (sd.r,) + sd.m
        aux_sd = SpinData(sum(weights) // 2 + 1, sd.r, weights, 0)
        return build_case3(sd, solve_d0(aux_sd, pol, seed, budget), pol)
    if sum(sd.m) == 0:
        return build_case1(sd, pol)
    aux_sd = SpinData(sum(sd.m) // 2 + 1, sd.r, sd.m, 0)
    return build_case2(sd, solve_d0(aux_sd, pol, seed, budget), pol)


# ----------------------------------------------------------------------------
# checks


def _components_of(curve):
    parent = {c.id: c.id for c in curve.components}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in curve.nodes:
        ra, rb = find(a.component), find(b.component)
        if ra != rb:
            parent[ra] = rb
    return len({find(c) for c in parent})


def genus_check(curve, target):
    """Arithmetic genus ``#nodes - #components + 1`` of a connected curve."""
    if _components_of(curve) != 1:
        raise DisconnectedCurve("dual graph is disconnected")
    computed = len(curve.nodes) - len(curve.components) + 1
    return computed, computed == target


def node_residues(curve, pol=DEFAULT_POLICY):
    """Residues of the local forms at both preimages of every node."""
    out = []
    for a, b in curve.nodes:
        pair = []
        for p in (a, b):
            form = curve.forms[p.component]
            q = form.match_pole(p.point, pol)
            if q is None or dict(form.poles)[q] != 1:
                raise PreimageNotSimplePole(
                    f"node preimage {p.point} on component {p.component} is not a simple pole")
            pair.append(residue_simple(form, q))
        out.append(tuple(pair))
    return out


def residue_matching_check(curve, pol=DEFAULT_POLICY):
    """Worst relative residue sum ``|r1 + r2| / max(|r1|, |r2|)`` over nodes."""
    worst = 0.0
    for r1, r2 in node_residues(curve, pol):
        scale = max(abs(r1), abs(r2))
        worst = max(worst, abs(r1 + r2) / scale if scale > 0 else 0.0)
    return worst


def divisor_of_form_problems(curve, pol=DEFAULT_POLICY):
    r = curve.r
    problems = []
    for comp in curve.components:
        cid = comp.id
        form = curve.forms[cid]
        expected = []
        for p, k in curve.divisor:
            if p.component == cid and k:
                expected.append([p.point, r * k])
        for p, w in curve.marked_points:
            if p.component == cid and w:
                expected.append([p.point, w])
        merged = []
        for pt, k in expected:
            for e in merged:
                if point_gap(e[0], pt) < pol.distinct_margin:
                    e[1] += k
                    break
            else:
                merged.append([pt, k])
        zeros = list(form.zeros)
        if len(zeros) != len(merged):
            problems.append(f"{comp.label}: form has {len(zeros)} zeros, expected {len(merged)}")
        for pt, k in merged:
            q = form.match_zero(pt, pol)
            if q is None:
                problems.append(f"{comp.label}: no zero of the form at {pt}")
            elif dict(zeros)[q] != k:
                problems.append(f"{comp.label}: zero at {pt} has order {dict(zeros)[q]}, expected {k}")
        preimages = [p.point for pair in curve.nodes for p in pair if p.component == cid]
        if len(preimages) != len(form.poles):
            problems.append(f"{comp.label}: {len(form.poles)} poles but {len(preimages)} node branches")
        for pt in preimages:
            if form.match_pole(pt, pol) is None:
                problems.append(f"{comp.label}: node branch {pt} is not a pole")
        for q, k in form.poles:
            if k != 1:
                problems.append(f"{comp.label}: pole at {q} has order {k}")
            if not any(point_gap(q, pt) < pol.distinct_margin for pt in preimages):
                problems.append(f"{comp.label}: pole at {q} is not a node branch")
        if not divisor_degree_check(form):
            problems.append(f"{comp.label}: form has a zero or pole at infinity")
    return problems


def divisor_of_form_check(curve, pol=DEFAULT_POLICY):
    return not divisor_of_form_problems(curve, pol)


def h0_matrix(curve, pol=DEFAULT_POLICY):
    """Gluing constraints on sections of ``O(D)``.

    On a component whose divisor points are ``q`` with multiplicity ``k`` the
    sections are spanned by ``1`` and ``(t - q)^-l``, ``l = 1..k``.  Each node
    asks the values at its two branches to agree.
    """
    basis = []
    offsets = {}
    for comp in curve.components:
        offsets[comp.id] = len(basis)
        basis.append((comp.id, None, 0))
        for p, k in curve.divisor:
            if p.component == comp.id:
                basis.extend((comp.id, p.point, l) for l in range(1, k + 1))

    def values(cp):
        row = np.zeros(len(basis), dtype=complex)
        for idx, (cid, q, l) in enumerate(basis):
            if cid != cp.component:
                continue
            if q is None:
                row[idx] = 1.0
            else:
                if point_gap(cp.point, q) < pol.distinct_margin:
                    raise BasisPoleAtNode(f"divisor point {q} is a node branch")
                row[idx] = (cp.point - q) ** (-l)
        return row

    rows = [values(a) - values(b) for a, b in curve.nodes]
    return np.array(rows, dtype=complex).reshape(len(rows), len(basis))


def h0_check(curve, pol=DEFAULT_POLICY):
    M = h0_matrix(curve, pol)
    unknowns = M.shape[1]
    if M.shape[0] == 0:
        return unknowns
    rank, _ = numerics.numeric_rank(numerics.equilibrate(M), pol)
    return unknowns - rank


@dataclass
class NodalCertificate:
    genus_computed: int
    genus_target: int
    max_node_residual: float
    divisor_ok: bool
    h0_dimension: int
    disjointness_ok: bool
    reasons: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.reasons

    @property
    def reason_codes(self):
        return sorted({code for code, _ in self.reasons})

    def to_json(self):
        return {
            "genus_computed": self.genus_computed,
            "genus_target": self.genus_target,
            "max_node_residual": self.max_node_residual if np.isfinite(self.max_node_residual) else None,
            "divisor_ok": self.divisor_ok,
            "h0_dimension": self.h0_dimension,
            "disjointness_ok": self.disjointness_ok,
            "verdict": "pass" if self.passed else "fail",
            "reasons": [{"code": code, "detail": detail} for code, detail in self.reasons],
        }


def certify(curve, sd=None, pol=DEFAULT_POLICY):
    """Run every check and collect all failures; never raises on bad curves."""
    sd = curve.spin_data if sd is None else sd
    reasons = []

    genus = -1
    try:
        genus, ok = genus_check(curve, sd.g)
        if not ok:
            reasons.append(("genus", f"arithmetic genus {genus} != {sd.g}"))
    except DisconnectedCurve as exc:
        reasons.append(("genus", str(exc)))

    residual = float("inf")
    try:
        residual = residue_matching_check(curve, pol)
        if not residual <= pol.residual_tol:
            reasons.append(("residue_matching", f"node residual {residual:.3g}"))
    except PreimageNotSimplePole as exc:
        reasons.append(("residue_matching", str(exc)))

    try:
        div_problems = divisor_of_form_problems(curve, pol)
    except RSpinError as exc:
        div_problems = [str(exc)]
    for p in div_problems:
        reasons.append(("divisor", p))

    degree = sum(k for _, k in curve.divisor)
    weights = sorted(w for _, w in curve.marked_points)
    if degree != sd.d or weights != sorted(sd.m):
        reasons.append(("data", f"curve has deg D = {degree}, weights {weights}; "
                                f"expected d = {sd.d}, weights {sorted(sd.m)}"))

    h0 = -1
    try:
        h0 = h0_check(curve, pol)
        if h0 != 1:
            reasons.append(("h0", f"h0(D) = {h0}"))
    except BasisPoleAtNode as exc:
        reasons.append(("h0", str(exc)))

    dis = disjointness_problems(curve, pol)
    for p in dis:
        reasons.append(("disjointness", p))

    return NodalCertificate(genus, sd.g, residual, not div_problems, h0, not dis, reasons)
