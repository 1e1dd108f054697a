"""Measures of curves and nearly regular pants, with their boundary operators.

Weights are exact rationals so every operator identity (Tot o footed = plain
boundary, Net o boundary = net boundary, linearity) holds exactly; geometric
coordinates (torus points, half lengths) stay floating point.

Visual torus convention: each *oriented* curve carries its own flat chart
z = s + i theta on C modulo the lattice spanned by (length + i phase) and
2 pi i, in which the shear action is z -> z + zeta.  The flip onto the
reversed curve's chart is z -> i(phase - pi) - z; it is an involution and
intertwines shears by A_zeta -> A_{-zeta}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Generic, Hashable, Iterable, Iterator, Mapping, TypeVar

from .errors import (
    DomainError,
    IncompleteSceneError,
    MixedSupportError,
    UnknownPantsError,
)

TWO_PI = 2.0 * math.pi

K = TypeVar("K", bound=Hashable)


# ---------------------------------------------------------------------------
# keys


@dataclass(frozen=True, order=True)
class Curve:
    """Oriented curve reference: class name plus orientation flag."""

    name: str
    positive: bool = True

    def bar(self) -> "Curve":
        return Curve(self.name, not self.positive)

    def token(self) -> str:
        return self.name if self.positive else self.name + "-"

    def __repr__(self):
        return self.token()


@dataclass(frozen=True, order=True)
class UnorientedCurve:
    name: str

    def __repr__(self):
        return f"|{self.name}|"


@dataclass(frozen=True, order=True)
class TorusPoint:
    """Point (s, theta) of the visual torus of an oriented curve."""

    curve: Curve
    s: float
    theta: float


class VisualTorus:
    """Flat chart of the unit normal bundle over one oriented curve."""

    def __init__(self, curve: Curve, length: float, phase: float):
        if not length > 0:
            raise DomainError("curve length must be positive")
        self.curve = curve
        self.length = float(length)
        self.phase = float(phase)

    def reduce(self, z: complex) -> complex:
        """Representative with s in [0, length) and theta in [0, 2 pi)."""
        k = math.floor(z.real / self.length)
        z -= k * complex(self.length, self.phase)
        return complex(z.real, z.imag % TWO_PI)

    def point(self, z: complex) -> TorusPoint:
        """Canonical quantized point: stable dict keys for coincident atoms.

        Coordinates are snapped to 1e-12, far below any geometric tolerance in
        use, so atoms produced by different arithmetic routes coincide.
        """
        z = self.reduce(z)
        s = round(z.real, 12)
        th = z.imag
        if s >= round(self.length, 12):
            s = 0.0
            th = (th - self.phase) % TWO_PI
        th = round(th, 12)
        if th >= round(TWO_PI, 12):
            th = 0.0
        return TorusPoint(self.curve, s + 0.0, th + 0.0)

    def coord(self, p: TorusPoint) -> complex:
        return complex(p.s, p.theta)

    def dist(self, a: complex, b: complex) -> float:
        d = self.reduce(a) - self.reduce(b)
        best = math.inf
        for k in (-1, 0, 1):
            w = d - k * complex(self.length, self.phase)
            im = math.remainder(w.imag, TWO_PI)
            best = min(best, math.hypot(w.real, im))
        return best

    def shift(self, z: complex, zeta: complex) -> complex:
        return self.reduce(z + zeta)

    def pairs_within(self, zs1: list[complex], zs2: list[complex], delta: float):
        """Index pairs (i, j) with torus distance <= delta, vectorized."""
        import numpy as np

        a = np.array([self.reduce(z) for z in zs1], dtype=complex).reshape(-1, 1)
        b = np.array([self.reduce(z) for z in zs2], dtype=complex).reshape(1, -1)
        diff = a - b
        best = np.full(diff.shape, np.inf)
        for k in (-1, 0, 1):
            w = diff - k * complex(self.length, self.phase)
            im = np.remainder(w.imag + math.pi, TWO_PI) - math.pi
            best = np.minimum(best, np.hypot(w.real, im))
        ii, jj = np.nonzero(best <= delta)
        return list(zip(ii.tolist(), jj.tolist()))

    def bar_torus(self) -> "VisualTorus":
        return VisualTorus(self.curve.bar(), self.length, self.phase)

    def bar_coord(self, z: complex) -> complex:
        """Chart coordinate, on the reversed curve's torus, of the flipped vector."""
        return self.bar_torus().reduce(complex(0.0, self.phase - math.pi) - z)


# ---------------------------------------------------------------------------
# measures


class Measure(Generic[K]):
    """Finitely supported measure with positive rational weights."""

    __slots__ = ("_atoms",)

    def __init__(self, atoms: Mapping[K, Fraction] | Iterable[tuple[K, Fraction]] = ()):
        items = atoms.items() if isinstance(atoms, Mapping) else atoms
        acc: dict[K, Fraction] = {}
        for key, w in items:
            w = Fraction(w)
            if w < 0:
                raise DomainError(f"negative weight {w} at {key!r}")
            if w > 0:
                acc[key] = acc.get(key, Fraction(0)) + w
        self._atoms = {k: w for k, w in acc.items() if w > 0}

    # mapping-ish interface -------------------------------------------------
    def __getitem__(self, key: K) -> Fraction:
        return self._atoms.get(key, Fraction(0))

    def __iter__(self) -> Iterator[K]:
        return iter(self._atoms)

    def __len__(self) -> int:
        return len(self._atoms)

    def __contains__(self, key: K) -> bool:
        return key in self._atoms

    def items(self):
        return self._atoms.items()

    def support(self) -> set[K]:
        return set(self._atoms)

    def total(self) -> Fraction:
        return sum(self._atoms.values(), Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, Measure) and self._atoms == other._atoms

    def __hash__(self):
        raise TypeError("measures are not hashable")

    def __repr__(self):
        inner = ", ".join(f"{k!r}: {w}" for k, w in sorted(self._atoms.items(), key=repr))
        return f"Measure({{{inner}}})"

    # algebra ----------------------------------------------------------------
    def __add__(self, other: "Measure[K]") -> "Measure[K]":
        acc = dict(self._atoms)
        for k, w in other.items():
            acc[k] = acc.get(k, Fraction(0)) + w
        return Measure(acc)

    def scale(self, c: Fraction | int) -> "Measure[K]":
        c = Fraction(c)
        return Measure({k: w * c for k, w in self._atoms.items()})

    def normalized(self) -> "Measure[K]":
        t = self.total()
        if t == 0:
            raise DomainError("cannot normalize the zero measure")
        return self.scale(Fraction(1, 1) / t)

    def map_keys(self, f) -> "Measure":
        return Measure((f(k), w) for k, w in self._atoms.items())


# ---------------------------------------------------------------------------
# pants data


@dataclass(frozen=True)
class CuffDatum:
    """One cuff of a pants: curve, complex half length, ordered feet."""

    curve: Curve
    half_length: complex | None = None
    feet: tuple[complex, complex] | None = None  # chart coordinates on the cuff's torus


@dataclass(frozen=True)
class PantsDatum:
    name: str
    cuffs: tuple[CuffDatum, CuffDatum, CuffDatum]

    def curve_multiplicity(self, curve: Curve) -> int:
        return sum(1 for c in self.cuffs if c.curve == curve)


class Scene:
    """Finite universe of curves and pants an operation runs against.

    `curves` maps class names to (length, phase) of the positive orientation;
    `pants` maps pants names to data.  The curve and pants lists are the full
    finite sets for the constants the scene was generated at.
    """

    def __init__(
        self,
        curves: Mapping[str, tuple[float, float]],
        pants: Mapping[str, PantsDatum],
        constants: Mapping[str, float] | None = None,
    ):
        self.curve_data = dict(curves)
        self.pants = dict(pants)
        self.constants = dict(constants or {})
        for p in self.pants.values():
            for cuff in p.cuffs:
                if cuff.curve.name not in self.curve_data:
                    raise IncompleteSceneError(
                        f"pants {p.name} references unknown curve {cuff.curve.name}"
                    )

    def curves(self) -> list[Curve]:
        out = []
        for name in sorted(self.curve_data):
            out.append(Curve(name, True))
            out.append(Curve(name, False))
        return out

    def torus(self, curve: Curve) -> VisualTorus:
        if curve.name not in self.curve_data:
            raise IncompleteSceneError(f"unknown curve {curve.name}")
        length, phase = self.curve_data[curve.name]
        return VisualTorus(curve, length, phase)

    def datum(self, name: str) -> PantsDatum:
        try:
            return self.pants[name]
        except KeyError:
            raise UnknownPantsError(f"unknown pants {name!r}") from None


# ---------------------------------------------------------------------------
# boundary operators


def boundary(mu: Measure[str], scene: Scene) -> Measure[Curve]:
    """Sum of the three cuffs of each pants, with multiplicity."""
    atoms: list[tuple[Curve, Fraction]] = []
    for name, w in mu.items():
        for cuff in scene.datum(name).cuffs:
            atoms.append((cuff.curve, w))
    return Measure(atoms)


def footed_boundary(mu: Measure[str], scene: Scene) -> Measure[TorusPoint]:
    """Half the sum of the six feet of each pants (total mass 1 per cuff)."""
    atoms: list[tuple[TorusPoint, Fraction]] = []
    half = Fraction(1, 2)
    for name, w in mu.items():
        for cuff in scene.datum(name).cuffs:
            if cuff.feet is None:
                raise IncompleteSceneError(f"pants {name} lacks feet on {cuff.curve}")
            torus = scene.torus(cuff.curve)
            for z in cuff.feet:
                atoms.append((torus.point(z), w * half))
    return Measure(atoms)


def totalize(nu: Measure[TorusPoint]) -> Measure[Curve]:
    """Componentwise total mass per visual torus."""
    return nu.map_keys(lambda p: p.curve)


def bar_measure(mu: Measure[Curve]) -> Measure[Curve]:
    return mu.map_keys(lambda c: c.bar())


def net_reduce(mu: Measure[Curve]) -> Measure[UnorientedCurve]:
    """Uncancelled part |mu - bar mu| collapsed onto unoriented classes.

    The class mass is |mu(c) - mu(bar c)|, the measure of the two-element set
    {c, bar c} under the symmetric representation (half that value on each
    orientation).
    """
    atoms: list[tuple[UnorientedCurve, Fraction]] = []
    for name in {c.name for c in mu.support()}:
        diff = abs(mu[Curve(name, True)] - mu[Curve(name, False)])
        if diff > 0:
            atoms.append((UnorientedCurve(name), diff))
    return Measure(atoms)


def net_boundary(mu: Measure[str], scene: Scene) -> Measure[UnorientedCurve]:
    return net_reduce(boundary(mu, scene))


def as_symmetric_oriented(nu: Measure[UnorientedCurve]) -> Measure[Curve]:
    """Symmetric oriented representation: half the class mass per orientation."""
    atoms: list[tuple[Curve, Fraction]] = []
    for k, w in nu.items():
        atoms.append((Curve(k.name, True), w / 2))
        atoms.append((Curve(k.name, False), w / 2))
    return Measure(atoms)


# ---------------------------------------------------------------------------
# torus shear and flip on measures


def _single_torus(nu: Measure[TorusPoint], scene: Scene) -> VisualTorus:
    curves = {p.curve for p in nu.support()}
    if len(curves) != 1:
        raise MixedSupportError(f"measure supported on {len(curves)} tori, expected 1")
    return scene.torus(next(iter(curves)))


def torus_shear(nu: Measure[TorusPoint], zeta: complex, scene: Scene) -> Measure[TorusPoint]:
    """Pushforward under the shear z -> z + zeta on a single visual torus."""
    torus = _single_torus(nu, scene)
    return nu.map_keys(lambda p: torus.point(torus.coord(p) + zeta))


def torus_bar(nu: Measure[TorusPoint], scene: Scene) -> Measure[TorusPoint]:
    """Pushforward under the flip onto the reversed curve's torus."""
    torus = _single_torus(nu, scene)
    target = torus.bar_torus()
    return nu.map_keys(lambda p: target.point(torus.bar_coord(torus.coord(p))))


def unit_shear_target(nu: Measure[TorusPoint], scene: Scene) -> Measure[TorusPoint]:
    """Model gluing image: flip composed with the unit shear."""
    return torus_bar(torus_shear(nu, 1.0 + 0.0j, scene), scene)


# ---------------------------------------------------------------------------
# delta-equivalence (exact transportation feasibility)


def _maxflow(capacities_s, capacities_t, edges, n_left, n_right) -> int:
    """Dinic max flow on source -> left -> right -> sink with integer caps."""
    size = n_left + n_right + 2
    source, sink = size - 2, size - 1
    graph: list[list[int]] = [[] for _ in range(size)]
    cap: list[int] = []
    to: list[int] = []

    def add_edge(u, v, c):
        graph[u].append(len(cap)); to.append(v); cap.append(c)
        graph[v].append(len(cap)); to.append(u); cap.append(0)

    for i, c in enumerate(capacities_s):
        add_edge(source, i, c)
    for j, c in enumerate(capacities_t):
        add_edge(n_left + j, sink, c)
    big = sum(capacities_s) + 1
    for i, j in edges:
        add_edge(i, n_left + j, big)

    flow = 0
    while True:
        level = [-1] * size
        level[source] = 0
        queue = [source]
        for u in queue:
            for eid in graph[u]:
                v = to[eid]
                if cap[eid] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[sink] < 0:
            return flow
        it = [0] * size

        def dfs(u, pushed):
            if u == sink:
                return pushed
            while it[u] < len(graph[u]):
                eid = graph[u][it[u]]
                v = to[eid]
                if cap[eid] > 0 and level[v] == level[u] + 1:
                    got = dfs(v, min(pushed, cap[eid]))
                    if got:
                        cap[eid] -= got
                        cap[eid ^ 1] += got
                        return got
                it[u] += 1
            return 0

        while True:
            pushed = dfs(source, big)
            if not pushed:
                break
            flow += pushed


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def delta_equivalent_atoms(
    atoms1: list[tuple[complex, Fraction]],
    atoms2: list[tuple[complex, Fraction]],
    delta: float,
    torus: VisualTorus,
) -> bool:
    """Exact equal-total transportation feasibility along arcs of length <= delta."""
    t1 = sum((w for _, w in atoms1), Fraction(0))
    t2 = sum((w for _, w in atoms2), Fraction(0))
    if t1 != t2:
        return False
    if t1 == 0:
        return True
    denom = 1
    for _, w in atoms1 + atoms2:
        denom = _lcm(denom, w.denominator)
    caps1 = [int(w * denom) for _, w in atoms1]
    caps2 = [int(w * denom) for _, w in atoms2]
    edges = torus.pairs_within([z for z, _ in atoms1], [z for z, _ in atoms2], delta)
    return _maxflow(caps1, caps2, edges, len(atoms1), len(atoms2)) == int(t1 * denom)


def delta_equivalent(
    nu1: Measure[TorusPoint], nu2: Measure[TorusPoint], delta: float, scene: Scene
) -> bool:
    """Both measures dominate each other within delta-neighborhoods.

    Decided exactly over the rationals as feasibility of the transportation
    problem whose arcs join atoms at torus distance <= delta (with equal
    totals, the one-sided Hall condition is already symmetric).
    """
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    support = {p.curve for p in nu1.support()} | {p.curve for p in nu2.support()}
    if len(support) > 1:
        raise MixedSupportError("measures live on different tori")
    if not support:
        return True
    torus = scene.torus(next(iter(support)))
    a1 = [(torus.coord(p), w) for p, w in nu1.items()]
    a2 = [(torus.coord(p), w) for p, w in nu2.items()]
    return delta_equivalent_atoms(a1, a2, delta, torus)


# ---------------------------------------------------------------------------
# gluing-condition flags


@dataclass(frozen=True)
class GluingFlags:
    ubiquitous: bool
    irreducible: bool
    nearly_evenly_footed: bool | None  # None: not certified either way
    rich: bool


def support_adjacency_components(mu: Measure[str], scene: Scene) -> list[set[str]]:
    """Components of the support graph: edge when a cuff's reversal is a cuff."""
    names = sorted(mu.support())
    cuffsets = {n: {c.curve for c in scene.datum(n).cuffs} for n in names}
    parent = {n: n for n in names}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if any(c.bar() in cuffsets[b] for c in cuffsets[a]):
                parent[find(a)] = find(b)
    comps: dict[str, set[str]] = {}
    for n in names:
        comps.setdefault(find(n), set()).add(n)
    return list(comps.values())


def is_irreducible(mu: Measure[str], scene: Scene) -> bool:
    comps = support_adjacency_components(mu, scene)
    if len(comps) != 1:
        return False
    if sum(len(c) for c in comps) == 1:
        # a singleton support needs a self-adjacency (a cuff pair c, bar c)
        name = next(iter(mu.support()))
        cuffs = {c.curve for c in scene.datum(name).cuffs}
        return any(c.bar() in cuffs for c in cuffs)
    return True


def is_rich(mu: Measure[str], scene: Scene, ratio: Fraction = Fraction(1, 5)) -> bool:
    """Net boundary at most `ratio` of the total class boundary, per class."""
    bd = boundary(mu, scene)
    for name in {c.name for c in bd.support()}:
        m_pos = bd[Curve(name, True)]
        m_neg = bd[Curve(name, False)]
        if abs(m_pos - m_neg) > ratio * (m_pos + m_neg):
            return False
    return True


def lebesgue_grid(torus: VisualTorus, cell_diameter: float) -> list[tuple[complex, Fraction]]:
    """Uniform grid with equal atom masses approximating normalized Lebesgue."""
    side = cell_diameter / math.sqrt(2.0)
    ns = max(1, math.ceil(torus.length / side))
    nt = max(1, math.ceil(TWO_PI / side))
    w = Fraction(1, ns * nt)
    ds, dt = torus.length / ns, TWO_PI / nt
    return [
        (complex((i + 0.5) * ds, (j + 0.5) * dt), w)
        for i in range(ns)
        for j in range(nt)
    ]


def evenly_footed_certificate(
    nu: Measure[TorusPoint], torus: VisualTorus, tol: float
) -> bool | None:
    """Sandwich test of tol-equivalence to normalized Lebesgue.

    Discretizes Lebesgue to a grid of cell diameter <= tol/10 and tests
    atomically at tol -/+ that diameter: True and False are certified, None is
    the indeterminate band.
    """
    if nu.total() == 0:
        return False
    diam = tol / 10.0
    grid = lebesgue_grid(torus, diam)
    atoms = [(torus.coord(p), w) for p, w in nu.normalized().items()]
    if delta_equivalent_atoms(atoms, grid, tol - diam, torus):
        return True
    if not delta_equivalent_atoms(atoms, grid, tol + diam, torus):
        return False
    return None


def classify(
    mu: Measure[str],
    R: float,
    epsilon: float,
    scene: Scene,
    rich_ratio: Fraction = Fraction(1, 5),
) -> GluingFlags:
    """Gluing-condition flags of a pants measure against the scene's universe."""
    if not scene.pants or not scene.curve_data:
        raise IncompleteSceneError("scene must enumerate its curve and pants sets")
    bd = boundary(mu, scene)
    ubiquitous = all(mu[name] > 0 for name in scene.pants) and all(
        bd[c] > 0 for c in scene.curves()
    )
    irreducible = is_irreducible(mu, scene)
    rich = is_rich(mu, scene, rich_ratio)

    tol = epsilon / R
    footed = footed_boundary(mu, scene)
    verdict: bool | None = True
    for curve in sorted({c for c in bd.support()}, key=lambda c: c.token()):
        on_torus = Measure((p, w) for p, w in footed.items() if p.curve == curve)
        cert = evenly_footed_certificate(on_torus, scene.torus(curve), tol)
        if cert is False:
            verdict = False
            break
        if cert is None:
            verdict = None
    return GluingFlags(ubiquitous, irreducible, verdict, rich)
