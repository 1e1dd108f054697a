"""Gluing engine: cuff selection, unit-shearing matching, covers, hybriding.

A glued surface is a multiset of pants copies plus a fixed-point-free
involution pairing cuff instances over opposite orientations.  All invariants
here are combinatorial or exact-rational; the only floating point enters
through torus distances when feet are compared.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    HypothesisViolationError,
    InternalInconsistencyError,
    IrreducibilityContradictionError,
    MalformedGluingError,
    NoMatchingError,
    NotConnectedSceneError,
    UnknownCurveError,
)
from .measures import (
    Curve,
    Measure,
    Scene,
    TorusPoint,
    boundary,
    delta_equivalent,
    footed_boundary,
    is_rich,
)


@dataclass(frozen=True, order=True)
class PantsCopy:
    pants: str
    rev: bool
    index: int


@dataclass(frozen=True, order=True)
class CuffInstance:
    pants: str
    rev: bool
    index: int
    slot: int

    def copy_key(self) -> PantsCopy:
        return PantsCopy(self.pants, self.rev, self.index)


def instance_curve(inst: CuffInstance, scene: Scene) -> Curve:
    curve = scene.datum(inst.pants).cuffs[inst.slot].curve
    return curve.bar() if inst.rev else curve


def instance_feet(inst: CuffInstance, scene: Scene) -> Measure[TorusPoint]:
    """Marked footed contribution of the instance: its two feet, unit mass each."""
    cuff = scene.datum(inst.pants).cuffs[inst.slot]
    if cuff.feet is None:
        raise HypothesisViolationError("feet data", f"pants {inst.pants} lacks feet")
    torus = scene.torus(cuff.curve)
    coords = cuff.feet
    if inst.rev:
        # same normal vectors regarded on the reversed curve's torus
        target = torus.bar_torus()
        pts = [target.point(complex(0.0, torus.phase) - z) for z in coords]
    else:
        pts = [torus.point(z) for z in coords]
    return Measure((p, Fraction(1)) for p in pts)


def shear_target(inst: CuffInstance, scene: Scene) -> Measure[TorusPoint]:
    """Unit-shear-and-flip image of the instance's feet (lives on the bar torus)."""
    cuff = scene.datum(inst.pants).cuffs[inst.slot]
    source = scene.torus(instance_curve(inst, scene))
    nu = instance_feet(inst, scene)
    target = source.bar_torus()
    return nu.map_keys(
        lambda p: target.point(source.bar_coord(source.coord(p) + 1.0))
    )


# ---------------------------------------------------------------------------
# panted surfaces


class PantedSurface:
    """Pants copies plus a gluing involution; derived invariants on demand."""

    def __init__(
        self,
        scene: Scene,
        copies: tuple[PantsCopy, ...],
        pairing: dict[CuffInstance, CuffInstance],
    ):
        self.scene = scene
        self.copies = tuple(sorted(copies))
        self.pairing = dict(pairing)
        self._validate()

    def _validate(self):
        copyset = set(self.copies)
        if len(copyset) != len(self.copies):
            raise MalformedGluingError("duplicate pants copies")
        for a, b in self.pairing.items():
            if a == b:
                raise MalformedGluingError("gluing must be fixed-point free")
            if self.pairing.get(b) != a:
                raise MalformedGluingError("gluing must be an involution")
            if a.copy_key() not in copyset or b.copy_key() not in copyset:
                raise MalformedGluingError("gluing references an unknown pants copy")
            if instance_curve(a, self.scene) != instance_curve(b, self.scene).bar():
                raise MalformedGluingError(
                    "gluing must send each cuff to its orientation reversal"
                )

    # derived ---------------------------------------------------------------
    def all_instances(self) -> list[CuffInstance]:
        return [
            CuffInstance(c.pants, c.rev, c.index, s)
            for c in self.copies
            for s in range(3)
        ]

    def glued_pairs(self) -> list[tuple[CuffInstance, CuffInstance]]:
        return sorted({tuple(sorted((a, b))) for a, b in self.pairing.items()})

    def boundary_instances(self) -> list[CuffInstance]:
        return [i for i in self.all_instances() if i not in self.pairing]

    def boundary_multicurve(self) -> Counter:
        return Counter(instance_curve(i, self.scene) for i in self.boundary_instances())

    def euler_characteristic(self) -> int:
        return -len(self.copies)

    def components(self) -> list[frozenset[PantsCopy]]:
        parent = {c: c for c in self.copies}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.pairing.items():
            ra, rb = find(a.copy_key()), find(b.copy_key())
            if ra != rb:
                parent[ra] = rb
        comps: dict[PantsCopy, set[PantsCopy]] = {}
        for c in self.copies:
            comps.setdefault(find(c), set()).add(c)
        return sorted((frozenset(v) for v in comps.values()), key=lambda s: min(s))

    def component_glued_cuffs(self) -> list[list[tuple[CuffInstance, CuffInstance]]]:
        comps = self.components()
        where = {c: k for k, comp in enumerate(comps) for c in comp}
        out: list[list[tuple[CuffInstance, CuffInstance]]] = [[] for _ in comps]
        for a, b in self.glued_pairs():
            out[where[a.copy_key()]].append((a, b))
        return out

    def subordination(self) -> Counter:
        """Pants-copy counts per (pants, rev)."""
        return Counter((c.pants, c.rev) for c in self.copies)

    def dual_graph(self) -> tuple[list[PantsCopy], list[tuple[PantsCopy, PantsCopy]]]:
        verts = list(self.copies)
        edges = [(a.copy_key(), b.copy_key()) for a, b in self.glued_pairs()]
        return verts, edges


def _graph_components(verts, edges) -> list[set]:
    adj = {v: [] for v in verts}
    for k, (u, v) in enumerate(edges):
        adj[u].append((v, k))
        adj[v].append((u, k))
    seen: set = set()
    comps = []
    for v in verts:
        if v in seen:
            continue
        comp = {v}
        queue = deque([v])
        seen.add(v)
        while queue:
            u = queue.popleft()
            for w, _ in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def _edge_nonseparating(verts, edges, k: int) -> bool:
    """Deleting edge k keeps its endpoints connected."""
    u0, v0 = edges[k]
    if u0 == v0:
        return True
    adj = {v: [] for v in verts}
    for j, (u, v) in enumerate(edges):
        if j != k:
            adj[u].append(v)
            adj[v].append(u)
    seen = {u0}
    queue = deque([u0])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w == v0:
                return True
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return False


def all_glued_cuffs_nonseparating(surface: PantedSurface) -> bool:
    verts, edges = surface.dual_graph()
    return all(_edge_nonseparating(verts, edges, k) for k in range(len(edges)))


# ---------------------------------------------------------------------------
# cuff selection


@dataclass(frozen=True)
class CuffSelection:
    multiplier: int
    copies: tuple[PantsCopy, ...]
    selected: tuple[CuffInstance, ...]
    marked: tuple[CuffInstance, ...]

    def selected_over(self, curve: Curve, scene: Scene) -> list[CuffInstance]:
        return [i for i in self.selected if instance_curve(i, scene) == curve]


def select_cuffs(mu: Measure[str], scene: Scene, rich_ratio: Fraction = Fraction(1, 5)) -> CuffSelection:
    """Unmarked-cuff selection realizing a maximal, proportional, >=2-per-pants set.

    Scales mu by the returned multiplier, then marks one cuff on some copies
    so that, per curve class, exactly min(m, m_bar) instances of each
    orientation remain; marking is distributed evenly over the slots carrying
    an over-represented curve.
    """
    for w in (mu[k] for k in mu):
        if w.denominator != 1:
            raise HypothesisViolationError("mu integral", f"weight {w} is not an integer")
    if not is_rich(mu, scene, rich_ratio):
        raise HypothesisViolationError("mu rich", "net boundary exceeds the rich ratio")

    bd = boundary(mu, scene)
    names = sorted(mu.support())

    # over-represented orientations and their marking ratios
    ratios: dict[Curve, Fraction] = {}
    for cname in sorted({c.name for c in bd.support()}):
        m_pos, m_neg = bd[Curve(cname, True)], bd[Curve(cname, False)]
        if m_pos > m_neg:
            ratios[Curve(cname, True)] = Fraction(m_pos - m_neg, m_pos)
        elif m_neg > m_pos:
            ratios[Curve(cname, False)] = Fraction(m_neg - m_pos, m_neg)

    multiplier = 1
    for gamma, ratio in ratios.items():
        for name in names:
            k = scene.datum(name).curve_multiplicity(gamma)
            if k:
                per_slot = ratio * mu[name]
                multiplier = multiplier * per_slot.denominator // math.gcd(
                    multiplier, per_slot.denominator
                )

    counts = {name: int(mu[name]) * multiplier for name in names}
    copies = tuple(
        PantsCopy(name, False, i) for name in names for i in range(counts[name])
    )

    marked: list[CuffInstance] = []
    next_free = {name: 0 for name in names}
    for gamma in sorted(ratios, key=lambda c: c.token()):
        ratio = ratios[gamma]
        for name in names:
            datum = scene.datum(name)
            slots = [s for s in range(3) if datum.cuffs[s].curve == gamma]
            if not slots:
                continue
            per_slot = ratio * mu[name] * multiplier
            if per_slot.denominator != 1:
                raise InternalInconsistencyError("marking count is not integral")
            for slot in slots:
                for _ in range(int(per_slot)):
                    idx = next_free[name]
                    if idx >= counts[name]:
                        raise HypothesisViolationError(
                            "mu rich", f"marking exhausts copies of pants {name}"
                        )
                    marked.append(CuffInstance(name, False, idx, slot))
                    next_free[name] += 1

    marked_set = set(marked)
    selected = tuple(
        CuffInstance(c.pants, c.rev, c.index, s)
        for c in copies
        for s in range(3)
        if CuffInstance(c.pants, c.rev, c.index, s) not in marked_set
    )
    return CuffSelection(multiplier, copies, selected, tuple(sorted(marked)))


def verify_selection(sel: CuffSelection, mu: Measure[str], scene: Scene) -> dict:
    """Exact checks of the three selection properties; returns evidence.

    (i) per class, equal instance counts over both orientations (maximality);
    (ii) per torus, the selected feet measure is a positive rational multiple
    of the footed boundary of mu; (iii) every copy keeps >= 2 selected cuffs.
    """
    bd = boundary(mu, scene)
    counts: Counter = Counter(instance_curve(i, scene) for i in sel.selected)
    maximal = {}
    for cname in sorted({c.name for c in bd.support()}):
        pos, neg = Curve(cname, True), Curve(cname, False)
        expect = sel.multiplier * min(bd[pos], bd[neg])
        maximal[cname] = (
            counts[pos] == counts[neg] == expect
        )

    footed = footed_boundary(mu, scene)
    ratios = {}
    for curve in sorted({instance_curve(i, scene) for i in sel.selected}, key=Curve.token):
        nu_sel = Measure(
            (p, w)
            for inst in sel.selected
            if instance_curve(inst, scene) == curve
            for p, w in instance_feet(inst, scene).items()
        )
        nu_mu = Measure((p, w) for p, w in footed.items() if p.curve == curve)
        ratio = Fraction(nu_sel.total(), 1) / nu_mu.total()
        ratios[curve.token()] = (ratio, nu_mu.scale(ratio) == nu_sel)

    per_copy: Counter = Counter(i.copy_key() for i in sel.selected)
    min_cuffs = min((per_copy[c] for c in sel.copies), default=3)
    return {"maximal": maximal, "proportional": ratios, "min_selected_per_copy": min_cuffs}


# ---------------------------------------------------------------------------
# unit-shearing matching


def _kuhn_matching(left: list, right: list, adj: dict) -> dict:
    """Deterministic augmenting-path maximum matching; left/right are sorted."""
    match_l: dict = {}
    match_r: dict = {}

    def try_augment(u, visited):
        for v in adj[u]:
            if v in visited:
                continue
            visited.add(v)
            if v not in match_r or try_augment(match_r[v], visited):
                match_l[u] = v
                match_r[v] = u
                return True
        return False

    for u in left:
        try_augment(u, set())
    return match_l


def match_unit_shearing(
    sel: CuffSelection, scene: Scene, tol: float
) -> dict[CuffInstance, CuffInstance]:
    """Fixed-point-free pairing whose every pair is tol-unit-shearing.

    Per curve class, a perfect matching on the bipartite graph joining
    instances over gamma to instances over bar(gamma) whenever the flipped
    unit-sheared feet of one are tol-equivalent to the feet of the other.
    """
    by_curve: dict[Curve, list[CuffInstance]] = {}
    for inst in sorted(sel.selected):
        by_curve.setdefault(instance_curve(inst, scene), []).append(inst)

    pairing: dict[CuffInstance, CuffInstance] = {}
    for cname in sorted({c.name for c in by_curve}):
        pos, neg = Curve(cname, True), Curve(cname, False)
        lefts = by_curve.get(pos, [])
        rights = by_curve.get(neg, [])
        if len(lefts) != len(rights):
            raise InternalInconsistencyError("selection is not orientation balanced")
        if not lefts:
            continue
        # edges depend only on (pants, slot); compute once per type pair
        type_edge: dict[tuple, bool] = {}

        def admissible(a: CuffInstance, b: CuffInstance) -> bool:
            key = ((a.pants, a.rev, a.slot), (b.pants, b.rev, b.slot))
            if key not in type_edge:
                type_edge[key] = delta_equivalent(
                    instance_feet(b, scene), shear_target(a, scene), tol, scene
                )
            return type_edge[key]

        adj = {a: [b for b in rights if admissible(a, b)] for a in lefts}
        match = _kuhn_matching(lefts, rights, adj)
        if len(match) < len(lefts):
            unmatched = [a for a in lefts if a not in match]
            witness = _hall_witness(unmatched[0], adj, match)
            raise NoMatchingError(pos, witness)
        for a, b in match.items():
            pairing[a] = b
            pairing[b] = a
    return pairing


def _hall_witness(root, adj, match_l) -> list:
    """Alternating-reachable left set S with |N(S)| < |S|."""
    match_r = {v: u for u, v in match_l.items()}
    seen_l = {root}
    seen_r: set = set()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in seen_r:
                continue
            seen_r.add(v)
            if v in match_r and match_r[v] not in seen_l:
                seen_l.add(match_r[v])
                queue.append(match_r[v])
    return sorted(seen_l)


def assemble(
    scene: Scene,
    copies: tuple[PantsCopy, ...],
    pairing: dict[CuffInstance, CuffInstance],
) -> PantedSurface:
    """Quotient surface of the copies under the pairing involution."""
    return PantedSurface(scene, copies, pairing)


def glue_pipeline(mu: Measure[str], scene: Scene, tol: float) -> tuple[CuffSelection, PantedSurface]:
    sel = select_cuffs(mu, scene)
    pairing = match_unit_shearing(sel, scene, tol)
    return sel, assemble(scene, sel.copies, pairing)


# ---------------------------------------------------------------------------
# nonseparating double cover


def double_cover_nonseparating(surface: PantedSurface) -> PantedSurface:
    """Double cover in which every glued cuff is nonseparating.

    Tree edges keep sheets, non-tree edges swap them; the output is verified
    by edge deletion and locally repaired if needed.
    """
    verts, edges = surface.dual_graph()
    valence = Counter()
    for u, v in edges:
        valence[u] += 1
        valence[v] += 1
    for v in verts:
        if valence[v] < 2:
            raise HypothesisViolationError(
                "dual valence >= 2", f"pants copy {v} has {valence[v]} glued cuffs"
            )

    pairs = surface.glued_pairs()
    bits = _cover_bits(verts, edges)

    def lift_copies():
        return tuple(
            PantsCopy(c.pants, c.rev, 2 * c.index + sheet)
            for c in surface.copies
            for sheet in (0, 1)
        )

    def lift_pairing(bits):
        lifted: dict[CuffInstance, CuffInstance] = {}
        for k, (a, b) in enumerate(pairs):
            for sheet in (0, 1):
                a_l = CuffInstance(a.pants, a.rev, 2 * a.index + sheet, a.slot)
                b_l = CuffInstance(b.pants, b.rev, 2 * b.index + (sheet ^ bits[k]), b.slot)
                lifted[a_l] = b_l
                lifted[b_l] = a_l
        return lifted

    cover = PantedSurface(surface.scene, lift_copies(), lift_pairing(bits))
    if all_glued_cuffs_nonseparating(cover):
        return cover
    # local repair: toggle non-tree bits one at a time, then pairs
    tree = _spanning_forest(verts, edges)
    non_tree = [k for k in range(len(edges)) if k not in tree]
    for flip in itertools.chain(
        ((k,) for k in non_tree), itertools.combinations(non_tree, 2)
    ):
        trial = list(bits)
        for k in flip:
            trial[k] ^= 1
        cover = PantedSurface(surface.scene, lift_copies(), lift_pairing(trial))
        if all_glued_cuffs_nonseparating(cover):
            return cover
    raise InternalInconsistencyError("no nonseparating double cover found by repair")


def _spanning_forest(verts, edges) -> set[int]:
    parent = {v: v for v in verts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree: set[int] = set()
    for k, (u, v) in enumerate(edges):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            tree.add(k)
    return tree


def _cover_bits(verts, edges) -> list[int]:
    tree = _spanning_forest(verts, edges)
    return [0 if k in tree else 1 for k in range(len(edges))]


# ---------------------------------------------------------------------------
# hybriding


@dataclass(frozen=True)
class HybridReport:
    surface: PantedSurface
    cover_multiples: tuple[int, ...]
    swapped: tuple[tuple[CuffInstance, CuffInstance], ...]
    measured_tol: float


def _pair_shear_distance(a: CuffInstance, b: CuffInstance, scene: Scene) -> float:
    """Smallest delta at which the pair is delta-unit-shearing (2-atom case)."""
    target = shear_target(a, scene)
    feet = instance_feet(b, scene)
    curve = instance_curve(b, scene)
    torus = scene.torus(curve)
    t_pts = [torus.coord(p) for p, w in target.items() for _ in range(int(w))]
    f_pts = [torus.coord(p) for p, w in feet.items() for _ in range(int(w))]
    if len(t_pts) != 2 or len(f_pts) != 2:
        raise InternalInconsistencyError("feet measures must carry two unit atoms")
    d = torus.dist
    straight = max(d(t_pts[0], f_pts[0]), d(t_pts[1], f_pts[1]))
    crossed = max(d(t_pts[0], f_pts[1]), d(t_pts[1], f_pts[0]))
    return min(straight, crossed)


def cyclic_cover(surface: PantedSurface, m: int) -> PantedSurface:
    """m-fold cyclic cover dual to one nonseparating glued cuff per component.

    Applied componentwise; components keep their count while every glued-cuff
    class multiplies its instances m-fold.
    """
    if m == 1:
        return surface
    verts, edges = surface.dual_graph()
    pairs = surface.glued_pairs()
    comps = _graph_components(verts, edges)
    special: set[int] = set()
    for comp in comps:
        comp_edges = [k for k, (u, v) in enumerate(edges) if u in comp]
        chosen = next(
            (k for k in comp_edges if _edge_nonseparating(verts, edges, k)), None
        )
        if chosen is None:
            raise HypothesisViolationError(
                "nonseparating glued cuff", "component has no nonseparating glued cuff"
            )
        special.add(chosen)

    copies = tuple(
        PantsCopy(c.pants, c.rev, m * c.index + sheet)
        for c in surface.copies
        for sheet in range(m)
    )
    pairing: dict[CuffInstance, CuffInstance] = {}
    for k, (a, b) in enumerate(pairs):
        step = 1 if k in special else 0
        for sheet in range(m):
            a_l = CuffInstance(a.pants, a.rev, m * a.index + sheet, a.slot)
            b_l = CuffInstance(b.pants, b.rev, m * b.index + (sheet + step) % m, b.slot)
            pairing[a_l] = b_l
            pairing[b_l] = a_l
    return PantedSurface(surface.scene, copies, pairing)


def hybridize(surface: PantedSurface, scene: Scene, tol: float) -> HybridReport:
    """Merge components by crosswise regluing along feet-close cuff pairs.

    Requires all glued cuffs nonseparating.  The component graph joins two
    components when they own glued cuffs over a common class whose partner
    feet are tol-equivalent; a disconnected graph contradicts irreducibility.
    Swaps happen across a maximal tree; the result is connected, keeps the
    boundary multicurve, and every reglued pair is re-verified within 2 tol.
    """
    comps = surface.components()
    r = len(comps)
    if r == 1:
        return HybridReport(surface, (1,), (), _measured_tol(surface, scene))
    if not all_glued_cuffs_nonseparating(surface):
        raise HypothesisViolationError(
            "nonseparating glued cuffs", "hybriding needs nonseparating glued cuffs"
        )

    # glued-cuff class counts decide the worst-case cyclic cover multiple:
    # enough same-class cuffs per component make the tree witnesses distinct
    where = {c: k for k, comp in enumerate(comps) for c in comp}
    per_comp_class: list[Counter] = [Counter() for _ in comps]
    for a, b in surface.glued_pairs():
        per_comp_class[where[a.copy_key()]][instance_curve(a, scene).name] += 1
    worst = max(
        max((math.ceil(r / cnt) for cnt in counter.values()), default=1)
        for counter in per_comp_class
    )

    base = surface
    m = 1
    while True:
        result = _hybrid_attempt(base if m == 1 else cyclic_cover(base, m), scene, tol, r)
        if result is not None:
            surface, witness, comp_count = result
            break
        if m >= worst:
            raise InternalInconsistencyError(
                "witness exhaustion persists at the worst-case cover multiple"
            )
        m = min(2 * m, worst)
    multiples = (m,) * r

    # swap across the witness tree
    pairing = dict(surface.pairing)
    swapped = []
    boundary_before = surface.boundary_multicurve()
    for (i, j) in sorted(witness):
        c, cp = witness[(i, j)]
        pc, pcp = pairing[c], pairing[cp]
        pairing[c] = pcp
        pairing[pcp] = c
        pairing[cp] = pc
        pairing[pc] = cp
        swapped.append((c, cp))

    result = PantedSurface(scene, surface.copies, pairing)
    if len(result.components()) != 1:
        raise InternalInconsistencyError("hybriding did not produce a connected surface")
    if result.boundary_multicurve() != boundary_before:
        raise InternalInconsistencyError("hybriding changed the boundary multicurve")
    measured = _measured_tol(result, scene)
    if measured > 2.0 * tol + 1e-12:
        raise InternalInconsistencyError(
            f"post-swap shear tolerance {measured} exceeds twice the input tolerance"
        )
    return HybridReport(result, multiples, tuple(swapped), measured)


def _hybrid_attempt(surface: PantedSurface, scene: Scene, tol: float, r: int):
    """Witness tree across components, distinct instances per tree edge.

    Returns (surface, tree-edge witnesses, component count), or None when the
    greedy reservation exhausted some component's cuffs (retry with a cover).
    Raises the irreducibility contradiction when even unreserved witnesses
    cannot join the components.
    """
    comps = surface.components()
    where = {c: k for k, comp in enumerate(comps) for c in comp}
    n = len(comps)
    glued_by_comp: list[list[CuffInstance]] = [[] for _ in comps]
    for a, b in surface.glued_pairs():
        glued_by_comp[where[a.copy_key()]].append(a)
        glued_by_comp[where[b.copy_key()]].append(b)
    for lst in glued_by_comp:
        lst.sort()

    match_cache: dict[tuple, bool] = {}

    def feet_match(c: CuffInstance, cp: CuffInstance) -> bool:
        pa, pb = surface.pairing[c], surface.pairing[cp]
        key = ((pa.pants, pa.rev, pa.slot), (pb.pants, pb.rev, pb.slot))
        if key not in match_cache:
            match_cache[key] = delta_equivalent(
                instance_feet(pb, scene), instance_feet(pa, scene), tol, scene
            )
        return match_cache[key]

    def find_witness(i: int, j: int, used: set[CuffInstance]):
        for c in glued_by_comp[i]:
            if c in used:
                continue
            gamma = instance_curve(c, scene)
            for cp in glued_by_comp[j]:
                if cp in used or instance_curve(cp, scene) != gamma:
                    continue
                if feet_match(c, cp):
                    return (c, cp)
        return None

    # grow a spanning tree greedily, reserving witness instances as we go
    used: set[CuffInstance] = set()
    witness: dict[tuple[int, int], tuple[CuffInstance, CuffInstance]] = {}
    in_tree = {0}
    exhausted = False
    while len(in_tree) < n:
        found = None
        for i in sorted(in_tree):
            for j in range(n):
                if j in in_tree:
                    continue
                pair = find_witness(i, j, used)
                if pair is not None:
                    found = (i, j, pair)
                    break
            if found:
                break
        if found is None:
            # distinguish honest disconnection from reservation exhaustion
            for i in sorted(in_tree):
                for j in range(n):
                    if j not in in_tree and find_witness(i, j, set()) is not None:
                        exhausted = True
                        break
                if exhausted:
                    break
            if exhausted:
                return None
            raise IrreducibilityContradictionError(
                "component graph disconnected; input flags were wrong"
            )
        i, j, pair = found
        in_tree.add(j)
        witness[(min(i, j), max(i, j))] = pair
        used.update(pair)
        used.update((surface.pairing[pair[0]], surface.pairing[pair[1]]))
    return surface, witness, n


def _measured_tol(surface: PantedSurface, scene: Scene) -> float:
    worst = 0.0
    for a, b in surface.glued_pairs():
        worst = max(worst, _pair_shear_distance(a, b, scene))
    return worst


# ---------------------------------------------------------------------------
# panted connectedness and connectification


def panted_connected(scene: Scene, gamma0: Curve, gamma1: Curve) -> bool:
    """Joined in the curve-pants incidence graph, orientations identified."""
    for g in (gamma0, gamma1):
        if g.name not in scene.curve_data:
            raise UnknownCurveError(f"unknown curve {g.name}")
    if gamma0.name == gamma1.name:
        return True
    adj: dict[str, set[str]] = {}
    for name, datum in scene.pants.items():
        classes = {c.curve.name for c in datum.cuffs}
        for x in classes:
            adj.setdefault(x, set()).update(classes - {x})
    seen = {gamma0.name}
    queue = deque([gamma0.name])
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if v == gamma1.name:
                return True
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return False


def _connector_chain(scene: Scene, start: Curve, goal: Curve) -> list[tuple[str, bool, int, int]]:
    """Pants-copy chain whose first copy exposes `start` and last exposes `goal`.

    Entries are (pants, rev, entry_slot, exposed_slot); the first entry's
    entry_slot carries `start` itself.  Consecutive entries glue exposed ->
    bar(entry).  Raises NotConnectedSceneError when no chain exists.
    """
    # search states: oriented curve exposed so far
    starts: list[tuple[str, bool, int, int]] = []
    for name in sorted(scene.pants):
        datum = scene.datum(name)
        for rev in (False, True):
            for s in range(3):
                cs = datum.cuffs[s].curve
                curve_s = cs.bar() if rev else cs
                if curve_s != start:
                    continue
                for t in range(3):
                    if t == s:
                        continue
                    ct = datum.cuffs[t].curve
                    starts.append((name, rev, s, t))
    if not starts:
        raise NotConnectedSceneError(f"no pants exposes {start}")

    from collections import deque as _dq

    prev: dict[Curve, tuple] = {}
    queue = _dq()
    for name, rev, s, t in starts:
        ct = scene.datum(name).cuffs[t].curve
        exposed = ct.bar() if rev else ct
        if exposed not in prev:
            prev[exposed] = (None, (name, rev, s, t))
            queue.append(exposed)
    # direct hit: first pants exposes goal at some third slot
    while queue:
        exposed = queue.popleft()
        if exposed == goal:
            chain = []
            cur = exposed
            while cur is not None:
                parent, step = prev[cur]
                chain.append(step)
                cur = parent
            return list(reversed(chain))
        for name in sorted(scene.pants):
            datum = scene.datum(name)
            for rev in (False, True):
                for s in range(3):
                    cs = datum.cuffs[s].curve
                    curve_s = cs.bar() if rev else cs
                    if curve_s != exposed.bar():
                        continue
                    for t in range(3):
                        if t == s:
                            continue
                        ct = datum.cuffs[t].curve
                        new_exposed = ct.bar() if rev else ct
                        if new_exposed not in prev:
                            prev[new_exposed] = (exposed, (name, rev, s, t))
                            queue.append(new_exposed)
    raise NotConnectedSceneError(f"no panted connection from {start} to {goal}")


def _nonseparating_cuff_of(
    surface: PantedSurface, comp: frozenset[PantsCopy]
) -> tuple[CuffInstance, CuffInstance] | None:
    verts, edges = surface.dual_graph()
    pairs = surface.glued_pairs()
    for k, (u, v) in enumerate(edges):
        if u in comp and _edge_nonseparating(verts, edges, k):
            return pairs[k]
    return None


def connectify_rel_boundary(surface: PantedSurface, scene: Scene) -> PantedSurface:
    """Connect components by splicing in mirrored connector surfaces.

    The boundary multicurve is preserved exactly; the pants-copy multiset
    changes by mirrored connector pairs only.
    """
    boundary_before = surface.boundary_multicurve()
    guard = 0
    while True:
        comps = surface.components()
        if len(comps) == 1:
            break
        guard += 1
        if guard > 4 * len(surface.copies) + 16:
            raise InternalInconsistencyError("connectification did not terminate")
        pairs = []
        grew = False
        for comp in comps[:2]:
            pair = _nonseparating_cuff_of(surface, comp)
            if pair is None:
                surface = _attach_doubler(surface, scene, comp)
                grew = True
                break
            pairs.append(pair)
        if grew:
            continue
        surface = _splice(surface, scene, pairs[0], pairs[1])
    if surface.boundary_multicurve() != boundary_before:
        raise InternalInconsistencyError("connectification changed the boundary")
    return surface


def _fresh_index(surface: PantedSurface, pants: str, rev: bool) -> int:
    taken = [c.index for c in surface.copies if c.pants == pants and c.rev == rev]
    return max(taken, default=-1) + 1


def _attach_doubler(
    surface: PantedSurface, scene: Scene, comp: frozenset[PantsCopy]
) -> PantedSurface:
    """Glue a mirrored pants pair onto a boundary cuff of the component.

    The two internal pairs of the doubler are nonseparating afterwards.
    """
    boundary_insts = [
        i for i in surface.boundary_instances() if i.copy_key() in comp
    ]
    if not boundary_insts:
        raise InternalInconsistencyError(
            "closed component without nonseparating glued cuff"
        )
    c_inst = boundary_insts[0]
    gamma = instance_curve(c_inst, scene)
    host = None
    for name in sorted(scene.pants):
        datum = scene.datum(name)
        for rev in (False, True):
            for s in range(3):
                cs = datum.cuffs[s].curve
                if (cs.bar() if rev else cs) == gamma:
                    host = (name, rev, s)
                    break
            if host:
                break
        if host:
            break
    if host is None:
        raise NotConnectedSceneError(f"no scene pants has a cuff over {gamma}")
    name, rev, s = host
    iplus = _fresh_index(surface, name, rev)
    iminus = _fresh_index(surface, name, not rev)
    plus = PantsCopy(name, rev, iplus)
    minus = PantsCopy(name, not rev, iminus)
    pairing = dict(surface.pairing)
    for t in range(3):
        if t == s:
            continue
        a = CuffInstance(name, rev, iplus, t)
        b = CuffInstance(name, not rev, iminus, t)
        pairing[a] = b
        pairing[b] = a
    # glue the minus copy's distinguished cuff (over bar gamma) to the boundary cuff
    d_minus = CuffInstance(name, not rev, iminus, s)
    pairing[c_inst] = d_minus
    pairing[d_minus] = c_inst
    return PantedSurface(scene, surface.copies + (plus, minus), pairing)


def _splice(
    surface: PantedSurface,
    scene: Scene,
    pair1: tuple[CuffInstance, CuffInstance],
    pair2: tuple[CuffInstance, CuffInstance],
) -> PantedSurface:
    """Cut both glued cuffs and route them through mirrored connector copies."""
    a1, b1 = pair1  # a over gamma, b over bar(gamma)
    a2, b2 = pair2
    g1 = instance_curve(a1, scene)
    g2 = instance_curve(a2, scene)
    chain = _connector_chain(scene, g1, g2)

    pairing = dict(surface.pairing)
    for x in (a1, b1, a2, b2):
        pairing.pop(x, None)

    new_copies: list[PantsCopy] = []
    taken: dict[tuple[str, bool], int] = {}

    def fresh(pants: str, rev: bool) -> PantsCopy:
        base = taken.get((pants, rev))
        if base is None:
            base = _fresh_index(surface, pants, rev)
        taken[(pants, rev)] = base + 1
        copy = PantsCopy(pants, rev, base)
        new_copies.append(copy)
        return copy

    def build_connector(mirror: bool) -> tuple[CuffInstance, CuffInstance, list[CuffInstance]]:
        """Instantiate the chain; returns (start cuff, goal cuff, other boundary)."""
        start_inst = goal_inst = None
        others: list[CuffInstance] = []
        prev_exposed: CuffInstance | None = None
        for step_idx, (pants, rev, entry, exposed) in enumerate(chain):
            use_rev = rev ^ mirror
            copy = fresh(pants, use_rev)
            entry_inst = CuffInstance(copy.pants, copy.rev, copy.index, entry)
            exposed_inst = CuffInstance(copy.pants, copy.rev, copy.index, exposed)
            third = ({0, 1, 2} - {entry, exposed}).pop()
            others.append(CuffInstance(copy.pants, copy.rev, copy.index, third))
            if step_idx == 0:
                start_inst = entry_inst
            else:
                pairing[prev_exposed] = entry_inst
                pairing[entry_inst] = prev_exposed
            prev_exposed = exposed_inst
        goal_inst = prev_exposed
        return start_inst, goal_inst, others

    startP, goalP, othersP = build_connector(mirror=False)
    startM, goalM, othersM = build_connector(mirror=True)

    # mirror-pair the leftover connector cuffs
    for x, y in zip(othersP, othersM):
        pairing[x] = y
        pairing[y] = x

    # route the cut cuffs through the connectors:
    # plus connector exposes g1 at startP and g2 at goalP; mirror the reverses
    pairing[b1] = startP
    pairing[startP] = b1
    pairing[a1] = startM
    pairing[startM] = a1
    pairing[b2] = goalP
    pairing[goalP] = b2
    pairing[a2] = goalM
    pairing[goalM] = a2

    return PantedSurface(scene, surface.copies + tuple(new_copies), pairing)
