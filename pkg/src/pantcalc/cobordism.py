"""Panted cobordism: the cokernel of the pants-to-curves boundary matrix.

Multicurves modulo boundaries of panted surfaces form a finitely generated
abelian group presented by the integer matrix of cuff multiplicities; its
structure, class computations, the parity invariant on synthetic frame-bundle
fixtures, and panted representatives of second homology classes are all
computed in exact integer arithmetic via Smith normal form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DomainError,
    IncompleteSceneError,
    InternalInconsistencyError,
    NotACycleError,
    NotNullHomologousError,
    UnknownCurveError,
)
from .gluing import CuffInstance, PantedSurface, PantsCopy
from .measures import Curve, CuffDatum, PantsDatum, Scene


# ---------------------------------------------------------------------------
# Smith normal form (exact, with unimodular transforms)


def identity_matrix(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        ai = a[i]
        for k in range(inner):
            aik = ai[k]
            if aik:
                bk = b[k]
                oi = out[i]
                for j in range(cols):
                    oi[j] += aik * bk[j]
    return out


def smith_normal_form(matrix) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """(U, S, V) with S = U . matrix . V diagonal, d1 | d2 | ..., U, V unimodular."""
    s = [[int(x) for x in row] for row in matrix]
    n_rows = len(s)
    n_cols = len(s[0]) if n_rows else 0
    u = identity_matrix(n_rows)
    v = identity_matrix(n_cols)

    def row_op(i1, i2, a, b, c, d):
        # rows i1, i2 <- a*i1 + b*i2, c*i1 + d*i2 (ad - bc = +-1)
        for m in (s, u):
            r1, r2 = m[i1], m[i2]
            for j in range(len(r1)):
                r1[j], r2[j] = a * r1[j] + b * r2[j], c * r1[j] + d * r2[j]

    def col_op(j1, j2, a, b, c, d):
        for m in (s, v):
            for row in m:
                row[j1], row[j2] = a * row[j1] + b * row[j2], c * row[j1] + d * row[j2]

    def find_pivot(k):
        best = None
        for i in range(k, n_rows):
            for j in range(k, n_cols):
                if s[i][j] and (best is None or abs(s[i][j]) < best[0]):
                    best = (abs(s[i][j]), i, j)
        return best

    k = 0
    while True:
        piv = find_pivot(k)
        if piv is None:
            break
        _, pi, pj = piv
        if pi != k:
            row_op(k, pi, 0, 1, 1, 0)
        if pj != k:
            col_op(k, pj, 0, 1, 1, 0)
        while True:
            done = True
            for i in range(k + 1, n_rows):
                if s[i][k]:
                    q = s[i][k] // s[k][k]
                    row_op(i, k, 1, -q, 0, 1)
                    if s[i][k]:
                        row_op(k, i, 0, 1, 1, 0)
                        done = False
            for j in range(k + 1, n_cols):
                if s[k][j]:
                    q = s[k][j] // s[k][k]
                    col_op(j, k, 1, -q, 0, 1)
                    if s[k][j]:
                        col_op(k, j, 0, 1, 1, 0)
                        done = False
            if done:
                break
        k += 1

    # positive diagonal, then enforce the divisibility chain: a pair (a, b)
    # with a not dividing b becomes (gcd, lcm) by Bezout row/column transforms
    rank = k
    for i in range(rank):
        if s[i][i] < 0:
            for m in (s, u):
                m[i] = [-x for x in m[i]]
    changed = True
    while changed:
        changed = False
        for i in range(rank - 1):
            a, b = s[i][i], s[i + 1][i + 1]
            if b % a == 0:
                continue
            changed = True
            g = math.gcd(a, b)
            x, y = _bezout(a, b)
            col_op(i, i + 1, 1, 1, 0, 1)            # S = [[a, 0], [b, b]]
            row_op(i, i + 1, x, y, -b // g, a // g)  # S = [[g, y b], [0, lcm]]
            col_op(i + 1, i, 1, -(y * b) // g, 0, 1)
            if s[i][i] != g or s[i][i + 1] or s[i + 1][i] or s[i + 1][i + 1] != a * b // g:
                raise InternalInconsistencyError("divisibility repair failed")
    return u, s, v


def _bezout(a: int, b: int) -> tuple[int, int]:
    """(x, y) with x a + y b = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return x0, y0


@dataclass(frozen=True)
class AbelianGroup:
    rank: int
    torsion: tuple[int, ...]  # invariant factors > 1, each dividing the next

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a != 0:
                raise DomainError("torsion coefficients must form a divisibility chain")

    def __repr__(self):
        parts = [f"Z^{self.rank}" if self.rank else ""]
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(p for p in parts if p) or "0"


def invariant_factors(matrix) -> list[int]:
    _, s, _ = smith_normal_form(matrix)
    return [s[i][i] for i in range(min(len(s), len(s[0]) if s else 0)) if s[i][i]]


# ---------------------------------------------------------------------------
# the presentation of the cobordism group


@dataclass(frozen=True)
class Presentation:
    curves: tuple[Curve, ...]
    pants_names: tuple[str, ...]
    matrix: tuple[tuple[int, ...], ...]  # rows: curves, columns: pants
    u: tuple[tuple[int, ...], ...]
    diag: tuple[int, ...]  # full diagonal of S (zeros included), length = rows
    identified_reversals: bool = False

    def curve_index(self, curve: Curve) -> int:
        try:
            return self.curves.index(curve)
        except ValueError:
            raise UnknownCurveError(f"curve {curve} not in the scene") from None

    def group(self) -> AbelianGroup:
        torsion = tuple(d for d in self.diag if d > 1)
        rank = sum(1 for d in self.diag if d == 0)
        return AbelianGroup(rank, torsion)

    def class_of(self, vector: list[int]) -> tuple:
        """Coker coordinates: residues on torsion rows, integers on free rows."""
        w = [sum(self.u[i][j] * vector[j] for j in range(len(vector)))
             for i in range(len(self.u))]
        coords = []
        for i, d in enumerate(self.diag):
            if d == 1:
                continue
            coords.append(w[i] % d if d else w[i])
        return tuple(coords)

    def multicurve_vector(self, multicurve: list[Curve]) -> list[int]:
        vec = [0] * len(self.curves)
        for c in multicurve:
            vec[self.curve_index(c)] += 1
        return vec


def presentation_matrix(scene: Scene, identify_reversals: bool = False) -> Presentation:
    """Integer boundary matrix: cuff multiplicities of each pants.

    With `identify_reversals`, one relation column (curve + its reversal) is
    appended per class.  These are the boundaries of the mirrored splitting
    cobordisms: a pure pants column always has total weight 3, so a vector of
    total weight 2 is never in the raw column space (mod 3), and the group
    the cobordisms present only arises after the reversal identification.
    """
    if not scene.curve_data:
        raise IncompleteSceneError("scene has no curves")
    curves = tuple(scene.curves())
    names = tuple(sorted(scene.pants))
    index = {c: i for i, c in enumerate(curves)}
    cols = []
    for name in names:
        col = [0] * len(curves)
        for cuff in scene.datum(name).cuffs:
            col[index[cuff.curve]] += 1
        cols.append(col)
    matrix = [
        tuple(cols[j][i] for j in range(len(names))) for i in range(len(curves))
    ]
    work = [list(r) for r in matrix]
    if identify_reversals:
        if not _splitting_complete(scene):
            raise IncompleteSceneError(
                "reversal identification needs a splitting pants for every curve"
            )
        for n in sorted({c.name for c in curves}):
            col = [0] * len(curves)
            col[index[Curve(n, True)]] = 1
            col[index[Curve(n, False)]] = 1
            for i in range(len(curves)):
                work[i].append(col[i])
    if work and work[0]:
        u, s, _ = smith_normal_form(work)
        diag = [s[i][i] if i < len(s[0]) else 0 for i in range(len(curves))]
    else:
        u = identity_matrix(len(curves))
        diag = [0] * len(curves)
    return Presentation(
        curves,
        names,
        tuple(tuple(r) for r in matrix),
        tuple(tuple(r) for r in u),
        tuple(diag),
        identify_reversals,
    )


def _splitting_complete(scene: Scene) -> bool:
    """Every oriented curve occurs as the cuff of some pants."""
    seen = set()
    for name in scene.pants:
        for cuff in scene.datum(name).cuffs:
            seen.add(cuff.curve)
    return all(c in seen for c in scene.curves())


def cobordism_group(scene: Scene, identify_reversals: bool = False) -> AbelianGroup:
    """Group presented by the boundary matrix.

    The raw cokernel (default) is the invariant of the matrix itself; passing
    `identify_reversals` adds the [L] = -[reversed L] relations realized by
    mirrored splitting cobordisms, and verifies they hold in the quotient.
    """
    pres = presentation_matrix(scene, identify_reversals)
    group = pres.group()
    if identify_reversals:
        for n in sorted({c.name for c in pres.curves}):
            vec = pres.multicurve_vector([Curve(n), Curve(n, False)])
            if any(pres.class_of(vec)):
                raise InternalInconsistencyError(
                    f"[{n}] + [{n} reversed] is nonzero despite identification"
                )
    return group


# ---------------------------------------------------------------------------
# classes and the parity invariant


@dataclass(frozen=True)
class BundleFixture:
    """Synthetic stand-in for the frame-bundle correspondence.

    `projection` maps curve vectors to coordinates of H1 of the base;
    `h1_base` gives each coordinate's order (0 = free); `parity_generator`
    is a multicurve vector generating the distinguished two-element kernel.
    """

    projection: tuple[tuple[int, ...], ...]
    h1_base: tuple[int, ...]
    parity_generator: tuple[int, ...]

    def projects_to_zero(self, vector: list[int]) -> bool:
        for i, row in enumerate(self.projection):
            val = sum(row[j] * vector[j] for j in range(len(vector)))
            order = self.h1_base[i]
            if order == 0:
                if val != 0:
                    return False
            elif val % order != 0:
                return False
        return True


@dataclass(frozen=True)
class CobordismClass:
    coordinates: tuple
    sigma: int | None = None


def cobordism_class(
    multicurve: list[Curve],
    scene: Scene,
    fixture: BundleFixture | None = None,
    want_sigma: bool = False,
    identify_reversals: bool = True,
) -> CobordismClass:
    """Class coordinates in the cobordism group, with the parity invariant.

    Sigma is defined only for multicurves whose projected base class
    vanishes; it is additive under disjoint union.
    """
    pres = presentation_matrix(scene, identify_reversals)
    vec = pres.multicurve_vector(multicurve)
    coords = pres.class_of(vec)
    sigma = None
    if want_sigma:
        if fixture is None:
            raise IncompleteSceneError("sigma needs a bundle fixture")
        if not fixture.projects_to_zero(vec):
            raise NotNullHomologousError(
                "sigma requested for a multicurve with nonzero base class"
            )
        if not any(coords):
            sigma = 0
        elif coords == pres.class_of(list(fixture.parity_generator)):
            sigma = 1
        else:
            raise InternalInconsistencyError(
                "null-homologous class outside the distinguished two-element kernel"
            )
    return CobordismClass(coords, sigma)


# ---------------------------------------------------------------------------
# panted complexes


@dataclass(frozen=True)
class Attachment:
    curve: str
    degree: int  # +1 or -1

    def __post_init__(self):
        if self.degree not in (1, -1):
            raise DomainError("cuffs attach with degree +1 or -1")


@dataclass(frozen=True)
class ComplexPants:
    name: str
    attachments: tuple[Attachment, Attachment, Attachment]


@dataclass(frozen=True)
class PantedComplex:
    curves: tuple[str, ...]
    pants: tuple[ComplexPants, ...]

    def attach_matrix(self) -> list[list[int]]:
        """Rows: structure curves; columns: structure pants (summed degrees)."""
        index = {c: i for i, c in enumerate(self.curves)}
        out = [[0] * len(self.pants) for _ in self.curves]
        for j, p in enumerate(self.pants):
            for att in p.attachments:
                if att.curve not in index:
                    raise UnknownCurveError(f"unknown structure curve {att.curve}")
                out[index[att.curve]][j] += att.degree
        return out


def h2_of_panted_complex(k: PantedComplex) -> AbelianGroup:
    """Second homology: the kernel of the attaching boundary map (free)."""
    if not k.pants:
        return AbelianGroup(0, ())
    matrix = k.attach_matrix()
    factors = invariant_factors(matrix)
    return AbelianGroup(len(k.pants) - len(factors), ())


def h2_kernel_basis(k: PantedComplex) -> list[list[int]]:
    matrix = k.attach_matrix()
    _, s, v = smith_normal_form(matrix)
    rank = sum(
        1 for i in range(min(len(s), len(s[0]) if s else 0)) if s[i][i]
    )
    basis = []
    for j in range(rank, len(k.pants)):
        basis.append([v[i][j] for i in range(len(k.pants))])
    return basis


def representative_surface(k: PantedComplex, alpha: list[int]) -> PantedSurface:
    """Closed oriented panted surface whose fundamental class maps to alpha.

    Takes |alpha_P| copies of each structure pants (reversed for negative
    signs) and pairs cuffs over each curve between opposite orientations;
    feasibility is exactly the kernel condition on alpha.
    """
    if len(alpha) != len(k.pants):
        raise DomainError("alpha must assign an integer to every structure pants")
    matrix = k.attach_matrix()
    for i, row in enumerate(matrix):
        if sum(row[j] * alpha[j] for j in range(len(alpha))) != 0:
            raise NotACycleError(
                f"alpha has nonzero attaching boundary on curve {k.curves[i]}"
            )

    curve_data = {c: (1.0, 0.0) for c in k.curves}
    pants_data = {}
    for p in k.pants:
        cuffs = tuple(
            CuffDatum(Curve(att.curve, att.degree == 1)) for att in p.attachments
        )
        pants_data[p.name] = PantsDatum(p.name, cuffs)
    scene = Scene(curve_data, pants_data)

    copies = []
    for p, a in zip(k.pants, alpha):
        for idx in range(abs(a)):
            copies.append(PantsCopy(p.name, a < 0, idx))

    by_curve: dict[Curve, list[CuffInstance]] = {}
    for copy in copies:
        datum = pants_data[copy.pants]
        for slot, cuff in enumerate(datum.cuffs):
            inst = CuffInstance(copy.pants, copy.rev, copy.index, slot)
            curve = cuff.curve.bar() if copy.rev else cuff.curve
            by_curve.setdefault(curve, []).append(inst)

    pairing: dict[CuffInstance, CuffInstance] = {}
    for name in sorted({c.name for c in by_curve}):
        pos = sorted(by_curve.get(Curve(name, True), []))
        neg = sorted(by_curve.get(Curve(name, False), []))
        if len(pos) != len(neg):
            raise InternalInconsistencyError(
                f"unbalanced cuff orientations over {name} despite the kernel condition"
            )
        for a, b in zip(pos, neg):
            pairing[a] = b
            pairing[b] = a
    surface = PantedSurface(scene, tuple(copies), pairing)
    if surface.boundary_multicurve():
        raise InternalInconsistencyError("representative surface has boundary")
    return surface
