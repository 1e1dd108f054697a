"""Derived constructions: splitting, swapping, rotation, antirotation.

Inputs are bigons and tripods over a bank of named segments; outputs are
assemblies: pants with cyclic-word cuffs, internal pairings joining each word
with its reversal, and a declared boundary.  Auxiliary segments demanded by
the constructions are synthesized with exactly the prescribed length and
phase attributes and the assembly is marked symbolic.

Cyclic words track per-joint bend annotations (used for length-window
estimates) and framing flips (the flip of a word names the same curve, so
canonical comparison drops flips).  Free cancellation and minimal rotation
give the canonical form.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import halfspace as hs
from .errors import (
    DomainError,
    HypothesisViolationError,
    InternalInconsistencyError,
)
from .segments import (
    Chain,
    DFramedSegment,
    FramedPoint,
    limit_inefficiency,
    segment_from_pose,
)

RIGHT_ANGLE = math.pi / 2.0
THIRD_ANGLE = math.pi / 3.0


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True, order=True)
class Letter:
    seg: str
    bar: bool = False
    flip: bool = False

    def inverse(self) -> "Letter":
        return Letter(self.seg, not self.bar, self.flip)

    def flipped(self) -> "Letter":
        return Letter(self.seg, self.bar, not self.flip)

    def token(self) -> str:
        return self.seg + ("~" if self.bar else "") + ("*" if self.flip else "")


@dataclass(frozen=True)
class Word:
    """Cyclic word; bends[i] annotates the joint after letters[i] (wrapping)."""

    letters: tuple[Letter, ...]
    bends: tuple[float, ...] = ()

    def __post_init__(self):
        if self.bends and len(self.bends) != len(self.letters):
            raise DomainError("bend annotations must match the letter count")

    def joint_bends(self) -> tuple[float, ...]:
        return self.bends if self.bends else (0.0,) * len(self.letters)

    def bar(self) -> "Word":
        k = len(self.letters)
        letters = tuple(l.inverse() for l in reversed(self.letters))
        old = self.joint_bends()
        bends = tuple(old[(k - 2 - j) % k] for j in range(k))
        return Word(letters, bends)

    def flip(self) -> "Word":
        return Word(tuple(l.flipped() for l in self.letters), self.bends)

    def canonical(self) -> tuple:
        """Curve name: flips dropped, free cyclic reduction, minimal rotation."""
        letters = [(l.seg, l.bar) for l in self.letters]
        changed = True
        while changed and letters:
            changed = False
            n = len(letters)
            for i in range(n):
                j = (i + 1) % n
                if n >= 2 and letters[i][0] == letters[j][0] and letters[i][1] != letters[j][1]:
                    for k in sorted({i, j}, reverse=True):
                        letters.pop(k)
                    changed = True
                    break
        if not letters:
            return ()
        rotations = [tuple(letters[i:] + letters[:i]) for i in range(len(letters))]
        return min(rotations)

    def tokens(self) -> list[str]:
        return [l.token() for l in self.letters]

    def __repr__(self):
        return "[" + " ".join(self.tokens()) + "]"


def word(*tokens: str) -> Word:
    """Parse letters from tokens like "a", "a~", "a*", "a~*"."""
    letters = []
    for t in tokens:
        flip = t.endswith("*")
        if flip:
            t = t[:-1]
        bar = t.endswith("~")
        if bar:
            t = t[:-1]
        letters.append(Letter(t, bar, flip))
    return Word(tuple(letters))


def concat_words(parts: list[tuple[Word, float]]) -> Word:
    """Join edge words cyclically; each part's final joint takes the given bend."""
    letters: list[Letter] = []
    bends: list[float] = []
    for w, corner in parts:
        inner = list(w.joint_bends())
        letters.extend(w.letters)
        bends.extend(inner[:-1])
        bends.append(corner)
    return Word(tuple(letters), tuple(bends))


def edge(parts: list[tuple[Word, float]]) -> Word:
    """Linear edge word; bend after the final letter is a placeholder zero."""
    w = concat_words(parts)
    return Word(w.letters, w.bends[:-1] + (0.0,))


def expand_word(w: Word, mapping: dict[str, tuple[str, str]]) -> Word:
    """Substitute decomposed legs: each mapped letter b becomes c r (bar: r~ c~)."""
    letters: list[Letter] = []
    bends: list[float] = []
    for letter, bend in zip(w.letters, w.joint_bends()):
        if letter.seg in mapping:
            c, r = mapping[letter.seg]
            if letter.bar:
                sub = [Letter(r, True, letter.flip), Letter(c, True, letter.flip)]
            else:
                sub = [Letter(c, False, letter.flip), Letter(r, False, letter.flip)]
            letters.extend(sub)
            bends.extend([0.0, bend])
        else:
            letters.append(letter)
            bends.append(bend)
    return Word(tuple(letters), tuple(bends))


# ---------------------------------------------------------------------------
# segment bank


@dataclass
class SegmentAttrs:
    length: float
    phase: float
    geometry: DFramedSegment | None = None
    symbolic: bool = True


class SegmentBank:
    """Named segments with attributes; synthesizes auxiliary segments."""

    def __init__(self):
        self._segs: dict[str, SegmentAttrs] = {}
        self._fresh = 0

    def add(self, name: str, length: float, phase: float,
            geometry: DFramedSegment | None = None) -> str:
        if name in self._segs:
            raise DomainError(f"segment {name!r} already defined")
        if not length > 0:
            raise DomainError("segment length must be positive")
        self._segs[name] = SegmentAttrs(
            length, hs.wrap_angle(phase), geometry, geometry is None
        )
        return name

    def fresh(self, prefix: str, length: float, phase: float) -> str:
        self._fresh += 1
        return self.add(f"{prefix}.{self._fresh}", length, phase)

    def attrs(self, name: str) -> SegmentAttrs:
        try:
            return self._segs[name]
        except KeyError:
            raise DomainError(f"unknown segment {name!r}") from None

    def length(self, letter: Letter) -> float:
        return self.attrs(letter.seg).length

    def phase(self, letter: Letter) -> float:
        # length and phase are invariant under orientation reversal
        return self.attrs(letter.seg).phase

    def word_length(self, w: Word) -> float:
        """Reduction estimate: total length minus joint inefficiencies."""
        total = sum(self.length(l) for l in w.letters)
        return total - sum(limit_inefficiency(b) for b in w.joint_bends())

    def edge_length(self, w: Word) -> float:
        """Estimate for a linear edge: final (placeholder) joint excluded."""
        total = sum(self.length(l) for l in w.letters)
        return total - sum(limit_inefficiency(b) for b in w.joint_bends()[:-1])

    def word_phase(self, w: Word) -> float:
        return hs.wrap_angle(sum(self.phase(l) for l in w.letters))

    def symbolic_word(self, w: Word) -> bool:
        return any(self.attrs(l.seg).symbolic for l in w.letters)


def window_error(bank: SegmentBank, w: Word, delta: float) -> tuple[float, float]:
    """Formula error bounds for the reduced cycle the word names."""
    m = len(w.letters)
    lengths = [bank.length(l) for l in w.letters]
    L = min(lengths) / 2.0 * 0.999
    bends = w.joint_bends()
    theta = max(max(bends) * 1.001, 1e-6)
    beat = math.exp((-L + 10.0 * math.log(2.0)) / 2.0) * math.sin(theta / 2.0)
    return m * beat / (L - math.log(2.0)), m * (delta + beat)


# ---------------------------------------------------------------------------
# bigons, tripods, pairs


@dataclass(frozen=True)
class Bigon:
    """Tame two-edge cycle with near-zero phases; names the curve [a b]."""

    a: Word
    b: Word
    corner_bend: float = 0.0  # prescribed bend at both corners

    def cuff(self) -> Word:
        return concat_words([(self.a, self.corner_bend), (self.b, self.corner_bend)])


@dataclass(frozen=True)
class Tripod:
    legs: tuple[str, str, str]
    chirality: str  # "left" or "right"

    def side(self, i: int) -> Word:
        """Side (bar a_i) a_{i+1}, center joint annotated with pi/3."""
        a_i, a_next = self.legs[i % 3], self.legs[(i + 1) % 3]
        return Word((Letter(a_i, True), Letter(a_next, False)), (THIRD_ANGLE, 0.0))

    def flipped(self) -> "Tripod":
        return Tripod(self.legs, "left" if self.chirality == "right" else "right")

    def reordered(self, order: tuple[int, int, int]) -> "Tripod":
        legs = tuple(self.legs[i] for i in order)
        even = order in ((0, 1, 2), (1, 2, 0), (2, 0, 1))
        chir = self.chirality
        if not even:
            chir = "left" if chir == "right" else "right"
        return Tripod(legs, chir)


def tripod_chirality(directions: list[np.ndarray], framing: np.ndarray,
                     tol: float = 1e-9) -> str:
    """Rotation sense of three leg directions about the common framing."""
    n = framing / np.linalg.norm(framing)
    ref = directions[0] - np.dot(directions[0], n) * n
    if np.linalg.norm(ref) < tol:
        raise DomainError("leg direction parallel to the framing")
    e1 = ref / np.linalg.norm(ref)
    e2 = np.cross(n, e1)
    angles = []
    for d in directions:
        u = d - np.dot(d, n) * n
        angles.append(math.atan2(float(np.dot(u, e2)), float(np.dot(u, e1))))
    t1 = (angles[1] - angles[0]) % (2.0 * math.pi)
    t2 = (angles[2] - angles[0]) % (2.0 * math.pi)
    if abs(math.sin(t1)) < tol or abs(math.sin(t2 - t1)) < tol:
        raise DomainError("ambiguous chirality: degenerate direction spread")
    return "right" if t1 < t2 else "left"


def geometric_tripod(center: FramedPoint, lengths, phases, spread=None):
    """Realize three legs from a common center; returns (segments, chirality)."""
    spread = spread if spread is not None else [0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0]
    segs = []
    dirs = []
    for ang, (l, ph) in zip(spread, zip(lengths, phases)):
        tangent = hs.rotate_about(center.tangent, center.normal, ang)
        pose = FramedPoint(center.position, tangent, center.normal)
        segs.append(segment_from_pose(pose, l, ph))
        dirs.append(tangent)
    return segs, tripod_chirality(dirs, center.normal)


# ---------------------------------------------------------------------------
# assemblies


@dataclass
class Assembly:
    pants: list[tuple[Word, Word, Word]]
    internal: list[tuple[tuple[int, int], tuple[int, int]]]
    boundary: list[Word]
    symbolic: bool
    note: str = ""
    # leg decompositions introduced by the construction (b -> (c, r))
    decomposition: dict[str, tuple[str, str]] | None = None

    def euler_characteristic(self) -> int:
        return -len(self.pants)

    def boundary_keys(self) -> Counter:
        return Counter(w.canonical() for w in self.boundary)

    def cuff_words(self) -> list[Word]:
        return [w for triple in self.pants for w in triple]

    def verify(self) -> None:
        paired: set[tuple[int, int]] = set()
        for (i, s), (j, t) in self.internal:
            wa, wb = self.pants[i][s], self.pants[j][t]
            if wa.canonical() != wb.bar().canonical():
                raise InternalInconsistencyError(
                    f"internal pairing {wa} vs {wb} is not a word/bar-word match"
                )
            if (i, s) in paired or (j, t) in paired or (i, s) == (j, t):
                raise InternalInconsistencyError("slot paired twice")
            paired.update([(i, s), (j, t)])
        free = [
            self.pants[i][s]
            for i in range(len(self.pants))
            for s in range(3)
            if (i, s) not in paired
        ]
        if Counter(w.canonical() for w in free) != self.boundary_keys():
            raise InternalInconsistencyError("declared boundary differs from unpaired cuffs")

    def merged(self, other: "Assembly") -> "Assembly":
        off = len(self.pants)
        internal = self.internal + [
            ((i + off, s), (j + off, t)) for (i, s), (j, t) in other.internal
        ]
        return Assembly(
            self.pants + other.pants,
            internal,
            self.boundary + other.boundary,
            self.symbolic or other.symbolic,
            self.note,
        )


def _auto_pair(assembly: Assembly, expected_boundary: list[Word]) -> Assembly:
    """Pair leftover cuffs w with bar(w), leaving exactly the expected boundary."""
    paired = {slot for pair in assembly.internal for slot in pair}
    free = [
        (i, s)
        for i in range(len(assembly.pants))
        for s in range(3)
        if (i, s) not in paired
    ]
    budget = Counter(w.canonical() for w in expected_boundary)
    by_key: dict[tuple, list[tuple[int, int]]] = {}
    for slot in free:
        w = assembly.pants[slot[0]][slot[1]]
        key = w.canonical()
        if budget[key] > 0:
            budget[key] -= 1
        else:
            by_key.setdefault(key, []).append(slot)
    if +budget:
        raise InternalInconsistencyError(f"expected boundary not present: {+budget}")
    internal = list(assembly.internal)
    while by_key:
        key = sorted(by_key)[0]
        slots = by_key[key]
        slot = slots.pop(0)
        if not slots:
            del by_key[key]
        w = assembly.pants[slot[0]][slot[1]]
        bkey = w.bar().canonical()
        partners = by_key.get(bkey)
        if not partners:
            raise InternalInconsistencyError(f"unmatched internal cuff {w}")
        partner = partners.pop(0)
        if not partners:
            del by_key[bkey]
        internal.append((slot, partner))
    return Assembly(assembly.pants, internal, expected_boundary, assembly.symbolic,
                    assembly.note)


def verify_windows(bank: SegmentBank, asm: Assembly, R: float, window: float,
                   delta: float) -> None:
    """Every cuff's estimated complex length lies in the given window of R."""
    for w in asm.cuff_words():
        est_l = bank.word_length(w)
        est_p = bank.word_phase(w)
        err_l, err_p = window_error(bank, w, delta)
        gap = math.hypot(est_l - R, hs.circle_distance(est_p, 0.0))
        if gap + err_l + err_p >= window:
            raise HypothesisViolationError(
                "cuff window",
                f"cuff {w}: estimate {est_l:.4f}{est_p:+.4f}i not within {window} of {R}",
            )


# ---------------------------------------------------------------------------
# hypothesis helpers


def _require(cond: bool, clause: str, detail: str = "") -> None:
    if not cond:
        raise HypothesisViolationError(clause, detail)


def _close(x: float, y: float, delta: float) -> bool:
    return abs(x - y) <= delta


def _phase_close(x: float, y: float, delta: float) -> bool:
    return hs.circle_distance(x, y) <= delta


def _check_window(bank: SegmentBank, w: Word, R: float, window: float,
                  delta: float, clause: str) -> None:
    est_l = bank.word_length(w)
    est_p = bank.word_phase(w)
    err_l, err_p = window_error(bank, w, delta)
    gap = math.hypot(est_l - R, hs.circle_distance(est_p, 0.0))
    _require(
        gap + err_l + err_p < window,
        clause,
        f"cuff {w}: estimated complex length off R by {gap:.6f}",
    )


# ---------------------------------------------------------------------------
# splitting


def split(bank: SegmentBank, bigon: Bigon, R: float, delta: float, epsilon: float,
          aux: str | None = None) -> Assembly:
    """One nearly regular pants with the bigon as one cuff.

    The connector runs from the end of the first edge back to its start with
    length R - len(a) + 2 I(pi/2) and opposite phase; the other two cuffs
    cross it at right angles.
    """
    _require(epsilon >= 10.0 * delta, "epsilon >= 10 delta", f"{epsilon} < 10*{delta}")
    _require(len(bigon.a.letters) == 1 and len(bigon.b.letters) == 1,
             "simple bigon", "splitting expects single-segment edges")
    s, sp = bigon.a.letters[0], bigon.b.letters[0]
    _require(_close(bank.length(s), bank.length(sp), delta),
             "edge lengths delta-close", "")
    _require(_phase_close(bank.phase(s), bank.phase(sp), delta),
             "edge phases delta-close", "")
    for letter in (s, sp):
        _require(_phase_close(bank.phase(letter), 0.0, delta),
                 "bigon phases delta-close to 0", letter.token())
    _check_window(bank, bigon.cuff(), R, epsilon, delta,
                  "bigon curve in the (R, epsilon) window")

    want_len = R - bank.length(s) + 2.0 * limit_inefficiency(RIGHT_ANGLE)
    want_phase = -bank.phase(s)
    if aux is None:
        aux = bank.fresh("m", want_len, want_phase)
    else:
        _require(_close(bank.attrs(aux).length, want_len, delta),
                 "connector length", f"{bank.attrs(aux).length} vs {want_len}")
        _require(_phase_close(bank.attrs(aux).phase, want_phase, delta),
                 "connector phase", "")
    m = Letter(aux)

    w1 = bigon.cuff()
    w2 = concat_words([(Word((s,)), RIGHT_ANGLE), (Word((m,)), RIGHT_ANGLE)]).bar()
    w3 = concat_words([(Word((m.inverse(),)), RIGHT_ANGLE), (Word((sp,)), RIGHT_ANGLE)]).bar()
    asm = Assembly([(w1, w2, w3)], [], [w1, w2, w3], bank.symbolic_word(w2),
                   note="splitting")
    for w in (w2, w3):
        _check_window(bank, w, R, 10.0 * delta + 1e-9, delta,
                      "connector cuffs in the (R, 10 delta) window")
    asm.verify()
    return asm


# ---------------------------------------------------------------------------
# swapping


def _halves(bank: SegmentBank, w: Word, rewrites: dict) -> tuple[Word, Word]:
    """Split an edge at the most balanced letter boundary.

    Single letters divide into synthesized equal halves (recorded in
    `rewrites`); multi-letter edges split between letters.
    """
    if len(w.letters) == 1:
        letter = w.letters[0]
        attrs = bank.attrs(letter.seg)
        if letter.seg in rewrites:
            minus, plus = rewrites[letter.seg]
        else:
            minus = bank.fresh(letter.seg + "-", attrs.length / 2.0, attrs.phase / 2.0)
            plus = bank.fresh(letter.seg + "+", attrs.length / 2.0, attrs.phase / 2.0)
            rewrites[letter.seg] = (minus, plus)
        first, second = Word((Letter(minus),), (0.0,)), Word((Letter(plus),), (0.0,))
        if letter.bar:
            first, second = second.bar(), first.bar()
        return first, second
    lengths = [bank.length(l) for l in w.letters]
    total = sum(lengths)
    best, acc, bestgap = 1, 0.0, math.inf
    for k in range(1, len(w.letters)):
        acc += lengths[k - 1]
        if abs(2 * acc - total) < bestgap:
            bestgap = abs(2 * acc - total)
            best = k
    bends = list(w.joint_bends())
    return (
        Word(w.letters[:best], tuple(bends[: best - 1] + [0.0])),
        Word(w.letters[best:], tuple(bends[best:])),
    )


def _swap_step1(bank: SegmentBank, a: Word, b: Word, ap: Word, bp: Word,
                R: float, delta: float, corner: float) -> Assembly:
    """Four pants sharing one connector; boundary [ab], [a'b'], bar[ab'], bar[a'b]."""
    want_len = R - bank.edge_length(a) + 2.0 * limit_inefficiency(RIGHT_ANGLE)
    want_phase = -bank.word_phase(a)
    m = Letter(bank.fresh("m", want_len, want_phase))
    wm, wmbar = Word((m,), (0.0,)), Word((m.inverse(),), (0.0,))

    def cuff(x: Word, y: Word, bend: float) -> Word:
        return concat_words([(x, bend), (y, bend)])

    pants = []
    for x, y, outer_bar in (
        (a, b, False), (ap, bp, False), (a, bp, True), (ap, b, True),
    ):
        c1 = cuff(x, y, corner)
        c2 = cuff(x, wm, RIGHT_ANGLE).bar()
        c3 = cuff(wmbar, y, RIGHT_ANGLE).bar()
        if outer_bar:
            c1, c2, c3 = c1.bar(), c2.bar(), c3.bar()
        pants.append((c1, c2, c3))
    boundary = [pants[0][0], pants[1][0], pants[2][0], pants[3][0]]
    asm = Assembly(pants, [], boundary, True, note="swapping:step1")
    return _auto_pair(asm, boundary)


def swap(bank: SegmentBank, bigon1: Bigon, bigon2: Bigon, L: float, R: float,
         delta: float, epsilon: float) -> Assembly:
    """Four-holed assembly with boundary [ab], [a'b'], bar[ab'], bar[a'b]."""
    a, b = bigon1.a, bigon1.b
    ap, bp = bigon2.a, bigon2.b
    _require(_close(bank.edge_length(a), bank.edge_length(ap), delta),
             "swap pair: a edges delta-close", "")
    _require(_close(bank.edge_length(b), bank.edge_length(bp), delta),
             "swap pair: b edges delta-close", "")
    _require(_phase_close(bank.word_phase(a), bank.word_phase(ap), delta),
             "swap pair: a phases delta-close", "")
    _require(_phase_close(bank.word_phase(b), bank.word_phase(bp), delta),
             "swap pair: b phases delta-close", "")
    corner = max(bigon1.corner_bend, bigon2.corner_bend)
    for bg in (bigon1, bigon2):
        _check_window(bank, bg.cuff(), R, epsilon, delta,
                      "swap curves in the (R, epsilon) window")
    for x, y in ((a, bp), (ap, b)):
        _check_window(bank, concat_words([(x, corner), (y, corner)]), R, epsilon,
                      delta, "swap curves in the (R, epsilon) window")

    close = all(
        _close(bank.edge_length(x), bank.edge_length(y), delta)
        and _phase_close(bank.word_phase(x), bank.word_phase(y), delta)
        for x, y in ((a, b), (a, ap))
    )
    if close:
        _require(epsilon >= 10.0 * delta, "epsilon >= 10 delta", "")
        out = _swap_step1(bank, a, b, ap, bp, R, delta, corner)
        out.verify()
        return out

    _require(epsilon >= 100.0 * delta, "epsilon >= 100 delta", "")
    rewrites: dict = {}
    a_m, a_p = _halves(bank, a, rewrites)
    ap_m, ap_p = _halves(bank, ap, rewrites)
    b_m, b_p = _halves(bank, b, rewrites)
    bp_m, bp_p = _halves(bank, bp, rewrites)

    len_r_a = R / 2.0 - bank.edge_length(a_p) - 2.0 * L
    len_r_b = R / 2.0 - bank.edge_length(b_p) - 2.0 * L
    _require(len_r_a > 0 and len_r_b > 0, "connector length positive",
             "edges too long for the stated R and L")
    s_len = 2.0 * L + limit_inefficiency(RIGHT_ANGLE)
    r_a = Word((Letter(bank.fresh("r.a", len_r_a, 0.0)),), (0.0,))
    r_b = Word((Letter(bank.fresh("r.b", len_r_b, 0.0)),), (0.0,))
    s_a = Word((Letter(bank.fresh("s.a", s_len, -bank.word_phase(a_p))),), (0.0,))
    s_ap = Word((Letter(bank.fresh("s.a'", s_len, -bank.word_phase(ap_p))),), (0.0,))
    s_b = Word((Letter(bank.fresh("s.b", s_len, -bank.word_phase(b_p))),), (0.0,))
    s_bp = Word((Letter(bank.fresh("s.b'", s_len, -bank.word_phase(bp_p))),), (0.0,))
    r = edge([(r_a, 0.0), (r_b, 0.0)])

    # the four central pants; two right-angle joints sit where the short
    # connectors meet the long one
    pants = []
    for (x, x_m, x_p, sx), (y, y_m, y_p, sy), outer_bar in (
        ((a, a_m, a_p, s_a), (b, b_m, b_p, s_b), False),
        ((ap, ap_m, ap_p, s_ap), (bp, bp_m, bp_p, s_bp), False),
        ((a, a_m, a_p, s_a), (bp, bp_m, bp_p, s_bp), True),
        ((ap, ap_m, ap_p, s_ap), (b, b_m, b_p, s_b), True),
    ):
        c1 = concat_words([(x, corner), (y, corner)])
        c2 = concat_words([
            (edge([(sx.bar(), 0.0), (x_p, 0.0)]), corner),
            (edge([(y_m, 0.0), (sy, 0.0)]), RIGHT_ANGLE),
            (r.bar(), RIGHT_ANGLE),
        ]).bar()
        c3 = concat_words([
            (edge([(x_m, 0.0), (sx, 0.0)]), RIGHT_ANGLE),
            (r, RIGHT_ANGLE),
            (edge([(sy.bar(), 0.0), (y_p, 0.0)]), corner),
        ]).bar()
        if outer_bar:
            c1, c2, c3 = c1.bar(), c2.bar(), c3.bar()
        pants.append((c1, c2, c3))
    central = Assembly(pants, [], [], True, note="swapping:step2")

    # E pieces: step-1 swaps over the divided edges
    e1 = _swap_step1(
        bank,
        edge([(r_a.bar(), RIGHT_ANGLE), (s_a.bar(), 0.0), (a_p, 0.0)]),
        edge([(b_m, 0.0), (s_b, RIGHT_ANGLE), (r_b.bar(), 0.0)]),
        edge([(r_a.bar(), RIGHT_ANGLE), (s_ap.bar(), 0.0), (ap_p, 0.0)]),
        edge([(bp_m, 0.0), (s_bp, RIGHT_ANGLE), (r_b.bar(), 0.0)]),
        R, delta, corner,
    )
    e2 = _swap_step1(
        bank,
        edge([(a_m, 0.0), (s_a, RIGHT_ANGLE), (r_a, 0.0)]),
        edge([(r_b, RIGHT_ANGLE), (s_b.bar(), 0.0), (b_p, 0.0)]),
        edge([(ap_m, 0.0), (s_ap, RIGHT_ANGLE), (r_a, 0.0)]),
        edge([(r_b, RIGHT_ANGLE), (s_bp.bar(), 0.0), (bp_p, 0.0)]),
        R, delta, corner,
    )

    merged = central.merged(e1).merged(e2)
    boundary = [pants[0][0], pants[1][0], pants[2][0], pants[3][0]]
    out = _auto_pair(
        Assembly(merged.pants, merged.internal, [], True, note="swapping:step2"),
        boundary,
    )
    out.verify()
    return out


# ---------------------------------------------------------------------------
# rotation


@dataclass(frozen=True)
class RotationPair:
    a: Tripod
    b: Tripod
    leg_length_a: float
    leg_length_b: float


def _rotation_hypotheses(bank: SegmentBank, pair: RotationPair, L: float,
                         delta: float) -> None:
    for tripod, leg_len in ((pair.a, pair.leg_length_a), (pair.b, pair.leg_length_b)):
        for leg in tripod.legs:
            attrs = bank.attrs(leg)
            _require(attrs.length > 2.0 * 100.0 * L, "legs longer than 200 L",
                     f"leg {leg} has length {attrs.length}")
            _require(_phase_close(attrs.phase, 0.0, delta),
                     "leg phases delta-close to 0", leg)
            _require(_close(attrs.length, leg_len, delta),
                     "nearly regular legs", leg)


def rotation_boundary_words(pair: RotationPair, delta: float = 0.0) -> list[Word]:
    """The stated boundary [a_{i,i+1} bar(b_{i,i+1})] in input letters."""
    return [
        concat_words([(pair.a.side(i), delta), (pair.b.side(i).bar(), delta)])
        for i in range(3)
    ]


def make_decomposition(bank: SegmentBank, tripod: Tripod, leg_length: float):
    """Rewrite the tripod's legs with a shared terminal connector b_i = c_i r.

    Returns (r word, s word, c tripod, mapping).  s is the framing-flipped
    sibling of r used by the flipped side pieces.
    """
    len_r = leg_length / 2.0
    r = Word((Letter(bank.fresh("r", len_r, 0.0)),), (0.0,))
    s = Word((Letter(bank.fresh("s", len_r, 0.0)),), (0.0,))
    c_legs = tuple(
        bank.fresh(f"c{i}", bank.attrs(tripod.legs[i]).length - len_r,
                   bank.attrs(tripod.legs[i]).phase)
        for i in range(3)
    )
    mapping = {
        tripod.legs[i]: (c_legs[i], r.letters[0].seg) for i in range(3)
    }
    return r, s, Tripod(c_legs, tripod.chirality), mapping


def rotate(bank: SegmentBank, pair: RotationPair, L: float, R: float,
           delta: float, epsilon: float, _decomposition=None) -> Assembly:
    """Pants (opposite chirality) or six-holed assembly (identical chirality).

    Boundary: [a_{i,i+1} bar(b_{i,i+1})] once per i when chiralities differ,
    twice per i when they agree.  The identical case rewrites the second
    tripod's legs with a shared terminal connector b_i = c_i r, hangs swap
    pieces on the sides, and closes them with rotation pants.
    """
    _rotation_hypotheses(bank, pair, L, delta)
    ta, tb = pair.a, pair.b
    cuffs = rotation_boundary_words(pair, delta)
    for w in cuffs:
        _check_window(bank, w, R, epsilon, delta,
                      "rotation curves in the (R, epsilon) window")

    if ta.chirality != tb.chirality:
        triple = tuple(cuffs)
        asm = Assembly([triple], [], list(triple), True, note="rotation:opposite")
        asm.verify()
        return asm

    _require(epsilon >= 1000.0 * delta, "epsilon >= 1000 delta", "")
    if _decomposition is None:
        _decomposition = make_decomposition(bank, tb, pair.leg_length_b)
    r, s, tc, mapping = _decomposition

    def P(i: int) -> Word:
        return ta.side(i)

    def Q(i: int) -> Word:
        return edge([(r.bar(), 0.0), (tc.side(i).bar(), 0.0), (r, 0.0)])

    def Qs(i: int) -> Word:
        return edge([(s.bar(), 0.0), (tc.side(i).bar().flip(), 0.0), (s, 0.0)])

    pieces: list[Assembly] = []
    outer: list[Word] = []
    for i in range(3):
        for _ in range(2):
            pieces.append(
                swap(bank, Bigon(P(i), Q(i), delta), Bigon(P(i).bar(), Qs(i), delta),
                     L, R, delta, epsilon)
            )
        outer.append(concat_words([(P(i), delta), (Q(i), delta)]))

    def pants_piece(words: tuple[Word, Word, Word]) -> Assembly:
        return Assembly([words], [], list(words), True)

    k_cuff = tuple(
        concat_words([(P(i).bar(), delta), (Qs(i), delta)]).bar() for i in range(3)
    )
    h_cuff = tuple(
        concat_words([(P(i), delta), (Qs(i), delta)]) for i in range(3)
    )
    g_cuff = tuple(
        concat_words([(P(i).bar(), delta), (Q(i), delta)]) for i in range(3)
    )
    for triple in (k_cuff, k_cuff, h_cuff, h_cuff, g_cuff, g_cuff):
        pieces.append(pants_piece(triple))

    merged = pieces[0]
    for p in pieces[1:]:
        merged = merged.merged(p)
    boundary = outer + outer
    out = _auto_pair(Assembly(merged.pants, merged.internal, [], True,
                              note="rotation:identical"), boundary)
    out.decomposition = mapping
    out.verify()
    return out


# ---------------------------------------------------------------------------
# antirotation


def antirotation_boundary_words(pair: RotationPair, delta: float = 0.0) -> list[Word]:
    """The stated boundary [a_{i,i+1} bar(b_{i+1,i})] in input letters."""
    out = []
    for i in range(3):
        b_rev = Word(
            (Letter(pair.b.legs[(i + 1) % 3], True), Letter(pair.b.legs[i % 3])),
            (THIRD_ANGLE, 0.0),
        )
        out.append(concat_words([(pair.a.side(i), delta), (b_rev.bar(), delta)]))
    return out


def antirotate(bank: SegmentBank, pair: RotationPair, L: float, R: float,
               delta: float, epsilon: float) -> Assembly:
    """Cross-indexed boundary [a_{i,i+1} bar(b_{i+1,i})].

    Identical chirality: exactly three boundary components; opposite: two
    copies of each.  Built from swapping pieces glued against the rotation of
    the reordered second tripod (b_0, b_2, b_1), whose chirality is opposite.
    """
    if pair.a.chirality != pair.b.chirality:
        _require(epsilon >= 1000.0 * delta, "epsilon >= 1000 delta", "")
    else:
        _require(epsilon >= 100.0 * delta, "epsilon >= 100 delta", "")
    ta, tb = pair.a, pair.b
    targets = antirotation_boundary_words(pair, delta)
    for w in targets:
        _check_window(bank, w, R, epsilon, delta,
                      "antirotation curves in the (R, epsilon) window")

    def edge_b(i: int, j: int) -> Word:
        return Word((Letter(tb.legs[i % 3], True), Letter(tb.legs[j % 3])),
                    (THIRD_ANGLE, 0.0))

    reordered = tb.reordered((0, 2, 1))
    sub = pair.a.chirality == pair.b.chirality  # reordered chirality is opposite
    mapping: dict[str, tuple[str, str]] = {}
    if sub:
        decomposition = None
    else:
        decomposition = make_decomposition(bank, reordered, pair.leg_length_b)
        mapping = decomposition[3]
    rot = rotate(bank, RotationPair(ta, reordered, pair.leg_length_a,
                                    pair.leg_length_b), L, R, delta, epsilon,
                 _decomposition=decomposition)

    def mk_e() -> Assembly:
        return swap(
            bank,
            Bigon(ta.side(0), expand_word(edge_b(0, 1), mapping), delta),
            Bigon(ta.side(2), expand_word(edge_b(2, 0), mapping), delta),
            L, R, delta, epsilon,
        )

    if pair.a.chirality == pair.b.chirality:
        merged = mk_e().merged(rot)
        boundary = list(targets)
        note = "antirotation:identical"
    else:
        merged = mk_e().merged(mk_e()).merged(rot)
        boundary = [expand_word(t, mapping) for t in targets + targets]
        note = "antirotation:opposite"
    out = _auto_pair(Assembly(merged.pants, merged.internal, [], True, note=note),
                     boundary)
    out.decomposition = mapping or None
    out.verify()
    return out


# ---------------------------------------------------------------------------
# chain realization (window verification against exact holonomy)


def realize_cuff(bank: SegmentBank, w: Word, start: FramedPoint) -> Chain:
    """Materialize the cuff's attribute data as a half-space chain.

    Segment lengths and phases are the bank attributes (orientation reversal
    preserves both); each annotated bend becomes a tangent rotation about the
    carried framing, and the final joint's bend rides on the base frame.
    """
    bends = list(w.joint_bends())
    base = start
    pose = base.turned(bends[-1])
    segs = []
    for k, (letter, bend) in enumerate(zip(w.letters, bends)):
        attrs = bank.attrs(letter.seg)
        seg = segment_from_pose(pose, attrs.length, attrs.phase)
        segs.append(seg)
        if k + 1 < len(w.letters):
            pose = seg.terminal.turned(bend)
    return Chain(tuple(segs), cyclic=True, base_frame=base)
