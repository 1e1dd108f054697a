"""Boundary-framed geodesic segments and the approximate length/phase calculus.

A framed segment is an oriented geodesic arc carrying a unit normal vector at
each endpoint.  Its complex length combines the arc length with the phase: the
signed angle from the initial normal to the parallel transport of the terminal
normal back along the arc, counterclockwise about the initial direction.

Chains of segments support two parallel routes:

* exact reduction by isometry composition (`reduce_chain`, `reduce_cycle`);
* the approximate calculus (`predict_chain`, `predict_cycle`) whose error
  terms are controlled by the limit inefficiency I(theta) = 2 log sec(theta/2)
  under tameness hypotheses.

Cyclic chains close by frame identification: the terminal frame of the last
segment is identified with a base frame sitting at the start (by default the
first segment's initial frame).  The holonomy of the cycle is the isometry
realizing that identification, which is exactly the deck transformation of the
closed-up loop; nontrivial tame cycles only exist in quotients, so the literal
last-to-first coincidence is required of the quotient rather than the model.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import halfspace as hs
from .errors import (
    AmbiguousFramingError,
    DegenerateReductionError,
    DegenerateSegmentError,
    DegenerateTriangleError,
    DomainError,
    HypothesisViolationError,
    InternalInconsistencyError,
    InvalidFrameError,
    JointMismatchError,
    NonLoxodromicError,
)

TOL_GEO = hs.TOL_GEO


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class FramedPoint:
    """Interior point with an orthonormal (tangent, normal) pair.

    Vectors are Euclidean 3-vectors of hyperbolic unit norm (Euclidean norm
    equal to the z-coordinate).  Frames produced by this library's own
    compositions carry a cached isometry matrix (`mat`); matrix-based
    operations prefer it, so long chains stay accurate even where the affine
    coordinates lose precision far from the origin.
    """

    position: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    mat: hs.Matrix | None = field(default=None, compare=False, repr=False)

    def validate(self, tol: float = TOL_GEO) -> "FramedPoint":
        z = float(self.position[2])
        if not z > 0:
            raise InvalidFrameError(f"z-coordinate must be positive, got {z}")
        for name, v in (("tangent", self.tangent), ("normal", self.normal)):
            if abs(np.linalg.norm(v / z) - 1.0) > tol:
                raise InvalidFrameError(f"{name} is not hyperbolic-unit at the point")
        if abs(float(np.dot(self.tangent / z, self.normal / z))) > tol:
            raise InvalidFrameError("tangent and normal are not orthogonal")
        return self

    def matrix(self) -> hs.Matrix:
        if self.mat is not None:
            return self.mat
        return hs.frame_to_matrix(self.position, self.tangent, self.normal)

    def tangent_dir(self) -> np.ndarray:
        if self.mat is not None:
            return hs.matrix_directions(self.mat)[0]
        return hs.unitize(self.tangent)

    def normal_dir(self) -> np.ndarray:
        if self.mat is not None:
            return hs.matrix_directions(self.mat)[1]
        return hs.unitize(self.normal)

    def binormal(self) -> np.ndarray:
        """tangent x normal, rescaled to hyperbolic unit norm."""
        z = float(self.position[2])
        return np.cross(self.tangent_dir(), self.normal_dir()) * z

    def rotated(self, phi: float) -> "FramedPoint":
        """Rotate the normal by phi about the tangent direction."""
        n = hs.rotate_about(self.normal, self.tangent_dir(), phi)
        cache = None if self.mat is None else hs.mul(self.mat, hs.su2_about_tangent(phi))
        return FramedPoint(self.position, self.tangent, n, cache)

    def turned(self, beta: float) -> "FramedPoint":
        """Rotate the tangent by beta about the normal direction."""
        t = hs.rotate_about(self.tangent, self.normal_dir(), beta)
        cache = None if self.mat is None else hs.mul(self.mat, hs.su2_about_normal(beta))
        return FramedPoint(self.position, t, self.normal, cache)

    def isclose(self, other: "FramedPoint", tol: float = TOL_GEO) -> bool:
        return (
            hs.dist(self.position, other.position) <= tol
            and hs.angle(self.tangent, other.tangent) <= tol
            and hs.angle(self.normal, other.normal) <= tol
        )


def frame_from_matrix(m: hs.Matrix) -> FramedPoint:
    p, t, n = hs.matrix_to_frame(m)
    return FramedPoint(p, t, n, m)


@dataclass(frozen=True)
class DFramedSegment:
    """Oriented geodesic arc with endpoint framings and its complex length."""

    initial: FramedPoint
    terminal: FramedPoint
    length: float
    phase: float

    def phasor(self) -> "Phasor":
        return Phasor(cmath.exp(complex(self.length, self.phase)))


@dataclass(frozen=True)
class Phasor:
    """exp(length + i phase); always outside the unit circle."""

    value: complex

    def __post_init__(self):
        if not abs(self.value) > 1.0:
            raise DomainError(f"phasor modulus must exceed 1, got {abs(self.value)}")


@dataclass(frozen=True)
class Chain:
    """Consecutive segments; `cyclic` chains close by frame identification.

    `base_frame` (cyclic chains only) is a frame at the first segment's start
    position; the closing joint compares the last terminal frame against it.
    Leaving it None closes onto the first segment's initial frame, making the
    closing joint exact.
    """

    segments: tuple[DFramedSegment, ...]
    cyclic: bool = False
    base_frame: FramedPoint | None = None

    def __post_init__(self):
        if len(self.segments) < 1:
            raise DomainError("chain needs at least one segment")

    def start(self) -> FramedPoint:
        return self.base_frame if self.base_frame is not None else self.segments[0].initial


@dataclass(frozen=True)
class TamenessReport:
    """Exact per-joint maxima deciding delta-consecutiveness and tameness."""

    delta: float
    max_bend: float
    min_half_length: float
    bends: tuple[float, ...]

    def certifies(self, L: float, theta: float, delta: float) -> bool:
        return self.delta <= delta and self.min_half_length > L and self.max_bend < theta


# ---------------------------------------------------------------------------
# segment constructors and transforms


def segment_from_pose(initial: FramedPoint, length: float, phase: float) -> DFramedSegment:
    """Segment following the geodesic from `initial` along its tangent.

    The terminal framing is the parallel transport of the initial normal,
    rotated by `phase` about the terminal direction.
    """
    if initial.mat is None:
        initial.validate()
    if not length > 0:
        raise DomainError(f"segment length must be positive, got {length}")
    g = initial.matrix()
    terminal = frame_from_matrix(hs.mul(g, hs.axis_translation(length, phase)))
    return DFramedSegment(initial, terminal, float(length), hs.wrap_angle(phase))


def complex_length(s: DFramedSegment) -> tuple[float, float]:
    """(length, phase) recomputed from the endpoint frames by composition."""
    h = hs.mul(hs.inv_unit(s.initial.matrix()), s.terminal.matrix())
    if abs(h[0]) <= abs(h[3]):
        raise DegenerateSegmentError("segment endpoints coincide or are reversed")
    if max(abs(h[1]), abs(h[2])) > 1e-6 * abs(h[0]):
        raise InvalidFrameError("segment frames are not aligned with its carrier")
    length = 2.0 * math.log(abs(h[0]))
    if length <= TOL_GEO:
        raise DegenerateSegmentError("segment endpoints coincide")
    phase = hs.wrap_angle(2.0 * cmath.phase(h[0]))
    return length, phase


def _u_turn(f: FramedPoint) -> FramedPoint:
    """Same point and normal, reversed tangent (rotation by pi about the normal)."""
    cache = None if f.mat is None else hs.mul(f.mat, hs.su2_about_normal(math.pi))
    return FramedPoint(f.position, -f.tangent, f.normal, cache)


def reverse(s: DFramedSegment) -> DFramedSegment:
    return DFramedSegment(_u_turn(s.terminal), _u_turn(s.initial), s.length, s.phase)


def rotate_framing(s: DFramedSegment, phi: float) -> DFramedSegment:
    return DFramedSegment(s.initial.rotated(phi), s.terminal.rotated(phi), s.length, s.phase)


def flip_framing(s: DFramedSegment) -> DFramedSegment:
    return rotate_framing(s, math.pi)


def frame_transform(s: DFramedSegment, kind: str, phi: float = 0.0) -> DFramedSegment:
    """Dispatcher: kind in {"reverse", "rotate", "flip"}."""
    if kind == "reverse":
        return reverse(s)
    if kind == "rotate":
        return rotate_framing(s, phi)
    if kind == "flip":
        return flip_framing(s)
    raise DomainError(f"unknown frame transform {kind!r}")


def transform_segment(m: hs.Matrix, s: DFramedSegment) -> DFramedSegment:
    """Push a segment forward by an isometry."""
    ini = frame_from_matrix(hs.mul(m, s.initial.matrix()))
    ter = frame_from_matrix(hs.mul(m, s.terminal.matrix()))
    return DFramedSegment(ini, ter, s.length, s.phase)


# ---------------------------------------------------------------------------
# chains


def bending_angle(s: DFramedSegment, t: DFramedSegment, tol: float = TOL_GEO) -> float:
    """Angle in [0, pi] between the terminal direction of s and initial of t."""
    if hs.dist(s.terminal.position, t.initial.position) > tol:
        raise JointMismatchError("segments do not share a joint point")
    return hs.angle(s.terminal.tangent_dir(), t.initial.tangent_dir())


def _closing_frame(c: Chain) -> FramedPoint:
    """First frame of the next lap, expressed at the last terminal's position."""
    last = c.segments[-1].terminal
    base = c.start()
    align = hs.mul(last.matrix(), hs.inv_unit(base.matrix()))
    return frame_from_matrix(hs.mul(align, c.segments[0].initial.matrix()))


def check_chain(c: Chain, tol: float = TOL_GEO) -> TamenessReport:
    """Per-joint framing defects and bending angles; exact maxima."""
    segs = c.segments
    bends: list[float] = []
    defects: list[float] = []
    for s, t in zip(segs, segs[1:]):
        if hs.dist(s.terminal.position, t.initial.position) > tol:
            raise JointMismatchError("consecutive segments do not share a joint point")
        bends.append(hs.angle(s.terminal.tangent_dir(), t.initial.tangent_dir()))
        defects.append(hs.angle(s.terminal.normal_dir(), t.initial.normal_dir()))
    if c.cyclic:
        if c.base_frame is not None and (
            hs.dist(c.base_frame.position, segs[0].initial.position) > tol
        ):
            raise JointMismatchError("base frame must sit at the first segment's start")
        nxt = _closing_frame(c)
        last = segs[-1].terminal
        bends.append(hs.angle(last.tangent_dir(), nxt.tangent_dir()))
        defects.append(hs.angle(last.normal_dir(), nxt.normal_dir()))
    return TamenessReport(
        delta=max(defects, default=0.0),
        max_bend=max(bends, default=0.0),
        min_half_length=min(s.length for s in segs) / 2.0,
        bends=tuple(bends),
    )


def _closest_normal(old: np.ndarray, frame_pos: np.ndarray, tangent: np.ndarray) -> np.ndarray:
    z = float(frame_pos[2])
    t_hat = hs.unitize(tangent)
    proj = old / z - np.dot(old / z, t_hat) * t_hat
    if np.linalg.norm(proj) < TOL_GEO:
        raise AmbiguousFramingError("framing is parallel to the reduced direction")
    return proj / np.linalg.norm(proj) * z


_ORIGIN = np.array([0.0, 0.0, 1.0])
_EX3 = np.array([1.0, 0.0, 0.0])
_EZ3 = np.array([0.0, 0.0, 1.0])


def reduce_chain(c: Chain) -> DFramedSegment:
    """Exact reduced concatenation: geodesic between the chain's endpoints.

    Endpoint framings are the closest unit normals to the original outer
    framings; length and phase come from exact isometry composition, carried
    out in coordinates relative to the chain's first frame so that long
    chains stay well conditioned.
    """
    if c.cyclic:
        raise DomainError("reduce_chain expects a non-cyclic chain")
    check_chain(c)
    first = c.segments[0].initial
    last = c.segments[-1].terminal
    m_first = first.matrix()
    h = hs.mul(hs.inv_unit(m_first), last.matrix())
    # degeneracy: h nearly fixes the basepoint iff its Frobenius norm is ~ 2
    row_norms = abs(h[0]) ** 2 + abs(h[1]) ** 2 + abs(h[2]) ** 2 + abs(h[3]) ** 2
    if row_norms < 2.0 + TOL_GEO**2:
        raise DegenerateReductionError("reduced endpoints coincide")
    # far endpoint in first-frame coordinates (initial framing there is e_x)
    w, t = hs.apply_point(h, 0j, 1.0)
    q = np.array([w.real, w.imag, t])
    t0 = hs.direction_to(_ORIGIN, q)
    n0 = _closest_normal(_EX3, _ORIGIN, t0)
    align = hs.frame_to_matrix(_ORIGIN, t0, n0)
    m_ini = hs.mul(m_first, align)
    # aligned map = E(length, 0) . U with U fixing the far point
    h2 = hs.mul(hs.inv_unit(align), h)
    length = math.log(abs(h2[0]) ** 2 + abs(h2[1]) ** 2)
    if length <= TOL_GEO:
        raise DegenerateReductionError("reduced endpoints coincide")
    # the top row of the point-fixing part stays well conditioned
    n_dir = hs.su2_directions(h2[0] * math.exp(-length / 2.0),
                              h2[1] * math.exp(-length / 2.0))[1]
    proj = math.hypot(float(n_dir[0]), float(n_dir[1]))
    if proj < TOL_GEO:
        raise AmbiguousFramingError("framing is parallel to the reduced direction")
    psi = math.atan2(float(n_dir[1]), float(n_dir[0]))
    ini = frame_from_matrix(m_ini)
    ter = frame_from_matrix(hs.mul(m_ini, hs.axis_translation(length, psi)))
    return DFramedSegment(ini, ter, length, hs.wrap_angle(psi))


def cycle_holonomy(c: Chain) -> hs.Matrix:
    """Deck transformation closing the cycle (terminal frame onto base frame)."""
    if not c.cyclic:
        raise DomainError("cycle_holonomy expects a cyclic chain")
    check_chain(c)
    return hs.mul(c.segments[-1].terminal.matrix(), hs.inv_unit(c.start().matrix()))


def reduce_cycle(c: Chain) -> tuple[float, float]:
    """Complex translation length of the cycle's holonomy."""
    try:
        return hs.translation_length(cycle_holonomy(c))
    except ValueError as e:
        raise NonLoxodromicError(str(e)) from None


# ---------------------------------------------------------------------------
# the approximate calculus


def limit_inefficiency(theta: float) -> float:
    """I(theta) = 2 log sec(theta/2): asymptotic length loss at a bend."""
    if not (0.0 <= theta < math.pi):
        raise DomainError(f"bending angle must lie in [0, pi), got {theta}")
    return -2.0 * math.log(math.cos(theta / 2.0))


@dataclass(frozen=True)
class Prediction:
    length_est: float
    phase_est: float
    length_err: float
    phase_err: float

    def astuple(self) -> tuple[float, float, float, float]:
        return (self.length_est, self.phase_est, self.length_err, self.phase_err)


def _formula_hypotheses(report: TamenessReport, L: float, theta: float, delta: float) -> None:
    if not (0.0 < theta < math.pi):
        raise HypothesisViolationError("0 < theta < pi", f"theta={theta}")
    if L < limit_inefficiency(theta) + 10.0 * math.log(2.0):
        raise HypothesisViolationError(
            "L >= I(theta) + 10 log 2", f"L={L}, I(theta)={limit_inefficiency(theta)}"
        )
    if report.delta > delta:
        raise HypothesisViolationError(
            "delta-consecutive", f"max framing defect {report.delta} > {delta}"
        )
    if report.min_half_length <= L:
        raise HypothesisViolationError(
            "segment length > 2L", f"min half-length {report.min_half_length} <= {L}"
        )
    if report.max_bend >= theta:
        raise HypothesisViolationError(
            "bending < theta", f"max bend {report.max_bend} >= {theta}"
        )


def _estimate(c: Chain, report: TamenessReport, L: float, theta: float, delta: float) -> Prediction:
    joints = len(report.bends)
    length_est = sum(s.length for s in c.segments) - sum(
        limit_inefficiency(b) for b in report.bends
    )
    phase_est = hs.wrap_angle(sum(s.phase for s in c.segments))
    coeff = float(joints)
    beat = math.exp((-L + 10.0 * math.log(2.0)) / 2.0) * math.sin(theta / 2.0)
    length_err = coeff * beat / (L - math.log(2.0))
    phase_err = coeff * (delta + beat)
    return Prediction(length_est, phase_est, length_err, phase_err)


def predict_chain(c: Chain, L: float, theta: float, delta: float) -> Prediction:
    """Approximate length and phase of the reduced concatenation, with bounds.

    Guarantees |reduce_chain length - length_est| < length_err and the circle
    distance analogue for phase, under (L, theta)-tameness and
    delta-consecutiveness.
    """
    if c.cyclic:
        raise DomainError("predict_chain expects a non-cyclic chain")
    report = check_chain(c)
    _formula_hypotheses(report, L, theta, delta)
    return _estimate(c, report, L, theta, delta)


def predict_cycle(c: Chain, L: float, theta: float, delta: float) -> Prediction:
    """Approximate complex translation length of a cycle, with bounds."""
    if not c.cyclic:
        raise DomainError("predict_cycle expects a cyclic chain")
    report = check_chain(c)
    _formula_hypotheses(report, L, theta, delta)
    return _estimate(c, report, L, theta, delta)


def tame_triangle_bounds(L: float, theta: float) -> tuple[float, float, float]:
    """(angle_sum_bound, defect_lo, defect_hi) for triangles with legs > L.

    For any geodesic triangle ABC with |CA|, |CB| > L and angle C = pi - theta:
    angle A + angle B < angle_sum_bound and
    defect_lo < |CA| + |CB| - |AB| < defect_hi.
    """
    if not (0.0 < theta < math.pi):
        raise HypothesisViolationError("0 < theta < pi", f"theta={theta}")
    ineff = limit_inefficiency(theta)
    if L < ineff + math.log(2.0):
        raise HypothesisViolationError("L >= I(theta) + log 2", f"L={L}")
    s = math.sin(theta / 2.0)
    angle_sum = math.exp((-L + 3.0 * math.log(2.0)) / 2.0) * s
    defect_lo = ineff - math.exp((-L + 5.0 * math.log(2.0)) / 2.0) * s / (L - math.log(2.0))
    return angle_sum, defect_lo, ineff


# ---------------------------------------------------------------------------
# Fermat point

_FERMAT_MARGIN = math.acosh(2.0 / math.sqrt(3.0))


@dataclass(frozen=True)
class FermatReport:
    point: np.ndarray
    distances: tuple[float, float, float]
    hypothesis_holds: bool
    at_vertex: int | None = None  # index of the obtuse vertex when applicable


def _distance_sum(x: np.ndarray, verts: list[np.ndarray]) -> float:
    p = np.array([x[0], x[1], math.exp(x[2])])
    return sum(hs.dist(p, v) for v in verts)


def fermat_point(
    A: np.ndarray, B: np.ndarray, C: np.ndarray, d: float
) -> FermatReport:
    """Point minimizing |FA|+|FB|+|FC|, with the separated-balls certificate.

    `hypothesis_holds` records whether every vertex keeps the other two beyond
    distance d + arccosh(2/sqrt(3)); when it does, all three reported
    distances exceed d.
    """
    if not d > 0:
        raise DomainError("d must be positive")
    # the interior point-to-segment distance saturates near sqrt(eps), so
    # collinearity gets its own coarser threshold
    collinear_tol = 1e-7
    verts = [np.asarray(A, dtype=float), np.asarray(B, dtype=float), np.asarray(C, dtype=float)]
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        if hs.dist(verts[j], verts[k]) <= TOL_GEO:
            raise DegenerateTriangleError("two vertices coincide")
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        if hs.dist_to_segment(verts[i], verts[j], verts[k]) <= collinear_tol:
            raise DegenerateTriangleError("vertices are collinear")

    at_vertex = None
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        u = hs.direction_to(verts[i], verts[j])
        v = hs.direction_to(verts[i], verts[k])
        z = float(verts[i][2])
        if np.linalg.norm(u / z + v / z) <= 1.0 + 1e-12:
            at_vertex = i
            break

    if at_vertex is not None:
        f = verts[at_vertex]
    else:
        x0 = np.array(
            [
                np.mean([v[0] for v in verts]),
                np.mean([v[1] for v in verts]),
                np.mean([math.log(v[2]) for v in verts]),
            ]
        )
        res = optimize.minimize(
            _distance_sum, x0, args=(verts,), method="BFGS",
            options={"gtol": 1e-12, "maxiter": 500},
        )
        f = np.array([res.x[0], res.x[1], math.exp(res.x[2])])

    dists = tuple(hs.dist(f, v) for v in verts)
    rho = d + _FERMAT_MARGIN
    hypothesis = all(
        hs.dist_to_segment(verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]) > rho
        for i in range(3)
    )
    if hypothesis and min(dists) <= d:
        raise InternalInconsistencyError(
            "separated-balls hypothesis holds but a Fermat distance is <= d"
        )
    return FermatReport(point=f, distances=dists, hypothesis_holds=hypothesis, at_vertex=at_vertex)
