"""Random and structured fixture generators.

Used by the CLI's verification sweeps and by the test suite: random tame
chains and cycles with prescribed tameness budgets, and gluing scenes whose
measures are rich, irreducible and nearly evenly footed by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import halfspace as hs
from .measures import Curve, CuffDatum, Measure, PantsDatum, Scene, VisualTorus
from .segments import Chain, FramedPoint, limit_inefficiency, segment_from_pose

BASE_FRAME = FramedPoint(
    np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])
)


def random_pose(rng: np.random.Generator) -> FramedPoint:
    w = rng.uniform(-1.0, 1.0, size=2)
    z = math.exp(rng.uniform(-0.7, 0.7))
    tangent = rng.normal(size=3)
    tangent /= np.linalg.norm(tangent)
    normal = rng.normal(size=3)
    normal -= np.dot(normal, tangent) * tangent
    normal /= np.linalg.norm(normal)
    return FramedPoint(
        np.array([w[0], w[1], z]), tangent * z, normal * z
    )


@dataclass(frozen=True)
class ChainStats:
    """Construction-time records of a generated chain."""

    lengths: tuple[float, ...]
    phases: tuple[float, ...]
    bends: tuple[float, ...]  # one per joint (cyclic: includes the closing joint)
    max_defect: float


def random_tame_chain(
    rng: np.random.Generator,
    m: int,
    L: float,
    theta: float,
    delta: float,
    cyclic: bool = False,
    spread: float = 2.0,
    start: FramedPoint | None = None,
) -> tuple[Chain, ChainStats]:
    """(L, theta)-tame delta-consecutive chain or cycle with margin.

    Segment lengths lie in (2L, 2L + spread], bends stay below 0.97 theta,
    framing defects below 0.9 delta.  Cyclic chains close through a base
    frame carrying a final bend.
    """
    start = start if start is not None else BASE_FRAME
    lengths, phases, bends = [], [], []
    max_defect = 0.0
    if cyclic:
        closing = rng.uniform(0.0, 0.97 * theta)
        pose = start.turned(closing)
    else:
        pose = start
    segs = []
    for k in range(m):
        length = 2.0 * L * 1.000001 + rng.uniform(0.05, spread)
        phase = rng.uniform(-math.pi, math.pi)
        seg = segment_from_pose(pose, length, phase)
        segs.append(seg)
        lengths.append(length)
        phases.append(seg.phase)
        if k + 1 < m:
            bend = rng.uniform(0.0, 0.97 * theta)
            defect = rng.uniform(-0.9 * delta, 0.9 * delta)
            bends.append(bend)
            max_defect = max(max_defect, abs(defect))
            pose = seg.terminal.turned(bend).rotated(defect)
    if cyclic:
        bends.append(closing)
    chain = Chain(tuple(segs), cyclic=cyclic, base_frame=start if cyclic else None)
    return chain, ChainStats(tuple(lengths), tuple(phases), tuple(bends), max_defect)


def formula_estimate(stats: ChainStats, L: float, theta: float, delta: float):
    """Length/phase estimate and error bounds straight from chain records."""
    joints = len(stats.bends)
    length_est = sum(stats.lengths) - sum(limit_inefficiency(b) for b in stats.bends)
    phase_est = hs.wrap_angle(sum(stats.phases))
    beat = math.exp((-L + 10.0 * math.log(2.0)) / 2.0) * math.sin(theta / 2.0)
    return (
        length_est,
        phase_est,
        joints * beat / (L - math.log(2.0)),
        joints * (delta + beat),
    )


# ---------------------------------------------------------------------------
# gluing scenes


def make_gluing_scene(
    n_classes: int = 8,
    per_class: int = 6,
    R: float = 2.0,
    epsilon: float = 1.6,
    seed: int = 0,
) -> tuple[Scene, Measure]:
    """Scene plus integral measure that is rich, irreducible, evenly footed.

    Pants come in mirror pairs (straight copies on positive curves, mirrored
    copies on the reversed curves with exactly unit-sheared feet), so the
    boundary is orientation symmetric (rich) and a perfect matching exists.
    Free feet walk a uniform grid over half of each visual torus; the paired
    foot sits a half length further, covering the other half.
    """
    rng = np.random.default_rng(seed)
    names = [f"c{i}" for i in range(n_classes)]
    curves = {}
    for i, name in enumerate(names):
        curves[name] = (R + 0.01 * math.sin(1.0 + i), 0.02 * math.cos(2.0 + i))

    tori = {name: VisualTorus(Curve(name), *curves[name]) for name in names}
    total_per_class = 3 * per_class
    jitter = epsilon / (100.0 * R)
    counters = {name: 0 for name in names}

    def next_foot(nm: str) -> complex:
        i = counters[nm]
        counters[nm] += 1
        ell = curves[nm][0]
        cols = max(2, round(math.sqrt(total_per_class * (ell / 2.0) / (2.0 * math.pi))))
        rows = math.ceil(total_per_class / cols)
        s = ((i % cols) + 0.5) * (ell / 2.0) / cols
        th = ((i // cols) % rows + 0.5) * 2.0 * math.pi / rows
        return complex(
            s + rng.uniform(-jitter, jitter), th + rng.uniform(-jitter, jitter)
        )

    pants: dict[str, PantsDatum] = {}
    for k in range(per_class):
        for t_i in range(n_classes):
            triple = [
                names[t_i], names[(t_i + 1) % n_classes], names[(t_i + 3) % n_classes]
            ]
            cuffs = []
            mirror_cuffs = []
            for nm in triple:
                length, phase = curves[nm]
                torus = tori[nm]
                hl = complex(length / 2.0, phase / 2.0)
                f0 = next_foot(nm)
                cuffs.append(CuffDatum(Curve(nm), hl, (f0, f0 + hl)))
                bf0 = torus.bar_coord(f0 + 1.0)
                bf1 = torus.bar_coord(f0 + hl + 1.0)
                mirror_cuffs.append(CuffDatum(Curve(nm, False), hl, (bf0, bf1)))
            pants[f"A{k}_{t_i}"] = PantsDatum(f"A{k}_{t_i}", tuple(cuffs))
            pants[f"B{k}_{t_i}"] = PantsDatum(f"B{k}_{t_i}", tuple(mirror_cuffs))

    scene = Scene(curves, pants, constants={"R": R, "epsilon": epsilon})
    mu = Measure({name: Fraction(1) for name in pants})
    return scene, mu
