"""Scene files: the JSON interchange format for every subcommand.

A scene bundles constants, curves, pants (with feet), optional segment
geometry, named chains and measures, construction inputs (bigons, tripods,
rotation pairs), homology fixtures and panted complexes.  Weights are "p/q"
strings, angles radians, positions [x, y, z] and vectors [vx, vy, vz].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cobordism import Attachment, BundleFixture, ComplexPants, PantedComplex
from .constructions import Bigon, RotationPair, SegmentBank, Tripod, word
from .errors import ValidationError
from .measures import Curve, CuffDatum, Measure, PantsDatum, Scene
from .segments import Chain, DFramedSegment, FramedPoint, segment_from_pose

SQRT_HALF = 1.0 / math.sqrt(2.0)


def parse_curve_token(token: str) -> Curve:
    """"c3" is positively oriented, "c3-" reversed."""
    if token.endswith("-"):
        return Curve(token[:-1], False)
    return Curve(token, True)


def parse_weight(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"bad rational weight {text!r}: {e}") from None


@dataclass
class SceneBundle:
    scene: Scene
    constants: dict
    measures: dict[str, Measure]
    bank: SegmentBank
    segments: dict[str, DFramedSegment | None]
    chains: dict[str, Chain]
    bigons: dict[str, Bigon]
    tripods: dict[str, Tripod]
    rotation_pairs: dict[str, RotationPair]
    fixture: BundleFixture | None
    complexes: dict[str, PantedComplex]
    raw: dict = field(repr=False, default_factory=dict)

    def require_formula_constants(self) -> None:
        eps = self.constants.get("epsilon")
        if eps is not None and eps > SQRT_HALF + 1e-12:
            raise ValidationError(
                f"constants.epsilon = {eps} exceeds 1/sqrt(2); formula operations refuse"
            )


def _frame(obj, path: str) -> FramedPoint:
    try:
        pos = np.array([float(x) for x in obj["position"]])
        tangent = np.array([float(x) for x in obj["tangent"]])
        normal = np.array([float(x) for x in obj["normal"]])
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"{path}: bad frame: {e}") from None
    if len(pos) != 3 or len(tangent) != 3 or len(normal) != 3:
        raise ValidationError(f"{path}: frame entries must be 3-vectors")
    return FramedPoint(pos, tangent, normal)


def frame_to_json(f: FramedPoint) -> dict:
    return {
        "position": [float(x) for x in f.position],
        "tangent": [float(x) for x in f.tangent],
        "normal": [float(x) for x in f.normal],
    }


def segment_to_json(s: DFramedSegment) -> dict:
    return {
        "initial": frame_to_json(s.initial),
        "terminal": frame_to_json(s.terminal),
        "length": s.length,
        "phase": s.phase,
    }


def load_scene(path: str) -> SceneBundle:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: malformed JSON: {e}") from None
    return scene_from_dict(raw)


def scene_from_dict(raw: dict) -> SceneBundle:
    constants = dict(raw.get("constants", {}))
    for key, value in constants.items():
        if not isinstance(value, (int, float)) or value <= 0:
            raise ValidationError(f"constants.{key}: must be a positive number")

    curves = {}
    for i, entry in enumerate(raw.get("curves", [])):
        path = f"curves[{i}]"
        name = entry.get("id")
        if not name:
            raise ValidationError(f"{path}: missing id")
        if name in curves:
            raise ValidationError(f"{path}: duplicate curve {name}")
        length = entry.get("length")
        if not isinstance(length, (int, float)) or length <= 0:
            raise ValidationError(f"{path}: length must be positive")
        curves[name] = (float(length), float(entry.get("phase", 0.0)))

    pants = {}
    for i, entry in enumerate(raw.get("pants", [])):
        path = f"pants[{i}]"
        name = entry.get("id")
        if not name:
            raise ValidationError(f"{path}: missing id")
        if name in pants:
            raise ValidationError(f"{path}: duplicate pants {name}")
        cuff_list = entry.get("cuffs", [])
        if len(cuff_list) != 3:
            raise ValidationError(f"{path}: pants need exactly three cuffs")
        cuffs = []
        for j, cuff in enumerate(cuff_list):
            cpath = f"{path}.cuffs[{j}]"
            cname = cuff.get("curve")
            if cname not in curves:
                raise ValidationError(f"{cpath}: unknown curve {cname!r}")
            orient = cuff.get("orientation", "+")
            if orient not in ("+", "-"):
                raise ValidationError(f"{cpath}: orientation must be '+' or '-'")
            hl = cuff.get("half_length")
            half = complex(hl[0], hl[1]) if hl is not None else None
            feet = cuff.get("feet")
            feet_c = (
                (complex(feet[0][0], feet[0][1]), complex(feet[1][0], feet[1][1]))
                if feet is not None
                else None
            )
            cuffs.append(CuffDatum(Curve(cname, orient == "+"), half, feet_c))
        pants[name] = PantsDatum(name, tuple(cuffs))

    scene = Scene(curves, pants, constants)

    measures = {}
    for mname, atoms in raw.get("measures", {}).items():
        measures[mname] = Measure(
            (entry["pants"], parse_weight(entry["weight"])) for entry in atoms
        )
        for entry in atoms:
            if entry["pants"] not in pants:
                raise ValidationError(
                    f"measures.{mname}: unknown pants {entry['pants']!r}"
                )

    bank = SegmentBank()
    segments: dict[str, DFramedSegment | None] = {}
    for i, entry in enumerate(raw.get("segments", [])):
        path = f"segments[{i}]"
        name = entry.get("id")
        if not name:
            raise ValidationError(f"{path}: missing id")
        length = entry.get("length")
        phase = float(entry.get("phase", 0.0))
        if not isinstance(length, (int, float)) or length <= 0:
            raise ValidationError(f"{path}: length must be positive")
        geometry = None
        if "initial" in entry:
            geometry = segment_from_pose(_frame(entry["initial"], path), length, phase)
        bank.add(name, float(length), phase, geometry)
        segments[name] = geometry

    chains = {}
    for i, entry in enumerate(raw.get("chains", [])):
        path = f"chains[{i}]"
        name = entry.get("id")
        segs = []
        for sname in entry.get("segments", []):
            if segments.get(sname) is None:
                raise ValidationError(f"{path}: segment {sname!r} lacks geometry")
            segs.append(segments[sname])
        if not segs:
            raise ValidationError(f"{path}: empty chain")
        chains[name] = Chain(tuple(segs), cyclic=bool(entry.get("cyclic", False)))

    bigons = {}
    for name, entry in raw.get("bigons", {}).items():
        for key in ("a", "b"):
            if entry.get(key) not in segments:
                raise ValidationError(f"bigons.{name}: unknown segment {entry.get(key)!r}")
        bigons[name] = Bigon(
            word(entry["a"]), word(entry["b"]), float(entry.get("corner_bend", 0.0))
        )

    tripods = {}
    for name, entry in raw.get("tripods", {}).items():
        legs = entry.get("legs", [])
        if len(legs) != 3 or any(l not in segments for l in legs):
            raise ValidationError(f"tripods.{name}: legs must be three known segments")
        chirality = entry.get("chirality")
        if chirality not in ("left", "right"):
            raise ValidationError(f"tripods.{name}: chirality must be left or right")
        tripods[name] = Tripod(tuple(legs), chirality)

    rotation_pairs = {}
    for name, entry in raw.get("rotation_pairs", {}).items():
        for key in ("a", "b"):
            if entry.get(key) not in tripods:
                raise ValidationError(f"rotation_pairs.{name}: unknown tripod")
        ta, tb = tripods[entry["a"]], tripods[entry["b"]]
        leg_a = float(np.mean([bank.attrs(l).length for l in ta.legs]))
        leg_b = float(np.mean([bank.attrs(l).length for l in tb.legs]))
        rotation_pairs[name] = RotationPair(ta, tb, leg_a, leg_b)

    fixture = None
    fx = raw.get("fixtures", {}).get("bundle")
    if fx is not None:
        fixture = BundleFixture(
            projection=tuple(tuple(int(x) for x in row) for row in fx["projection"]),
            h1_base=tuple(int(x) for x in fx["h1_base"]),
            parity_generator=tuple(int(x) for x in fx["parity_generator"]),
        )

    complexes = {}
    for name, entry in raw.get("complexes", {}).items():
        ccurves = tuple(entry.get("curves", []))
        cpants = []
        for p in entry.get("pants", []):
            atts = tuple(Attachment(c, int(d)) for c, d in p["attach"])
            if len(atts) != 3:
                raise ValidationError(f"complexes.{name}: pants need three attachments")
            cpants.append(ComplexPants(p["id"], atts))
        complexes[name] = PantedComplex(ccurves, tuple(cpants))

    return SceneBundle(
        scene=scene,
        constants=constants,
        measures=measures,
        bank=bank,
        segments=segments,
        chains=chains,
        bigons=bigons,
        tripods=tripods,
        rotation_pairs=rotation_pairs,
        fixture=fixture,
        complexes=complexes,
        raw=raw,
    )


def scene_to_dict(bundle: SceneBundle) -> dict:
    """Round-trip serialization of the scene proper (curves, pants, measures)."""
    scene = bundle.scene
    out = {"constants": dict(bundle.constants)}
    out["curves"] = [
        {"id": name, "length": data[0], "phase": data[1]}
        for name, data in sorted(scene.curve_data.items())
    ]
    out["pants"] = []
    for name in sorted(scene.pants):
        datum = scene.datum(name)
        cuffs = []
        for cuff in datum.cuffs:
            entry = {
                "curve": cuff.curve.name,
                "orientation": "+" if cuff.curve.positive else "-",
            }
            if cuff.half_length is not None:
                entry["half_length"] = [cuff.half_length.real, cuff.half_length.imag]
            if cuff.feet is not None:
                entry["feet"] = [[z.real, z.imag] for z in cuff.feet]
            cuffs.append(entry)
        out["pants"].append({"id": name, "cuffs": cuffs})
    out["measures"] = {
        name: [
            {"pants": key, "weight": str(w)}
            for key, w in sorted(mu.items())
        ]
        for name, mu in bundle.measures.items()
    }
    return out


def gluing_to_json(pairing) -> list:
    """Instance-pair records, sorted for deterministic output."""
    seen = set()
    out = []
    for a, b in sorted(pairing.items()):
        if (b, a) in seen:
            continue
        seen.add((a, b))
        out.append([
            [a.pants, a.rev, a.index, a.slot],
            [b.pants, b.rev, b.index, b.slot],
        ])
    return out


def surface_to_json(surface) -> dict:
    return {
        "pants": [[c.pants, c.rev, c.index] for c in surface.copies],
        "pairs": gluing_to_json(surface.pairing),
        "derived": {
            "components": len(surface.components()),
            "euler_characteristic": surface.euler_characteristic(),
            "boundary": {
                c.token(): n
                for c, n in sorted(surface.boundary_multicurve().items())
            },
        },
    }


def assembly_to_json(asm) -> dict:
    return {
        "pants": [[w.tokens() for w in triple] for triple in asm.pants],
        "internal": [[i, s, j, t] for (i, s), (j, t) in asm.internal],
        "boundary": [w.tokens() for w in asm.boundary],
        "symbolic": asm.symbolic,
    }


def measure_to_json(mu: Measure) -> list:
    def key_str(k):
        if isinstance(k, Curve):
            return k.token()
        return repr(k) if not isinstance(k, str) else k

    return [
        {"id": key_str(k), "weight": str(w)}
        for k, w in sorted(mu.items(), key=lambda kv: key_str(kv[0]))
    ]


def torus_measure_to_json(mu: Measure) -> list:
    return [
        {
            "curve": p.curve.token(),
            "s": p.s,
            "theta": p.theta,
            "weight": str(w),
        }
        for p, w in sorted(mu.items(), key=lambda kv: (kv[0].curve.token(), kv[0].s, kv[0].theta))
    ]
