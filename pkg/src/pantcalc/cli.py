"""Command line interface: scene ingestion, dispatch, JSON reports.

Every subcommand reads a scene file, runs one operation, and prints a single
JSON object (sorted keys, so identical inputs give byte-identical output).
Exit codes: 0 success, 2 hypothesis violation or mathematical refusal,
3 validation error, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import cobordism as cb
from . import constructions as cn
from . import gluing as gl
from . import measures as ms
from . import segments as sg
from . import synth
from .errors import (
    HypothesisViolationError,
    IrreducibilityContradictionError,
    NoMatchingError,
    NonLoxodromicError,
    NotConnectedSceneError,
    NotNullHomologousError,
    ValidationError,
)
from .halfspace import circle_distance
from .scene import (
    SceneBundle,
    assembly_to_json,
    load_scene,
    measure_to_json,
    parse_curve_token,
    segment_to_json,
    surface_to_json,
    torus_measure_to_json,
)

REFUSALS = (
    HypothesisViolationError,
    NonLoxodromicError,
    NoMatchingError,
    IrreducibilityContradictionError,
    NotConnectedSceneError,
    NotNullHomologousError,
)


def emit(report: dict) -> None:
    print(json.dumps(report, sort_keys=True, separators=(",", ":")))


def default_tol(args, bundle: SceneBundle | None) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get("PANTCALC_TOL")
    if env is not None:
        return float(env)
    if bundle is not None:
        R = bundle.constants.get("R")
        eps = bundle.constants.get("epsilon")
        if R and eps:
            return eps / R
    raise ValidationError("no tolerance: pass --tol, set PANTCALC_TOL, or give scene constants")


def _bundle(args) -> SceneBundle:
    if not args.scene:
        raise ValidationError("--scene is required")
    return load_scene(args.scene)


def _named_chain(bundle: SceneBundle, name: str) -> sg.Chain:
    if name not in bundle.chains:
        raise ValidationError(f"unknown chain {name!r}")
    return bundle.chains[name]


def _named_measure(bundle: SceneBundle, name: str) -> ms.Measure:
    if name not in bundle.measures:
        raise ValidationError(f"unknown measure {name!r}")
    return bundle.measures[name]


def _formula_params(args, bundle: SceneBundle) -> tuple[float, float, float]:
    consts = bundle.constants
    L = args.L if args.L is not None else consts.get("L")
    theta = args.theta if args.theta is not None else consts.get("theta")
    delta = args.delta if args.delta is not None else consts.get("delta")
    if L is None or theta is None or delta is None:
        raise ValidationError("predict needs L, theta, delta (flags or scene constants)")
    bundle.require_formula_constants()
    return float(L), float(theta), float(delta)


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_ineff(args) -> dict:
    if args.theta is not None:
        return {"theta": args.theta, "value": sg.limit_inefficiency(args.theta)}
    thetas = [k * math.pi / 12.0 for k in range(12)]
    return {
        "table": [
            {"theta": t, "value": sg.limit_inefficiency(t)} for t in thetas
        ]
    }


def cmd_concat(args) -> dict:
    bundle = _bundle(args)
    chain = _named_chain(bundle, args.chain)
    if chain.cyclic:
        length, phase = sg.reduce_cycle(chain)
        return {"chain": args.chain, "cyclic": True, "length": length, "phase": phase}
    seg = sg.reduce_chain(chain)
    return {
        "chain": args.chain,
        "cyclic": False,
        "length": seg.length,
        "phase": seg.phase,
        "segment": segment_to_json(seg),
    }


def cmd_predict(args) -> dict:
    if args.selftest:
        return _predict_selftest(args)
    bundle = _bundle(args)
    chain = _named_chain(bundle, args.chain)
    L, theta, delta = _formula_params(args, bundle)
    if chain.cyclic:
        pred = sg.predict_cycle(chain, L, theta, delta)
        exact_len, exact_phase = sg.reduce_cycle(chain)
    else:
        pred = sg.predict_chain(chain, L, theta, delta)
        red = sg.reduce_chain(chain)
        exact_len, exact_phase = red.length, red.phase
    return {
        "chain": args.chain,
        "length_est": pred.length_est,
        "phase_est": pred.phase_est,
        "length_err": pred.length_err,
        "phase_err": pred.phase_err,
        "exact_length": exact_len,
        "exact_phase": exact_phase,
        "length_within_bound": abs(exact_len - pred.length_est) < pred.length_err + 1e-12,
        "phase_within_bound": circle_distance(exact_phase, pred.phase_est)
        < pred.phase_err + 1e-12,
    }


def _predict_selftest(args) -> dict:
    rng = np.random.default_rng(args.seed)
    trials = args.trials or 100
    theta = args.theta if args.theta is not None else math.pi / 2
    delta = args.delta if args.delta is not None else 1e-3
    L = args.L if args.L is not None else sg.limit_inefficiency(theta) + 10 * math.log(2)
    passes = 0
    for trial in range(trials):
        cyclic = trial % 2 == 1
        m = int(rng.integers(1, 9))
        chain, stats = synth.random_tame_chain(rng, m, L, theta, delta, cyclic=cyclic)
        est_l, est_p, err_l, err_p = synth.formula_estimate(stats, L, theta, delta)
        if cyclic:
            exact_l, exact_p = sg.reduce_cycle(chain)
        else:
            red = sg.reduce_chain(chain)
            exact_l, exact_p = red.length, red.phase
        ok = abs(exact_l - est_l) < err_l + 1e-12 and (
            circle_distance(exact_p, est_p) < err_p + 1e-12
        )
        passes += ok
    return {
        "selftest": "length-phase-formula",
        "trials": trials,
        "passes": passes,
        "all_passed": passes == trials,
        "L": L,
        "theta": theta,
        "delta": delta,
        "seed": args.seed,
    }


def cmd_check_tame(args) -> dict:
    bundle = _bundle(args)
    chain = _named_chain(bundle, args.chain)
    report = sg.check_chain(chain)
    return {
        "chain": args.chain,
        "delta": report.delta,
        "max_bend": report.max_bend,
        "min_half_length": report.min_half_length,
        "bends": list(report.bends),
    }


def cmd_boundary(args) -> dict:
    bundle = _bundle(args)
    mu = _named_measure(bundle, args.measure)
    scene = bundle.scene
    bd = ms.boundary(mu, scene)
    footed = ms.footed_boundary(mu, scene)
    net = ms.net_boundary(mu, scene)
    tot = ms.totalize(footed)
    net_of_bd = ms.net_reduce(bd)
    return {
        "measure": args.measure,
        "boundary": measure_to_json(bd),
        "footed_boundary": torus_measure_to_json(footed),
        "net_boundary": [
            {"class": k.name, "weight": str(w)} for k, w in sorted(net.items())
        ],
        "totals_match_boundary": tot == bd,
        "net_of_boundary_matches": net_of_bd == net,
    }


def cmd_classify(args) -> dict:
    bundle = _bundle(args)
    mu = _named_measure(bundle, args.measure)
    R = bundle.constants.get("R")
    eps = bundle.constants.get("epsilon")
    if not R or not eps:
        raise ValidationError("classify needs scene constants R and epsilon")
    flags = ms.classify(mu, R, eps, bundle.scene)
    return {
        "measure": args.measure,
        "ubiquitous": flags.ubiquitous,
        "irreducible": flags.irreducible,
        "nearly_evenly_footed": flags.nearly_evenly_footed,
        "rich": flags.rich,
    }


def cmd_select_cuffs(args) -> dict:
    bundle = _bundle(args)
    mu = _named_measure(bundle, args.measure)
    sel = gl.select_cuffs(mu, bundle.scene)
    checks = gl.verify_selection(sel, mu, bundle.scene)
    return {
        "measure": args.measure,
        "multiplier": sel.multiplier,
        "copies": len(sel.copies),
        "selected": len(sel.selected),
        "marked": len(sel.marked),
        "maximal": all(checks["maximal"].values()),
        "proportional": {
            token: [str(ratio), bool(ok)]
            for token, (ratio, ok) in checks["proportional"].items()
        },
        "min_selected_per_copy": checks["min_selected_per_copy"],
    }


def _surface_report(surface: gl.PantedSurface) -> dict:
    return {
        "pants_copies": len(surface.copies),
        "euler_characteristic": surface.euler_characteristic(),
        "components": len(surface.components()),
        "glued_cuffs": len(surface.glued_pairs()),
        "boundary": {
            c.token(): n for c, n in sorted(surface.boundary_multicurve().items())
        },
    }


def cmd_glue(args) -> dict:
    bundle = _bundle(args)
    mu = _named_measure(bundle, args.measure)
    tol = default_tol(args, bundle)
    sel, surface = gl.glue_pipeline(mu, bundle.scene, tol)
    return {
        "measure": args.measure,
        "tol": tol,
        "multiplier": sel.multiplier,
        "surface": _surface_report(surface),
        "surface_data": surface_to_json(surface),
    }


def cmd_cover(args) -> dict:
    bundle = _bundle(args)
    mu = _named_measure(bundle, args.measure)
    tol = default_tol(args, bundle)
    _, surface = gl.glue_pipeline(mu, bundle.scene, tol)
    cover = gl.double_cover_nonseparating(surface)
    return {
        "measure": args.measure,
        "surface": _surface_report(surface),
        "cover": _surface_report(cover),
        "all_glued_cuffs_nonseparating": gl.all_glued_cuffs_nonseparating(cover),
    }


def cmd_hybridize(args) -> dict:
    bundle = _bundle(args)
    mu = _named_measure(bundle, args.measure)
    tol = default_tol(args, bundle)
    _, surface = gl.glue_pipeline(mu, bundle.scene, tol)
    cover = gl.double_cover_nonseparating(surface)
    report = gl.hybridize(cover, bundle.scene, tol)
    return {
        "measure": args.measure,
        "cover": _surface_report(cover),
        "hybrid": _surface_report(report.surface),
        "cover_multiples": list(report.cover_multiples),
        "swapped_pairs": len(report.swapped),
        "measured_tol": report.measured_tol,
    }


def cmd_connected(args) -> dict:
    bundle = _bundle(args)
    g0 = parse_curve_token(args.curve_from)
    g1 = parse_curve_token(args.curve_to)
    return {
        "from": g0.token(),
        "to": g1.token(),
        "connected": gl.panted_connected(bundle.scene, g0, g1),
    }


def _assembly_report(asm: cn.Assembly) -> dict:
    return {
        "pants": len(asm.pants),
        "euler_characteristic": asm.euler_characteristic(),
        "internal_pairs": len(asm.internal),
        "boundary": [" ".join(w.tokens()) for w in asm.boundary],
        "symbolic": asm.symbolic,
        "note": asm.note,
    }


def cmd_construct(args) -> dict:
    bundle = _bundle(args)
    consts = bundle.constants
    R = consts.get("R")
    delta = consts.get("delta")
    eps = consts.get("epsilon")
    L = consts.get("L")
    if not all((R, delta, eps, L)):
        raise ValidationError("construct needs scene constants R, epsilon, L, delta")
    bundle.require_formula_constants()
    kind = args.kind
    if kind == "split":
        if not args.bigon:
            raise ValidationError("split needs --bigon")
        asm = cn.split(bundle.bank, bundle.bigons[args.bigon], R, delta, eps)
    elif kind == "swap":
        if not (args.bigon and args.bigon2):
            raise ValidationError("swap needs --bigon and --bigon2")
        asm = cn.swap(
            bundle.bank, bundle.bigons[args.bigon], bundle.bigons[args.bigon2],
            L, R, delta, eps,
        )
    elif kind in ("rotate", "antirotate"):
        if not args.pair or args.pair not in bundle.rotation_pairs:
            raise ValidationError(f"{kind} needs --pair naming a rotation pair")
        fn = cn.rotate if kind == "rotate" else cn.antirotate
        asm = fn(bundle.bank, bundle.rotation_pairs[args.pair], L, R, delta, eps)
    else:
        raise ValidationError(f"unknown construction {kind!r}")
    asm.verify()
    return {
        "kind": kind,
        "assembly": _assembly_report(asm),
        "assembly_data": assembly_to_json(asm),
    }


def cmd_cobordism(args) -> dict:
    bundle = _bundle(args)
    group = cb.cobordism_group(bundle.scene, identify_reversals=args.identify_reversals)
    pres = cb.presentation_matrix(bundle.scene)
    return {
        "identify_reversals": bool(args.identify_reversals),
        "rank": group.rank,
        "torsion": sorted(group.torsion),
        "presentation": {
            "curves": [c.token() for c in pres.curves],
            "pants": list(pres.pants_names),
            "matrix": [list(row) for row in pres.matrix],
        },
    }


def cmd_class(args) -> dict:
    bundle = _bundle(args)
    multicurve = [parse_curve_token(t) for t in args.multicurve.split(",") if t]
    cls = cb.cobordism_class(
        multicurve, bundle.scene, bundle.fixture, want_sigma=args.sigma,
    )
    out = {
        "multicurve": [c.token() for c in multicurve],
        "coordinates": list(cls.coordinates),
    }
    if args.sigma:
        out["sigma"] = cls.sigma
    return out


def cmd_h2rep(args) -> dict:
    bundle = _bundle(args)
    if args.complex not in bundle.complexes:
        raise ValidationError(f"unknown complex {args.complex!r}")
    k = bundle.complexes[args.complex]
    group = cb.h2_of_panted_complex(k)
    out = {
        "complex": args.complex,
        "h2_rank": group.rank,
        "h2_torsion": list(group.torsion),
    }
    if args.alpha:
        alpha = [int(x) for x in args.alpha.split(",")]
        surface = cb.representative_surface(k, alpha)
        out["representative"] = {
            "pants_copies": len(surface.copies),
            "euler_characteristic": surface.euler_characteristic(),
            "boundary_components": sum(surface.boundary_multicurve().values()),
            "per_pants_counts": {
                f"{name}{'-' if rev else ''}": count
                for (name, rev), count in sorted(surface.subordination().items())
            },
        }
    return out


# ---------------------------------------------------------------------------
# dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pantcalc",
        description="nearly regular pants calculus: framed segments, measures, gluing, cobordism",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scene=True):
        if scene:
            p.add_argument("--scene", help="scene JSON file")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
        p.add_argument("--tol", type=float, default=None, help="shear tolerance override")
        p.add_argument("--trials", type=int, default=None, help="sweep trial count")
        p.add_argument("--json", action="store_true", help="(reports are always JSON)")

    p = sub.add_parser("ineff", help="limit inefficiency I(theta)")
    p.add_argument("--theta", type=float, default=None)
    common(p, scene=False)
    p.set_defaults(func=cmd_ineff)

    p = sub.add_parser("concat", help="exact reduced concatenation of a chain")
    p.add_argument("--chain", required=True)
    common(p)
    p.set_defaults(func=cmd_concat)

    p = sub.add_parser("predict", help="length/phase estimates with bounds")
    p.add_argument("--chain")
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--selftest", action="store_true",
                   help="random verification sweep against exact reduction")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("check-tame", help="per-joint tameness report")
    p.add_argument("--chain", required=True)
    common(p)
    p.set_defaults(func=cmd_check_tame)

    p = sub.add_parser("boundary", help="boundary operators of a measure")
    p.add_argument("--measure", required=True)
    common(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("classify", help="gluing-condition flags of a measure")
    p.add_argument("--measure", required=True)
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("select-cuffs", help="marked-cuff selection")
    p.add_argument("--measure", required=True)
    common(p)
    p.set_defaults(func=cmd_select_cuffs)

    p = sub.add_parser("glue", help="select + match + assemble")
    p.add_argument("--measure", required=True)
    common(p)
    p.set_defaults(func=cmd_glue)

    p = sub.add_parser("cover", help="glue + nonseparating double cover")
    p.add_argument("--measure", required=True)
    common(p)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("hybridize", help="full pipeline to a connected surface")
    p.add_argument("--measure", required=True)
    common(p)
    p.set_defaults(func=cmd_hybridize)

    p = sub.add_parser("connected", help="panted connectedness of two curves")
    p.add_argument("--from", dest="curve_from", required=True)
    p.add_argument("--to", dest="curve_to", required=True)
    common(p)
    p.set_defaults(func=cmd_connected)

    p = sub.add_parser("construct", help="split/swap/rotate/antirotate assemblies")
    p.add_argument("--kind", required=True,
                   choices=["split", "swap", "rotate", "antirotate"])
    p.add_argument("--bigon")
    p.add_argument("--bigon2")
    p.add_argument("--pair")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("cobordism", help="group presented by the boundary matrix")
    p.add_argument("--identify-reversals", action="store_true")
    common(p)
    p.set_defaults(func=cmd_cobordism)

    p = sub.add_parser("class", help="cobordism class of a multicurve")
    p.add_argument("--multicurve", required=True, help="comma separated curve tokens")
    p.add_argument("--sigma", action="store_true")
    common(p)
    p.set_defaults(func=cmd_class)

    p = sub.add_parser("h2rep", help="second homology of a panted complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--alpha", help="comma separated integers over structure pants")
    common(p)
    p.set_defaults(func=cmd_h2rep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except REFUSALS as e:
        emit({"error": str(e), "kind": type(e).__name__})
        return 2
    except ValidationError as e:
        emit({"error": str(e), "kind": type(e).__name__})
        return 3
    except Exception as e:  # noqa: BLE001
        emit({"error": str(e), "kind": type(e).__name__})
        return 4
    emit(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
