"""Gluing engine: selection, matching, covers, hybriding, connectification."""

from collections import Counter
from fractions import Fraction as F

import pytest

import oracles
from pantcalc import gluing as gl
from pantcalc import measures as ms
from pantcalc.errors import (
    HypothesisViolationError,
    MalformedGluingError,
    NoMatchingError,
    NotConnectedSceneError,
    UnknownCurveError,
)
from pantcalc.synth import make_gluing_scene

C = ms.Curve


def cuff(name, pos=True, f0=0.3 + 1.0j, hl=complex(2.0, 0.01)):
    return ms.CuffDatum(C(name, pos), hl, (f0, f0 + hl))


SCENE, MU = make_gluing_scene(n_classes=4, per_class=6, seed=7)
TOL = SCENE.constants["epsilon"] / SCENE.constants["R"]


# ---------------------------------------------------------------------------
# selection


def test_select_cuffs_symmetric_measure_selects_everything():
    sel = gl.select_cuffs(MU, SCENE)
    assert sel.multiplier == 1
    assert not sel.marked
    assert len(sel.selected) == 3 * len(sel.copies)
    checks = gl.verify_selection(sel, MU, SCENE)
    assert all(checks["maximal"].values())
    assert all(ok for _, ok in checks["proportional"].values())
    assert checks["min_selected_per_copy"] == 3


def test_select_cuffs_marking_counts():
    # boundary 3 gamma vs 2 gamma-bar: selection keeps multiplier * 2 per side
    curves = {"g": (4.0, 0.0), "c": (4.0, 0.0), "d": (4.0, 0.0)}
    pants = {
        "P": ms.PantsDatum("P", (cuff("g"), cuff("g"), cuff("g"))),
        "Q": ms.PantsDatum("Q", (cuff("g", False), cuff("g", False), cuff("c"))),
        "R": ms.PantsDatum("R", (cuff("c", False), cuff("d"), cuff("d", False))),
    }
    scene = ms.Scene(curves, pants)
    mu = ms.Measure({"P": F(1), "Q": F(1), "R": F(1)})
    assert ms.is_rich(mu, scene)
    sel = gl.select_cuffs(mu, scene)
    # even marking over the three slots of P forces multiplier 3
    assert sel.multiplier == 3
    over_g = sel.selected_over(C("g"), scene)
    over_gbar = sel.selected_over(C("g", False), scene)
    assert len(over_g) == len(over_gbar) == sel.multiplier * 2
    checks = gl.verify_selection(sel, mu, scene)
    assert all(checks["maximal"].values())
    assert all(ok for _, ok in checks["proportional"].values())
    assert checks["min_selected_per_copy"] >= 2


def test_select_cuffs_rejects_non_rich():
    curves = {"g": (4.0, 0.0)}
    pants = {"P": ms.PantsDatum("P", (cuff("g"), cuff("g"), cuff("g", False)))}
    scene = ms.Scene(curves, pants)
    with pytest.raises(HypothesisViolationError) as err:
        gl.select_cuffs(ms.Measure({"P": F(1)}), scene)
    assert "rich" in err.value.clause


def test_select_cuffs_requires_integral():
    with pytest.raises(HypothesisViolationError):
        gl.select_cuffs(ms.Measure({next(iter(MU)): F(1, 2)}), SCENE)


# ---------------------------------------------------------------------------
# matching


def _mirror_pair(displace=0.0):
    """One pants and its exactly unit-sheared mirror (optionally displaced)."""
    curves = {"g": (4.0, 0.0), "x": (4.0, 0.0), "y": (4.0, 0.0)}
    hl = complex(2.0, 0.0)
    feet = {"g": 0.3 + 1.0j, "x": 1.1 + 2.0j, "y": 0.7 + 4.0j}
    cuffs, mirrors = [], []
    for name, f0 in feet.items():
        torus = ms.VisualTorus(C(name), *curves[name])
        cuffs.append(ms.CuffDatum(C(name), hl, (f0, f0 + hl)))
        shift = f0 + (displace if name == "g" else 0.0)
        mirrors.append(
            ms.CuffDatum(C(name, False), hl,
                         (torus.bar_coord(shift + 1.0),
                          torus.bar_coord(shift + hl + 1.0)))
        )
    return ms.Scene(curves, {
        "A": ms.PantsDatum("A", tuple(cuffs)),
        "B": ms.PantsDatum("B", tuple(mirrors)),
    })


def test_match_single_exact_pair():
    scene = _mirror_pair()
    mu = ms.Measure({"A": F(1), "B": F(1)})
    sel = gl.select_cuffs(mu, scene)
    pairing = gl.match_unit_shearing(sel, scene, tol=1e-9)
    g_inst = next(i for i in sel.selected
                  if gl.instance_curve(i, scene) == C("g"))
    partner = pairing[g_inst]
    assert gl.instance_curve(partner, scene) == C("g", False)
    # matched pair re-verified tol-equivalent by the measures route
    assert ms.delta_equivalent(
        gl.instance_feet(partner, scene), gl.shear_target(g_inst, scene),
        1e-9, scene,
    )


def test_match_fails_with_displaced_feet():
    tol = 0.05
    scene = _mirror_pair(displace=2 * tol)
    sel = gl.select_cuffs(ms.Measure({"A": F(1), "B": F(1)}), scene)
    with pytest.raises(NoMatchingError) as err:
        gl.match_unit_shearing(sel, scene, tol=tol)
    assert err.value.witness


def test_matching_pairs_all_reverified():
    sel = gl.select_cuffs(MU, SCENE)
    pairing = gl.match_unit_shearing(sel, SCENE, TOL)
    for a, b in pairing.items():
        assert pairing[b] == a
        assert a != b
        assert gl.instance_curve(a, SCENE) == gl.instance_curve(b, SCENE).bar()
        assert ms.delta_equivalent(
            gl.instance_feet(b, SCENE), gl.shear_target(a, SCENE), TOL, SCENE
        )


# ---------------------------------------------------------------------------
# assembly


def _pipeline(scene=SCENE, mu=MU, tol=TOL):
    sel, surface = gl.glue_pipeline(mu, scene, tol)
    return sel, surface


def test_assemble_invariants():
    sel, surface = _pipeline()
    assert surface.euler_characteristic() == -len(surface.copies)
    comps = surface.components()
    assert sum(len(c) for c in comps) == len(surface.copies)
    boundary = surface.boundary_multicurve()
    assert sum(boundary.values()) == 3 * len(surface.copies) - 2 * len(surface.glued_pairs())
    # components agree with the BFS oracle
    verts, edges = surface.dual_graph()
    assert len(oracles.bfs_components(verts, edges)) == len(comps)


def test_assemble_single_pants_no_gluing():
    curves = {"g1": (4.0, 0.1), "g2": (4.0, 0.1), "g3": (4.0, 0.1)}
    pants = {"P": ms.PantsDatum("P", (cuff("g1"), cuff("g2"), cuff("g3")))}
    scene = ms.Scene(curves, pants)
    surface = gl.assemble(scene, (gl.PantsCopy("P", False, 0),), {})
    assert surface.euler_characteristic() == -1
    assert len(surface.components()) == 1
    assert sum(surface.boundary_multicurve().values()) == 3


def test_assemble_mirror_pair_closed():
    curves = {"g1": (4.0, 0.1), "g2": (4.0, 0.1), "g3": (4.0, 0.1)}
    pants = {
        "P": ms.PantsDatum("P", (cuff("g1"), cuff("g2"), cuff("g3"))),
        "Pb": ms.PantsDatum(
            "Pb", (cuff("g1", False), cuff("g2", False), cuff("g3", False))
        ),
    }
    scene = ms.Scene(curves, pants)
    copies = (gl.PantsCopy("P", False, 0), gl.PantsCopy("Pb", False, 0))
    pairing = {}
    for slot in range(3):
        a = gl.CuffInstance("P", False, 0, slot)
        b = gl.CuffInstance("Pb", False, 0, slot)
        pairing[a] = b
        pairing[b] = a
    surface = gl.assemble(scene, copies, pairing)
    assert surface.euler_characteristic() == -2
    assert not surface.boundary_multicurve()
    assert len(surface.components()) == 1  # genus 2 when connected


def test_assemble_rejects_malformed():
    curves = {"g1": (4.0, 0.1), "g2": (4.0, 0.1), "g3": (4.0, 0.1)}
    pants = {"P": ms.PantsDatum("P", (cuff("g1"), cuff("g2"), cuff("g3")))}
    scene = ms.Scene(curves, pants)
    a = gl.CuffInstance("P", False, 0, 0)
    b = gl.CuffInstance("P", False, 0, 1)
    with pytest.raises(MalformedGluingError):
        gl.assemble(scene, (gl.PantsCopy("P", False, 0),), {a: b, b: a})


# ---------------------------------------------------------------------------
# double covers


def _theta_surface():
    """Two pants glued along all three cuffs: theta-shaped dual graph."""
    curves = {"g1": (4.0, 0.1), "g2": (4.0, 0.1), "g3": (4.0, 0.1)}
    pants = {
        "P": ms.PantsDatum("P", (cuff("g1"), cuff("g2"), cuff("g3"))),
        "Pb": ms.PantsDatum(
            "Pb", (cuff("g1", False), cuff("g2", False), cuff("g3", False))
        ),
    }
    scene = ms.Scene(curves, pants)
    copies = (gl.PantsCopy("P", False, 0), gl.PantsCopy("Pb", False, 0))
    pairing = {}
    for slot in range(3):
        a = gl.CuffInstance("P", False, 0, slot)
        b = gl.CuffInstance("Pb", False, 0, slot)
        pairing[a] = b
        pairing[b] = a
    return gl.assemble(scene, copies, pairing)


def _dumbbell_surface():
    """Two one-handled pants joined by a bridge cuff."""
    curves = {"g": (4.0, 0.1), "h": (4.0, 0.1), "k": (4.0, 0.1)}
    pants = {
        "L": ms.PantsDatum("L", (cuff("g"), cuff("g", False), cuff("h"))),
        "R": ms.PantsDatum("R", (cuff("k"), cuff("k", False), cuff("h", False))),
    }
    scene = ms.Scene(curves, pants)
    copies = (gl.PantsCopy("L", False, 0), gl.PantsCopy("R", False, 0))
    pairing = {}
    pairs = [
        (gl.CuffInstance("L", False, 0, 0), gl.CuffInstance("L", False, 0, 1)),
        (gl.CuffInstance("R", False, 0, 0), gl.CuffInstance("R", False, 0, 1)),
        (gl.CuffInstance("L", False, 0, 2), gl.CuffInstance("R", False, 0, 2)),
    ]
    for a, b in pairs:
        pairing[a] = b
        pairing[b] = a
    return gl.assemble(scene, copies, pairing)


@pytest.mark.parametrize("builder", [_theta_surface, _dumbbell_surface])
def test_double_cover_every_cuff_nonseparating(builder):
    surface = builder()
    cover = gl.double_cover_nonseparating(surface)
    assert len(cover.copies) == 2 * len(surface.copies)
    verts, edges = cover.dual_graph()
    for k in range(len(edges)):
        assert oracles.edge_nonseparating(verts, edges, k)
    assert Counter(cover.subordination()) == Counter(
        {k: 2 * v for k, v in surface.subordination().items()}
    )


def test_double_cover_of_cycle_duals():
    # chain of n pants glued in a ring
    n = 5
    curves = {f"g{i}": (4.0, 0.1) for i in range(n)}
    curves["x"] = (4.0, 0.1)
    pants = {}
    for i in range(n):
        pants[f"P{i}"] = ms.PantsDatum(
            f"P{i}", (cuff(f"g{i}"), cuff(f"g{(i + 1) % n}", False), cuff("x"))
        )
    scene = ms.Scene(curves, pants)
    copies = tuple(gl.PantsCopy(f"P{i}", False, 0) for i in range(n))
    pairing = {}
    for i in range(n):
        a = gl.CuffInstance(f"P{i}", False, 0, 0)
        b = gl.CuffInstance(f"P{(i - 1) % n}", False, 0, 1)
        pairing[a] = b
        pairing[b] = a
    surface = gl.assemble(scene, copies, pairing)
    cover = gl.double_cover_nonseparating(surface)
    verts, edges = cover.dual_graph()
    assert all(oracles.edge_nonseparating(verts, edges, k) for k in range(len(edges)))


def test_double_cover_requires_valence_two():
    curves = {"g1": (4.0, 0.1), "g2": (4.0, 0.1), "g3": (4.0, 0.1)}
    pants = {
        "P": ms.PantsDatum("P", (cuff("g1"), cuff("g2"), cuff("g3"))),
        "Pb": ms.PantsDatum(
            "Pb", (cuff("g1", False), cuff("g2", False), cuff("g3", False))
        ),
    }
    scene = ms.Scene(curves, pants)
    copies = (gl.PantsCopy("P", False, 0), gl.PantsCopy("Pb", False, 0))
    a = gl.CuffInstance("P", False, 0, 0)
    b = gl.CuffInstance("Pb", False, 0, 0)
    surface = gl.assemble(scene, copies, {a: b, b: a})
    with pytest.raises(HypothesisViolationError):
        gl.double_cover_nonseparating(surface)


# ---------------------------------------------------------------------------
# hybriding


def test_hybridize_connected_input_unchanged():
    surface = _theta_surface()
    report = gl.hybridize(surface, surface.scene, 0.5)
    assert report.surface is surface
    assert report.swapped == ()


def test_hybridize_merges_components():
    sel, surface = _pipeline()
    cover = gl.double_cover_nonseparating(surface)
    before = len(cover.components())
    assert before > 1
    report = gl.hybridize(cover, SCENE, TOL)
    assert len(report.surface.components()) == 1
    assert report.surface.boundary_multicurve() == cover.boundary_multicurve()
    assert report.measured_tol <= 2 * TOL + 1e-12
    # component count decreased by one per swap
    assert len(report.swapped) >= before - 1


def test_hybridize_path_shaped_merge():
    scene, mu = make_gluing_scene(n_classes=3, per_class=6, seed=2)
    tol = scene.constants["epsilon"] / scene.constants["R"]
    sel, surface = gl.glue_pipeline(mu, scene, tol)
    cover = gl.double_cover_nonseparating(surface)
    if len(cover.components()) < 2:
        pytest.skip("fixture merged during matching")
    report = gl.hybridize(cover, scene, tol)
    assert len(report.surface.components()) == 1


# ---------------------------------------------------------------------------
# panted connectedness


def test_panted_connected_basics():
    assert gl.panted_connected(SCENE, C("c0"), C("c0"))
    assert gl.panted_connected(SCENE, C("c0"), C("c1", False))
    with pytest.raises(UnknownCurveError):
        gl.panted_connected(SCENE, C("zz"), C("c0"))


def test_panted_connected_disjoint_scenes():
    curves = {"a": (4.0, 0.0), "b": (4.0, 0.0), "c": (4.0, 0.0),
              "x": (4.0, 0.0), "y": (4.0, 0.0), "z": (4.0, 0.0)}
    pants = {
        "P": ms.PantsDatum("P", (cuff("a"), cuff("b"), cuff("c"))),
        "Q": ms.PantsDatum("Q", (cuff("x"), cuff("y"), cuff("z"))),
    }
    scene = ms.Scene(curves, pants)
    assert gl.panted_connected(scene, C("a"), C("b", False))
    assert not gl.panted_connected(scene, C("a"), C("x"))


# ---------------------------------------------------------------------------
# connectification


def test_connectify_already_connected():
    surface = _theta_surface()
    out = gl.connectify_rel_boundary(surface, surface.scene)
    assert len(out.components()) == 1


def test_connectify_two_closed_components():
    sel, surface = _pipeline()
    assert len(surface.components()) > 1
    out = gl.connectify_rel_boundary(surface, SCENE)
    assert len(out.components()) == 1
    assert out.boundary_multicurve() == surface.boundary_multicurve()
    # pants-copy multiset changes by mirrored pairs only
    added = Counter(out.subordination())
    added.subtract(surface.subordination())
    for (name, rev), extra in list(added.items()):
        if extra:
            datum = SCENE.datum(name)
            mirror = next(
                (other for other in SCENE.pants
                 if Counter(c.curve.bar() for c in SCENE.datum(other).cuffs)
                 == Counter(c.curve for c in datum.cuffs)),
                None,
            )
            assert added[(name, not rev)] == extra or (
                mirror is not None and added.get((mirror, rev), 0) == extra
            )


def test_connectify_preserves_boundary_multiset():
    # leave some cuffs unglued by dropping one matched pair
    sel, surface = _pipeline()
    pairs = surface.glued_pairs()
    pairing = dict(surface.pairing)
    for a, b in pairs[:2]:
        del pairing[a]
        del pairing[b]
    trimmed = gl.assemble(SCENE, surface.copies, pairing)
    out = gl.connectify_rel_boundary(trimmed, SCENE)
    assert len(out.components()) == 1
    assert out.boundary_multicurve() == trimmed.boundary_multicurve()


def test_connectify_unreachable_scene():
    curves = {"a": (4.0, 0.0), "b": (4.0, 0.0), "c": (4.0, 0.0),
              "x": (4.0, 0.0), "y": (4.0, 0.0), "z": (4.0, 0.0)}
    pants = {
        "P": ms.PantsDatum("P", (cuff("a"), cuff("a", False), cuff("b"))),
        "Q": ms.PantsDatum("Q", (cuff("x"), cuff("x", False), cuff("y"))),
    }
    scene = ms.Scene(curves, pants)
    copies = (gl.PantsCopy("P", False, 0), gl.PantsCopy("Q", False, 0))
    a1 = gl.CuffInstance("P", False, 0, 0)
    a2 = gl.CuffInstance("P", False, 0, 1)
    b1 = gl.CuffInstance("Q", False, 0, 0)
    b2 = gl.CuffInstance("Q", False, 0, 1)
    surface = gl.assemble(scene, copies, {a1: a2, a2: a1, b1: b2, b2: b1})
    with pytest.raises(NotConnectedSceneError):
        gl.connectify_rel_boundary(surface, scene)
