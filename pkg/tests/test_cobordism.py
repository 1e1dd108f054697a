"""Smith normal form, cobordism groups, classes, parity, representatives."""

import numpy as np
import pytest

import oracles
from pantcalc import cobordism as cb
from pantcalc import measures as ms
from pantcalc.errors import (
    IncompleteSceneError,
    NotACycleError,
    NotNullHomologousError,
    UnknownCurveError,
)

C = ms.Curve


def pants(name, *cuffs):
    return ms.PantsDatum(name, tuple(ms.CuffDatum(c) for c in cuffs))


# ---------------------------------------------------------------------------
# Smith normal form


def test_snf_examples():
    _, s, _ = cb.smith_normal_form([[2, 0], [0, 3]])
    assert [s[0][0], s[1][1]] == [1, 6]
    u, s, v = cb.smith_normal_form([[0, 0], [0, 0]])
    assert s == [[0, 0], [0, 0]]
    assert cb.invariant_factors([[0, 0], [0, 0]]) == []


def test_snf_random_against_determinant_divisor_oracle():
    rng = np.random.default_rng(0)
    for _ in range(120):
        rows, cols = rng.integers(1, 7, size=2)
        a = [[int(x) for x in row] for row in rng.integers(-4, 5, size=(rows, cols))]
        u, s, v = cb.smith_normal_form([row[:] for row in a])
        assert cb.mat_mul(cb.mat_mul(u, a), v) == s
        assert abs(oracles.det_int(u)) == 1
        assert abs(oracles.det_int(v)) == 1
        diag = [s[i][i] for i in range(min(rows, cols)) if s[i][i]]
        assert all(diag[i + 1] % diag[i] == 0 for i in range(len(diag) - 1))
        assert diag == oracles.determinant_divisor_factors(a)
        assert len(diag) == oracles.rank_mod_p(a)


# ---------------------------------------------------------------------------
# cobordism group


def _splitting_scene():
    """Parity Z/2 plus three free classes, splitting pants for every curve."""
    names = ["a", "w", "b1", "b2", "b3"]
    curves = {n: (4.0, 0.0) for n in names}
    data = {
        "T1": pants("T1", C("a"), C("a"), C("w")),
        "T2": pants("T2", C("a", False), C("a", False), C("w", False)),
        "W0": pants("W0", C("w"), C("b1"), C("b1", False)),
        "W1": pants("W1", C("w", False), C("b2"), C("b2", False)),
        "W2": pants("W2", C("w"), C("b3"), C("b3", False)),
    }
    scene = ms.Scene(curves, data)
    fixture = _fixture_for(scene)
    return scene, fixture


def _fixture_for(scene):
    curves = scene.curves()
    proj = []
    for free in ("b1", "b2", "b3"):
        row = [0] * len(curves)
        row[curves.index(C(free))] = 1
        row[curves.index(C(free, False))] = -1
        proj.append(tuple(row))
    gen = [0] * len(curves)
    gen[curves.index(C("a"))] = 1
    return cb.BundleFixture(tuple(proj), (0, 0, 0), tuple(gen))


def test_presentation_matrix_shape():
    scene, _ = _splitting_scene()
    pres = cb.presentation_matrix(scene)
    for j in range(len(pres.pants_names)):
        col = [pres.matrix[i][j] for i in range(len(pres.curves))]
        assert sum(abs(x) for x in col) == 3
        assert all(x >= 0 for x in col)


def test_raw_cokernel_examples():
    curves = {"g": (4.0, 0.0)}
    scene = ms.Scene(curves, {"P": pants("P", C("g"), C("g"), C("g", False))})
    assert cb.cobordism_group(scene) == cb.AbelianGroup(1, ())
    assert cb.cobordism_group(ms.Scene(curves, {})) == cb.AbelianGroup(2, ())


def test_identified_group_matches_bundle_fixture():
    scene, _ = _splitting_scene()
    group = cb.cobordism_group(scene, identify_reversals=True)
    assert group == cb.AbelianGroup(3, (2,))


def test_reversal_relation_holds_in_identified_quotient():
    scene, _ = _splitting_scene()
    pres = cb.presentation_matrix(scene, identify_reversals=True)
    for name in ("a", "w", "b1", "b2", "b3"):
        vec = pres.multicurve_vector([C(name), C(name, False)])
        assert not any(pres.class_of(vec))


def test_identification_requires_splitting_completeness():
    curves = {"g": (4.0, 0.0), "h": (4.0, 0.0)}
    scene = ms.Scene(curves, {"P": pants("P", C("g"), C("g"), C("g", False))})
    with pytest.raises(IncompleteSceneError):
        cb.cobordism_group(scene, identify_reversals=True)


# ---------------------------------------------------------------------------
# classes and sigma


def test_pants_boundary_maps_to_zero():
    scene, fixture = _splitting_scene()
    cls = cb.cobordism_class([C("a"), C("a"), C("w")], scene)
    assert not any(cls.coordinates)


def test_curve_plus_reversal_is_zero():
    scene, fixture = _splitting_scene()
    cls = cb.cobordism_class([C("b1"), C("b1", False)], scene)
    assert not any(cls.coordinates)


def test_sigma_values_and_additivity():
    scene, fixture = _splitting_scene()
    one = cb.cobordism_class([C("a")], scene, fixture, want_sigma=True)
    assert one.sigma == 1
    two = cb.cobordism_class([C("a"), C("a")], scene, fixture, want_sigma=True)
    assert two.sigma == 0
    w = cb.cobordism_class([C("w")], scene, fixture, want_sigma=True)
    assert w.sigma == 0
    mixed = cb.cobordism_class([C("a"), C("w")], scene, fixture, want_sigma=True)
    assert mixed.sigma == (one.sigma + w.sigma) % 2


def test_sigma_rejects_non_null_homologous():
    scene, fixture = _splitting_scene()
    with pytest.raises(NotNullHomologousError):
        cb.cobordism_class([C("b1")], scene, fixture, want_sigma=True)


def test_class_unknown_curve():
    scene, _ = _splitting_scene()
    with pytest.raises(UnknownCurveError):
        cb.cobordism_class([C("zzz")], scene)


# ---------------------------------------------------------------------------
# panted complexes


def _complex(pants_spec, curves=("k0", "k1", "k2")):
    cpants = tuple(
        cb.ComplexPants(name, tuple(cb.Attachment(c, d) for c, d in attach))
        for name, attach in pants_spec
    )
    return cb.PantedComplex(tuple(curves), cpants)


def test_h2_single_pants_zero():
    k = _complex([("P", (("k0", 1), ("k1", 1), ("k2", 1)))])
    assert cb.h2_of_panted_complex(k) == cb.AbelianGroup(0, ())


def test_h2_mirror_pair_rank_one():
    k = _complex([
        ("P", (("k0", 1), ("k1", 1), ("k2", 1))),
        ("Q", (("k0", -1), ("k1", -1), ("k2", -1))),
    ])
    group = cb.h2_of_panted_complex(k)
    assert group.rank == 1
    basis = cb.h2_kernel_basis(k)
    assert len(basis) == 1
    assert abs(basis[0][0]) == abs(basis[0][1]) == 1


def test_h2_additive_over_disjoint_union():
    k1 = _complex([
        ("P", (("k0", 1), ("k1", 1), ("k2", 1))),
        ("Q", (("k0", -1), ("k1", -1), ("k2", -1))),
    ])
    k2 = _complex(
        [
            ("P", (("k0", 1), ("k1", 1), ("k2", 1))),
            ("Q", (("k0", -1), ("k1", -1), ("k2", -1))),
            ("P2", (("m0", 1), ("m1", 1), ("m2", 1))),
            ("Q2", (("m0", -1), ("m1", -1), ("m2", -1))),
        ],
        curves=("k0", "k1", "k2", "m0", "m1", "m2"),
    )
    assert cb.h2_of_panted_complex(k2).rank == 2 * cb.h2_of_panted_complex(k1).rank


def test_representative_doubling():
    k = _complex([
        ("P", (("k0", 1), ("k1", 1), ("k2", 1))),
        ("Q", (("k0", -1), ("k1", -1), ("k2", -1))),
    ])
    surface = cb.representative_surface(k, [1, 1])
    assert surface.euler_characteristic() == -2
    assert not surface.boundary_multicurve()
    counts = surface.subordination()
    assert counts[("P", False)] == 1 and counts[("Q", False)] == 1


def test_representative_empty():
    k = _complex([("P", (("k0", 1), ("k1", 1), ("k2", 1)))])
    surface = cb.representative_surface(k, [0])
    assert len(surface.copies) == 0


def test_representative_rejects_non_cycle():
    k = _complex([("P", (("k0", 1), ("k1", 1), ("k2", 1)))])
    with pytest.raises(NotACycleError):
        cb.representative_surface(k, [1])


def test_random_complexes_representatives_and_ranks():
    rng = np.random.default_rng(6)
    for _ in range(30):
        n_curves = int(rng.integers(2, 5))
        n_pants = int(rng.integers(2, 6))
        curves = tuple(f"k{i}" for i in range(n_curves))
        spec = []
        for p in range(n_pants):
            attach = tuple(
                (f"k{rng.integers(0, n_curves)}", int(rng.choice([-1, 1])))
                for _ in range(3)
            )
            spec.append((f"P{p}", attach))
        k = _complex(spec, curves=curves)
        matrix = k.attach_matrix()
        group = cb.h2_of_panted_complex(k)
        assert group.rank == n_pants - oracles.rank_mod_p(matrix)
        for alpha in cb.h2_kernel_basis(k):
            surface = cb.representative_surface(k, alpha)
            assert not surface.boundary_multicurve()
            counts = surface.subordination()
            for p, a in zip(k.pants, alpha):
                assert counts[(p.name, a < 0)] == abs(a) or a == 0
