"""The shipped sample files: they load, validate, and behave as documented."""

import pytest

from fga import (
    GraphMap,
    InverseMismatch,
    NotACovering,
    compose,
    demo_names,
    demo_path,
    fixed_point_independence,
    lift_map,
    load_graph,
    load_map,
    load_system,
    pf_eigenvalue,
    power,
    sample_flare,
    transition_matrix,
    validate_system,
)
from fga.laminations import INCONCLUSIVE


def test_demo_names_cover_every_shipped_file():
    names = demo_names()
    assert list(names) == sorted(names)
    for required in (
        "rose2.graph",
        "rose3.graph",
        "egraph.graph",
        "fibonacci.map",
        "identity.map",
        "psi3.map",
        "psi3_inv.map",
        "phi.map",
        "phi_inv.map",
        "attach_u.cover",
        "attach_v.cover",
        "demo.system",
        "selfpair.system",
        "bad_cover.system",
        "bad_inverse.system",
    ):
        assert required in names, required


def test_demo_path_unknown():
    with pytest.raises(FileNotFoundError, match="rose2.graph"):
        demo_path("nonexistent.system")


def test_every_demo_file_loads():
    from fga import ParseError, load_cover

    rose3 = load_graph(demo_path("rose3.graph"))
    for name in demo_names():
        ext = name.rsplit(".", 1)[1]
        if name == "bad_cover.cover":
            # standalone loading validates; only system attachment defers
            with pytest.raises(ParseError, match="not a covering"):
                load_cover(demo_path(name), rose3)
        elif ext == "graph":
            load_graph(demo_path(name))
        elif ext == "cover":
            load_cover(demo_path(name), rose3)
        elif ext == "map":
            load_map(demo_path(name))
        elif ext == "system":
            load_system(demo_path(name))


def test_fibonacci_map_file():
    lm = load_map(demo_path("fibonacci.map"))
    assert lm.name == "fibonacci"
    assert lm.map == GraphMap.from_strs(lm.map.domain, {"a": "a b", "b": "a"})


def test_identity_map_file():
    lm = load_map(demo_path("identity.map"))
    assert lm.map == GraphMap.identity(lm.map.domain)


def test_psi3_files_are_inverse():
    f = load_map(demo_path("psi3.map")).map
    g = load_map(demo_path("psi3_inv.map")).map
    assert f == GraphMap.from_strs(f.domain, {"a": "b", "b": "c", "c": "c a b"})
    ident = GraphMap.identity(f.domain)
    assert compose(g, f) == ident and compose(f, g) == ident


def test_demo_system_validates():
    ls = load_system(demo_path("demo.system"))
    rep = validate_system(ls.system, ls.spec)
    assert rep.valid, rep.errors
    assert [(a.edge, a.end, a.degree) for a in rep.attachments] == [("E", "u", 2), ("E", "v", 2)]


def test_demo_phi_is_the_lifted_automorphism():
    # the edge-space maps are exactly the lifts of the rose automorphism
    # through the degree-2 marking
    psi3 = load_map(demo_path("psi3.map")).map
    psi3_inv = load_map(demo_path("psi3_inv.map")).map
    ls = load_system(demo_path("demo.system"))
    cover_u = ls.system.cover("E", 0)
    f, f_inv = ls.spec.pair("E")
    assert f == lift_map(cover_u, psi3)
    assert f_inv == lift_map(cover_u, psi3_inv)
    ident = GraphMap.identity(f.domain)
    assert compose(f_inv, f) == ident and compose(f, f_inv) == ident
    lam = pf_eigenvalue(transition_matrix(f)).value
    assert abs(lam - 1.8392867552379206) < 1e-9


def test_demo_independence_depth_64():
    ls = load_system(demo_path("demo.system"))
    f, f_inv = ls.spec.pair("E")
    rep = fixed_point_independence(
        power(f, 6), power(f_inv, 6), ls.system.cover("E", 0), ls.system.cover("E", 1), 64
    )
    assert rep.summary == "independent-to-depth"
    assert len(rep.cells) == 864
    assert not any(c.verdict.verdict == INCONCLUSIVE for c in rep.cells)
    assert rep.doubled is False and rep.depth == 64


def test_demo_independence_depth_1_inconclusive():
    # a window of one letter can never meet the evidence margin
    ls = load_system(demo_path("demo.system"))
    f, f_inv = ls.spec.pair("E")
    rep = fixed_point_independence(
        power(f, 6), power(f_inv, 6), ls.system.cover("E", 0), ls.system.cover("E", 1), 1
    )
    assert rep.summary == "inconclusive"
    assert rep.doubled is True and rep.depth == 2
    assert sum(c.verdict.verdict == INCONCLUSIVE for c in rep.cells) == 44


def test_selfpair_system_is_dependent():
    ls = load_system(demo_path("selfpair.system"))
    assert validate_system(ls.system, ls.spec).valid
    f, f_inv = ls.spec.pair("E")
    rep = fixed_point_independence(
        power(f, 6), power(f_inv, 6), ls.system.cover("E", 0), ls.system.cover("E", 1), 64
    )
    assert rep.summary == "dependent"
    assert rep.witness == (0, 24)


def test_bad_cover_system_fails_validation():
    ls = load_system(demo_path("bad_cover.system"))
    rep = validate_system(ls.system, ls.spec)
    assert not rep.valid
    assert any(isinstance(e, NotACovering) and e.vertex == "t0" for e in rep.errors)


def test_bad_inverse_system_fails_validation():
    ls = load_system(demo_path("bad_inverse.system"))
    rep = validate_system(ls.system, ls.spec)
    assert not rep.valid
    assert any(isinstance(e, InverseMismatch) for e in rep.errors)


def test_demo_flare_smoke():
    ls = load_system(demo_path("demo.system"))
    rep = sample_flare(
        ls.system,
        ls.spec.with_uniform_exponent(4),
        m_values=(2, 4),
        samples=5,
        seed=1,
        midpoint_length=16,
    )
    assert rep.passed and rep.stable_m == 2
    assert [(r.m, r.fraction) for r in rep.rows] == [(2, 1.0), (4, 1.0)]
    assert rep.exponent == 4
