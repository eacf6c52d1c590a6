import pytest

from chainlab.chains import (
    INCONCLUSIVE,
    IRREGULAR,
    REGULAR,
    WEAKLY_REGULAR,
    envelope_analysis,
    explicit_chain,
    heis_diag,
    intersected,
    irregularity_witness,
    normal_chain_test,
    split_diag,
    truncated_kernel,
    virtual_regularity_probe,
    weak_regularity_probe,
)
from chainlab.groups import free_abelian, heisenberg, inverse, multiply, split_ext
from chainlab.subgroups import (
    FiniteIndexSubgroup,
    contains,
    generators,
    subgroup_equal,
)

HEIS = heisenberg()
SE = split_ext()


# -- level rules ---------------------------------------------------------------


def test_level_examples():
    ch = heis_diag(2, 3)
    lvl1 = ch.level(1)
    assert subgroup_equal(lvl1, FiniteIndexSubgroup.heisenberg_bm(HEIS, ((2, 0), (0, 3)), 2))
    sdc = split_diag(5, 7, 3)
    assert sdc.level(0).is_whole_group()
    sub = intersected(sdc, FiniteIndexSubgroup.diag_scales(SE, 1, 1, 2))
    assert subgroup_equal(sub.level(1), FiniteIndexSubgroup.diag_scales(SE, 5, 7, 6))


def test_chain_guards():
    with pytest.raises(ValueError):
        split_diag(5, 5, 3)
    with pytest.raises(ValueError):
        split_diag(4, 7, 3)
    whole = FiniteIndexSubgroup.diag_scales(SE, 1, 1, 1)
    with pytest.raises(ValueError):
        explicit_chain(SE, [whole, whole])  # fails proper descent
    with pytest.raises(ValueError):
        # level 0 must be the whole group
        explicit_chain(SE, [FiniteIndexSubgroup.diag_scales(SE, 2, 1, 1), whole])


def test_descent_and_index_growth():
    for ch in [heis_diag(2, 3), split_diag(5, 7, 3), split_diag(5, 7, 1)]:
        for n in range(4):
            nxt, cur = ch.level(n + 1), ch.level(n)
            assert all(contains(cur, g) for g in generators(nxt))
            assert ch.level_index(n + 1) > ch.level_index(n)


# -- truncated kernel -----------------------------------------------------------


def test_truncated_kernel_heis_trivial():
    ch = heis_diag(2, 3, max_depth=7)
    mem = truncated_kernel(ch, 6, 30)
    assert [g.coords for g in mem] == [(0, 0, 0)]


def test_truncated_kernel_split_diag():
    ch = split_diag(5, 7, 3, max_depth=6)
    assert [g.coords for g in truncated_kernel(ch, 4, 30)] == [(0, 0, 0)]
    # the box-scan picks up third-axis survivors once the box reaches the
    # level's third scale 3^4 = 81
    survivors = truncated_kernel(ch, 4, 100)
    assert [g.coords for g in survivors] == [(0, 0, -81), (0, 0, 0), (0, 0, 81)]


def test_truncated_kernel_constant_third_scale_is_axis():
    ch = split_diag(5, 7, 1, max_depth=5)
    mem = truncated_kernel(ch, 4, 3)
    assert [g.coords for g in mem] == [(0, 0, z) for z in range(-3, 4)]


def test_truncated_kernel_closed_under_group_ops_within_box():
    ch = split_diag(5, 7, 1, max_depth=5)
    mem = truncated_kernel(ch, 4, 6)
    coords = {g.coords for g in mem}
    for a in mem:
        inv = inverse(a)
        if all(abs(c) <= 6 for c in inv.coords):
            assert inv.coords in coords
        for b in mem:
            prod = multiply(a, b)
            if all(abs(c) <= 6 for c in prod.coords):
                assert prod.coords in coords


# -- normality -------------------------------------------------------------------


def test_normal_chain_test_regular_cases():
    sdc = split_diag(5, 7, 3, max_depth=4)
    sub = intersected(sdc, FiniteIndexSubgroup.diag_scales(SE, 1, 1, 2))
    assert normal_chain_test(sub, 3).verdict == REGULAR

    z3 = free_abelian(3)
    levels = [
        FiniteIndexSubgroup.sublattice(z3, ((2**n, 0, 0), (0, 2**n, 0), (0, 0, 2**n)))
        for n in range(4)
    ]
    ab = explicit_chain(z3, levels)
    assert normal_chain_test(ab, 3).verdict == REGULAR

    # a normal non-abelian tower: diag(2^n, 2^n) x 2^n Z
    tower = explicit_chain(
        HEIS,
        [
            FiniteIndexSubgroup.heisenberg_bm(HEIS, ((2**n, 0), (0, 2**n)), 2**n)
            for n in range(4)
        ],
    )
    assert normal_chain_test(tower, 3).verdict == REGULAR


def test_normal_chain_test_inconclusive_for_heis_diag():
    rep = normal_chain_test(heis_diag(2, 3), 3)
    assert rep.verdict == INCONCLUSIVE
    assert "level 1" in rep.rationale


# -- irregularity witnesses --------------------------------------------------------


def test_heis_witness_structure():
    ch = heis_diag(2, 3, max_depth=7)
    wit = irregularity_witness(ch, 1, 6)
    assert wit is not None
    assert contains(ch.level(1), wit.h)
    assert wit.h.coords == (6, 0, 0)
    assert [f.n for f in wit.failures] == [2, 3, 4, 5, 6]
    lvl2 = ch.level(2)
    for f in wit.failures:
        assert contains(ch.level(f.n), f.gamma)
        assert not contains(lvl2, f.conjugate)


def test_split_diag_witness_at_level_zero():
    ch = split_diag(5, 7, 3, max_depth=4)
    wit = irregularity_witness(ch, 0, 3)
    assert wit is not None and wit.h.coords == (1, 0, 0)
    for f in wit.failures:
        # conjugating (0,0,3^n) shifts the first coordinate by 2, which
        # level 1 cannot absorb
        assert f.conjugate.coords[0] % 5 != 0


def test_abelian_chain_has_no_witness():
    z3 = free_abelian(3)
    levels = [
        FiniteIndexSubgroup.sublattice(z3, ((2**n, 0, 0), (0, 2**n, 0), (0, 0, 2**n)))
        for n in range(4)
    ]
    ab = explicit_chain(z3, levels)
    assert irregularity_witness(ab, 0, 3) is None


def test_witness_reverifies():
    ch = heis_diag(2, 3, max_depth=6)
    for s in (0, 1, 2):
        wit = irregularity_witness(ch, s, 5)
        assert wit is not None
        target = ch.level(wit.escape_level)
        for f in wit.failures:
            assert not contains(target, f.conjugate)


# -- verdict assembly ---------------------------------------------------------------


def test_weak_regularity_probe_verdicts():
    assert weak_regularity_probe(heis_diag(2, 3, max_depth=6), 5).verdict == IRREGULAR
    assert weak_regularity_probe(split_diag(5, 7, 3, max_depth=5), 4).verdict == IRREGULAR
    z3 = free_abelian(3)
    levels = [
        FiniteIndexSubgroup.sublattice(z3, ((3**n, 0, 0), (0, 3**n, 0), (0, 0, 3**n)))
        for n in range(5)
    ]
    assert weak_regularity_probe(explicit_chain(z3, levels), 4).verdict == REGULAR


def test_weakly_regular_certificate():
    # levels (5, 7, 3^n): level 1 normalizes every deeper level, none are
    # normal in the whole group
    levels = [FiniteIndexSubgroup.diag_scales(SE, 1, 1, 1)] + [
        FiniteIndexSubgroup.diag_scales(SE, 5, 7, 3**n) for n in range(1, 5)
    ]
    ch = explicit_chain(SE, levels)
    rep = weak_regularity_probe(ch, 4)
    assert rep.verdict == WEAKLY_REGULAR
    assert "level 1" in rep.rationale


def test_regular_and_witness_never_coexist():
    for ch, depth in [
        (heis_diag(2, 3, max_depth=6), 5),
        (split_diag(5, 7, 3, max_depth=5), 4),
        (split_diag(5, 7, 1, max_depth=5), 4),
    ]:
        rep = normal_chain_test(ch, depth)
        wit = irregularity_witness(ch, 0, depth)
        assert not (rep.verdict == REGULAR and wit is not None)


# -- virtual regularity ----------------------------------------------------------------


def test_virtual_probe_split_diag_even_cover_regular():
    sdc = split_diag(5, 7, 3, max_depth=4)
    cover = FiniteIndexSubgroup.diag_scales(SE, 1, 1, 2)
    assert virtual_regularity_probe(sdc, cover, 3).verdict == REGULAR


def test_virtual_probe_heis_cover_irregular():
    ch = heis_diag(2, 3, max_depth=7)
    cover = FiniteIndexSubgroup.heisenberg_bm(HEIS, ((2, 0), (0, 2)), 2)
    rep = virtual_regularity_probe(ch, cover, 6)
    assert rep.verdict == IRREGULAR
    wit = rep.witness
    env = envelope_analysis(2, 3, 2, 2, 2)
    assert (env.s, env.A, env.B, env.C, env.t) == (2, 4, 18, 4, 3)
    assert wit.s == env.s and wit.escape_level == env.t + 1
    assert [f.n for f in wit.failures] == [3, 4, 5, 6]
    sub = intersected(ch, cover)
    assert contains(sub.level(wit.s), wit.h)
    for f in wit.failures:
        assert contains(sub.level(f.n), f.gamma)
        assert not contains(sub.level(wit.escape_level), f.conjugate)


def test_virtual_probe_whole_cover_matches_plain():
    ch = heis_diag(2, 3, max_depth=6)
    whole = FiniteIndexSubgroup.heisenberg_bm(HEIS, ((1, 0), (0, 1)), 1)
    assert virtual_regularity_probe(ch, whole, 5).verdict == weak_regularity_probe(ch, 5).verdict
    sdc = split_diag(5, 7, 3, max_depth=5)
    sewhole = FiniteIndexSubgroup.diag_scales(SE, 1, 1, 1)
    assert virtual_regularity_probe(sdc, sewhole, 4).verdict == weak_regularity_probe(sdc, 4).verdict


def test_report_json_shape():
    rep = weak_regularity_probe(heis_diag(2, 3, max_depth=5), 4)
    d = rep.to_json_dict()
    assert set(d) == {"verdict", "depth_checked", "witness", "rationale"}
    assert set(d["witness"]) == {"h", "s", "escape_level", "failures"}
    assert all(set(f) == {"n", "gamma", "conjugate"} for f in d["witness"]["failures"])


def test_constant_third_scale_chain_is_irregular():
    # levels (5^n, 7^n, 1): the kernel is the whole third axis, and
    # conjugating (0,0,1) by (5^s, 0, 0) still shifts the first coordinate
    ch = split_diag(5, 7, 1, max_depth=5)
    rep = weak_regularity_probe(ch, 4)
    assert rep.verdict == IRREGULAR
    assert rep.witness.failures[0].gamma.coords[2] % 2 == 1


def test_third_entry_factorization_identity():
    # for h = (p^s x', q^s y', p^s z') and gamma = (p^n x, q^n y, p^n z) the
    # conjugate's third entry is p^n z + p^s q^n x' y - q^s p^n x y', which
    # factors as p^s (p^(n-s) z + q^n x' y - q^s p^(n-s) x y'); checked
    # against the multiply-chain conjugation
    import random

    from chainlab.groups import conjugate

    rng = random.Random(101)
    for p, q in [(2, 3), (3, 5)]:
        for _ in range(200):
            s = rng.randint(1, 3)
            n = rng.randint(s + 1, 6)
            xp, yp, zp = (rng.randint(-4, 4) for _ in range(3))
            x, y, z = (rng.randint(-4, 4) for _ in range(3))
            h = HEIS.elem(p**s * xp, q**s * yp, p**s * zp)
            gamma = HEIS.elem(p**n * x, q**n * y, p**n * z)
            conj = conjugate(h, gamma)
            third = p**n * z + p**s * q**n * xp * y - q**s * p**n * x * yp
            assert conj.coords == (p**n * x, q**n * y, third)
            assert third == p**s * (p ** (n - s) * z + q**n * xp * y - q**s * p ** (n - s) * x * yp)


def test_split_diag_with_even_first_prime_still_resolves():
    # conjugating by (2^s, 0, 0) cannot escape (2 divides 2*2^s), so the
    # witness search must find the (0, q^s, 0) conjugator instead
    ch = split_diag(2, 3, 3, max_depth=5)
    rep = weak_regularity_probe(ch, 4)
    assert rep.verdict == IRREGULAR
    assert rep.witness.h.coords[1] != 0

    whole = FiniteIndexSubgroup.diag_scales(SE, 1, 1, 1)
    assert virtual_regularity_probe(ch, whole, 4).verdict == IRREGULAR
