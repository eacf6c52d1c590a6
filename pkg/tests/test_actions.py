import random

import pytest

from chainlab.actions import (
    act,
    act_reference,
    build_action,
    check_transitive,
    holonomy_probe,
    level_maps_compatible,
    normalization_level,
    project,
)
from chainlab.chains import explicit_chain, heis_diag, split_diag
from chainlab.groups import free_abelian, multiply
from chainlab.subgroups import FiniteIndexSubgroup, members_in_box


def test_build_action_sizes():
    a = build_action(heis_diag(2, 3, max_depth=3), 2)
    assert a.sizes() == [1, 12, 144]
    b = build_action(split_diag(5, 7, 3, max_depth=2), 1)
    assert b.sizes() == [1, 105]
    c = build_action(split_diag(5, 7, 3, max_depth=2), 0)
    assert c.sizes() == [1]


def test_identity_acts_trivially():
    a = build_action(heis_diag(2, 3, max_depth=4), 3)
    for lvl in range(4):
        assert act(a, a.chain.model.identity(), lvl).is_identity()


def test_act_orders():
    b = build_action(split_diag(5, 7, 3, max_depth=2), 1)
    e1 = b.chain.model.elem(1, 0, 0)
    assert act(b, e1, 1).order() == 5
    a = build_action(heis_diag(2, 3, max_depth=2), 1)
    z = a.chain.model.elem(0, 0, 1)
    assert act(a, z, 1).order() == 2


def test_fast_path_matches_reference():
    rng = random.Random(13)
    for action in [
        build_action(heis_diag(2, 3, max_depth=3), 2),
        build_action(split_diag(5, 7, 3, max_depth=2), 1),
    ]:
        model = action.chain.model
        for _ in range(25):
            g = model.elem(*[rng.randint(-9, 9) for _ in range(3)])
            for lvl in range(action.depth + 1):
                assert act(action, g, lvl) == act_reference(action, g, lvl)


def test_homomorphism_property():
    rng = random.Random(20160608)
    action = build_action(heis_diag(2, 3, max_depth=4), 3)
    model = action.chain.model
    for _ in range(100):
        g1 = model.elem(*[rng.randint(-10, 10) for _ in range(3)])
        g2 = model.elem(*[rng.randint(-10, 10) for _ in range(3)])
        for lvl in range(4):
            assert act(action, multiply(g1, g2), lvl) == act(action, g1, lvl).compose(
                act(action, g2, lvl)
            )


def test_level_map_compatibility_and_projection():
    rng = random.Random(3)
    action = build_action(heis_diag(2, 3, max_depth=4), 3)
    model = action.chain.model
    for _ in range(50):
        g = model.elem(*[rng.randint(-9, 9) for _ in range(3)])
        for lvl in range(3):
            assert level_maps_compatible(action, g, lvl)
            fine = act(action, g, lvl + 1)
            assert project(action, fine) == act(action, g, lvl)


def test_table_sizes_divide_up_the_tower():
    action = build_action(heis_diag(2, 3, max_depth=4), 3)
    sizes = action.sizes()
    for a, b in zip(sizes, sizes[1:]):
        assert b % a == 0


def test_transitive_all_levels():
    for action in [
        build_action(heis_diag(2, 3, max_depth=5), 4),
        build_action(split_diag(5, 7, 3, max_depth=3), 2),
    ]:
        for lvl in range(action.depth + 1):
            assert check_transitive(action, lvl)


def test_stabilizer_of_basepoint_is_the_level():
    action = build_action(heis_diag(2, 3, max_depth=3), 2)
    model = action.chain.model
    for lvl in (1, 2):
        table = action.tables[lvl]
        fixed = set()
        for x in range(-4, 5):
            for y in range(-4, 5):
                for z in range(-4, 5):
                    g = model.elem(x, y, z)
                    if table.lookup(g) == 0:
                        fixed.add(g.coords)
        expected = {g.coords for g in members_in_box(action.chain.level(lvl), 4)}
        assert fixed == expected


# -- holonomy ------------------------------------------------------------------


def test_holonomy_identity_always_trivial():
    action = build_action(split_diag(5, 7, 1, max_depth=4), 3)
    for lvl in range(4):
        assert holonomy_probe(action, action.chain.model.identity(), lvl)


def test_holonomy_probe_on_axis_kernel():
    action = build_action(split_diag(5, 7, 1, max_depth=5), 4)
    model = action.chain.model
    # even axis elements are central, so they fix every cylinder
    assert holonomy_probe(action, model.elem(0, 0, 2), 1)
    # odd axis elements conjugate to (2u, 2v, t)-type elements and move
    # points of every cylinder; computed by the direct conjugation scan
    assert not holonomy_probe(action, model.elem(0, 0, 1), 0)
    assert not holonomy_probe(action, model.elem(0, 0, 1), 1)


def test_holonomy_requires_isotropy():
    action = build_action(split_diag(5, 7, 3, max_depth=3), 2)
    with pytest.raises(ValueError):
        holonomy_probe(action, action.chain.model.elem(1, 0, 0), 1)


def test_normalization_level_values():
    action = build_action(split_diag(5, 7, 1, max_depth=5), 4)
    model = action.chain.model
    assert normalization_level(action, model.identity()) == 0
    # (0,0,2) is central: every level-0 generator already conjugates it
    # into the kernel
    assert normalization_level(action, model.elem(0, 0, 2)) == 0
    # odd axis elements normalize only at the deepest checked level
    assert normalization_level(action, model.elem(0, 0, 1)) == action.depth
    with pytest.raises(ValueError):
        normalization_level(action, model.elem(1, 0, 0))


def test_normalization_level_finite_for_all_kernel_members():
    from chainlab.chains import truncated_kernel

    action = build_action(split_diag(5, 7, 1, max_depth=5), 4)
    for g in truncated_kernel(action.chain, 4, 6):
        assert normalization_level(action, g) is not None


def test_action_json_export_has_cycles():
    action = build_action(split_diag(5, 7, 3, max_depth=2), 1)
    d = action.to_json_dict()
    assert d["levels"][1]["index"] == 105
    gen_entry = d["levels"][1]["generators"][0]
    assert gen_entry["order"] == 5
    assert all(len(c) == 5 for c in gen_entry["cycles"])


def test_abelian_model_action():
    z2 = free_abelian(2)
    levels = [
        FiniteIndexSubgroup.sublattice(z2, ((2**n, 0), (0, 2**n))) for n in range(3)
    ]
    action = build_action(explicit_chain(z2, levels), 2)
    assert action.sizes() == [1, 4, 16]
    for lvl in range(3):
        assert check_transitive(action, lvl)


def test_act_large_gamma_uses_exact_path():
    action = build_action(heis_diag(2, 3, max_depth=2), 1)
    g = action.chain.model.elem(2**40, 1, -(2**40))
    assert act(action, g, 1) == act_reference(action, g, 1)


def test_act_matches_membership_definition():
    # act(gamma)[j] = k exactly when reps[k]^-1 gamma reps[j] lies in the
    # subgroup, i.e. gamma maps the j-th coset onto the k-th
    from chainlab.groups import inverse
    from chainlab.subgroups import contains

    rng = random.Random(31)
    for action in [
        build_action(heis_diag(2, 3, max_depth=2), 1),
        build_action(split_diag(5, 7, 3, max_depth=2), 1),
    ]:
        model = action.chain.model
        table = action.tables[1]
        sub = table.subgroup
        for _ in range(10):
            g = model.elem(*[rng.randint(-6, 6) for _ in range(3)])
            perm = act(action, g, 1)
            for j, r in enumerate(table.reps):
                k = int(perm.mapping[j])
                moved = multiply(g, r)
                assert contains(sub, multiply(inverse(table.reps[k]), moved))
