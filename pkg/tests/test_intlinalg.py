import random

from chainlab import intlinalg as la


def test_hnf_convention_lower_triangular_positive_pivots():
    h, u = la.hnf_with_transform(la.mat([[2, 4], [6, 8]]))
    assert la.det(u) in (1, -1)
    assert la.mat([[sum(la.mat([[2, 4], [6, 8]])[i][k] * u[k][j] for k in range(2)) for j in range(2)] for i in range(2)]) == h
    # lower triangular, positive diagonal, reduced off-diagonal
    assert h[0][1] == 0
    assert h[0][0] > 0 and h[1][1] > 0
    assert 0 <= h[1][0] < h[1][1]


def test_hnf_random_unimodular_invariance():
    rng = random.Random(3)
    for _ in range(50):
        m = la.mat([[rng.randint(-6, 6) for _ in range(3)] for _ in range(3)])
        if la.det(m) == 0:
            continue
        h, u = la.hnf_with_transform(m)
        assert abs(la.det(u)) == 1
        # m @ u == h
        prod = tuple(
            tuple(sum(m[i][k] * u[k][j] for k in range(3)) for j in range(3)) for i in range(3)
        )
        assert prod == h
        assert abs(la.det(h)) == abs(la.det(m))


def test_lattice_membership_and_reduction():
    basis = la.lattice_basis(la.columns(la.mat([[2, 1], [0, 3]])), 2)
    inside = [(2 * a + b, 3 * b) for a in range(-3, 4) for b in range(-3, 4)]
    for v in inside:
        assert la.lattice_contains(basis, v)
        assert la.lattice_reduce(basis, v) == (0, 0)
    assert not la.lattice_contains(basis, (1, 0))
    assert la.lattice_reduce(basis, (1, 0)) != (0, 0)


def test_integer_kernel():
    m = la.mat([[2, -4]])
    kern = la.integer_kernel(m)
    assert len(kern) == 1
    (k,) = kern
    # kernel of (2, -4) is generated by (2, 1)
    assert 2 * k[0] - 4 * k[1] == 0
    assert abs(k[0]) == 2 and abs(k[1]) == 1


def test_lattice_intersection_examples():
    a = la.lattice_intersection(la.diag_matrix((2, 1)), la.diag_matrix((3, 1)))
    assert la.hnf(a) == la.diag_matrix((6, 1))
    b = la.lattice_intersection(la.diag_matrix((2, 2)), la.mat([[2, 1], [0, 1]]))
    # brute-force oracle over a box
    def in_l1(v):
        return v[0] % 2 == 0 and v[1] % 2 == 0

    def in_l2(v):
        return la.lattice_contains(la.lattice_basis(la.columns(la.mat([[2, 1], [0, 1]])), 2), v)

    inter_basis = la.lattice_basis(la.columns(b), 2)
    for x in range(-8, 9):
        for y in range(-8, 9):
            assert la.lattice_contains(inter_basis, (x, y)) == (in_l1((x, y)) and in_l2((x, y)))


def test_solve_2x2():
    assert la.solve_2x2(la.mat([[2, 0], [0, 3]]), 4, 9) == (2, 3)
    assert la.solve_2x2(la.mat([[2, 0], [0, 3]]), 1, 0) is None
    assert la.solve_2x2(la.mat([[2, 4], [6, 8]]), 2, 6) == (1, 0)


def test_smith_diagonal():
    assert la.smith_diagonal(la.mat([[2, 0], [0, 4]])) == [2, 4]
    assert la.smith_diagonal(la.mat([[2, 4], [6, 8]])) == [2, 4]
    d = la.smith_diagonal(la.mat([[6, 0], [0, 4]]))
    assert d == [2, 12]
    for a, b in zip(d, d[1:]):
        assert b % a == 0


def test_lattice_basis_canonical_under_permutation_and_span():
    rng = random.Random(17)
    for _ in range(40):
        vecs = [tuple(rng.randint(-5, 5) for _ in range(3)) for _ in range(5)]
        basis = la.lattice_basis(vecs, 3)
        shuffled = list(vecs)
        rng.shuffle(shuffled)
        assert la.lattice_basis(shuffled, 3) == basis
        doubled = la.lattice_basis(vecs + [tuple(2 * x for x in vecs[0])], 3)
        assert doubled == basis
        for v in vecs:
            assert la.lattice_contains(basis, v)
