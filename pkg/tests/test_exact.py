from fractions import Fraction

import numpy as np

from geodd import exact


def test_rref_and_rank():
    R, pivots = exact.rref(exact.mat([[1, 2, 3], [2, 4, 6], [0, 0, 1]]))
    assert pivots == [0, 2]
    assert exact.rank(exact.mat([[1, 2], [2, 4]])) == 1


def test_kernel_is_exact_nullspace():
    M = exact.mat([[1, 2, 3], [4, 5, 6]])
    N = exact.kernel(M)
    assert exact.shape(N) == (3, 1)
    prod = exact.matmul(M, N)
    assert all(x == 0 for row in prod for x in row)


def test_colspace_picks_pivot_columns():
    M = exact.mat([[1, 2, 0], [2, 4, 1]])
    C = exact.colspace(M)
    assert exact.shape(C) == (2, 2)
    assert C[0][0] == 1 and C[1][0] == 2


def test_sum_intersect_dimensions():
    B1 = exact.mat([[1, 0], [0, 1], [0, 0]])
    B2 = exact.mat([[0, 0], [1, 0], [0, 1]])
    assert exact.shape(exact.sum_spans(B1, B2))[1] == 3
    inter = exact.intersect_spans(B1, B2)
    assert exact.shape(inter)[1] == 1
    # the intersection is the middle axis
    v = [inter[i][0] for i in range(3)]
    assert v[0] == 0 and v[2] == 0 and v[1] != 0


def test_preimage_span():
    M = exact.mat([[1, 0], [0, 1]])
    B = exact.mat([[1], [1]])
    P = exact.preimage_span(M, B)
    assert exact.shape(P)[1] == 1
    assert P[0][0] == P[1][0]


def test_det_and_solve_affine():
    assert exact.det(exact.mat([[1, 2], [3, 4]])) == Fraction(-2)
    A = exact.mat([[1, 1, 0], [0, 0, 1]])
    sol = exact.solve_affine(A, [Fraction(2), Fraction(5)])
    assert sol is not None
    x0, null = sol
    assert x0[0] + x0[1] == 2 and x0[2] == 5
    assert exact.shape(null)[1] == 1
    inconsistent = exact.solve_affine(exact.mat([[1, 1], [1, 1]]),
                                      [Fraction(0), Fraction(1)])
    assert inconsistent is None


def test_grid_points_are_distinct():
    pts = exact.grid_points(5)
    assert pts == [Fraction(0), Fraction(1), Fraction(-1), Fraction(2), Fraction(-2)]
    assert len(set(pts)) == 5


def test_vstar_sstar_on_scalar_channel_plant(scalar_channel_plant):
    V = exact.vstar_span(
        exact.from_array(scalar_channel_plant.A), exact.from_array(scalar_channel_plant.B),
        exact.from_array(scalar_channel_plant.E), exact.from_array(scalar_channel_plant.D_z))
    assert exact.shape(V)[1] == 1
    assert V[1][0] == 0  # spanned by the first axis
    S = exact.sstar_span(
        exact.from_array(scalar_channel_plant.A), exact.from_array(scalar_channel_plant.H),
        exact.from_array(scalar_channel_plant.C), exact.from_array(scalar_channel_plant.G_y))
    assert exact.shape(S)[1] == 0


def test_clear_denominators_preserves_span():
    B = [[Fraction(1, 2)], [Fraction(1, 3)]]
    C = exact.clear_denominators(B)
    assert all(x.denominator == 1 for row in C for x in row)
    assert exact.equal_span(B, C)


def test_affine_family_reproduces_hand_solution(singular_family_plant):
    # bottom-row constraints force k11 = -1, k12 = 0, leaving two freedoms
    Atil = np.block([[singular_family_plant.A, singular_family_plant.H], [singular_family_plant.E, singular_family_plant.G_z]])
    Btil = np.vstack([singular_family_plant.B, singular_family_plant.D_z])
    Ctil = np.hstack([singular_family_plant.C, singular_family_plant.G_y])
    S = exact.mat([[1], [-1], [1]])
    V = exact.eye(3)
    Tb = exact.vstack(exact.hstack(S, exact.zeros(3, 2)),
                      exact.hstack(exact.zeros(2, 1), exact.eye(2)))
    Vext = exact.vstack(V, exact.zeros(1, 3))
    N = exact.transpose(exact.kernel(exact.transpose(Vext)))
    fam = exact.affine_k_family(
        exact.from_array(Atil), exact.from_array(Btil),
        exact.from_array(Ctil), Tb, N)
    assert fam is not None
    assert fam.K0[0][0] == -1 and fam.K0[0][1] == 0
    assert len(fam.directions) == 2
    # and the determinant vanishes identically on that family
    Dy = exact.from_array(singular_family_plant.D_y)
    assert exact.det_grid_scan(fam, Dy, 4) is None


def test_det_grid_scan_finds_witness():
    fam = exact.ExactAffineFamily(exact.eye(2), [exact.eye(2)])
    Dy = exact.eye(2)
    witness = exact.det_grid_scan(fam, Dy, 4)
    assert witness is not None
