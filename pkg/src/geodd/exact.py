"""Exact rational linear algebra over Fraction entries.

Mirrors the floating subspace operations so tests can replay every
computation without roundoff, and supplies the exact determinant grid used
to confirm that a feedback family is singular everywhere. Spans are plain
column matrices (lists of rows of Fractions), not orthonormal bases.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

import numpy as np

RatMat = list  # list of rows, each a list of Fraction


def fr(x) -> Fraction:
    """Exact conversion; floats are dyadic so this never rounds."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


def mat(rows) -> RatMat:
    return [[fr(x) for x in row] for row in rows]


def from_array(A) -> RatMat:
    A = np.atleast_2d(np.asarray(A))
    return [[fr(x) for x in row] for row in A]


def to_array(M: RatMat) -> np.ndarray:
    if not M:
        return np.zeros((0, 0))
    return np.array([[float(x) for x in row] for row in M], dtype=float)


def shape(M: RatMat):
    return (len(M), len(M[0]) if M else 0)


def zeros(r: int, c: int) -> RatMat:
    return [[Fraction(0)] * c for _ in range(r)]


def eye(n: int) -> RatMat:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def transpose(M: RatMat) -> RatMat:
    r, c = shape(M)
    return [[M[i][j] for i in range(r)] for j in range(c)]


def matmul(A: RatMat, B: RatMat) -> RatMat:
    ra, ca = shape(A)
    rb, cb = shape(B)
    if ca != rb:
        raise ValueError(f"shape mismatch {shape(A)} @ {shape(B)}")
    out = zeros(ra, cb)
    for i in range(ra):
        Ai = A[i]
        for k in range(ca):
            a = Ai[k]
            if a == 0:
                continue
            Bk = B[k]
            row = out[i]
            for j in range(cb):
                row[j] += a * Bk[j]
    return out


def madd(A: RatMat, B: RatMat) -> RatMat:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def scale(A: RatMat, s) -> RatMat:
    s = fr(s)
    return [[s * x for x in row] for row in A]


def hstack(*mats: RatMat) -> RatMat:
    mats = [M for M in mats if shape(M)[1] > 0 or shape(M)[0] > 0]
    if not mats:
        return []
    rows = shape(mats[0])[0]
    return [sum((M[i] for M in mats), []) for i in range(rows)]


def vstack(*mats: RatMat) -> RatMat:
    out = []
    for M in mats:
        out.extend([row[:] for row in M])
    return out


def rref(M: RatMat):
    """Reduced row echelon form; returns (R, pivot_columns)."""
    R = [row[:] for row in M]
    nrows, ncols = shape(R)
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if R[i][c] != 0), None)
        if pivot is None:
            continue
        R[r], R[pivot] = R[pivot], R[r]
        pv = R[r][c]
        R[r] = [x / pv for x in R[r]]
        for i in range(nrows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return R, pivots


def rank(M: RatMat) -> int:
    return len(rref(M)[1])


def kernel(M: RatMat) -> RatMat:
    """Columns span the exact null space of M."""
    nrows, ncols = shape(M)
    if ncols == 0:
        return []
    R, pivots = rref(M)
    free = [c for c in range(ncols) if c not in pivots]
    basis = zeros(ncols, len(free))
    for k, fc in enumerate(free):
        basis[fc][k] = Fraction(1)
        for r, pc in enumerate(pivots):
            basis[pc][k] = -R[r][fc]
    return basis


def colspace(M: RatMat) -> RatMat:
    """Independent columns of M (original columns at the RREF pivots)."""
    nrows, ncols = shape(M)
    if ncols == 0:
        return zeros(nrows, 0)
    _, pivots = rref(M)
    return [[M[i][c] for c in pivots] for i in range(nrows)]


def sum_spans(B1: RatMat, B2: RatMat) -> RatMat:
    return colspace(hstack(B1, B2))


def intersect_spans(B1: RatMat, B2: RatMat) -> RatMat:
    """Solve B1 c1 = B2 c2; the common vectors span the intersection."""
    n, k1 = shape(B1)
    _, k2 = shape(B2)
    if k1 == 0 or k2 == 0:
        return zeros(n, 0)
    stacked = hstack(B1, scale(B2, -1))
    null = kernel(stacked)
    c1 = [row[:] for row in null[:k1]] if null else zeros(k1, 0)
    return colspace(matmul(B1, c1))


def contains_span(outer: RatMat, inner: RatMat) -> bool:
    _, ki = shape(inner)
    if ki == 0:
        return True
    return rank(outer) == rank(hstack(outer, inner))


def equal_span(B1: RatMat, B2: RatMat) -> bool:
    return contains_span(B1, B2) and contains_span(B2, B1)


def preimage_span(M: RatMat, B: RatMat) -> RatMat:
    """{x : M x in span(B)} as a column span."""
    rm, cm = shape(M)
    _, kb = shape(B)
    if kb == 0:
        return kernel(M)
    null = kernel(hstack(M, scale(B, -1)))
    top = [row[:] for row in null[:cm]] if null else zeros(cm, 0)
    return colspace(top)


def image_span(M: RatMat, B: RatMat) -> RatMat:
    return colspace(matmul(M, B))


def invariant_hull_smallest(A: RatMat, B: RatMat) -> RatMat:
    n, _ = shape(A)
    current = colspace(B)
    for _ in range(n + 1):
        grown = sum_spans(current, image_span(A, current))
        if shape(grown)[1] == shape(current)[1]:
            return current
        current = grown
    return current


def _embed_top(B: RatMat, extra_rows: int) -> RatMat:
    n, k = shape(B)
    return vstack(B, zeros(extra_rows, k))


def vstar_span(A: RatMat, B: RatMat, C: RatMat, D: RatMat) -> RatMat:
    """Largest output-nulling subspace, by the exact shrinking recursion."""
    n = shape(A)[0]
    p = shape(C)[0]
    MT = vstack(A, C)
    BD = vstack(B, D)
    V = eye(n)
    for _ in range(n + 1):
        target = sum_spans(_embed_top(V, p), BD)
        Vnext = preimage_span(MT, target)
        if shape(Vnext)[1] == shape(V)[1]:
            return V
        V = Vnext
    return V


def sstar_span(A: RatMat, B: RatMat, C: RatMat, D: RatMat) -> RatMat:
    """Smallest input-containing subspace, by the exact growing recursion."""
    n = shape(A)[0]
    m = shape(B)[1]
    AB = hstack(A, B)
    CD = hstack(C, D)
    S = zeros(n, 0)
    for _ in range(n + 1):
        lifted = hstack(_embed_top(S, m), vstack(zeros(n, m), eye(m)))
        inter = intersect_spans(lifted, kernel(CD)) if shape(CD)[0] else lifted
        Snext = image_span(AB, inter)
        Snext = sum_spans(S, Snext)
        if shape(Snext)[1] == shape(S)[1]:
            return S
        S = Snext
    return S


def rstar_qstar_span(A, B, C, D):
    V = vstar_span(A, B, C, D)
    S = sstar_span(A, B, C, D)
    return intersect_spans(V, S), sum_spans(V, S)


def det(M: RatMat) -> Fraction:
    n, c = shape(M)
    if n != c:
        raise ValueError("determinant of a non-square matrix")
    R = [row[:] for row in M]
    out = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if R[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            R[col], R[pivot] = R[pivot], R[col]
            out = -out
        pv = R[col][col]
        out *= pv
        for i in range(col + 1, n):
            if R[i][col] != 0:
                f = R[i][col] / pv
                R[i] = [x - f * y for x, y in zip(R[i], R[col])]
    return out


def solve_affine(A: RatMat, b: list):
    """All solutions of A x = b: (particular, nullspace columns) or None."""
    nrows, ncols = shape(A)
    aug = [row[:] + [fr(v)] for row, v in zip(A, b)]
    R, pivots = rref(aug)
    if ncols in pivots:
        return None
    x0 = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        x0[pc] = R[r][ncols]
    return x0, kernel(A)


def clear_denominators(B: RatMat) -> RatMat:
    """Scale each column to the smallest integer entries with the same span."""
    n, k = shape(B)
    out = zeros(n, k)
    for j in range(k):
        mult = lcm(*[B[i][j].denominator for i in range(n)]) if n else 1
        col = [B[i][j] * mult for i in range(n)]
        shrink = gcd(*[int(x) for x in col]) if any(col) else 1
        for i in range(n):
            out[i][j] = col[i] / shrink
    return out


class ExactAffineFamily:
    """Affine set {K0 + sum theta_i K_i} with exact rational entries."""

    def __init__(self, K0: RatMat, directions: list[RatMat]):
        self.K0 = K0
        self.directions = directions

    def member(self, thetas) -> RatMat:
        K = [row[:] for row in self.K0]
        for th, D in zip(thetas, self.directions):
            K = madd(K, scale(D, fr(th)))
        return K


def affine_k_family(Atil: RatMat, Btil: RatMat, Ctil: RatMat,
                    Tb: RatMat, N: RatMat):
    """Exact solution set of N (Atil + Btil K Ctil) Tb = 0 in K.

    N spans the left annihilator of the target subspace; Tb spans the
    constrained domain. Returns ExactAffineFamily or None when infeasible.
    """
    m = shape(Btil)[1]
    p = shape(Ctil)[0]
    a = shape(N)[0]
    t = shape(Tb)[1]
    if a == 0 or t == 0:
        # no constraint rows: every K works
        dirs = []
        for be in range(p):
            for al in range(m):
                D = zeros(m, p)
                D[al][be] = Fraction(1)
                dirs.append(D)
        return ExactAffineFamily(zeros(m, p), dirs)
    Y = matmul(N, Btil)               # a x m
    X = matmul(Ctil, Tb)              # p x t
    Rm = matmul(matmul(N, Atil), Tb)  # a x t
    if m * p == 0:
        if any(x != 0 for row in Rm for x in row):
            return None
        return ExactAffineFamily(zeros(m, p), [])
    # Row (i, j) of the operator: sum_ab Y[i,a] K[a,b] X[b,j] = -Rm[i,j]
    rows = []
    rhs = []
    for j in range(t):
        for i in range(a):
            row = [Fraction(0)] * (m * p)
            for al in range(m):
                if Y[i][al] == 0:
                    continue
                for be in range(p):
                    row[al + m * be] = Y[i][al] * X[be][j]
            rows.append(row)
            rhs.append(-Rm[i][j])
    sol = solve_affine(rows, rhs)
    if sol is None:
        return None
    x0, nullb = sol
    K0 = [[x0[al + m * be] for be in range(p)] for al in range(m)]
    _, nd = shape(nullb)
    dirs = [[[nullb[al + m * be][k] for be in range(p)] for al in range(m)]
            for k in range(nd)]
    return ExactAffineFamily(K0, dirs)


def grid_points(count: int) -> list[Fraction]:
    """0, 1, -1, 2, -2, ... as exact rationals."""
    pts = [Fraction(0)]
    step = 1
    while len(pts) < count:
        pts.append(Fraction(step))
        if len(pts) < count:
            pts.append(Fraction(-step))
        step += 1
    return pts[:count]


def det_grid_scan(family: ExactAffineFamily, Dy: RatMat,
                  points_per_var: int):
    """Scan det(I + K Dy) over a rational grid of the affine family.

    Returns a theta tuple where the determinant is nonzero, or None when it
    vanishes at every grid point. With points_per_var exceeding the
    per-variable degree of the determinant polynomial, an all-zero grid
    proves the determinant vanishes identically on the affine set.
    """
    m = shape(family.K0)[0]
    ndirs = len(family.directions)
    pts = grid_points(points_per_var)
    idx = [0] * ndirs

    while True:
        theta = [pts[i] for i in idx]
        K = family.member(theta)
        M = madd(eye(m), matmul(K, Dy))
        if det(M) != 0:
            return theta
        pos = 0
        while pos < ndirs:
            idx[pos] += 1
            if idx[pos] < points_per_var:
                break
            idx[pos] = 0
            pos += 1
        if ndirs == 0 or pos == ndirs:
            return None
