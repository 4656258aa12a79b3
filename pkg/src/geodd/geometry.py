"""Geometric machinery for a quadruple (A, B, C, D).

Supremal output-nulling and infimal input-containing subspaces, their
friends, reachability/detectability subspaces, fixed spectra, invariant
zeros, stabilizability variants, and the self-bounded/self-hidden
predicates. Dual objects are computed through the transposed quadruple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .errors import (
    DimensionMismatch,
    FixedSpectrumOutsideRegion,
    InvalidInput,
    NotInvariant,
    NotStabilizablePair,
)
from .subspaces import (
    DEFAULT_TOL,
    StabilityRegion,
    Subspace,
    ToleranceProfile,
    combine,
    complement,
    contains,
    embed,
    image_under,
    invariant_hull,
    kernel_of,
    modal_subspace,
    preimage,
    span_of,
)

OUTPUT_NULLING = "output_nulling"
INPUT_CONTAINING = "input_containing"

# Numerical guard against eigenvalues hugging the region boundary: fixed
# spectra this close are treated as violating, and placement is not
# skipped for blocks this close to instability.
REGION_GUARD = 1e-8
SKIP_GUARD = 1e-6


@dataclass(frozen=True)
class Quadruple:
    """State-space quadruple with direct feedthrough."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch("A must be square")
        if B.shape[0] != n:
            raise DimensionMismatch("B row count must match A")
        if C.shape[1] != n:
            raise DimensionMismatch("C column count must match A")
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatch("D must be p x m")
        for name, M in (("A", A), ("B", B), ("C", C), ("D", D)):
            if M.size and not np.isfinite(M).all():
                raise InvalidInput(f"{name} contains non-finite entries")
        for name, M in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, M)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def dual(self) -> "Quadruple":
        return Quadruple(self.A.T, self.C.T, self.B.T, self.D.T)


@dataclass(frozen=True)
class FriendCertificate:
    """A feedback (m x n) or injection (n x p) matrix together with the
    residual of the invariance relation it witnesses."""

    F_or_G: np.ndarray
    kind: str
    residual: float

    @property
    def matrix(self) -> np.ndarray:
        return self.F_or_G


@dataclass(frozen=True)
class SpectralReport:
    """Fixed and assignable spectra attached to an invariant subspace."""

    internal_fixed: tuple
    external_fixed: tuple
    assignable_dims: tuple


def _stacked_output(q: Quadruple) -> np.ndarray:
    return np.vstack([q.A, q.C])


def _bd(q: Quadruple) -> np.ndarray:
    return np.vstack([q.B, q.D])


def output_nulling_residual(V: Subspace, q: Quadruple,
                            tol: ToleranceProfile = DEFAULT_TOL) -> float:
    """Residual of [A; C] V <= (V + 0_Y) + im [B; D]; zero iff output nulling."""
    if V.is_trivial:
        return 0.0
    target = combine("sum", embed(V, q.n + q.p), span_of(_bd(q), tol), tol)
    mapped = _stacked_output(q) @ V.basis
    resid = mapped - target.basis @ (target.basis.T @ mapped)
    return float(np.linalg.norm(resid, 2))


def input_containing_residual(S: Subspace, q: Quadruple,
                              tol: ToleranceProfile = DEFAULT_TOL) -> float:
    """Residual of [A B] ((S + U) ^ ker [C D]) <= S; zero iff input containing."""
    lifted = np.zeros((q.n + q.m, S.dim + q.m))
    lifted[: q.n, : S.dim] = S.basis
    lifted[q.n :, S.dim :] = np.eye(q.m)
    dom = combine(
        "intersect",
        span_of(lifted, tol),
        kernel_of(np.hstack([q.C, q.D]), tol),
        tol,
    )
    mapped = np.hstack([q.A, q.B]) @ dom.basis
    resid = mapped - S.basis @ (S.basis.T @ mapped)
    return float(np.linalg.norm(resid, 2) if resid.size else 0.0)


def vstar(q: Quadruple, tol: ToleranceProfile = DEFAULT_TOL,
          return_sequence: bool = False):
    """Largest output-nulling subspace via the non-increasing recursion."""
    V = Subspace.full(q.n)
    seq = [V]
    MT = _stacked_output(q)
    BD = span_of(_bd(q), tol)
    for _ in range(q.n + 1):
        target = combine("sum", embed(V, q.n + q.p), BD, tol)
        Vnext = preimage(MT, target, tol)
        seq.append(Vnext)
        if Vnext.dim == V.dim:
            break
        V = Vnext
    else:
        V = seq[-1]
    result = seq[-1]
    return (result, seq) if return_sequence else result


def sstar(q: Quadruple, tol: ToleranceProfile = DEFAULT_TOL,
          return_sequence: bool = False):
    """Smallest input-containing subspace via the non-decreasing recursion."""
    S = Subspace.trivial(q.n)
    seq = [S]
    AB = np.hstack([q.A, q.B])
    ker_cd = kernel_of(np.hstack([q.C, q.D]), tol)
    for _ in range(q.n + 1):
        lifted = np.zeros((q.n + q.m, S.dim + q.m))
        lifted[: q.n, : S.dim] = S.basis
        lifted[q.n :, S.dim :] = np.eye(q.m)
        dom = combine("intersect", span_of(lifted, tol), ker_cd, tol)
        Snext = span_of(AB @ dom.basis, tol, scale=float(np.linalg.norm(AB, 2)))
        seq.append(Snext)
        if Snext.dim == S.dim:
            break
        S = Snext
    result = seq[-1]
    return (result, seq) if return_sequence else result


def rstar_qstar(q: Quadruple, tol: ToleranceProfile = DEFAULT_TOL):
    """(R*, Q*) = (V* ^ S*, V* + S*)."""
    V = vstar(q, tol)
    S = sstar(q, tol)
    return combine("intersect", V, S, tol), combine("sum", V, S, tol)


def friend(kind: str, V_or_S: Subspace, q: Quadruple,
           tol: ToleranceProfile = DEFAULT_TOL) -> FriendCertificate:
    """Feedback F with [A+BF; C+DF] V <= V + 0, or the dual injection G.

    The friend is solved column-by-column over a basis of the subspace by
    least squares and extended by zero on the orthogonal complement.
    """
    if kind == OUTPUT_NULLING:
        V = V_or_S
        if V.ambient_dim != q.n:
            raise DimensionMismatch("subspace must live in the state space")
        memb = output_nulling_residual(V, q, tol)
        if memb > tol.residual:
            raise NotInvariant("subspace is not output nulling", residual=memb)
        if V.is_trivial:
            return FriendCertificate(np.zeros((q.m, q.n)), kind, 0.0)
        Vb = V.basis
        # [A; C] v = [V; 0] x + [B; D] w, one column per basis vector.
        sys_mat = np.hstack([np.vstack([Vb, np.zeros((q.p, V.dim))]), _bd(q)])
        rhs = _stacked_output(q) @ Vb
        sol, *_ = np.linalg.lstsq(sys_mat, rhs, rcond=None)
        W = sol[V.dim :, :]
        F = -W @ Vb.T
        resid = friend_residual(F, V, q)
        if resid > tol.residual:
            raise NotInvariant("no exact friend found", residual=resid)
        return FriendCertificate(F, kind, resid)
    if kind == INPUT_CONTAINING:
        S = V_or_S
        if S.ambient_dim != q.n:
            raise DimensionMismatch("subspace must live in the state space")
        memb = input_containing_residual(S, q, tol)
        if memb > tol.residual:
            raise NotInvariant("subspace is not input containing", residual=memb)
        dual_cert = friend(OUTPUT_NULLING, complement(S, tol), q.dual(), tol)
        G = dual_cert.F_or_G.T
        resid = injection_residual(G, S, q)
        if resid > tol.residual:
            raise NotInvariant("no exact injection friend found", residual=resid)
        return FriendCertificate(G, kind, resid)
    raise InvalidInput(f"unknown friend kind {kind!r}")


def friend_residual(F: np.ndarray, V: Subspace, q: Quadruple) -> float:
    """Norm of [A+BF; C+DF] V outside V + 0_Y."""
    if V.is_trivial:
        return 0.0
    top = (q.A + q.B @ F) @ V.basis
    bot = (q.C + q.D @ F) @ V.basis
    top_out = top - V.basis @ (V.basis.T @ top)
    return float(np.linalg.norm(np.vstack([top_out, bot]), 2))


def injection_residual(G: np.ndarray, S: Subspace, q: Quadruple) -> float:
    """Norm of [(A+GC) S, B+GD] outside S."""
    P = np.eye(q.n) - S.projector()
    blocks = [P @ (q.B + G @ q.D)]
    if not S.is_trivial:
        blocks.insert(0, P @ (q.A + G @ q.C) @ S.basis)
    return float(np.linalg.norm(np.hstack(blocks), 2))


def reach_detect(kind: str, V_or_S: Subspace, cert: FriendCertificate,
                 q: Quadruple, tol: ToleranceProfile = DEFAULT_TOL) -> Subspace:
    """Reachability subspace on an output-nulling V, or the detectability
    subspace attached to an input-containing S."""
    if kind == OUTPUT_NULLING:
        F = cert.F_or_G
        r = friend_residual(F, V_or_S, q)
        if r > 10 * tol.residual:
            raise NotInvariant("friend does not fit the subspace", residual=r)
        seed = combine(
            "intersect", V_or_S, image_under(q.B, kernel_of(q.D, tol), tol), tol
        )
        return invariant_hull("smallest_containing", q.A + q.B @ F, seed, tol)
    if kind == INPUT_CONTAINING:
        G = cert.F_or_G
        r = injection_residual(G, V_or_S, q)
        if r > 10 * tol.residual:
            raise NotInvariant("injection does not fit the subspace", residual=r)
        ceiling = combine("sum", V_or_S, preimage(q.C, span_of(q.D, tol), tol), tol)
        return invariant_hull("largest_contained", q.A + G @ q.C, ceiling, tol)
    raise InvalidInput(f"unknown kind {kind!r}")


def self_predicate(kind: str, X: Subspace, q: Quadruple,
                   tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    """Self-bounded (R* <= X) or self-hidden (X <= Q*) test."""
    R, Q = rstar_qstar(q, tol)
    if kind == "bounded":
        r = output_nulling_residual(X, q, tol)
        if r > tol.residual:
            raise NotInvariant("subspace is not output nulling", residual=r)
        return contains(X, R, tol)
    if kind == "hidden":
        r = input_containing_residual(X, q, tol)
        if r > tol.residual:
            raise NotInvariant("subspace is not input containing", residual=r)
        return contains(Q, X, tol)
    raise InvalidInput(f"unknown predicate kind {kind!r}")


def _extend_within(inner: Subspace, outer: Subspace,
                   tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns extending a basis of `inner` to one of `outer`."""
    proj_out = outer.basis - inner.basis @ (inner.basis.T @ outer.basis)
    return span_of(proj_out, tol, scale=1.0).basis


def _placement_targets(k: int, region: StabilityRegion, slot: int) -> np.ndarray:
    """Reproducible distinct real targets strictly inside the region.

    Different slots (internal/external x feedback/injection) use disjoint
    target families so the closed loop never collects high-multiplicity
    eigenvalues, which eigensolvers resolve poorly.
    """
    if region.kind == "continuous":
        # feedback slots (0, 1) near -1, injection slots (2, 3) near -3
        base = -1.0 - region.margin - 0.25 * (slot % 2) - 2.0 * (slot // 2)
        return base + np.arange(k) * -0.5
    # Discrete: feedback targets positive, injection targets negative, so
    # the two closed maps never share (or nearly share) eigenvalues, which
    # would wreck the loop matrix's eigenvalue conditioning.
    sign = 1.0 if slot < 2 else -1.0
    r0 = min(0.55 - 0.06 * (slot % 2), (1.0 - region.margin) * 0.6)
    step = min(0.12, (r0 - 0.02) / max(k - 1, 1))
    return sign * (r0 - step * np.arange(k))


def _place_state_feedback(A: np.ndarray, B: np.ndarray,
                          region: StabilityRegion,
                          tol: ToleranceProfile,
                          slot: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Gain F with A + B F stable in the region where possible.

    Returns (F, uncontrollable_eigenvalues); the caller decides whether the
    fixed part violates the region.
    """
    k = A.shape[0]
    if k == 0:
        return np.zeros((B.shape[1], 0)), np.zeros(0, dtype=complex)
    reach = invariant_hull("smallest_containing", A, span_of(B, tol), tol)
    T1 = reach.basis
    T2 = complement(reach, tol).basis
    fixed = np.linalg.eigvals(T2.T @ A @ T2) if T2.shape[1] else np.zeros(0, complex)
    kc = T1.shape[1]
    if kc == 0:
        return np.zeros((B.shape[1], k)), fixed
    Ac = T1.T @ A @ T1
    # Leave a block alone only when it sits safely inside the region.
    if all(region.boundary_distance(l) > SKIP_GUARD for l in np.linalg.eigvals(Ac)):
        return np.zeros((B.shape[1], k)), fixed
    Bc = T1.T @ B
    # Reduce to full column rank inputs for the placement routine.
    U, s, Vh = np.linalg.svd(Bc, full_matrices=False)
    rb = int(np.sum(s > tol.rank_rel * max(Bc.shape) * (s[0] if s.size else 1.0)))
    Vr = Vh[:rb].T
    Bred = Bc @ Vr
    targets = _placement_targets(kc, region, slot)
    if kc == 1:
        gain = np.atleast_2d((Ac[0, 0] - targets[0]) / Bred[0, 0])
    else:
        gain = scipy.signal.place_poles(Ac, Bred, targets).gain_matrix
    F = -Vr @ gain @ T1.T
    return F, fixed


def stabilizing_friend(V_or_S: Subspace, kind: str, q: Quadruple,
                       region: StabilityRegion,
                       tol: ToleranceProfile = DEFAULT_TOL,
                       slots: tuple = (0, 1)) -> FriendCertificate:
    """Friend whose closed map A+BF (dually A+GC) is stable in the region.

    Assignable spectra on the reachability part and on the quotient are
    placed at reproducible targets (the two slots pick the internal and
    external target families); fails if a fixed spectrum violates the
    region, or if the pair itself is not stabilizable.
    """
    if kind == INPUT_CONTAINING:
        dual_cert = stabilizing_friend(
            complement(V_or_S, tol), OUTPUT_NULLING, q.dual(), region, tol,
            slots=(2, 3) if slots == (0, 1) else slots,
        )
        G = dual_cert.F_or_G.T
        resid = injection_residual(G, V_or_S, q)
        if resid > tol.residual:
            raise NotInvariant("stabilizing injection lost invariance", residual=resid)
        return FriendCertificate(G, kind, resid)
    if kind != OUTPUT_NULLING:
        raise InvalidInput(f"unknown friend kind {kind!r}")

    V = V_or_S
    _, pair_fixed = _place_state_feedback(q.A, q.B, region, tol)
    bad = [l for l in pair_fixed if region.boundary_distance(l) <= REGION_GUARD]
    if bad:
        raise NotStabilizablePair(
            f"pair (A, B) has unstabilizable modes {np.round(bad, 6)}"
        )
    base = friend(OUTPUT_NULLING, V, q, tol)
    F = base.F_or_G.copy()

    # Internal loop shaping: extra feedback through inputs that keep V and
    # null the output, i.e. u in B^{-1} V ^ ker D.
    if not V.is_trivial:
        Pv = np.eye(q.n) - V.projector()
        Uv = kernel_of(np.vstack([Pv @ q.B, q.D]), tol).basis
        if Uv.shape[1]:
            Av = V.basis.T @ (q.A + q.B @ F) @ V.basis
            Bv = V.basis.T @ q.B @ Uv
            dF, fixed_int = _place_state_feedback(Av, Bv, region, tol, slot=slots[0])
            bad = [l for l in fixed_int if region.boundary_distance(l) <= REGION_GUARD]
            if bad:
                raise FixedSpectrumOutsideRegion(
                    "fixed internal spectrum outside the region", bad
                )
            F = F + Uv @ dF @ V.basis.T
        else:
            fixed_int = np.linalg.eigvals(V.basis.T @ (q.A + q.B @ F) @ V.basis)
            bad = [l for l in fixed_int if region.boundary_distance(l) <= REGION_GUARD]
            if bad:
                raise FixedSpectrumOutsideRegion(
                    "fixed internal spectrum outside the region", bad
                )

    # External loop shaping on the quotient by V; feedback vanishing on V
    # preserves friendship.
    W = complement(V, tol).basis
    if W.shape[1]:
        Aq = W.T @ (q.A + q.B @ F) @ W
        Bq = W.T @ q.B
        dF2, fixed_ext = _place_state_feedback(Aq, Bq, region, tol, slot=slots[1])
        bad = [l for l in fixed_ext if region.boundary_distance(l) <= REGION_GUARD]
        if bad:
            raise FixedSpectrumOutsideRegion(
                "fixed external spectrum outside the region", bad
            )
        F = F + dF2 @ W.T

    resid = friend_residual(F, V, q)
    if resid > 100 * tol.residual:
        raise NotInvariant("stabilizing friend lost invariance", residual=resid)
    closed = np.linalg.eigvals(q.A + q.B @ F)
    bad = [l for l in closed if region.boundary_distance(l) <= REGION_GUARD]
    if bad:
        raise FixedSpectrumOutsideRegion(
            "closed map spectrum escaped the region", bad
        )
    return FriendCertificate(F, kind, resid)


def spectral_report(V_or_S: Subspace, kind: str, q: Quadruple,
                    cert: FriendCertificate | None = None,
                    tol: ToleranceProfile = DEFAULT_TOL) -> SpectralReport:
    """Fixed/assignable split of the spectrum attached to an invariant
    subspace, computed in adapted orthonormal coordinates."""
    if kind == OUTPUT_NULLING:
        V = V_or_S
        if cert is None:
            cert = friend(OUTPUT_NULLING, V, q, tol)
        F = cert.F_or_G
        Acl = q.A + q.B @ F
        RV = reach_detect(OUTPUT_NULLING, V, cert, q, tol)
        reach = invariant_hull("smallest_containing", Acl, span_of(q.B, tol), tol)
        VR = combine("sum", V, reach, tol)
        T2 = _extend_within(RV, V, tol)
        internal = np.linalg.eigvals(T2.T @ Acl @ T2) if T2.shape[1] else np.zeros(0, complex)
        T4 = complement(VR, tol).basis
        external = np.linalg.eigvals(T4.T @ Acl @ T4) if T4.shape[1] else np.zeros(0, complex)
        dims = (RV.dim, VR.dim - V.dim)
        return SpectralReport(tuple(internal), tuple(external), dims)
    if kind == INPUT_CONTAINING:
        S = V_or_S
        if cert is None:
            cert = friend(INPUT_CONTAINING, S, q, tol)
        G = cert.F_or_G
        Acl = q.A + G @ q.C
        QS = reach_detect(INPUT_CONTAINING, S, cert, q, tol)
        unobs = invariant_hull("largest_contained", Acl, kernel_of(q.C, tol), tol)
        SQ = combine("intersect", S, unobs, tol)
        T1 = SQ.basis
        internal = np.linalg.eigvals(T1.T @ Acl @ T1) if T1.shape[1] else np.zeros(0, complex)
        T3 = _extend_within(S, QS, tol)
        external = np.linalg.eigvals(T3.T @ Acl @ T3) if T3.shape[1] else np.zeros(0, complex)
        dims = (S.dim - SQ.dim, q.n - QS.dim)
        return SpectralReport(tuple(internal), tuple(external), dims)
    raise InvalidInput(f"unknown kind {kind!r}")


def invariant_zeros(q: Quadruple, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Spectrum induced on V*/R* by any friend of V*."""
    V = vstar(q, tol)
    S = sstar(q, tol)
    R = combine("intersect", V, S, tol)
    if V.dim == R.dim:
        return np.zeros(0, dtype=complex)
    F = friend(OUTPUT_NULLING, V, q, tol).F_or_G
    T2 = _extend_within(R, V, tol)
    return np.linalg.eigvals(T2.T @ (q.A + q.B @ F) @ T2)


def vstar_g(q: Quadruple, region: StabilityRegion,
            tol: ToleranceProfile = DEFAULT_TOL) -> Subspace:
    """Largest stabilizability output-nulling subspace: R* plus the stable
    modal part of the map induced on V*/R*."""
    V = vstar(q, tol)
    S = sstar(q, tol)
    R = combine("intersect", V, S, tol)
    if V.dim == R.dim:
        return R
    F = friend(OUTPUT_NULLING, V, q, tol).F_or_G
    T2 = _extend_within(R, V, tol)
    M = T2.T @ (q.A + q.B @ F) @ T2
    stable_part = modal_subspace(M, region, tol)
    lifted = span_of(T2 @ stable_part.basis, tol)
    return combine("sum", R, lifted, tol)


def sstar_g(q: Quadruple, region: StabilityRegion,
            tol: ToleranceProfile = DEFAULT_TOL) -> Subspace:
    """Smallest detectability input-containing subspace, by duality."""
    return complement(vstar_g(q.dual(), region, tol), tol)


def region_stabilizable(A, B, region: StabilityRegion,
                        tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    """All uncontrollable modes of (A, B) strictly inside the region."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    reach = invariant_hull("smallest_containing", A, span_of(B, tol), tol)
    T2 = complement(reach, tol).basis
    if T2.shape[1] == 0:
        return True
    eigs = np.linalg.eigvals(T2.T @ A @ T2)
    return all(region.boundary_distance(l) > REGION_GUARD for l in eigs)


def region_detectable(C, A, region: StabilityRegion,
                      tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    return region_stabilizable(A.T, C.T, region, tol)


def match_spectra(left, right, tol_match: float = 1e-6) -> bool:
    """Multiset equality of two spectra under optimal assignment."""
    left = np.sort_complex(np.asarray(left, dtype=complex))
    right = np.sort_complex(np.asarray(right, dtype=complex))
    if left.shape != right.shape:
        return False
    if left.size == 0:
        return True
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(left[:, None] - right[None, :])
    rows, cols = linear_sum_assignment(cost)
    return bool(cost[rows, cols].max() <= tol_match)
