"""Solvers for the two decoupling problems.

Condition analysis, the affine family of static output-feedback parameters
K, well-posedness selection (with an exact rational fallback certificate),
compensator construction, and closed-loop assembly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exact
from .errors import (
    AllSingular,
    CertificateFailed,
    DimensionMismatch,
    Infeasible,
    NoSolution,
    NotWellPosed,
    WellPosednessObstruction,
    WellPosednessViolated,
)
from .geometry import (
    INPUT_CONTAINING,
    OUTPUT_NULLING,
    REGION_GUARD,
    friend,
    region_detectable,
    region_stabilizable,
    spectral_report,
    sstar,
    sstar_g,
    stabilizing_friend,
    vstar,
    vstar_g,
)
from .lattice import (
    PlantSystem,
    disturbance_image_condition,
    disturbance_kernel_condition,
    vm_sM,
)
from .subspaces import (
    DEFAULT_TOL,
    Subspace,
    ToleranceProfile,
    combine,
    containment_residual,
    kernel_of,
    span_of,
)

# Well-posedness margin: |det(I + K D_y)| >= DELTA_WP * (1 + ||K D_y||).
DELTA_WP = 1e-8


@dataclass(frozen=True)
class Compensator:
    """Dynamic output-feedback regulator (A_c, B_c, C_c, D_c)."""

    A_c: np.ndarray
    B_c: np.ndarray
    C_c: np.ndarray
    D_c: np.ndarray

    def __post_init__(self):
        Ac = np.atleast_2d(np.asarray(self.A_c, dtype=float))
        Bc = np.atleast_2d(np.asarray(self.B_c, dtype=float))
        Cc = np.atleast_2d(np.asarray(self.C_c, dtype=float))
        Dc = np.atleast_2d(np.asarray(self.D_c, dtype=float))
        s = Ac.shape[0]
        if Ac.shape != (s, s) or Bc.shape[0] != s or Cc.shape[1] != s:
            raise DimensionMismatch("inconsistent compensator dimensions")
        if Dc.shape != (Cc.shape[0], Bc.shape[1]):
            raise DimensionMismatch("D_c must be m x p")
        for name, M in (("A_c", Ac), ("B_c", Bc), ("C_c", Cc), ("D_c", Dc)):
            object.__setattr__(self, name, M)

    @property
    def order(self) -> int:
        return self.A_c.shape[0]


@dataclass(frozen=True)
class ClosedLoop:
    """Assembled loop Dx^ = A^ x^ + H^ w, z = C^ x^ + G^ w."""

    A_hat: np.ndarray
    H_hat: np.ndarray
    C_hat: np.ndarray
    G_hat: np.ndarray
    W: np.ndarray
    time_domain: str
    plant_order: int

    @property
    def order(self) -> int:
        return self.A_hat.shape[0]


@dataclass(frozen=True)
class AffineKFamily:
    """Affine set {K0 + sum theta_i K_i} of feedback parameters.

    Directions are orthonormal as vectors. An exact rational twin of the
    family (when the defining data was rational) rides along for the
    identically-singular certificate.
    """

    K0: np.ndarray
    directions: tuple
    exact_family: object = field(default=None, repr=False, compare=False)
    exact_Dy: object = field(default=None, repr=False, compare=False)

    @property
    def shape(self):
        return self.K0.shape

    @property
    def n_directions(self) -> int:
        return len(self.directions)

    def member(self, thetas) -> np.ndarray:
        K = self.K0.copy()
        for th, D in zip(thetas, self.directions):
            K = K + th * D
        return K

    def distance(self, K) -> float:
        """Euclidean distance from K to the affine set."""
        v = (np.atleast_2d(K) - self.K0).flatten(order="F")
        for D in self.directions:
            d = D.flatten(order="F")
            v = v - d * (d @ v)
        return float(np.linalg.norm(v))


@dataclass(frozen=True)
class ConditionCheck:
    label: str
    passed: bool | None
    residual: float
    note: str = ""


@dataclass(frozen=True)
class FeasibilityReport:
    problem: str
    conditions: tuple
    V: Subspace | None
    S: Subspace | None
    family: AffineKFamily | None
    K: np.ndarray | None
    overall: str
    extras: dict = field(default_factory=dict)

    def condition(self, label: str) -> ConditionCheck:
        for c in self.conditions:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def solvable(self) -> bool:
        return self.overall == "solvable"

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "overall": self.overall,
            "conditions": {
                c.label: {
                    "passed": c.passed,
                    "residual": None if np.isnan(c.residual) else c.residual,
                    "note": c.note,
                }
                for c in self.conditions
            },
            "K": None if self.K is None else self.K.tolist(),
            "V_dim": None if self.V is None else self.V.dim,
            "S_dim": None if self.S is None else self.S.dim,
            "family_directions": None if self.family is None else self.family.n_directions,
            "extras": self.extras,
        }


def _coupling_data(sys: PlantSystem):
    """The block matrices of the coupling inclusion."""
    Atil = np.block([[sys.A, sys.H], [sys.E, sys.G_z]])
    Btil = np.vstack([sys.B, sys.D_z])
    Ctil = np.hstack([sys.C, sys.G_y])
    return Atil, Btil, Ctil


def _domain_basis(sys: PlantSystem, S: Subspace) -> np.ndarray:
    """Orthonormal basis of S + W inside R^(n+q)."""
    T = np.zeros((sys.n + sys.q, S.dim + sys.q))
    T[: sys.n, : S.dim] = S.basis
    T[sys.n :, S.dim :] = np.eye(sys.q)
    return T


def _target_projector(sys: PlantSystem, V: Subspace) -> np.ndarray:
    """Orthogonal projector onto the complement of V + 0_Z in R^(n+r)."""
    Vext = np.vstack([V.basis, np.zeros((sys.r, V.dim))])
    return np.eye(sys.n + sys.r) - Vext @ Vext.T


def coupling_residual(sys: PlantSystem, V: Subspace, S: Subspace, K) -> float:
    """Residual of the coupling inclusion for a given K:

    [A+BKC  H+BKG_y; E+D_zKC  G_z+D_zKG_y] (S + W) <= V + 0_Z.
    """
    Atil, Btil, Ctil = _coupling_data(sys)
    K = np.atleast_2d(np.asarray(K, dtype=float))
    closed = Atil + Btil @ K @ Ctil
    P = _target_projector(sys, V)
    return float(np.linalg.norm(P @ closed @ _domain_basis(sys, S), 2))


def k_affine_family(sys: PlantSystem, S: Subspace, V: Subspace,
                    tol: ToleranceProfile = DEFAULT_TOL,
                    exact_spans=None) -> AffineKFamily:
    """Every K satisfying the coupling inclusion, as an affine set.

    The inclusion is vectorized into a linear system over the entries of K;
    the particular solution is the minimum-norm one. `exact_spans`, when
    given as a rational (S, V) pair, adds the exact rational twin.
    """
    if S.ambient_dim != sys.n or V.ambient_dim != sys.n:
        raise DimensionMismatch("subspaces must live in the plant state space")
    Atil, Btil, Ctil = _coupling_data(sys)
    Tb = _domain_basis(sys, S)
    P = _target_projector(sys, V)
    Y = P @ Btil
    X = Ctil @ Tb
    rhs = -(P @ Atil @ Tb).flatten(order="F")
    m, p = sys.m, sys.p
    if m * p == 0:
        if np.linalg.norm(rhs) > tol.residual:
            raise NoSolution("coupling inclusion infeasible with empty K")
        return AffineKFamily(np.zeros((m, p)), ())
    Op = np.kron(X.T, Y)
    if Op.shape[0] == 0:
        K0_vec = np.zeros(m * p)
    else:
        K0_vec, *_ = np.linalg.lstsq(Op, rhs, rcond=None)
    if np.linalg.norm(Op @ K0_vec - rhs) > tol.residual * (1 + np.linalg.norm(rhs)):
        raise NoSolution("coupling inclusion has no solution")
    K0 = K0_vec.reshape((m, p), order="F")
    op_scale = float(np.linalg.norm(Btil, 2) * max(np.linalg.norm(X, 2), 1.0))
    null = kernel_of(Op, tol, scale=op_scale)
    dirs = tuple(
        null.basis[:, j].reshape((m, p), order="F") for j in range(null.dim)
    )

    exact_family = None
    exact_Dy = None
    if exact_spans is not None:
        S_rat, V_rat = exact_spans
        Tb_rat = _exact_domain_basis(sys, S_rat)
        N_rat = _exact_left_annihilator(sys, V_rat)
        exact_family = exact.affine_k_family(
            exact.from_array(Atil), exact.from_array(Btil),
            exact.from_array(Ctil), Tb_rat, N_rat,
        )
        exact_Dy = exact.from_array(sys.D_y)
        if exact_family is None:
            raise NoSolution("exact coupling inclusion has no solution")
    return AffineKFamily(K0, dirs, exact_family, exact_Dy)


def _exact_domain_basis(sys: PlantSystem, S_rat):
    n, q = sys.n, sys.q
    k = exact.shape(S_rat)[1]
    top = exact.hstack(S_rat, exact.zeros(n, q))
    bot = exact.hstack(exact.zeros(q, k), exact.eye(q))
    return exact.vstack(top, bot)


def _exact_left_annihilator(sys: PlantSystem, V_rat):
    n, r = sys.n, sys.r
    k = exact.shape(V_rat)[1]
    if k == 0:
        return exact.eye(n + r)
    Vext = exact.vstack(V_rat, exact.zeros(r, k))
    return exact.transpose(exact.kernel(exact.transpose(Vext)))


def wellposedness_margin(K, D_y) -> float:
    """|det(I + K D_y)| normalized by the size of K D_y."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    D_y = np.atleast_2d(np.asarray(D_y, dtype=float))
    KD = K @ D_y
    return float(abs(np.linalg.det(np.eye(K.shape[0]) + KD))
                 / (1.0 + np.linalg.norm(KD)))


def select_wellposed(family: AffineKFamily, D_y, trials: int = 64,
                     seed: int = 0) -> np.ndarray:
    """Deterministic search for a member with I + K D_y safely invertible.

    Order: the particular solution, each single direction at unit step,
    then seeded pseudo-random combinations. When every sample fails and the
    family carries exact rational data, the determinant is evaluated on an
    exact grid: vanishing everywhere proves the obstruction.
    """
    D_y = np.atleast_2d(np.asarray(D_y, dtype=float))

    def well_posed(K):
        return wellposedness_margin(K, D_y) >= DELTA_WP

    candidates = [family.K0]
    for D in family.directions:
        candidates.append(family.K0 + D)
        candidates.append(family.K0 - D)
    for K in candidates:
        if well_posed(K):
            return K
    rng = np.random.default_rng(seed)
    scale = 1.0 + np.linalg.norm(family.K0)
    for _ in range(trials):
        theta = rng.standard_normal(family.n_directions) * scale
        K = family.member(theta)
        if well_posed(K):
            return K

    if family.exact_family is not None:
        m = family.shape[0]
        # Enough points per variable to exceed the determinant's degree.
        points = max(len(family.exact_family.directions) + 2, m + 1)
        witness = exact.det_grid_scan(family.exact_family, family.exact_Dy, points)
        if witness is None:
            raise AllSingular(
                "det(I + K D_y) vanishes identically on the family",
                confirmed=True,
            )
        K = exact.to_array(family.exact_family.member(witness))
        if K.shape != family.shape:
            K = K.reshape(family.shape)
        return K
    raise AllSingular(
        "no well-posed member found among sampled candidates", confirmed=False
    )


def _exact_star_spans(sys: PlantSystem):
    """Rational (S*, V*) of the observation/control quadruples."""
    A = exact.from_array(sys.A)
    V_rat = exact.vstar_span(
        A, exact.from_array(sys.B), exact.from_array(sys.E),
        exact.from_array(sys.D_z),
    )
    S_rat = exact.sstar_span(
        A, exact.from_array(sys.H), exact.from_array(sys.C),
        exact.from_array(sys.G_y),
    )
    return S_rat, V_rat


def _star_family(sys, Sst, Vst, tol):
    """Family on the supremal/infimal pair, with its exact rational twin."""
    return k_affine_family(sys, Sst, Vst, tol,
                           exact_spans=_exact_star_spans(sys))


def analyze_p1(sys: PlantSystem, tol: ToleranceProfile = DEFAULT_TOL,
               trials: int = 64, seed: int = 0) -> FeasibilityReport:
    """Solvability analysis of decoupling without the stability demand."""
    Vst = vstar(sys.control_quadruple(), tol)
    Sst = sstar(sys.observation_quadruple(), tol)
    ra = disturbance_image_condition(sys, Vst, tol)
    rb = disturbance_kernel_condition(sys, Sst, tol)
    rc = containment_residual(Sst, Vst)
    conds = [
        ConditionCheck("i", ra <= tol.residual, ra),
        ConditionCheck("ii", rb <= tol.residual, rb),
        ConditionCheck("iii", rc <= tol.angle, rc),
    ]
    family = None
    K = None
    failed = [c.label for c in conds if not c.passed]
    if failed:
        conds.append(ConditionCheck("iv", None, float("nan"), "not evaluated"))
        overall = f"infeasible({failed[0]})"
    else:
        family, check, K = _wellposedness_condition(
            sys, Sst, Vst, "iv", tol, trials, seed)
        conds.append(check)
        if check.passed:
            overall = "solvable"
        elif check.note == "family construction failed":
            overall = "numerical_failure"
        else:
            overall = "well_posedness_obstruction"
    return FeasibilityReport("p1", tuple(conds), Vst, Sst, family, K, overall)


def _wellposedness_condition(sys, Sst, Vst, label, tol, trials, seed):
    """Build the star family and try to select a well-posed member."""
    try:
        family = _star_family(sys, Sst, Vst, tol)
    except NoSolution:
        return None, ConditionCheck(label, False, float("nan"),
                                    "family construction failed"), None
    try:
        K = select_wellposed(family, sys.D_y, trials, seed)
        check = ConditionCheck(label, True, wellposedness_margin(K, sys.D_y),
                               "residual holds the well-posedness margin")
        return family, check, K
    except AllSingular as err:
        note = ("confirmed singular on exact grid" if err.confirmed
                else "no well-posed sample found")
        return family, ConditionCheck(label, False, 0.0, note), None


def analyze_p2(sys: PlantSystem, tol: ToleranceProfile = DEFAULT_TOL,
               trials: int = 64, seed: int = 0) -> FeasibilityReport:
    """Solvability analysis with internal stability, via the minimum
    self-bounded / maximum self-hidden pair; the stabilizability-subspace
    route is evaluated alongside as a cross-check."""
    region = sys.region
    quad_ctrl = sys.control_quadruple()
    quad_obs = sys.observation_quadruple()
    if not (region_stabilizable(sys.A, sys.B, region, tol)
            and region_detectable(sys.C, sys.A, region, tol)):
        conds = (ConditionCheck("precondition", False, float("nan"),
                                "(A,B) stabilizable and (C,A) detectable required"),)
        return FeasibilityReport("p2", conds, None, None, None, None,
                                 "infeasible(precondition)")

    Vst = vstar(quad_ctrl, tol)
    Sst = sstar(quad_obs, tol)
    ra = disturbance_image_condition(sys, Vst, tol)
    rb = disturbance_kernel_condition(sys, Sst, tol)
    rc = containment_residual(Sst, Vst)
    conds = [
        ConditionCheck("A", ra <= tol.residual, ra),
        ConditionCheck("B", rb <= tol.residual, rb),
        ConditionCheck("C", rc <= tol.angle, rc),
    ]

    v_m, s_M = vm_sM(sys, tol)
    vm_sum = combine("sum", v_m, s_M, tol)

    def spectra_check(sub, kind, quad, which):
        try:
            rep = spectral_report(sub, kind, quad, tol=tol)
        except Exception as err:  # not invariant => condition fails
            return ConditionCheck(which, False, float("nan"), str(err))
        fixed = rep.internal_fixed if which == "D" else rep.external_fixed
        bad = [l for l in fixed if region.boundary_distance(l) <= REGION_GUARD]
        worst = max((-region.boundary_distance(l) for l in fixed), default=-1.0)
        return ConditionCheck(which, not bad, max(worst, 0.0),
                              f"fixed spectrum {np.round(fixed, 6).tolist()}")

    conds.append(spectra_check(vm_sum, OUTPUT_NULLING, quad_ctrl, "D"))
    conds.append(spectra_check(s_M, INPUT_CONTAINING, quad_obs, "E"))

    family, check_f, K = _wellposedness_condition(
        sys, Sst, Vst, "F", tol, trials, seed)
    conds.append(check_f)
    obstruction = (not check_f.passed
                   and check_f.note != "family construction failed")

    failed = [c.label for c in conds if not c.passed]
    if not failed:
        overall = "solvable"
    elif failed == ["F"] and obstruction:
        overall = "well_posedness_obstruction"
    else:
        overall = f"infeasible({failed[0]})"

    extras = {"route_stabilizability": _stabilizability_route(sys, tol, trials, seed)}
    if extras["route_stabilizability"]["verdict"] is not None:
        extras["route_stabilizability"]["agrees"] = (
            extras["route_stabilizability"]["verdict"] == (overall == "solvable")
        )
    return FeasibilityReport("p2", tuple(conds), vm_sum, s_M, family, K,
                             overall, extras)


def _stabilizability_route(sys, tol, trials, seed) -> dict:
    """Equivalent solvability test on the largest stabilizability and
    smallest detectability subspaces."""
    region = sys.region
    out = {"verdict": None, "conditions": {}}
    try:
        VstG = vstar_g(sys.control_quadruple(), region, tol)
        SstG = sstar_g(sys.observation_quadruple(), region, tol)
    except Exception as err:
        out["error"] = str(err)
        return out
    ra = disturbance_image_condition(sys, VstG, tol)
    rb = disturbance_kernel_condition(sys, SstG, tol)
    rc = containment_residual(SstG, VstG)
    ok = {
        "i": ra <= tol.residual,
        "ii": rb <= tol.residual,
        "iii": rc <= tol.angle,
    }
    if all(ok.values()):
        try:
            fam = k_affine_family(sys, SstG, VstG, tol)
            select_wellposed(fam, sys.D_y, trials, seed)
            ok["iv"] = True
        except (AllSingular, NoSolution):
            ok["iv"] = False
    else:
        ok["iv"] = None
    out["conditions"] = ok
    out["verdict"] = all(v is True for v in ok.values())
    return out


def k_set_equivalence(sys: PlantSystem,
                      tol: ToleranceProfile = DEFAULT_TOL) -> tuple[bool, dict]:
    """Affine-set equality of the K-families written on (S*, V*) and on the
    self-hidden/self-bounded pair (S_M, V_m + S_M)."""
    Vst = vstar(sys.control_quadruple(), tol)
    Sst = sstar(sys.observation_quadruple(), tol)
    v_m, s_M = vm_sM(sys, tol)
    vm_sum = combine("sum", v_m, s_M, tol)
    fam1 = k_affine_family(sys, Sst, Vst, tol)
    fam2 = k_affine_family(sys, s_M, vm_sum, tol)
    residuals = {
        "K0_1_in_2": fam2.distance(fam1.K0),
        "K0_2_in_1": fam1.distance(fam2.K0),
    }
    mp = sys.m * sys.p
    span1 = span_of(
        np.column_stack([D.flatten(order="F") for D in fam1.directions])
        if fam1.directions else np.zeros((mp, 0)), tol)
    span2 = span_of(
        np.column_stack([D.flatten(order="F") for D in fam2.directions])
        if fam2.directions else np.zeros((mp, 0)), tol)
    residuals["dirs_1_in_2"] = containment_residual(span1, span2)
    residuals["dirs_2_in_1"] = containment_residual(span2, span1)
    equal_sets = (
        fam1.n_directions == fam2.n_directions
        and residuals["K0_1_in_2"] <= tol.residual
        and residuals["K0_2_in_1"] <= tol.residual
        and residuals["dirs_1_in_2"] <= tol.angle
        and residuals["dirs_2_in_1"] <= tol.angle
    )
    return equal_sets, residuals


def synthesize(sys: PlantSystem, V: Subspace, S: Subspace, K,
               stabilize: bool = False, F=None, G=None,
               tol: ToleranceProfile = DEFAULT_TOL) -> Compensator:
    """Order-n compensator from a well-posed K and friends of V and S.

    F and G may be supplied explicitly (any valid friend pair works); when
    omitted they are computed, with pole placement inside the plant's
    stability region if `stabilize` is set.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape != (sys.m, sys.p):
        raise DimensionMismatch(f"K must be {sys.m} x {sys.p}")
    if wellposedness_margin(K, sys.D_y) < DELTA_WP:
        raise WellPosednessViolated("I + K D_y is singular")
    if F is None:
        if stabilize:
            F = stabilizing_friend(V, OUTPUT_NULLING, sys.control_quadruple(),
                                   sys.region, tol).matrix
        else:
            F = friend(OUTPUT_NULLING, V, sys.control_quadruple(), tol).matrix
    if G is None:
        if stabilize:
            G = stabilizing_friend(S, INPUT_CONTAINING, sys.observation_quadruple(),
                                   sys.region, tol).matrix
        else:
            G = friend(INPUT_CONTAINING, S, sys.observation_quadruple(), tol).matrix
    F = np.atleast_2d(np.asarray(F, dtype=float))
    G = np.atleast_2d(np.asarray(G, dtype=float))
    Minv = np.linalg.inv(np.eye(sys.m) + K @ sys.D_y)
    FKC = F - K @ sys.C
    BGDy = sys.B + G @ sys.D_y
    A_c = sys.A + G @ sys.C + BGDy @ Minv @ FKC
    B_c = BGDy @ Minv @ K - G
    C_c = Minv @ FKC
    D_c = Minv @ K
    return Compensator(A_c, B_c, C_c, D_c)


def recover_parameters(sys: PlantSystem, comp: Compensator):
    """Invert the compensator formulas: (K, F, G) from (B_c, C_c, D_c)."""
    Dc = comp.D_c
    p, m = sys.p, sys.m
    I_p = np.eye(p)
    I_m = np.eye(m)
    inner = I_p - sys.D_y @ Dc
    if abs(np.linalg.det(inner)) < DELTA_WP * (1 + np.linalg.norm(sys.D_y @ Dc)):
        raise NotWellPosed("I - D_y D_c is singular; parameters undefined")
    K = Dc @ np.linalg.inv(inner)
    lead = np.linalg.inv(I_m - Dc @ sys.D_y)
    F = lead @ comp.C_c + K @ sys.C
    G = (sys.B @ Dc - comp.B_c) @ np.linalg.inv(inner)
    return K, F, G


def close_loop(sys: PlantSystem, comp: Compensator,
               tol: ToleranceProfile = DEFAULT_TOL) -> ClosedLoop:
    """Assemble the well-posed feedback interconnection."""
    Dy, Dc = sys.D_y, comp.D_c
    if comp.B_c.shape[1] != sys.p or comp.C_c.shape[0] != sys.m:
        raise DimensionMismatch("compensator does not match the plant ports")
    loop = np.eye(sys.p) - Dy @ Dc
    if abs(np.linalg.det(loop)) < DELTA_WP * (1 + np.linalg.norm(Dy @ Dc)):
        raise NotWellPosed("I - D_y D_c is singular")
    W = np.linalg.inv(loop)
    A, B, H, C, Gy = sys.A, sys.B, sys.H, sys.C, sys.G_y
    E, Dz, Gz = sys.E, sys.D_z, sys.G_z
    Ac, Bc, Cc = comp.A_c, comp.B_c, comp.C_c
    A_hat = np.block([
        [A + B @ Dc @ W @ C, B @ Cc + B @ Dc @ W @ Dy @ Cc],
        [Bc @ W @ C, Ac + Bc @ W @ Dy @ Cc],
    ])
    H_hat = np.vstack([H + B @ Dc @ W @ Gy, Bc @ W @ Gy])
    C_hat = np.hstack([E + Dz @ Dc @ W @ C, Dz @ Cc + Dz @ Dc @ W @ Dy @ Cc])
    G_hat = Gz + Dz @ Dc @ W @ Gy
    return ClosedLoop(A_hat, H_hat, C_hat, G_hat, W, sys.time_domain, sys.n)


def solve(sys: PlantSystem, problem: str = "p1",
          tol: ToleranceProfile = DEFAULT_TOL, seed: int = 0,
          trials: int = 64):
    """Full pipeline: analyze, pick subspaces, select K, build friends,
    synthesize, close the loop, and certify. Returns (compensator, report);
    raises Infeasible / WellPosednessObstruction with the report attached."""
    from .verify import certify_decoupled, stability_check

    if problem == "p1":
        report = analyze_p1(sys, tol, trials, seed)
    elif problem == "p2":
        report = analyze_p2(sys, tol, trials, seed)
    else:
        raise ValueError(f"unknown problem {problem!r}")
    if report.overall == "well_posedness_obstruction":
        raise WellPosednessObstruction(
            "every admissible K makes I + K D_y singular", report)
    if not report.solvable:
        raise Infeasible(f"analysis verdict: {report.overall}", report)

    V, S, K = report.V, report.S, report.K
    if problem == "p2":
        # The star-pair K must also satisfy the coupling inclusion on the
        # self-bounded/self-hidden pair (the two affine families coincide).
        resid = coupling_residual(sys, V, S, K)
        if resid > 1e3 * tol.residual:
            raise CertificateFailed(
                f"K fails the coupling inclusion on the lattice pair ({resid:.2e})")
    comp = synthesize(sys, V, S, K, stabilize=(problem == "p2"), tol=tol)
    cl = close_loop(sys, comp, tol)
    cert = certify_decoupled(cl, tol)
    if not cert.valid:
        raise CertificateFailed(
            "synthesized loop failed its decoupling certificate "
            f"(residuals {cert.residual_invariance:.2e}, "
            f"{cert.residual_kernel:.2e}, {cert.feedthrough_norm:.2e})")
    if problem == "p2":
        ok, _ = stability_check(cl.A_hat, sys.region)
        if not ok:
            raise CertificateFailed("synthesized loop is not internally stable")
    return comp, report
