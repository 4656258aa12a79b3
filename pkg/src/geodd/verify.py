"""Independent verification: decoupling certificates, transfer-function
sampling, stability checks, impulse simulation, and a seeded generator of
solvable plants for the property suites."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exact
from .errors import (
    ContinuousNotSupported,
    GenerationFailed,
    SampleTooCloseToPole,
)
from .geometry import input_containing_residual, output_nulling_residual
from .lattice import PlantSystem, coupling_conditions
from .subspaces import (
    CONTINUOUS,
    DEFAULT_TOL,
    DISCRETE,
    StabilityRegion,
    Subspace,
    ToleranceProfile,
    containment_residual,
    extended_ops,
    invariant_hull,
    span_of,
)
from .synthesis import ClosedLoop

POLE_CLEARANCE = 1e-6


@dataclass(frozen=True)
class DecouplingCertificate:
    """An A^-invariant subspace between im H^ and ker C^, plus the residuals
    that make the claim checkable.

    The invariance and kernel residuals are relative to the norms of the
    loop matrices they apply (the subspace basis is orthonormal, so they
    would otherwise scale with the data); the feedthrough norm is absolute.
    """

    invariant_subspace: Subspace
    residual_invariance: float
    residual_kernel: float
    feedthrough_norm: float
    tolerance: float

    @property
    def valid(self) -> bool:
        return (
            self.residual_invariance <= self.tolerance
            and self.residual_kernel <= self.tolerance
            and self.feedthrough_norm <= self.tolerance
        )


def certify_decoupled(cl: ClosedLoop,
                      tol: ToleranceProfile = DEFAULT_TOL) -> DecouplingCertificate:
    """Certificate from the smallest invariant subspace containing im H^."""
    # Anchor the rank decision to the loop's scale: a disturbance input
    # that the compensator cancels exactly leaves H^ at roundoff level, and
    # its noise directions must not seed the hull.
    scale = max(1.0, float(np.linalg.norm(cl.A_hat, 2)))
    I_hat = invariant_hull("smallest_containing", cl.A_hat,
                           span_of(cl.H_hat, tol, scale=scale), tol)
    B = I_hat.basis
    if I_hat.is_trivial:
        inv_resid = 0.0
        ker_resid = 0.0
    else:
        mapped = cl.A_hat @ B
        inv_resid = float(np.linalg.norm(mapped - B @ (B.T @ mapped), 2)) / scale
        ker_resid = (float(np.linalg.norm(cl.C_hat @ B, 2))
                     / (1.0 + float(np.linalg.norm(cl.C_hat, 2))))
    feed = float(np.linalg.norm(cl.G_hat, 2)) if cl.G_hat.size else 0.0
    return DecouplingCertificate(I_hat, inv_resid, ker_resid, feed, tol.residual)


def transfer_samples(cl: ClosedLoop, lambdas) -> float:
    """Max spectral norm of the disturbance-to-output response over the
    sample points; each point must clear the spectrum by 1e-6."""
    poles = np.linalg.eigvals(cl.A_hat)
    worst = 0.0
    n = cl.order
    for lam in lambdas:
        lam = complex(lam)
        if poles.size and np.min(np.abs(poles - lam)) < POLE_CLEARANCE:
            raise SampleTooCloseToPole(f"sample {lam} within 1e-6 of a pole")
        resolvent = np.linalg.solve(lam * np.eye(n) - cl.A_hat, cl.H_hat)
        G = cl.C_hat @ resolvent + cl.G_hat
        worst = max(worst, float(np.linalg.norm(G, 2)))
    return worst


def default_lambdas(cl: ClosedLoop, count: int = 20, seed: int = 0) -> list:
    """Seeded samples from an annulus around the spectrum, avoiding every
    pole by at least 1e-3."""
    poles = np.linalg.eigvals(cl.A_hat)
    radius = 2.0 * max(1.0, float(np.max(np.abs(poles))) if poles.size else 1.0)
    rng = np.random.default_rng(seed)
    samples = []
    while len(samples) < count:
        r = rng.uniform(0.5 * radius, 1.5 * radius)
        phi = rng.uniform(0.0, 2.0 * np.pi)
        lam = r * np.exp(1j * phi)
        if poles.size and np.min(np.abs(poles - lam)) < 1e-3:
            continue
        samples.append(lam)
    return samples


def stability_check(A_hat, region: StabilityRegion,
                    margin: float = 1e-8) -> tuple[bool, np.ndarray]:
    """All eigenvalues strictly inside the region by the given margin."""
    A_hat = np.atleast_2d(np.asarray(A_hat, dtype=float))
    eigs = np.linalg.eigvals(A_hat)
    shrunk = StabilityRegion(region.kind, max(region.margin, margin))
    ok = all(shrunk.boundary_distance(l) >= 0 for l in eigs)
    return ok, np.sort_complex(eigs)


def simulate_impulse(cl: ClosedLoop, steps: int = 50) -> float:
    """Peak |z| under unit disturbance impulses, one channel at a time.

    Discrete time only; continuous loops are checked through
    transfer_samples instead.
    """
    if cl.time_domain != DISCRETE:
        raise ContinuousNotSupported("impulse simulation needs discrete time")
    n = cl.order
    q = cl.H_hat.shape[1]
    peak = 0.0
    for j in range(q):
        x = np.zeros(n)
        w = np.zeros(q)
        w[j] = 1.0
        z = cl.C_hat @ x + cl.G_hat @ w
        peak = max(peak, float(np.max(np.abs(z))) if z.size else 0.0)
        x = cl.A_hat @ x + cl.H_hat @ w
        for _ in range(1, steps):
            z = cl.C_hat @ x
            peak = max(peak, float(np.max(np.abs(z))) if z.size else 0.0)
            x = cl.A_hat @ x
    return peak


def necessity_round_trip(sys: PlantSystem, cl: ClosedLoop,
                         tol: ToleranceProfile = DEFAULT_TOL) -> dict:
    """Extract V = p(I^), S = i(I^) from a certified loop and re-check the
    coupling conditions they must satisfy."""
    cert = certify_decoupled(cl, tol)
    I_hat = cert.invariant_subspace
    V = extended_ops("project", I_hat, sys.n, tol)
    S = extended_ops("intersect", I_hat, sys.n, tol)
    conds = coupling_conditions(sys, V, S, tol)
    return {
        "certificate": cert,
        "V": V,
        "S": S,
        "output_nulling_residual": output_nulling_residual(
            V, sys.control_quadruple(), tol),
        "input_containing_residual": input_containing_residual(
            S, sys.observation_quadruple(), tol),
        "a": conds["a"],
        "b": conds["b"],
        "S_in_V_residual": containment_residual(S, V),
    }


@dataclass(frozen=True)
class InstanceSpec:
    """Deterministic recipe for one random plant."""

    seed: int
    n: int = 4
    m: int = 2
    q: int = 1
    p: int = 2
    r: int = 1
    time_domain: str = CONTINUOUS
    solvable_by_construction: bool = True

    def __post_init__(self):
        if min(self.n, self.m, self.q, self.p, self.r) <= 0:
            raise ValueError("all dimensions must be positive")


def _rand_int_matrix(rng, rows, cols, lo=-2, hi=2):
    return rng.integers(lo, hi + 1, size=(rows, cols)).astype(float)


def generate_instance(spec: InstanceSpec) -> PlantSystem:
    """Random rational plant (integer entries; dyadic A in discrete time),
    deterministic in the seed.

    With solvable_by_construction the disturbance enters through the
    supremal output-nulling subspace (exactly, via a denominator-cleared
    rational basis) and the measurement channel is drawn until the kernel
    condition and the star inclusion hold, so the three subspace conditions
    of the decoupling problem are satisfied by construction.
    """
    rng = np.random.default_rng(spec.seed)
    n, m, q, p, r = spec.n, spec.m, spec.q, spec.p, spec.r
    if not spec.solvable_by_construction:
        mats = [_rand_int_matrix(rng, a, b) for a, b in
                ((n, n), (n, m), (n, q), (p, n), (p, m), (p, q),
                 (r, n), (r, m), (r, q))]
        return PlantSystem(*mats, time_domain=spec.time_domain)

    for _ in range(200):
        A = _rand_int_matrix(rng, n, n)
        A -= float(rng.integers(0, 3)) * np.eye(n)
        if spec.time_domain == DISCRETE:
            # halve (exactly, keeping entries dyadic) until inside the disc
            while np.max(np.abs(np.linalg.eigvals(A))) >= 0.95:
                A = A / 2.0
        B = _rand_int_matrix(rng, n, m)
        E = _rand_int_matrix(rng, r, n)
        D_z = _rand_int_matrix(rng, r, m, lo=-1, hi=1)
        V_rat = exact.vstar_span(
            exact.from_array(A), exact.from_array(B),
            exact.from_array(E), exact.from_array(D_z))
        dim_v = exact.shape(V_rat)[1]
        if dim_v == 0:
            continue
        V_int = exact.to_array(exact.clear_denominators(V_rat))
        M = _rand_int_matrix(rng, dim_v, q)
        N = _rand_int_matrix(rng, m, q, lo=-1, hi=1)
        H = V_int @ M + B @ N
        G_z = D_z @ N
        if not np.any(H) or np.max(np.abs(H)) > 12:
            continue

        found = None
        for _ in range(20):
            C = _rand_int_matrix(rng, p, n)
            G_y = _rand_int_matrix(rng, p, q, lo=-1, hi=1)
            if _solvable_measurement(A, H, C, G_y, E, G_z, V_rat):
                found = (C, G_y)
                break
        if found is None and p >= q:
            C = _rand_int_matrix(rng, p, n)
            G_y = np.vstack([np.eye(q), np.zeros((p - q, q))])
            if _solvable_measurement(A, H, C, G_y, E, G_z, V_rat):
                found = (C, G_y)
        if found is None:
            continue
        C, G_y = found
        D_y = (np.zeros((p, m)) if rng.integers(0, 2) == 0
               else _rand_int_matrix(rng, p, m, lo=-1, hi=1))
        return PlantSystem(A, B, H, C, D_y, G_y, E, D_z, G_z,
                           time_domain=spec.time_domain)
    raise GenerationFailed(f"no solvable instance found for seed {spec.seed}")


def _solvable_measurement(A, H, C, G_y, E, G_z, V_rat) -> bool:
    """Exact check of the kernel condition and the star inclusion for a
    candidate measurement channel."""
    S_rat = exact.sstar_span(
        exact.from_array(A), exact.from_array(H),
        exact.from_array(C), exact.from_array(G_y))
    if not exact.contains_span(V_rat, S_rat):
        return False
    n = A.shape[0]
    q = H.shape[1]
    k = exact.shape(S_rat)[1]
    lifted = exact.vstack(
        exact.hstack(S_rat, exact.zeros(n, q)),
        exact.hstack(exact.zeros(q, k), exact.eye(q)),
    )
    ker_cg = exact.kernel(exact.from_array(np.hstack([C, G_y])))
    dom = exact.intersect_spans(lifted, ker_cg)
    EG = exact.from_array(np.hstack([E, G_z]))
    image = exact.matmul(EG, dom)
    return all(x == 0 for row in image for x in row)
