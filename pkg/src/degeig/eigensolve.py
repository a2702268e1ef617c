"""Positive eigenpairs of the pencil A e = lambda B e by successive minimization.

A is the (SPD after Dirichlet elimination) energy matrix, B the g-weighted
mass matrix, possibly indefinite. The eigenvalues of interest are the
positive ones; they are found in increasing order by maximizing the inverse
quotient mu(u) = (u^T B u) / (u^T A u) over the A-orthogonal complement of
the previously found eigenvectors, which is the exact finite-dimensional
analogue of minimizing the energy under a unit g-mass constraint and
energy-orthogonality restrictions. B is never factorized.

Two routes are provided: solve_dense (full spectrum through a symmetric
congruence, the reference for small problems) and solve_successive (deflated
Rayleigh-quotient iteration on sparse matrices).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla
import scipy.sparse as sp

from .assembly import mass_plus_inner, volume_integral

CLUSTER_RTOL = 1e-9  # eigenvalues closer than this (relatively) form a cluster


class SolverError(RuntimeError):
    """Raised when the pencil cannot be processed (e.g. A not SPD)."""


@dataclass
class SolverSettings:
    """Iteration controls for the successive solver."""

    k: int = 6
    tol: float = 1e-9           # relative weak-form residual target
    max_iter: int = 8000        # per eigenpair
    deflation_tol: float = 1e-14  # Ritz-basis degeneracy guard (A-norm relative)
    dense_threshold: int = 2000
    seed: int = 42
    restarts: int = 8           # seeded retries before declaring exhaustion

    def validate(self):
        if self.k < 1:
            raise ValueError("eigenpair count k must be >= 1")
        for name in ("tol", "deflation_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class EigenSequence:
    """Ordered positive eigenpairs with their diagnostics.

    vectors holds one B-normalized eigenvector per column. cross_energy and
    cross_mass are the Gram matrices in the energy and mass inner products;
    their off-diagonals quantify deflation quality.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    b_norms: np.ndarray
    cross_energy: np.ndarray
    cross_mass: np.ndarray
    iterations: list
    converged: list
    requested: int
    exhausted: bool
    method: str
    clusters: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def count(self):
        return int(self.lambdas.size)

    def max_cross_energy(self):
        if self.count < 2:
            return 0.0
        off = self.cross_energy - np.diag(np.diag(self.cross_energy))
        return float(np.max(np.abs(off)))

    def max_cross_mass(self):
        if self.count < 2:
            return 0.0
        off = self.cross_mass - np.diag(np.diag(self.cross_mass))
        return float(np.max(np.abs(off)))

    def to_report(self):
        pairs = [
            {
                "n": i + 1,
                "lambda": float(self.lambdas[i]),
                "residual": float(self.residuals[i]),
                "b_norm": float(self.b_norms[i]),
                "iterations": int(self.iterations[i]),
                "converged": bool(self.converged[i]),
            }
            for i in range(self.count)
        ]
        return {
            "method": self.method,
            "requested": self.requested,
            "found": self.count,
            "exhausted": bool(self.exhausted),
            "pairs": pairs,
            "max_cross_energy": self.max_cross_energy(),
            "max_cross_mass": self.max_cross_mass(),
            "clusters": [list(map(int, c)) for c in self.clusters],
            "warnings": list(self.warnings),
        }


def residual(pair, lam, e):
    """Relative weak-form residual ||A e - lambda B e|| / ||A e||."""
    e = np.asarray(e, dtype=float)
    Ae = pair.A @ e
    nrm = np.linalg.norm(Ae)
    if nrm == 0.0:
        return np.inf
    return float(np.linalg.norm(Ae - lam * (pair.B @ e)) / nrm)


def _first_significant_index(e, rel=1e-8):
    mags = np.abs(e)
    top = mags.max()
    if top == 0.0:
        return 0
    idx = np.nonzero(mags > rel * top)[0]
    return int(idx[0]) if idx.size else 0


def _fix_sign(pair, e, first_mode):
    """Deterministic orientation: the ground mode integrates nonnegatively,
    higher modes lead with a positive coefficient."""
    if first_mode:
        s = volume_integral(pair, e)
        if s < 0.0:
            return -e
        if s > 0.0:
            return e
    if e[_first_significant_index(e)] < 0.0:
        return -e
    return e


def _detect_clusters(lambdas):
    clusters, current = [], [0]
    for i in range(1, lambdas.size):
        if lambdas[i] - lambdas[i - 1] <= CLUSTER_RTOL * max(lambdas[i], lambdas[i - 1]):
            current.append(i)
        else:
            clusters.append(current)
            current = [i]
    if lambdas.size:
        clusters.append(current)
    return clusters


def _order_inside_clusters(lambdas, vectors, clusters):
    """Deterministic ordering of degenerate groups by leading-coefficient index."""
    order = np.arange(lambdas.size)
    for group in clusters:
        if len(group) > 1:
            keys = [_first_significant_index(vectors[:, i]) for i in group]
            order[group] = np.array(group)[np.argsort(keys, kind="stable")]
    return order


def _finalize(pair, lambdas, vectors, iterations, converged, requested,
              exhausted, method, warnings=None):
    lambdas = np.asarray(lambdas, dtype=float)
    k = lambdas.size
    vectors = np.asarray(vectors, dtype=float).reshape(pair.order, k) if k else np.zeros((pair.order, 0))
    clusters = _detect_clusters(lambdas)
    order = _order_inside_clusters(lambdas, vectors, clusters)
    lambdas = lambdas[order]
    vectors = vectors[:, order]
    iterations = [iterations[i] for i in order]
    converged = [converged[i] for i in order]
    for i in range(k):
        vectors[:, i] = _fix_sign(pair, vectors[:, i], first_mode=(i == 0))
    AV = pair.A @ vectors if k else vectors
    BV = pair.B @ vectors if k else vectors
    cross_a = vectors.T @ AV
    cross_b = vectors.T @ BV
    resid = np.array([residual(pair, lambdas[i], vectors[:, i]) for i in range(k)])
    return EigenSequence(
        lambdas=lambdas,
        vectors=vectors,
        residuals=resid,
        b_norms=np.diag(cross_b).copy() if k else np.zeros(0),
        cross_energy=cross_a,
        cross_mass=cross_b,
        iterations=iterations,
        converged=converged,
        requested=requested,
        exhausted=exhausted,
        method=method,
        clusters=_detect_clusters(lambdas),
        warnings=warnings or [],
    )


def solve_dense(pair, k, dense_threshold=2000):
    """Full-spectrum reference solve through a symmetric congruence.

    A = L L^T turns the pencil into the symmetric matrix C = L^{-1} B L^{-T};
    eigenvalues mu of C with mu > 0 are the reciprocals of the positive pencil
    eigenvalues. Nonpositive directions are discarded. Returns the k smallest
    positive lambda; fewer when the pencil has fewer positive eigenvalues
    (reported, not fatal).
    """
    n = pair.order
    if n > dense_threshold:
        raise SolverError(f"dense solve refused at order {n} > {dense_threshold}")
    if k < 1:
        raise ValueError("k must be >= 1")
    Ad = pair.A.toarray()
    Bd = pair.B.toarray()
    try:
        L = sla.cholesky(Ad, lower=True)
    except sla.LinAlgError as exc:
        raise SolverError(f"energy matrix is not positive definite: {exc}") from exc
    Y = sla.solve_triangular(L, Bd, lower=True)
    C = sla.solve_triangular(L, Y.T, lower=True)
    C = 0.5 * (C + C.T)
    mu, V = sla.eigh(C)
    floor = 1e-12 * max(np.max(np.abs(mu)), np.finfo(float).tiny)
    pos = np.nonzero(mu > floor)[0][::-1]  # descending mu = ascending lambda
    warnings = []
    if pos.size < k:
        warnings.append(
            f"pencil has only {pos.size} positive eigenvalues; {k} requested"
        )
    take = pos[: min(k, pos.size)]
    lambdas, vectors = [], []
    for j in take:
        y = V[:, j]
        e = sla.solve_triangular(L, y, lower=True, trans="T")
        e = e / np.sqrt(mu[j])  # unit g-mass: e^T B e = 1
        vectors.append(e)
        lambdas.append(float(e @ (pair.A @ e)))
    vectors = np.column_stack(vectors) if lambdas else np.zeros((n, 0))
    return _finalize(
        pair, lambdas, vectors,
        iterations=[0] * len(lambdas), converged=[True] * len(lambdas),
        requested=k, exhausted=pos.size < k, method="dense", warnings=warnings,
    )


def _linear_solver(pair):
    """Exact-ish application of A^{-1}: sparse LU for moderate orders,
    Jacobi-preconditioned CG above (memory-bound 3-d grids)."""
    A = pair.A.tocsc()
    n = A.shape[0]
    if n <= FACTOR_THRESHOLD:
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise SolverError(f"factorization of the energy matrix failed: {exc}") from exc
        return lu.solve
    M = sp.diags(1.0 / A.diagonal())
    state = {"x0": None}

    def solve(b):
        x, info = spla.cg(A, b, x0=state["x0"], rtol=1e-13, atol=0.0,
                          maxiter=40 * int(np.sqrt(n)) + 1000, M=M)
        if info != 0:
            raise SolverError(f"inner CG did not converge (info={info})")
        state["x0"] = x
        return x

    return solve


class _Deflator:
    """A-orthogonal projection against the accumulated eigenvectors."""

    def __init__(self, order):
        self.vecs = np.zeros((order, 0))
        self.avecs = np.zeros((order, 0))
        self.norms = np.zeros(0)

    def add(self, e, Ae):
        self.vecs = np.column_stack([self.vecs, e])
        self.avecs = np.column_stack([self.avecs, Ae])
        self.norms = np.append(self.norms, e @ Ae)

    def __call__(self, v):
        if self.norms.size == 0:
            return v
        coef = (self.avecs.T @ v) / self.norms
        return v - self.vecs @ coef


def _ritz_step(A, B, basis_candidates, drop_tol):
    """A-orthonormalize the candidates and return the mu-maximizing Ritz vector."""
    basis, abasis = [], []
    for v in basis_candidates:
        if v is None:
            continue
        v = v.copy()
        Av = A @ v
        scale = np.sqrt(max(v @ Av, 0.0))
        if scale == 0.0 or not np.isfinite(scale):
            continue
        for b, Ab in zip(basis, abasis):
            c = Ab @ v
            v -= c * b
            Av -= c * Ab
        nrm = np.sqrt(max(v @ Av, 0.0))
        if nrm > drop_tol * scale and np.isfinite(nrm):
            basis.append(v / nrm)
            abasis.append(Av / nrm)
    if not basis:
        return None, None
    S = np.column_stack(basis)
    SB = S.T @ (B @ S)
    SB = 0.5 * (SB + SB.T)
    theta, Y = sla.eigh(SB)
    u = S @ Y[:, -1]
    return u, theta


RITZ_FLOOR = 1e-6  # hand over to the polish phase below this residual
FACTOR_THRESHOLD = 20000  # direct factorizations allowed up to this order


def _quotient_state(A, B, u):
    Au = A @ u
    Bu = B @ u
    mu = (u @ Bu) / (u @ Au)
    if mu > 0.0:
        nAu = np.linalg.norm(Au)
        res = np.linalg.norm(Au - Bu / mu) / nAu if nAu > 0 else np.inf
    else:
        nBu = np.linalg.norm(Bu)
        res = np.linalg.norm(Bu - mu * Au) / max(nBu, np.finfo(float).tiny)
    return Au, Bu, mu, res


def _maximize_quotient(pair, solve, deflate, u0, settings):
    """Drive one eigenpair: locally optimal ascent on mu = u^T B u / u^T A u.

    Phase 1 enriches the search space with the preconditioned direction
    A^{-1} B u (re-deflated) and the previous iterate and takes the Ritz
    vector of largest mu; this is fast but its rounding floor sits near
    sqrt(machine eps) because the small Gram problem re-mixes noise
    directions. Phase 2 therefore polishes with plain (shifted) power steps
    u <- A^{-1} B u + sigma u, which only contract unwanted components; the
    shift guards against a negative eigenvalue of larger magnitude when B is
    indefinite. Convergence is declared on the relative weak-form residual.
    """
    A, B = pair.A, pair.B
    u = deflate(np.asarray(u0, dtype=float))
    Au = A @ u
    nrm = np.sqrt(max(u @ Au, 0.0))
    if nrm == 0.0 or not np.isfinite(nrm):
        return None
    u /= nrm
    prev = None
    theta_min, theta_max = np.inf, -np.inf
    best = None  # (res, mu, u)
    it = 0
    ritz_target = max(settings.tol, RITZ_FLOOR)
    while it < settings.max_iter:
        it += 1
        Au, Bu, mu, res = _quotient_state(A, B, u)
        if best is None or res < best[0]:
            best = (res, mu, u.copy())
        if res <= settings.tol:
            return mu, u, it, True, res
        if res <= ritz_target:
            break
        d = deflate(solve(Bu))
        u_new, thetas = _ritz_step(A, B, [u, d, prev], settings.deflation_tol)
        if u_new is None:
            break
        theta_min = min(theta_min, float(np.min(thetas)))
        theta_max = max(theta_max, float(np.max(thetas)))
        u_new = deflate(u_new)
        An = A @ u_new
        nrm = np.sqrt(max(u_new @ An, 0.0))
        if nrm == 0.0 or not np.isfinite(nrm):
            break
        prev = u
        u = u_new / nrm

    res0, mu0, u = best
    if mu0 <= 0.0:
        return mu0, u, it, res0 <= settings.tol, res0
    if pair.order <= FACTOR_THRESHOLD:
        return _refine_shift_invert(pair, deflate, u, mu0, res0, it, settings)

    # large operators: noise-contracting power steps on A^{-1} B + sigma I
    indefinite = theta_min < -1e-12 * max(theta_max, 0.0)
    sigma = 1.05 * max(abs(theta_min), theta_max) if indefinite else 0.0
    best_res, best_mu, best_u = res0, mu0, u.copy()
    while it < settings.max_iter:
        it += 1
        w = deflate(solve(pair.B @ u))
        if sigma != 0.0:
            w += sigma * u
        Aw = A @ w
        nrm = np.sqrt(max(w @ Aw, 0.0))
        if nrm == 0.0 or not np.isfinite(nrm):
            break
        u = w / nrm
        Au, Bu, mu, res = _quotient_state(A, B, u)
        if res < best_res:
            best_res, best_mu, best_u = res, mu, u.copy()
            if res <= settings.tol:
                return mu, u, it, True, res
        elif res > 10.0 * best_res and res > settings.tol:
            # diverging polish: the shift underestimated the negative side
            sigma = 2.0 * sigma if sigma != 0.0 else 1.05 * max(abs(theta_min), theta_max, abs(mu))
            u = best_u.copy()
    return best_mu, best_u, it, best_res <= settings.tol, best_res


def _refine_shift_invert(pair, deflate, u, mu0, res0, it, settings):
    """Finish one eigenpair with shift-inverted power steps.

    With s placed a relative 1e-3 below the eigenvalue estimate, the operator
    (A - s B)^{-1} B contracts every unwanted component by roughly
    (lambda - s)/(next distance), so a handful of steps reach the rounding
    floor without the Ritz noise re-mixing. The factorization is cheap at
    the orders this path accepts.
    """
    A, B = pair.A, pair.B
    lam_est = 1.0 / mu0
    best_res, best_mu, best_u = res0, mu0, u.copy()
    for s_rel in (1e-3, 1e-2):
        s = lam_est * (1.0 - s_rel)
        try:
            op = spla.splu((A - s * B).tocsc())
        except RuntimeError:
            continue
        stale = 0
        for _ in range(40):
            if it >= settings.max_iter:
                break
            it += 1
            w = deflate(op.solve(B @ u))
            Aw = A @ w
            nrm = np.sqrt(max(w @ Aw, 0.0))
            if nrm == 0.0 or not np.isfinite(nrm):
                break
            u = w / nrm
            _, _, mu, res = _quotient_state(A, B, u)
            if res < best_res:
                best_res, best_mu, best_u = res, mu, u.copy()
                stale = 0
            else:
                stale += 1
            if best_res <= settings.tol or stale >= 3:
                break
        if best_res <= settings.tol:
            break
        u = best_u.copy()
    return best_mu, best_u, it, best_res <= settings.tol, best_res


def solve_successive(pair, k=None, settings=None):
    """Compute the k smallest positive eigenpairs by deflated quotient ascent.

    For n = 1..k the quotient mu is maximized over the A-orthogonal
    complement of the previous eigenvectors; a converged nonpositive mu is
    retried from seeded restart vectors and, if persistent, reported as
    exhaustion of the positive spectrum (a partial sequence, not an error).
    Eigenvectors are normalized to unit g-mass, so lambda_n equals the energy
    of e_n by construction; the ground mode is oriented nonnegatively.
    """
    settings = settings or SolverSettings()
    if k is not None:
        settings = SolverSettings(**{**settings.__dict__, "k": k})
    settings.validate()
    solve = _linear_solver(pair)
    deflate = _Deflator(pair.order)
    lambdas, vectors, iterations, converged_flags = [], [], [], []
    warnings = []
    exhausted = False
    for n in range(settings.k):
        outcome = None
        for attempt in range(settings.restarts):
            rng = np.random.default_rng([settings.seed, n, attempt])
            u0 = rng.standard_normal(pair.order)
            outcome = _maximize_quotient(pair, solve, deflate, u0, settings)
            if outcome is not None and outcome[0] > 0.0:
                break
        if outcome is None or outcome[0] <= 0.0:
            exhausted = True
            warnings.append(
                f"no further positive eigenvalue found after {settings.restarts} restarts "
                f"(found {len(lambdas)} of {settings.k})"
            )
            break
        mu, u, iters, ok, res = outcome
        if not ok:
            warnings.append(
                f"pair {n + 1} hit the iteration cap at residual {res:.3e}"
            )
        bnorm = u @ (pair.B @ u)
        e = u / np.sqrt(bnorm)
        Ae = pair.A @ e
        lambdas.append(float(e @ Ae))
        vectors.append(e)
        iterations.append(iters)
        converged_flags.append(ok)
        deflate.add(e, Ae)
    vectors = np.column_stack(vectors) if lambdas else np.zeros((pair.order, 0))
    return _finalize(
        pair, lambdas, vectors, iterations, converged_flags,
        requested=settings.k, exhausted=exhausted, method="successive",
        warnings=warnings,
    )


def sign_changes(u, rel=1e-6):
    """Number of sign alternations among significantly nonzero entries."""
    u = np.asarray(u, dtype=float)
    top = np.max(np.abs(u))
    if top == 0.0:
        return 0
    signs = np.sign(u[np.abs(u) > rel * top])
    return int(np.count_nonzero(np.diff(signs) != 0))


@dataclass
class GrowthReport:
    """Diagnostics of the unit-energy rescaled modes e_n / sqrt(lambda_n).

    In exact arithmetic each rescaled mode has unit energy and its g-mass
    equals 1/lambda_n, bounded above by its g^+ mass; the tabulated gaps
    measure how closely the discrete sequence reproduces those identities.
    """

    lambdas: np.ndarray
    unit_energy: np.ndarray       # ||f_n||_alpha^2
    mass_values: np.ndarray       # integral of g f_n^2
    plus_mass_values: np.ndarray  # integral of g^+ f_n^2
    identity_gaps: np.ndarray     # |1/lambda_n - integral g f_n^2|
    bound_margins: np.ndarray     # integral g^+ f_n^2 - 1/lambda_n
    strictly_increasing: bool
    ratios: np.ndarray            # lambda_n / lambda_1

    def to_dict(self):
        return {
            "lambdas": [float(x) for x in self.lambdas],
            "unit_energy": [float(x) for x in self.unit_energy],
            "mass_values": [float(x) for x in self.mass_values],
            "plus_mass_values": [float(x) for x in self.plus_mass_values],
            "identity_gaps": [float(x) for x in self.identity_gaps],
            "bound_margins": [float(x) for x in self.bound_margins],
            "strictly_increasing": bool(self.strictly_increasing),
            "ratios": [float(x) for x in self.ratios],
        }


def growth_diagnostics(seq, pair):
    """Tabulate the rescaled-mode identities and the growth trend of lambda_n."""
    if seq.count == 0:
        raise ValueError("empty eigen sequence")
    lam = seq.lambdas
    unit_energy = np.zeros(seq.count)
    mass_vals = np.zeros(seq.count)
    plus_vals = np.zeros(seq.count)
    for i in range(seq.count):
        f = seq.vectors[:, i] / np.sqrt(lam[i])
        unit_energy[i] = f @ (pair.A @ f)
        mass_vals[i] = f @ (pair.B @ f)
        plus_vals[i] = mass_plus_inner(pair, f)
    inv = 1.0 / lam
    increasing = bool(np.all(np.diff(lam) > CLUSTER_RTOL * lam[1:])) if seq.count > 1 else True
    return GrowthReport(
        lambdas=lam.copy(),
        unit_energy=unit_energy,
        mass_values=mass_vals,
        plus_mass_values=plus_vals,
        identity_gaps=np.abs(inv - mass_vals),
        bound_margins=plus_vals - inv,
        strictly_increasing=increasing,
        ratios=lam / lam[0],
    )
