"""Discrete forms for the power-weighted operator on truncated domains.

Assembles the symmetric stiffness matrix A (the energy inner product
integral of |x|^alpha grad u . grad v), the possibly indefinite mass matrix
B (integral of g u v), and the Hardy matrix H (integral of u v / |x|^(2-alpha)),
plus a shared volume quadrature used for L^p norms. Radial mode uses P1
elements with closed-form stiffness integrals; 3-d mode uses a conservative
7-point flux discretization with lumped B and H.
"""

import math

import numpy as np
import scipy.sparse as sp

from .quadrature import gauss_rule
from .weights import WeightDomainError, weight_positive_part, weight_value

MASS_GAUSS_ORDER = 4  # per-element rule for mass/Hardy/volume quadrature


class AssemblyError(RuntimeError):
    """Raised when a discrete form cannot be assembled."""


def sphere_area(N):
    """Surface area of the unit sphere S^(N-1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def ball_volume(N, R):
    return sphere_area(N) * R**N / N


def _symmetrized(mat):
    mat = mat.tocsr()
    return ((mat + mat.T) * 0.5).tocsr()


class DiscreteOperatorPair:
    """Assembled operators sharing one degree-of-freedom numbering.

    quad_weights are volume weights (measure included) at the quadrature
    points; interp maps nodal vectors to point values there, so every
    integral of a nodal function runs through the same quadrature path.
    """

    def __init__(self, A, B, H, quad_radii, quad_weights, interp,
                 g_quad, gplus_quad, geometry, N, alpha, mode, dof_positions):
        self.A = A
        self.B = B
        self.H = H
        self.quad_radii = quad_radii
        self.quad_weights = quad_weights
        self.interp = interp
        self.g_quad = g_quad
        self.gplus_quad = gplus_quad
        self.geometry = geometry
        self.N = N
        self.alpha = alpha
        self.mode = mode
        self.dof_positions = dof_positions

    @property
    def order(self):
        return self.A.shape[0]

    @classmethod
    def from_matrices(cls, A, B, H=None, quad_weights=None):
        """Wrap explicit matrices (testing and toy problems).

        The volume quadrature defaults to unit nodal weights with identity
        interpolation; g-dependent helpers are unavailable.
        """
        A = _symmetrized(sp.csr_matrix(A))
        B = _symmetrized(sp.csr_matrix(B))
        n = A.shape[0]
        if B.shape != A.shape:
            raise ValueError("A and B must share their order")
        H = _symmetrized(sp.csr_matrix(H)) if H is not None else sp.csr_matrix((n, n))
        w = np.ones(n) if quad_weights is None else np.asarray(quad_weights, float)
        return cls(A, B, H, None, w, sp.identity(n, format="csr"),
                   None, None, None, None, None, "matrices", np.arange(n, dtype=float))


def _check_vector(pair, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (pair.order,):
        raise ValueError(f"vector of length {u.shape} does not match order {pair.order}")
    return u


def energy_inner(pair, u, v=None):
    """u^T A v: the weighted-gradient inner product."""
    u = _check_vector(pair, u)
    v = u if v is None else _check_vector(pair, v)
    return float(u @ (pair.A @ v))


def mass_inner(pair, u, v=None):
    """u^T B v: the g-weighted form (sign-indefinite when g changes sign)."""
    u = _check_vector(pair, u)
    v = u if v is None else _check_vector(pair, v)
    return float(u @ (pair.B @ v))


def hardy_inner(pair, u, v=None):
    """u^T H v: the form with kernel |x|^(alpha-2)."""
    u = _check_vector(pair, u)
    v = u if v is None else _check_vector(pair, v)
    return float(u @ (pair.H @ v))


def mass_plus_inner(pair, u, v=None):
    """Quadrature of g^+ u v, on the same points as the mass matrix."""
    if pair.gplus_quad is None:
        raise AssemblyError("pair carries no weight data (built from bare matrices)")
    u = _check_vector(pair, u)
    v = u if v is None else _check_vector(pair, v)
    pu = pair.interp @ u
    pv = pu if v is u else pair.interp @ v
    return float(np.sum(pair.quad_weights * pair.gplus_quad * pu * pv))


def volume_integral(pair, u):
    """Quadrature of u over the truncated domain."""
    u = _check_vector(pair, u)
    return float(np.sum(pair.quad_weights * (pair.interp @ u)))


def lp_norm(pair, u, p):
    """(sum_q w_q |u(x_q)|^p)^(1/p) with the pair's volume quadrature."""
    if p < 1.0:
        raise ValueError("lp_norm needs p >= 1")
    u = _check_vector(pair, u)
    vals = np.abs(pair.interp @ u)
    return float(np.sum(pair.quad_weights * vals**p) ** (1.0 / p))


def _eval_weight_per_element(spec, radii_by_element, fn):
    """Evaluate fn(spec, radii) and, on range errors, name the offending element."""
    try:
        return fn(spec, radii_by_element.ravel())
    except WeightDomainError:
        for e in range(radii_by_element.shape[0]):
            try:
                fn(spec, radii_by_element[e])
            except WeightDomainError as exc:
                raise AssemblyError(f"weight evaluation failed on element {e}: {exc}") from exc
        raise


def assemble_radial(mesh, N, alpha, spec):
    """P1 assembly of A, B, H on a radial mesh, reduced over radial functions.

    The stiffness integrand r^(alpha+N-1) phi_i' phi_j' is a monomial times
    constants, so element stiffness entries use the exact antiderivative
    r^(alpha+N)/(alpha+N). Mass and Hardy integrands carry user weights and
    use a fixed Gauss rule per element. The unit-sphere surface factor
    multiplies all volume terms so the matrices represent genuine R^N
    integrals (eigenvalue quotients do not see it; inequality constants do).
    The node at r = R is eliminated (Dirichlet); r = 0 keeps its natural
    degree of freedom.
    """
    if N < 3:
        raise AssemblyError("radial assembly needs N >= 3")
    if not 0.0 < alpha < 2.0:
        raise AssemblyError("alpha must lie in (0, 2)")
    nodes = mesh.nodes
    M = mesh.num_elements
    ndof = M  # nodes 0 .. M-1
    omega = sphere_area(N)
    h = mesh.element_sizes

    # stiffness: exact monomial integrals
    p = alpha + N
    moment = omega * (nodes[1:] ** p - nodes[:-1] ** p) / p  # integral of r^(p-1) per element
    s = moment / h**2
    rows, cols, vals = [], [], []
    idx = np.arange(M)
    rows.append(idx)
    cols.append(idx)
    vals.append(s)  # phi_i' * phi_i' on element i
    left = idx[1:]  # element i also couples node i+1 when it is a dof
    rows.append(left)
    cols.append(left)
    vals.append(s[:-1])
    rows.append(idx[:-1])
    cols.append(left)
    vals.append(-s[:-1])
    rows.append(left)
    cols.append(idx[:-1])
    vals.append(-s[:-1])
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ndof, ndof),
    )
    A = _symmetrized(A)

    # shared volume quadrature: Gauss points per element
    gx, gw = gauss_rule(MASS_GAUSS_ORDER)
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    half = 0.5 * h
    qr = (mid[:, None] + half[:, None] * gx[None, :])  # (M, G)
    qw = (half[:, None] * gw[None, :]) * omega * qr ** (N - 1)

    g_q = np.asarray(_eval_weight_per_element(spec, qr, weight_value), dtype=float)
    gplus_q = np.asarray(_eval_weight_per_element(spec, qr, weight_positive_part), dtype=float)

    # interpolation from dofs to quadrature points
    G = MASS_GAUSS_ORDER
    nq = M * G
    phi_left = ((nodes[1:, None] - qr) / h[:, None]).ravel()
    phi_right = ((qr - nodes[:-1, None]) / h[:, None]).ravel()
    q_index = np.arange(nq)
    elem_of_q = q_index // G
    erows = [q_index]
    ecols = [elem_of_q]
    evals = [phi_left]
    inner = elem_of_q < M - 1  # right node of the last element is the boundary
    erows.append(q_index[inner])
    ecols.append(elem_of_q[inner] + 1)
    evals.append(phi_right[inner])
    E = sp.coo_matrix(
        (np.concatenate(evals), (np.concatenate(erows), np.concatenate(ecols))),
        shape=(nq, ndof),
    ).tocsr()

    w_flat = qw.ravel()
    B = _symmetrized(E.T @ sp.diags(w_flat * g_q) @ E)
    hardy_kernel = qr.ravel() ** (alpha - 2.0)
    H = _symmetrized(E.T @ sp.diags(w_flat * hardy_kernel) @ E)

    return DiscreteOperatorPair(
        A=A, B=B, H=H,
        quad_radii=qr.ravel(), quad_weights=w_flat, interp=E,
        g_quad=g_q, gplus_quad=gplus_q,
        geometry=mesh, N=N, alpha=alpha, mode="radial",
        dof_positions=nodes[:-1].copy(),
    )


def _sym_norm(points):
    """Euclidean norms computed invariantly under coordinate permutations
    (squares summed in sorted order), so symmetric grids assemble to exactly
    symmetric matrices."""
    sq = np.sort(points**2, axis=-1)
    return np.sqrt(sq.sum(axis=-1))


def origin_cell_kernel_integral(hs, alpha):
    """Exact integral of |x|^(alpha-2) over the cube [-hs/2, hs/2]^3.

    Radial integration first reduces the integral to the cube surface:
    6 a / (alpha+1) * int_{[-a,a]^2} (u^2 + v^2 + a^2)^((alpha-2)/2) du dv
    with a = hs/2. The surface integrand is smooth, so a tensor Gauss rule
    is effectively exact. Finite because alpha - 2 > -3.
    """
    a = 0.5 * hs
    x, w = gauss_rule(32)
    u = a * x  # map [-1,1] -> [-a,a], jacobian a per axis
    U, V = np.meshgrid(u, u, indexing="ij")
    vals = (U**2 + V**2 + a**2) ** ((alpha - 2.0) / 2.0)
    surf = a * a * float(w @ vals @ w)
    return 6.0 * a / (alpha + 1.0) * surf


def assemble_grid3d(grid, alpha, spec):
    """7-point flux discretization on the cube grid (N = 3 only).

    The face coefficient between two adjacent nodes is |x|^alpha at the face
    midpoint; the six faces of the origin-centered cell instead use the exact
    radial average of the power over [0, hs], which keeps the conservation
    form nondegenerate at the singular node. B and H are lumped diagonal;
    the origin's Hardy weight is the exact cell integral of the kernel.
    """
    if not 0.0 < alpha < 2.0:
        raise AssemblyError("alpha must lie in (0, 2)")
    n = grid.n
    hs = grid.hs
    ax = grid.axis
    origin_flat = ((n - 1) // 2 * n + (n - 1) // 2) * n + (n - 1) // 2

    dof_index = -np.ones((n, n, n), dtype=np.int64)
    dof_index[1:-1, 1:-1, 1:-1] = np.arange(grid.num_interior).reshape(
        (n - 2, n - 2, n - 2)
    )
    dof_flat = dof_index.ravel()

    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    coords = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    rows, cols, vals = [], [], []
    face = np.zeros((grid.num_interior, 6))  # per-node face coefficients
    strides = (n * n, n, 1)
    for axis in range(3):
        sl = [slice(None)] * 3
        sl[axis] = slice(0, n - 1)
        p = np.arange(n**3).reshape((n, n, n))[tuple(sl)].ravel()
        q = p + strides[axis]
        mids = 0.5 * (coords[p] + coords[q])
        c = hs * _sym_norm(mids) ** alpha
        incident_origin = (p == origin_flat) | (q == origin_flat)
        c[incident_origin] = hs * hs**alpha / (alpha + 1.0)
        dp, dq = dof_flat[p], dof_flat[q]
        both = (dp >= 0) & (dq >= 0)
        face[dp[dp >= 0], 2 * axis] = c[dp >= 0]
        face[dq[dq >= 0], 2 * axis + 1] = c[dq >= 0]
        rows.extend([dp[both], dq[both]])
        cols.extend([dq[both], dp[both]])
        vals.extend([-c[both], -c[both]])
    rows.append(np.arange(grid.num_interior))
    cols.append(np.arange(grid.num_interior))
    # sorted accumulation keeps the diagonal exactly symmetric under
    # coordinate permutations of the grid
    vals.append(np.sort(face, axis=1).sum(axis=1))
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.num_interior, grid.num_interior),
    )
    A = _symmetrized(A)

    pts = grid.interior_points()
    radii = _sym_norm(pts)
    cell = hs**3
    try:
        g_nodes = np.asarray(weight_value(spec, radii), dtype=float)
        gplus_nodes = np.asarray(weight_positive_part(spec, radii), dtype=float)
    except WeightDomainError as exc:
        raise AssemblyError(f"weight evaluation failed on the grid: {exc}") from exc
    B = sp.diags(cell * g_nodes, format="csr")

    hardy = np.zeros_like(radii)
    nz = radii > 0.0
    hardy[nz] = radii[nz] ** (alpha - 2.0) * cell
    hardy[~nz] = origin_cell_kernel_integral(hs, alpha)
    H = sp.diags(hardy, format="csr")

    return DiscreteOperatorPair(
        A=A, B=B, H=H,
        quad_radii=radii, quad_weights=np.full(grid.num_interior, cell),
        interp=sp.identity(grid.num_interior, format="csr"),
        g_quad=g_nodes, gplus_quad=gplus_nodes,
        geometry=grid, N=3, alpha=alpha, mode="grid3d",
        dof_positions=pts,
    )


def export_coo(mat, path):
    """Write a sparse matrix as sorted 0-based 'i j value' triples."""
    coo = sp.csr_matrix(mat).tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{i} {j} {v:.17g}\n")
