"""Reference-triangle machinery: polynomial bases, quadrature, and moment families.

Everything in this module lives on the reference triangle

    That = conv{(0,0), (1,0), (0,1)}

with vertices V0=(0,0), V1=(1,0), V2=(0,1) and the opposite-vertex edge
convention: edge i is the edge not containing vertex i,

    e0: V1 -> V2,   e1: V2 -> V0,   e2: V0 -> V1.

Scalar/vector polynomials are stored as coefficient tables over the monomial
dictionary {x^i y^j : i+j <= degree}, ordered by total degree.  All reference
bases are immutable after construction and safe for concurrent reads.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

R_MAX = 6  # default cap on the local polynomial order map

VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
EDGE_VERTICES = ((1, 2), (2, 0), (0, 1))  # edge i opposite vertex i
EDGE_NORMALS = np.array([
    [1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)],
    [-1.0, 0.0],
    [0.0, -1.0],
])
EDGE_LENGTHS = np.array([math.sqrt(2.0), 1.0, 1.0])


class SpecError(ValueError):
    """Raised for infeasible space specifications (e.g. minimum-rule violations)."""


# ---------------------------------------------------------------------------
# monomial dictionary
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def monomial_exponents(degree):
    """Exponent pairs (i, j) with i+j <= degree, ordered by total degree."""
    exps = []
    for d in range(degree + 1):
        for i in range(d, -1, -1):
            exps.append((i, d - i))
    return tuple(exps)


def n_poly(degree):
    """dim P_degree(That) = (degree+1)(degree+2)/2."""
    return (degree + 1) * (degree + 2) // 2


def monomial_integral(i, j):
    """Exact integral of x^i y^j over the reference triangle."""
    return math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)


@lru_cache(maxsize=None)
def monomial_gram(degree):
    """Exact L2(That) Gram matrix of the monomial dictionary."""
    exps = monomial_exponents(degree)
    n = len(exps)
    G = np.empty((n, n))
    for a, (ia, ja) in enumerate(exps):
        for b, (ib, jb) in enumerate(exps):
            G[a, b] = monomial_integral(ia + ib, ja + jb)
    return G


def monomial_vandermonde(degree, points):
    """Values of every monomial of the dictionary at `points` (npts, 2)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    exps = monomial_exponents(degree)
    px = points[:, 0][:, None] ** np.array([e[0] for e in exps])[None, :]
    py = points[:, 1][:, None] ** np.array([e[1] for e in exps])[None, :]
    return px * py  # (npts, nmono)


@lru_cache(maxsize=None)
def monomial_diff_matrix(degree, axis):
    """Matrix D with (D @ coeffs) = coeffs of the derivative, same dictionary."""
    exps = monomial_exponents(degree)
    index = {e: k for k, e in enumerate(exps)}
    n = len(exps)
    D = np.zeros((n, n))
    for k, (i, j) in enumerate(exps):
        if axis == 0 and i > 0:
            D[index[(i - 1, j)], k] = i
        elif axis == 1 and j > 0:
            D[index[(i, j - 1)], k] = j
    return D


def monomial_multiply(coeffs_a, deg_a, coeffs_b, deg_b):
    """Coefficients of the product polynomial over the degree deg_a+deg_b dictionary."""
    exps_a = monomial_exponents(deg_a)
    exps_b = monomial_exponents(deg_b)
    out_index = {e: k for k, e in enumerate(monomial_exponents(deg_a + deg_b))}
    out = np.zeros(len(out_index))
    for ka, (ia, ja) in enumerate(exps_a):
        ca = coeffs_a[ka]
        if ca == 0.0:
            continue
        for kb, (ib, jb) in enumerate(exps_b):
            out[out_index[(ia + ib, ja + jb)]] += ca * coeffs_b[kb]
    return out


def embed_coeffs(coeffs, deg_from, deg_to):
    """Zero-pad monomial coefficients from a lower- to a higher-degree dictionary."""
    coeffs = np.asarray(coeffs, dtype=float)
    if deg_from == deg_to:
        return coeffs
    out_shape = coeffs.shape[:-1] + (n_poly(deg_to),)
    out = np.zeros(out_shape)
    out[..., : n_poly(deg_from)] = coeffs
    return out


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadRule:
    """Quadrature on That: cartesian points, weights summing to 1/2, exactness degree."""

    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def barycentric(self):
        x, y = self.points[:, 0], self.points[:, 1]
        return np.column_stack([1.0 - x - y, x, y])


# symmetric rules (barycentric orbits): degree -> [(weight_fraction, orbit)]
# weights are fractions of the triangle area; orbits are permutation classes.
_SYMMETRIC_TABLE = {
    1: [(1.0, (1 / 3, 1 / 3, 1 / 3))],
    2: [(1 / 3, (2 / 3, 1 / 6, 1 / 6))],
    3: [(-0.5625, (1 / 3, 1 / 3, 1 / 3)),
        (0.5208333333333333, (0.6, 0.2, 0.2))],
    4: [(0.2233815896780115, (0.108103018168070, 0.445948490915965, 0.445948490915965)),
        (0.1099517436553219, (0.816847572980459, 0.091576213509771, 0.091576213509771))],
    5: [(0.225, (1 / 3, 1 / 3, 1 / 3)),
        (0.1323941527885062, (0.059715871789770, 0.470142064105115, 0.470142064105115)),
        (0.1259391805448272, (0.797426985353087, 0.101286507323456, 0.101286507323456))],
}


def _orbit_points(bary):
    """Distinct permutations of a barycentric triple."""
    seen, pts = set(), []
    for perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2)):
        p = tuple(round(bary[i], 15) for i in perm)
        if p not in seen:
            seen.add(p)
            pts.append(p)
    return pts


@lru_cache(maxsize=None)
def _collapsed_rule(degree):
    """Tensorized Gauss rule through the collapsed-square (Duffy) map, exact to `degree`."""
    n = degree // 2 + 1
    ga, wa = roots_jacobi(n, 1.0, 0.0)        # weight (1-a) on [-1,1]
    gb, wb = leggauss(n)
    a = 0.5 * (ga + 1.0)
    b = 0.5 * (gb + 1.0)
    wa = wa / 4.0                              # map weight incl. (1-a) Jacobian factor
    wb = wb / 2.0
    A, B = np.meshgrid(a, b, indexing="ij")
    WA, WB = np.meshgrid(wa, wb, indexing="ij")
    x = A.ravel()
    y = (B * (1.0 - A)).ravel()
    w = (WA * WB).ravel()
    return np.column_stack([x, y]), w


def quadrature(degree, r_max=R_MAX):
    """Quadrature rule on That exact for polynomials up to `degree`.

    Symmetric table rules for low degrees, collapsed tensor Gauss beyond.
    """
    if degree < 0 or degree > 2 * r_max + 6:
        raise SpecError(f"quadrature degree {degree} outside supported range "
                        f"[0, {2 * r_max + 6}]")
    degree = max(degree, 1)
    if degree in _SYMMETRIC_TABLE:
        pts, wts = [], []
        for wfrac, bary in _SYMMETRIC_TABLE[degree]:
            for b in _orbit_points(bary):
                pts.append([b[1], b[2]])  # bary (l0,l1,l2) -> cartesian (x,y)=(l1,l2)
                wts.append(0.5 * wfrac)
        return QuadRule(np.array(pts), np.array(wts), degree)
    pts, wts = _collapsed_rule(degree)
    return QuadRule(pts, wts, degree)


def gauss01(n):
    """n-point Gauss-Legendre rule on [0,1]."""
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def edge_points(edge, s):
    """Points zeta_edge(s) on That for parameters s in [0,1]."""
    a, b = EDGE_VERTICES[edge]
    s = np.asarray(s, dtype=float)[:, None]
    return (1.0 - s) * VERTICES[a] + s * VERTICES[b]


def legendre01(k, s):
    """Shifted Legendre polynomials L_0..L_k on [0,1], orthonormal, at points s."""
    s = np.asarray(s, dtype=float)
    out = np.empty((k + 1, s.size))
    t = 2.0 * s - 1.0
    p_prev = np.ones_like(t)
    out[0] = p_prev
    if k >= 1:
        p = t.copy()
        out[1] = p
        for n in range(1, k):
            p_next = ((2 * n + 1) * t * p - n * p_prev) / (n + 1)
            p_prev, p = p, p_next
            out[n + 1] = p
    scale = np.sqrt(2.0 * np.arange(k + 1) + 1.0)
    return out * scale[:, None]


# ---------------------------------------------------------------------------
# basis containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceMeta:
    kind: str          # 'vertex' | 'edge' | 'interior' | 'cell'
    entity: int = -1   # vertex or edge index when applicable
    degree: int = -1   # edge-trace polynomial degree for edge functions


@dataclass(frozen=True)
class ScalarBasis:
    """Scalar polynomial basis over the monomial dictionary of `degree`."""

    degree: int
    coeffs: np.ndarray               # (nf, nmono)
    trace_meta: tuple = field(default=())

    def __len__(self):
        return self.coeffs.shape[0]

    def eval(self, points):
        return self.coeffs @ monomial_vandermonde(self.degree, points).T

    def grad(self, points):
        V = monomial_vandermonde(self.degree, points)
        dx = self.coeffs @ monomial_diff_matrix(self.degree, 0) @ V.T
        dy = self.coeffs @ monomial_diff_matrix(self.degree, 1) @ V.T
        return np.stack([dx, dy], axis=-1)  # (nf, npts, 2)

    def curl(self, points):
        """curl u = (du/dy, -du/dx) as vector fields, shape (nf, npts, 2)."""
        g = self.grad(points)
        return np.stack([g[..., 1], -g[..., 0]], axis=-1)

    def curl_coeffs(self):
        """Monomial coefficients of curl of each function (nf, 2, nmono)."""
        dx = self.coeffs @ monomial_diff_matrix(self.degree, 0).T
        dy = self.coeffs @ monomial_diff_matrix(self.degree, 1).T
        return np.stack([dy, -dx], axis=1)

    def gram(self):
        M = monomial_gram(self.degree)
        return self.coeffs @ M @ self.coeffs.T


@dataclass(frozen=True)
class VectorBasis:
    """Vector polynomial basis; coefficient tensor (nf, 2, nmono)."""

    degree: int
    coeffs: np.ndarray
    trace_meta: tuple = field(default=())

    def __len__(self):
        return self.coeffs.shape[0]

    def eval(self, points):
        V = monomial_vandermonde(self.degree, points)
        return np.einsum("fcm,pm->fpc", self.coeffs, V)

    def div(self, points):
        V = monomial_vandermonde(self.degree, points)
        c = self.div_coeffs()
        return c @ V[:, : c.shape[1]].T

    def div_coeffs(self):
        """Monomial coefficients (degree-1 dictionary) of the divergence."""
        dx = monomial_diff_matrix(self.degree, 0)
        c = self.coeffs[:, 0, :] @ dx.T + self.coeffs[:, 1, :] @ monomial_diff_matrix(self.degree, 1).T
        return c[:, : n_poly(max(self.degree - 1, 0))]

    def jacobian(self, points):
        """Gradients d(omega_c)/dx_d, shape (nf, npts, 2, 2) with [c, d] layout."""
        V = monomial_vandermonde(self.degree, points)
        out = np.empty((len(self), V.shape[0], 2, 2))
        for d in range(2):
            D = monomial_diff_matrix(self.degree, d)
            out[..., d] = np.einsum("fcm,pm->fpc", self.coeffs @ D.T, V)
        return out

    def gram(self):
        M = monomial_gram(self.degree)
        return np.einsum("fcm,mn,gcn->fg", self.coeffs, M, self.coeffs)

    def normal_trace_moments(self, edge, max_k):
        """Moments int_0^1 (omega . n_edge)(zeta(s)) Lk(s) ds for k=0..max_k."""
        npts = self.degree + max_k + 2
        s, w = gauss01(npts)
        vals = self.eval(edge_points(edge, s))          # (nf, npts, 2)
        normal = vals @ EDGE_NORMALS[edge]              # (nf, npts)
        L = legendre01(max_k, s)                        # (k+1, npts)
        return normal @ (L * w).T                       # (nf, k+1)


def gram_diagnostics(G):
    """(condition number, smallest singular value of the normalized Gram)."""
    d = np.sqrt(np.diag(G))
    Gn = G / np.outer(d, d)
    sv = np.linalg.svd(Gn, compute_uv=False)
    return sv[0] / sv[-1], sv[-1]


# ---------------------------------------------------------------------------
# scalar bases
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def orthonormal_scalar_basis(order):
    """L2(That)-orthonormal basis of P_order, first function the positive constant.

    Built by QR of a weighted Vandermonde at a degree-2*order rule, which keeps
    the construction well conditioned up to the orders used here.
    """
    rule = quadrature(min(2 * order, 2 * R_MAX + 6), r_max=max(R_MAX, order))
    V = monomial_vandermonde(order, rule.points) * np.sqrt(rule.weights)[:, None]
    _, R = np.linalg.qr(V)
    signs = np.sign(np.diag(R))
    signs[signs == 0.0] = 1.0
    coeffs = np.linalg.solve(R, np.diag(signs)).T  # rows = ON functions
    meta = tuple(TraceMeta("cell") for _ in range(coeffs.shape[0]))
    return ScalarBasis(order, coeffs, meta)


@lru_cache(maxsize=None)
def mean_free_scalar_basis(order):
    """Orthonormal basis of P_order / R (mean-zero complement of constants)."""
    base = orthonormal_scalar_basis(order)
    return ScalarBasis(order, base.coeffs[1:], base.trace_meta[1:])


def _jacobi_kernel(n, points):
    """Jacobi(1,1) polynomial values used as hierarchical edge kernels."""
    from scipy.special import eval_jacobi
    return eval_jacobi(n, 1.0, 1.0, points)


@lru_cache(maxsize=None)
def hierarchical_scalar_basis(order, edge_orders=None):
    """Hierarchical vertex/edge/interior basis of the variable-order Lambda0 space.

    `edge_orders` are the trace orders per edge (default: uniform = order).
    Requires every edge order >= 1; the artifact only ever uses >= 2 here.
    """
    if edge_orders is None:
        edge_orders = (order, order, order)
    if order == 0:
        return ScalarBasis(0, np.array([[1.0]]), (TraceMeta("cell"),))
    if min(edge_orders) < 1:
        raise SpecError("hierarchical Lambda0 basis needs edge orders >= 1")
    if max(edge_orders) > order:
        raise SpecError("minimum rule violated: edge order above interior order")

    nmono = n_poly(order)
    lam = np.zeros((3, n_poly(1)))
    lam[0, :3] = [1.0, -1.0, -1.0]   # 1 - x - y
    lam[1, 2] = 1.0                  # wait: dictionary order is (0,0),(1,0),(0,1)
    lam[1] = [0.0, 1.0, 0.0]         # x
    lam[2] = [0.0, 0.0, 1.0]         # y

    rows, meta = [], []
    for v in range(3):
        rows.append(embed_coeffs(lam[v], 1, order))
        meta.append(TraceMeta("vertex", v))
    for e, (a, b) in enumerate(EDGE_VERTICES):
        prod = monomial_multiply(lam[a], 1, lam[b], 1)
        diff = lam[b] - lam[a]
        for k in range(2, edge_orders[e] + 1):
            kernel = np.zeros(1)
            kernel[0] = 1.0
            kdeg = 0
            # kernel polynomial q_{k-2}(lam_b - lam_a) via recurrence on powers
            q = np.polynomial.polynomial.polyfromroots([])  # placeholder
            # build Jacobi(1,1) kernel in the scalar variable t, then compose
            from scipy.special import jacobi
            jp = jacobi(k - 2, 1.0, 1.0)
            comp = np.zeros(n_poly(order))
            tpow_coeffs = np.zeros(1)
            tpow = np.array([1.0])
            tdeg = 0
            for p, c in enumerate(jp.coefficients[::-1]):  # ascending powers of t
                comp[: n_poly(tdeg + 2)] += c * embed_coeffs(
                    monomial_multiply(prod, 2, tpow, tdeg), tdeg + 2, tdeg + 2)
                comp = embed_coeffs(comp[: n_poly(order)], order, order)
                if p < len(jp.coefficients) - 1:
                    tpow = monomial_multiply(tpow, tdeg, diff, 1)
                    tdeg += 1
            rows.append(comp)
            meta.append(TraceMeta("edge", e, k))
    bubble = monomial_multiply(monomial_multiply(lam[0], 1, lam[1], 1), 2, lam[2], 1)
    if order >= 3:
        interior = orthonormal_scalar_basis(order - 3)
        for c in interior.coeffs:
            rows.append(embed_coeffs(monomial_multiply(bubble, 3, embed_coeffs(c, order - 3, order - 3), order - 3), order, order))
            meta.append(TraceMeta("interior"))
    coeffs = np.vstack([embed_coeffs(r, order, order)[None, : nmono] if r.size != nmono else r[None, :] for r in rows])
    return ScalarBasis(order, coeffs, tuple(meta))


def scalar_basis(order):
    """Hierarchical basis of P_order(That) (vertex/edge/interior classified)."""
    return hierarchical_scalar_basis(order)


# ---------------------------------------------------------------------------
# vector spaces with edge-trace constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolySpaceSpec:
    """Specification of a reference polynomial space with per-edge trace orders."""

    form_kind: str                    # 'L0' | 'L1' | 'L1minus' | 'L2'
    order: int                        # interior order r(That)
    edge_orders: tuple = None         # r(e0), r(e1), r(e2); default uniform
    r_max: int = R_MAX

    def __post_init__(self):
        if self.edge_orders is None:
            object.__setattr__(self, "edge_orders", (self.order,) * 3)

    def validate(self):
        if self.form_kind not in ("L0", "L1", "L1minus", "L2"):
            raise SpecError(f"unknown form kind {self.form_kind!r}")
        if self.order < 0 or min(self.edge_orders) < 0:
            raise SpecError("orders must be non-negative")
        if self.order > self.r_max:
            raise SpecError(f"order {self.order} exceeds r_max={self.r_max}")
        if max(self.edge_orders) > self.order:
            raise SpecError("minimum rule violated: edge order above interior order")


def _big_space_coeffs(kind, order):
    """Unconstrained dictionary for the uniform-order parent space.

    L1:      [P_order]^2 from orthonormal scalars.
    L1minus: [P_{order-1}]^2 plus (x,y)^T times homogeneous degree order-1.
    Returns a (nf, 2, nmono) tensor over the degree-`order` dictionary.
    """
    if kind == "L1":
        base = orthonormal_scalar_basis(order)
        n = len(base)
        coeffs = np.zeros((2 * n, 2, n_poly(order)))
        coeffs[:n, 0, :] = base.coeffs
        coeffs[n:, 1, :] = base.coeffs
        return coeffs
    # Raviart-Thomas style space of index `order`
    r = order
    base = orthonormal_scalar_basis(r - 1)
    n = len(base)
    nmono = n_poly(r)
    funcs = np.zeros((2 * n + r, 2, nmono))
    funcs[:n, 0, : n_poly(r - 1)] = base.coeffs
    funcs[n: 2 * n, 1, : n_poly(r - 1)] = base.coeffs
    exps = monomial_exponents(r)
    index = {e: k for k, e in enumerate(exps)}
    for k in range(r):            # homogeneous h = x^(r-1-k) y^k, field (x h, y h)
        f = funcs[2 * n + k]
        f[0, index[(r - k, k)]] = 1.0
        f[1, index[(r - 1 - k, k + 1)]] = 1.0
    return funcs


@lru_cache(maxsize=None)
def vector_space(spec):
    """Basis of the constrained reference space described by `spec`.

    For L1/L1minus the result is classified into per-edge normal-trace
    functions (dual to Legendre moments in the edge parameter) and interior
    functions with vanishing normal trace on all of dThat.
    """
    spec.validate()
    if spec.form_kind == "L2":
        return orthonormal_scalar_basis(spec.order)
    if spec.form_kind == "L0":
        return hierarchical_scalar_basis(spec.order, spec.edge_orders)

    if spec.form_kind == "L1":
        R = spec.order
        trace_orders = spec.edge_orders          # omega.n on edge e in P_{r(e)}
        full_trace_deg = R
    else:
        R = spec.order
        trace_orders = tuple(o - 1 for o in spec.edge_orders)
        full_trace_deg = R - 1
        if R < 1:
            raise SpecError("L1minus requires order >= 1")

    big = _big_space_coeffs(spec.form_kind, R)
    parent = VectorBasis(R, big)
    nf = len(parent)

    if spec.form_kind == "L1" and R == 0:
        return VectorBasis(0, big, tuple(TraceMeta("cell") for _ in range(nf)))

    # moment matrix: all edge normal-trace Legendre moments up to the full
    # unconstrained trace degree
    blocks, row_meta = [], []
    for e in range(3):
        M = parent.normal_trace_moments(e, full_trace_deg)  # (nf, deg+1)
        blocks.append(M.T)
        row_meta.extend((e, k) for k in range(full_trace_deg + 1))
    N = np.vstack(blocks)                                   # (nrows, nf)

    keep = [i for i, (e, k) in enumerate(row_meta) if k <= trace_orders[e]]
    drop = [i for i, (e, k) in enumerate(row_meta) if k > trace_orders[e]]

    # interior functions: orthonormal null space of every trace moment
    u, s, vt = np.linalg.svd(N)
    rank = int(np.sum(s > s[0] * 1e-12))
    interior = vt[rank:]                                    # (nint, nf) coefficient rows

    rows, meta = [], []
    if keep:
        targets = np.zeros((N.shape[0], len(keep)))
        for col, i in enumerate(keep):
            targets[i, col] = 1.0
        sol, *_ = np.linalg.lstsq(N, targets, rcond=None)
        # project out any drop-row residual (exact when the trace map is onto)
        resid = np.abs(N[drop] @ sol).max() if drop else 0.0
        if resid > 1e-9:
            raise SpecError(f"edge-trace constraint system inconsistent ({resid:.2e})")
        for col, i in enumerate(keep):
            e, k = row_meta[i]
            rows.append(sol[:, col])
            meta.append(TraceMeta("edge", e, k))
    for row in interior:
        rows.append(row)
        meta.append(TraceMeta("interior"))

    combo = np.array(rows)                                  # (nfuncs, nf)
    coeffs = np.einsum("gf,fcm->gcm", combo, big)
    return VectorBasis(R, coeffs, tuple(meta))


def space_dimension(spec):
    return len(vector_space(spec))


# ---------------------------------------------------------------------------
# bubbles and the h-family
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def bubble_scalar_coeffs():
    """Monomial coefficients (degree 3) of the cubic bubble lam0*lam1*lam2."""
    lam0 = np.array([1.0, -1.0, -1.0])
    lam1 = np.array([0.0, 1.0, 0.0])
    lam2 = np.array([0.0, 0.0, 1.0])
    return monomial_multiply(monomial_multiply(lam0, 1, lam1, 1), 2, lam2, 1)


@lru_cache(maxsize=None)
def bubble_curl_basis(order):
    """Basis of curl P̊_order(That): (order-1)(order-2)/2 divergence-free fields."""
    if order < 3:
        return VectorBasis(max(order - 1, 0),
                           np.zeros((0, 2, n_poly(max(order - 1, 0)))), ())
    chi = bubble_scalar_coeffs()
    inner = orthonormal_scalar_basis(order - 3)
    rows = np.array([monomial_multiply(chi, 3, embed_coeffs(c, order - 3, order - 3), order - 3)
                     for c in inner.coeffs])
    bubbles = ScalarBasis(order, rows, tuple(TraceMeta("interior") for _ in range(len(inner))))
    curls = bubbles.curl_coeffs()[:, :, : n_poly(order - 1)]
    return VectorBasis(order - 1, curls,
                       tuple(TraceMeta("interior") for _ in range(len(inner))))


@dataclass(frozen=True)
class HFamily:
    """One-parameter interior moment family h_i(., t) = (1-t) f_i + t g_i."""

    order: int                 # r(That) of the underlying order map
    f_basis: VectorBasis       # basis of curl P̊_{r+1}
    g_basis: VectorBasis       # complement of grad P_r inside [P_{r-1}]^2
    k: int

    def h_basis(self, t):
        if not 0.0 <= t <= 1.0:
            raise SpecError("t must lie in [0,1]")
        if self.k == 0:
            return VectorBasis(self.f_basis.degree, self.f_basis.coeffs, ())
        deg = max(self.f_basis.degree, self.g_basis.degree)
        cf = embed_coeffs(self.f_basis.coeffs, self.f_basis.degree, deg)
        cg = embed_coeffs(self.g_basis.coeffs, self.g_basis.degree, deg)
        return VectorBasis(deg, (1.0 - t) * cf + t * cg)


@lru_cache(maxsize=None)
def h_family(order):
    """HFamily for interior order r = `order` (k = r(r-1)/2)."""
    r = order
    f = bubble_curl_basis(r + 1)
    k = len(f)
    if k == 0:
        g = VectorBasis(0, np.zeros((0, 2, 1)), ())
        return HFamily(r, f, g, 0)

    # g: L2-orthogonal complement of grad P_r inside [P_{r-1}]^2, expressed in
    # the orthonormal vector dictionary so Euclidean coordinates are L2 ones.
    base = orthonormal_scalar_basis(r - 1)
    nb = len(base)
    dict_coeffs = np.zeros((2 * nb, 2, n_poly(r - 1)))
    dict_coeffs[:nb, 0, :] = base.coeffs
    dict_coeffs[nb:, 1, :] = base.coeffs

    grads = orthonormal_scalar_basis(r).grad  # gradients live in [P_{r-1}]^2
    gcoeff = np.zeros((len(orthonormal_scalar_basis(r)) - 1, 2, n_poly(r - 1)))
    on_r = orthonormal_scalar_basis(r)
    dx = on_r.coeffs @ monomial_diff_matrix(r, 0).T
    dy = on_r.coeffs @ monomial_diff_matrix(r, 1).T
    gcoeff[:, 0, :] = dx[1:, : n_poly(r - 1)]
    gcoeff[:, 1, :] = dy[1:, : n_poly(r - 1)]

    # coordinates of the gradients in the ON dictionary
    M = monomial_gram(r - 1)
    coords = np.einsum("fcm,mn,gcn->gf", dict_coeffs, M, gcoeff)  # (ngrad, 2nb)
    u, s, vt = np.linalg.svd(coords)
    rank = int(np.sum(s > s[0] * 1e-12))
    comp = vt[rank:]
    assert comp.shape[0] == k, (comp.shape, k)
    gfields = np.einsum("gf,fcm->gcm", comp, dict_coeffs)
    g = VectorBasis(r - 1, gfields)
    return HFamily(r, f, g, k)
