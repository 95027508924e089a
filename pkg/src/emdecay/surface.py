"""Discretized surface-mode eigensolver on a triangulated closed surface.

Two operators are built on the vertex space of a mesh:

* the generalized surface Laplacian, a cotangent-weight Laplace-Beltrami
  matrix scaled by -mu_c sqrt(D_c) and normalized by lumped vertex areas
  so it acts on point values;

* the exterior Neumann-to-Dirichlet (NtD) map: given f = -n.grad(Phi) on
  the surface it returns the trace of the exterior harmonic potential Phi
  that decays at infinity. It is realized by a single-layer boundary
  integral with vertex collocation: far triangle pairs use a one-point
  centroid rule, triangles incident to the collocation vertex use the
  analytic flat-triangle potential, and the adjoint double-layer diagonal
  is closed by the row-sum identity (rows sum to -1/2 for a closed
  surface).

Scalar surface modes solve kappa psi = L psi with
L = -(NtD) mu_b^{-1} L_Delta. The raw composition on the full vertex
space is polluted by grid-scale oscillations: the quadrature NtD is
nearly null on them, and the Laplacian is largest there, so their
products form spurious small eigenvalues below the physical spectrum.
The solve therefore projects onto a Laplace-Beltrami eigenspace spanning
the smooth end of the spectrum (a Rayleigh-Ritz reduction) before the
dense nonsymmetric eigensolve; physical eigenvalues at the acceptance
mesh sizes are unchanged by the projection at the percent level while
the spurious modes are excluded by construction.

The transverse modes are plain Laplace-Beltrami eigenpairs scaled by
1/(mu_c sqrt(D_c)).

Sphere oracle: kappa_lm = l * mu_c sqrt(D_c) / (mu_b * r) with
multiplicity 2l+1, NtD eigenvalue r/(l+1), lambda_lm = l(l+1)/(r^2 mu_c
sqrt(D_c)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import get_lapack_funcs
from scipy.sparse import coo_matrix, csr_matrix, diags
from scipy.sparse.linalg import eigsh

from .earlytime import ModeAmplitudes
from .errors import NumericError
from .mesh import SurfaceMesh
from .params import TargetParams, derive_timescales

_DENSE_VERTEX_CAP = 3200  # dense BEM + eigensolve stay desk-scale
_CLUSTER_REL_TOL = 0.02  # eigenvalues within 2% belong to one multiplet


@dataclass(frozen=True)
class SurfaceOperator:
    """Dense operator over mesh vertices with unit and symmetry metadata."""

    matrix: np.ndarray
    units: str
    symmetric: bool


@dataclass(frozen=True)
class SurfaceModeBasis:
    """Discretized surface-mode eigenpairs on a mesh.

    kappa/psi hold the scalar modes (constant mode excluded), lam/phi the
    transverse Laplace-Beltrami modes (constant included, eigenvalue 0).
    Either family may be absent depending on which solver produced the
    basis. Eigenvectors are mass-orthonormal under the lumped vertex
    areas. multiplets assigns a cluster id to each scalar mode;
    n_clamped counts eigenvalues whose tiny negative discretization
    noise was clamped to zero.
    """

    mesh: SurfaceMesh
    params: TargetParams
    kappa: np.ndarray | None = None
    psi: np.ndarray | None = None
    lam: np.ndarray | None = None
    phi: np.ndarray | None = None
    multiplets: np.ndarray | None = None
    constant_mode_present: bool | None = None
    n_clamped: int = 0
    _ntd_apply: object = None  # cached solver closure for projections


def _cotan_stiffness(mesh: SurfaceMesh) -> csr_matrix:
    """Positive semidefinite cotangent stiffness matrix (row sums zero)."""
    v, f = mesh.vertices, mesh.triangles
    n = mesh.n_vertices
    I, J, W = [], [], []
    for k in range(3):
        i, j, o = f[:, k], f[:, (k + 1) % 3], f[:, (k + 2) % 3]
        u, w = v[i] - v[o], v[j] - v[o]
        cot = np.einsum('ij,ij->i', u, w) / np.linalg.norm(np.cross(u, w), axis=1)
        I += [i, j]
        J += [j, i]
        W += [-0.5 * cot, -0.5 * cot]
    I = np.concatenate(I)
    J = np.concatenate(J)
    W = np.concatenate(W)
    C = coo_matrix((W, (I, J)), shape=(n, n)).tocsr()
    rows = np.asarray(C.sum(axis=1)).ravel()
    C = C - diags(rows)
    return C.tocsr()


def vertex_normals(mesh: SurfaceMesh) -> np.ndarray:
    """Area-weighted outward unit normals at vertices."""
    vn = np.zeros((mesh.n_vertices, 3))
    w = mesh.face_normals * mesh.face_areas[:, None]
    np.add.at(vn, mesh.triangles.ravel(), np.repeat(w, 3, axis=0))
    return vn / np.linalg.norm(vn, axis=1, keepdims=True)


def build_surface_laplacian(mesh: SurfaceMesh, p: TargetParams) -> SurfaceOperator:
    """Generalized surface Laplacian -mu_c sqrt(D_c) M^{-1} C on point values.

    On a sphere of radius r it carries eigenvalues -mu_c sqrt(D_c) l(l+1)/r^2;
    constants are annihilated.
    """
    d = derive_timescales(p)
    C = _cotan_stiffness(mesh).toarray()
    mat = -(p.mu_c * math.sqrt(d.D_c)) * (C / mesh.vertex_areas[:, None])
    return SurfaceOperator(matrix=mat, units="m s^-1/2 per m: s^-1/2", symmetric=False)


def _triangle_potential(p, tri):
    """Exact integral of 1/(4 pi |p - y|) over flat triangles.

    p: (..., 3) observation points; tri: (..., 3, 3) triangle corners.
    Per-edge closed form with a stable log and an angle accumulation that
    handles observation points in and out of the triangle plane; the log
    term is skipped when the point lies on the edge's supporting line.
    """
    va, vb, vc = tri[..., 0, :], tri[..., 1, :], tri[..., 2, :]
    n = np.cross(vb - va, vc - va)
    n = n / np.linalg.norm(n, axis=-1, keepdims=True)
    h = np.einsum('...i,...i->...', p - va, n)
    rho = p - h[..., None] * n
    total = np.zeros(p.shape[:-1])
    beta = np.zeros(p.shape[:-1])
    for (a, b) in ((va, vb), (vb, vc), (vc, va)):
        s = b - a
        L = np.linalg.norm(s, axis=-1, keepdims=True)
        sh = s / L
        mh = np.cross(n, sh)  # in-plane edge normal, positive toward the inside
        t0 = np.einsum('...i,...i->...', rho - a, mh)
        sm = np.einsum('...i,...i->...', a - rho, sh)
        sp = np.einsum('...i,...i->...', b - rho, sh)
        R02 = t0 ** 2 + h ** 2
        Rm = np.sqrt(sm ** 2 + R02)
        Rp = np.sqrt(sp ** 2 + R02)
        good = np.abs(t0) > 1e-13 * L[..., 0]
        logterm = np.zeros_like(t0)
        num = Rp + sp
        den = Rm + sm
        logterm[good] = np.log(num[good] / den[good])
        total += np.where(good, t0 * logterm, 0.0)
        ah = np.abs(h)
        beta += (np.arctan2(t0 * sp, R02 + ah * Rp)
                 - np.arctan2(t0 * sm, R02 + ah * Rm))
    total -= np.abs(h) * beta
    return total / (4.0 * math.pi)


def _assemble_bem(mesh: SurfaceMesh):
    """Single-layer matrix S and adjoint double-layer K' (vertex collocation).

    Densities live at vertices and are lumped 1/3 per incident triangle.
    S uses the centroid rule far away and the analytic triangle potential
    for triangles incident to the collocation vertex. K' uses the
    centroid rule with incident triangles zeroed; its diagonal is set by
    the closed-surface row-sum identity sum_j K'_ij = -1/2.
    """
    v, f = mesh.vertices, mesh.triangles
    n = mesh.n_vertices
    nf = mesh.n_triangles
    areas = mesh.face_areas
    normals = mesh.face_normals
    cents = v[f].mean(axis=1)
    vn = vertex_normals(mesh)

    P = coo_matrix((np.full(3 * nf, 1.0 / 3.0),
                    (np.repeat(np.arange(nf), 3), f.ravel())),
                   shape=(nf, n)).tocsr()
    incident = [[] for _ in range(n)]
    for t, (a, b, c) in enumerate(f):
        incident[a].append(t)
        incident[b].append(t)
        incident[c].append(t)

    S = np.zeros((n, n))
    Kp = np.zeros((n, n))
    chunk = 512
    for i0 in range(0, n, chunk):
        i1 = min(i0 + chunk, n)
        d = v[i0:i1, None, :] - cents[None, :, :]
        r = np.linalg.norm(d, axis=2)
        kS = areas[None, :] / (4.0 * math.pi * r)
        # kernel d/dn_x of 1/(4 pi |x-y|) at the collocation vertex normal
        kK = -np.einsum('ijk,ik->ij', d, vn[i0:i1]) * areas[None, :] / (4.0 * math.pi * r ** 3)
        S[i0:i1] = kS @ P
        Kp[i0:i1] = kK @ P
    for i in range(n):
        for t in incident[i]:
            d = v[i] - cents[t]
            r = np.linalg.norm(d)
            cS = areas[t] / (4.0 * math.pi * r) / 3.0
            anaS = _triangle_potential(v[i][None, :], v[f[t]][None, :, :])[0] / 3.0
            cK = -(d @ vn[i]) * areas[t] / (4.0 * math.pi * r ** 3) / 3.0
            for j in f[t]:
                S[i, j] += anaS - cS
                Kp[i, j] -= cK
    np.fill_diagonal(Kp, 0.0)
    np.fill_diagonal(Kp, -0.5 - Kp.sum(axis=1))
    return S, Kp


def _check_dense_cap(mesh):
    if mesh.n_vertices > _DENSE_VERTEX_CAP:
        raise ValueError(f"mesh has {mesh.n_vertices} vertices; the dense solver "
                         f"is capped at {_DENSE_VERTEX_CAP}")


def _ntd_solver(mesh: SurfaceMesh):
    """Factorized NtD application: returns (apply(x) -> NtD x, S, lu_pieces)."""
    _check_dense_cap(mesh)
    S, Kp = _assemble_bem(mesh)
    A = 0.5 * np.eye(mesh.n_vertices) - Kp
    anorm = np.linalg.norm(A, 1)
    lu, piv = sla.lu_factor(A)
    gecon = get_lapack_funcs(('gecon',), (lu,))[0]
    rcond, _ = gecon(lu, anorm, norm='1')
    if rcond < 1e-12:
        raise NumericError(f"singular exterior collocation system: "
                           f"condition estimate {1.0 / max(rcond, 1e-300):.3e}")

    def apply(x):
        return S @ sla.lu_solve((lu, piv), x)

    return apply, S, (lu, piv)


def build_ntd_operator(mesh: SurfaceMesh, p: TargetParams) -> SurfaceOperator:
    """Dense exterior Neumann-to-Dirichlet matrix (units of length).

    Maps Neumann data f = -n.grad(Phi) to the surface trace of the decaying
    exterior potential. On a sphere of radius r its eigenvalues are
    r/(l+1); constant data maps to r times itself.
    """
    apply, S, (lu, piv) = _ntd_solver(mesh)
    ntd = S @ sla.lu_solve((lu, piv), np.eye(mesh.n_vertices))
    return SurfaceOperator(matrix=ntd, units="m", symmetric=False)


def _lb_subspace(mesh, k):
    """Lowest-k Laplace-Beltrami eigenpairs, mass-orthonormal columns."""
    C = _cotan_stiffness(mesh)
    M = diags(mesh.vertex_areas)
    k = min(k, mesh.n_vertices - 2)
    nu, U = eigsh(C, k=k, M=M, sigma=-1e-6, which='LM')
    order = np.argsort(nu)
    return nu[order], U[:, order], C


def cluster_multiplets(values, rel_tol: float = _CLUSTER_REL_TOL) -> np.ndarray:
    """Cluster ascending eigenvalues into multiplets; returns cluster ids."""
    values = np.asarray(values, dtype=float)
    ids = np.zeros(len(values), dtype=int)
    for i in range(1, len(values)):
        same = (values[i] - values[i - 1]) <= rel_tol * max(abs(values[i]), 1e-300)
        ids[i] = ids[i - 1] if same else ids[i - 1] + 1
    return ids


def solve_scalar_modes(mesh: SurfaceMesh, p: TargetParams, n_modes: int) -> SurfaceModeBasis:
    """Scalar surface modes kappa_n, psi_n of the composed operator.

    The constant (kappa = 0) mode is verified present and excluded from
    the returned spectrum. Eigenvalues are ascending; eigenvectors are
    mass-orthonormal. Raises NumericError if the spectrum develops
    imaginary parts beyond 1e-6 relative or negative values beyond
    discretization noise.
    """
    _check_dense_cap(mesh)
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    d = derive_timescales(p)
    scale = p.mu_c * math.sqrt(d.D_c) / p.mu_b

    k = min(mesh.n_vertices - 2, max(2 * n_modes + 16, 48))
    if n_modes + 1 > k:
        raise ValueError(f"n_modes={n_modes} too large for subspace size {k}")
    _, U, C = _lb_subspace(mesh, k)
    apply_ntd, S, lu_pieces = _ntd_solver(mesh)

    M = mesh.vertex_areas
    X = (C @ U) / M[:, None]
    GU = scale * apply_ntd(X)
    Gk = U.T @ (M[:, None] * GU)
    w, Y = sla.eig(Gk)

    wmax = np.max(np.abs(w))
    bad = np.abs(w.imag) > 1e-6 * np.maximum(np.abs(w), 1e-9 * wmax)
    if np.any(bad):
        raise NumericError(f"complex scalar-mode eigenvalues: worst imag/|w| = "
                           f"{np.max(np.abs(w.imag) / np.maximum(np.abs(w), 1e-300)):.3e}")
    w = w.real
    order = np.argsort(w)
    w = w[order]
    Y = Y.real[:, order]

    # the raw solve must contain the constant mode at kappa ~ 0
    psi0 = U @ Y[:, 0]
    ones = np.ones(mesh.n_vertices)
    corr = abs(psi0 @ (M * ones)) / (math.sqrt(psi0 @ (M * psi0)) * math.sqrt(ones @ (M * ones)))
    constant_present = bool(abs(w[0]) < 1e-6 * wmax and corr > 0.99)

    start = 1 if constant_present else 0
    sel = slice(start, start + n_modes)
    kappa = w[sel].copy()
    if len(kappa) < n_modes:
        raise ValueError(f"requested {n_modes} modes, only {len(kappa)} available "
                         f"in the projected subspace")
    noise = 1e-8 * wmax
    n_clamped = int(np.sum((kappa < 0) & (kappa > -noise)))
    if np.any(kappa <= -noise):
        raise NumericError(f"negative scalar-mode eigenvalue {kappa.min():.3e} "
                           "beyond discretization noise")
    kappa = np.maximum(kappa, 0.0)

    Psi = U @ Y[:, sel]
    T = Psi.T @ (M[:, None] * Psi)
    tw, tv = np.linalg.eigh(T)
    Psi = Psi @ (tv / np.sqrt(tw)) @ tv.T  # symmetric orthonormalization under M

    return SurfaceModeBasis(mesh=mesh, params=p, kappa=kappa, psi=Psi,
                            multiplets=cluster_multiplets(kappa),
                            constant_mode_present=constant_present,
                            n_clamped=n_clamped, _ntd_apply=apply_ntd)


def solve_transverse_modes(mesh: SurfaceMesh, p: TargetParams, n_modes: int) -> SurfaceModeBasis:
    """Transverse modes lambda_n, phi_n: Laplace-Beltrami over mu_c sqrt(D_c).

    The constant mode (lambda = 0) is included; eigenvectors are
    mass-orthonormal.
    """
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    if n_modes > mesh.n_vertices - 2:
        raise ValueError(f"n_modes={n_modes} exceeds solvable count for "
                         f"{mesh.n_vertices} vertices")
    d = derive_timescales(p)
    nu, U, _ = _lb_subspace(mesh, n_modes)
    n_clamped = int(np.sum(nu < 0))
    nu = np.maximum(nu, 0.0)
    lam = nu / (p.mu_c * math.sqrt(d.D_c))
    return SurfaceModeBasis(mesh=mesh, params=p, lam=lam, phi=U,
                            n_clamped=n_clamped)


def solve_surface_modes(mesh: SurfaceMesh, p: TargetParams, n_modes: int,
                        n_transverse: int | None = None) -> SurfaceModeBasis:
    """Convenience: scalar and transverse families in one basis."""
    sc = solve_scalar_modes(mesh, p, n_modes)
    tr = solve_transverse_modes(mesh, p, n_transverse or n_modes)
    return SurfaceModeBasis(mesh=mesh, params=p, kappa=sc.kappa, psi=sc.psi,
                            lam=tr.lam, phi=tr.phi, multiplets=sc.multiplets,
                            constant_mode_present=sc.constant_mode_present,
                            n_clamped=sc.n_clamped + tr.n_clamped,
                            _ntd_apply=sc._ntd_apply)


def _p1_gradients(mesh, values):
    """Per-face gradient of a vertex scalar field under linear interpolation."""
    v, f = mesh.vertices, mesh.triangles
    n = mesh.face_normals
    g = np.zeros((mesh.n_triangles, 3))
    for k in range(3):
        opp_a = v[f[:, (k + 2) % 3]] - v[f[:, (k + 1) % 3]]
        g += values[f[:, k], None] * np.cross(n, opp_a)
    return g / (2.0 * mesh.face_areas[:, None])


def _face_to_vertex(mesh, face_vectors):
    """Area-weighted average of per-face vectors onto vertices."""
    out = np.zeros((mesh.n_vertices, 3))
    w = face_vectors * mesh.face_areas[:, None]
    np.add.at(out, mesh.triangles.ravel(), np.repeat(w, 3, axis=0))
    return out / (3.0 * mesh.vertex_areas[:, None])


def alpha_pattern(basis: SurfaceModeBasis, n: int) -> np.ndarray:
    """Tangential current pattern of scalar mode n: n x grad(psi_n) at vertices."""
    g = _p1_gradients(basis.mesh, basis.psi[:, n])
    return _face_to_vertex(basis.mesh, np.cross(basis.mesh.face_normals, g))


def beta_pattern(basis: SurfaceModeBasis, n: int) -> np.ndarray:
    """Tangential current pattern of transverse mode n: grad(phi_n) at vertices."""
    g = _p1_gradients(basis.mesh, basis.phi[:, n])
    return _face_to_vertex(basis.mesh, g)


def _weak_curl(mesh, K_faces):
    """Vertex point values of n.curl(K) from the weak form against hat functions."""
    v, f = mesh.vertices, mesh.triangles
    n = mesh.face_normals
    nxK = np.cross(n, K_faces)
    out = np.zeros(mesh.n_vertices)
    for k in range(3):
        opp = v[f[:, (k + 2) % 3]] - v[f[:, (k + 1) % 3]]
        gk = np.cross(n, opp) / (2.0 * mesh.face_areas[:, None])
        np.add.at(out, f[:, k], mesh.face_areas * np.einsum('ij,ij->i', gk, nxK))
    return out / mesh.vertex_areas


def _weak_div(mesh, K_faces):
    """Vertex point values of the surface divergence from the weak form."""
    v, f = mesh.vertices, mesh.triangles
    n = mesh.face_normals
    out = np.zeros(mesh.n_vertices)
    for k in range(3):
        opp = v[f[:, (k + 2) % 3]] - v[f[:, (k + 1) % 3]]
        gk = np.cross(n, opp) / (2.0 * mesh.face_areas[:, None])
        np.add.at(out, f[:, k], -mesh.face_areas * np.einsum('ij,ij->i', gk, K_faces))
    return out / mesh.vertex_areas


def project_surface_current(basis: SurfaceModeBasis, K_field,
                            normal_tol: float = 0.05) -> ModeAmplitudes:
    """Decompose a tangential vertex vector field into mode amplitudes.

    Alpha amplitudes K1 come from the surface curl pushed through the NtD
    composition (which maps each Delta psi_n back to kappa_n psi_n); beta
    amplitudes K2 from the surface divergence against the transverse
    modes. The basis must carry both families. Input with a relative
    normal component above normal_tol is rejected; below it, the normal
    leakage is projected out before use. The returned amplitudes carry
    the relative reconstruction residual of the tangential field.
    """
    if basis.kappa is None or basis.phi is None:
        raise ValueError("basis must contain scalar and transverse modes; "
                         "use solve_surface_modes")
    mesh = basis.mesh
    p = basis.params
    K = np.asarray(K_field, dtype=float)
    if K.shape != (mesh.n_vertices, 3):
        raise ValueError(f"K_field must have shape ({mesh.n_vertices}, 3)")

    vn = vertex_normals(mesh)
    Kn = np.einsum('ij,ij->i', K, vn)
    kmax = np.max(np.linalg.norm(K, axis=1))
    if kmax == 0.0:
        zeros_a = np.zeros(len(basis.kappa))
        zeros_b = np.zeros(int(np.sum(basis.lam > 0)) if basis.lam is not None else 0)
        return ModeAmplitudes.from_parts(zeros_a, basis.kappa, zeros_b, recon_residual=0.0)
    leak = np.max(np.abs(Kn)) / kmax
    if leak > normal_tol:
        raise ValueError(f"K_field normal component {leak:.3g} exceeds tolerance "
                         f"{normal_tol}; input must be tangential")
    Kt = K - Kn[:, None] * vn
    Kf = Kt[mesh.triangles].mean(axis=1)

    d = derive_timescales(p)
    scale = p.mu_c * math.sqrt(d.D_c) / p.mu_b
    apply_ntd = basis._ntd_apply
    if apply_ntd is None:
        apply_ntd, _, _ = _ntd_solver(mesh)

    M = mesh.vertex_areas
    curl = _weak_curl(mesh, Kf)
    s = -scale * apply_ntd(curl)
    raw = basis.psi.T @ (M * s)
    # clamped kappa = 0 modes carry no resolvable amplitude
    K1 = np.where(basis.kappa > 0, raw / np.maximum(basis.kappa, 1e-300), 0.0)

    div = _weak_div(mesh, Kf)
    nu = basis.lam * (p.mu_c * math.sqrt(d.D_c))
    live = nu > 1e-8 * max(nu.max(), 1e-300)
    K2 = np.zeros(int(np.sum(live)))
    phi_live = basis.phi[:, live]
    K2 = -(phi_live.T @ (M * div)) / nu[live]

    recon = np.zeros_like(Kt)
    for j in range(len(K1)):
        recon += K1[j] * alpha_pattern(basis, j)
    live_idx = np.nonzero(live)[0]
    for jj, j in enumerate(live_idx):
        recon += K2[jj] * beta_pattern(basis, j)
    wr = np.sqrt(M)[:, None]
    resid = np.linalg.norm(wr * (Kt - recon)) / np.linalg.norm(wr * Kt)
    return ModeAmplitudes.from_parts(K1, basis.kappa, K2, recon_residual=float(resid))


def analytic_sphere_kappa(p: TargetParams, l: int, radius: float | None = None) -> float:
    """Analytic scalar-mode eigenvalue l * mu_c sqrt(D_c) / (mu_b * radius)."""
    d = derive_timescales(p)
    r = p.L_c if radius is None else radius
    return l * p.mu_c * math.sqrt(d.D_c) / (p.mu_b * r)


def sphere_radius_if_sphere(mesh: SurfaceMesh, rel_tol: float = 1e-3) -> float | None:
    """Mesh radius when vertices lie on a common sphere, else None."""
    w = mesh.vertex_areas / mesh.vertex_areas.sum()
    center = w @ mesh.vertices
    radii = np.linalg.norm(mesh.vertices - center, axis=1)
    mean = radii.mean()
    return float(mean) if np.ptp(radii) <= rel_tol * mean else None
