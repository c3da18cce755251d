"""Element matrices, penalty matrices, and the global coupled block system.

Scalar matrices live on all mesh nodes:

* stiffness  Kbar[j,l] = int grad(phi_j) . grad(phi_l)
* mass       Mbar[j,l] = int phi_j phi_l
* interior Neumann penalty  KbarJ = sum_e h_e^2 g_e g_e^T, with g_e the
  discretized normal-derivative jump across interior edge e
* boundary tangential penalty  KG = sum over cavity edges of the local
  matrix [[1,-1],[-1,1]] on the edge's two D nodes

The coupled system couples a Helmholtz field p and a modified-Helmholtz
field q that share one unknown per cavity-boundary node.  Unknown ordering
is (P_I, Q_I, P_T, Q_T, P_D); within each block, mesh node order.  The
q-field rows are scaled by -1 so the assembled matrix is complex symmetric
(A = A^T exactly), which the direct solver and the sign-structure tests
rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import Mesh

#: Triangles with area below this are rejected as degenerate.
AREA_EPS = 1e-14

_MASS_REF = np.array([[2.0, 1.0, 1.0],
                      [1.0, 2.0, 1.0],
                      [1.0, 1.0, 2.0]]) / 12.0


class AssemblyError(Exception):
    pass


# ---------------------------------------------------------------------------
# Method choice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Method:
    """Stabilization choice: 'regular', 'ip' (gamma > 0), or 'bp' (eta > 0)."""

    kind: str
    gamma: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("regular", "ip", "bp"):
            raise ValueError(f"unknown method kind {self.kind!r}")
        if self.kind == "ip" and self.gamma <= 0:
            raise ValueError("interior penalty requires gamma > 0")
        if self.kind == "bp" and self.eta <= 0:
            raise ValueError("boundary penalty requires eta > 0")
        if self.kind == "regular" and (self.gamma or self.eta):
            raise ValueError("regular method has no penalty parameters")

    @staticmethod
    def regular() -> "Method":
        return Method("regular")

    @staticmethod
    def interior_penalty(gamma: float) -> "Method":
        return Method("ip", gamma=gamma)

    @staticmethod
    def boundary_penalty(eta: float) -> "Method":
        return Method("bp", eta=eta)

    @property
    def label(self) -> str:
        return {"regular": "regular", "ip": "IP", "bp": "BP"}[self.kind]


# ---------------------------------------------------------------------------
# Element level
# ---------------------------------------------------------------------------

def _tri_geometry(verts: np.ndarray) -> tuple[float, np.ndarray]:
    """Area and barycentric gradients (3, 2) of a CCW triangle."""
    v = np.asarray(verts, dtype=float)
    d1, d2 = v[1] - v[0], v[2] - v[0]
    area = 0.5 * (d1[0] * d2[1] - d2[0] * d1[1])
    if area <= AREA_EPS:
        raise AssemblyError(f"degenerate triangle, area = {area:.3e}")
    # grad(lambda_i) is the rotated opposite edge over twice the area
    edges = np.array([v[2] - v[1], v[0] - v[2], v[1] - v[0]])
    grads = np.stack([edges[:, 1], -edges[:, 0]], axis=1) / (2.0 * area)
    return area, grads


def local_matrices(verts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact stiffness and mass matrices of the linear element."""
    area, grads = _tri_geometry(verts)
    k_loc = area * (grads @ grads.T)
    m_loc = area * _MASS_REF
    return k_loc, m_loc


# ---------------------------------------------------------------------------
# Global scalar matrices
# ---------------------------------------------------------------------------

@dataclass
class ScalarMatrices:
    """Global real matrices over all mesh nodes (penalties unscaled)."""

    kbar: sp.csr_matrix
    mbar: sp.csr_matrix
    kbar_j: sp.csr_matrix
    kg: sp.csr_matrix


def assemble_scalar(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Global stiffness and mass matrices (symmetric by construction)."""
    n = mesh.n_nodes
    rows, cols, kv, mv = [], [], [], []
    for tri in mesh.triangles:
        k_loc, m_loc = local_matrices(mesh.nodes[tri])
        for a in range(3):
            for b in range(3):
                rows.append(tri[a])
                cols.append(tri[b])
                kv.append(k_loc[a, b])
                mv.append(m_loc[a, b])
    kbar = sp.coo_matrix((kv, (rows, cols)), shape=(n, n)).tocsr()
    mbar = sp.coo_matrix((mv, (rows, cols)), shape=(n, n)).tocsr()
    return kbar, mbar


def interior_jump_vector(mesh: Mesh, edge_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Sparse jump vector g_e of [d_nu phi] across one interior edge.

    Returns (node_ids, coefficients).  The normal points from the adjacent
    element with the smaller element index to the other one; flipping that
    convention flips g_e's sign, which cancels in g_e g_e^T.
    """
    a, b = mesh.interior_edges[edge_index]
    k_lo, k_hi = sorted(mesh.edge_tris[edge_index])
    tang = mesh.nodes[b] - mesh.nodes[a]
    normal = np.array([tang[1], -tang[0]])
    normal /= np.linalg.norm(normal)
    tri_lo = mesh.triangles[k_lo]
    # orient the normal out of the lower-index element
    centroid = mesh.nodes[tri_lo].mean(axis=0)
    if np.dot(normal, mesh.nodes[a] - centroid) < 0:
        normal = -normal
    coeffs: dict[int, float] = {}
    for k, sign in ((k_lo, 1.0), (k_hi, -1.0)):
        tri = mesh.triangles[k]
        _, grads = _tri_geometry(mesh.nodes[tri])
        for local, node in enumerate(tri):
            coeffs[int(node)] = coeffs.get(int(node), 0.0) + sign * float(grads[local] @ normal)
    ids = np.array(sorted(coeffs), dtype=np.int64)
    return ids, np.array([coeffs[i] for i in ids])


def assemble_interior_penalty(mesh: Mesh) -> sp.csr_matrix:
    """KbarJ = sum_e h_e^2 g_e g_e^T over all interior edges (unscaled)."""
    n = mesh.n_nodes
    rows, cols, vals = [], [], []
    for e in range(len(mesh.interior_edges)):
        ids, g = interior_jump_vector(mesh, e)
        w = mesh.edge_lengths[e] ** 2
        block = w * np.outer(g, g)
        for a in range(len(ids)):
            for b in range(len(ids)):
                rows.append(ids[a])
                cols.append(ids[b])
                vals.append(block[a, b])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def assemble_boundary_penalty(mesh: Mesh) -> sp.csr_matrix:
    """KG over all nodes: local [[1,-1],[-1,1]] per cavity edge (unscaled).

    Nonzero only on the D-node block; the eta * h_e weight times the exact
    edge integral of the tangential derivatives reduces to this constant
    local matrix for linear elements.
    """
    n = mesh.n_nodes
    loop = mesh.cavity_loop
    rows, cols, vals = [], [], []
    for i in range(len(loop)):
        a, b = int(loop[i]), int(loop[(i + 1) % len(loop)])
        for (r, c, v) in ((a, a, 1.0), (a, b, -1.0), (b, a, -1.0), (b, b, 1.0)):
            rows.append(r)
            cols.append(c)
            vals.append(v)
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def assemble_all(mesh: Mesh) -> ScalarMatrices:
    kbar, mbar = assemble_scalar(mesh)
    return ScalarMatrices(kbar, mbar, assemble_interior_penalty(mesh),
                          assemble_boundary_penalty(mesh))


# ---------------------------------------------------------------------------
# Block system
# ---------------------------------------------------------------------------

@dataclass
class DofMap:
    """Maps (field, node) to a row of the unknown vector (P_I,Q_I,P_T,Q_T,P_D)."""

    p_dof: np.ndarray  # per node: row of its p unknown
    q_dof: np.ndarray  # per node: row of its q unknown (= p_dof on D nodes)
    n_interior: int
    n_trunc: int
    n_cavity: int

    @property
    def size(self) -> int:
        return 2 * self.n_interior + 2 * self.n_trunc + self.n_cavity

    def block_slices(self) -> dict[str, slice]:
        ni, nt, nd = self.n_interior, self.n_trunc, self.n_cavity
        ofs = np.cumsum([0, ni, ni, nt, nt, nd])
        names = ["P_I", "Q_I", "P_T", "Q_T", "P_D"]
        return {nm: slice(int(a), int(b)) for nm, a, b in zip(names, ofs[:-1], ofs[1:])}


def build_dof_map(mesh: Mesh) -> DofMap:
    ni, nt, nd = len(mesh.interior_nodes), len(mesh.t_nodes), len(mesh.d_nodes)
    p_dof = np.full(mesh.n_nodes, -1, dtype=np.int64)
    q_dof = np.full(mesh.n_nodes, -1, dtype=np.int64)
    p_dof[mesh.interior_nodes] = np.arange(ni)
    q_dof[mesh.interior_nodes] = ni + np.arange(ni)
    p_dof[mesh.t_nodes] = 2 * ni + np.arange(nt)
    q_dof[mesh.t_nodes] = 2 * ni + nt + np.arange(nt)
    shared = 2 * ni + 2 * nt + np.arange(nd)
    p_dof[mesh.d_nodes] = shared
    q_dof[mesh.d_nodes] = shared
    return DofMap(p_dof, q_dof, ni, nt, nd)


@dataclass
class BlockSystem:
    """Sparse complex-symmetric system A W = F for W = (P_I,Q_I,P_T,Q_T,P_D)."""

    A: sp.csr_matrix
    F: np.ndarray
    dof_map: DofMap
    kappa: float
    method: Method


def build_system(mesh: Mesh, scalars: ScalarMatrices, tbc, load_t: np.ndarray,
                 kappa: float, method: Method) -> BlockSystem:
    """Assemble the global penalized system.

    Parameters
    ----------
    tbc : TbcMatrix
        Dense transparent-boundary blocks over the T nodes (mesh order).
    load_t : complex vector over T nodes
        Incident-field load; lands on the p-field T rows.
    """
    dof = build_dof_map(mesh)
    nt = dof.n_trunc
    if tbc.p_block.shape != (nt, nt) or len(load_t) != nt:
        raise AssemblyError("TBC/load dimensions do not match the mesh T nodes")

    gamma = method.gamma if method.kind == "ip" else 0.0
    eta = method.eta if method.kind == "bp" else 0.0

    b1 = (scalars.kbar - kappa**2 * scalars.mbar - gamma * scalars.kbar_j).tocoo()
    b2 = (scalars.kbar + kappa**2 * scalars.mbar + gamma * scalars.kbar_j).tocoo()
    cls = mesh.node_class

    rows, cols, vals = [], [], []

    def scatter(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    # p rows (I and T nodes): (Kbar - k^2 Mbar - gamma KbarJ) acting on the
    # p field, with the shared P_D unknown standing in on D columns.
    mask = cls[b1.row] != "D"
    scatter(dof.p_dof[b1.row[mask]], dof.p_dof[b1.col[mask]],
            b1.data[mask].astype(complex))
    # q rows, scaled by -1 for symmetry.
    mask = cls[b2.row] != "D"
    scatter(dof.q_dof[b2.row[mask]], dof.q_dof[b2.col[mask]],
            -b2.data[mask].astype(complex))

    # coupling rows on D nodes: Kbar (p - q) - k^2 Mbar (p + q) - gamma KbarJ (p + q);
    # the p and q stiffness contributions cancel on the shared D columns.
    kd = scalars.kbar.tocoo()
    mask = cls[kd.row] == "D"
    scatter(dof.p_dof[kd.row[mask]], dof.p_dof[kd.col[mask]],
            kd.data[mask].astype(complex))
    scatter(dof.p_dof[kd.row[mask]], dof.q_dof[kd.col[mask]],
            -kd.data[mask].astype(complex))
    lower = (scalars.mbar * kappa**2 + gamma * scalars.kbar_j).tocoo()
    mask = cls[lower.row] == "D"
    scatter(dof.p_dof[lower.row[mask]], dof.p_dof[lower.col[mask]],
            -lower.data[mask].astype(complex))
    scatter(dof.p_dof[lower.row[mask]], dof.q_dof[lower.col[mask]],
            -lower.data[mask].astype(complex))
    if eta:
        kg = scalars.kg.tocoo()
        scatter(dof.p_dof[kg.row], dof.p_dof[kg.col],
                -eta * kg.data.astype(complex))

    # transparent boundary blocks on the T diagonal blocks
    t_rows = dof.p_dof[mesh.t_nodes]
    pr, pc = np.meshgrid(t_rows, t_rows, indexing="ij")
    scatter(pr.ravel(), pc.ravel(), -tbc.p_block.ravel())
    t_rows_q = dof.q_dof[mesh.t_nodes]
    qr, qc = np.meshgrid(t_rows_q, t_rows_q, indexing="ij")
    scatter(qr.ravel(), qc.ravel(), tbc.q_block.ravel())  # +: q rows are negated

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dof.size, dof.size)).tocsr()
    # the operator is symmetric; duplicate-entry summation order can leave
    # roundoff asymmetry, so enforce A = A^T exactly
    A = 0.5 * (A + A.T).tocsr()

    F = np.zeros(dof.size, dtype=complex)
    F[t_rows] = load_t
    return BlockSystem(A, F, dof, kappa, method)


def dump_matrix_market(system: BlockSystem, path: str) -> None:
    """Debug dump of A and F in Matrix Market coordinate format."""
    from scipy.io import mmwrite

    mmwrite(path + ".A.mtx", system.A)
    mmwrite(path + ".F.mtx", system.F.reshape(-1, 1))
