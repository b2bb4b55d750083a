"""BSWI rod and Timoshenko-beam elements and global assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .basis import BasisTable, build_basis, build_table
from .crack import CrackSpec, NoCrack, spring_coupling

__all__ = [
    "MeshError",
    "Material",
    "Section",
    "ALUMINUM",
    "STEEL",
    "ElementMatrices",
    "Mesh1D",
    "GlobalSystem",
    "default_table",
    "rod_element",
    "beam_element",
    "make_mesh",
    "aligned_element_count",
    "assemble",
    "BOUNDARY_CONDITIONS",
]

BOUNDARY_CONDITIONS = ("free-free", "fixed-free", "fixed-fixed")


class MeshError(ValueError):
    """Mesh, crack placement, or boundary-condition inconsistency."""


@dataclass(frozen=True)
class Material:
    E: float
    nu: float
    rho: float

    def __post_init__(self):
        if not (self.E > 0 and self.rho > 0 and -1.0 < self.nu < 0.5):
            raise ValueError(f"invalid material constants {self}")

    @property
    def G(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def c0(self) -> float:
        """Bar velocity sqrt(E / rho)."""
        return math.sqrt(self.E / self.rho)


ALUMINUM = Material(E=70e9, nu=0.3, rho=2730.0)
STEEL = Material(E=200e9, nu=0.3, rho=7800.0)


@dataclass(frozen=True)
class Section:
    """Cross-section.

    ``shear_factor`` divides GA in the shear terms (GA / k), so it is the
    reciprocal of the usual Timoshenko coefficient.
    """

    kind: str
    A: float
    I: float
    b: float
    h: float
    shear_factor: float

    @classmethod
    def circular(cls, d: float, shear_factor: float = 1.11) -> "Section":
        if d <= 0:
            raise ValueError(f"diameter must be positive, got {d}")
        return cls("circular", math.pi * d**2 / 4.0, math.pi * d**4 / 64.0, d, d, shear_factor)

    @classmethod
    def rectangular(cls, b: float, h: float, shear_factor: float = 10.0 / 9.0) -> "Section":
        if b <= 0 or h <= 0:
            raise ValueError(f"width and height must be positive, got b={b}, h={h}")
        return cls("rectangular", b * h, b * h**3 / 12.0, b, h, shear_factor)


@dataclass(frozen=True)
class ElementMatrices:
    M: np.ndarray
    K: np.ndarray


@lru_cache(maxsize=None)
def default_table(m: int = 4, j: int = 3) -> BasisTable:
    return build_table(build_basis(m, j))


def _nodal(table: BasisTable, gamma: np.ndarray) -> np.ndarray:
    R = table.R
    out = R.T @ gamma @ R
    return out


def rod_element(mat: Material, sec: Section, l_e: float, tab: BasisTable | None = None) -> ElementMatrices:
    """Consistent mass and stiffness of one BSWI rod element."""
    if l_e <= 0:
        raise ValueError(f"element length must be positive, got {l_e}")
    tab = tab or default_table()
    g0 = _nodal(tab, tab.gamma0)
    g1 = _nodal(tab, tab.gamma1)
    M = mat.rho * sec.A * l_e * g0
    K = mat.E * sec.A / l_e * g1
    return ElementMatrices(0.5 * (M + M.T), 0.5 * (K + K.T))


def beam_element(mat: Material, sec: Section, l_e: float, tab: BasisTable | None = None) -> ElementMatrices:
    """Timoshenko BSWI beam element, local ordering ``[w_1..w_n | th_1..th_n]``."""
    if l_e <= 0:
        raise ValueError(f"element length must be positive, got {l_e}")
    tab = tab or default_table()
    n = tab.spec.n_b
    g0 = _nodal(tab, tab.gamma0)
    g1 = _nodal(tab, tab.gamma1)
    g01 = tab.R.T @ tab.gamma01 @ tab.R
    ga = mat.G * sec.A / sec.shear_factor
    K = np.zeros((2 * n, 2 * n))
    K[:n, :n] = ga / l_e * g1
    # Shear strain w' - theta couples dw/dxi (rows) with theta (columns).
    K[:n, n:] = -ga * g01
    K[n:, :n] = K[:n, n:].T
    K[n:, n:] = mat.E * sec.I / l_e * g1 + ga * l_e * g0
    M = np.zeros_like(K)
    M[:n, :n] = mat.rho * sec.A * l_e * g0
    M[n:, n:] = mat.rho * sec.I * l_e * g0
    return ElementMatrices(0.5 * (M + M.T), 0.5 * (K + K.T))


@dataclass(frozen=True)
class Mesh1D:
    """Uniform 1-D mesh of BSWI elements.

    Attributes
    ----------
    node_x : ndarray
        Node coordinates in global node order.  A cracked interface appears
        as two consecutive nodes with the same coordinate.
    element_nodes : ndarray (n_el, n_b)
        Global node indices of each element's nodes.
    crack_interfaces : tuple of int
        Element-boundary indices ``k`` (between elements ``k-1`` and ``k``)
        carrying a crack.
    """

    L: float
    n_el: int
    kind: str
    crack_interfaces: tuple = ()
    n_b: int = 11
    node_x: np.ndarray = field(init=False, repr=False)
    element_nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("rod", "beam"):
            raise MeshError(f"structure kind must be 'rod' or 'beam', got {self.kind!r}")
        if self.L <= 0 or self.n_el < 1:
            raise MeshError(f"need L > 0 and n_el >= 1, got L={self.L}, n_el={self.n_el}")
        cuts = sorted(self.crack_interfaces)
        if len(set(cuts)) != len(cuts):
            raise MeshError(f"duplicate crack interfaces {cuts}")
        if any(k <= 0 or k >= self.n_el for k in cuts):
            raise MeshError(f"crack interfaces must be interior element boundaries, got {cuts}")
        object.__setattr__(self, "crack_interfaces", tuple(cuts))
        per = self.n_b - 1
        xs, conn, nxt = [], [], 0
        for e in range(self.n_el):
            x0 = e * self.l_e
            local = np.linspace(x0, x0 + self.l_e, self.n_b)
            if e == 0 or e in cuts:
                ids = list(range(nxt, nxt + self.n_b))
                xs.extend(local)
            else:
                start = nxt - 1
                ids = list(range(start, start + self.n_b))
                xs.extend(local[1:])
            nxt = ids[-1] + 1
            conn.append(ids)
        x = np.asarray(xs)
        x[-1] = self.L
        object.__setattr__(self, "node_x", x)
        object.__setattr__(self, "element_nodes", np.asarray(conn, dtype=int))
        assert len(x) == per * self.n_el + 1 + len(cuts)

    @property
    def l_e(self) -> float:
        return self.L / self.n_el

    @property
    def dofs_per_node(self) -> int:
        return 1 if self.kind == "rod" else 2

    @property
    def n_nodes(self) -> int:
        return len(self.node_x)

    @property
    def n_dofs(self) -> int:
        return self.n_nodes * self.dofs_per_node

    def dof(self, node: int, component: int = 0) -> int:
        """Global DOF of ``component`` (0 = u or w, 1 = theta) at ``node``."""
        return node * self.dofs_per_node + component

    def element_dofs(self, e: int) -> np.ndarray:
        nodes = self.element_nodes[e]
        if self.kind == "rod":
            return nodes.copy()
        return np.concatenate([2 * nodes, 2 * nodes + 1])

    def interface_nodes(self, k: int) -> tuple[int, int]:
        """Left and right node of element boundary ``k``."""
        return int(self.element_nodes[k - 1, -1]), int(self.element_nodes[k, 0])

    def node_at(self, x: float, side: str = "left") -> int:
        """Node index at coordinate ``x``; ``side`` picks a cracked pair member."""
        hits = np.flatnonzero(np.abs(self.node_x - x) <= 1e-9 * self.L)
        if hits.size == 0:
            raise MeshError(f"no node at x={x}")
        return int(hits[0] if side == "left" else hits[-1])

    def snapshot_nodes(self) -> np.ndarray:
        """One node per distinct coordinate (left member of cracked pairs)."""
        keep = np.ones(self.n_nodes, dtype=bool)
        keep[1:] = np.diff(self.node_x) > 0
        return np.flatnonzero(keep)

    def dof_labels(self) -> list[str]:
        if self.kind == "rod":
            return [f"u{i}" for i in range(self.n_nodes)]
        return [f"{c}{i}" for i in range(self.n_nodes) for c in ("w", "th")]


def _boundary_index(L: float, n_el: int, x: float, tol: float) -> int:
    k = round(x / L * n_el)
    if abs(k * L / n_el - x) > tol * L:
        raise MeshError(f"crack at x={x} is not on an element boundary of the {n_el}-element mesh")
    return k


def make_mesh(L: float, n_el: int, kind: str, crack_positions: Sequence[float] = (), tol: float = 1e-9) -> Mesh1D:
    """Mesh whose element boundaries carry the requested cracks."""
    for x in crack_positions:
        if not 0.0 < x < L:
            raise MeshError(f"crack position {x} outside (0, {L})")
    if len(set(crack_positions)) != len(list(crack_positions)):
        raise MeshError(f"duplicate crack locations {list(crack_positions)}")
    cuts = [_boundary_index(L, n_el, x, tol) for x in crack_positions]
    return Mesh1D(L=L, n_el=n_el, kind=kind, crack_interfaces=tuple(cuts))


def aligned_element_count(L: float, positions: Sequence[float], n_min: int, n_max: int = 4096, tol: float = 1e-9) -> int:
    """Smallest element count >= ``n_min`` putting every position on a boundary."""
    for n in range(max(1, n_min), n_max + 1):
        try:
            for x in positions:
                _boundary_index(L, n, x, tol)
        except MeshError:
            continue
        return n
    raise MeshError(f"no element count in [{n_min}, {n_max}] aligns cracks {list(positions)}")


@dataclass(frozen=True)
class GlobalSystem:
    """Assembled and constrained mass and stiffness.

    ``M`` and ``K`` act on the free DOFs; ``free_dofs[i]`` is the full-mesh DOF
    of reduced index ``i``.
    """

    mesh: Mesh1D
    M: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    free_dofs: np.ndarray = field(repr=False)
    constrained_dofs: np.ndarray = field(repr=False)
    force_dof: int = 0

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def reduced(self, full_dof: int) -> int:
        hit = np.flatnonzero(self.free_dofs == full_dof)
        if hit.size == 0:
            raise MeshError(f"DOF {full_dof} is constrained")
        return int(hit[0])


def _constrained(mesh: Mesh1D, bc: str) -> list[int]:
    if bc not in BOUNDARY_CONDITIONS:
        raise MeshError(f"boundary condition must be one of {BOUNDARY_CONDITIONS}, got {bc!r}")
    ends = []
    if bc in ("fixed-free", "fixed-fixed"):
        ends.append(0)
    if bc == "fixed-fixed":
        ends.append(mesh.n_nodes - 1)
    return [mesh.dof(n, c) for n in ends for c in range(mesh.dofs_per_node)]


def assemble(
    mesh: Mesh1D,
    mat: Material,
    sec: Section,
    cracks: Sequence[CrackSpec] = (),
    bc: str = "free-free",
    force_dof: int | None = None,
    tab: BasisTable | None = None,
) -> GlobalSystem:
    """Global M and K with crack springs and boundary constraints.

    Each crack must sit on one of ``mesh.crack_interfaces``; the force acts on
    the full-mesh DOF ``force_dof`` (default: left end, or the right end when
    the left end is fixed, or the first free DOF when both ends are).
    """
    tab = tab or default_table()
    if tab.spec.n_b != mesh.n_b:
        raise MeshError("basis size does not match mesh node count per element")
    build = rod_element if mesh.kind == "rod" else beam_element
    el = build(mat, sec, mesh.l_e, tab)
    n = mesh.n_dofs
    M = np.zeros((n, n))
    K = np.zeros((n, n))
    for e in range(mesh.n_el):
        idx = mesh.element_dofs(e)
        ix = np.ix_(idx, idx)
        M[ix] += el.M
        K[ix] += el.K

    by_interface = {}
    for c in cracks:
        k = _boundary_index(mesh.L, mesh.n_el, c.position, 1e-9)
        if k in by_interface:
            raise MeshError(f"duplicate crack location {c.position}")
        by_interface[k] = c
    if set(by_interface) != set(mesh.crack_interfaces):
        raise MeshError(
            f"crack interfaces {sorted(by_interface)} do not match mesh interfaces {list(mesh.crack_interfaces)}"
        )
    for k, c in sorted(by_interface.items()):
        left, right = mesh.interface_nodes(k)
        try:
            block = spring_coupling(c, mesh.kind)
        except NoCrack as exc:
            raise MeshError(f"crack at {c.position} has zero depth; mesh it without an interface") from exc
        idx = [mesh.dof(left, i) for i in range(mesh.dofs_per_node)]
        idx += [mesh.dof(right, i) for i in range(mesh.dofs_per_node)]
        K[np.ix_(idx, idx)] += block

    fixed = np.array(sorted(_constrained(mesh, bc)), dtype=int)
    free = np.setdiff1d(np.arange(n), fixed)
    Mr = M[np.ix_(free, free)]
    Kr = K[np.ix_(free, free)]
    if force_dof is None:
        ends = [0, mesh.dof(mesh.n_nodes - 1)]
        force_dof = next((d for d in ends if d in free), int(free[0]))
    full_force = int(force_dof)
    sys_ = GlobalSystem(mesh=mesh, M=Mr, K=Kr, free_dofs=free, constrained_dofs=fixed)
    object.__setattr__(sys_, "force_dof", sys_.reduced(full_force))
    return sys_
