"""Triangular meshes of the unit square: the uniform family and the
slightly irregular 8-triangle family, plus the barycentric macro split."""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MAX_LEVEL = 12

# Base pattern of the irregular family: 9 vertices, 8 triangles on the unit
# square.  Coordinates are exact rationals so that tiling deduplicates
# shared vertices without any floating-point snapping.
_F = Fraction
_IRR8_VERTICES = [
    (_F(0), _F(0)), (_F(1, 2), _F(0)), (_F(1), _F(0)),
    (_F(0), _F(1, 2)), (_F(3, 4), _F(1, 2)), (_F(1), _F(1, 2)),
    (_F(0), _F(1)), (_F(1, 2), _F(1)), (_F(1), _F(1)),
]
_IRR8_TRIANGLES = [
    (0, 1, 3),
    (1, 4, 3),
    (1, 2, 4),
    (2, 5, 4),
    (5, 8, 4),
    (4, 8, 7),
    (4, 7, 6),
    (3, 4, 6),
]


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class TriangleMesh:
    """Oriented triangle mesh on the unit square with edge topology."""

    vertices: np.ndarray          # (V, 2)
    triangles: np.ndarray         # (T, 3) CCW vertex indices
    edges: np.ndarray             # (E, 2) with lo < hi
    edge_tris: np.ndarray         # (E, 2) adjacent triangles, -1 if none
    tri_edges: np.ndarray         # (T, 3) edge index of local edges 01,12,20
    boundary_vertex: np.ndarray   # (V,) bool
    boundary_edge: np.ndarray     # (E,) bool
    level: int
    h_max: float
    family: str = "custom"

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_triangles(self):
        return len(self.triangles)

    @property
    def num_edges(self):
        return len(self.edges)

    def triangle_coords(self, t):
        return self.vertices[self.triangles[t]]

    def signed_areas(self):
        v = self.vertices[self.triangles]
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


@dataclass(frozen=True)
class MacroSplit:
    """Barycentric split of one triangle into three CCW sub-triangles."""

    parent: int
    barycenter: np.ndarray
    sub_triangles: np.ndarray     # (3, 3, 2) coordinates


def _build_topology(vertices, triangles, level, family):
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)

    v = vertices[triangles]
    d1 = v[:, 1] - v[:, 0]
    d2 = v[:, 2] - v[:, 0]
    areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    if np.any(areas <= 0):
        raise MeshError("mesh contains a non-CCW or degenerate triangle")

    edge_index = {}
    tri_edges = np.empty((len(triangles), 3), dtype=np.int64)
    edge_list = []
    edge_tris = []
    for t, (a, b, c) in enumerate(triangles):
        for j, (p, q) in enumerate(((a, b), (b, c), (c, a))):
            key = (p, q) if p < q else (q, p)
            e = edge_index.get(key)
            if e is None:
                e = len(edge_list)
                edge_index[key] = e
                edge_list.append(key)
                edge_tris.append([t, -1])
            else:
                if edge_tris[e][1] != -1:
                    raise MeshError("edge shared by more than two triangles")
                edge_tris[e][1] = t
            tri_edges[t, j] = e

    edges = np.array(edge_list, dtype=np.int64)
    edge_tris = np.array(edge_tris, dtype=np.int64)
    boundary_edge = edge_tris[:, 1] == -1
    boundary_vertex = np.zeros(len(vertices), dtype=bool)
    boundary_vertex[edges[boundary_edge].ravel()] = True

    lengths = np.linalg.norm(
        vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
    h_max = float(lengths.max())

    return TriangleMesh(
        vertices=vertices, triangles=triangles, edges=edges,
        edge_tris=edge_tris, tri_edges=tri_edges,
        boundary_vertex=boundary_vertex, boundary_edge=boundary_edge,
        level=level, h_max=h_max, family=family)


def _check_level(level):
    if not isinstance(level, (int, np.integer)) or level < 1:
        raise MeshError(f"level must be a positive integer, got {level!r}")
    if level > MAX_LEVEL:
        raise MeshError(f"level {level} exceeds cap {MAX_LEVEL}")


def gen_uniform_mesh(level):
    """n x n squares (n = 2^(level-1)), each cut by its NW-SE diagonal."""
    _check_level(level)
    n = 2 ** (level - 1)
    xs = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    triangles = []
    for j in range(n):
        for i in range(n):
            # diagonal from (i, j+1) down to (i+1, j)
            triangles.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            triangles.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return _build_topology(vertices, triangles, level, "uniform")


def gen_irregular8_mesh(level):
    """Tile 2^(level-1) x 2^(level-1) scaled copies of the 8-triangle base
    pattern, deduplicating shared vertices by exact rational coordinates."""
    _check_level(level)
    n = 2 ** (level - 1)
    scale = _F(1, n)
    vid = {}
    vertices = []
    triangles = []
    for ty in range(n):
        for tx in range(n):
            local_ids = []
            for (x, y) in _IRR8_VERTICES:
                p = ((tx + x) * scale, (ty + y) * scale)
                i = vid.get(p)
                if i is None:
                    i = len(vertices)
                    vid[p] = i
                    vertices.append(p)
                local_ids.append(i)
            for (a, b, c) in _IRR8_TRIANGLES:
                triangles.append(
                    (local_ids[a], local_ids[b], local_ids[c]))
    vertices = np.array([[float(x), float(y)] for x, y in vertices])
    return _build_topology(vertices, triangles, level, "irregular8")


def split_hct(mesh, triangle_index):
    """Split triangle `triangle_index` at its barycenter into 3 CCW parts."""
    coords = mesh.triangle_coords(triangle_index)
    return macro_split(coords, parent=triangle_index)


def macro_split(coords, parent=-1):
    coords = np.asarray(coords, dtype=float)
    bc = coords.mean(axis=0)
    subs = np.array([
        [coords[0], coords[1], bc],
        [coords[1], coords[2], bc],
        [coords[2], coords[0], bc],
    ])
    return MacroSplit(parent=parent, barycenter=bc, sub_triangles=subs)


def generate_mesh(family, level):
    if family == "uniform":
        return gen_uniform_mesh(level)
    if family == "irregular8":
        return gen_irregular8_mesh(level)
    raise MeshError(f"unknown mesh family {family!r}")


def export_mesh(mesh, path):
    """Plain text: header, vertex lines, triangle lines (0-based)."""
    with open(path, "w") as fh:
        fh.write(f"vertices {mesh.num_vertices} triangles "
                 f"{mesh.num_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
