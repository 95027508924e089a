"""Triangulated closed surfaces: icosphere generation, OFF input, validation.

Meshes must be closed, consistently wound and of sphere topology; every
constructor routes through the same validator. Face normals follow the
winding order and are flipped globally (with a warning) if the signed
volume says they point inward, so downstream operators can rely on
outward normals.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SurfaceMesh:
    """A validated closed triangle mesh with lumped vertex areas."""

    vertices: np.ndarray  # (nv, 3) m
    triangles: np.ndarray  # (nf, 3) int, outward CCW winding
    face_normals: np.ndarray  # (nf, 3) unit
    face_areas: np.ndarray  # (nf,) m^2
    vertex_areas: np.ndarray  # (nv,) m^2, barycentric lumping

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)


def _face_geometry(vertices, triangles):
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    cross = np.cross(p1 - p0, p2 - p0)
    norms = np.linalg.norm(cross, axis=1)
    return cross, norms / 2.0


def make_surface_mesh(vertices, triangles) -> SurfaceMesh:
    """Validate raw arrays and assemble a SurfaceMesh.

    Checks: index bounds, positive triangle areas, every edge shared by
    exactly two triangles with opposite orientation (closed orientable
    surface), Euler characteristic 2 (sphere topology), outward normals.
    """
    vertices = np.ascontiguousarray(vertices, dtype=float)
    triangles = np.ascontiguousarray(triangles, dtype=np.int64)
    nv = len(vertices)
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise ValueError("triangles must be an (nf, 3) index array")
    if triangles.min() < 0 or triangles.max() >= nv:
        raise ValueError("triangle indices out of range")

    cross, areas = _face_geometry(vertices, triangles)
    scale = max(np.max(np.linalg.norm(vertices, axis=1)), 1e-30)
    if np.any(areas <= 1e-14 * scale ** 2):
        raise ValueError("degenerate (zero-area) triangle in mesh")

    directed = {}
    for f, (a, b, c) in enumerate(triangles):
        for i, j in ((a, b), (b, c), (c, a)):
            if (i, j) in directed:
                raise ValueError(f"edge ({i},{j}) used twice with the same orientation; "
                                 "mesh is not consistently wound")
            directed[(i, j)] = f
    for (i, j) in directed:
        if (j, i) not in directed:
            raise ValueError(f"boundary edge ({i},{j}); mesh is not closed")

    n_edges = len(directed) // 2
    chi = nv - n_edges + len(triangles)
    if chi != 2:
        raise ValueError(f"Euler characteristic {chi} != 2; only sphere-topology "
                         "surfaces are supported")

    # outward orientation via divergence-theorem volume
    p0 = vertices[triangles[:, 0]]
    volume = np.einsum('ij,ij->', p0, cross) / 6.0
    if volume < 0:
        warnings.warn("mesh faces wound inward; flipping orientation", stacklevel=2)
        triangles = triangles[:, [0, 2, 1]]
        cross, areas = _face_geometry(vertices, triangles)

    normals = cross / np.linalg.norm(cross, axis=1)[:, None]
    vertex_areas = np.zeros(nv)
    np.add.at(vertex_areas, triangles.ravel(),
              np.repeat(areas / 3.0, 3))
    return SurfaceMesh(vertices=vertices, triangles=triangles,
                       face_normals=normals, face_areas=areas,
                       vertex_areas=vertex_areas)


# canonical icosahedron, CCW outward winding
_T = (1.0 + math.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array([
    (-1, _T, 0), (1, _T, 0), (-1, -_T, 0), (1, -_T, 0),
    (0, -1, _T), (0, 1, _T), (0, -1, -_T), (0, 1, -_T),
    (_T, 0, -1), (_T, 0, 1), (-_T, 0, -1), (-_T, 0, 1),
], dtype=float)
_ICO_FACES = np.array([
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
], dtype=np.int64)


def make_icosphere(radius: float, level: int) -> SurfaceMesh:
    """Subdivided icosahedron projected to a sphere; 10*4^level + 2 vertices."""
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    verts = [v / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = _ICO_FACES.tolist()
    for _ in range(level):
        cache = {}

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return make_surface_mesh(radius * np.array(verts), np.array(faces))


def load_off(path) -> SurfaceMesh:
    """Read a triangle mesh from an OFF text file and validate it.

    Accepts the standard layout (header line "OFF", then "nv nf ne", then
    vertex and face lines) as well as counts on the header line. Only
    triangular faces are supported.
    """
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split('#', 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0].upper() != "OFF":
        raise ValueError(f"{path}: not an OFF file (missing header)")
    tokens = tokens[1:]
    if len(tokens) < 3:
        raise ValueError(f"{path}: truncated OFF header")
    nv, nf = int(tokens[0]), int(tokens[1])
    pos = 3
    need = 3 * nv
    if len(tokens) < pos + need:
        raise ValueError(f"{path}: expected {nv} vertices, file is truncated")
    verts = np.array(tokens[pos:pos + need], dtype=float).reshape(nv, 3)
    pos += need
    faces = []
    for k in range(nf):
        if pos >= len(tokens):
            raise ValueError(f"{path}: expected {nf} faces, file is truncated")
        cnt = int(tokens[pos])
        if cnt != 3:
            raise ValueError(f"{path}: face {k} has {cnt} vertices; only triangles "
                             "are supported")
        faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += 4
    return make_surface_mesh(verts, np.array(faces, dtype=np.int64))
