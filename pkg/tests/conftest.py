"""Shared helpers: cached convergence runs and random triangle sampling."""

import functools

import numpy as np

from hctvem.experiments import convergence_order
from hctvem.mesh import generate_mesh
from hctvem.problems import get_solution
from hctvem.sf_vem import solve_sf_vem
from hctvem.classic_vem import solve_classic_vem, solve_enriched_vem


@functools.lru_cache(maxsize=None)
def sf_errors(family, k, lo, hi, load_rule="interp"):
    """[(l2, h1)] for the stabilizer-free method over a level range."""
    prob = get_solution("sinsin")
    out = []
    for lev in range(lo, hi + 1):
        mesh = generate_mesh(family, lev)
        sol = solve_sf_vem(mesh, k, prob, load_rule=load_rule)
        out.append(sol.solution_field().error_norms(
            sol.reference_field(prob)))
    return out


@functools.lru_cache(maxsize=None)
def classic_errors(family, k, lo, hi, dof_mode="standard", alpha=0.0):
    prob = get_solution("sinsin")
    out = []
    for lev in range(lo, hi + 1):
        mesh = generate_mesh(family, lev)
        sol = solve_classic_vem(mesh, k, prob, dof_mode=dof_mode,
                                alpha=alpha)
        out.append(sol.solution_field().error_norms(
            sol.reference_field(prob)))
    return out


@functools.lru_cache(maxsize=None)
def enriched_errors(family, k, degrees, lo, hi):
    prob = get_solution("sinsin")
    out = []
    for lev in range(lo, hi + 1):
        mesh = generate_mesh(family, lev)
        sol = solve_enriched_vem(mesh, k, prob, harmonic_degrees=degrees)
        out.append(sol.solution_field().error_norms(
            sol.reference_field(prob)))
    return out


def orders(errs):
    """[(l2_order, h1_order)] between consecutive rows of sf_errors."""
    return [(convergence_order(a[0], b[0]), convergence_order(a[1], b[1]))
            for a, b in zip(errs, errs[1:])]


def random_ccw_triangle(rng, min_area=0.05):
    """Random nondegenerate CCW triangle with vertices in [-1, 1]^2."""
    while True:
        tri = rng.uniform(-1.0, 1.0, (3, 2))
        d1, d2 = tri[1] - tri[0], tri[2] - tri[0]
        a = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
        if abs(a) > min_area:
            return tri[[0, 2, 1]] if a < 0 else tri


def p1_fem_stiffness(mesh):
    """Cotangent-formula P1 stiffness with boundary vertices eliminated;
    an independent oracle for the lowest-order method."""
    import scipy.sparse as sp

    n = mesh.num_vertices
    rows, cols, vals = [], [], []
    for tri in mesh.triangles:
        for i in range(3):
            a, b, c = tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]
            e1 = mesh.vertices[b] - mesh.vertices[a]
            e2 = mesh.vertices[c] - mesh.vertices[a]
            cot = float(e1 @ e2) / abs(e1[0] * e2[1] - e1[1] * e2[0])
            for (r, s, w) in ((b, c, -0.5 * cot), (c, b, -0.5 * cot),
                              (b, b, 0.5 * cot), (c, c, 0.5 * cot)):
                rows.append(r)
                cols.append(s)
                vals.append(w)
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    free = np.where(~mesh.boundary_vertex)[0]
    return A[free][:, free]
