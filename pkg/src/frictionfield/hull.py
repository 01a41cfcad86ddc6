"""Distance from the origin to a convex hull boundary via support queries.

The production path for the grasp quality metric: instead of building the
full convex hull of the wrench set (facet counts explode in 6D), this grows
an inner polytope lazily. Each round takes the facet plane currently nearest
the origin and asks the support function of the whole point set whether any
point lies beyond it; if none does, that plane is a supporting hyperplane of
the true hull and its offset is the answer, otherwise the most distant point
is stitched into the polytope and the search continues. Because the inner
polytope only ever underestimates the hull, the first certified facet is the
global minimum.
"""

from __future__ import annotations

import numpy as np


class HullExpansionError(RuntimeError):
    """The incremental expansion failed to converge (numerically degenerate input)."""


def _facet_plane(points: np.ndarray, indices: tuple, interior: np.ndarray):
    """Unit normal (oriented away from `interior`) and origin offset of a facet."""
    verts = points[list(indices)]
    edges = (verts[1:] - verts[0]).T  # (d, d-1)
    q, _ = np.linalg.qr(edges, mode="complete")
    normal = q[:, -1]
    offset = float(normal @ verts[0])
    if normal @ interior > offset:
        normal = -normal
        offset = -offset
    return normal, offset


def hull_interior_distance(points, tolerance: float = 1e-9) -> float:
    """Radius of the largest origin-centered ball inside conv(points).

    Returns 0 when the origin is outside or on the hull, or when the points
    do not span the full ambient dimension.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n, dim = points.shape
    if n < dim + 1:
        return 0.0
    scale = float(np.linalg.norm(points, axis=1).max())
    if scale == 0.0:
        return 0.0
    eps_rank = 1e-9 * (1.0 + scale)

    # Greedy affinely independent simplex: repeatedly take the point with the
    # largest residual against the affine span built so far.
    first = int(np.argmax(np.linalg.norm(points, axis=1)))
    simplex = [first]
    basis = np.zeros((dim, 0))
    rel = points - points[first]
    for _ in range(dim):
        residual = rel - (rel @ basis) @ basis.T
        norms = np.linalg.norm(residual, axis=1)
        pick = int(np.argmax(norms))
        if norms[pick] <= eps_rank:
            return 0.0  # lower-dimensional hull
        simplex.append(pick)
        basis = np.column_stack([basis, residual[pick] / norms[pick]])
    interior = points[simplex].mean(axis=0)

    facets: dict[int, tuple[tuple, np.ndarray, float]] = {}
    ridge_map: dict[frozenset, list[int]] = {}
    next_id = 0

    def add_facet(indices: tuple):
        nonlocal next_id
        normal, offset = _facet_plane(points, indices, interior)
        fid = next_id
        next_id += 1
        facets[fid] = (indices, normal, offset)
        for drop in range(len(indices)):
            ridge = frozenset(indices[:drop] + indices[drop + 1 :])
            ridge_map.setdefault(ridge, []).append(fid)

    def drop_facet(fid: int):
        indices, _, _ = facets.pop(fid)
        for drop in range(len(indices)):
            ridge = frozenset(indices[:drop] + indices[drop + 1 :])
            ridge_map[ridge].remove(fid)
            if not ridge_map[ridge]:
                del ridge_map[ridge]

    for drop in range(dim + 1):
        add_facet(tuple(simplex[:drop] + simplex[drop + 1 :]))

    eps_visible = 1e-12 * (1.0 + scale)
    tol_cert = max(tolerance, 1e-12 * (1.0 + scale))
    for _ in range(50 + 20 * n):
        best_fid = min(facets, key=lambda fid: (facets[fid][2], fid))
        _, normal, offset = facets[best_fid]
        dots = points @ normal
        support = int(np.argmax(dots))
        if dots[support] <= offset + tol_cert:
            # Supporting hyperplane of the full hull found at the inner
            # polytope's minimum: the bound is tight on both sides.
            return max(offset, 0.0) if offset > tol_cert else 0.0

        # Flood-fill the facets visible from the support point, starting at
        # the violated one, so the removed region stays ridge-connected.
        visible = {best_fid}
        stack = [best_fid]
        while stack:
            fid = stack.pop()
            indices, _, _ = facets[fid]
            for drop in range(len(indices)):
                ridge = frozenset(indices[:drop] + indices[drop + 1 :])
                for neighbor in ridge_map.get(ridge, ()):
                    if neighbor in visible:
                        continue
                    _, n_nb, off_nb = facets[neighbor]
                    if points[support] @ n_nb > off_nb + eps_visible:
                        visible.add(neighbor)
                        stack.append(neighbor)
        horizon = []
        for fid in visible:
            indices, _, _ = facets[fid]
            for drop in range(len(indices)):
                ridge = frozenset(indices[:drop] + indices[drop + 1 :])
                others = [f for f in ridge_map[ridge] if f not in visible]
                if others:
                    horizon.append(ridge)
        for fid in list(visible):
            drop_facet(fid)
        for ridge in horizon:
            add_facet(tuple(sorted(ridge)) + (support,))
    raise HullExpansionError("support expansion did not converge; input may be degenerate")
