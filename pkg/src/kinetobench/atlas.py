"""Field grids, iso-conditioning curves, workspace boundary, and exports.

A FieldGrid samples one scalar field (1/kappa_A, 1/kappa_B, or the signed
boundary distance) on an nx x ny lattice of points, in Cartesian or joint
space, for one working mode.  Masked lattice points (IK/FK fails there) hold
NaN and never take part in interpolation.

Iso-curves come from marching squares with linear edge interpolation; cells
touching a masked corner are skipped (the workspace rim is produced
analytically by workspace_boundary instead, as circle arcs of radii L1 +/- L2
about the bases).  Level 1.0 of an inv-kappa field is the isotropy locus,
where the field only touches the level from below and ordinary crossings
vanish; those levels are extracted as the zero set of the signed generator
stored alongside the grid (cos(t3-t4) for A, |sin31|-|sin42| for B).

Exports: CSV (x, y, value, mask), a JSON structured document that round-trips
to the in-memory atlas, and a layered SVG (heatmap raster, contours,
boundary).  All three are deterministic: identical inputs give identical
bytes.  Matplotlib figure rendering lives in kinetobench.figures.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from kinetobench import _png
from kinetobench.batch import boundary_distance_batch, fk_batch_in_mode, ik_batch
from kinetobench.fivebar import WorkingMode
from kinetobench.model import FiveBarModel, model_hash

FIELDS = ("inv_kappa_a", "inv_kappa_b", "boundary_distance")

# signed generators whose zero set is the isotropy locus of each field
_SIGNED_FOR_FIELD = {"inv_kappa_a": "cosd", "inv_kappa_b": "beta_diff"}

DEFAULT_LEVELS = (0.1, 0.25, 0.5, 0.75, 0.9, 1.0)


@dataclass(frozen=True)
class FieldGrid:
    """Scalar field sampled on a rectangular lattice.

    values[ix, iy] belongs to (xs[ix], ys[iy]); mask is True where the sample
    is valid.  signed holds the isotropy generator for inv-kappa fields (NaN
    where masked), None for plain distance fields.
    """

    field: str
    space: str  # "cartesian" | "joint"
    mode: WorkingMode
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    signed: np.ndarray | None
    model_hash: str

    @property
    def nx(self) -> int:
        return len(self.xs)

    @property
    def ny(self) -> int:
        return len(self.ys)

    @property
    def domain(self) -> tuple[float, float, float, float]:
        return (float(self.xs[0]), float(self.xs[-1]), float(self.ys[0]), float(self.ys[-1]))


@dataclass(frozen=True)
class IsoCurveSet:
    levels: tuple[float, ...]
    polylines: dict  # level -> list of (k, 2) float arrays


@dataclass(frozen=True)
class Arc:
    """Circular boundary arc: center, radius, and the admissible angle span."""

    center: tuple[float, float]
    radius: float
    phi_start: float
    phi_end: float
    leg: int  # 0: base_a, 1: base_b
    kind: str  # "outer" | "inner"


@dataclass(frozen=True)
class Atlas:
    """One mode's worth of field + curves + boundary, ready for export."""

    grid: FieldGrid
    curves: IsoCurveSet
    boundary: list
    levels: tuple[float, ...] = field(default=DEFAULT_LEVELS)


def cartesian_domain(model: FiveBarModel, inflate: float = 0.05) -> tuple[float, float, float, float]:
    """Workspace bounding box inflated by a margin fraction."""
    ax, ay = model.base_a
    bx, by = model.base_b
    r = model.reach_outer
    xmin, xmax = min(ax, bx) - r, max(ax, bx) + r
    ymin, ymax = min(ay, by) - r, max(ay, by) + r
    mx, my = inflate * (xmax - xmin), inflate * (ymax - ymin)
    return (xmin - mx, xmax + mx, ymin - my, ymax + my)


def joint_domain(model: FiveBarModel) -> tuple[float, float, float, float]:
    """The joint-limit box of (theta1, theta2)."""
    lim = model.limits
    return (lim.q_min[0], lim.q_max[0], lim.q_min[1], lim.q_max[1])


def evaluate_grid(
    model: FiveBarModel,
    domain: tuple[float, float, float, float],
    nx: int,
    ny: int,
    field_name: str,
    mode: WorkingMode,
    space: str = "cartesian",
) -> FieldGrid:
    """Sample a kinetostatic field on a lattice over the domain rectangle.

    Cartesian grids mask points where IK fails in the given mode (equivalent
    to workspace membership); joint grids mask where no FK branch carries the
    mode's elbow signs.
    """
    if field_name not in FIELDS:
        raise ValueError(f"field must be one of {FIELDS}, got {field_name!r}")
    if nx < 2 or ny < 2:
        raise ValueError("grid resolution must be at least 2x2")
    xmin, xmax, ymin, ymax = domain
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"empty domain {domain}")
    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")

    if space == "cartesian":
        sol = ik_batch(model, gx, gy, mode.s1, mode.s2)
        px, py = gx, gy
    elif space == "joint":
        sol = fk_batch_in_mode(model, gx, gy, mode.s1, mode.s2)
        px, py = sol["px"], sol["py"]
    else:
        raise ValueError(f"space must be 'cartesian' or 'joint', got {space!r}")

    mask = sol["valid"]
    nanfill = np.where(mask, 0.0, np.nan)
    if field_name == "boundary_distance":
        values = boundary_distance_batch(model, px, py) + nanfill
        signed = None
    else:
        values = sol[field_name] + nanfill
        gen = _SIGNED_FOR_FIELD[field_name]
        if gen == "cosd":
            signed = sol["cosd"] + nanfill
        else:
            signed = np.abs(sol["sin31"]) - np.abs(sol["sin42"]) + nanfill
    return FieldGrid(
        field=field_name,
        space=space,
        mode=mode,
        xs=xs,
        ys=ys,
        values=values,
        mask=mask,
        signed=signed,
        model_hash=model_hash(model),
    )


# --- marching squares ------------------------------------------------------

# Cell corners in (ix, iy) offsets, counterclockwise; edges join consecutive
# corners.  The lookup maps the 4-bit "corner above level" code to the pairs
# of edges each segment crosses.  Codes 5 and 10 are saddles, resolved by the
# cell-center sample.
_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))
_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0))
_SEGMENTS = {
    0: (), 15: (),
    1: ((3, 0),), 14: ((3, 0),),
    2: ((0, 1),), 13: ((0, 1),),
    4: ((1, 2),), 11: ((1, 2),),
    8: ((2, 3),), 7: ((2, 3),),
    3: ((3, 1),), 12: ((3, 1),),
    6: ((0, 2),), 9: ((0, 2),),
}
_SADDLE = {
    5: (((0, 1), (2, 3)), ((3, 0), (1, 2))),
    10: (((3, 0), (1, 2)), ((0, 1), (2, 3))),
}


def _edge_key(ix: int, iy: int, edge: int) -> tuple:
    """Canonical grid-wide identifier of a cell edge (shared by neighbors)."""
    (ax, ay), (bx, by) = _CORNERS[_EDGES[edge][0]], _CORNERS[_EDGES[edge][1]]
    p = (ix + ax, iy + ay)
    q = (ix + bx, iy + by)
    return (p, q) if p <= q else (q, p)


def _interp(xs, ys, corner_a, corner_b, va, vb, level, refine_eval=None):
    t = 0.5 if vb == va else (level - va) / (vb - va)
    t = min(1.0, max(0.0, t))
    ax, ay = float(xs[corner_a[0]]), float(ys[corner_a[1]])
    bx, by = float(xs[corner_b[0]]), float(ys[corner_b[1]])
    if refine_eval is not None and va != vb:
        # root-polish along the edge with the true field: linear
        # interpolation degrades where the field gradient diverges (near the
        # workspace rim), and the isotropy-locus contract is on re-evaluated
        # values, not interpolated ones
        lo_t, hi_t = 0.0, 1.0
        f_lo = va - level
        for _ in range(30):
            mid = 0.5 * (lo_t + hi_t)
            fm = refine_eval(ax + mid * (bx - ax), ay + mid * (by - ay))
            if math.isnan(fm):
                break  # edge dips out of the workspace: keep the linear t
            fm -= level
            if (fm > 0.0) == (f_lo > 0.0):
                lo_t, f_lo = mid, fm
            else:
                hi_t = mid
        else:
            t = 0.5 * (lo_t + hi_t)
    x = ax * (1 - t) + bx * t
    y = ay * (1 - t) + by * t
    return (float(x), float(y))


def _march_level(
    xs: np.ndarray,
    ys: np.ndarray,
    values: np.ndarray,
    mask: np.ndarray,
    level: float,
    sampler: Callable[[float, float], float] | None,
    refine_eval: Callable[[float, float], float] | None = None,
) -> list[np.ndarray]:
    """Marching squares for one level; returns stitched polylines."""
    nx, ny = values.shape
    segments = []  # (edge_key_a, edge_key_b, point_a, point_b)
    for ix in range(nx - 1):
        for iy in range(ny - 1):
            corners = [(ix + dx, iy + dy) for dx, dy in _CORNERS]
            if not all(mask[cx, cy] for cx, cy in corners):
                continue
            vals = [values[cx, cy] for cx, cy in corners]
            code = 0
            for bit, v in enumerate(vals):
                if v > level:
                    code |= 1 << bit
            if code in _SADDLE:
                if sampler is not None:
                    center = sampler(
                        0.5 * (xs[ix] + xs[ix + 1]), 0.5 * (ys[iy] + ys[iy + 1])
                    )
                else:
                    center = sum(vals) / 4.0
                pairs = _SADDLE[code][0 if center > level else 1]
            else:
                pairs = _SEGMENTS[code]
            for ea, eb in pairs:
                ca0, ca1 = _EDGES[ea]
                cb0, cb1 = _EDGES[eb]
                pa = _interp(xs, ys, corners[ca0], corners[ca1], vals[ca0], vals[ca1],
                             level, refine_eval)
                pb = _interp(xs, ys, corners[cb0], corners[cb1], vals[cb0], vals[cb1],
                             level, refine_eval)
                segments.append((_edge_key(ix, iy, ea), _edge_key(ix, iy, eb), pa, pb))
    return _stitch(segments)


def _stitch(segments: list) -> list[np.ndarray]:
    """Merge segments sharing edge crossings into maximal polylines."""
    if not segments:
        return []
    point_at: dict = {}
    adjacency: dict = {}
    for idx, (ka, kb, pa, pb) in enumerate(segments):
        point_at[ka] = pa
        point_at[kb] = pb
        adjacency.setdefault(ka, []).append((kb, idx))
        adjacency.setdefault(kb, []).append((ka, idx))

    used = [False] * len(segments)
    polylines = []
    # walk open chains from their degree-1 endpoints first so closed loops
    # are what remains; key order keeps the result deterministic
    ordered = sorted(adjacency, key=lambda k: (len(adjacency[k]) != 1, k))
    for start in ordered:
        while any(not used[idx] for _, idx in adjacency[start]):
            chain = [start]
            node = start
            while True:
                step = next(((nxt, idx) for nxt, idx in adjacency[node] if not used[idx]), None)
                if step is None:
                    break
                nxt, idx = step
                used[idx] = True
                chain.append(nxt)
                node = nxt
            if len(chain) >= 2:
                polylines.append(np.array([point_at[k] for k in chain]))
    return polylines


def extract_isocurves(
    grid: FieldGrid,
    levels: Sequence[float],
    sampler: Callable[[float, float], float] | None = None,
    signed_sampler: Callable[[float, float], float] | None = None,
) -> IsoCurveSet:
    """Level sets of the grid field as polylines.

    Levels must lie in (0, 1] for inv-kappa fields.  A level equal to the
    field's theoretical maximum 1.0 has no two-sided crossings; it is
    extracted as the zero set of the grid's signed isotropy generator, with
    vertices root-polished along cell edges when signed_sampler is given
    (plain interpolation cannot bound the re-evaluated error near the
    workspace rim, where the field gradient diverges).
    sampler(x, y), when given, re-evaluates the true field at cell centers to
    break saddle ambiguities; the default uses the corner mean.
    """
    if not np.any(grid.mask):
        raise ValueError("grid has no unmasked cells")
    polylines: dict = {}
    for level in levels:
        if grid.field != "boundary_distance" and not 0.0 < level <= 1.0:
            raise ValueError(f"levels for {grid.field} must be in (0, 1], got {level}")
        if grid.field in _SIGNED_FOR_FIELD and abs(level - 1.0) < 1e-12:
            if grid.signed is None:
                raise ValueError("grid lacks the signed generator for level 1.0")
            chains = _march_level(grid.xs, grid.ys, grid.signed, grid.mask, 0.0,
                                  signed_sampler, refine_eval=signed_sampler)
        else:
            chains = _march_level(grid.xs, grid.ys, grid.values, grid.mask, level, sampler)
        polylines[float(level)] = chains
    return IsoCurveSet(levels=tuple(float(lv) for lv in levels), polylines=polylines)


# --- analytic workspace boundary -------------------------------------------


def workspace_boundary_arcs(model: FiveBarModel) -> list[Arc]:
    """Admissible arcs of the four annulus circles.

    Each leg's outer/inner circle is clipped to the other leg's annulus; the
    admissible set is symmetric in the angle from the base-to-base axis, so
    it comes out as one or two mirrored angular intervals per circle.
    """
    bases = (model.base_a, model.base_b)
    radii = ((model.l1 + model.l2), abs(model.l1 - model.l2))
    arcs = []
    for leg in (0, 1):
        gx, gy = bases[leg]
        ox, oy = bases[1 - leg]
        sep = math.hypot(ox - gx, oy - gy)
        axis = math.atan2(oy - gy, ox - gx)
        for kind, radius in zip(("outer", "inner"), radii):
            if radius <= 0.0:
                continue
            outer, inner = radii
            # other-leg constraint: inner <= |p - other_base| <= outer
            # |p - other|^2 = radius^2 + sep^2 - 2*radius*sep*cos(delta)
            denom = 2.0 * radius * sep
            c_hi = (radius**2 + sep**2 - inner**2) / denom  # cos(delta) <= c_hi
            c_lo = (radius**2 + sep**2 - outer**2) / denom  # cos(delta) >= c_lo
            if c_lo > 1.0 or c_hi < -1.0:
                continue
            d_min = 0.0 if c_hi >= 1.0 else math.acos(c_hi)
            d_max = math.pi if c_lo <= -1.0 else math.acos(c_lo)
            if d_max <= d_min:
                continue
            if d_min == 0.0 and d_max == math.pi:
                arcs.append(Arc((gx, gy), radius, axis - math.pi, axis + math.pi, leg, kind))
            elif d_min == 0.0:
                arcs.append(Arc((gx, gy), radius, axis - d_max, axis + d_max, leg, kind))
            elif d_max == math.pi:
                # two arcs meeting at the far point merge into one through pi
                arcs.append(Arc((gx, gy), radius, axis + d_min, axis + 2 * math.pi - d_min, leg, kind))
            else:
                arcs.append(Arc((gx, gy), radius, axis + d_min, axis + d_max, leg, kind))
                arcs.append(Arc((gx, gy), radius, axis - d_max, axis - d_min, leg, kind))
    return arcs


def sample_arc(arc: Arc, n: int, trim: bool = False) -> np.ndarray:
    """(n, 2) points along the arc; trim=True keeps strictly interior points.

    Interior sampling avoids the corner junctions where two legs stretch at
    once and the conditioning of B degenerates to 0/0.
    """
    if trim:
        phis = np.linspace(arc.phi_start, arc.phi_end, n + 2)[1:-1]
    else:
        phis = np.linspace(arc.phi_start, arc.phi_end, n)
    return np.stack(
        [arc.center[0] + arc.radius * np.cos(phis), arc.center[1] + arc.radius * np.sin(phis)],
        axis=-1,
    )


def inward_point(model: FiveBarModel, arc: Arc, point: np.ndarray, eps: float) -> tuple[float, float]:
    """Nudge a boundary point radially into the workspace by eps."""
    gx, gy = arc.center
    r = math.hypot(point[0] - gx, point[1] - gy)
    ux, uy = (point[0] - gx) / r, (point[1] - gy) / r
    sign = -1.0 if arc.kind == "outer" else 1.0
    return (point[0] + sign * eps * ux, point[1] + sign * eps * uy)


def workspace_boundary(
    model: FiveBarModel, mode: WorkingMode | None = None, resolution: int = 256
) -> list[np.ndarray]:
    """Boundary polylines from the analytic arcs.

    The symmetric five-bar's reachable region is the same annulus
    intersection for all four working modes, so the mode argument does not
    change the result; it is accepted for interface symmetry with the grid
    operations.  resolution is the sample count a full circle would get; each
    arc receives a proportional share (minimum 2).
    """
    polylines = []
    for arc in workspace_boundary_arcs(model):
        span = arc.phi_end - arc.phi_start
        n = max(2, int(math.ceil(resolution * span / (2.0 * math.pi))) + 1)
        polylines.append(sample_arc(arc, n))
    return polylines


# --- exports -----------------------------------------------------------------


def make_atlas(
    model: FiveBarModel,
    mode: WorkingMode,
    field_name: str = "inv_kappa_a",
    nx: int = 200,
    ny: int = 200,
    levels: Sequence[float] = DEFAULT_LEVELS,
    space: str = "cartesian",
    domain: tuple[float, float, float, float] | None = None,
) -> Atlas:
    """Grid + iso-curves + boundary for one working mode."""
    if domain is None:
        domain = cartesian_domain(model) if space == "cartesian" else joint_domain(model)
    grid = evaluate_grid(model, domain, nx, ny, field_name, mode, space=space)

    sampler = None
    signed_sampler = None
    if space == "cartesian" and field_name != "boundary_distance":
        from kinetobench.conditioning import indices_from_angles
        from kinetobench.fivebar import inverse_kinematics

        def sampler(x: float, y: float) -> float:
            posture = inverse_kinematics(model, (x, y), mode)
            if posture is None:
                return math.nan
            idx = indices_from_angles(posture.theta1, posture.theta2,
                                      posture.theta3, posture.theta4)
            return getattr(idx, field_name)

        def signed_sampler(x: float, y: float) -> float:
            posture = inverse_kinematics(model, (x, y), mode)
            if posture is None:
                return math.nan
            if _SIGNED_FOR_FIELD[field_name] == "cosd":
                return math.cos(posture.theta3 - posture.theta4)
            return abs(math.sin(posture.theta3 - posture.theta1)) - abs(
                math.sin(posture.theta4 - posture.theta2)
            )

    if grid.mask.any():
        curves = extract_isocurves(grid, levels, sampler=sampler, signed_sampler=signed_sampler)
    else:
        # degenerate but valid: a lattice that misses the workspace entirely
        curves = IsoCurveSet(levels=tuple(float(lv) for lv in levels),
                             polylines={float(lv): [] for lv in levels})
    boundary = workspace_boundary(model) if space == "cartesian" else []
    return Atlas(grid=grid, curves=curves, boundary=boundary, levels=tuple(levels))


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return repr(float(x))


def export_csv(atlas: Atlas, path: str | Path) -> Path:
    """One row per lattice point: x, y, value, mask (x varies fastest)."""
    grid = atlas.grid
    lines = ["x,y,value,mask"]
    for iy in range(grid.ny):
        for ix in range(grid.nx):
            lines.append(
                f"{_fmt(grid.xs[ix])},{_fmt(grid.ys[iy])},"
                f"{_fmt(grid.values[ix, iy])},{1 if grid.mask[ix, iy] else 0}"
            )
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _atlas_to_doc(atlas: Atlas) -> dict:
    grid = atlas.grid

    def listify(arr):
        return [None if (isinstance(v, float) and math.isnan(v)) else v for v in arr]

    return {
        "schema": 1,
        "kind": "atlas",
        "model_hash": grid.model_hash,
        "field": grid.field,
        "space": grid.space,
        "mode": str(grid.mode),
        "domain": list(grid.domain),
        "nx": grid.nx,
        "ny": grid.ny,
        "xs": [float(v) for v in grid.xs],
        "ys": [float(v) for v in grid.ys],
        "values": [listify(col) for col in grid.values.tolist()],
        "signed": None if grid.signed is None else [listify(col) for col in grid.signed.tolist()],
        "mask": [[bool(b) for b in col] for col in grid.mask.tolist()],
        "levels": list(atlas.levels),
        "curves": {
            repr(float(level)): [[[float(x), float(y)] for x, y in chain] for chain in chains]
            for level, chains in sorted(atlas.curves.polylines.items())
        },
        "boundary": [[[float(x), float(y)] for x, y in poly] for poly in atlas.boundary],
    }


def export_json(atlas: Atlas, path: str | Path) -> Path:
    """Structured document carrying the full grid + curves + metadata."""
    path = Path(path)
    path.write_text(
        json.dumps(_atlas_to_doc(atlas), sort_keys=True, separators=(",", ":"), allow_nan=False)
        + "\n"
    )
    return path


def load_atlas(path: str | Path) -> Atlas:
    """Re-parse an exported structured document into an Atlas."""
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != 1 or doc.get("kind") != "atlas":
        raise ValueError(f"{path}: not an atlas document")

    def arr(rows):
        return np.array(
            [[math.nan if v is None else float(v) for v in col] for col in rows], dtype=float
        )

    grid = FieldGrid(
        field=doc["field"],
        space=doc["space"],
        mode=WorkingMode.parse(doc["mode"]),
        xs=np.array(doc["xs"], dtype=float),
        ys=np.array(doc["ys"], dtype=float),
        values=arr(doc["values"]),
        mask=np.array(doc["mask"], dtype=bool),
        signed=None if doc["signed"] is None else arr(doc["signed"]),
        model_hash=doc["model_hash"],
    )
    curves = IsoCurveSet(
        levels=tuple(float(lv) for lv in doc["levels"]),
        polylines={
            float(level): [np.array(chain, dtype=float) for chain in chains]
            for level, chains in doc["curves"].items()
        },
    )
    boundary = [np.array(poly, dtype=float) for poly in doc["boundary"]]
    return Atlas(grid=grid, curves=curves, boundary=boundary, levels=tuple(doc["levels"]))


def _heatmap_rgba(grid: FieldGrid) -> np.ndarray:
    """Fixed colormap: value 0 -> red, 1 -> blue, masked -> transparent."""
    vals = grid.values
    if grid.field == "boundary_distance":
        finite = vals[grid.mask]
        top = float(finite.max()) if finite.size else 1.0
        scaled = np.clip(vals / top if top > 0 else vals, 0.0, 1.0)
    else:
        scaled = np.clip(vals, 0.0, 1.0)
    h, w = grid.ny, grid.nx
    rgba = np.zeros((h, w, 4), dtype=np.uint8)
    # image rows run top-down: row 0 is the max-y lattice line
    v = scaled.T[::-1, :]
    m = grid.mask.T[::-1, :]
    with np.errstate(invalid="ignore"):
        rgba[..., 0] = np.where(m, np.round(255 * (1.0 - np.nan_to_num(v))), 0).astype(np.uint8)
        rgba[..., 2] = np.where(m, np.round(255 * np.nan_to_num(v)), 0).astype(np.uint8)
        rgba[..., 3] = np.where(m, 255, 0).astype(np.uint8)
    return rgba


def export_svg(atlas: Atlas, path: str | Path, width: float = 800.0) -> Path:
    """Layered SVG: heatmap raster, contour polylines, boundary arcs.

    Deterministic byte output: fixed float formatting, sorted levels, and a
    handwritten PNG raster with no metadata.
    """
    grid = atlas.grid
    xmin, xmax, ymin, ymax = grid.domain
    scale = width / (xmax - xmin)
    height = (ymax - ymin) * scale

    def to_px(x, y):
        return ((x - xmin) * scale, (ymax - y) * scale)

    def fmt(v: float) -> str:
        return f"{v:.6f}"

    def path_d(poly) -> str:
        pts = [to_px(float(x), float(y)) for x, y in poly]
        return "M" + "L".join(f"{fmt(px)} {fmt(py)}" for px, py in pts)

    png_b64 = base64.b64encode(_png.encode_rgba(_heatmap_rgba(grid))).decode("ascii")
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(width)}" height="{fmt(height)}" '
        f'viewBox="0 0 {fmt(width)} {fmt(height)}">',
        f"<desc>field={grid.field} mode={grid.mode} space={grid.space} "
        f"model={grid.model_hash} levels={','.join(repr(float(v)) for v in atlas.levels)}</desc>",
        f'<g id="heatmap"><image x="0" y="0" width="{fmt(width)}" height="{fmt(height)}" '
        f'preserveAspectRatio="none" style="image-rendering:pixelated" '
        f'xlink:href="data:image/png;base64,{png_b64}" '
        f'xmlns:xlink="http://www.w3.org/1999/xlink"/></g>',
        '<g id="contours" fill="none" stroke="#000000" stroke-width="1">',
    ]
    for level in sorted(atlas.curves.polylines):
        for poly in atlas.curves.polylines[level]:
            parts.append(f'<path data-level="{repr(float(level))}" d="{path_d(poly)}"/>')
    parts.append("</g>")
    parts.append('<g id="boundary" fill="none" stroke="#333333" stroke-width="2">')
    for poly in atlas.boundary:
        parts.append(f'<path d="{path_d(poly)}"/>')
    parts.append("</g>")
    parts.append("</svg>")
    out = Path(path)
    out.write_text("\n".join(parts) + "\n")
    return out


def export_atlas(atlas: Atlas, fmt: str, path: str | Path) -> Path:
    """Dispatch to one of the deterministic exporters (csv, json, svg)."""
    if fmt == "csv":
        return export_csv(atlas, path)
    if fmt == "json":
        return export_json(atlas, path)
    if fmt == "svg":
        return export_svg(atlas, path)
    raise ValueError(f"unknown export format {fmt!r} (csv, json, svg)")
