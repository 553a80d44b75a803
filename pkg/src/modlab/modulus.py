"""Discrete conformal modulus of curve families.

A domain is discretized into cells (polar rings about the chart center or a
Cartesian window), curves are rasterized into per-cell incidence lengths, and
the modulus  min sum rho_c^2 A_c  subject to  m_g * sum_c rho_c l_{cg} >= 1
for every curve g  is solved by dual ascent with a closed-form inner
minimization. Includes the closed-form ring modulus, the weighted circle
family modulus against its radial-integral reference, and the weighted
infimum with its extremal density.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .diskgeom import BOUNDARY_MARGIN, Polyline, euclid_radius
from .quadrature import RingSpec, ScalarField, qnorm_profile, ring_reciprocal_integral

__all__ = [
    "DiscretizedDomain",
    "PolylineFamily",
    "CurveFamily",
    "DensityField",
    "ModulusResult",
    "polar_grid",
    "polar_grid_from_band_centers",
    "cartesian_grid",
    "circle_family",
    "radial_connecting_family",
    "horizontal_connecting_family",
    "rasterize_family",
    "modulus_discrete",
    "ring_modulus_exact",
    "circle_family_modulus",
    "weighted_infimum",
    "density_to_csv",
    "density_to_svg",
]


@dataclass(frozen=True)
class DiscretizedDomain:
    """Cells with centers and areas in both metrics, plus a grid descriptor."""

    centers: np.ndarray  # complex cell centers
    area_euclid: np.ndarray
    area_hyp: np.ndarray
    geometry: dict

    def __post_init__(self):
        if np.any(self.area_euclid <= 0) or np.any(self.area_hyp <= 0):
            raise ValueError("cell areas must be positive")
        if np.any(np.abs(self.centers) > 1.0 - BOUNDARY_MARGIN):
            raise ValueError("cell centers must lie strictly inside the disk")

    @property
    def n_cells(self) -> int:
        return len(self.centers)


def polar_grid(ring: RingSpec, n_r: int, n_theta: int) -> DiscretizedDomain:
    """Polar cells over the ring, bands uniform in hyperbolic radius.

    Cell centers sit at the hyperbolic band midpoint, so circles placed at
    band centers share the metric factor of their cells exactly.
    """
    if n_r < 1 or n_theta < 4:
        raise ValueError("need n_r >= 1 and n_theta >= 4")
    r_edges = np.linspace(ring.r_inner, ring.r_outer, n_r + 1)
    R_edges = np.tanh(0.5 * r_edges)
    r_mid = 0.5 * (r_edges[:-1] + r_edges[1:])
    R_mid = np.tanh(0.5 * r_mid)
    theta_edges = np.linspace(0.0, 2.0 * math.pi, n_theta + 1)
    theta_mid = 0.5 * (theta_edges[:-1] + theta_edges[1:])

    d_theta = 2.0 * math.pi / n_theta
    ring_areas = 0.5 * d_theta * (R_edges[1:] ** 2 - R_edges[:-1] ** 2)  # per sector
    centers = (R_mid[:, None] * np.exp(1j * theta_mid[None, :])).ravel()
    area_e = np.repeat(ring_areas, n_theta)
    factor = 4.0 / (1.0 - np.abs(centers) ** 2) ** 2
    return DiscretizedDomain(
        centers=centers,
        area_euclid=area_e,
        area_hyp=area_e * factor,
        geometry={
            "kind": "polar",
            "n_r": n_r,
            "n_theta": n_theta,
            "r_edges_hyp": r_edges,
            "R_edges": R_edges,
            "theta_edges": theta_edges,
        },
    )


def polar_grid_from_band_centers(centers_hyp, r_inner: float, r_outer: float,
                                 n_theta: int) -> DiscretizedDomain:
    """Polar grid whose radial bands bracket the given hyperbolic radii.

    Band edges are the midpoints of consecutive center radii with the ring
    bounds closing the ends, so each given radius lies inside its own band;
    for uniformly spaced centers this reproduces the uniform grid.
    """
    centers_hyp = np.asarray(sorted(map(float, centers_hyp)))
    if centers_hyp[0] <= r_inner or centers_hyp[-1] >= r_outer:
        raise ValueError("band centers must lie strictly between the ring radii")
    r_edges = np.concatenate(
        [[r_inner], 0.5 * (centers_hyp[:-1] + centers_hyp[1:]), [r_outer]]
    )
    R_edges = np.tanh(0.5 * r_edges)
    r_mid = 0.5 * (r_edges[:-1] + r_edges[1:])
    R_mid = np.tanh(0.5 * r_mid)
    theta_edges = np.linspace(0.0, 2.0 * math.pi, n_theta + 1)
    theta_mid = 0.5 * (theta_edges[:-1] + theta_edges[1:])
    d_theta = 2.0 * math.pi / n_theta
    ring_areas = 0.5 * d_theta * (R_edges[1:] ** 2 - R_edges[:-1] ** 2)
    centers = (R_mid[:, None] * np.exp(1j * theta_mid[None, :])).ravel()
    area_e = np.repeat(ring_areas, n_theta)
    factor = 4.0 / (1.0 - np.abs(centers) ** 2) ** 2
    return DiscretizedDomain(
        centers=centers,
        area_euclid=area_e,
        area_hyp=area_e * factor,
        geometry={
            "kind": "polar",
            "n_r": len(centers_hyp),
            "n_theta": n_theta,
            "r_edges_hyp": r_edges,
            "R_edges": R_edges,
            "theta_edges": theta_edges,
        },
    )


def cartesian_grid(window, n_x: int, n_y: int) -> DiscretizedDomain:
    """Rectangular cells over a window that must sit inside the unit disk."""
    (x0, x1), (y0, y1) = window
    if n_x < 1 or n_y < 1:
        raise ValueError("need positive cell counts")
    x_edges = np.linspace(x0, x1, n_x + 1)
    y_edges = np.linspace(y0, y1, n_y + 1)
    xc = 0.5 * (x_edges[:-1] + x_edges[1:])
    yc = 0.5 * (y_edges[:-1] + y_edges[1:])
    X, Y = np.meshgrid(xc, yc, indexing="ij")
    centers = (X + 1j * Y).ravel()
    corners = max(math.hypot(x0, y0), math.hypot(x0, y1), math.hypot(x1, y0), math.hypot(x1, y1))
    if corners >= 1.0 - BOUNDARY_MARGIN:
        raise ValueError("window must lie strictly inside the unit disk")
    area = ((x1 - x0) / n_x) * ((y1 - y0) / n_y)
    factor = 4.0 / (1.0 - np.abs(centers) ** 2) ** 2
    return DiscretizedDomain(
        centers=centers,
        area_euclid=np.full(centers.shape, area),
        area_hyp=area * factor,
        geometry={
            "kind": "cartesian",
            "n_x": n_x,
            "n_y": n_y,
            "x_edges": x_edges,
            "y_edges": y_edges,
        },
    )


@dataclass(frozen=True)
class PolylineFamily:
    """Curves still in geometric form, before rasterization."""

    polylines: tuple
    kind: str  # "connecting" | "circle_family"
    multiplicities: tuple = None
    circle_radii: tuple = None  # hyperbolic radii, for circle families

    def __post_init__(self):
        mult = self.multiplicities
        if mult is None:
            mult = tuple(1 for _ in self.polylines)
        mult = tuple(int(m) for m in mult)
        if len(mult) != len(self.polylines) or any(m < 1 for m in mult):
            raise ValueError("multiplicities must be positive, one per curve")
        object.__setattr__(self, "multiplicities", mult)

    def __len__(self) -> int:
        return len(self.polylines)


@dataclass(frozen=True)
class CurveFamily:
    """Rasterized curves: per-curve (cell index, euclid length, hyp length)."""

    curves: tuple  # tuple of (cells, len_e, len_h) array triples
    kind: str
    multiplicities: tuple

    def __post_init__(self):
        if len(self.multiplicities) != len(self.curves):
            raise ValueError("one multiplicity per curve")
        for cells, le, lh in self.curves:
            if len(cells) == 0:
                continue
            if np.any(le < 0) or np.any(lh < 0):
                raise ValueError("incidence lengths must be non-negative")

    def __len__(self) -> int:
        return len(self.curves)

    def incidence_matrix(self, n_cells: int, metric: str) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        col = 1 if metric == "euclidean" else 2
        for i, triple in enumerate(self.curves):
            cells, lengths = triple[0], triple[col]
            rows.extend([i] * len(cells))
            cols.extend(cells.tolist())
            vals.extend(lengths.tolist())
        return sp.csr_matrix(
            (vals, (rows, cols)), shape=(len(self.curves), n_cells)
        )

    def with_multiplicities(self, multiplicities) -> "CurveFamily":
        return CurveFamily(self.curves, self.kind, tuple(int(m) for m in multiplicities))


@dataclass(frozen=True)
class DensityField:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if np.any(rho < 0) or not np.all(np.isfinite(rho)):
            raise ValueError("density must be non-negative and finite")
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class ModulusResult:
    value: float
    extremal: DensityField
    iterations: int
    max_constraint_violation: float
    metric: str
    converged: bool = True
    dual_value: float = 0.0

    @property
    def duality_gap(self) -> float:
        return self.value - self.dual_value

    def to_json(self, path=None):
        data = {
            "value": self.value,
            "metric": self.metric,
            "iterations": self.iterations,
            "max_constraint_violation": self.max_constraint_violation,
            "converged": self.converged,
            "dual_value": self.dual_value,
            "duality_gap": self.duality_gap,
        }
        if path is not None:
            Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return data


def density_to_csv(dom: DiscretizedDomain, density: DensityField, path) -> None:
    lines = ["re,im,rho"]
    lines += [
        f"{float(z.real)!r},{float(z.imag)!r},{float(v)!r}" for z, v in zip(dom.centers, density.rho)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def density_to_svg(dom: DiscretizedDomain, density: DensityField, path, title="extremal density") -> None:
    """Heatmap of the extremal density on a polar domain."""
    from .svgplot import polar_heatmap_svg, write_svg

    write_svg(polar_heatmap_svg(dom, density.rho, title=title), path)


# ---------------------------------------------------------------------------
# family builders


def circle_family(ring: RingSpec, n_circles: int, n_vertices: int = 2048) -> PolylineFamily:
    """Concentric circles at hyperbolic band midpoints of the ring."""
    if n_circles < 1:
        raise ValueError("need at least one circle")
    dr = (ring.r_outer - ring.r_inner) / n_circles
    radii = ring.r_inner + (np.arange(n_circles) + 0.5) * dr
    theta = np.linspace(0.0, 2.0 * math.pi, n_vertices, endpoint=False)
    polylines = []
    for r in radii:
        R = euclid_radius(float(r))
        pts = R * np.exp(1j * theta)
        polylines.append(Polyline(tuple(pts), closed=True))
    return PolylineFamily(
        tuple(polylines), kind="circle_family", circle_radii=tuple(map(float, radii))
    )


def radial_connecting_family(ring: RingSpec, n_rays: int) -> PolylineFamily:
    """Radial geodesics joining the two boundary circles, one per sector center."""
    R1, R2 = euclid_radius(ring.r_inner), euclid_radius(ring.r_outer)
    if R1 <= 0:
        raise ValueError("connecting family needs r_inner > 0")
    theta = (np.arange(n_rays) + 0.5) * (2.0 * math.pi / n_rays)
    polylines = [
        Polyline((R1 * np.exp(1j * t), R2 * np.exp(1j * t))) for t in theta
    ]
    return PolylineFamily(tuple(polylines), kind="connecting")


def horizontal_connecting_family(window, n_curves: int) -> PolylineFamily:
    """Left-to-right segments across a rectangular window, one per row."""
    (x0, x1), (y0, y1) = window
    ys = y0 + (np.arange(n_curves) + 0.5) * (y1 - y0) / n_curves
    polylines = [Polyline((complex(x0, y), complex(x1, y))) for y in ys]
    return PolylineFamily(tuple(polylines), kind="connecting")


# ---------------------------------------------------------------------------
# rasterization


def _split_parameters_polar(p: complex, d: complex, geometry) -> list:
    """Parameters t in (0,1) where the segment p + t d crosses cell edges."""
    ts = []
    R_edges = geometry["R_edges"]
    dd = (d.real * d.real + d.imag * d.imag)
    if dd == 0.0:
        return ts
    # radial span of the segment: perigee may undercut both endpoints
    rp, rq = abs(p), abs(p + d)
    t_foot = -(p.real * d.real + p.imag * d.imag) / dd
    rmin = min(rp, rq)
    if 0.0 < t_foot < 1.0:
        rmin = min(rmin, abs(p + t_foot * d))
    rmax = max(rp, rq)
    k0 = np.searchsorted(R_edges, rmin - 1e-15)
    k1 = np.searchsorted(R_edges, rmax + 1e-15)
    b = 2.0 * (p.real * d.real + p.imag * d.imag)
    c0 = abs(p) ** 2
    for k in range(max(k0 - 1, 0), min(k1 + 1, len(R_edges))):
        c = c0 - R_edges[k] ** 2
        disc = b * b - 4.0 * dd * c
        if disc <= 0.0:
            continue
        root = math.sqrt(disc)
        for t in ((-b - root) / (2.0 * dd), (-b + root) / (2.0 * dd)):
            if 1e-12 < t < 1.0 - 1e-12:
                ts.append(t)
    # angular sweep is monotone along a straight segment
    n_theta = geometry["n_theta"]
    a0 = math.atan2(p.imag, p.real) % (2.0 * math.pi)
    q = p + d
    a1 = math.atan2(q.imag, q.real) % (2.0 * math.pi)
    sweep = p.real * d.imag - p.imag * d.real  # sign of d(theta)/dt
    if sweep != 0.0:
        diff = (a1 - a0) % (2.0 * math.pi)
        if sweep < 0:
            diff = diff - 2.0 * math.pi
        step = 2.0 * math.pi / n_theta
        j_start = math.floor(a0 / step)
        n_cross = int(abs(diff) / step) + 2
        direction = 1 if sweep > 0 else -1
        for j in range(1, n_cross + 1):
            edge = (j_start + (j if direction > 0 else 1 - j)) * step
            # crossing of the full line at angle `edge`
            ca, sa = math.cos(edge), math.sin(edge)
            denom = d.imag * ca - d.real * sa
            if denom == 0.0:
                continue
            t = (p.real * sa - p.imag * ca) / denom
            if 1e-12 < t < 1.0 - 1e-12:
                z = p + t * d
                if z.real * ca + z.imag * sa > 0:  # ray, not its opposite
                    ts.append(t)
    return ts


def _split_parameters_cartesian(p: complex, d: complex, geometry) -> list:
    ts = []
    for edges, pp, dd in ((geometry["x_edges"], p.real, d.real), (geometry["y_edges"], p.imag, d.imag)):
        if dd == 0.0:
            continue
        lo, hi = sorted((pp, pp + dd))
        k0 = np.searchsorted(edges, lo - 1e-15)
        k1 = np.searchsorted(edges, hi + 1e-15)
        for k in range(max(k0 - 1, 0), min(k1 + 1, len(edges))):
            t = (edges[k] - pp) / dd
            if 1e-12 < t < 1.0 - 1e-12:
                ts.append(t)
    return ts


def _cell_of(z: complex, geometry):
    if geometry["kind"] == "polar":
        k = np.searchsorted(geometry["R_edges"], abs(z)) - 1
        if k < 0 or k >= geometry["n_r"]:
            return None
        theta = math.atan2(z.imag, z.real) % (2.0 * math.pi)
        j = int(theta / (2.0 * math.pi / geometry["n_theta"])) % geometry["n_theta"]
        return k * geometry["n_theta"] + j
    x_edges, y_edges = geometry["x_edges"], geometry["y_edges"]
    i = np.searchsorted(x_edges, z.real) - 1
    j = np.searchsorted(y_edges, z.imag) - 1
    if i < 0 or i >= geometry["n_x"] or j < 0 or j >= geometry["n_y"]:
        return None
    return i * geometry["n_y"] + j


def _rasterize_polyline(poly: Polyline, dom: DiscretizedDomain):
    geometry = dom.geometry
    splitter = _split_parameters_polar if geometry["kind"] == "polar" else _split_parameters_cartesian
    acc: dict = {}
    for p, q in poly.segments():
        d = q - p
        seg_len = abs(d)
        if seg_len == 0.0:
            continue
        ts = sorted(set([0.0, 1.0] + splitter(p, d, geometry)))
        for t0, t1 in zip(ts, ts[1:]):
            zm = p + 0.5 * (t0 + t1) * d
            cell = _cell_of(zm, geometry)
            if cell is None:
                continue
            le = seg_len * (t1 - t0)
            lh = le * 2.0 / (1.0 - abs(zm) ** 2)
            if cell in acc:
                acc[cell][0] += le
                acc[cell][1] += lh
            else:
                acc[cell] = [le, lh]
    cells = np.fromiter(acc.keys(), dtype=np.int64, count=len(acc))
    order = np.argsort(cells)
    le = np.array([acc[int(c)][0] for c in cells])
    lh = np.array([acc[int(c)][1] for c in cells])
    return cells[order], le[order], lh[order]


def rasterize_family(family: PolylineFamily, dom: DiscretizedDomain) -> CurveFamily:
    """Clip every polyline to the domain cells, collecting incidence lengths."""
    curves = tuple(_rasterize_polyline(poly, dom) for poly in family.polylines)
    return CurveFamily(curves, kind=family.kind, multiplicities=family.multiplicities)


# ---------------------------------------------------------------------------
# solver


def _power_iteration_norm(op, n: int, iters: int = 40, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return 0.0
    v /= norm
    sigma = 0.0
    for _ in range(iters):
        w = op(v)
        sigma = np.linalg.norm(w)
        if sigma <= 0.0:
            return 0.0
        v = w / sigma
    return sigma


def modulus_discrete(
    family: CurveFamily,
    dom: DiscretizedDomain,
    metric: str = "hyperbolic",
    tol: float = 1e-4,
    max_iter: int = 200_000,
    weights: np.ndarray = None,
) -> ModulusResult:
    """Solve the admissible-density quadratic program by dual ascent.

    Inner minimization is closed form (rho = L^T(m*lambda) / (2 w A)); the
    multipliers follow projected gradient steps with backtracking on the dual
    objective. Terminates when the worst constraint violation is below `tol`
    and the objective has been flat (relative change < tol) over a 50-step
    window. The reported density is rescaled to exact feasibility, so the
    value is an upper bound on the discrete optimum; `dual_value` is the
    matching lower bound.
    """
    if metric not in ("hyperbolic", "euclidean"):
        raise ValueError("metric must be 'hyperbolic' or 'euclidean'")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n_cells = dom.n_cells
    if len(family) == 0:
        return ModulusResult(
            value=0.0,
            extremal=DensityField(np.zeros(n_cells)),
            iterations=0,
            max_constraint_violation=0.0,
            metric=metric,
        )

    A = dom.area_hyp if metric == "hyperbolic" else dom.area_euclid
    if weights is not None:
        A = A * np.asarray(weights, dtype=float)
        if np.any(A <= 0):
            raise ValueError("weights must keep cell costs positive")
    L = family.incidence_matrix(n_cells, metric)
    m = np.asarray(family.multiplicities, dtype=float)
    total_len = np.asarray(L.sum(axis=1)).ravel()
    if np.any(total_len <= 0.0):
        raise ValueError("a curve has no incidence length inside the domain")

    LT = L.T.tocsr()
    inv2A = 0.5 / A

    def rho_of(lam):
        return LT.dot(m * lam) * inv2A

    def dual_value(lam, rho):
        return float(np.sum(lam) - np.sum(A * rho * rho))

    sigma = _power_iteration_norm(lambda v: m * L.dot(LT.dot(m * v) * inv2A), len(family))
    step = 1.0 / sigma if sigma > 0 else 1.0

    lam = np.zeros(len(family))
    rho = rho_of(lam)
    g_old = dual_value(lam, rho)
    objective_history = []
    violation = 1.0
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        grad = 1.0 - m * L.dot(rho)
        accepted = False
        for _ in range(40):
            lam_new = np.maximum(0.0, lam + step * grad)
            rho_new = rho_of(lam_new)
            g_new = dual_value(lam_new, rho_new)
            if g_new >= g_old - 1e-14 * max(abs(g_old), 1.0):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # step underflow: dual is stationary to machine precision
        lam, rho, g_old = lam_new, rho_new, g_new
        step *= 1.02
        primal = float(np.sum(A * rho * rho))
        objective_history.append(primal)
        violation = float(np.max(np.maximum(0.0, 1.0 - m * L.dot(rho))))
        if violation < tol and len(objective_history) > 50:
            prev = objective_history[-51]
            if abs(primal - prev) <= tol * max(primal, 1e-300):
                converged = True
                break

    slack = m * L.dot(rho)
    min_slack = float(np.min(slack))
    if 0.0 < min_slack < 1.0:
        rho = rho / min_slack
    value = float(np.sum(A * rho * rho))
    violation_final = float(np.max(np.maximum(0.0, 1.0 - m * L.dot(rho))))
    return ModulusResult(
        value=value,
        extremal=DensityField(rho),
        iterations=it,
        max_constraint_violation=violation_final,
        metric=metric,
        converged=converged,
        dual_value=g_old,
    )


def ring_modulus_exact(ring: RingSpec) -> float:
    """Modulus of the connecting family of the ring: 2 pi / log(R2/R1).

    R_i = tanh(r_i/2) are the Euclidean radii of the boundary circles; the
    logarithm of their ratio is the classical annulus quantity the discrete
    solver is validated against.
    """
    if ring.r_inner <= 0:
        raise ValueError("need r_inner > 0")
    R1, R2 = euclid_radius(ring.r_inner), euclid_radius(ring.r_outer)
    return 2.0 * math.pi / math.log(R2 / R1)


def circle_family_modulus(
    ring: RingSpec,
    Q: ScalarField,
    dom: DiscretizedDomain = None,
    n_circles: int = 64,
    n_theta: int = 256,
    tol: float = 1e-6,
):
    """Discrete weighted modulus of the family of ring circles vs its reference.

    Solves min sum rho^2 / Q * dA over densities admissible for n_circles
    sampled metric circles, and returns (value, reference) where the reference
    is the reciprocal radial integral of the matching ||Q|| profile. The two
    agree within discretization error.
    """
    if n_circles < 4:
        raise ValueError("need n_circles >= 4")
    if dom is None:
        dom = polar_grid(ring, n_r=n_circles, n_theta=n_theta)
    pf = circle_family(ring, n_circles, n_vertices=max(1024, 4 * dom.geometry.get("n_theta", n_theta)))
    fam = rasterize_family(pf, dom)
    q_cells = Q.evaluate_array(dom.centers)
    if np.any(q_cells <= 0):
        raise ValueError("Q must be positive on the ring")
    result = modulus_discrete(fam, dom, metric="hyperbolic", tol=tol, weights=1.0 / q_cells)
    profile = qnorm_profile(Q, ring, n_samples=max(128, 2 * n_circles), n_angular=512)
    reference = ring_reciprocal_integral(profile)
    return result.value, reference


def weighted_infimum(phi, q: float):
    """Minimize sum(phi * alpha^q * mass) over alpha >= 0 with sum(alpha*mass)=1.

    Returns (I, alpha) with the closed form I = (sum phi^-lam * mass)^(-1/lam),
    lam = 1/(q-1), attained at alpha proportional to phi^-lam.
    """
    if q <= 1.0:
        raise ValueError("need q > 1")
    values = np.array([float(v) for v, _ in phi])
    masses = np.array([float(m) for _, m in phi])
    if np.any(values <= 0) or np.any(masses <= 0):
        raise ValueError("phi values and masses must be positive")
    lam = 1.0 / (q - 1.0)
    pw = values ** (-lam)
    denom = float(np.sum(pw * masses))
    I = denom ** (-1.0 / lam)
    alpha = pw / denom
    return I, alpha
