"""Closed-form sample mappings of the disk and their distortion data.

Kinds: mobius (conformal), radial_stretch z|z|^{k-1}, winding r e^{i k theta},
compositions, and custom evaluators. Wirtinger derivatives come from analytic
formulas where the kind provides them and from central differences otherwise;
dilatation, Jacobian, multiplicity counts and the finite-distortion check are
derived from them. Pushforward carries curve families (with traversal
multiplicities for branched maps) into an image domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diskgeom import BOUNDARY_MARGIN, DiskPoint, MobiusAutomorphism, Polyline, as_complex
from .modulus import CurveFamily, DiscretizedDomain, PolylineFamily, rasterize_family

__all__ = [
    "SampleMap",
    "DistortionField",
    "MultiplicityReport",
    "ChartOverflowError",
    "K_INF",
    "identity_map",
    "mobius_map",
    "radial_stretch",
    "winding",
    "compose_maps",
    "custom_map",
    "fold_map",
    "boundary_spiral_map",
    "parse_map",
    "map_from_config",
    "wirtinger",
    "wirtinger_fd",
    "dilatation",
    "distortion_at",
    "distortion_to_csv",
    "multiplicity",
    "finite_distortion_check",
    "pushforward_polylines",
    "pushforward_family",
]


class ChartOverflowError(RuntimeError):
    """An image point left the chart (reached the disk boundary)."""


class _InfiniteDilatation:
    """Distinguished sentinel for K = infinity; not a floating-point inf so
    reports can count singular cells explicitly."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "K_INF"

    def __float__(self):
        return math.inf


K_INF = _InfiniteDilatation()


@dataclass(frozen=True)
class SampleMap:
    """A disk-to-disk mapping with optional analytic Wirtinger evaluators."""

    kind: str
    k: float = None
    g: MobiusAutomorphism = None
    parts: tuple = None  # inner-to-outer for compositions
    evaluator: object = None  # custom kinds
    label: str = ""

    def __call__(self, z):
        return self.apply(z)

    def apply(self, z):
        scalar = not isinstance(z, np.ndarray)
        w = self._apply(np.asarray([as_complex(z)] if scalar else z, dtype=complex))
        return complex(w[0]) if scalar else w

    def _apply(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "mobius":
            return (self.g.a * z + self.g.c) / (np.conjugate(self.g.c) * z + np.conjugate(self.g.a))
        if self.kind == "radial_stretch":
            return z * np.abs(z) ** (self.k - 1.0)
        if self.kind == "winding":
            r = np.abs(z)
            return np.where(r > 0, z**self.k / np.where(r > 0, r, 1.0) ** (self.k - 1.0), 0.0)
        if self.kind == "composition":
            for part in self.parts:
                z = part._apply(z)
            return z
        return np.asarray(self.evaluator(z), dtype=complex)

    @property
    def has_analytic_wirtinger(self) -> bool:
        if self.kind == "composition":
            return all(p.has_analytic_wirtinger for p in self.parts)
        return self.kind in ("mobius", "radial_stretch", "winding")

    def wirtinger_analytic(self, z: np.ndarray):
        """(f_z, f_zbar) arrays; branch points take the limit along arg z = 0."""
        if self.kind == "mobius":
            fz = 1.0 / (np.conjugate(self.g.c) * z + np.conjugate(self.g.a)) ** 2
            return fz, np.zeros_like(fz)
        if self.kind == "radial_stretch":
            k = self.k
            r = np.abs(z)
            u = np.where(r > 0, z / np.where(r > 0, r, 1.0), 1.0)  # unit direction
            rk = r ** (k - 1.0)
            fz = (0.5 * (k + 1.0) * rk).astype(complex)
            fzb = 0.5 * (k - 1.0) * rk * u**2
            return fz, fzb
        if self.kind == "winding":
            k = self.k
            r = np.abs(z)
            u = np.where(r > 0, z / np.where(r > 0, r, 1.0), 1.0)
            fz = 0.5 * (k + 1.0) * u ** (k - 1.0)
            fzb = -0.5 * (k - 1.0) * u ** (k + 1.0)
            return fz, fzb
        if self.kind == "composition":
            fz = np.ones_like(z)
            fzb = np.zeros_like(z)
            w = z
            for part in self.parts:
                gz, gzb = part.wirtinger_analytic(w)
                fz, fzb = gz * fz + gzb * np.conjugate(fzb), gz * fzb + gzb * np.conjugate(fz)
                w = part._apply(w)
            return fz, fzb
        raise ValueError(f"kind {self.kind!r} has no analytic Wirtinger data")

    @property
    def degree(self) -> int:
        """Local topological degree at the branch point 0 (= N on circles about 0)."""
        if self.kind == "winding":
            return int(self.k)
        if self.kind == "composition":
            d = 1
            for p in self.parts:
                d *= p.degree
            return d
        return 1

    @property
    def fixes_origin_radially(self) -> bool:
        """True when |f(z)| depends only on |z| and f(0) = 0."""
        if self.kind in ("winding", "radial_stretch"):
            return True
        if self.kind == "mobius":
            return abs(self.g.c) < 1e-15  # rotation about 0
        if self.kind == "composition":
            return all(p.fixes_origin_radially for p in self.parts)
        return False


def identity_map() -> SampleMap:
    return SampleMap(kind="mobius", g=MobiusAutomorphism(1.0, 0.0), label="identity")


def mobius_map(g: MobiusAutomorphism) -> SampleMap:
    return SampleMap(kind="mobius", g=g, label="mobius")


def radial_stretch(k: float) -> SampleMap:
    if k < 1.0:
        raise ValueError("radial stretch exponent must be >= 1")
    return SampleMap(kind="radial_stretch", k=float(k), label=f"radial_stretch:{k:g}")


def winding(k: int) -> SampleMap:
    if int(k) != k or k < 1:
        raise ValueError("winding order must be a positive integer")
    return SampleMap(kind="winding", k=int(k), label=f"winding:{int(k)}")


def compose_maps(*maps: SampleMap) -> SampleMap:
    """Composition applied inner-to-outer: compose_maps(f, g) is g after f."""
    return SampleMap(kind="composition", parts=tuple(maps),
                     label="(" + "∘".join(m.label for m in reversed(maps)) + ")")


def custom_map(evaluator, label="custom") -> SampleMap:
    return SampleMap(kind="custom", evaluator=evaluator, label=label)


def fold_map() -> SampleMap:
    """x + iy -> |x| + iy; orientation-reversing on x < 0, singular on x = 0."""
    return custom_map(lambda z: np.abs(np.real(z)) + 1j * np.imag(z), label="fold")


def boundary_spiral_map() -> SampleMap:
    """z -> z e^{i log(1 + log(1/(1-|z|)))}: rotates ever faster toward the rim,
    so radial limits at the boundary do not exist."""

    def ev(z):
        r = np.abs(z)
        phase = np.log1p(np.log(1.0 / np.maximum(1.0 - r, 1e-15)))
        return z * np.exp(1j * phase)

    return custom_map(ev, label="spiral")


def parse_map(spec: str) -> SampleMap:
    """CLI shorthand: identity | winding:<k> | radial_stretch:<k> | spiral | fold."""
    spec = spec.strip()
    if spec == "identity":
        return identity_map()
    if spec == "spiral":
        return boundary_spiral_map()
    if spec == "fold":
        return fold_map()
    if ":" in spec:
        kind, arg = spec.split(":", 1)
        if kind == "winding":
            return winding(int(arg))
        if kind in ("radial_stretch", "radial-stretch"):
            return radial_stretch(float(arg))
    raise ValueError(f"unknown map spec {spec!r}")


def map_from_config(cfg: dict) -> SampleMap:
    """Map definition from config JSON, e.g. {"kind": "winding", "k": 3}."""
    kind = cfg["kind"]
    if kind == "identity":
        return identity_map()
    if kind == "winding":
        return winding(int(cfg["k"]))
    if kind == "radial_stretch":
        return radial_stretch(float(cfg["k"]))
    if kind == "mobius":
        g = MobiusAutomorphism(
            complex(cfg["a_re"], cfg.get("a_im", 0.0)),
            complex(cfg["c_re"], cfg.get("c_im", 0.0)),
        )
        return mobius_map(g)
    if kind == "composition":
        return compose_maps(*(map_from_config(part) for part in cfg["parts"]))
    if kind == "spiral":
        return boundary_spiral_map()
    raise ValueError(f"unknown map kind {kind!r}")


# ---------------------------------------------------------------------------
# derivatives and distortion


def _default_step(z: complex) -> float:
    return max(1e-5 * (1.0 - abs(z)), 1e-9)


def wirtinger_fd(f: SampleMap, z, step: float = None):
    """Central-difference Wirtinger derivatives f_z = (f_x - i f_y)/2,
    f_zbar = (f_x + i f_y)/2."""
    zc = as_complex(z)
    if step is None:
        step = _default_step(zc)
    if abs(zc) + step >= 1.0 - BOUNDARY_MARGIN:
        raise ValueError("stencil leaves the disk; shrink the step")
    fx = (f.apply(zc + step) - f.apply(zc - step)) / (2.0 * step)
    fy = (f.apply(zc + 1j * step) - f.apply(zc - 1j * step)) / (2.0 * step)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def wirtinger(f: SampleMap, z, step: float = None):
    """(f_z, f_zbar) at z: analytic when the kind provides it, else central
    differences with the given step. wirtinger_fd stays available for
    cross-checking the analytic path."""
    zc = as_complex(z)
    if f.has_analytic_wirtinger:
        fz, fzb = f.wirtinger_analytic(np.asarray([zc], dtype=complex))
        return complex(fz[0]), complex(fzb[0])
    return wirtinger_fd(f, zc, step)


@dataclass(frozen=True)
class DistortionField:
    """Pointwise derivative data: operator norm, Jacobian and dilatation."""

    f_z: complex
    f_zbar: complex

    @property
    def norm(self) -> float:
        return abs(self.f_z) + abs(self.f_zbar)

    @property
    def jacobian(self) -> float:
        return abs(self.f_z) ** 2 - abs(self.f_zbar) ** 2

    @property
    def K(self):
        n = self.norm
        if n < 1e-15:
            return 1.0
        denom = abs(self.f_z) - abs(self.f_zbar)
        if abs(self.jacobian) < 1e-15 * n * n:
            return K_INF
        return n / denom


def distortion_at(f: SampleMap, z, step: float = None) -> DistortionField:
    fz, fzb = wirtinger(f, z, step)
    return DistortionField(fz, fzb)


def dilatation(f: SampleMap, z, step: float = None):
    """K_f(z): (|f_z|+|f_zbar|)/(|f_z|-|f_zbar|) when J != 0, 1 when the norm
    vanishes, and the K_INF sentinel otherwise."""
    return distortion_at(f, z, step).K


def distortion_to_csv(f: SampleMap, grid: int, path, extent: float = 0.9) -> None:
    """CSV sweep of (z, |f_z|, |f_zbar|, K, J) over a grid in the disk."""
    xs = np.linspace(-extent, extent, grid)
    lines = ["re,im,abs_fz,abs_fzbar,K,J"]
    for x in xs:
        for y in xs:
            z = complex(x, y)
            if abs(z) > extent:
                continue
            d = distortion_at(f, z)
            k = d.K
            k_str = "inf" if k is K_INF else repr(float(k))
            lines.append(f"{float(x)!r},{float(y)!r},{abs(d.f_z)!r},{abs(d.f_zbar)!r},{k_str},{d.jacobian!r}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# multiplicity


@dataclass(frozen=True)
class MultiplicityReport:
    targets: tuple
    counts: tuple
    supremum: int
    incomplete: bool
    flagged_targets: tuple = ()


def _newton_preimages(f: SampleMap, target: complex, seeds: np.ndarray,
                      newton_tol: float, max_steps: int = 60) -> list:
    z = seeds.copy()
    alive = np.ones(len(z), dtype=bool)
    for _ in range(max_steps):
        if not alive.any():
            break
        za = z[alive]
        F = f._apply(za) - target
        if f.has_analytic_wirtinger:
            fz, fzb = f.wirtinger_analytic(za)
        else:
            h = 1e-6
            fx = (f._apply(za + h) - f._apply(za - h)) / (2 * h)
            fy = (f._apply(za + 1j * h) - f._apply(za - 1j * h)) / (2 * h)
            fz, fzb = 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)
        J = np.abs(fz) ** 2 - np.abs(fzb) ** 2
        ok = np.abs(J) > 1e-14
        delta = np.zeros_like(za)
        delta[ok] = (np.conjugate(F[ok]) * fzb[ok] - F[ok] * np.conjugate(fz[ok])) / J[ok]
        # damp oversized steps to keep iterates in the disk
        step_norm = np.abs(delta)
        delta[step_norm > 0.2] *= 0.2 / step_norm[step_norm > 0.2]
        za = za + delta
        dead = (~ok) | (np.abs(za) > 1.0 - 1e-6)
        z_alive = z[alive]
        z_alive[~dead] = za[~dead]
        z[alive] = z_alive
        sub = alive[alive].copy()
        sub[dead] = False
        alive[alive.copy()] = sub
    residual = np.abs(f._apply(z) - target)
    good = (residual < newton_tol) & (np.abs(z) < 1.0 - 1e-6)
    roots: list = []
    for w in z[good]:
        if not any(abs(w - r) < 1e-6 for r in roots):
            roots.append(complex(w))
    return roots


def _seed_grid(n: int) -> np.ndarray:
    radii = np.sqrt(np.linspace(0.02**2, 0.95**2, n))
    angles = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
    return (radii[:, None] * np.exp(1j * angles[None, :])).ravel()


def multiplicity(f: SampleMap, targets, seed_grid: int = 40,
                 newton_tol: float = 1e-10) -> MultiplicityReport:
    """Count distinct preimages of each target by Newton refinement from a seed
    grid (deduplicated at 1e-6), reporting the supremum over targets.

    Runs a second, 1.5x denser seed grid; targets whose counts disagree are
    flagged and the report is marked incomplete.
    """
    targets = tuple(as_complex(t) for t in targets)
    seeds_a = _seed_grid(seed_grid)
    seeds_b = _seed_grid(int(seed_grid * 1.5))
    counts, flagged = [], []
    for t in targets:
        na = len(_newton_preimages(f, t, seeds_a, newton_tol))
        nb = len(_newton_preimages(f, t, seeds_b, newton_tol))
        counts.append(max(na, nb))
        if na != nb:
            flagged.append(t)
    return MultiplicityReport(
        targets=targets,
        counts=tuple(counts),
        supremum=max(counts) if counts else 0,
        incomplete=bool(flagged),
        flagged_targets=tuple(flagged),
    )


# ---------------------------------------------------------------------------
# finite distortion and pushforward


@dataclass(frozen=True)
class FiniteDistortionReport:
    n_points: int
    n_violations: int
    violations: tuple  # sample of violating points
    passed: bool


def finite_distortion_check(f: SampleMap, grid: int = 32,
                            jac_tol: float = 1e-10, norm_tol: float = 1e-8) -> FiniteDistortionReport:
    """Grid check of the finite-distortion requirement: wherever the Jacobian
    vanishes the operator norm must vanish too."""
    if grid < 16:
        raise ValueError("need grid >= 16")
    xs = np.linspace(-0.9, 0.9, grid)
    violations = []
    n_points = 0
    for x in xs:
        for y in xs:
            z = complex(x, y)
            if abs(z) > 0.9:
                continue
            n_points += 1
            d = distortion_at(f, z)
            if abs(d.jacobian) <= jac_tol and d.norm > norm_tol:
                violations.append(z)
    return FiniteDistortionReport(
        n_points=n_points,
        n_violations=len(violations),
        violations=tuple(violations[:100]),
        passed=not violations,
    )


def pushforward_polylines(f: SampleMap, family: PolylineFamily) -> PolylineFamily:
    """Geometric image of a polyline family under f.

    Injective kinds map vertices pointwise. Branched kinds (degree k > 1) are
    supported on circle families about 0: the image circle is the same point
    set traversed k times, encoded as a single traversal with multiplicity k.
    """
    deg = f.degree
    if deg == 1:
        out = []
        for poly in family.polylines:
            pts = f._apply(poly.points())
            if np.any(np.abs(pts) >= 1.0 - BOUNDARY_MARGIN):
                raise ChartOverflowError(f"image of a curve under {f.label} leaves the chart")
            out.append(Polyline(tuple(pts), closed=poly.closed))
        radii = None
        if family.circle_radii is not None and f.fixes_origin_radially:
            radii = tuple(
                2.0 * math.atanh(abs(f.apply(complex(math.tanh(0.5 * r), 0.0))))
                for r in family.circle_radii
            )
        return PolylineFamily(tuple(out), kind=family.kind,
                              multiplicities=family.multiplicities, circle_radii=radii)

    if family.kind != "circle_family" or not f.fixes_origin_radially:
        raise ValueError(
            "pushforward under a branched map is only defined for circle families about 0"
        )
    out = []
    radii = []
    for poly, r in zip(family.polylines, family.circle_radii):
        R = math.tanh(0.5 * r)
        R_img = abs(f.apply(complex(R, 0.0)))
        if R_img >= 1.0 - BOUNDARY_MARGIN:
            raise ChartOverflowError(f"image circle under {f.label} leaves the chart")
        scale = R_img / R
        pts = poly.points() * scale  # same angular samples, image radius
        out.append(Polyline(tuple(pts), closed=True))
        radii.append(2.0 * math.atanh(R_img))
    mult = tuple(m * deg for m in family.multiplicities)
    return PolylineFamily(tuple(out), kind="circle_family",
                          multiplicities=mult, circle_radii=tuple(radii))


def pushforward_family(f: SampleMap, family: PolylineFamily,
                       dom_image: DiscretizedDomain) -> CurveFamily:
    """Image family rasterized into the image domain (see pushforward_polylines)."""
    return rasterize_family(pushforward_polylines(f, family), dom_image)
