"""Contour families realizing the q-nested integration cycles.

A ContourFamily holds, per integration variable a = 1..k, a union of
counterclockwise circles.  The generic construction mirrors the explicit
recipe: small circles around the inside poles (shared by all variables, with
nearby poles clustered into one circle) plus a circle around 0 of radius
q^{2a} r0 for variable a, so that q^{-1} times variable a+1's zero-circle
lies inside variable a's.  The Beta-polymer family instead uses concentric
circles around -sigma/2 whose radii grow by slightly more than 1 per
variable, realizing the shift-by-(-1) nesting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContourError

GOLDEN = 0.6180339887498949  # per-variable node phase offsets


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float


@dataclass
class ContourFamily:
    """Per-variable circle unions plus the pole bookkeeping used to validate them."""

    per_variable: list  # list over variables of list[Circle]
    inside_poles: list = field(default_factory=list)
    outside_poles: list = field(default_factory=list)
    q: float | None = None

    @property
    def k(self) -> int:
        return len(self.per_variable)

    def scaled(self, factor: float) -> "ContourFamily":
        """Same family with every radius multiplied by ``factor``."""
        return ContourFamily(
            [[Circle(c.center, c.radius * factor) for c in circles] for circles in self.per_variable],
            list(self.inside_poles),
            list(self.outside_poles),
            self.q,
        )

    def nodes(self, var: int, nodes_per_circle: int):
        """Quadrature nodes and dw/(2 pi i) weights for variable ``var`` (1-based)."""
        ws, dws = [], []
        phase = ((var * GOLDEN) % 1.0) / nodes_per_circle
        for circ in self.per_variable[var - 1]:
            theta = 2 * np.pi * (np.arange(nodes_per_circle) / nodes_per_circle + phase)
            w = circ.center + circ.radius * np.exp(1j * theta)
            ws.append(w)
            dws.append((w - circ.center) / nodes_per_circle)
        return np.concatenate(ws), np.concatenate(dws)

    def validate(self, nodes_per_circle: int = 256) -> dict:
        """Check the inside/outside classification and nesting; return margins.

        Inside poles must lie strictly inside exactly one circle of every
        variable's union, outside poles strictly outside all of them, both
        with margin >= 10x the quadrature resolution 2 pi r / nodes.
        """
        margins = {"inside": np.inf, "outside": np.inf}
        for circles in self.per_variable:
            for p in self.inside_poles:
                containing = [c for c in circles if abs(p - c.center) < c.radius]
                if len(containing) != 1:
                    raise ContourError(f"inside pole {p} contained in {len(containing)} circles")
                c = containing[0]
                margins["inside"] = min(margins["inside"], c.radius - abs(p - c.center))
            for p in self.outside_poles:
                for c in circles:
                    gap = abs(p - c.center) - c.radius
                    if gap <= 0:
                        raise ContourError(f"outside pole {p} not outside circle {c}")
                    res = 10 * 2 * np.pi * c.radius / nodes_per_circle
                    if gap < res:
                        raise ContourError(
                            f"outside pole {p} within 10x quadrature resolution of {c}"
                        )
                    margins["outside"] = min(margins["outside"], gap)
            # disjointness within one union
            for i, c1 in enumerate(circles):
                for c2 in circles[i + 1:]:
                    if abs(c1.center - c2.center) <= c1.radius + c2.radius:
                        raise ContourError("circles of one union overlap")
        if self.q is not None:
            self._check_q_nesting()
            self._check_scaled_images()
        return margins

    def _check_scaled_images(self):
        # no pole circle may encircle points of q^{+-1} times another pole circle
        q = self.q
        pole_circles = [c for circles in self.per_variable for c in circles if abs(c.center) > 1e-14]
        for c1 in pole_circles:
            for c2 in pole_circles:
                for f in (q, 1 / q):
                    if abs(c1.center - f * c2.center) <= c1.radius + f * c2.radius:
                        raise ContourError(
                            f"circle {c1} overlaps the {f}-scaled image of {c2}"
                        )

    def _check_q_nesting(self):
        # variable a's zero-circle must contain q^{-1} (variable b's) for a < b
        q = self.q
        for a in range(self.k):
            for b in range(a + 1, self.k):
                za = [c for c in self.per_variable[a] if abs(c.center) < 1e-14]
                zb = [c for c in self.per_variable[b] if abs(c.center) < 1e-14]
                for ca in za:
                    for cb in zb:
                        if cb.radius / q >= ca.radius:
                            raise ContourError("zero-circles are not q-nested")


def build_contours(inside, outside, k: int, q: float, zero_scale: float = 0.25,
                   pole_scale: float = 0.25) -> ContourFamily:
    """Generic q-nested family: clustered circles around ``inside`` poles plus
    the q^{2a}-scaled circle around 0 for variable a.

    ``outside`` poles, 0, and q^{+-1} images of inside poles must stay outside
    the pole circles; violations raise ContourError naming the offenders.
    """
    inside = _dedupe(inside)
    outside = _dedupe(outside)
    if not inside:
        raise ContourError("need at least one inside pole")
    excluded = list(outside)
    for p in inside:
        excluded.extend([q * p, p / q])
    excluded = _dedupe(excluded)

    clusters = [[p] for p in inside]
    for _ in range(len(inside) + 1):
        circles = [_cluster_circle(cl, excluded, pole_scale) for cl in clusters]
        merged = _merge_overlaps(clusters, circles)
        if merged is None:
            break
        clusters = merged
    else:
        raise ContourError("pole clustering failed to stabilize")

    r0_bound = min(abs(p) for p in inside + excluded)
    if r0_bound <= 0:
        raise ContourError("a pole coincides with 0")
    r0 = zero_scale * r0_bound
    per_var = []
    for a in range(1, k + 1):
        per_var.append(list(circles) + [Circle(0j, r0 * q ** (2 * a))])
    return ContourFamily(per_var, inside, list(outside) + [e for e in excluded if e not in outside], q)


def _dedupe(points, tol: float = 1e-11):
    out = []
    for p in points:
        p = complex(p)
        if all(abs(p - o) > tol * max(1.0, abs(p)) for o in out):
            out.append(p)
    return out


def _cluster_circle(cluster, excluded, pole_scale: float) -> Circle:
    center = sum(cluster) / len(cluster)
    spread = max(abs(p - center) for p in cluster)
    blockers = excluded + [0j]
    rexcl = min(abs(e - center) for e in blockers)
    if rexcl <= spread * (1 + 1e-9) + 1e-14:
        worst = min(blockers, key=lambda e: abs(e - center))
        raise ContourError(
            f"no valid circle around poles {cluster}: excluded point {worst} too close"
        )
    return Circle(center, spread + pole_scale * (rexcl - spread))


def _merge_overlaps(clusters, circles):
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            d = abs(circles[i].center - circles[j].center)
            if d <= circles[i].radius + circles[j].radius:
                merged = [cl for t, cl in enumerate(clusters) if t not in (i, j)]
                merged.append(clusters[i] + clusters[j])
                return merged
    return None


def build_contours_qhahn(s: float, z: float, q: float, k: int) -> ContourFamily:
    """Family for the fully fused model: encircle 0 and 1/s, exclude s and z^2/s."""
    return build_contours([1 / s], [s, z * z / s], k, q)


def build_contours_beta(sigma: float, rho: float, k: int, delta: float = 0.1) -> ContourFamily:
    """Concentric circles around -sigma/2: radius r_1 + (a-1)(1+delta) for
    variable a; each contains the (-1)-shift of the previous one and excludes
    sigma/2 - rho and sigma/2."""
    span = sigma - rho  # distance from -sigma/2 to the nearest excluded pole
    for dlt in (delta, delta / 5, 0.005):
        r1 = min(0.25, 0.05 * span)
        rk = r1 + (k - 1) * (1 + dlt)
        if rk < 0.85 * span:
            per_var = [
                [Circle(complex(-sigma / 2), r1 + (a - 1) * (1 + dlt))] for a in range(1, k + 1)
            ]
            fam = ContourFamily(per_var, [complex(-sigma / 2)],
                                [complex(sigma / 2), complex(sigma / 2 - rho)], None)
            return fam
    raise ContourError(
        f"sigma - rho = {span} is too small to nest {k} shifted contours"
    )
