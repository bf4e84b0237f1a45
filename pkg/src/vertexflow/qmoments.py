"""Iterated contour integration and the exact q-moment formulas.

The pairing <Phi, Psi> = oint ... oint prod_{a<b} X(w_a, w_b) Phi Psi
prod_a dw_a/(2 pi i w_a) is evaluated on tensor-product trapezoid grids over
the contour circles.  Applying T_pi to a per-variable product Phi expands,
via the kappa recursion, into a sum of terms that factor into per-variable
vectors and pairwise matrices; each term is then a small tensor contraction
(matrix products for k <= 4, an outer-variable loop beyond).  This keeps the
cost at (nodes)^k floating-point work in BLAS rather than Python.

Node counts double adaptively until the Richardson estimate (the change under
doubling) drops below tolerance or a cap is reached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contours import ContourFamily, build_contours, build_contours_beta, build_contours_qhahn
from .errors import ContourResolutionError, UnsupportedRegimeError, ValidationError
from .hecke import Permutation, PointFunction, kappa_table
from .lattice import ModelParams, SkewDomain, check_pole_separation, dbl
from .weights import q_pochhammer

DEFAULT_NODES = 256
NODE_CAP = 4096
DEFAULT_TOL = 1e-10


@dataclass
class MomentQuery:
    """Points, colors, and permutation of a joint q-moment observable."""

    points: list  # (alpha, beta) half-integer pairs
    colors: list
    pi: Permutation | None = None

    def __post_init__(self):
        k = len(self.points)
        if len(self.colors) != k:
            raise ValidationError("points and colors must have equal length")
        if any(a > b for a, b in zip(self.colors, self.colors[1:])):
            raise ValidationError("colors must be nondecreasing")
        if self.pi is None:
            self.pi = Permutation.identity(k)
        if len(self.pi) != k:
            raise ValidationError("permutation rank must equal the number of points")

    @property
    def k(self) -> int:
        return len(self.points)


@dataclass
class MomentResult:
    value: complex
    error_estimate: float
    nodes_per_circle: int

    def real_checked(self, tol: float = 1e-8) -> float:
        if abs(self.value.imag) > tol:
            raise ValidationError(f"imaginary part {self.value.imag} exceeds {tol}")
        return self.value.real


@dataclass
class PairingIntegrand:
    """Structured integrand (sum_i c_i T_{pi_i} Phi) * Psi with product factors.

    phi_terms: list of (coef, [per-variable callables]) whose sum is Phi;
    psi_factors: per-variable callables multiplying to Psi;
    pi_terms: list of (coef, Permutation) applied to Phi inside the pairing.
    """

    phi_terms: list
    psi_factors: list
    pi_terms: list
    variant: str = "q"

    @property
    def k(self) -> int:
        return len(self.psi_factors)


# ---------------------------------------------------------------------------
# grid plumbing
# ---------------------------------------------------------------------------


class _Grid:
    def __init__(self, fam: ContourFamily, nodes_per_circle: int, variant: str, q):
        self.k = fam.k
        self.nodes = []
        self.dws = []
        for a in range(1, fam.k + 1):
            w, dw = fam.nodes(a, nodes_per_circle)
            self.nodes.append(w)
            self.dws.append(dw)
        self.variant = variant
        self.q = q
        self._cross = {}
        self._pair_cache = {}

    def cross(self, a: int, b: int) -> np.ndarray:
        """prod factor for the pair a < b (0-based): rows index var a, cols var b."""
        if (a, b) not in self._cross:
            wa = self.nodes[a][:, None]
            wb = self.nodes[b][None, :]
            if self.variant == "q":
                self._cross[(a, b)] = (wb - wa) / (wb - self.q * wa)
            else:
                self._cross[(a, b)] = (wb - wa) / (wb - wa + 1)
        return self._cross[(a, b)]

    def pair_matrix(self, tag: str, u: int, v: int) -> tuple:
        """Coefficient matrix for DL-recursion factors on the variable pair (u, v).

        Returns (key, mat) with key = (min(u,v), max(u,v)) and mat oriented
        rows = key[0], cols = key[1].
        """
        ck = (tag, u, v)
        if ck not in self._pair_cache:
            wu = self.nodes[u]
            wv = self.nodes[v]
            if self.variant == "q":
                if tag == "a":
                    fn = lambda x, y: (self.q - 1) * y / (y - x)
                else:
                    fn = lambda x, y: (y - self.q * x) / (y - x)
            else:
                if tag == "a":
                    fn = lambda x, y: -1 / (y - x)
                else:
                    fn = lambda x, y: (y - x + 1) / (y - x)
            if u < v:
                mat = fn(wu[:, None], wv[None, :])
                self._pair_cache[ck] = ((u, v), mat)
            else:
                mat = fn(wu[None, :], wv[:, None])
                self._pair_cache[ck] = ((v, u), mat)
        return self._pair_cache[ck]


def _contract(us: list, mats: dict) -> complex:
    """sum over the grid of prod_a us[a][n_a] * prod_{a<b} mats[(a,b)][n_a, n_b]."""
    k = len(us)
    if k == 1:
        return us[0].sum()
    if k == 2:
        return us[0] @ mats[(0, 1)] @ us[1]
    if k == 3:
        a = mats[(0, 1)] * us[0][:, None] * us[1][None, :]
        b = mats[(0, 2)] * us[2][None, :]
        return (a * (b @ mats[(1, 2)].T)).sum()
    # k >= 4: loop over the outermost variable, reduce to k-1
    total = 0j
    u0 = us[0]
    for i in range(len(u0)):
        sub_us = [us[a] * mats[(0, a)][i, :] for a in range(1, k)]
        sub_mats = {(a - 1, b - 1): mats[(a, b)] for a in range(1, k) for b in range(a + 1, k)}
        total += u0[i] * _contract(sub_us, sub_mats)
    return total


def _pairing_on_grid(grid: _Grid, integrand: PairingIntegrand) -> dict:
    """Values of the pairing for each pi in integrand.pi_terms, on a fixed grid."""
    k = grid.k
    base_u = [grid.dws[a] / grid.nodes[a] for a in range(k)]
    phi_tables = []
    for coef, factors in integrand.phi_terms:
        # slot s evaluated on variable b's nodes
        phi_tables.append((coef, [[np.asarray(f(grid.nodes[b])) + 0j for b in range(k)] for f in factors]))
    psi_vals = [np.asarray(f(grid.nodes[a])) + 0j for a, f in enumerate(integrand.psi_factors)]
    cross = {(a, b): grid.cross(a, b) for a in range(k) for b in range(a + 1, k)}
    out = {}
    for picoef, pi in integrand.pi_terms:
        terms = {tuple(range(1, k + 1)): [(1.0 + 0j, {})]}
        for i in pi.reduced_word():
            new = {}
            for rho, tlist in terms.items():
                u_var, v_var = rho[i - 1] - 1, rho[i] - 1
                a_key, a_mat = grid.pair_matrix("a", u_var, v_var)
                b_key, b_mat = grid.pair_matrix("b", u_var, v_var)
                rho_s = list(rho)
                rho_s[i - 1], rho_s[i] = rho_s[i], rho_s[i - 1]
                rho_s = tuple(rho_s)
                for scal, mats in tlist:
                    new.setdefault(rho, []).append((scal, _mat_mult(mats, a_key, a_mat)))
                    new.setdefault(rho_s, []).append((scal, _mat_mult(mats, b_key, b_mat)))
            terms = new
        total = 0j
        for rho, tlist in terms.items():
            rho_inv = [0] * k
            for s, b in enumerate(rho):
                rho_inv[b - 1] = s  # slot feeding variable b (0-based slot)
            for phi_coef, table in phi_tables:
                us = [base_u[b] * psi_vals[b] * table[rho_inv[b]][b] for b in range(k)]
                for scal, mats in tlist:
                    full = dict(cross)
                    for key, m in mats.items():
                        full[key] = cross[key] * m
                    val = _contract(us, full)
                    total += phi_coef * scal * val
        out[pi.images] = out.get(pi.images, 0j) + picoef * total
    return out


def _mat_mult(mats: dict, key, mat) -> dict:
    new = dict(mats)
    if key in new:
        new[key] = new[key] * mat
    else:
        new[key] = mat
    return new


def pairing_values(fam: ContourFamily, integrand: PairingIntegrand, q,
                   nodes_per_circle: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                   cap: int = NODE_CAP) -> dict:
    """Adaptive evaluation; returns {pi images: MomentResult}."""
    fam.validate(nodes_per_circle)

    def run(n):
        grid = _Grid(fam, n, integrand.variant, q)
        vals = _pairing_on_grid(grid, integrand)
        for v in vals.values():
            if not np.isfinite(v):
                raise ContourResolutionError(
                    f"non-finite pairing value at {n} nodes per circle; increase nodes"
                )
        return vals

    prev = run(nodes_per_circle)
    n = 2 * nodes_per_circle
    while True:
        cur = run(n)
        est = {key: abs(cur[key] - prev[key]) for key in cur}
        if max(est.values()) < tol or 2 * n > cap:
            return {key: MomentResult(cur[key], est[key], n) for key in cur}
        prev = cur
        n *= 2


def iterated_integral(f, contours: ContourFamily, nodes_per_circle: int = DEFAULT_NODES,
                      q=None, variant: str = "q", tol: float = DEFAULT_TOL,
                      cap: int = NODE_CAP) -> MomentResult:
    """The pairing integral of ``f`` over the contour family.

    Includes the cross factor prod_{a<b}(w_b - w_a)/(w_b - q w_a) (or its
    polymer analogue) and the measure dw_a/(2 pi i w_a).  Structured
    ``PairingIntegrand`` inputs use the factored fast path; plain
    PointFunctions are evaluated on the dense node mesh.
    """
    if isinstance(f, PairingIntegrand):
        vals = pairing_values(contours, f, q, nodes_per_circle, tol, cap)
        total_val = sum(v.value for v in vals.values())
        return MomentResult(total_val, sum(v.error_estimate for v in vals.values()),
                            max(v.nodes_per_circle for v in vals.values()))
    contours.validate(nodes_per_circle)

    def run(n):
        grid = _Grid(contours, n, variant, q)
        return _mesh_integral(grid, f)

    prev = run(nodes_per_circle)
    n = 2 * nodes_per_circle
    while True:
        cur = run(n)
        est = abs(cur - prev)
        if est < tol or 2 * n > cap:
            return MomentResult(cur, est, n)
        prev = cur
        n *= 2


def _mesh_integral(grid: _Grid, f: PointFunction) -> complex:
    k = grid.k
    if k > 3:
        raise ValidationError("mesh evaluation supports k <= 3; use a PairingIntegrand")
    base = [grid.dws[a] / grid.nodes[a] for a in range(k)]
    if k == 1:
        vals = f([grid.nodes[0]])
        return (vals * base[0]).sum()
    if k == 2:
        w0 = grid.nodes[0][:, None] + 0 * grid.nodes[1][None, :]
        w1 = grid.nodes[1][None, :] + 0 * grid.nodes[0][:, None]
        vals = f([w0, w1]) * grid.cross(0, 1)
        return (vals * base[0][:, None] * base[1][None, :]).sum()
    total = 0j
    c01, c02, c12 = grid.cross(0, 1), grid.cross(0, 2), grid.cross(1, 2)
    n2 = grid.nodes[2]
    for i, w0 in enumerate(grid.nodes[0]):
        for j, w1 in enumerate(grid.nodes[1]):
            vals = f([np.full_like(n2, w0), np.full_like(n2, w1), n2])
            weight = base[0][i] * base[1][j] * c01[i, j]
            total += (vals * c02[i, :] * c12[j, :] * base[2]).sum() * weight
    return total


# ---------------------------------------------------------------------------
# per-variable factor builders
# ---------------------------------------------------------------------------


def ratio_product(zeros, poles):
    """w -> prod_i (1 - zeros[i] w) / prod_i (1 - poles[i] w)."""
    zs = list(zeros)
    ps = list(poles)

    def f(w):
        out = np.ones_like(np.asarray(w, dtype=complex))
        for t in zs:
            out = out * (1 - t * w)
        for t in ps:
            out = out / (1 - t * w)
        return out

    return f


def _const_one(w):
    return np.ones_like(np.asarray(w, dtype=complex))


# ---------------------------------------------------------------------------
# Theorem: skew-domain q-moments (main integral formula)
# ---------------------------------------------------------------------------


def _validate_query_order(points, colors):
    alphas = [p[0] for p in points]
    betas = [p[1] for p in points]
    if any(a1 > a2 for a1, a2 in zip(alphas, alphas[1:])):
        raise ValidationError("alphas must be nondecreasing")
    if any(b1 < b2 for b1, b2 in zip(betas, betas[1:])):
        raise ValidationError("betas must be nonincreasing")
    if any(c1 > c2 for c1, c2 in zip(colors, colors[1:])):
        raise ValidationError("colors must be nondecreasing")


def qmoment_skew_multi(domain: SkewDomain, params: ModelParams, points, colors, pis,
                       nodes_per_circle: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                       cap: int = NODE_CAP, contour_scale: float = 1.0) -> dict:
    """E[q^{H_{pi.c}}] for every pi in ``pis``, sharing one quadrature grid."""
    _validate_query_order(points, colors)
    q = params.q
    k = len(points)
    pts = [dbl(*p) for p in points]
    p_points = set(domain.p_path.points())
    for p in pts:
        if p not in p_points:
            raise ValidationError(f"point {p} does not lie on P")
    zetas = domain.step_rapidities(params)
    check_pole_separation(zetas, q)
    xs = params.row_rapidities[: domain.n_rows]
    ys = params.col_rapidities[: domain.m_cols]

    phi_factors = []
    for c in colors:
        g2, d2 = domain.threshold(c)
        rows = [xs[i - 1] for i in range(1, (d2 - 1) // 2 + 1)]          # i < delta(c)
        cols = [ys[j - 1] for j in range((g2 + 1) // 2, domain.m_cols + 1)]  # j > gamma(c)
        zp = rows + cols
        phi_factors.append(ratio_product(zp, [q * t for t in zp]))
    psi_factors = []
    for (a2, b2) in pts:
        rows = [xs[i - 1] for i in range(1, (b2 - 1) // 2 + 1)]          # i < beta
        cols = [ys[j - 1] for j in range((a2 + 1) // 2, domain.m_cols + 1)]  # j > alpha
        zp = rows + cols
        psi_factors.append(ratio_product([q * t for t in zp], zp))

    fam = build_contours([1 / t for t in zetas], [1 / (q * t) for t in zetas], k, q)
    if contour_scale != 1.0:
        fam = fam.scaled(contour_scale)
    integrand = PairingIntegrand([(1.0, phi_factors)], psi_factors,
                                 [(1.0, pi) for pi in pis], "q")
    raw = pairing_values(fam, integrand, q, nodes_per_circle, tol, cap)
    out = {}
    for pi in pis:
        r = raw[pi.images]
        pref = q ** (k * (k - 1) / 2 - pi.length())
        out[pi.images] = MomentResult(pref * r.value, pref * r.error_estimate, r.nodes_per_circle)
    return out


def qmoment_skew(domain: SkewDomain, params: ModelParams, query: MomentQuery,
                 nodes_per_circle: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                 cap: int = NODE_CAP, contour_scale: float = 1.0) -> MomentResult:
    """E[exp_q(H^{(A,B)}_{pi.c})] for the SC6V model on a skew domain."""
    res = qmoment_skew_multi(domain, params, query.points, query.colors, [query.pi],
                             nodes_per_circle, tol, cap, contour_scale)
    return res[query.pi.images]


# ---------------------------------------------------------------------------
# Theorem: higher-spin quadrant q-moments (vertical fusion)
# ---------------------------------------------------------------------------


def _hs_factors(params: ModelParams, points, colors):
    q = params.q
    us = params.row_rapidities
    ys = params.col_rapidities
    ss = params.col_spins
    max_beta_row = max(int(p[1] - 0.5) for p in points)
    max_alpha_col = max(int(p[0] - 0.5) for p in points)
    levels = [params.level(c) for c in colors]
    n_rows_needed = max([max_beta_row] + levels)
    if len(us) < n_rows_needed or len(ys) < max_alpha_col or len(ss) < max_alpha_col:
        raise ValidationError("not enough rapidities/spins for the query")

    phi_factors = [ratio_product([us[i] for i in range(lc)], [q * us[i] for i in range(lc)])
                   for lc in levels]

    def psi_for(alpha, beta):
        rows = [us[i] for i in range(int(beta - 0.5))]

        def f(w, rows=rows, ja=int(alpha - 0.5)):
            out = np.ones_like(np.asarray(w, dtype=complex))
            for t in rows:
                out = out * (1 - q * t * w) / (1 - t * w)
            for j in range(ja):
                sj, yj = ss[j], ys[j]
                out = out * sj * (w * sj - 1 / yj) / (w - sj / yj)
            return out

        return f

    psi_factors = [psi_for(a, b) for (a, b) in points]
    inside = [1 / us[i] for i in range(n_rows_needed)]
    outside = [1 / (q * us[i]) for i in range(n_rows_needed)]
    outside += [ss[j] / ys[j] for j in range(max_alpha_col)]
    return phi_factors, psi_factors, inside, outside


def qmoment_higher_spin_multi(params: ModelParams, points, colors, pis,
                              nodes_per_circle: int = DEFAULT_NODES,
                              tol: float = DEFAULT_TOL, cap: int = NODE_CAP,
                              contour_scale: float = 1.0) -> dict:
    _validate_query_order(points, colors)
    if any(p[0] <= 0 or p[1] <= 0 for p in points):
        raise ValidationError("points must lie in the open quadrant")
    q = params.q
    k = len(points)
    phi_factors, psi_factors, inside, outside = _hs_factors(params, points, colors)
    check_pole_separation(params.row_rapidities[: max(2, len(inside))], q)
    fam = build_contours(inside, outside, k, q)
    if contour_scale != 1.0:
        fam = fam.scaled(contour_scale)
    integrand = PairingIntegrand([(1.0, phi_factors)], psi_factors,
                                 [(1.0, pi) for pi in pis], "q")
    raw = pairing_values(fam, integrand, q, nodes_per_circle, tol, cap)
    out = {}
    for pi in pis:
        r = raw[pi.images]
        pref = q ** (k * (k - 1) / 2 - pi.length())
        out[pi.images] = MomentResult(pref * r.value, pref * r.error_estimate, r.nodes_per_circle)
    return out


def qmoment_higher_spin(params: ModelParams, query: MomentQuery,
                        nodes_per_circle: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                        cap: int = NODE_CAP, contour_scale: float = 1.0) -> MomentResult:
    """E[q^{sum_i h_{>c_i}(alpha_pi(i), beta_pi(i))}] on the higher-spin quadrant."""
    res = qmoment_higher_spin_multi(params, query.points, query.colors, [query.pi],
                                    nodes_per_circle, tol, cap, contour_scale)
    return res[query.pi.images]


def qmoment_higher_spin_kappa(params: ModelParams, query: MomentQuery,
                              nodes_per_circle: int = DEFAULT_NODES,
                              tol: float = DEFAULT_TOL, cap: int = NODE_CAP) -> MomentResult:
    """Alternative kappa-expansion route: sum over rho of kappa-weighted integrals.

    Evaluates T_pi pointwise on the mesh through the scalar kappa table instead
    of the factored engine; a cross-check of the same formula (k <= 3).
    """
    _validate_query_order(query.points, query.colors)
    q = params.q
    k = query.k
    phi_factors, psi_factors, inside, outside = _hs_factors(params, query.points, query.colors)
    fam = build_contours(inside, outside, k, q)

    pi = query.pi

    def f(w):
        table = kappa_table(pi, w, variant="q", q=q)
        psi = np.ones_like(np.asarray(w[0], dtype=complex))
        for a in range(k):
            psi = psi * psi_factors[a](w[a])
        tot = 0j
        for rho, coef in table.items():
            phi = np.ones_like(psi)
            for slot in range(k):
                phi = phi * phi_factors[slot](w[rho[slot] - 1])
            tot = tot + coef * phi
        return tot * psi

    res = iterated_integral(PointFunction(k, f), fam, nodes_per_circle, q, "q", tol, cap)
    pref = q ** (k * (k - 1) / 2 - pi.length())
    return MomentResult(pref * res.value, pref * res.error_estimate, res.nodes_per_circle)


# ---------------------------------------------------------------------------
# Shifted q-moment observables (Borodin-Wheeler style)
# ---------------------------------------------------------------------------


def _coset(pi: Permutation, mults):
    """[pi]_c = pi * S_c for color blocks of sizes mults."""
    k = len(pi)
    blocks = []
    pos = 0
    for m in mults:
        blocks.append(list(range(pos + 1, pos + m + 1)))
        pos += m
    members = {pi.images}
    frontier = [pi]
    while frontier:
        cur = frontier.pop()
        for block in blocks:
            for i in block[:-1]:
                nxt = cur * Permutation.transposition(k, i)
                if nxt.images not in members:
                    members.add(nxt.images)
                    frontier.append(nxt)
    return [Permutation(im) for im in sorted(members)]


def shifted_observable(params: ModelParams, points, base_colors, pi: Permutation,
                       exact: bool = True, batch=None,
                       nodes_per_circle: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                       cap: int = NODE_CAP):
    """E[O^p_{pi.c}] for the shifted q-moment observable.

    ``base_colors`` is the monotone c = [1]^{m_1} ... [n]^{m_n} (entries >= 1).
    exact=True evaluates the coset/T-sum integral formula; exact=False computes
    the empirical mean from a higher-spin SampleBatch.
    """
    colors = list(base_colors)
    if any(c1 > c2 for c1, c2 in zip(colors, colors[1:])) or (colors and colors[0] < 1):
        raise ValidationError("base colors must be nondecreasing and >= 1")
    k = len(points)
    if len(colors) != k or len(pi) != k:
        raise ValidationError("points, colors, pi must share one rank")
    n = max(colors) if colors else 0
    mults = [colors.count(c) for c in range(1, n + 1)]
    if exact:
        return _shifted_exact(params, points, colors, pi, mults,
                              nodes_per_circle, tol, cap)
    if batch is None:
        raise ValidationError("empirical evaluation needs a SampleBatch")
    return _shifted_empirical(batch, points, colors, pi)


def _shifted_exact(params, points, colors, pi, mults, nodes_per_circle, tol, cap):
    _validate_query_order(points, colors)
    q = params.q
    k = len(points)
    n = len(mults)
    us = params.row_rapidities

    def level_factor(lc):
        return ratio_product([us[i] for i in range(lc)], [q * us[i] for i in range(lc)])

    # expand prod_c (sum_{j_c=0}^{m_c} coef * slot assignment) into phi terms
    phi_terms = [(1.0, [])]
    offset = 0
    for c in range(1, n + 1):
        m_c = mults[c - 1]
        lower = level_factor(params.level(c - 1))
        upper = level_factor(params.level(c))
        new_terms = []
        for coef, factors in phi_terms:
            for j in range(m_c + 1):
                cj = (-1) ** j * q ** (_binom2(m_c - j)) / (
                    q_pochhammer(q, q, j) * q_pochhammer(q, q, m_c - j)
                )
                slot_factors = [lower] * j + [upper] * (m_c - j)
                new_terms.append((coef * cj, factors + slot_factors))
        phi_terms = new_terms
        offset += m_c
    _, psi_factors, inside, outside = _hs_factors(params, points, [n] * k)
    fam = build_contours(inside, outside, k, q)
    coset = _coset(pi, mults)
    integrand = PairingIntegrand(phi_terms, psi_factors, [(1.0, tau) for tau in coset], "q")
    raw = pairing_values(fam, integrand, q, nodes_per_circle, tol, cap)
    total = sum(raw[tau.images].value for tau in coset)
    est = sum(raw[tau.images].error_estimate for tau in coset)
    pref = (1 - q) ** k
    return MomentResult(pref * total, pref * est, max(r.nodes_per_circle for r in raw.values()))


def _binom2(m: int) -> int:
    return m * (m - 1) // 2


def _shifted_empirical(batch, points, colors, pi):
    """Mean of O^p_{pi.c} over a higher-spin SampleBatch, with standard error."""
    q = batch.params.q
    k = len(points)
    perm_colors = pi.act(colors)  # pi.c
    r_gt = [sum(1 for j in range(i + 1, k) if perm_colors[j] > perm_colors[i]) for i in range(k)]
    r_ge = [sum(1 for j in range(i + 1, k) if perm_colors[j] >= perm_colors[i]) for i in range(k)]
    prod = np.ones(batch.count)
    for i in range(k):
        c = perm_colors[i]
        h_gt = batch.heights(points[i], c).astype(float)
        h_ge = batch.heights(points[i], c - 1).astype(float)
        prod = prod * (q ** (h_gt - r_gt[i]) - q ** (h_ge - r_ge[i]))
    return prod.mean(), prod.std(ddof=1) / np.sqrt(batch.count)


# ---------------------------------------------------------------------------
# q-Hahn q-moments (full fusion)
# ---------------------------------------------------------------------------


def qmoment_qhahn(q: float, s: float, z: float, boundary_levels, query: MomentQuery,
                  nodes_per_circle: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                  cap: int = NODE_CAP, contour_scale: float = 1.0) -> MomentResult:
    """E[q^{sum h}] for the q-Hahn quadrant model via the fully fused formula."""
    _validate_query_order(query.points, query.colors)
    params = ModelParams(q=q, boundary_levels=tuple(boundary_levels))
    levels = [params.level(c) for c in query.colors]
    beta_k = query.points[-1][1]
    if not beta_k > levels[-1]:
        raise UnsupportedRegimeError(
            "the implemented formula requires beta_k > l_{c_k}"
        )
    k = query.k
    zi2 = 1 / (z * z)

    phi_factors = [ratio_product([s] * lc, [zi2 * s] * lc) for lc in levels]

    def psi_for(alpha, beta):
        be = int(beta - 0.5)
        al = int(alpha - 0.5)

        def f(w):
            w = np.asarray(w, dtype=complex)
            out = ((1 - zi2 * s * w) / (1 - s * w)) ** be
            out = out * (s * (w * s - 1) / (w - s)) ** al
            return out * s / (s - w)  # measure factor s/(s - w)

        return f

    psi_factors = [psi_for(a, b) for (a, b) in query.points]
    fam = build_contours_qhahn(s, z, q, k)
    if contour_scale != 1.0:
        fam = fam.scaled(contour_scale)
    integrand = PairingIntegrand([(1.0, phi_factors)], psi_factors, [(1.0, query.pi)], "q")
    raw = pairing_values(fam, integrand, q, nodes_per_circle, tol, cap)
    r = raw[query.pi.images]
    pref = q ** (k * (k - 1) / 2 - query.pi.length())
    return MomentResult(pref * r.value, pref * r.error_estimate, r.nodes_per_circle)


# ---------------------------------------------------------------------------
# Beta polymer moments
# ---------------------------------------------------------------------------


def beta_moment(sigma: float, rho: float, points, delays, pi: Permutation | None = None,
                nodes_per_circle: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                cap: int = NODE_CAP, contour_scale: float = 1.0) -> MomentResult:
    """E[prod_i Z_(c_i)^(m_pi(i), t_pi(i))] for the delayed Beta polymer.

    ``points`` are integer (m, t) pairs mapped to dual points
    (alpha, beta) = (m - 1/2, t - 1/2); ``delays`` are the c_i.
    """
    if not sigma > rho > 0:
        raise ValidationError("need sigma > rho > 0")
    k = len(points)
    delays = list(delays)
    pi = pi or Permutation.identity(k)
    ms = [int(p[0]) for p in points]
    ts = [int(p[1]) for p in points]
    if any(m1 > m2 for m1, m2 in zip(ms, ms[1:])) or any(t1 < t2 for t1, t2 in zip(ts, ts[1:])):
        raise ValidationError("need m nondecreasing and t nonincreasing")
    if any(c1 > c2 for c1, c2 in zip(delays, delays[1:])) or any(c < 0 for c in delays):
        raise ValidationError("delays must be nonnegative and nondecreasing")
    if delays and delays[-1] >= ts[-1]:
        raise ValidationError("need c_k < beta_k")
    for i in range(k):
        if ms[pi(i + 1) - 1] + delays[i] > ts[pi(i + 1) - 1]:
            raise ValidationError("need alpha_pi(i) + c_i <= beta_pi(i)")

    half = sigma / 2

    def phi_for(c):
        def f(w):
            w = np.asarray(w, dtype=complex)
            return ((w - half) / (w - half + rho)) ** c

        return f

    def psi_for(m, t):
        def f(w):
            w = np.asarray(w, dtype=complex)
            out = ((w - half + rho) / (w - half)) ** (t - 1)
            out = out * ((w - half) / (w + half)) ** (m - 1)
            return out * w / (w + half)  # fold measure 1/(w + sigma/2) over 1/w

        return f

    fam = build_contours_beta(sigma, rho, k)
    if contour_scale != 1.0:
        fam = fam.scaled(contour_scale)
    integrand = PairingIntegrand(
        [(1.0, [phi_for(c) for c in delays])],
        [psi_for(m, t) for m, t in zip(ms, ts)],
        [(1.0, pi)], "polymer",
    )
    raw = pairing_values(fam, integrand, None, nodes_per_circle, tol, cap)
    r = raw[pi.images]
    return MomentResult(r.value, r.error_estimate, r.nodes_per_circle)
