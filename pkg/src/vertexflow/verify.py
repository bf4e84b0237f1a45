"""Executable verification of the paper-level identities; the acceptance engine.

Every check returns a CheckReport carrying the worst error, the case count,
and enough seed/context detail to reproduce a failure exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .hecke import Permutation, PointFunction, apply_T
from .lattice import Cut, ModelParams, SkewDomain, UpLeftPath
from .qmoments import MomentQuery, qmoment_skew
from .sampler import enumerate_sc6v, sample_sc6v
from .weights import l_weight, q_pochhammer, r_weight


@dataclass
class CheckReport:
    name: str
    status: str  # "pass" | "fail"
    max_abs_error: float
    samples_or_cases: int
    details: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "max_abs_error": self.max_abs_error,
            "samples_or_cases": self.samples_or_cases,
            "details": self.details,
        }


def _report(name, err, cases, tol, details="") -> CheckReport:
    status = "pass" if err < tol else "fail"
    return CheckReport(name, status, float(err), cases, details)


# ---------------------------------------------------------------------------
# local relation
# ---------------------------------------------------------------------------


def local_relation_error(q, z, i: int, j: int, colors) -> float:
    """|LHS - RHS| of the single-vertex local relation in reduced form.

    i is the incoming vertical color, j the incoming horizontal color; the
    expectation runs over the outgoing right color l of the R_z vertex.
    """
    r = len(colors)
    lhs = 0j
    for (k_out, l_out) in {(i, j), (j, i)}:
        w = r_weight(i, j, k_out, l_out, z, q)
        if w == 0:
            continue
        lhs += w * q ** sum(1 for c in colors if l_out > c)
    rhs = (q - q**r * z) / (q - z)
    for t, c in enumerate(colors, start=1):
        rhs += (q * z - 1) / (q - z) * q ** (t - 1 + (1 if i > c else 0))
        rhs += (1 - z) / (q - z) * q ** (t - 1 + (1 if i > c else 0) + (1 if j > c else 0))
    return abs(lhs - rhs)


def local_relation_fused_error(q, s, u, comp_i, j: int, colors) -> float:
    """Fused variant: vertex with weights L_u^(s), vertical composition comp_i."""
    r = len(colors)
    n = len(comp_i)
    lhs = 0j
    for l_out in range(n + 1):
        big_k = list(comp_i)
        if j > 0:
            big_k[j - 1] += 1
        if l_out > 0:
            big_k[l_out - 1] -= 1
        if any(v < 0 for v in big_k):
            continue
        w = l_weight(comp_i, j, big_k, l_out, u, s, q)
        if w == 0:
            continue
        lhs += w * q ** sum(1 for c in colors if l_out > c)
    su = s * u
    rhs = (1 - q**r * su) / (1 - su)
    for t, c in enumerate(colors, start=1):
        tail = sum(comp_i[c:]) if c < n else 0
        rhs += (q * su - s * s) / (1 - su) * q ** (t - 1 + tail)
        rhs += (s * s - su) / (1 - su) * q ** (t - 1 + tail + (1 if j > c else 0))
    return abs(lhs - rhs)


def check_local_relation(r: int, trials: int = 1000, seed: int = 0,
                         n_colors: int = 5, tol: float = 1e-12) -> CheckReport:
    """Prop-style local relation at fixed r, random (q, z, colors, incomings)."""
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        q = rng.uniform(0.05, 0.95)
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if abs(z - q) < 1e-3:
            z += 0.1
        colors = sorted(rng.randint(0, n_colors) for _ in range(r))
        i = rng.randint(0, n_colors)
        j = rng.randint(0, n_colors)
        worst = max(worst, local_relation_error(q, z, i, j, colors))
    return _report(f"local_relation_r{r}", worst, trials, tol, f"seed={seed}")


def check_local_relation_fused(r: int, trials: int = 1000, seed: int = 0,
                               n_colors: int = 3, tol: float = 1e-12) -> CheckReport:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        q = rng.uniform(0.05, 0.95)
        s = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        u = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        if abs(1 - s * u) < 1e-2:
            u += 0.2
        comp = [rng.randint(0, 3) for _ in range(n_colors)]
        colors = sorted(rng.randint(0, n_colors) for _ in range(r))
        j = rng.randint(0, n_colors)
        worst = max(worst, local_relation_fused_error(q, s, u, comp, j, colors))
    return _report(f"local_relation_fused_r{r}", worst, trials, tol, f"seed={seed}")


# ---------------------------------------------------------------------------
# shift invariance
# ---------------------------------------------------------------------------


@dataclass
class CutCollection:
    """Cuts on one named skew domain with the standard coloring (1..N+M)."""

    domain: SkewDomain
    cuts: list  # list[Cut]

    def colors(self) -> list[int]:
        return [self.domain.q_path.index_of(c.q_point) for c in self.cuts]


def _se(a, b):  # a searrow b: a weakly above-left of b
    return a[0] <= b[0] and a[1] >= b[1]


def _nw(a, b):  # a nwarrow b: a weakly below-right of b
    return a[0] >= b[0] and a[1] <= b[1]


def cut_crossing(c1: Cut, c2: Cut) -> bool:
    return (_nw(c1.q_point, c2.q_point) and _se(c1.p_point, c2.p_point)) or (
        _se(c1.q_point, c2.q_point) and _nw(c1.p_point, c2.p_point)
    )


def cut_greater(c1: Cut, c2: Cut) -> bool:
    """c1 > c2: c1 up-left of c2; defined only for non-crossing cut pairs."""
    if c1 == c2 or cut_crossing(c1, c2):
        return False
    return _se(c1.q_point, c2.q_point) and _se(c1.p_point, c2.p_point)


def _interval_bijection(sets_a, sets_b, size: int):
    """Bijection phi on {1..size} with phi(sets_a[i]) = sets_b[i], or None.

    Exists iff every signature atom (cell of the Venn partition) has equal
    cardinality on both sides; built by matching atoms in sorted order.
    """
    sig_a, sig_b = {}, {}
    for r in range(1, size + 1):
        key_a = frozenset(i for i, s in enumerate(sets_a) if r in s)
        key_b = frozenset(i for i, s in enumerate(sets_b) if r in s)
        sig_a.setdefault(key_a, []).append(r)
        sig_b.setdefault(key_b, []).append(r)
    if set(sig_a) != set(sig_b):
        return None
    phi = [0] * size
    for key, rows_a in sig_a.items():
        rows_b = sig_b[key]
        if len(rows_a) != len(rows_b):
            return None
        for ra, rb in zip(sorted(rows_a), sorted(rows_b)):
            phi[ra - 1] = rb
    return Permutation(tuple(phi))


def find_shift_isomorphism(col_a: CutCollection, col_b: CutCollection):
    """(phi, psi) realizing a shift-isomorphism, or None if none exists."""
    n, m = col_a.domain.n_rows, col_a.domain.m_cols
    if (n, m) != (col_b.domain.n_rows, col_b.domain.m_cols):
        return None
    if len(col_a.cuts) != len(col_b.cuts):
        return None
    for i, ca in enumerate(col_a.cuts):
        for j, cb in enumerate(col_a.cuts):
            if cut_greater(ca, cb) != cut_greater(col_b.cuts[i], col_b.cuts[j]):
                return None
    phi = _interval_bijection([c.rows() for c in col_a.cuts],
                              [c.rows() for c in col_b.cuts], n)
    psi = _interval_bijection([c.cols() for c in col_a.cuts],
                              [c.cols() for c in col_b.cuts], m)
    if phi is None or psi is None:
        return None
    return phi, psi


def validate_shift_isomorphism(col_a: CutCollection, col_b: CutCollection,
                               phi: Permutation, psi: Permutation) -> None:
    """Raise with the violated condition named; silent when valid."""
    for i, ca in enumerate(col_a.cuts):
        for j, cb in enumerate(col_a.cuts):
            if cut_greater(ca, cb) != cut_greater(col_b.cuts[i], col_b.cuts[j]):
                raise ValidationError(
                    f"cut order violated: ({i}, {j}) ordering differs between collections"
                )
    for i, (ca, cb) in enumerate(zip(col_a.cuts, col_b.cuts)):
        if frozenset(phi(r) for r in ca.rows()) != cb.rows():
            raise ValidationError(f"phi(Row[C_{i+1}]) != Row[C~_{i+1}]")
        if frozenset(psi(c) for c in ca.cols()) != cb.cols():
            raise ValidationError(f"psi(Col[C_{i+1}]) != Col[C~_{i+1}]")


def _cut_moment_query(col: CutCollection, powers):
    """Sorted (points, colors, pi) encoding E[q^{sum a_i h[C_i]}]."""
    pts, cols = [], []
    for cut, a in zip(col.cuts, powers):
        color = col.domain.q_path.index_of(cut.q_point)
        for _ in range(int(a)):
            pts.append(cut.p_point)
            cols.append(color)
    order = sorted(range(len(pts)), key=lambda t: (pts[t][0], -pts[t][1]))
    pts_sorted = [pts[t] for t in order]
    cols_at_point = [cols[t] for t in order]
    cols_sorted = sorted(cols)
    used = [False] * len(cols_sorted)
    pinv = [0] * len(pts)
    for a, c in enumerate(cols_at_point):
        for idx, cs in enumerate(cols_sorted):
            if not used[idx] and cs == c:
                used[idx] = True
                pinv[a] = idx + 1
                break
    pi = Permutation(tuple(pinv)).inverse()
    points_f = [(p[0] / 2, p[1] / 2) for p in pts_sorted]
    return points_f, cols_sorted, pi


def _shifted_params(params: ModelParams, phi: Permutation, psi: Permutation) -> ModelParams:
    return ModelParams(
        q=params.q,
        row_rapidities=phi.act(params.row_rapidities),
        col_rapidities=psi.act(params.col_rapidities),
        col_spins=params.col_spins,
        boundary_levels=params.boundary_levels,
    )


def check_shift_invariance(col_a: CutCollection, col_b: CutCollection,
                           phi: Permutation, psi: Permutation, powers,
                           params: ModelParams, method: str = "enumerate",
                           samples: int = 10**6, seed: int = 0,
                           nodes_per_circle: int = 96, tol: float = 1e-10,
                           z_factor: float = 4.0) -> CheckReport:
    """E[q^{sum a_i h[C_i]}] equality between shift-isomorphic collections.

    method "enumerate": exact oracles on both models plus the integral route,
    reporting both discrepancies.  method "mc": Monte Carlo on both models.
    """
    validate_shift_isomorphism(col_a, col_b, phi, psi)
    params_b = _shifted_params(params, phi, psi)
    q = params.q
    if method == "enumerate":
        ens_a = enumerate_sc6v(col_a.domain, params)
        ens_b = enumerate_sc6v(col_b.domain, params_b)
        pts_a, cols_a2, pi_a = _cut_moment_query(col_a, powers)
        pts_b, cols_b2, pi_b = _cut_moment_query(col_b, powers)
        ma = ens_a.moment(pts_a, pi_a.act(cols_a2), q)
        mb = ens_b.moment(pts_b, pi_b.act(cols_b2), q)
        err_enum = abs(ma - mb)
        ia = qmoment_skew(col_a.domain, params, MomentQuery(pts_a, cols_a2, pi_a),
                          nodes_per_circle=nodes_per_circle)
        ib = qmoment_skew(col_b.domain, params_b, MomentQuery(pts_b, cols_b2, pi_b),
                          nodes_per_circle=nodes_per_circle)
        err_int = max(abs(ia.value - ma), abs(ib.value - mb), abs(ia.value - ib.value))
        err = max(err_enum, err_int)
        return _report("shift_invariance_exact", err, len(ens_a.entries) + len(ens_b.entries),
                       tol, f"enum diff {err_enum:.3e}, integral diff {err_int:.3e}")
    if method != "mc":
        raise ValidationError("method must be 'enumerate' or 'mc'")
    vals = []
    for col, par, stream in ((col_a, params, 0), (col_b, params_b, 1)):
        batch = sample_sc6v(col.domain, par, seed + stream, samples)
        expo = np.zeros(samples, dtype=np.int64)
        for cut, a in zip(col.cuts, powers):
            color = col.domain.q_path.index_of(cut.q_point)
            expo += int(a) * batch.heights((cut.p_point[0] / 2, cut.p_point[1] / 2), color)
        obs = q ** expo.astype(float)
        vals.append((obs.mean(), obs.std(ddof=1) / np.sqrt(samples)))
    (ma, sa), (mb, sb) = vals
    sigma = np.hypot(sa, sb)
    err = abs(ma - mb)
    status = "pass" if err <= z_factor * sigma + 1e-12 else "fail"
    return CheckReport("shift_invariance_mc", status, float(err), samples,
                       f"seed={seed}, sigma={sigma:.3e}, z={err / max(sigma, 1e-300):.2f}")


def random_skew_domain(rng: random.Random, n_rows: int, m_cols: int) -> SkewDomain:
    """Random pair Q <= P with the standard coloring 1..N+M."""

    def random_path():
        steps = ["H"] * m_cols + ["V"] * n_rows
        rng.shuffle(steps)
        return "".join(steps)

    start = (2 * m_cols + 1, 1)
    for _ in range(200):
        qs, ps = random_path(), random_path()
        try:
            q_path = UpLeftPath(start, qs)
            p_path = UpLeftPath(start, ps)
            return SkewDomain(q_path, p_path, tuple(range(1, n_rows + m_cols + 1)))
        except Exception:
            continue
    raise ValidationError("failed to draw a random skew domain")


def random_cuts(rng: random.Random, domain: SkewDomain, k: int) -> list:
    qpts = domain.q_path.points()
    ppts = domain.p_path.points()
    cuts = []
    for _ in range(400):
        if len(cuts) == k:
            break
        qp = rng.choice(qpts)
        pp = rng.choice(ppts)
        if qp[0] < pp[0] and qp[1] < pp[1]:
            cuts.append(Cut(qp, pp))
    if len(cuts) < k:
        raise ValidationError("failed to draw cuts")
    return cuts


def random_shift_pair(rng: random.Random, n_rows: int, m_cols: int, k: int,
                      attempts: int = 4000):
    """A random shift-isomorphic pair of cut collections on random domains.

    Rejection sampling: draw both sides independently and keep geometry pairs
    admitting a shift-isomorphism (nontrivial pairs dominate at these sizes).
    """
    for _ in range(attempts):
        dom_a = random_skew_domain(rng, n_rows, m_cols)
        dom_b = random_skew_domain(rng, n_rows, m_cols)
        try:
            cuts_a = random_cuts(rng, dom_a, k)
            cuts_b = random_cuts(rng, dom_b, k)
        except ValidationError:
            continue
        col_a = CutCollection(dom_a, cuts_a)
        col_b = CutCollection(dom_b, cuts_b)
        iso = find_shift_isomorphism(col_a, col_b)
        if iso is not None:
            return col_a, col_b, iso[0], iso[1]
    raise ValidationError("no shift-isomorphic pair found")


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------


def _ybe_error(q, x, y, z, n: int) -> float:
    import itertools

    rngc = range(n + 1)
    worst = 0.0
    for a1, a2, a3, b1, b2, b3 in itertools.product(rngc, repeat=6):
        lhs = sum(
            r_weight(a2, a3, k2, k3, x / y, q)
            * r_weight(a1, k3, k1, b3, x / z, q)
            * r_weight(k1, k2, b1, b2, y / z, q)
            for k1 in rngc for k2 in rngc for k3 in rngc
        )
        rhs = sum(
            r_weight(a1, a2, k1, k2, y / z, q)
            * r_weight(k1, a3, b1, k3, x / z, q)
            * r_weight(k2, k3, b2, b3, x / y, q)
            for k1 in rngc for k2 in rngc for k3 in rngc
        )
        worst = max(worst, abs(lhs - rhs))
    return worst


def check_ybe(trials: int = 100, seed: int = 0, n: int = 2, tol: float = 1e-12) -> CheckReport:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        q = rng.uniform(0.1, 0.9)
        x, y, z = (complex(rng.uniform(0.5, 2), rng.uniform(-0.5, 0.5)) for _ in range(3))
        worst = max(worst, _ybe_error(q, x, y, z, n))
    return _report("yang_baxter", worst, trials, tol, f"seed={seed}, n={n}")


def check_exchange(trials: int = 10, seed: int = 0, m_cols: int = 2, n: int = 2,
                   tol: float = 1e-11) -> CheckReport:
    from .hecke import row_operator

    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        q = rng.uniform(0.15, 0.85)
        ys = [complex(rng.uniform(0.7, 1.4), rng.uniform(-0.3, 0.3)) for _ in range(m_cols)]
        x1 = complex(rng.uniform(0.6, 2.0), rng.uniform(-0.4, 0.4))
        x2 = complex(rng.uniform(0.6, 2.0), rng.uniform(-0.4, 0.4))
        k1, k2 = sorted(rng.sample(range(0, n + 1), 2))
        lhs = row_operator(k1, x1, ys, q, n) @ row_operator(k2, x2, ys, q, n)
        rhs = (x2 - q * x1) / (x2 - x1) * row_operator(k2, x2, ys, q, n) @ row_operator(k1, x1, ys, q, n)
        rhs = rhs - x1 * (1 - q) / (x2 - x1) * row_operator(k2, x1, ys, q, n) @ row_operator(k1, x2, ys, q, n)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return _report("exchange_relation", worst, trials, tol, f"seed={seed}")


def check_lemma44(trials: int = 25, seed: int = 0, t_max: int = 4, tol: float = 1e-11) -> CheckReport:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        t = rng.randint(1, t_max)
        q = rng.uniform(0.15, 0.85)
        lam = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1, 1))
        mu = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1, 1))
        w = [complex(rng.uniform(-1.5, 1.5), rng.uniform(-1, 1)) for _ in range(t)]

        def base(ws, mu=mu, q=q, lam=lam):
            return (q - 1) * (lam - q * mu * ws[0]) / ((q - lam) * (1 - mu * ws[0]))

        f = PointFunction(t, base)
        total = (q - lam * q**t) / (q - lam)
        for i in range(t):
            g = f  # T_{sigma^-_[1,i+1]} = T_i T_{i-1} ... T_1, T_1 applied first
            for idx in range(1, i + 1):
                g = apply_T(idx, g, q=q)
            total = total + g(w)
        rhs = 1.0
        for i in range(t):
            rhs *= (1 - q * mu * w[i]) / (1 - mu * w[i])
        worst = max(worst, abs(total - rhs))
    return _report("lemma_4_4", worst, trials, tol, f"seed={seed}")


def check_qidentity(trials: int = 50, seed: int = 0, m_max: int = 3, tol: float = 1e-12) -> CheckReport:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        m = rng.randint(1, m_max)
        q = rng.uniform(0.1, 0.9)
        xs = [complex(rng.uniform(-2, 2), rng.uniform(-1, 1)) for _ in range(m)]
        ys = [complex(rng.uniform(-2, 2), rng.uniform(-1, 1)) for _ in range(m)]
        lhs = 1.0
        for j in range(1, m + 1):
            lhs *= ys[j - 1] - q ** (j - m) * xs[j - 1]
        rhs = 0j
        for tau in Permutation.all(m):
            for j in range(m + 1):
                coef = (-1) ** j * q ** ((m - j) * (m - j - 1) // 2)
                coef /= q_pochhammer(q, q, j) * q_pochhammer(q, q, m - j)
                term = coef * q ** (tau.length() - m * (m - 1) // 2)
                for i in range(1, j + 1):
                    term *= xs[tau(i) - 1]
                for i in range(j + 1, m + 1):
                    term *= ys[tau(i) - 1]
                rhs += term
        rhs *= (1 - q) ** m
        worst = max(worst, abs(lhs - rhs))
    return _report("q_identity", worst, trials, tol, f"seed={seed}")


def check_hecke_quadratic(trials: int = 20, seed: int = 0, tol: float = 1e-11) -> CheckReport:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        k = rng.randint(2, 4)
        q = rng.uniform(0.15, 0.85)
        cs = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(k)]
        ds = [complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)) for _ in range(k)]

        def f_ev(w, cs=cs, ds=ds):
            out = 1.0
            for c, d, wa in zip(cs, ds, w):
                out = out * (1 + c * wa) / (1 - d * wa)
            return out + w[0] * w[-1]

        f = PointFunction(k, f_ev)
        i = rng.randint(1, k - 1)
        tf = apply_T(i, f, q=q)
        g = PointFunction(k, lambda w: tf(w) + f(w))
        w = [complex(rng.uniform(-1.5, 1.5), rng.uniform(-1, 1)) for _ in range(k)]
        val = apply_T(i, g, q=q)(w) - q * g(w)  # (T_i - q)(T_i + 1) f
        worst = max(worst, abs(val))
    return _report("hecke_quadratic", worst, trials, tol, f"seed={seed}")


def check_identity_suite(which=None, seed: int = 0) -> list[CheckReport]:
    """Run the named identities ('ybe', 'exchange', 'lemma44', 'qidentity',
    'hecke_quadratic'); None runs all."""
    table = {
        "ybe": lambda: check_ybe(trials=20, seed=seed),
        "exchange": lambda: check_exchange(seed=seed),
        "lemma44": lambda: check_lemma44(seed=seed),
        "qidentity": lambda: check_qidentity(seed=seed),
        "hecke_quadratic": lambda: check_hecke_quadratic(seed=seed),
    }
    names = list(table) if which is None else list(which)
    return [table[name]() for name in names]


# ---------------------------------------------------------------------------
# Monte Carlo vs exact bridge
# ---------------------------------------------------------------------------


def mc_vs_exact(observable_values: np.ndarray, exact: float, name: str,
                z_factor: float = 4.0, n_batches: int = 20,
                rerun=None) -> CheckReport:
    """Compare an empirical sample of an observable against an exact value.

    The standard error comes from batch means; a failing comparison reruns
    once at 4x samples via the ``rerun`` callback (guards 1-in-16k flukes).
    """
    vals = np.asarray(observable_values, dtype=float)
    n = len(vals)
    batches = np.array_split(vals, n_batches)
    means = np.array([b.mean() for b in batches])
    sigma = means.std(ddof=1) / np.sqrt(len(means))
    err = abs(vals.mean() - exact)
    if err <= z_factor * sigma + 1e-12:
        return CheckReport(name, "pass", float(err), n,
                           f"sigma={sigma:.3e}, z={err / max(sigma, 1e-300):.2f}")
    if rerun is not None:
        vals = np.asarray(rerun(4 * n), dtype=float)
        batches = np.array_split(vals, n_batches)
        means = np.array([b.mean() for b in batches])
        sigma = means.std(ddof=1) / np.sqrt(len(means))
        err = abs(vals.mean() - exact)
        status = "pass" if err <= z_factor * sigma + 1e-12 else "fail"
        return CheckReport(name, status, float(err), len(vals),
                           f"rerun at 4x; sigma={sigma:.3e}")
    return CheckReport(name, "fail", float(err), n, f"sigma={sigma:.3e}")
