"""Permutations, Demazure-Lusztig operators, kappa coefficients, Z partition functions.

Two operator variants share all machinery here:

* ``"q"``:        T_i = q + (w_{i+1} - q w_i)/(w_{i+1} - w_i) (t_i - 1)
* ``"polymer"``:  T_i = 1 + (w_{i+1} - w_i + 1)/(w_{i+1} - w_i) (t_i - 1)

Writing T_i = a_i(w) + b_i(w) t_i, the expansion T_pi = sum_rho kappa_pi^rho t_rho
obeys the push rule: a source kappa^rho contributes to target rho with factor
a_i evaluated at (w_{rho(i)}, w_{rho(i+1)}) and to target rho*sigma_i with the
b_i factor at the same pair.  Everything evaluates pointwise; no symbolic algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations as _all_perms

import numpy as np

from .errors import SingularEvaluationError, ValidationError

COINCIDENCE_RTOL = 1e-12


@dataclass(frozen=True)
class Permutation:
    """Element of S_k in one-line notation: images = (pi(1), ..., pi(k))."""

    images: tuple

    def __post_init__(self):
        imgs = tuple(int(v) for v in self.images)
        object.__setattr__(self, "images", imgs)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise ValidationError(f"{imgs} is not a permutation of 1..{len(imgs)}")

    # -- basics -------------------------------------------------------------

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __len__(self) -> int:
        return len(self.images)

    def __mul__(self, other: "Permutation") -> "Permutation":
        # composition of maps: (pi * tau)(i) = pi(tau(i))
        return Permutation(tuple(self.images[other.images[i - 1] - 1] for i in range(1, len(self) + 1)))

    def inverse(self) -> "Permutation":
        out = [0] * len(self)
        for i, v in enumerate(self.images, start=1):
            out[v - 1] = i
        return Permutation(tuple(out))

    def length(self) -> int:
        im = self.images
        return sum(1 for a in range(len(im)) for b in range(a + 1, len(im)) if im[a] > im[b])

    def act(self, values):
        """pi.(v_1..v_k) = (v_{pi^{-1}(1)}, ..., v_{pi^{-1}(k)})."""
        inv = self.inverse().images
        return tuple(values[inv[i - 1] - 1] for i in range(1, len(self) + 1))

    @staticmethod
    def identity(k: int) -> "Permutation":
        return Permutation(tuple(range(1, k + 1)))

    @staticmethod
    def transposition(k: int, i: int) -> "Permutation":
        """sigma_i in S_k (swaps i and i+1)."""
        imgs = list(range(1, k + 1))
        imgs[i - 1], imgs[i] = imgs[i], imgs[i - 1]
        return Permutation(tuple(imgs))

    @staticmethod
    def cycle_plus(k: int, a: int, b: int) -> "Permutation":
        """sigma^+_[a,b] = sigma_a sigma_{a+1} ... sigma_{b-1}: b -> a, i -> i+1."""
        imgs = list(range(1, k + 1))
        for i in range(a, b):
            imgs[i - 1] = i + 1
        imgs[b - 1] = a
        return Permutation(tuple(imgs))

    @staticmethod
    def cycle_minus(k: int, a: int, b: int) -> "Permutation":
        """sigma^-_[a,b] = sigma_{b-1} ... sigma_a: a -> b, i -> i-1."""
        return Permutation.cycle_plus(k, a, b).inverse()

    @staticmethod
    def all(k: int):
        return [Permutation(p) for p in _all_perms(range(1, k + 1))]

    # -- words and order ------------------------------------------------------

    def reduced_word(self) -> tuple:
        """Canonical reduced word from bubble-sorting the one-line form.

        Right-multiplying by sigma_i swaps positions i, i+1; repeatedly fixing
        the first descent sorts pi to the identity in l(pi) swaps, and the
        reversed swap list is a reduced word for pi.
        """
        p = list(self.images)
        swaps = []
        while True:
            for i in range(len(p) - 1):
                if p[i] > p[i + 1]:
                    p[i], p[i + 1] = p[i + 1], p[i]
                    swaps.append(i + 1)
                    break
            else:
                break
        return tuple(reversed(swaps))

    def all_reduced_words(self) -> list[tuple]:
        """Every reduced word; exponential, keep k small."""
        if self.length() == 0:
            return [()]
        out = []
        k = len(self)
        for i in range(1, k):
            if self.images[i - 1] > self.images[i]:  # descent: l(pi sigma_i) < l(pi)
                shorter = self * Permutation.transposition(k, i)
                out.extend(w + (i,) for w in shorter.all_reduced_words())
        return out

    def bruhat_leq(self, other: "Permutation") -> bool:
        """self <= other in strong Bruhat order (dominance criterion)."""
        k = len(self)
        if len(other) != k:
            raise ValidationError("permutations must have equal rank")
        for i in range(1, k + 1):
            for j in range(1, k + 1):
                a = sum(1 for t in range(i) if self.images[t] >= j)
                b = sum(1 for t in range(i) if other.images[t] >= j)
                if a > b:
                    return False
        return True

    def is_interval_ordered(self, a: int, b: int) -> bool:
        """[a,b]-ordered: pi^{-1}(i) < pi^{-1}(j) whenever a <= i < j <= b."""
        inv = self.inverse().images
        return all(inv[i - 1] < inv[i] for i in range(a, b))


# ---------------------------------------------------------------------------
# variant coefficient pairs  T_i = a_i + b_i t_i
# ---------------------------------------------------------------------------


def _coeffs(variant: str, q):
    if variant == "q":
        def a(wi, wi1):
            return (q - 1) * wi1 / (wi1 - wi)

        def b(wi, wi1):
            return (wi1 - q * wi) / (wi1 - wi)

        return a, b
    if variant == "polymer":
        def a(wi, wi1):
            return -1 / (wi1 - wi)

        def b(wi, wi1):
            return (wi1 - wi + 1) / (wi1 - wi)

        return a, b
    raise ValidationError(f"unknown operator variant {variant!r}")


def _check_coincidence(wi, wi1):
    d = np.abs(np.asarray(wi1) - np.asarray(wi))
    scale = np.maximum(np.abs(np.asarray(wi)), np.abs(np.asarray(wi1)))
    if np.any(d < COINCIDENCE_RTOL * np.maximum(scale, 1e-300)):
        raise SingularEvaluationError("evaluation at coincident variables w_i = w_{i+1}")


# ---------------------------------------------------------------------------
# PointFunction and the operator action
# ---------------------------------------------------------------------------


@dataclass
class PointFunction:
    """A function of k complex variables evaluated pointwise.

    ``evaluator`` maps a sequence of k numpy-broadcastable arguments to values.
    ``singularities`` are free-text hints about forbidden hyperplanes.
    """

    k: int
    evaluator: object
    singularities: tuple = ()

    def __call__(self, w):
        if len(w) != self.k:
            raise ValidationError(f"expected {self.k} arguments")
        return self.evaluator(list(w))

    @staticmethod
    def from_per_variable(factors) -> "PointFunction":
        """Product f(w) = prod_a factors[a](w_a)."""
        factors = list(factors)

        def ev(w):
            out = factors[0](w[0])
            for g, wa in zip(factors[1:], w[1:]):
                out = out * g(wa)
            return out

        return PointFunction(len(factors), ev)

    @staticmethod
    def constant(k: int, value) -> "PointFunction":
        return PointFunction(k, lambda w: value + 0 * np.asarray(w[0]))

    def __mul__(self, other: "PointFunction") -> "PointFunction":
        if self.k != other.k:
            raise ValidationError("rank mismatch in PointFunction product")
        return PointFunction(
            self.k,
            lambda w: self.evaluator(list(w)) * other.evaluator(list(w)),
            self.singularities + other.singularities,
        )


def apply_T(i: int, f: PointFunction, variant: str = "q", q=None) -> PointFunction:
    """Single Demazure-Lusztig operator T_i acting on f."""
    if not (1 <= i < f.k):
        raise ValidationError("operator index out of range")
    a_fn, b_fn = _coeffs(variant, q)

    def ev(w):
        _check_coincidence(w[i - 1], w[i])
        swapped = list(w)
        swapped[i - 1], swapped[i] = swapped[i], swapped[i - 1]
        return a_fn(w[i - 1], w[i]) * f.evaluator(list(w)) + b_fn(w[i - 1], w[i]) * f.evaluator(swapped)

    return PointFunction(f.k, ev, f.singularities)


def apply_T_pi(pi: Permutation, f: PointFunction, variant: str = "q", q=None) -> PointFunction:
    """T_pi along the canonical reduced word (word-independent by the braid relations).

    Implemented through the kappa expansion: T_pi f = sum_rho kappa_pi^rho (t_rho f),
    which memoizes the 2^{l(pi)} branch tree by visited variable-permutation.
    """
    if len(pi) != f.k:
        raise ValidationError("permutation rank must match the function rank")

    def ev(w):
        table = kappa_table(pi, w, variant=variant, q=q)
        out = None
        for rho, coef in table.items():
            permuted = [w[r - 1] for r in rho]  # (t_rho f)(w) = f(w_{rho(1)}, ...)
            term = coef * f.evaluator(permuted)
            out = term if out is None else out + term
        return out

    return PointFunction(f.k, ev, f.singularities)


def kappa_table(pi: Permutation, w, variant: str = "q", q=None) -> dict:
    """All coefficients kappa_pi^rho(w) as a dict rho-images -> value.

    Runs the recursion along the canonical reduced word of pi; cost
    O(l(pi) * #support).  Only rho with nonzero contributions appear.
    """
    a_fn, b_fn = _coeffs(variant, q)
    k = len(pi)
    table = {tuple(range(1, k + 1)): 1}
    for i in pi.reduced_word():
        new = {}
        for rho, val in table.items():
            wu, wv = w[rho[i - 1] - 1], w[rho[i] - 1]
            _check_coincidence(wu, wv)
            _accum(new, rho, val * a_fn(wu, wv))
            rho_s = list(rho)
            rho_s[i - 1], rho_s[i] = rho_s[i], rho_s[i - 1]
            _accum(new, tuple(rho_s), val * b_fn(wu, wv))
        table = new
    return table


def _accum(d, key, val):
    if key in d:
        d[key] = d[key] + val
    else:
        d[key] = val


def kappa(pi: Permutation, rho: Permutation, w, variant: str = "q", q=None):
    """kappa_pi^rho(w); exactly 0 when rho is not Bruhat-below pi."""
    table = kappa_table(pi, w, variant=variant, q=q)
    return table.get(rho.images, 0.0)


# ---------------------------------------------------------------------------
# Lattice partition functions Z_pi^rho and row operators
# ---------------------------------------------------------------------------


def z_partition(pi: Permutation, rho: Permutation, w, q):
    """Z_pi^rho(w) on the k x k grid by exhaustive path enumeration.

    Row a (bottom to top) has rapidity w_{rho(a)} and incoming color pi(a);
    column b has rapidity w_b and empty bottom edge; row outputs must be 0
    and column b must emit color b at the top.  Keep k <= 5.
    """
    from .weights import r_weight

    k = len(pi)
    if len(rho) != k or len(w) != k:
        raise ValidationError("rank mismatch in z_partition")
    target_top = tuple(range(1, k + 1))

    def sweep(row, col, vert, horiz, acc):
        if acc == 0:
            return 0
        if col > k:
            if horiz != 0:
                return 0
            if row == k:
                return acc if vert == target_top else 0
            return sweep(row + 1, 1, vert, pi(row + 1), acc)
        z = w[rho(row) - 1] / w[col - 1]
        total = 0
        inc_v = vert[col - 1]
        colors = {inc_v, horiz}
        outcomes = {(inc_v, horiz), (horiz, inc_v)} if inc_v != horiz else {(inc_v, horiz)}
        for top, right in outcomes:
            wt = r_weight(inc_v, horiz, top, right, z, q)
            if wt == 0:
                continue
            nv = list(vert)
            nv[col - 1] = top
            total = total + sweep(row, col + 1, tuple(nv), right, acc * wt)
        return total

    return sweep(1, 1, (0,) * k, pi(1), 1)


def row_operator(k_color: int, x, ys, q, n_colors: int) -> np.ndarray:
    """Matrix of C_k(x | y_1..y_M) on the (n+1)^M column-configuration basis.

    Basis tuples are ordered lexicographically; entry [j_tuple, i_tuple] is the
    single-row partition function with left color k_color and right output 0.
    """
    from itertools import product as _product

    from .weights import r_weight

    m = len(ys)
    basis = list(_product(range(n_colors + 1), repeat=m))
    index = {b: i for i, b in enumerate(basis)}
    dim = len(basis)
    mat = np.zeros((dim, dim), dtype=complex)
    for i_tup in basis:
        # DP over columns: amplitude per internal horizontal color and top prefix
        frontier = {((), k_color): 1.0 + 0j}
        for col in range(m):
            nxt = {}
            z = x / ys[col]
            for (tops, h), amp in frontier.items():
                i_c = i_tup[col]
                outcomes = {(i_c, h), (h, i_c)} if i_c != h else {(i_c, h)}
                for top, right in outcomes:
                    wt = r_weight(i_c, h, top, right, z, q)
                    if wt == 0:
                        continue
                    key = (tops + (top,), right)
                    nxt[key] = nxt.get(key, 0) + amp * wt
            frontier = nxt
        for (tops, h), amp in frontier.items():
            if h == 0:
                mat[index[tops], index[i_tup]] += amp
    return mat
