"""Vertex-weight families and the q-special-function layer they share.

All weight functions are written with plain arithmetic operators, so they
accept floats, complex numbers or ``fractions.Fraction`` instances alike.
The Fraction path is the exact-rational mode used by the identity tests.
Unlisted or conservation-violating edge configurations get weight 0 rather
than raising, so sweeps can iterate blindly over all color tuples.
"""

from __future__ import annotations

from itertools import permutations as _it_permutations

from .errors import ParameterSingularityError

# ---------------------------------------------------------------------------
# q-special functions
# ---------------------------------------------------------------------------


def q_pochhammer(x, q, n: int):
    """(x; q)_n = prod_{i=0}^{n-1} (1 - q^i x).  Requires n >= 0."""
    if n < 0:
        raise ValueError("q-Pochhammer order must be >= 0")
    out = _one_like(q)
    p = _one_like(q)
    for _ in range(n):
        out = out * (1 - p * x)
        p = p * q
    return out


def q_binom(n: int, m: int, q):
    """Gaussian binomial [n choose m]_q; 0 when m < 0 or m > n."""
    if m < 0 or m > n:
        return 0 * _one_like(q)
    num = q_pochhammer(q, q, n)
    den = q_pochhammer(q, q, m) * q_pochhammer(q, q, n - m)
    return num / den


def inv(word) -> int:
    """Number of inversions: pairs a < b with word[a] > word[b]."""
    w = list(word)
    return sum(1 for a in range(len(w)) for b in range(a + 1, len(w)) if w[a] > w[b])


def tinv(word) -> int:
    """Number of co-inversions: pairs a < b with word[a] < word[b]."""
    w = list(word)
    return sum(1 for a in range(len(w)) for b in range(a + 1, len(w)) if w[a] < w[b])


def z_q(n_slots: int, comp, q):
    """Inversion generating function of words with color multiset ``comp``.

    z_q(N, I) = (q;q)_N / ((q;q)_{I_0} (q;q)_{I_1} ... (q;q)_{I_n}) where
    I_0 = N - |I| counts the zeros filling the word.
    """
    total = sum(comp)
    if total > n_slots:
        raise ValueError("composition exceeds the number of slots")
    den = q_pochhammer(q, q, n_slots - total)
    for c in comp:
        den = den * q_pochhammer(q, q, c)
    return q_pochhammer(q, q, n_slots) / den


def phi_factor(a_comp, b_comp, x, y, q):
    """The two-composition factor entering the fused weight.

    Phi(A, B; x, y) = (x;q)_{|A|} (y/x;q)_{|B|-|A|} / (y;q)_{|B|}
                      * (y/x)^{|A|} q^{sum_{i<j}(B_i - A_i) A_j}
                      * prod_i binom(B_i, A_i)_q
    Vanishes whenever A_i > B_i for some i.
    """
    a = list(a_comp)
    b = list(b_comp)
    if len(a) != len(b):
        raise ValueError("compositions must have equal length")
    if any(ai > bi for ai, bi in zip(a, b)):
        return 0 * _one_like(q)
    ta, tb = sum(a), sum(b)
    den = q_pochhammer(y, q, tb)
    if den == 0:
        raise ParameterSingularityError("(y;q)_{|B|} vanishes in Phi")
    ratio = y / x
    expo = sum((b[i] - a[i]) * a[j] for i in range(len(a)) for j in range(i + 1, len(a)))
    val = q_pochhammer(x, q, ta) * q_pochhammer(ratio, q, tb - ta) / den
    val = val * ratio**ta * q**expo
    for ai, bi in zip(a, b):
        val = val * q_binom(bi, ai, q)
    return val


def q_special(kind: str, *args):
    """Dispatch to the q-special functions by name.

    kind in {"pochhammer", "binom", "Zq", "inv", "tinv", "Phi"}.
    """
    table = {
        "pochhammer": q_pochhammer,
        "binom": q_binom,
        "Zq": z_q,
        "inv": inv,
        "tinv": tinv,
        "Phi": phi_factor,
    }
    if kind not in table:
        raise ValueError(f"unknown q-special function {kind!r}")
    return table[kind](*args)


def _one_like(q):
    # Fraction(1) if q is a Fraction, else plain 1; keeps exact mode exact.
    return q**0


# ---------------------------------------------------------------------------
# Stochastic colored six-vertex weights R_z
# ---------------------------------------------------------------------------


def r_weight(i: int, j: int, k: int, l: int, z, q):
    """Weight R_z(i, j; k, l): i bottom-in, j left-in, k top-out, l right-out.

    Colors live in {0, ..., n} with 0 meaning no path.  Conservation-violating
    or unlisted configurations return 0.  Raises at the pole z = q.
    """
    if z == q:
        raise ParameterSingularityError("r_weight has a pole at z = q")
    zero = 0 * _one_like(q)
    if sorted((i, j)) != sorted((k, l)):
        return zero
    if i == j:
        # single diagonal entry (i,i;i,i) = 1
        return _one_like(q)
    if (k, l) == (i, j):  # pass through
        if i > j:
            return q * (z - 1) / (z - q)
        return (z - 1) / (z - q)
    if (k, l) == (j, i):  # the two paths swap lanes
        if i > j:
            return z * (1 - q) / (z - q)
        return (1 - q) / (z - q)
    return zero


# ---------------------------------------------------------------------------
# Higher-spin weights L_z^(s)
# ---------------------------------------------------------------------------


def l_weight(comp_i, j: int, comp_k, l: int, z, s, q):
    """Higher-spin weight L_z^(s)(I, j; K, l).

    I, K are color compositions on the vertical edges, j/l single colors on
    the horizontal edges (0 = no path).  Returns 0 unless K = I + e^j - e^l
    with e^0 = 0 and all entries of K nonnegative.
    """
    if s * z == 1:
        raise ParameterSingularityError("l_weight has a pole at s z = 1")
    big_i = list(comp_i)
    big_k = list(comp_k)
    n = len(big_i)
    zero = 0 * _one_like(q)
    if len(big_k) != n:
        return zero
    expect = list(big_i)
    if j > 0:
        expect[j - 1] += 1
    if l > 0:
        expect[l - 1] -= 1
    if expect != big_k or any(v < 0 for v in big_k):
        return zero
    den = 1 - s * z

    def tail(a: int) -> int:
        # I_[a; n] with 1-based a
        return sum(big_i[a - 1 : n])

    if j == 0 and l == 0:
        return (1 - s * z * q ** tail(1)) / den
    if j == l:
        return (s * s * q ** big_i[j - 1] - s * z) * q ** tail(j + 1) / den
    if j == 0:  # l >= 1, vertical path exits right
        return s * z * (q ** big_i[l - 1] - 1) * q ** tail(l + 1) / den
    if l == 0:  # left path turns up
        return (1 - s * s * q ** tail(1)) / den
    if l > j:  # smaller color enters left, larger exits right
        return s * z * (q ** big_i[l - 1] - 1) * q ** tail(l + 1) / den
    # l < j: larger color enters left, smaller exits right
    return s * s * (q ** big_i[l - 1] - 1) * q ** tail(l + 1) / den


# ---------------------------------------------------------------------------
# Fully fused weights W_z^(N,M) and the q-Hahn degeneration
# ---------------------------------------------------------------------------


def fused_weight(comp_a, comp_b, comp_c, comp_d, z, q_n, q_m, q):
    """Fused weight W_z^(N,M)(A, B; C, D) with q^N, q^M as free parameters.

    A bottom, B left, C top, D right; all are color compositions.  The value
    is the explicit rational expression (sum over P <= min(B, C) of two Phi
    factors); q_n and q_m stand for q^N and q^M, which enter only rationally,
    so analytic continuation amounts to passing arbitrary values here.
    """
    a, b, c, d = (list(t) for t in (comp_a, comp_b, comp_c, comp_d))
    n = len(a)
    if not (len(b) == len(c) == len(d) == n):
        raise ValueError("compositions must share one length")
    zero = 0 * _one_like(q)
    if any(ai + bi != ci + di for ai, bi, ci, di in zip(a, b, c, d)):
        return zero  # per-color conservation; covers |A|+|B| != |C|+|D| too
    if any(v < 0 for t in (a, b, c, d) for v in t):
        return zero
    pref = z ** (sum(d) - sum(b)) * q_n ** sum(a) * q_m ** (-sum(d))
    total = zero
    for p in _iter_boxes([min(bi, ci) for bi, ci in zip(b, c)]):
        c_minus_p = [ci - pi for ci, pi in zip(c, p)]
        c_plus_d_minus_p = [ci + di - pi for ci, di, pi in zip(c, d, p)]
        t1 = phi_factor(c_minus_p, c_plus_d_minus_p, q_n / q_m * z, z / q_m, q)
        t2 = phi_factor(p, b, 1 / (q_n * z), 1 / q_n, q)
        total = total + t1 * t2
    return pref * total


def _iter_boxes(limits):
    """All integer tuples 0 <= p_i <= limits[i]."""
    if not limits:
        yield ()
        return
    for head in range(limits[0] + 1):
        for rest in _iter_boxes(limits[1:]):
            yield (head,) + rest


def qhahn_weight(comp_a, comp_b, comp_c, comp_d, s, z, q):
    """q-Hahn weight W^qH_{s,z}(A, B; C, D).

    Paths entering from the left (B) are forced upward, so the weight depends
    on A and D only; the value is 0 unless D <= A componentwise and
    C = A + B - D.  Singular when (s^2; q)_{|A|} vanishes.
    """
    a, b, c, d = (list(t) for t in (comp_a, comp_b, comp_c, comp_d))
    n = len(a)
    zero = 0 * _one_like(q)
    if not (len(b) == len(c) == len(d) == n):
        return zero
    if any(di > ai for ai, di in zip(a, d)):
        return zero
    if any(v < 0 for t in (a, b, c, d) for v in t):
        return zero
    if [ai + bi - di for ai, bi, di in zip(a, b, d)] != c:
        return zero
    ta, td = sum(a), sum(d)
    den = q_pochhammer(s * s, q, ta)
    if den == 0:
        raise ParameterSingularityError("(s^2; q)_{|A|} vanishes in qhahn_weight")
    ratio = s * s / (z * z)
    val = ratio**td * q_pochhammer(ratio, q, ta - td) * q_pochhammer(z * z, q, td) / den
    expo = sum(d[i] * (a[j] - d[j]) for i in range(n) for j in range(i + 1, n))
    val = val * q**expo
    for ai, di in zip(a, d):
        val = val * q_binom(ai, ai - di, q)
    return val


# ---------------------------------------------------------------------------
# Reference-by-definition fused weight (stochastic fusion of an NxM block)
# ---------------------------------------------------------------------------


def fused_weight_by_fusion(comp_a, comp_b, comp_c, comp_d, z, n_rows: int, m_cols: int, q, n_colors: int):
    """W_z^(N,M) computed from its defining lattice sum, for cross-checking.

    The block has rows with rapidities x, qx, ..., q^(N-1)x bottom to top and
    columns q^(M-1)y, ..., y left to right, z = x/y.  Representative words for
    C and D are fixed as the sorted ones; q-exchangeability makes the result
    independent of that choice.  Exponential in N*M, so keep N, M <= 2.
    """
    a, b, c, d = (list(t) for t in (comp_a, comp_b, comp_c, comp_d))
    if sum(a) > m_cols or sum(c) > m_cols or sum(b) > n_rows or sum(d) > n_rows:
        return 0 * _one_like(q)
    if sum(a) + sum(b) != sum(c) + sum(d):
        return 0 * _one_like(q)
    k_word = _sorted_word(c, m_cols)
    l_word = _sorted_word(d, n_rows)
    pref = (
        z_q(m_cols, c, q)
        * z_q(n_rows, d, q)
        * q ** (-inv(k_word))
        * q ** (-tinv(l_word))
        / (z_q(m_cols, a, q) * z_q(n_rows, b, q))
    )
    # rapidity of row r (1-based, bottom to top): q^(r-1) x; column m: q^(M-m) y
    total = 0 * _one_like(q)
    for i_word in _words_with_comp(a, m_cols, n_colors):
        for j_word in _words_with_comp(b, n_rows, n_colors):
            block = _block_partition(i_word, j_word, k_word, l_word, z, q, n_rows, m_cols, n_colors)
            total = total + q ** inv(i_word) * q ** tinv(j_word) * block
    return pref * total


def _sorted_word(comp, slots: int):
    word = []
    for color, mult in enumerate(comp, start=1):
        word.extend([color] * mult)
    word = [0] * (slots - len(word)) + word
    return tuple(sorted(word))


def _words_with_comp(comp, slots: int, n_colors: int):
    base = _sorted_word(comp, slots)
    return sorted(set(_it_permutations(base)))


def _block_partition(i_word, j_word, k_word, l_word, z, q, n_rows, m_cols, n_colors):
    """Sum of R-weight products over the N x M block with fixed boundary words."""

    def sweep(row, col, vert, horiz, acc):
        # vert[m]: color on the vertical edge entering (row, m+1) from below
        # horiz: color on the horizontal edge entering (row, col) from the left
        if col > m_cols:
            if horiz != l_word[row - 1]:
                return 0 * _one_like(q)
            if row == n_rows:
                return acc if list(vert) == list(k_word) else 0 * _one_like(q)
            return sweep(row + 1, 1, vert, j_word[row], acc)
        spectral = q ** (row - 1) * z / q ** (m_cols - col)
        total = 0 * _one_like(q)
        inc_v = vert[col - 1]
        for top in range(n_colors + 1):
            for right in range(n_colors + 1):
                w = r_weight(inc_v, horiz, top, right, spectral, q)
                if w == 0:
                    continue
                new_vert = list(vert)
                new_vert[col - 1] = top
                total = total + sweep(row, col + 1, tuple(new_vert), right, acc * w)
        return total

    return sweep(1, 1, tuple(i_word), j_word[0], _one_like(q))


# ---------------------------------------------------------------------------
# Color merging on compositions
# ---------------------------------------------------------------------------


def merge_composition(comp, theta, m_colors: int):
    """Push a composition through a monotone color map theta: {1..n} -> {0..m}.

    theta is a sequence with theta[i-1] = image of color i; color 0 deletes.
    """
    out = [0] * m_colors
    for color_index, count in enumerate(comp, start=1):
        image = theta[color_index - 1]
        if image > 0:
            out[image - 1] += count
    return out
