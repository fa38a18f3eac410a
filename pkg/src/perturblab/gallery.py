"""Explicit constructions reproduced at controlled truncation.

Three families live here:

* the spectrum-free instance over t_n = (n - 1/2)^2 whose generating
  function is (1 + Theta)/(2 cos(pi sqrt(z))), truncated to n <= N, with the
  partial-fraction identity for 1/cos(pi sqrt(z)) checked against an explicit
  tail bound;
* the lacunary-gap machinery: greedy doubly-exponential subsequences and the
  zero-interlacing construction A0, B0, S, gamma, g with coefficients d_n and
  weights nu_n, run in extended precision because the 2^n amplification in
  the weights exhausts doubles around K ~ 40;
* gap/weight hypothesis checks for the synthesis statements.

Everything emits finite identities and partial sums only; no infinite
completeness claim is asserted.
"""

from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .errors import (BadParameters, BisectionFailure, ExhaustedInput,
                     NearPole, ToleranceFailure)
from .data import Atom, DiscreteSpectralData, RankOneData
from ._numutil import kahan_sum

#: working precision (decimal digits) for the interlacing construction
SECTION4_DPS = 60


def sharp_coefficients(n_terms):
    """t_n = (n - 1/2)^2 and c_n = (2/pi)(-1)^{n+1}(n - 1/2), n = 1..n_terms."""
    n = np.arange(1, n_terms + 1)
    t = (n - 0.5) ** 2
    c = (2.0 / np.pi) * (-1.0) ** (n + 1) * (n - 0.5)
    return t, c


@dataclass(frozen=True)
class SharpInstance:
    n_terms: int
    eps: float
    alpha1: float
    alpha2: float
    data: RankOneData
    a_prime: np.ndarray
    b_prime: np.ndarray
    smooth_a_partial: np.ndarray     # partial sums of sum a'^2 t^(2a1 - 2)
    smooth_b_partial: np.ndarray


def sharp_instance(eps, alpha1, alpha2, n_terms):
    """Truncated data of the zero-free construction.

    a'_n = n^(2 - 2 alpha1 - 1/2 - eps), b'_n = c_n / a'_n with
    c_n = (2/pi)(-1)^(n+1)(n - 1/2), atoms t_n = (n - 1/2)^2, unit masses,
    coupling 1.  Requires alpha1, alpha2 >= 0, alpha1 + alpha2 < 1 and
    eps = 1 - alpha1 - alpha2.
    """
    if alpha1 < 0 or alpha2 < 0 or alpha1 + alpha2 >= 1:
        raise BadParameters("need alpha1, alpha2 >= 0 with alpha1 + alpha2 < 1")
    if abs(eps - (1.0 - alpha1 - alpha2)) > 1e-12:
        raise BadParameters("eps must equal 1 - alpha1 - alpha2")
    if n_terms < 10:
        raise BadParameters("need at least 10 terms")
    t, c = sharp_coefficients(n_terms)
    n = np.arange(1, n_terms + 1, dtype=float)
    a_prime = n ** (2.0 - 2.0 * alpha1 - 0.5 - eps)
    b_prime = c / a_prime
    base = DiscreteSpectralData(tuple(Atom(tt, 1.0) for tt in t))
    data = RankOneData(base, a_prime.astype(complex),
                       b_prime.astype(complex), 1.0)
    sa = np.cumsum(a_prime ** 2 * t ** (2 * alpha1 - 2.0))
    sb = np.cumsum(b_prime ** 2 * t ** (2 * alpha2 - 2.0))
    return SharpInstance(n_terms, eps, alpha1, alpha2, data, a_prime, b_prime,
                         sa, sb)


def cos_pi_sqrt(z):
    """cos(pi sqrt(z)) by its even power series in z (entire, branch-free).

    Terms follow T_{k+1} = -T_k pi^2 z / ((2k+1)(2k+2)).  The largest term
    grows like exp(2 pi sqrt(|z|)), so the series runs with enough guard
    digits to keep the final cancellation error below 1e-15 of the result.
    """
    z = complex(z)
    guard = 25 + int(2.0 * np.pi * np.sqrt(abs(z)) / np.log(10.0))
    floor = mp.mpf(10) ** (-(guard - 5))
    with mp.workdps(guard):
        zz = mp.mpc(z)
        term = mp.mpc(1)
        total = term
        biggest = mp.mpf(1)
        for k in range(2000):
            term = -term * mp.pi ** 2 * zz / ((2 * k + 1) * (2 * k + 2))
            total += term
            biggest = max(biggest, abs(term))
            ratio = mp.pi ** 2 * abs(zz) / ((2 * k + 3) * (2 * k + 4))
            if ratio < 1 and abs(term) < floor * biggest:
                break
        return complex(total)


@dataclass(frozen=True)
class MittagLefflerReport:
    z: complex
    n_terms: int
    lhs: complex
    rhs_partial: complex
    err: float
    tail_bound: float


def mittag_leffler_check(z, n_terms):
    """Compare 1/cos(pi sqrt(z)) with its truncated pole expansion.

    The partial sum is 1 + sum_{n<=N} (1/(t_n - z) - 1/t_n) c_n, and the
    remainder is bounded in closed form by (2/pi) |z| / (N - 1/2)^2, valid
    once t_{N+1} >= 2|z|.  The error must not exceed the bound (hard check).
    """
    z = complex(z)
    t, c = sharp_coefficients(n_terms)
    dist = np.min(np.abs(t - z))
    if dist < 0.25:
        raise NearPole(f"z={z} is within 0.25 of a pole")
    if (n_terms + 0.5) ** 2 < 2.0 * abs(z):
        raise BadParameters("tail bound needs (N + 1/2)^2 >= 2|z|")
    rhs = 1.0 + kahan_sum(c * (1.0 / (t - z) - 1.0 / t))
    lhs = 1.0 / cos_pi_sqrt(z)
    err = abs(lhs - rhs)
    tail = (2.0 / np.pi) * abs(z) / (n_terms - 0.5) ** 2
    if err > tail:
        raise ToleranceFailure(
            f"expansion error {err} exceeds the tail bound {tail}")
    return MittagLefflerReport(z, n_terms, lhs, rhs, err, tail)


def sharp_zero_freeness(instance: SharpInstance, rectangle, nudge=None):
    """Zero count of the truncated generating function over a rectangle.

    Runs the argument-principle window check; the construction claims no
    zeros in the closed upper half-plane, so the expected count is 0.
    """
    from .model import build_model
    from .diagnostics import volterra_window_check

    model = build_model(instance.data)
    return volterra_window_check(model, rectangle, nudge=nudge)


# ---------------------------------------------------------------------------
# Lacunary sequences
# ---------------------------------------------------------------------------

def lacunary_sequence(t_seq, max_terms=64):
    """Greedy doubly-exponential subsequence anchored on the spectrum.

    x_1 = 2; each next x_{k+1} = max((2 x_k)^2, t*^2) + 1 where t* is the
    smallest spectrum point above 2 x_k, so that 2 x_k < sqrt(x_{k+1}) and
    the open interval (2 x_k, sqrt(x_{k+1})) contains a spectrum point.
    Consequently x_k >= 2^(2^(k-1)).
    """
    t = np.sort(np.asarray(t_seq, dtype=float))
    xs = [2.0]
    for _ in range(max_terms - 1):
        lo = 2.0 * xs[-1]
        above = t[t > lo]
        if above.size == 0:
            break
        tstar = float(above[0])
        base = max(lo * lo, tstar * tstar)
        xs.append(base + max(1.0, 1e-9 * base))  # strict bump at any scale
    if len(xs) < 2:
        raise ExhaustedInput("spectrum has no point above 4")
    xs = np.asarray(xs)
    for k in range(len(xs) - 1):
        assert 2.0 * xs[k] < np.sqrt(xs[k + 1])
        assert np.any((t > 2.0 * xs[k]) & (t < np.sqrt(xs[k + 1])))
    for k, x in enumerate(xs):
        assert x >= 2.0 ** (2.0 ** k) or k == 0
    return xs


# ---------------------------------------------------------------------------
# Interlacing construction (extended precision)
# ---------------------------------------------------------------------------

@dataclass
class Section4Pipeline:
    t: np.ndarray
    n1_indices: tuple                # 0-based indices of the doubling subsequence
    n2_indices: tuple
    v: np.ndarray
    b0_zeros: np.ndarray             # one per lacunary gap
    sparse_zero_indices: tuple       # 1-based positions k_j = 2^j into b0_zeros
    q: list                          # mpf, atoms outside N1
    d: list                          # mpf coefficients, all atoms
    nu: list                         # mpf weights, all atoms
    residue_rel_errors: np.ndarray
    partial_fraction_rel_error: float
    expansion_rel_error: float       # (arb0) product vs coefficient sums
    sandwich_c1: float
    sandwich_c2: float
    q_total: float
    arb1_max_n: int
    arb2_max_n: int
    weight_sum_outside_n2: float
    inv_t_n2_partial: np.ndarray
    double_precision_max_k: int
    evaluators: dict = field(repr=False)

    @property
    def d_float(self):
        return np.array([float(x) for x in self.d])

    @property
    def nu_float(self):
        return np.array([float(x) for x in self.nu])


def _doubling_subsequence(t, start=0):
    idx = [start]
    for i in range(start + 1, len(t)):
        if t[i] > 2.0 * t[idx[-1]]:
            idx.append(i)
    return idx


def _tail_monotone_max_n(u_of_n, n_values, tail_from):
    """Largest N in n_values with u(N) strictly decreasing on the tail."""
    best = 0
    for n_exp in n_values:
        seq = u_of_n(n_exp)
        tail = seq[tail_from:]
        if len(tail) >= 2 and all(x > y for x, y in zip(tail, tail[1:])):
            best = n_exp
        else:
            break
    return best


def section4_build(t_seq, truncation, v_rule="default", sparsity="doubling",
                   dps=SECTION4_DPS):
    """Run the interlacing construction on the first `truncation` atoms.

    Builds A0 over the doubling subsequence {t_{n_k}}, the interlacing
    function B0 with one zero per lacunary gap, the sparse product S over
    zeros k_j = 2^j, the correction gamma with weights q_n, the function g
    with g/A = (B0/(S A0)) gamma, the coefficients d_n of the partial
    fraction of g/A, and the weights nu: nu_{n_k} = d_{n_k}^2, nu_{m_j} = 1
    on a second doubling subsequence, nu_n = 2^n d_n^2 elsewhere.  All
    identity families are checked in `dps`-digit arithmetic.
    """
    if truncation > 200:
        raise BadParameters("construction limited to 200 atoms")
    t_np = np.sort(np.asarray(t_seq, dtype=float))[:truncation]
    if t_np.size < truncation or truncation < 6:
        raise ExhaustedInput("need at least 6 (and `truncation`) atoms")
    if np.any(t_np <= 0):
        raise BadParameters("constructed part needs positive atoms")
    with mp.workdps(dps):
        t = [mp.mpf(x) for x in t_np]
        k_atoms = len(t)
        n1 = _doubling_subsequence(t_np)
        if len(n1) < 3:
            raise ExhaustedInput("need at least 3 lacunary points")
        others = [i for i in range(k_atoms) if i not in set(n1)]

        # interlacing sum with deterministic weights; nudge away from
        # accidental zeros at the remaining atoms
        v = [mp.mpf(1.5) + mp.mpf(0.25) * mp.sin(k + 1)
             for k in range(len(n1))]

        def b0_over_a0(z, vv):
            return mp.fsum(vv[k] / (t[n1[k]] - z) for k in range(len(n1)))

        for _ in range(100):
            bad = any(abs(b0_over_a0(t[i], v)) < mp.mpf("1e-12")
                      for i in others)
            if not bad and abs(b0_over_a0(mp.mpf(0), v)) > mp.mpf("1e-12"):
                break
            v = [x + mp.mpf("1e-3") for x in v]

        def a0(z):
            return mp.fprod(1 - z / t[i] for i in n1)

        def b0(z):
            return a0(z) * b0_over_a0(z, v)

        # one zero of B0/A0 per gap (the ratio increases from -inf to +inf)
        zeros = []
        for k in range(len(n1) - 1):
            lo, hi = t[n1[k]], t[n1[k + 1]]
            pad = (hi - lo) * mp.mpf("1e-30")
            a_, b_ = lo + pad, hi - pad
            fa, fb = b0_over_a0(a_, v), b0_over_a0(b_, v)
            if not (fa < 0 < fb or fb < 0 < fa):
                raise BisectionFailure(f"no sign change in gap {k}")
            for _ in range(mp.mp.dps * 4):
                mid = (a_ + b_) / 2
                fm = b0_over_a0(mid, v)
                if fm == 0:
                    a_ = b_ = mid
                    break
                if (fm < 0) == (fa < 0):
                    a_, fa = mid, fm
                else:
                    b_, fb = mid, fm
            zeros.append((a_ + b_) / 2)

        if sparsity != "doubling":
            raise BadParameters("only the doubling sparsity rule is provided")
        sparse_pos = []
        j = 0
        while 2 ** j <= len(zeros):
            sparse_pos.append(2 ** j)
            j += 1
        sparse = [zeros[p - 1] for p in sparse_pos]

        def s_fn(z):
            return mp.fprod(1 - z / s for s in sparse)

        p_k = [v[k] / s_fn(t[n1[k]]) for k in range(len(n1))]

        # q_n = (2 t_n)^{-n} min_k |t_n - t_{n_k}| with 1-based n
        q = {}
        for i in others:
            n_label = i + 1
            mindist = min(abs(t[i] - t[nk]) for nk in n1)
            q[i] = (2 * t[i]) ** (-n_label) * mindist
        q_total = mp.fsum(q.values())
        if not q_total < 1:
            raise BadParameters(f"sum q_n = {q_total} is not < 1")

        def gamma(z):
            return 1 + mp.fsum(q[i] / (t[i] - z) for i in others)

        def g_over_a(z):
            return b0_over_a0(z, v) / s_fn(z) * gamma(z)

        def a_full(z):
            return mp.fprod(1 - z / ti for ti in t)

        # closed-form coefficients of the partial fraction of g/A
        d = [mp.mpf(0)] * k_atoms
        for k, i in enumerate(n1):
            d[i] = -p_k[k] * (1 - mp.fsum(q[m] / (t[i] - t[m])
                                          for m in others))
        for i in others:
            d[i] = -q[i] * mp.fsum(p_k[k] / (t[n1[k]] - t[i])
                                   for k in range(len(n1)))

        # residue check: lim (z - t_n) g/A via Richardson at adaptive h.
        # Coefficients span hundreds of orders of magnitude, so the working
        # precision is raised per atom until the step h remains representable
        # next to t_n while keeping h * |regular| / |d_n| below 1e-12.
        res_err = []
        gaps = np.diff(t_np)
        for i in range(k_atoms):
            local = mp.mpf(min(gaps[max(i - 1, 0)],
                               gaps[min(i, len(gaps) - 1)]))
            reg = abs(g_over_a(t[i] + local / 4))
            ratio = reg / abs(d[i]) if reg > 0 else mp.mpf(1)
            dps_i = max(dps, 40 + int(mp.log10(max(ratio, 1) * t[i] + 10)))
            with mp.workdps(dps_i):
                h = min(local * mp.mpf("1e-3"),
                        mp.mpf("1e-12") / max(ratio, mp.mpf(1)))
                f1 = h * g_over_a(t[i] + h)
                f2 = (h / 2) * g_over_a(t[i] + h / 2)
                res = 2 * f2 - f1
                res_err.append(float(abs(res - d[i]) / abs(d[i])))

        # (arb0) as a pointwise identity off the atoms
        probes = [t[0] / 3 + mp.mpf(2) * mp.j, (t[0] + t[1]) / 2,
                  2 * t[-1] + mp.j, -t[-1] / 3 + mp.j / 2]
        exp_err = 0.0
        for z in probes:
            lhs = g_over_a(z)
            rhs = mp.fsum(d[i] / (z - t[i]) for i in range(k_atoms))
            exp_err = max(exp_err, float(abs(lhs - rhs) / abs(lhs)))

        # (arb7)-style finite identity: B0/(S A0) = sum p_k/(t_{n_k} - z)
        pf_err = 0.0
        for z in probes:
            lhs = b0_over_a0(z, v) / s_fn(z)
            rhs = mp.fsum(p_k[k] / (t[n1[k]] - z) for k in range(len(n1)))
            pf_err = max(pf_err, float(abs(lhs - rhs) / abs(lhs)))

        # sandwich constants on a grid: the exhibited C1, C2 satisfy
        # C1 * env^2 <= |g/A| |S| <= C2 / env^2 with env = |Im z|/(|z|^2+1)
        c1, c2 = mp.inf, mp.mpf(0)
        for x in np.linspace(-float(t_np[-1]), 2 * float(t_np[-1]), 9):
            for y in (0.5, 1.0, 3.0):
                z = mp.mpf(x) + mp.j * mp.mpf(y)
                m_val = abs(g_over_a(z)) * abs(s_fn(z))
                envelope = (abs(mp.im(z)) / (abs(z) ** 2 + 1))
                c1 = min(c1, m_val / envelope ** 2)
                c2 = max(c2, m_val * envelope ** 2)

        # second doubling subsequence, disjoint from N1, extra-sparse
        n2 = []
        last = -mp.inf
        for count, i in enumerate(others):
            if t[i] > 2 * last and count % 2 == 0:
                n2.append(i)
                last = t[i]
        n2 = [i for i in n2 if t[i] > 0]

        nu = [mp.mpf(0)] * k_atoms
        n1set, n2set = set(n1), set(n2)
        for i in range(k_atoms):
            if i in n1set:
                nu[i] = d[i] ** 2
            elif i in n2set:
                nu[i] = mp.mpf(1)
            else:
                nu[i] = mp.mpf(2) ** (i + 1) * d[i] ** 2

        weight_outside_n2 = float(mp.fsum(nu[i] for i in range(k_atoms)
                                          if i not in n2set))
        inv_t_n2 = np.cumsum([1.0 / float(t[i]) for i in n2]) if n2 else \
            np.array([])

        def b_full(z):
            return a_full(z) * mp.fsum(nu[i] / (t[i] - z)
                                       for i in range(k_atoms))

        def e_fn(z):
            return a_full(z) - mp.j * b_full(z)

        # decay checks (tail-monotone) for the two index families
        others_tail = [i for i in others]

        def u_others(n_exp):
            return [float(mp.mpf(2) ** (i + 1) * abs(d[i]) * t[i] ** n_exp)
                    for i in others_tail]

        def u_lac(n_exp):
            return [float(mp.mpf(2) ** (k + 1) * abs(d[n1[k]])
                          * t[n1[k]] ** n_exp) for k in range(len(n1))]

        arb1_max = _tail_monotone_max_n(u_others, range(1, 9),
                                        len(others_tail) // 2)
        arb2_max = _tail_monotone_max_n(u_lac, range(1, 9), len(n1) // 2)

        # largest index at which plain float64 still reproduces d to 1e-8
        d_float = _section4_doubles(t_np, n1, others, [float(x) for x in v],
                                    [float(s) for s in sparse])
        max_k = 0
        for i in range(k_atoms):
            if d_float[i] != 0 and abs(d_float[i] - float(d[i])) <= 1e-8 * abs(
                    float(d[i])):
                max_k = i + 1
            else:
                break

        evaluators = {"A0": a0, "B0": b0, "S": s_fn, "gamma": gamma,
                      "g_over_A": g_over_a, "A": a_full, "B": b_full,
                      "E": e_fn}
        return Section4Pipeline(
            t=t_np, n1_indices=tuple(n1), n2_indices=tuple(n2),
            v=np.array([float(x) for x in v]),
            b0_zeros=np.array([float(z) for z in zeros]),
            sparse_zero_indices=tuple(sparse_pos),
            q=[q[i] for i in others], d=d, nu=nu,
            residue_rel_errors=np.array(res_err),
            partial_fraction_rel_error=pf_err,
            expansion_rel_error=exp_err,
            sandwich_c1=float(c1), sandwich_c2=float(c2),
            q_total=float(q_total),
            arb1_max_n=arb1_max, arb2_max_n=arb2_max,
            weight_sum_outside_n2=weight_outside_n2,
            inv_t_n2_partial=inv_t_n2,
            double_precision_max_k=max_k,
            evaluators=evaluators)


def _section4_doubles(t_np, n1, others, v, sparse):
    """Float64 mirror of the d-coefficient pipeline (for the max-K report)."""
    t = t_np
    with np.errstate(all="ignore"):
        def s_fn(z):
            return np.prod([1 - z / s for s in sparse])

        p_k = [v[k] / s_fn(t[i]) for k, i in enumerate(n1)]
        q = {}
        for i in others:
            mind = min(abs(t[i] - t[nk]) for nk in n1)
            q[i] = (2 * t[i]) ** (-(i + 1)) * mind
        d = [0.0] * len(t)
        for k, i in enumerate(n1):
            d[i] = -p_k[k] * (1 - sum(q[m] / (t[i] - t[m]) for m in others))
        for i in others:
            d[i] = -q[i] * sum(p_k[k] / (t[n1[k]] - t[i])
                               for k in range(len(n1)))
    return d


# ---------------------------------------------------------------------------
# Gap hypotheses for the synthesis statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    power_gap_ok: bool
    power_gap_worst_margin: float    # min over n of C|s_{n+1}-s_n| - |s_n|^N
    smallness_ok: bool               # |s_{n+1}-s_n| = o(|s_n|) trend
    gap_ratio_first: float
    gap_ratio_last: float
    weight_floor_ok: bool | None     # nu_n >= c (|t_n|+1)^{-M}, if supplied
    ok: bool

    def __bool__(self):
        return self.ok


def synthesis_gap_check(s_seq, big_c, n_exp, nu=None, c_floor=None,
                        m_exp=None):
    """Check |s_n|^N <= C |s_{n+1} - s_n| = o(|s_n|) over a finite range.

    The o(.) condition is tested as a trend: the maximal gap ratio over the
    last quarter of the range must fall below half of that over the first
    quarter.  Optionally checks the weight floor nu_n >= c (|t_n|+1)^{-M}.
    """
    if n_exp <= 0:
        raise BadParameters("the gap exponent must be positive")
    s = np.asarray(s_seq, dtype=float)
    if s.size < 8:
        raise BadParameters("need at least 8 sequence points")
    gaps = np.abs(np.diff(s))
    power_margin = float(np.min(big_c * gaps - np.abs(s[:-1]) ** n_exp))
    power_ok = bool(power_margin >= 0.0)
    ratios = gaps / np.abs(s[:-1])
    quarter = max(2, ratios.size // 4)
    first = float(np.max(ratios[:quarter]))
    last = float(np.max(ratios[-quarter:]))
    small_ok = bool(last <= 0.5 * first)
    floor_ok = None
    if nu is not None:
        if c_floor is None or m_exp is None:
            raise BadParameters("weight floor needs c_floor and m_exp")
        nu = np.asarray(nu, dtype=float)
        t_abs = np.abs(1.0 / s)
        floor_ok = bool(np.all(nu >= c_floor * (t_abs + 1.0) ** (-m_exp)))
    ok = power_ok and small_ok and (floor_ok is not False)
    return GapReport(power_ok, power_margin, small_ok, first, last,
                     floor_ok, ok)
