"""Growth envelopes, integrability, synthesis defects, window counts."""

import numpy as np
import pytest

from perturblab.errors import DivergentNearRealZero
from perturblab.model import build_model
from perturblab.engine import eigensystem, phi_zeros
from perturblab.diagnostics import (enumerate_partitions, growth_profile,
                                    integral_test, macaev_check, mass_detect,
                                    synthesis_defect, volterra_window_check)

from conftest import make_data, random_instance


def eigen_count_below(g, lam):
    """Eigenvalues of Hermitian g below lam, by pivot signs of g - lam I.

    Plain Gaussian elimination: the pivots are ratios of leading principal
    minors (determinants), so their negative count is the inertia below lam.
    Independent of any SVD/eig library routine.
    """
    a = (g - lam * np.eye(g.shape[0])).astype(complex).copy()
    n = a.shape[0]
    negatives = 0
    with np.errstate(all="ignore"):  # a grazed eigenvalue inflates one pivot
        for k in range(n):
            piv = a[k, k].real
            if piv == 0.0:
                piv = 1e-300  # sign resolves at the next bisection step
            if piv < 0:
                negatives += 1
            rows = np.arange(k + 1, n)
            if rows.size:
                factors = np.nan_to_num(a[rows, k] / piv)
                a[np.ix_(rows, rows)] -= np.outer(factors, a[k, rows])
    return negatives


def sigma_min_bruteforce(eigsys, partition):
    """Smallest singular value via determinant-based inertia bisection."""
    # rebuild the normalized column matrix the same way the public op does
    mu = eigsys.weights
    wsqrt = np.sqrt(mu)
    cols = [eigsys.model_vectors[:, j] for j in partition[0]] + \
           [eigsys.left_vectors[:, j] for j in partition[1]]
    x = np.stack(cols, axis=1) * wsqrt[:, None]
    x = x / np.linalg.norm(x, axis=0)
    g = x.conj().T @ x
    lo, hi = 0.0, float(np.trace(g).real) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if eigen_count_below(g, mid) >= 1:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-17 * (1.0 + hi):
            break
    return float(np.sqrt(max(0.5 * (lo + hi), 0.0)))


class TestGrowth:
    def test_generalized_weak_envelope_positive(self, rng):
        for _ in range(10):
            data = random_instance(rng, 6)
            gp = growth_profile(build_model(data))
            assert gp.lower_envelope_c > 0
            assert gp.exact_exponent == 0
            assert abs(gp.fitted_exponent) < 0.05
            assert gp.top_decade_ratio < 1.2

    def test_positive_type_beta_limit(self, rng):
        # a = b: y Im beta(iy) -> sum a_n conj(b_n) mu_n > 0
        data = random_instance(rng, 5, real_type=True)
        data = make_data(data.t, data.mu, data.b, data.b, 2.0)
        m = build_model(data)
        y = 1e6
        expected = float(np.sum(np.abs(data.b) ** 2 * data.mu))
        assert (y * m.beta(1j * y)).imag == pytest.approx(expected, rel=1e-4)
        gp = growth_profile(m)
        assert gp.lower_envelope_c > 0

    def test_degenerate_family_envelope_collapses(self, rng):
        # kappa = pairing sum and sum of residues zero: numerator degree
        # drops by two, so y |phi(iy)| -> 0 like 1/y
        t = np.array([1.0, 2.0, 5.0, 7.0])
        w = np.array([1.0, -2.0, 3.0, -2.0])
        data = make_data(t, np.ones(4), w, np.ones(4),
                         float(np.sum(w / t)))
        m = build_model(data, strict=False)
        gp = growth_profile(m)
        assert gp.exact_exponent <= -2
        assert gp.fitted_exponent < -1.9
        left = 10.0 * abs(m.phi(10j))
        assert gp.lower_envelope_c <= 1e-2 * left

    def test_fitted_matches_exact(self, rng):
        data = random_instance(rng, 5)
        gp = growth_profile(build_model(data))
        assert gp.fitted_exponent == pytest.approx(gp.exact_exponent,
                                                   abs=0.05)


class TestIntegral:
    def test_finite_value(self, two_atom):
        rep = integral_test(build_model(two_atom), 2.0, 1.0, 1.0)
        assert rep.convergent
        assert rep.tail_estimate <= 1e-6 * rep.value
        assert rep.value > 0

    def test_real_zero_divergence(self, two_atom):
        with pytest.raises(DivergentNearRealZero):
            integral_test(build_model(two_atom), 2.0, 1.0, 0.0)

    def test_monotone_in_weight(self, two_atom):
        m = build_model(two_atom)
        v2 = integral_test(m, 2.0, 1.0, 1.0).value
        v4 = integral_test(m, 4.0, 1.0, 1.0).value
        assert v4 <= v2


class TestMacaev:
    def test_two_atom(self, two_atom):
        rep = macaev_check(two_atom)
        assert rep.matrix[0, 0] == pytest.approx(1.0)
        assert rep.invertible

    def test_equality_not_invertible(self):
        data = make_data([1.0, 2.0], [1, 1], [1, 1], [1, 1], 1.5)
        rep = macaev_check(data)
        assert not rep.invertible
        assert rep.smallest_singular < 1e-12

    def test_adjoint_same_singular_value(self, rng):
        data = random_instance(rng, 6)
        r1 = macaev_check(data)
        r2 = macaev_check(data.adjoint())
        assert r1.smallest_singular == pytest.approx(r2.smallest_singular,
                                                     rel=1e-12)

    def test_bounded_picture(self, two_atom):
        rep = macaev_check(two_atom, picture="bounded")
        assert rep.matrix[0, 0] == pytest.approx(1.0)  # I + omega, omega = 0


class TestMass:
    def test_canonical_massy_zeta_is_one(self, two_atom):
        m = build_model(two_atom)  # delta canonical: Theta(inf) = 1
        rep = mass_detect(m, 1.0)
        assert rep.has_mass
        s0 = float(np.sum(two_atom.nu))
        assert rep.p_est == pytest.approx(s0)
        assert rep.herglotz_p == pytest.approx(1.0 / s0)

    def test_zero_delta_one_atom(self, one_atom):
        m = build_model(one_atom, delta=0.0)
        rep = mass_detect(m, -1j)
        assert rep.has_mass
        assert rep.p_est == pytest.approx(0.5)
        assert rep.herglotz_p == pytest.approx(2.0)

    def test_minus_one_never_massy(self, rng):
        data = random_instance(rng, 5)
        rep = mass_detect(build_model(data), -1.0)
        assert not rep.has_mass
        assert np.all(np.diff(rep.grid_values[-5:]) > 0)  # linear growth

    def test_random_zeta_no_mass(self, rng):
        data = random_instance(rng, 4)
        rep = mass_detect(build_model(data), np.exp(2.1j))
        assert not rep.has_mass


class TestSynthesisDefect:
    def test_two_atom_partitions(self, two_atom):
        es = eigensystem(two_atom)
        for part in [((0, 1), ()), ((0,), (1,)), ((1,), (0,)), ((), (0, 1))]:
            sd = synthesis_defect(es, part)
            assert 0.0 < sd.sigma_min <= 1.0 + 1e-12

    def test_selfadjoint_partition_independent(self, rng):
        data = random_instance(rng, 5, real_type=True)
        data = make_data(data.t, data.mu, data.b, data.b, 1.3)
        es = eigensystem(data)
        vals = []
        for mask in range(2 ** 5):
            j1 = tuple(j for j in range(5) if not (mask >> j) & 1)
            j2 = tuple(j for j in range(5) if (mask >> j) & 1)
            vals.append(synthesis_defect(es, (j1, j2)).sigma_min)
        assert np.max(vals) - np.min(vals) < 1e-10
        assert vals[0] == pytest.approx(1.0, abs=1e-10)

    def test_brute_force_oracle_agrees(self, rng):
        for _ in range(6):
            data = random_instance(rng, int(rng.integers(2, 7)))
            es = eigensystem(data)
            n = es.eigenvalues.size
            for mask in range(2 ** n):
                j1 = tuple(j for j in range(n) if not (mask >> j) & 1)
                j2 = tuple(j for j in range(n) if (mask >> j) & 1)
                svd_val = synthesis_defect(es, (j1, j2)).sigma_min
                brute = sigma_min_bruteforce(es, (j1, j2))
                assert abs(svd_val - brute) <= 1e-10

    def test_enumerate_worst(self, rng):
        data = random_instance(rng, 4)
        es = eigensystem(data)
        worst, checked = enumerate_partitions(es)
        assert checked == 16
        best_seen = min(
            synthesis_defect(es, (tuple(j for j in range(4)
                                        if not (m >> j) & 1),
                                  tuple(j for j in range(4)
                                        if (m >> j) & 1))).sigma_min
            for m in range(16))
        assert worst.sigma_min == pytest.approx(best_seen, rel=1e-12)

    def test_invariance_under_relabeling_and_phases(self, rng):
        data = random_instance(rng, 4)
        es = eigensystem(data)
        sd = synthesis_defect(es, ((0, 2), (1, 3)))
        # permuting labels inside each side leaves sigma_min unchanged
        sd_perm = synthesis_defect(es, ((2, 0), (3, 1)))
        assert sd.sigma_min == pytest.approx(sd_perm.sigma_min, rel=1e-12)
        # multiplying an eigenvector by a unimodular constant does nothing
        es.model_vectors[:, 0] *= np.exp(0.73j)
        sd_phase = synthesis_defect(es, ((0, 2), (1, 3)))
        assert sd.sigma_min == pytest.approx(sd_phase.sigma_min, rel=1e-12)


class TestWindow:
    def test_two_atom_examples(self, two_atom):
        m = build_model(two_atom)
        assert volterra_window_check(m, (0.5, 3.0, 0.0, 1.0)).count == 1
        assert volterra_window_check(m, (3.5, 5.0, 0.0, 1.0)).count == 0
        assert volterra_window_check(m, (-1.0, 3.0, 0.0, 2.0)).count == 2

    @pytest.mark.parametrize("n", [8, 30, 100])
    def test_count_matches_companion_roots(self, rng, n):
        data = random_instance(rng, n)
        m = build_model(data)
        zeros = phi_zeros(m).zeros
        x1 = float(np.min(zeros.real)) - 1.0
        x2 = float(np.max(zeros.real)) + 1.0
        y2 = float(max(np.max(zeros.imag), 0.0)) + 1.0
        rep = volterra_window_check(m, (x1, x2, 0.0, y2))
        inside = int(np.sum((zeros.real > x1) & (zeros.real < x2)
                            & (zeros.imag > -rep.nudge)
                            & (zeros.imag < y2)))
        assert rep.count == inside


class TestErrorPaths:
    def test_contour_through_zero_not_certified(self, two_atom):
        from perturblab.errors import ContourTooClose
        m = build_model(two_atom)
        # force the bottom edge exactly through the real zero 1 + sqrt(2)
        with pytest.raises(ContourTooClose):
            volterra_window_check(m, (1 + np.sqrt(2) - 1.0,
                                      1 + np.sqrt(2) + 1.0, 0.0, 1.0),
                                  nudge=0.0, max_refine=3)

    def test_mass_present_blocks_transform(self, two_atom):
        from perturblab.errors import MassPresent
        from perturblab.model import ClarkMeasure, clark_transform
        m = build_model(two_atom)
        cm = ClarkMeasure(zeta=1.0, atoms=np.array([0.5]),
                          weights=np.array([1.0]), p=0.3, q=0.0)
        with pytest.raises(MassPresent):
            clark_transform(cm, m, [1.0])

    def test_herglotz_mass_matches_direct_limit(self, two_atom):
        # p = lim (zeta + Theta(iy)) / ((zeta - Theta(iy)) y), independent
        # of the expansion used inside mass_detect
        m = build_model(two_atom)
        zeta = m.theta_infinity
        rep = mass_detect(m, zeta)
        y = 1e8
        g = (zeta + m.theta(1j * y)) / (zeta - m.theta(1j * y))
        assert (g / y).real == pytest.approx(rep.herglotz_p, rel=1e-6)


class TestStrongRealType:
    def test_real_spectrum_detected(self, two_atom):
        from perturblab.engine import strong_real_type
        assert strong_real_type(two_atom)  # spectrum {1 +- sqrt 2} real

    def test_complex_pair_rejected(self):
        from perturblab.engine import strong_real_type
        from conftest import make_data
        # real-type data with a complex-conjugate eigenvalue pair
        data = make_data([1.0, 2.0], [1, 1], [1, -1], [1, 1], 1.0)
        if strong_real_type(data):
            pytest.skip("instance happens to have a real spectrum")
        assert not strong_real_type(data)


class TestInnerMargin:
    def test_exhibited_constant_positive(self, two_atom):
        gp = growth_profile(build_model(two_atom))
        assert gp.inner_margin_c > 0
