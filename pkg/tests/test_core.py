"""Distribution container and ratio-spectrum tests."""

import json
import math

import numpy as np
import pytest

from honeymetrics import (
    DomainError,
    PasswordModel,
    RatioSpectrum,
    SpaceMismatchError,
    build_ratio_spectrum,
    linear_example,
    uniform_model,
    verify_ratio_identity,
    zipf_model,
)

MASS_TOL = 1e-9
IDENTITY_TOL = 1e-12


def spectrum_of(p, q):
    return build_ratio_spectrum(PasswordModel(len(p), p), PasswordModel(len(q), q))


class TestPasswordModel:
    def test_rejects_bad_mass(self):
        with pytest.raises(DomainError):
            PasswordModel(2, [0.5, 0.6])
        with pytest.raises(DomainError):
            PasswordModel(2, [1.5, -0.5])
        with pytest.raises(DomainError):
            PasswordModel(0, [])

    def test_dense_lookup(self):
        m = PasswordModel(3, [0.2, 0.3, 0.5])
        assert m.pmf(2) == 0.5
        with pytest.raises(DomainError):
            m.pmf(3)

    def test_sparse_storage(self):
        m = PasswordModel(10 ** 9, {0: 0.25, 7: 0.75})
        assert not m.is_dense
        assert m.pmf(7) == 0.75
        assert m.pmf(12345) == 0.0
        idx, probs = m.nonzero_items()
        assert idx.tolist() == [0, 7] and probs.sum() == 1.0

    def test_pmf_array_immutable(self):
        m = uniform_model(4)
        with pytest.raises(ValueError):
            m.pmf_array()[0] = 1.0


class TestBuildRatioSpectrum:
    def test_identical_uniforms_single_group(self):
        s = spectrum_of([0.25] * 4, [0.25] * 4)
        assert list(s.groups()) == [(1.0, 1.0, 1.0)]
        assert s.M == 1.0 and s.b == 0.0

    def test_hand_enumerated_two_groups(self):
        # ratios: (0.5/0.25, 0.5/0.25, 0, 0) -> groups at 0 and 2
        s = spectrum_of([0.5, 0.5, 0, 0], [0.25] * 4)
        assert list(s.groups()) == [(0.0, 0.0, 0.5), (2.0, 1.0, 0.5)]
        assert s.M == 2.0 and s.b == 0.0

    def test_disjoint_supports_give_b_one(self):
        s = spectrum_of([1.0, 0, 0, 0], [0, 1 / 3, 1 / 3, 1 / 3])
        groups = list(s.groups())
        assert groups[0] == (0.0, 0.0, 1.0)
        assert groups[1][0] == math.inf and groups[1][1] == 1.0 and groups[1][2] == 0.0
        assert s.b == 1.0

    def test_space_mismatch_rejected(self):
        with pytest.raises(SpaceMismatchError):
            build_ratio_spectrum(uniform_model(4), uniform_model(5))

    def test_mass_conservation_random_pairs(self):
        # Invariant: finite p-mass + b = 1 and q-mass = 1 for any pair.
        rng = np.random.default_rng(2024)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            p = rng.random(n) * (rng.random(n) < 0.8)
            q = rng.random(n) * (rng.random(n) < 0.8)
            if p.sum() == 0 or q.sum() == 0:
                continue
            s = spectrum_of(p / p.sum(), q / q.sum())
            assert abs(s.p_mass.sum() + s.b - 1.0) < MASS_TOL
            assert abs(s.q_mass.sum() - 1.0) < MASS_TOL
            assert np.all(np.diff(s.ratios) > 0)

    def test_sparse_matches_dense(self):
        p = [0.5, 0.0, 0.3, 0.2]
        q = [0.25, 0.25, 0.5, 0.0]
        dense = spectrum_of(p, q)
        sparse = build_ratio_spectrum(
            PasswordModel(4, {i: v for i, v in enumerate(p) if v}),
            PasswordModel(4, {i: v for i, v in enumerate(q) if v}),
        )
        assert np.allclose(dense.ratios, sparse.ratios)
        assert np.allclose(dense.p_mass, sparse.p_mass)
        assert dense.b == sparse.b


class TestCdf:
    def test_single_atom(self):
        s = spectrum_of([0.25] * 4, [0.25] * 4)
        assert s.cdf_G(1.0) == 1.0
        assert s.cdf_G(1.0, strict=True) == 0.0

    def test_hand_spectrum_strict(self):
        s = spectrum_of([0.5, 0.5, 0, 0], [0.25] * 4)
        assert s.cdf_G(2.0, strict=True) == 0.5
        assert s.cdf_G(2.0) == 1.0

    def test_cdf_at_M_is_one(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = rng.random(10)
            q = rng.random(10)
            s = spectrum_of(p / p.sum(), q / q.sum())
            assert abs(s.cdf_G(s.M) - 1.0) < MASS_TOL

    def test_monotone_and_strict_dominated(self):
        s = spectrum_of([0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1])
        xs = np.linspace(0, s.M * 1.1, 200)
        vals = s.cdf_G(xs)
        assert np.all(np.diff(vals) >= 0)
        assert np.all(s.cdf_G(xs, strict=True) <= vals)

    def test_cdf_F_complements_b(self):
        s = spectrum_of([0.5, 0.3, 0.2, 0.0], [0.0, 0.25, 0.25, 0.5])
        assert abs(s.cdf_F(s.M) - (1.0 - s.b)) < MASS_TOL


class TestRatioIdentity:
    def test_uniform_exact(self):
        s = spectrum_of([0.25] * 4, [0.25] * 4)
        assert verify_ratio_identity(s).max_rel_deviation == 0.0

    def test_zipf_vs_uniform_tiny_deviation(self):
        s = build_ratio_spectrum(zipf_model(0.9, 1000), uniform_model(1000))
        assert verify_ratio_identity(s).max_rel_deviation < IDENTITY_TOL

    def test_corrupted_fixture_reports_positive(self):
        s = spectrum_of([0.5, 0.5, 0, 0], [0.25] * 4)
        bad = RatioSpectrum(ratios=s.ratios, p_mass=np.array([0.2, 0.8]),
                            q_mass=s.q_mass, b=s.b)
        assert verify_ratio_identity(bad).max_rel_deviation > 0.1

    def test_group_identity_random_pairs(self):
        rng = np.random.default_rng(99)
        for _ in range(30):
            p = rng.random(25)
            q = rng.random(25)
            s = spectrum_of(p / p.sum(), q / q.sum())
            assert verify_ratio_identity(s).max_rel_deviation < IDENTITY_TOL


class TestSerialization:
    def test_round_trip_with_infinity_group(self):
        s = spectrum_of([0.5, 0.3, 0.2, 0.0], [0.0, 0.25, 0.25, 0.5])
        text = s.to_json()
        assert '"inf"' in text
        back = RatioSpectrum.from_json(text)
        assert np.allclose(back.ratios, s.ratios)
        assert back.b == s.b and back.M == s.M

    def test_json_shape(self):
        s = spectrum_of([0.25] * 4, [0.25] * 4)
        data = json.loads(s.to_json())
        assert set(data) == {"groups", "M", "b"}
        assert data["groups"] == [[1.0, 1.0, 1.0]]


class TestContinuousRatioModel:
    def test_linear_example_endpoints(self):
        m = linear_example()
        assert m.G(0.5) == 0.0
        assert m.G(1.5) == 1.0
        assert m.M == 1.5 and m.b == 0.0

    def test_integral_identity(self):
        # integral of G over [0, M] must equal M - 1 + b
        from scipy.integrate import quad
        m = linear_example()
        val, _ = quad(m.G, 0.0, m.M, epsabs=1e-12)
        assert abs(val - (m.M - 1.0 + m.b)) < 1e-10

    def test_inverse_round_trip(self):
        m = linear_example()
        for x in np.linspace(0.5, 1.5, 11):
            assert abs(m.G_inv(m.G(x)) - x) < 1e-12

    def test_bisection_inverse_fallback(self):
        from honeymetrics import ContinuousRatioModel
        m = ContinuousRatioModel(M=1.5, b=0.0, G=lambda x: min(1.0, max(0.0, x - 0.5)))
        for u in (0.0, 0.25, 0.5, 0.99, 1.0):
            assert abs(m.inverse(u) - (u + 0.5)) < 1e-12

    def test_rejects_bad_cdf(self):
        from honeymetrics import ContinuousRatioModel
        with pytest.raises(DomainError):
            ContinuousRatioModel(M=1.0, b=0.0, G=lambda x: 0.5 * x)  # G(M) != 1
