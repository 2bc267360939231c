import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from stochsense import distributions as dists
from stochsense import protocols, qsim

angle_lists = st.lists(st.floats(-7, 7, allow_nan=False), min_size=3, max_size=3)


class TestPerShot:
    def test_product_zero(self):
        p = protocols.per_shot_probs(protocols.product_protocol(2), [0.0, 0.0])
        assert p[3] == pytest.approx(1.0)

    def test_ghz_quarter_turn(self):
        # the default readout shift already turns the cosine fringe into (1 + sin)/2
        proto = protocols.ghz_protocol(3)
        assert protocols.per_shot_probs(proto, [np.pi / 2, 0, 0])[1] == pytest.approx(1.0)
        bare = protocols.ghz_protocol(3, decode_offset=0.0)
        assert protocols.per_shot_probs(bare, [0.0, 0, 0])[1] == pytest.approx(1.0)

    def test_ghz_offset_gives_sine(self):
        proto = protocols.ghz_protocol(4)
        theta = np.array([0.1, 0.2, -0.05, 0.3])
        assert protocols.per_shot_probs(proto, theta)[1] == pytest.approx(0.5 * (1 + np.sin(theta.sum())))

    def test_bell_half_turn(self):
        proto = protocols.bell_protocol(nu=(0.0, 0.0))
        assert protocols.per_shot_probs(proto, [np.pi, 0.0])[1] == pytest.approx(0.0, abs=1e-15)

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            protocols.per_shot_probs(protocols.ghz_protocol(3), [0.0, 0.0])
        with pytest.raises(ValueError):
            protocols.Protocol("bell", 3)
        with pytest.raises(ValueError):
            protocols.Protocol("ramsey", 2)

    @pytest.mark.parametrize("proto", [
        protocols.product_protocol(3, [0.3, -1.0, 2.0]),
        protocols.ghz_protocol(3, [0.1, 0.0, -0.4]),
        protocols.ghz_protocol(3, decode_offset=0.0),
        protocols.product_protocol(3, [0.3, -1.0, 2.0], phase_convention="integer"),
        protocols.ghz_protocol(3, phase_convention="integer"),
    ], ids=["product", "ghz", "ghz-no-offset", "product-int", "ghz-int"])
    @settings(max_examples=30, deadline=None)
    @given(theta=angle_lists)
    def test_closed_form_matches_dense(self, proto, theta):
        assert np.allclose(protocols.per_shot_probs(proto, theta),
                           protocols.dense_per_shot_probs(proto, theta), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-7, 7), min_size=2, max_size=2), st.floats(-3, 3), st.floats(-3, 3))
    def test_bell_matches_dense_and_rejects_common_mode(self, theta, nu2, shift):
        proto = protocols.bell_protocol(nu=(0.0, nu2))
        p = protocols.per_shot_probs(proto, theta)
        assert np.allclose(p, protocols.dense_per_shot_probs(proto, theta), atol=1e-12)
        assert np.allclose(p, protocols.per_shot_probs(proto, np.asarray(theta) + shift), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(angle_lists)
    def test_sums_to_one_and_factorizes(self, theta):
        proto = protocols.product_protocol(3, [0.2, 0.0, -0.7])
        p = protocols.per_shot_probs(proto, theta)
        assert abs(p.sum() - 1) < 1e-12
        marg = [qsim.marginalize(p, [j]) for j in range(3)]
        joint = qsim.kron_all(marg)
        assert np.allclose(joint, p, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(angle_lists, st.permutations(range(3)))
    def test_ghz_permutation_invariant(self, theta, perm):
        proto = protocols.ghz_protocol(3)
        theta = np.asarray(theta)
        assert np.allclose(protocols.per_shot_probs(proto, theta),
                           protocols.per_shot_probs(proto, theta[list(perm)]), atol=1e-12)

    def test_integer_convention_is_negated_halved(self, rng):
        theta = rng.normal(size=(50, 3))
        a = protocols.per_shot_probs(protocols.product_protocol(3, phase_convention="integer"), theta)
        b = protocols.per_shot_probs(protocols.product_protocol(3), -theta)
        assert np.allclose(a, b)

    def test_sequential_single_qubit_equivalence(self, rng):
        # one qubit sensing theta_1..theta_n in turn accumulates sum(theta), like the GHZ readout
        theta = dists.ConstrainedUniform(5, 0.3).sample(rng, 1000)
        ghz = protocols.per_shot_probs(protocols.ghz_protocol(5), theta)
        single = protocols.per_shot_probs(protocols.product_protocol(1, [-np.pi / 2]), theta.sum(axis=1, keepdims=True))
        assert np.allclose(ghz, single, atol=1e-12)


class TestAveraging:
    def test_point_mass_one_batch(self, rng):
        proto = protocols.product_protocol(2, [0.1, 0.5])
        theta = np.array([0.3, -0.2])
        p = protocols.averaged_probs(proto, dists.PointMass(theta), rng)
        assert np.allclose(p, protocols.per_shot_probs(proto, theta), atol=1e-15)

    def test_uniform_single_qubit(self, rng):
        line = dists.PhaseLine([0.0], [1.0])
        p = protocols.averaged_probs(protocols.product_protocol(1), line, rng, convergence_ratio=200)
        assert p[1] == pytest.approx(0.5, abs=0.01)

    def test_bell_gaussian(self, rng):
        mean, s2, corr = [0.2, -0.1], 1.2, 1.1
        g = dists.Gaussian.correlated(mean, s2, corr)
        p, se = protocols.averaged_probs(protocols.bell_protocol(), g, rng, return_stderr=True)
        assert abs(p[1] - protocols.gaussian_bell_prob(mean, s2, corr)) < 4 * se[1]

    def test_product_gaussian(self, rng):
        mean, s2, corr = [0.4, 0.9], 0.8, -0.3
        g = dists.Gaussian.correlated(mean, s2, corr)
        nu = (0.2, -1.0)
        p, se = protocols.averaged_probs(protocols.product_protocol(2, nu), g, rng, return_stderr=True)
        exact = protocols.gaussian_product_probs(mean, s2, corr, nu)
        assert np.all(np.abs(p - exact) < 4 * se)

    def test_exact_matches_closed_forms(self):
        mean, s2, corr = [0.4, 0.9], 0.8, -0.3
        g = dists.Gaussian.correlated(mean, s2, corr)
        nu = (0.2, -1.0)
        assert np.allclose(protocols.exact_averaged_probs(protocols.product_protocol(2, nu), g),
                           protocols.gaussian_product_probs(mean, s2, corr, nu), atol=1e-12)
        assert protocols.exact_averaged_probs(protocols.bell_protocol(nu), g)[1] == pytest.approx(
            protocols.gaussian_bell_prob(mean, s2, corr, nu), abs=1e-12)

    def test_local_marginals(self):
        mean, s2, corr, nu = [0.4, 0.9], 0.8, -0.3, (0.2, -1.0)
        joint = protocols.gaussian_product_probs(mean, s2, corr, nu)
        marg = protocols.gaussian_local_marginals(mean, s2, nu)
        assert marg[0] == pytest.approx(joint[2] + joint[3])
        assert marg[1] == pytest.approx(joint[1] + joint[3])

    def test_two_qubit_constrained_anchor(self):
        # quadrature oracle over the free parameter: p11 = 1/4 + sin(C)/8
        c = 0.3
        _, nu = protocols.ghz_offset_and_product_offsets(2)
        proto = protocols.product_protocol(2, nu)

        def integrand(t):
            return protocols.per_shot_probs(proto, [t, c - t])[3]

        p11 = quad(integrand, 0, 2 * np.pi, epsabs=1e-13)[0] / (2 * np.pi)
        assert p11 == pytest.approx(0.25 + np.sin(c) / 8, abs=1e-12)
        exact = protocols.exact_averaged_probs(proto, dists.ConstrainedUniform(2, c))
        assert exact[3] == pytest.approx(p11, abs=1e-12)

    def test_non_convergence_raises(self, rng):
        g = dists.Gaussian.correlated([0, 0], 1.0, 0.0)
        with pytest.raises(protocols.ConvergenceError):
            protocols.averaged_probs(protocols.product_protocol(2), g, rng, convergence_ratio=1e9,
                                     batch=100, max_batches=3)


class TestOffsets:
    @pytest.mark.parametrize("n,extra", [(2, True), (3, False), (4, True), (5, False)])
    def test_parity_rule(self, n, extra):
        decode, nu = protocols.ghz_offset_and_product_offsets(n)
        assert decode == pytest.approx(np.pi / 2)
        assert np.allclose(nu[:-1], -np.pi / 2)
        assert nu[-1] == pytest.approx(0.0 if extra else -np.pi / 2)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_chosen_offsets_are_sensitive(self, n):
        _, nu = protocols.ghz_offset_and_product_offsets(n)
        assert protocols.sensitivity_at_zero(protocols.product_protocol(n, nu), n) > 1e-3


class TestShots:
    def test_point_mass_all_in_one_outcome(self, rng):
        proto = protocols.product_protocol(2)
        counts = protocols.simulate_shots(proto, dists.PointMass([0.0, 0.0]), 500, rng)
        assert counts.tolist() == [0, 0, 0, 500]

    def test_counts_sum(self, rng):
        g = dists.Gaussian.correlated([0, 0], 1.0, 0.5)
        counts = protocols.simulate_shots(protocols.product_protocol(2), g, 37, rng, n_runs=20)
        assert counts.shape == (20, 4)
        assert np.all(counts.sum(axis=1) == 37)
        assert counts.min() >= 0

    def test_mean_frequencies(self, rng):
        g = dists.Gaussian.correlated([0.3, -0.2], 1.0, 0.7)
        proto = protocols.product_protocol(2, (0.0, np.pi / 2))
        x = protocols.simulate_shots(proto, g, 100, rng, n_runs=5000) / 100
        p = protocols.gaussian_product_probs([0.3, -0.2], 1.0, 0.7, (0.0, np.pi / 2))
        se = np.sqrt(p * (1 - p) / 100 / 5000)
        assert np.all(np.abs(x.mean(axis=0) - p) < 3 * se)

    def test_rejects_zero_shots(self, rng):
        with pytest.raises(ValueError):
            protocols.simulate_shots(protocols.product_protocol(1), dists.PointMass([0.0]), 0, rng)


class TestEstimators:
    S, SIGMA = 50, 1.5

    def _moments(self, name, c):
        s2 = self.SIGMA ** 2
        a, b = dists.gaussian_class_pair(self.SIGMA, 0.99 * s2, c)
        return [protocols.estimator_moments(name, d.mean, s2, 0.99 * s2, self.S) for d in (a, b)]

    @pytest.mark.parametrize("name", ["entangled", "unentangled-2q", "unentangled-1q"])
    def test_small_angle_variance(self, name):
        for m in self._moments(name, 0.02):
            assert m.var * self.S == pytest.approx(0.25, rel=0.15)

    def test_moments_match_simulation(self, rng):
        s2 = self.SIGMA ** 2
        g = dists.Gaussian.correlated([0.125, -0.125], s2, 0.99 * s2)
        x = protocols.simulate_shots(protocols.product_protocol(2, (-np.pi / 2, -np.pi / 2)), g, self.S, rng,
                                     n_runs=20000) / self.S
        y = x[:, 2] - x[:, 1]
        m = protocols.estimator_moments("unentangled-1q", g.mean, s2, 0.99 * s2, self.S)
        assert abs(y.mean() - m.mean) < 4 * np.sqrt(m.var / len(y))
        assert y.var() == pytest.approx(m.var, rel=0.05)

    def test_unknown(self):
        with pytest.raises(ValueError):
            protocols.estimator_moments("parity", [0, 0], 1.0, 0.5, 10)


class TestMulticopy:
    @pytest.mark.parametrize("phi,expected", [(0.0, 0.5), (np.pi / 4, 1.0), (np.pi / 2, 0.5), (3 * np.pi / 4, 0.0)])
    def test_values(self, phi, expected):
        for p in protocols.multicopy_protocols(phi).values():
            assert p == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, np.pi))
    def test_formula(self, phi):
        for p in protocols.multicopy_protocols(phi).values():
            assert abs(p - 0.5 * (1 + np.sin(2 * phi))) < 1e-12

    def test_theta_map(self):
        assert np.allclose(protocols.multicopy_theta(0.3, 0.5), [0.6, 0.8])
