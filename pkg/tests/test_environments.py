import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duelbench import (
    check_fixed_gap,
    env_from_file,
    fixed_gap_env,
    lower_bound_instance,
    sample_feedback,
    shifted_scores,
    stationary_env,
    tuned_epsilon,
    validate_matrix,
)
from duelbench.environments import (
    PerturbedStream,
    SequenceStream,
    environment_from_spec,
    fixed_gap_base,
    load_sequence,
    save_sequence,
)
from duelbench.errors import (
    AsymmetryError,
    GapViolation,
    HorizonError,
    ParamError,
    ParseError,
    ValidationError,
)
from duelbench.preference import borda_scores


class TestStationary:
    def test_uniform(self):
        m = validate_matrix(np.full((3, 3), 0.5))
        env = stationary_env(m, 10)
        for t in range(1, 11):
            assert env.matrix_at(t) == m

    def test_endpoints(self, i0_k4):
        env = stationary_env(i0_k4, 100)
        assert env.matrix_at(1) == i0_k4 == env.matrix_at(100)

    def test_past_horizon(self, i0_k4):
        env = stationary_env(i0_k4, 100)
        with pytest.raises(HorizonError):
            env.matrix_at(101)
        with pytest.raises(HorizonError):
            env.matrix_at(0)

    def test_block_shapes(self, i0_k4):
        P, B, S = stationary_env(i0_k4, 50).block(10, 20)
        assert P.shape == (20, 4, 4) and B.shape == (20, 4) and S.shape == (20, 4)
        np.testing.assert_array_equal(B[5], borda_scores(i0_k4).values)

    def test_zero_horizon(self, i0_k4):
        with pytest.raises(ParamError):
            stationary_env(i0_k4, 0)


class TestLowerBound:
    @pytest.mark.parametrize("eps", [0.01, 0.05, 0.1])
    def test_unperturbed(self, eps):
        s = shifted_scores(lower_bound_instance(4, eps, 0)).values
        np.testing.assert_allclose(s, [0.7, 0.7, 0.3, 0.3], atol=1e-12)

    def test_perturbed_best(self):
        s = shifted_scores(lower_bound_instance(4, 0.05, 1)).values
        assert s[0] == pytest.approx(0.725, abs=1e-12)
        assert s[1] == pytest.approx(0.7, abs=1e-12)
        np.testing.assert_allclose(s[2:], 0.2875, atol=1e-12)

    @pytest.mark.parametrize("K,m", [(6, 2), (8, 4), (10, 1)])
    def test_hidden_item_wins(self, K, m):
        b = borda_scores(lower_bound_instance(K, 0.05, m)).values
        assert int(np.argmax(b)) == m - 1
        assert np.sum(b == b.max()) == 1

    @pytest.mark.parametrize("K,eps,m", [(3, 0.05, 0), (5, 0.05, 1), (2, 0.05, 0),
                                         (4, 0.0, 1), (4, 0.2, 1), (4, 0.05, 3)])
    def test_rejects(self, K, eps, m):
        with pytest.raises(ParamError):
            lower_bound_instance(K, eps, m)


class TestTunedEpsilon:
    def test_clamped_equal(self):
        assert tuned_epsilon(8, 8000) == pytest.approx(0.1, rel=1e-12)

    def test_clamped(self):
        assert tuned_epsilon(4, 4) == 0.1

    def test_small(self):
        assert tuned_epsilon(10, 10**7) == pytest.approx(0.01, rel=1e-12)

    def test_constant(self):
        assert tuned_epsilon(10, 10**7, c=2.0) == pytest.approx(0.02, rel=1e-12)

    def test_short_horizon(self):
        with pytest.raises(ParamError):
            tuned_epsilon(10, 5)


class TestFixedGap:
    def test_no_drift(self):
        env, cert = fixed_gap_env(5, 0.1, 1000, 0.0, 0)
        assert cert.valid
        assert cert.min_observed_gap == pytest.approx(0.2, abs=1e-12)
        assert cert.verified_through == 1000
        np.testing.assert_array_equal(env.matrix_at(1).p, env.matrix_at(1000).p)

    def test_base_gap(self):
        b = borda_scores(fixed_gap_base(7, 0.15)).values
        np.testing.assert_allclose(b[0] - b[1:], 0.3, atol=1e-12)

    def test_seeded_drift(self):
        env, cert = fixed_gap_env(5, 0.1, 20000, 0.05, 7)
        assert cert.valid and cert.min_observed_gap >= 0.1
        assert cert.verified_through == 20000
        assert not np.array_equal(env.matrix_at(1).p, env.matrix_at(2).p)

    def test_breaks(self):
        with pytest.raises(GapViolation) as info:
            fixed_gap_env(5, 0.1, 1000, 0.9, 1)
        assert info.value.first_violation >= 1

    @pytest.mark.parametrize("delta", [0.0, 0.5, -0.1])
    def test_bad_delta(self, delta):
        with pytest.raises(ParamError):
            fixed_gap_env(5, delta, 10)

    def test_gap_too_large_for_k(self):
        with pytest.raises(ParamError):
            fixed_gap_env(10, 0.3, 10)

    def test_regenerable(self):
        a, _ = fixed_gap_env(4, 0.1, 3000, 0.05, 3)
        b, _ = fixed_gap_env(4, 0.1, 3000, 0.05, 3)
        for t in (1, 1024, 1025, 2999):
            np.testing.assert_array_equal(a.matrix_at(t).p, b.matrix_at(t).p)
        np.testing.assert_array_equal(a.block(1000, 100)[0], b.block(1000, 100)[0])
        np.testing.assert_array_equal(a.block(1000, 100)[0][50], a.matrix_at(1051).p)

    def test_every_round_valid(self):
        env, _ = fixed_gap_env(4, 0.1, 3000, 0.2, 5)
        P = env.block(0, 3000)[0]
        for p in P[::97]:
            validate_matrix(p)


class TestCheckFixedGap:
    def test_ties_invalid(self, i0_k4):
        cert = check_fixed_gap(stationary_env(i0_k4, 10), 0, 0.01)
        assert not cert.valid and cert.min_observed_gap == 0.0

    def test_perturbed_valid(self, i1_k4):
        cert = check_fixed_gap(stationary_env(i1_k4, 10), 0, 0.02)
        assert cert.valid
        assert cert.min_observed_gap == pytest.approx(0.025 * 4 / 3, abs=1e-12)
        assert cert.min_observed_gap == pytest.approx(0.0333, abs=1e-4)

    def test_zero_delta_weak_max(self, i0_k4):
        assert check_fixed_gap(stationary_env(i0_k4, 10), 0, 0.0).valid
        assert not check_fixed_gap(stationary_env(i0_k4, 10), 2, 0.0).valid

    def test_scan_matches_stationary_shortcut(self, i1_k4):
        seq = SequenceStream([i1_k4], 300, cycle=True)
        a = check_fixed_gap(seq, 0, 0.02)
        b = check_fixed_gap(stationary_env(i1_k4, 300), 0, 0.02)
        assert a.valid == b.valid
        assert a.min_observed_gap == pytest.approx(b.min_observed_gap, abs=1e-12)

    def test_first_violation_round(self, i1_k4):
        # round 3 swaps items 1 and 2: running gaps 1/30, 1/30, 1/90, 1/60, 1/50, 1/90
        perm = [1, 0, 2, 3]
        swapped = validate_matrix(i1_k4.p[perm][:, perm])
        seq = SequenceStream([i1_k4, i1_k4, swapped], 6, cycle=True)
        cert = check_fixed_gap(seq, 0, 0.02)
        assert not cert.valid
        assert cert.first_violation == 3
        assert cert.min_observed_gap == pytest.approx(1 / 90, abs=1e-12)
        assert check_fixed_gap(seq, 0, 0.011).valid

    def test_certificate_json(self, i1_k4):
        d = check_fixed_gap(stationary_env(i1_k4, 10), 0, 0.02).to_json()
        assert d["i_star"] == 1 and d["valid"] is True


class TestFiles:
    def _write(self, path, mats, **extra):
        path.write_text(json.dumps({"k": 2, "matrices": mats, **extra}))
        return path

    def test_one_to_one(self, tmp_path):
        mats = [[[0.5, p], [1 - p, 0.5]] for p in (0.6, 0.7, 0.8)]
        env = env_from_file(self._write(tmp_path / "s.json", mats), 3)
        for t, p in enumerate((0.6, 0.7, 0.8), start=1):
            assert env.matrix_at(t).p[0, 1] == p

    def test_bad_round(self, tmp_path):
        mats = [[[0.5, 0.6], [0.4, 0.5]], [[0.5, 0.6], [0.3, 0.5]], [[0.5, 0.6], [0.4, 0.5]]]
        with pytest.raises(ValidationError) as info:
            env_from_file(self._write(tmp_path / "s.json", mats), 3)
        assert info.value.round == 2
        assert isinstance(info.value, AsymmetryError)
        assert "round 2" in str(info.value)

    def test_cycle(self, tmp_path):
        mats = [[[0.5, 0.6], [0.4, 0.5]], [[0.5, 0.7], [0.3, 0.5]]]
        env = env_from_file(self._write(tmp_path / "s.json", mats, cycle=True), 5)
        got = [env.matrix_at(t).p[0, 1] for t in range(1, 6)]
        assert got == [0.6, 0.7, 0.6, 0.7, 0.6]

    def test_too_short(self, tmp_path):
        mats = [[[0.5, 0.6], [0.4, 0.5]]]
        with pytest.raises(HorizonError):
            env_from_file(self._write(tmp_path / "s.json", mats), 2)

    def test_parse_error(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ParseError):
            env_from_file(p)
        with pytest.raises(ParseError):
            env_from_file(tmp_path / "missing.json")

    def test_single_matrix_object(self, tmp_path):
        p = tmp_path / "one.json"
        p.write_text(json.dumps({"k": 2, "p": [[0.5, 0.7], [0.3, 0.5]]}))
        mats, cycle = load_sequence(p)
        assert len(mats) == 1 and not cycle

    def test_roundtrip(self, tmp_path, i1_k4, i0_k4):
        p = tmp_path / "rt.json"
        save_sequence(p, [i1_k4, i0_k4], cycle=True)
        mats, cycle = load_sequence(p)
        assert cycle and mats == [i1_k4, i0_k4]


class TestFeedback:
    def test_degenerate(self):
        m = validate_matrix([[0.5, 1.0], [0.0, 0.5]])
        rng = np.random.default_rng(0)
        assert all(sample_feedback(m, 0, 1, rng) == 1 for _ in range(200))
        assert all(sample_feedback(m, 1, 0, rng) == 0 for _ in range(200))

    def test_mean(self):
        m = validate_matrix([[0.5, 0.9], [0.1, 0.5]])
        rng = np.random.default_rng(12345)
        draws = rng.random(10**6) < m.p[0, 1]
        assert abs(draws.mean() - 0.9) <= 0.001
        rng = np.random.default_rng(12345)
        head = [sample_feedback(m, 0, 1, rng) for _ in range(1000)]
        assert head == draws[:1000].astype(int).tolist()

    def test_out_of_range(self, k2):
        with pytest.raises(IndexError):
            sample_feedback(k2, 0, 2, np.random.default_rng(0))


class TestFromSpec:
    def test_kinds(self, tmp_path, i1_k4):
        assert environment_from_spec({"kind": "stationary", "uniform_k": 3}, 5).k == 3
        env = environment_from_spec({"kind": "lower_bound", "k": 4, "epsilon": 0.05, "m": 1}, 5)
        assert env.matrix_at(1) == i1_k4
        env = environment_from_spec({"kind": "lower_bound", "k": 8, "epsilon": "tuned"}, 8000)
        assert "eps=0.1" in env.label
        save_sequence(tmp_path / "f.json", [i1_k4], cycle=True)
        env = environment_from_spec({"kind": "file", "path": "f.json"}, 7, base_dir=tmp_path)
        assert env.horizon == 7

    def test_unknown(self):
        with pytest.raises(ParamError):
            environment_from_spec({"kind": "mystery"}, 5)


@settings(max_examples=50)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 0.3), st.integers(1, 5000))
def test_perturbed_repeatable_and_valid(seed, scale, t):
    base = fixed_gap_base(4, 0.05)
    env = PerturbedStream(base, scale, seed, 5000)
    a = env.matrix_at(t)
    env.block(0, 3)
    b = env.matrix_at(t)
    np.testing.assert_array_equal(a.p, b.p)
    validate_matrix(a.p)
