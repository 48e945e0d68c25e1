import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plateaulab.core import BitString, FixedOnes, Point, RngStream, Uniform
from plateaulab.ea import (
    RlsMutation,
    RunConfig,
    RunResult,
    extract_restart_stats,
    mutate,
    run,
)
from plateaulab.fitness import (
    BlockMajorityFitness,
    MajorityFitness,
    NeutralityFitness,
    OneMax,
    PlateauFitness,
)
from plateaulab.oracle import bd_expected_hitting, plateau_chain


def hamming(a, b):
    return sum(a.bit(i) != b.bit(i) for i in range(a.n))


class TestMutate:
    def test_full_flip_is_complement(self):
        x = BitString.from01("10110")
        y = mutate(x, RlsMutation(5), RngStream(1).generator())
        assert y == x.complement()

    def test_single_flip_frequencies(self):
        rng = RngStream(2).generator()
        x = BitString.from01("00")
        counts = {"10": 0, "01": 0}
        draws = 10_000
        for _ in range(draws):
            counts[mutate(x, RlsMutation(1), rng).to01()] += 1
        assert abs(counts["10"] / draws - 0.5) < 0.02

    def test_ell_exceeding_length(self):
        with pytest.raises(ValueError):
            mutate(BitString.from01("01"), RlsMutation(3), RngStream(3).generator())
        with pytest.raises(ValueError):
            RlsMutation(0)

    @given(st.data())
    @settings(max_examples=80)
    def test_distance_is_exactly_ell(self, data):
        n = data.draw(st.integers(1, 120))
        ell = data.draw(st.integers(1, n))
        seed = data.draw(st.integers(0, 2**32))
        bits = "".join(data.draw(st.lists(st.sampled_from("01"), min_size=n, max_size=n)))
        x = BitString.from01(bits)
        y = mutate(x, RlsMutation(ell), RngStream(seed).generator())
        assert hamming(x, y) == ell
        assert x.ones == sum(x.bit(i) for i in range(n))


class TestRunConfigValidation:
    def test_ell_vs_arity(self):
        with pytest.raises(ValueError):
            RunConfig(MajorityFitness(4, 1), RlsMutation(5), Uniform(), 1)

    def test_cap_positive(self):
        with pytest.raises(ValueError):
            RunConfig(MajorityFitness(4, 1), RlsMutation(1), Uniform(), 1, max_iters=0)

    def test_restart_stats_need_majority(self):
        with pytest.raises(ValueError):
            RunConfig(
                OneMax(4), RlsMutation(1), Uniform(), 1, record_restart_stats=True
            )


class TestRun:
    def test_optimal_start_is_zero(self):
        cfg = RunConfig(MajorityFitness(8, 0), RlsMutation(1), FixedOnes(4), 1)
        assert run(cfg).runtime == 0

    def test_point_start(self):
        cfg = RunConfig(MajorityFitness(4, 2), RlsMutation(1), Point("1111"), 1)
        assert run(cfg).runtime == 0

    def test_mean_matches_three_state_chain(self):
        # E from one 1 on the n=2, r=1 objective is exactly 3
        total = 0
        runs = 100_000
        for i in range(runs):
            cfg = RunConfig(MajorityFitness(2, 1), RlsMutation(1), FixedOnes(1), 77, i)
            total += run(cfg).runtime
        mean = total / runs
        # the hitting time from one 1 has variance 8, so sd = 2.83
        assert abs(mean - 3.0) < 3 * 2.83 / math.sqrt(runs) + 0.02

    def test_plateau_mean_matches_oracle(self):
        n, r, runs = 4, 2, 20_000
        exact = bd_expected_hitting(plateau_chain(n, r), 2)
        values = []
        for i in range(runs):
            cfg = RunConfig(PlateauFitness(n, r), RlsMutation(1), FixedOnes(2), 99, i)
            values.append(run(cfg).runtime)
        arr = np.asarray(values, dtype=float)
        se = arr.std(ddof=1) / math.sqrt(runs)
        assert abs(arr.mean() - exact) < 3 * se

    def test_reproducible_bit_for_bit(self):
        cfg = RunConfig(
            MajorityFitness(30, 3),
            RlsMutation(2),
            Uniform(),
            1234,
            5,
            record_trajectory=True,
        )
        a, b = run(cfg), run(cfg)
        assert a.runtime == b.runtime
        assert a.init_ones == b.init_ones
        assert np.array_equal(a.trajectory, b.trajectory)

    def test_censoring(self):
        # crossing the r=5 plateau from the center within 3 steps is impossible
        cfg = RunConfig(
            PlateauFitness(20, 5),
            RlsMutation(1),
            FixedOnes(10),
            1,
            max_iters=3,
            record_trajectory=True,
        )
        res = run(cfg)
        assert res.censored and res.runtime is None
        assert len(res.trajectory) == 4  # initial entry plus one per iteration

    def test_elitism_along_trajectory(self):
        cfg = RunConfig(
            OneMax(40), RlsMutation(1), Uniform(), 321, 0, record_trajectory=True
        )
        res = run(cfg)
        assert res.runtime is not None
        assert np.all(np.diff(res.trajectory) >= 0)
        assert len(res.trajectory) == res.runtime + 1  # one entry per iteration

    def test_every_pre_hit_proposal_accepted_on_majority(self):
        # below the threshold both fitness values are 0, so acceptance uses >=
        # and the ones count changes at every single-bit step
        cfg = RunConfig(
            MajorityFitness(30, 3), RlsMutation(1), FixedOnes(10), 5, 0,
            record_trajectory=True,
        )
        res = run(cfg)
        steps = np.diff(res.trajectory)
        assert np.all(np.abs(steps) == 1)

    @pytest.mark.parametrize("ell", [2, 5])
    def test_multi_flip_mean_matches_kernel_oracle(self, ell):
        from plateaulab.core import Uniform as UniformInit
        from plateaulab.oracle import (
            expected_under_init,
            kernel_hitting_times,
            level_fitness,
            rlsl_kernel,
        )

        n, r, runs = 30, 3, 20_000
        fit = MajorityFitness(n, r)
        kernel = rlsl_kernel(n, ell, level_fitness(fit))
        exact = expected_under_init(kernel_hitting_times(kernel), n, UniformInit())
        values = []
        for i in range(runs):
            cfg = RunConfig(fit, RlsMutation(ell), Uniform(), 4242 + ell, i)
            values.append(run(cfg).runtime)
        arr = np.asarray(values, dtype=float)
        se = arr.std(ddof=1) / math.sqrt(runs)
        assert abs(arr.mean() - exact) < 3 * se

    def test_subset_path_on_neutral_fitness(self):
        fit = NeutralityFitness(OneMax(4), 3)
        cfg = RunConfig(fit, RlsMutation(2), Uniform(), 42, 0, max_iters=200_000,
                        record_trajectory=True)
        res = run(cfg)
        assert res.runtime is not None
        # elitism in fitness space, checked by re-evaluating the final state
        assert res.trajectory[-1] <= fit.n

    def test_block_fitness_run(self):
        fit = BlockMajorityFitness(1, 3, 4)
        cfg = RunConfig(fit, RlsMutation(1), Uniform(), 9, 0, max_iters=100_000)
        res = run(cfg)
        assert res.runtime is not None


class TestLevelProcess:
    def test_conditional_step_frequencies_on_plateau(self):
        # a censored run stays on a wide plateau for its whole 10^6 steps;
        # the majority count must rise w.p. (n-m)/n at m > n/2 and surely at n/2
        n, r = 100, 30
        cfg = RunConfig(
            PlateauFitness(n, r),
            RlsMutation(1),
            FixedOnes(n // 2),
            2024,
            0,
            max_iters=1_000_000,
            record_trajectory=True,
        )
        res = run(cfg)
        assert res.censored
        ones = res.trajectory
        # on the plateau both fitness values are 0, so no proposal is
        # rejected and the ones count moves at every step
        assert np.all(np.abs(np.diff(ones)) == 1)
        m = np.maximum(ones, n - ones)
        ups = {}
        visits = {}
        for a, b in zip(m[:-1], m[1:]):
            visits[a] = visits.get(a, 0) + 1
            if b == a + 1:
                ups[a] = ups.get(a, 0) + 1
        assert ups.get(n // 2, 0) == visits.get(n // 2, 0)
        for level, seen in visits.items():
            if level == n // 2 or seen < 1000:
                continue
            p = (n - level) / n
            se = math.sqrt(p * (1 - p) / seen)
            assert abs(ups.get(level, 0) / seen - p) < 3 * se + 1e-9


class TestRestartStats:
    def test_hand_traced_example(self):
        stats = extract_restart_stats([2, 1, 0, 1, 2, 3, 4], 4, 2)
        assert stats.plateau_hits == (2, 6)
        assert stats.half_returns == (4,)
        assert stats.retries == 1
        assert stats.retried
        assert not stats.first_hit_majority
        assert not stats.partial

    def test_immediate_success(self):
        stats = extract_restart_stats([2, 3, 4], 4, 2)
        assert stats.plateau_hits == (2,)
        assert stats.retries == 0
        assert not stats.retried
        assert stats.first_hit_majority
        assert not stats.partial

    def test_partial_when_unfinished(self):
        stats = extract_restart_stats([2, 1, 0, 1], 4, 2)
        assert stats.partial
        assert stats.plateau_hits == (2,)
        assert stats.retries == 1

    def test_validation(self):
        with pytest.raises(ValueError):
            extract_restart_stats([1, 2], 4, 0)
        with pytest.raises(ValueError):
            extract_restart_stats([], 4, 1)

    def test_interleaving_invariant_on_runs(self):
        n, r = 20, 2
        checked = 0
        for i in range(1000):
            cfg = RunConfig(
                MajorityFitness(n, r),
                RlsMutation(1),
                Uniform(),
                555,
                i,
                record_restart_stats=True,
            )
            stats = run(cfg).restart
            assert not stats.partial
            hits, returns = stats.plateau_hits, stats.half_returns
            assert stats.retries == len(hits) - 1
            assert len(returns) in (len(hits) - 1, len(hits))
            for idx, back in enumerate(returns):
                assert hits[idx] <= back
                if idx + 1 < len(hits):
                    assert back < hits[idx + 1]
            checked += 1
        assert checked == 1000

    def test_run_with_restart_stats_only_drops_trajectory(self):
        cfg = RunConfig(
            MajorityFitness(10, 2),
            RlsMutation(1),
            Uniform(),
            7,
            0,
            record_restart_stats=True,
        )
        res = run(cfg)
        assert res.trajectory is None
        assert res.restart is not None
