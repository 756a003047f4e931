"""Monte Carlo sweeps: determinism, aggregation, per-trial invariants, CSV shape."""

import math

import numpy as np
import pytest

from specgame import (
    ConfigError,
    CorrelationSpec,
    SweepConfig,
    p_gain_condition_iid,
    run_sweep,
    run_trial,
    sample_channel,
    write_aggregate_csv,
    write_trial_csv,
)
from specgame.sweep import AGGREGATE_HEADER, TRIAL_HEADER, MODES, _resolve_workers

GS_M100 = 6.474600379589404


def small_config(**overrides):
    kwargs = dict(K_list=[2], trials=120, seed=9)
    kwargs.update(overrides)
    return SweepConfig(**kwargs)


def csv_bytes(result, tmp_path, stem):
    agg = tmp_path / f"{stem}.csv"
    write_aggregate_csv(result.aggregates, agg)
    out = agg.read_bytes()
    if result.trials is not None:
        tri = tmp_path / f"{stem}.trials.csv"
        write_trial_csv(result.trials, tri)
        out += tri.read_bytes()
    return out


class TestConfigValidation:
    def test_carrier_counts(self):
        for bad in ([], [1], [2.5], [True]):
            with pytest.raises(ConfigError):
                SweepConfig(K_list=bad)

    def test_scalars(self):
        with pytest.raises(ConfigError):
            small_config(trials=0)
        with pytest.raises(ConfigError):
            small_config(seed=-1)
        with pytest.raises(ConfigError):
            small_config(sigma2=0.0)
        with pytest.raises(ConfigError):
            small_config(rates=(1.0,))

    def test_modes(self):
        with pytest.raises(ConfigError):
            small_config(modes=("nash", "nash"))
        with pytest.raises(ConfigError):
            small_config(modes=())
        with pytest.raises(ConfigError):
            small_config(modes=("nash", "bogus"))

    def test_correlation_ranges(self):
        with pytest.raises(ConfigError):
            small_config(rho_list=[1.0])
        small_config(theta_list=[1.0])

    def test_lists_coerced_to_tuples(self):
        cfg = small_config(K_list=[2, 4], rho_list=[0.0, 0.5])
        assert cfg.K_list == (2, 4)
        assert cfg.rho_list == (0.0, 0.5)


class TestRunTrial:
    def test_deterministic(self):
        cfg = small_config()
        a = run_trial(cfg, 2, 0.0, 0.0, trial_index=5)
        b = run_trial(cfg, 2, 0.0, 0.0, trial_index=5)
        assert a == b

    def test_channel_summary_fields(self):
        cfg = small_config()
        rec = run_trial(cfg, 3, 0.2, 0.1, trial_index=4)
        gains = sample_channel(
            3, CorrelationSpec(rho_carrier=0.2, theta_user=0.1), seed=9, trial_index=4
        ).gains
        for u in range(2):
            assert rec.best_gains[u] == gains[u].max()
            assert gains[u, rec.best_carriers[u]] == rec.best_gains[u]
            assert rec.best_gains[u] >= rec.second_gains[u]
            assert rec.best_carriers[u] != rec.second_carriers[u]

    def test_stats_follow_mode_order(self):
        cfg = small_config(modes=("social", "nash"))
        rec = run_trial(cfg, 2, 0.0, 0.0, trial_index=0)
        assert tuple(s.mode for s in rec.stats) == ("social", "nash")

    def test_se_and_ee_definitions(self):
        cfg = small_config()
        rec = run_trial(cfg, 2, 0.0, 0.0, trial_index=7)
        for s in rec.stats:
            if s.divergent:
                continue
            se = 0.5 * sum(math.log2(1.0 + x) for x in s.sinrs)
            assert s.se == pytest.approx(se, rel=1e-12)
            f = cfg.efficiency.value
            ee = sum(f(x) for x in s.sinrs) / sum(s.powers)
            assert s.system_ee == pytest.approx(ee, rel=1e-12)
            assert s.welfare == pytest.approx(sum(s.utilities), rel=1e-12)

    def test_divergent_trials_zero_out(self):
        # identical rows + long blocks: simultaneous play escalates forever
        cfg = small_config(theta_list=[1.0], trials=400)
        found = False
        for t in range(400):
            rec = run_trial(cfg, 2, 0.0, 1.0, trial_index=t)
            nash = rec.stats[0]
            assert nash.mode == "nash"
            if nash.divergent:
                found = True
                assert nash.utilities == (0.0, 0.0)
                assert nash.welfare == 0.0
                assert nash.system_ee == 0.0
                assert not nash.orthogonalized
                break
        assert found


class TestAggregation:
    def test_matches_per_trial_records(self):
        cfg = small_config(trials=150)
        res = run_sweep(cfg, per_trial=True)
        for agg in res.aggregates:
            stats = [
                s
                for rec in res.trials
                for s in rec.stats
                if s.mode == agg.mode and rec.K == agg.K
            ]
            assert agg.trials == len(stats) == 150
            p = np.mean([not s.orthogonalized for s in stats])
            assert agg.p_no_orth == pytest.approx(p, abs=1e-15)
            assert agg.p_no_orth_se == pytest.approx(
                math.sqrt(p * (1.0 - p) / 150), rel=1e-12
            )
            assert agg.ee_mean == pytest.approx(
                np.mean([s.system_ee for s in stats]), rel=1e-12
            )
            assert agg.ee_user1 == pytest.approx(
                np.mean([s.utilities[0] for s in stats]), rel=1e-12
            )
            assert agg.ee_user2 == pytest.approx(
                np.mean([s.utilities[1] for s in stats]), rel=1e-12
            )
            assert agg.se_mean == pytest.approx(
                np.mean([s.se for s in stats]), rel=1e-12
            )
            assert agg.welfare_mean == pytest.approx(
                np.mean([s.welfare for s in stats]), rel=1e-12
            )

    def test_single_trial_has_zero_stderr(self):
        res = run_sweep(small_config(trials=1))
        for agg in res.aggregates:
            assert agg.p_no_orth_se == 0.0

    def test_row_order_nested_by_cell_then_mode(self):
        cfg = SweepConfig(K_list=[2, 3], theta_list=[0.0, 1.0], trials=5)
        res = run_sweep(cfg)
        keys = [(a.K, a.rho, a.theta, a.mode) for a in res.aggregates]
        expected = [
            (K, 0.0, th, mode)
            for K in (2, 3)
            for th in (0.0, 1.0)
            for mode in MODES
        ]
        assert keys == expected

    def test_trials_omitted_unless_requested(self):
        assert run_sweep(small_config(trials=3)).trials is None
        assert run_sweep(small_config(trials=3), per_trial=True).trials is not None


class TestDeterminism:
    def test_repeat_runs_byte_identical(self, tmp_path):
        cfg = small_config()
        a = csv_bytes(run_sweep(cfg, per_trial=True), tmp_path, "a")
        b = csv_bytes(run_sweep(cfg, per_trial=True), tmp_path, "b")
        assert a == b

    def test_worker_count_invariant(self, tmp_path):
        cfg = small_config()
        a = csv_bytes(run_sweep(cfg, per_trial=True, workers=1), tmp_path, "w1")
        b = csv_bytes(run_sweep(cfg, per_trial=True, workers=2), tmp_path, "w2")
        assert a == b

    def test_workers_env_var(self, tmp_path, monkeypatch):
        cfg = small_config()
        base = csv_bytes(run_sweep(cfg, workers=1), tmp_path, "base")
        monkeypatch.setenv("SPECGAME_WORKERS", "2")
        env = csv_bytes(run_sweep(cfg), tmp_path, "env")
        assert base == env

    def test_resolve_workers(self, monkeypatch):
        monkeypatch.delenv("SPECGAME_WORKERS", raising=False)
        assert _resolve_workers(None) == 1
        assert _resolve_workers(4) == 4
        monkeypatch.setenv("SPECGAME_WORKERS", "3")
        assert _resolve_workers(None) == 3
        assert _resolve_workers(2) == 2
        monkeypatch.setenv("SPECGAME_WORKERS", "abc")
        with pytest.raises(ConfigError):
            _resolve_workers(None)
        with pytest.raises(ConfigError):
            _resolve_workers(0)


class TestPerTrialInvariants:
    def test_orderings_hold_every_trial(self):
        cfg = small_config(trials=600, seed=21)
        res = run_sweep(cfg, per_trial=True)
        for rec in res.trials:
            nash, stack, social = rec.stats
            assert social.orthogonalized
            assert social.welfare >= stack.welfare * (1.0 - 1e-9)
            assert social.welfare >= nash.welfare * (1.0 - 1e-9)
            assert stack.utilities[0] >= nash.utilities[0] * (1.0 - 1e-9)
            if not stack.orthogonalized:
                assert not nash.orthogonalized

    def test_nash_sharing_rate_matches_prediction(self):
        cfg = small_config(trials=3000, seed=33, modes=("nash",))
        res = run_sweep(cfg, per_trial=True)
        p_hat = res.aggregates[0].p_no_orth
        p = p_gain_condition_iid(GS_M100, 2)
        assert abs(p_hat - p) < 4.0 * math.sqrt(p * (1.0 - p) / 3000)

    def test_identical_fading_shares_more(self):
        base = small_config(trials=1500, seed=40, modes=("nash",))
        res0 = run_sweep(base)
        res1 = run_sweep(small_config(trials=1500, seed=40, modes=("nash",), theta_list=[1.0]))
        assert res1.aggregates[0].p_no_orth > res0.aggregates[0].p_no_orth

    def test_more_carriers_share_less(self):
        cfg = SweepConfig(
            K_list=[2, 8], theta_list=[1.0], trials=1500, seed=41, modes=("nash",)
        )
        res = run_sweep(cfg)
        by_k = {a.K: a.p_no_orth for a in res.aggregates}
        assert by_k[8] < by_k[2]


class TestCsvFiles:
    def test_headers(self, tmp_path):
        assert AGGREGATE_HEADER == (
            "K,rho,theta,mode,trials,p_no_orth,p_no_orth_se,"
            "ee_mean,ee_user1,ee_user2,se_mean,welfare_mean"
        )
        assert TRIAL_HEADER == (
            "trial,K,rho,theta,mode,kind,orthogonalized,carrier1,carrier2,"
            "power1,power2,sinr1,sinr2,utility1,utility2,welfare,se,system_ee"
        )
        res = run_sweep(small_config(trials=3), per_trial=True)
        agg = tmp_path / "agg.csv"
        tri = tmp_path / "tri.csv"
        write_aggregate_csv(res.aggregates, agg)
        write_trial_csv(res.trials, tri)
        assert agg.read_text().splitlines()[0] == AGGREGATE_HEADER
        assert tri.read_text().splitlines()[0] == TRIAL_HEADER

    def test_unix_line_endings(self, tmp_path):
        res = run_sweep(small_config(trials=3), per_trial=True)
        agg = tmp_path / "agg.csv"
        write_aggregate_csv(res.aggregates, agg)
        assert b"\r" not in agg.read_bytes()

    def test_row_counts(self, tmp_path):
        cfg = SweepConfig(K_list=[2, 3], theta_list=[0.0, 0.5], trials=4)
        res = run_sweep(cfg, per_trial=True)
        agg = tmp_path / "agg.csv"
        tri = tmp_path / "tri.csv"
        write_aggregate_csv(res.aggregates, agg)
        write_trial_csv(res.trials, tri)
        assert len(agg.read_text().splitlines()) == 1 + 2 * 2 * 3
        assert len(tri.read_text().splitlines()) == 1 + 2 * 2 * 4 * 3

    def test_trial_rows_use_one_based_carriers(self, tmp_path):
        res = run_sweep(small_config(trials=5), per_trial=True)
        tri = tmp_path / "tri.csv"
        write_trial_csv(res.trials, tri)
        lines = tri.read_text().splitlines()
        header = lines[0].split(",")
        first = dict(zip(header, lines[1].split(",")))
        rec = res.trials[0]
        stat = rec.stats[0]
        assert int(first["carrier1"]) == stat.carriers[0] + 1
        assert int(first["carrier2"]) == stat.carriers[1] + 1
        assert first["orthogonalized"] in ("true", "false")

    def test_nine_significant_digits(self, tmp_path):
        res = run_sweep(small_config(trials=7))
        agg = tmp_path / "agg.csv"
        write_aggregate_csv(res.aggregates, agg)
        lines = agg.read_text().splitlines()
        header = lines[0].split(",")
        row = dict(zip(header, lines[1].split(",")))
        a = res.aggregates[0]
        assert row["welfare_mean"] == format(a.welfare_mean, ".9g")
        assert row["p_no_orth"] == format(a.p_no_orth, ".9g")
