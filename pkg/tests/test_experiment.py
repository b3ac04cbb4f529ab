import logging
import math
import random

import numpy as np
import pytest

import ebicr.experiment as ex
from ebicr.errors import ConfigError, RankDeficient
from ebicr.experiment import (ExperimentConfig, aggregate, parse_config, plot_data_to_csv,
                              read_results, results_to_csv, run_trial, sweep, write_results)

SMALL = """
name = small
N = 40
p = 60
L = 2
L_B = 3
K_B = 2
snr_db = -5, 5
trials = 12
seed = 99
"""


@pytest.fixture
def small():
    return parse_config(SMALL)


class TestConfig:
    def test_parse(self, small):
        assert small.N == (40,) and small.snr_db == (-5.0, 5.0)
        assert small.grid_variable == "snr_db"
        assert small.method_labels() == [("ebicr", 1.0), ("oracle", None)]
        assert small.path_length(40) == 4

    def test_n_grid(self):
        c = parse_config(SMALL.replace("N = 40", "N = 40, 60").replace("-5, 5", "0"))
        assert c.grid_variable == "N" and c.grid_points() == [(40, 0.0), (60, 0.0)]

    @pytest.mark.parametrize("key", ["trials", "seed", "N", "snr_db"])
    def test_missing_key_named(self, key):
        text = "\n".join(l for l in SMALL.splitlines() if not l.startswith(key + " "))
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert exc.value.field == key

    @pytest.mark.parametrize("extra,field", [
        ("bogus = 1", "bogus"),
        ("methods = ebicr, lasso", "methods"),
        ("K = 1", "K"),
        ("support_policy = sometimes", "support_policy"),
        ("zeta = -1", "zeta"),
    ])
    def test_bad_values(self, extra, field):
        with pytest.raises(ConfigError) as exc:
            parse_config(SMALL + extra + "\n")
        assert exc.value.field == field

    def test_two_grids_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(SMALL.replace("N = 40", "N = 40, 50"))

    def test_support_too_large(self):
        with pytest.raises(ConfigError) as exc:
            parse_config(SMALL.replace("K_B = 2", "K_B = 14"))
        assert exc.value.field == "K_B"

    def test_exhaustive_guard(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(N=150, p=1000, L=5, L_B=10, K_B=4, snr_db=0, trials=1,
                             methods=("exhaustive",))

    def test_roundtrip_text(self, small):
        assert parse_config(ex.config_to_text(small)) == small


class TestTrial:
    def test_deterministic(self, small):
        a, b = run_trial(small, 1, 3), run_trial(small, 1, 3)
        assert a.selections == b.selections and a.path == b.path

    def test_shared_path(self, small):
        oc = run_trial(small, 1, 0)
        assert oc.selections[("oracle", None)] == oc.path.prefix(2)
        assert set(oc.selections[("ebicr", 1.0)]) <= set(oc.path.blocks)

    def test_oracle_success_iff_prefix_is_truth(self):
        c = ExperimentConfig(N=150, p=1000, L=5, L_B=10, K_B=4, snr_db=20, trials=5, seed=3)
        for t in range(5):
            oc = run_trial(c, 0, t)
            ok = set(oc.selections[("oracle", None)]) == set(oc.true_support)
            assert ok == (set(oc.path.prefix(4)) == {1, 2, 3, 4})

    def test_random_support(self, small):
        c = parse_config(SMALL + "support_policy = random\n")
        supports = {run_trial(c, 0, t).true_support for t in range(6)}
        assert len(supports) > 1

    def test_failure_recorded(self, small, monkeypatch, caplog):
        real = ex.run_bomp

        def flaky(A, Y, K, s):
            if Y[0, 0] > 0:
                raise RankDeficient("forced")
            return real(A, Y, K, s)

        monkeypatch.setattr(ex, "run_bomp", flaky)
        with caplog.at_level(logging.WARNING):
            res = sweep(small)
        n_bad = sum(res.excluded.values())
        assert n_bad > 0
        assert sum(r.trials for r in res.get("oracle")) == 2 * small.trials - n_bad
        assert "excluded" in caplog.text


class TestSweep:
    def test_pcms_and_stderr_recount(self, small):
        res = sweep(small)
        outcomes = [run_trial(small, g, t) for g in range(2) for t in range(small.trials)]
        for g, row in enumerate(res.get("ebicr")):
            hits = [set(o.selections[("ebicr", 1.0)]) == set(o.true_support)
                    for o in outcomes if o.grid_index == g]
            p = sum(hits) / len(hits)
            assert row.pcms == p
            assert row.stderr == pytest.approx(math.sqrt(p * (1 - p) / len(hits)), abs=1e-15)

    def test_order_independent(self, small):
        outcomes = [run_trial(small, g, t) for g in range(2) for t in range(small.trials)]
        shuffled = outcomes[:]
        random.Random(0).shuffle(shuffled)
        assert results_to_csv(aggregate(small, outcomes)) == results_to_csv(aggregate(small, shuffled))

    def test_threads_identical(self, small):
        assert results_to_csv(sweep(small, threads=1)) == results_to_csv(sweep(small, threads=4))

    def test_exhaustive_method(self):
        c = ExperimentConfig(N=40, p=12, L=2, L_B=2, K_B=2, snr_db=15, trials=5, seed=1,
                             methods=("ebicr", "oracle", "exhaustive"))
        res = sweep(c)
        assert [r.method for r in res.rows] == ["ebicr", "oracle", "exhaustive"]
        assert res.pcms("exhaustive")[0] >= 0.6


class TestOutput:
    def test_roundtrip(self, small, tmp_path):
        res = sweep(small)
        results_path, plot_path = write_results(res, tmp_path)
        assert read_results(results_path) == res.rows
        assert results_path.name == "small_results.csv"

    def test_columns_and_shape(self, small, tmp_path):
        res = sweep(small)
        lines = results_to_csv(res).splitlines()
        assert lines[0] == "grid_variable,grid_value,method,zeta,pcms,stderr,trials,mean_k"
        assert len(lines) - 1 == len(small.snr_db) * len(small.method_labels())
        plot = plot_data_to_csv(res).splitlines()
        assert plot[0] == "snr_db,ebicr_zeta=1,oracle"
        assert len(plot) - 1 == len(small.snr_db)

    def test_stable_bytes(self, small, tmp_path):
        write_results(sweep(small), tmp_path / "a")
        write_results(sweep(small), tmp_path / "b")
        for name in ("small_results.csv", "small_plot.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
