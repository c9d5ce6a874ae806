"""Experiment harness: signal/noise models, config parsing, per-trial
records, summaries, CSV/JSON outputs, and bit-exact replay."""

import json
import math

import numpy as np
import pytest

from groupcs import (
    GroupPartition,
    enumerate_gks,
    is_group_k_sparse,
)
from groupcs.harness import (
    CSV_SCHEMA,
    ExperimentConfig,
    SignalModel,
    TrialRecord,
    draw_signal,
    parse_config,
    run_experiment,
)


# ---------------------------------------------------------------------------
# signal model


def test_signal_model_validation():
    SignalModel("exact")
    SignalModel("compressible", 0.5)
    with pytest.raises(ValueError):
        SignalModel("weird")
    with pytest.raises(ValueError):
        SignalModel("compressible", 1.0)
    with pytest.raises(ValueError):
        SignalModel("compressible", -0.1)


def test_draw_signal_exact_is_unit_norm_group_sparse():
    part = GroupPartition.uniform(12, 3)
    fam = enumerate_gks(part, 6)
    for seed in range(10):
        x = draw_signal(SignalModel("exact"), part, 6, seed)
        assert np.linalg.norm(x) == pytest.approx(1.0, rel=1e-12)
        assert is_group_k_sparse(x, fam)


def test_draw_signal_deterministic():
    part = GroupPartition.singletons(10)
    a = draw_signal(SignalModel("exact"), part, 3, 42)
    b = draw_signal(SignalModel("exact"), part, 3, 42)
    np.testing.assert_array_equal(a, b)
    c = draw_signal(SignalModel("exact"), part, 3, 43)
    assert not np.array_equal(a, c)


def test_draw_signal_compressible_tail_decays():
    part = GroupPartition.singletons(16)
    fam = enumerate_gks(part, 4)
    x = draw_signal(SignalModel("compressible", 0.5), part, 4, 7)
    assert not is_group_k_sparse(x, fam)  # tail touches everything
    mags = np.abs(x)
    assert mags.min() > 0.0  # fully dense
    # this seed lands on a support of size 2, leaving a 14-entry tail
    # whose magnitudes are exactly the geometric sequence 0.5^j
    for j in range(1, 15):
        hits = np.isclose(mags, 0.5**j, rtol=1e-12, atol=0.0).sum()
        assert hits >= 1
    # and the on-support block has unit norm
    tail_sq = sum(0.25**j for j in range(1, 15))
    assert float(mags @ mags) == pytest.approx(1.0 + tail_sq, rel=1e-10)


# ---------------------------------------------------------------------------
# config parsing


def test_parse_config_full(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        """
        # benchmark geometry
        n = 64
        m = 48
        k = 8
        partition = uniform:4
        trials = 50
        seed = 3
        ensemble = gaussian
        penalty = gl
        eps = 0.01
        signal = exact
        noise = sphere
        matrix = per-trial
        csv_out = out.csv
        """
    )
    config = parse_config(cfg)
    assert (config.n, config.m, config.k) == (64, 48, 8)
    assert config.partition.num_groups == 16
    assert config.trials == 50 and config.seed == 3
    assert config.penalty_spec == "gl"
    assert config.eps == pytest.approx(0.01)
    assert config.csv_out == "out.csv"
    assert config.json_out is None


def test_parse_config_defaults(tmp_path):
    cfg = tmp_path / "min.cfg"
    cfg.write_text("n=6\nm=4\nk=2\n")
    config = parse_config(cfg)
    assert config.partition.groups == tuple((i,) for i in range(6))
    assert config.trials == 10
    assert config.penalty_spec == "l1"
    assert config.signal.kind == "exact"
    assert config.matrix_mode == "per-trial"


def test_parse_config_compressible_signal(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n=6\nm=4\nk=2\nsignal = compressible:0.25\n")
    config = parse_config(cfg)
    assert config.signal.kind == "compressible"
    assert config.signal.decay == pytest.approx(0.25)


def test_parse_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n=6\nm=4\n")  # k missing
    with pytest.raises(ValueError):
        parse_config(cfg)
    cfg.write_text("n=6\nm=4\nk=2\nnot a kv line\n")
    with pytest.raises(ValueError):
        parse_config(cfg)
    cfg.write_text("n=6\nm=4\nk=2\nsignal=banana\n")
    with pytest.raises(ValueError):
        parse_config(cfg)


def test_parse_config_partition_file(tmp_path):
    pfile = tmp_path / "p.txt"
    pfile.write_text("0 1 2\n3 4 5\n")
    cfg = tmp_path / "e.cfg"
    cfg.write_text(f"n=6\nm=4\nk=3\npartition = {pfile}\n")
    config = parse_config(cfg)
    assert config.partition.groups == ((0, 1, 2), (3, 4, 5))


def test_config_validation():
    part = GroupPartition.singletons(6)
    with pytest.raises(ValueError):
        ExperimentConfig(n=6, m=4, k=2, partition=part, ensemble="laplace")
    with pytest.raises(ValueError):
        ExperimentConfig(n=6, m=4, k=2, partition=part, trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(n=6, m=4, k=2, partition=part, eps=-0.1)
    with pytest.raises(ValueError):
        ExperimentConfig(n=8, m=4, k=2, partition=part)  # n mismatch


# ---------------------------------------------------------------------------
# running experiments


def _small_config(**kw):
    n = kw.pop("n", 8)
    part = kw.pop("partition", GroupPartition.uniform(n, 2))
    base = dict(
        n=n, m=kw.pop("m", 6), k=kw.pop("k", 2), partition=part,
        trials=kw.pop("trials", 4), seed=kw.pop("seed", 1),
        penalty_spec=kw.pop("penalty_spec", "gl"),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_experiment_populates_records():
    result = run_experiment(_small_config())
    assert len(result.records) == 4
    for rec in result.records:
        assert rec.status == "ok"
        assert rec.rho_low_k is not None and rec.rho_high_2k is not None
        assert rec.delta_2k >= rec.delta_k >= 0.0
        assert rec.error is not None and rec.error >= 0.0
        assert rec.sigma == pytest.approx(0.0, abs=1e-12)  # exact signals
        assert rec.converged is not None
        assert rec.wall_time > 0.0
    s = result.summary
    assert s["schema"] == CSV_SCHEMA
    assert s["trials_ok"] == 4 and s["trials_error"] == 0
    assert s["error_stats"]["min"] >= 0.0


def test_run_experiment_exact_recovery_when_overdetermined():
    # m = n with eps = 0: the solver must essentially invert.
    result = run_experiment(_small_config(m=8, eps=0.0, trials=3))
    for rec in result.records:
        assert rec.error <= 1e-5
        assert rec.converged


def test_run_experiment_compressible_certificates_with_many_measurements():
    # Plenty of measurements at k=1 drives delta_2k small enough for the
    # single-block condition; slack fields must then be populated.
    config = _small_config(
        n=8, m=200, k=1,
        partition=GroupPartition.singletons(8),
        penalty_spec="l1", trials=3, seed=5, eps=1e-3,
    )
    result = run_experiment(config)
    assert result.summary["trials_compressible_sb"] == 3
    assert result.summary["trials_compressible_db"] == 3
    for rec in result.records:
        assert rec.compressible_sb and rec.compressible_db
        assert rec.bound_sb is not None and rec.slack_sb is not None
        assert rec.slack_sb >= 0.0  # the recovery bound holds
        assert rec.slack_db >= 0.0


def test_run_experiment_shared_matrix_mode():
    shared = run_experiment(_small_config(matrix_mode="shared", trials=3))
    rho = {(r.rho_low_k, r.rho_high_k) for r in shared.records}
    assert len(rho) == 1  # same matrix in every trial
    per = run_experiment(_small_config(matrix_mode="per-trial", trials=3))
    rho_per = {(r.rho_low_k, r.rho_high_k) for r in per.records}
    assert len(rho_per) == 3


def test_run_experiment_per_trial_error_isolation():
    # A cap between the order-k and order-2k family sizes (4 and 10 here)
    # fails certification inside every trial, but the run itself completes
    # and reports the failures.
    result = run_experiment(_small_config(cap=5, trials=3))
    assert all(r.status == "error" for r in result.records)
    assert result.summary["trials_ok"] == 0
    assert result.summary["trials_error"] == 3
    assert all("EnumerationTooLarge" in r.message for r in result.records)


def test_run_experiment_sorted_l1_uses_l1_approximation(tmp_path):
    wfile = tmp_path / "w.txt"
    wfile.write_text("\n".join(str(w) for w in np.linspace(2, 1, 8)))
    config = _small_config(
        partition=GroupPartition.singletons(8),
        penalty_spec=f"slope:{wfile}",
        trials=2,
    )
    result = run_experiment(config)
    assert result.summary["trials_ok"] == 2


def test_run_experiment_empirical_constants_fallback(tmp_path):
    # approx l1 with penalty gl has no analytic constants: the harness
    # falls back to sampled estimates instead of failing.
    config = _small_config(approx_spec="l1", penalty_spec="gl", trials=2)
    result = run_experiment(config)
    assert result.summary["trials_ok"] == 2


# ---------------------------------------------------------------------------
# outputs


def test_csv_output_schema_and_replay(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    run_experiment(_small_config(csv_out=str(out1), eps=1e-2, trials=3))
    run_experiment(_small_config(csv_out=str(out2), eps=1e-2, trials=3))
    text1 = out1.read_text()
    assert text1 == out2.read_text()  # bit-identical replay
    lines = text1.strip().split("\n")
    assert lines[0] == f"# schema={CSV_SCHEMA}"
    header = lines[1].split(",")
    assert header[:5] == ["trial", "status", "m", "n", "k"]
    assert "wall_time" not in header  # timing excluded to keep replays exact
    assert len(lines) == 2 + 3
    row = dict(zip(header, lines[2].split(",")))
    assert row["status"] == "ok"
    assert int(row["trial"]) == 0
    assert (int(row["m"]), int(row["n"]), int(row["k"])) == (6, 8, 2)
    # floats are written with repr: they parse back exactly
    assert "." in row["error"] or "e" in row["error"]


def test_json_summary_output(tmp_path):
    out = tmp_path / "s.json"
    run_experiment(_small_config(json_out=str(out), trials=2))
    data = json.loads(out.read_text())
    assert data["schema"] == CSV_SCHEMA
    assert data["trials_ok"] == 2
    assert "wall_time_total" in data
    assert data["error_stats"]["max"] >= data["error_stats"]["min"]


def test_trial_record_defaults():
    rec = TrialRecord(trial=0)
    assert rec.status == "ok"
    assert rec.error is None
    assert rec.wall_time is None
