import json
import math

import numpy as np
import pytest

from lemnilab.ensembles import EnsembleSpec
from lemnilab.geometry import GiantOutcome, GridConfig
from lemnilab.montecarlo import (
    ExperimentConfig,
    ExperimentError,
    derive_trial_seed,
    outlier_tail_estimate,
    run_components_experiment,
    run_giant_experiment,
    run_length_experiment,
    summarize,
    wilson_interval,
)

QUICK_GRID = GridConfig(initial_cells_per_axis=48, max_depth=10,
                        vertex_tolerance=1e-7, length_refine_tolerance=5e-3)


def small_config(tmp_path=None, **kw):
    args = dict(
        ensemble=EnsembleSpec("kac", 5),
        degrees=(4, 6),
        trials_per_degree=30,
        master_seed=99,
        grid=QUICK_GRID,
        output_path=str(tmp_path) if tmp_path else None,
    )
    args.update(kw)
    return ExperimentConfig(**args)


def test_derive_trial_seed_deterministic():
    assert derive_trial_seed(5, 10, 3) == derive_trial_seed(5, 10, 3)
    assert derive_trial_seed(5, 10, 3) != derive_trial_seed(5, 10, 4)
    assert derive_trial_seed(5, 10, 3) != derive_trial_seed(6, 10, 3)


def test_derive_trial_seed_collision_scan():
    # adjacent trial indices never collide across a million random masters
    rng = np.random.default_rng(0)
    masters = rng.integers(0, 2**63, size=2000, dtype=np.uint64)
    for m in masters:
        assert derive_trial_seed(int(m), 7, 0) != derive_trial_seed(int(m), 7, 1)


def test_derive_trial_seed_avalanche():
    # flipping one master bit flips >= 30 output bits on average
    rng = np.random.default_rng(1)
    masters = rng.integers(0, 2**63, size=3000, dtype=np.uint64)
    outs0 = np.empty(masters.size, dtype=np.uint64)
    outs1 = np.empty(masters.size, dtype=np.uint64)
    for i, m in enumerate(masters):
        outs0[i] = derive_trial_seed(int(m), 50, 7)
        outs1[i] = derive_trial_seed(int(m) ^ 1, 50, 7)
    bits = np.unpackbits((outs0 ^ outs1).view(np.uint8)).sum() / masters.size
    assert bits >= 30.0


def test_wilson_interval_basic():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0.0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert wilson_interval(0, 0) == (pytest.approx(math.nan, nan_ok=True),) * 2


def test_wilson_interval_coverage():
    # synthetic Bernoulli streams: the 95% interval covers the truth at
    # roughly nominal rate, including near-zero frequencies
    rng = np.random.default_rng(7)
    for p in (0.02, 0.5):
        covered = 0
        reps = 2000
        for _ in range(reps):
            k = rng.binomial(300, p)
            lo, hi = wilson_interval(int(k), 300)
            covered += lo <= p <= hi
        assert covered / reps >= 0.92


def test_summarize_brackets_mean():
    s = summarize([1.0, 2.0, 3.0, 4.0], excluded=1)
    assert s.ci95[0] < s.mean < s.ci95[1]
    assert s.n_trials == 4
    assert s.excluded == 1
    assert s.std_error >= 0


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(degrees=())
    with pytest.raises(ValueError):
        small_config(degrees=(0,))
    with pytest.raises(ValueError):
        small_config(trials_per_degree=0)
    with pytest.raises(ValueError):
        small_config(giant_radius=1.5)


def test_config_json_round_trip():
    cfg = small_config(giant_radius=0.4)
    back = ExperimentConfig.from_json_dict(
        json.loads(json.dumps(cfg.to_json_dict()))
    )
    assert back == cfg


def test_length_experiment_cross_validates_theory(tmp_path):
    cfg = small_config(tmp_path, degrees=(4,), trials_per_degree=150)
    res = run_length_experiment(cfg)
    s = res.summaries[4]
    t = res.theory[4]
    assert s.n_trials + s.excluded == 150
    assert abs(s.mean - t.value) <= 3 * s.std_error
    # persisted artifacts exist with the documented layout
    assert (tmp_path / "kac_4.csv").exists()
    assert (tmp_path / "summary.json").exists()
    header = (tmp_path / "kac_4.csv").read_text().splitlines()[0]
    assert header.startswith("degree,trial_index,seed,total_length,b0")


def test_experiment_deterministic_across_workers(tmp_path):
    out1 = tmp_path / "w1"
    out3 = tmp_path / "w3"
    cfg1 = small_config(out1, trials_per_degree=12, giant_radius=0.5)
    cfg3 = small_config(out3, trials_per_degree=12, giant_radius=0.5)
    run_length_experiment(cfg1, workers=1)
    run_length_experiment(cfg3, workers=3)
    for name in ("kac_4.csv", "kac_6.csv"):
        assert (out1 / name).read_bytes() == (out3 / name).read_bytes()
    s1 = json.loads((out1 / "summary.json").read_text())
    s3 = json.loads((out3 / "summary.json").read_text())
    s1["config"]["output_path"] = s3["config"]["output_path"] = None
    assert s1 == s3


def test_records_ordered_and_pure():
    cfg = small_config(trials_per_degree=8)
    a = run_components_experiment(cfg)
    b = run_components_experiment(cfg)
    keys = [(r.degree, r.trial_index) for r in a.records]
    assert keys == sorted(keys)
    assert [(r.seed, r.b0, r.total_length) for r in a.records] == [
        (r.seed, r.b0, r.total_length) for r in b.records
    ]


def test_components_experiment_bounds():
    cfg = small_config(trials_per_degree=25)
    res = run_components_experiment(cfg)
    for d in cfg.degrees:
        s = res.summaries[d]
        assert 0 < s.mean <= 1.0
        assert res.exclusion_rate[d] <= 0.05
    for r in res.records:
        if not r.excluded:
            assert 1 <= r.b0 <= r.degree


def test_giant_experiment_accounting():
    cfg = small_config(trials_per_degree=60, degrees=(8,))
    res = run_giant_experiment(cfg, r=0.5)
    f = res.frequency[8]
    lo, hi = res.wilson[8]
    assert 0.0 <= lo <= f <= hi <= 1.0
    trues = sum(1 for r in res.records if r.giant is GiantOutcome.TRUE)
    assert f == trues / 60
    for r in res.records:
        if r.giant is GiantOutcome.TRUE:
            assert r.giant_component_length >= 2 * math.pi * 0.5 - 1e-2


def test_outlier_tail_markov_and_monotone():
    cfg = small_config(degrees=(6,), trials_per_degree=120)
    res = outlier_tail_estimate(cfg, thresholds=[10.0, 20.0, 40.0])
    f10 = res.frequency[(6, 10.0)]
    f20 = res.frequency[(6, 20.0)]
    f40 = res.frequency[(6, 40.0)]
    assert f10 >= f20 >= f40
    for L in (10.0, 20.0, 40.0):
        n = 120
        se = math.sqrt(max(res.frequency[(6, L)] * (1 - res.frequency[(6, L)]), 1e-9) / n)
        assert res.frequency[(6, L)] <= res.markov_bound[(6, L)] + 3 * se


def test_custom_ensemble_cannot_resize():
    cfg = ExperimentConfig(
        ensemble=EnsembleSpec("custom", 3, custom_weights=(1.0, 2.0, 1.0, 0.5)),
        degrees=(3,),
        trials_per_degree=2,
        master_seed=1,
        grid=QUICK_GRID,
    )
    assert cfg.spec_for(3).kind == "custom"
    with pytest.raises(ValueError):
        ExperimentConfig(
            ensemble=EnsembleSpec("custom", 3, custom_weights=(1.0, 2.0, 1.0, 0.5)),
            degrees=(3, 5),
            trials_per_degree=2,
            master_seed=1,
            grid=QUICK_GRID,
        ).spec_for(5)


def test_exclusion_rate_failure_raises():
    # an absurdly shallow grid must flag nearly everything and abort
    bad = GridConfig(initial_cells_per_axis=4, max_depth=1,
                     vertex_tolerance=1e-7, length_refine_tolerance=1e-9)
    cfg = small_config(degrees=(12,), trials_per_degree=8, grid=bad)
    with pytest.raises(ExperimentError):
        run_length_experiment(cfg)


@pytest.mark.slow
@pytest.mark.parametrize("kind,n", [("weyl", 8), ("recip_binom", 8), ("kostlan", 8)])
def test_cross_validation_other_ensembles(kind, n):
    # the central property: closed form and simulation agree for every
    # coefficient model, not just the unit-variance one
    from lemnilab.theory import expected_length

    cfg = ExperimentConfig(
        ensemble=EnsembleSpec(kind, n),
        degrees=(n,),
        trials_per_degree=200,
        master_seed=606,
        grid=QUICK_GRID,
    )
    res = run_length_experiment(cfg)
    s = res.summaries[n]
    t = res.theory[n]
    assert abs(s.mean - t.value) <= 3 * s.std_error
