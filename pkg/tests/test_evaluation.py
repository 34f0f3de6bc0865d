import numpy as np
import pytest

from cropmine.errors import FormatError, UnlearnableError
from cropmine.evaluation import (
    BENCHMARK_HYPER,
    SCENARIOS,
    ConfusionCounts,
    class_metrics,
    confusion_counts,
    half_polygons,
    precision_recall_f1,
    run_scenarios,
)
from cropmine.raster_io import CROPLAND, NON_CROPLAND, LabelMask
from cropmine.synth import SceneConfig, generate_scene

NOISELESS = SceneConfig(noise_std=0.0, width=96, height=96, field_count=5, field_size_range=(12, 24),
                        background_cells=9, human_polygon_count=24)


def pm(a, kind="predicted"):
    return LabelMask(np.asarray(a, np.uint8), kind=kind)


def test_hand_grid_counts():
    ref = pm([[2, 2, 1], [1, 1, 2], [2, 1, 1]], "truth")
    pred = pm([[2, 1, 1], [1, 2, 2], [2, 1, 1]])
    c = confusion_counts(pred, ref, CROPLAND)
    assert (c.tp, c.fp, c.fn, c.tn) == (3, 1, 1, 4)
    assert c.total == 9


def test_perfect_and_swapped():
    ref = pm([[2, 1], [1, 2]], "truth")
    assert precision_recall_f1(confusion_counts(ref, ref)) == (1.0, 1.0, 1.0)
    c = confusion_counts(pm(3 - ref.data), ref)
    assert c.tp == 0 and c.tn == 0


def test_formula_values():
    p, r, f = precision_recall_f1(ConfusionCounts(3, 1, 2, 0))
    assert (p, r) == (0.75, 0.6)
    assert f == pytest.approx(0.6667, abs=1e-4)
    assert precision_recall_f1(ConfusionCounts(0, 0, 0, 5)) == (0.0, 0.0, 0.0)


def test_unknown_reference_pixels_skipped():
    ref = pm([[0, 2, 1]], "extended")
    c = confusion_counts(pm([[2, 2, 2]]), ref)
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 0, 0)
    with pytest.raises(FormatError):
        confusion_counts(pm([[2]]), pm([[0]], "extended"))
    with pytest.raises(FormatError):
        confusion_counts(pm([[2, 1]]), pm([[2]], "truth"))


def test_permutation_invariance_and_category_swap():
    rng = np.random.default_rng(0)
    ref = pm(rng.integers(1, 3, size=(8, 8)), "truth")
    pred = pm(rng.integers(1, 3, size=(8, 8)))
    perm = rng.permutation(64)
    shuffle = lambda m, kind: pm(m.data.ravel()[perm].reshape(8, 8), kind)  # noqa: E731
    assert class_metrics(pred, ref) == class_metrics(shuffle(pred, "predicted"), shuffle(ref, "truth"))
    a = confusion_counts(pred, ref, CROPLAND)
    b = confusion_counts(pred, ref, NON_CROPLAND)
    assert (a.tp, a.tn, a.fp, a.fn) == (b.tn, b.tp, b.fn, b.fp)


def test_half_polygons_is_seeded_floor_half():
    polys = list(range(67))
    half = half_polygons(polys, 5)
    assert len(half) == 33 and half == sorted(half)
    assert half == half_polygons(polys, 5)
    assert half != half_polygons(polys, 6)
    assert half_polygons([1], 0) == []


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_noiseless_scene_full_labels(seed):
    bundle = generate_scene(NOISELESS, seed)
    report = run_scenarios(bundle, hyper=BENCHMARK_HYPER, seed=seed)
    assert [r.key for r in report.rows] == [s.key for s in SCENARIOS]
    assert report.f1("full_human") >= 0.98
    assert report.f1("full_human") >= report.f1("half_human") - 0.02
    for row in report.rows:
        for cat in ("cropland", "non_cropland"):
            for k in ("precision", "recall", "f1"):
                assert 0.0 <= row.metrics[cat][k] <= 1.0


def test_report_layout():
    bundle = generate_scene(NOISELESS, 0)
    report = run_scenarios(bundle, hyper=BENCHMARK_HYPER, seed=0)
    text = report.to_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("-")]
    assert lines[0].split()[:2] == ["Scenario", "Label"]
    body = lines[1:-1]
    assert len(body) == 14
    assert [ln.split()[-6] for ln in body] == ["C", "NC"] * 7
    d = report.to_dict()
    assert len(d["scenarios"]) == 7
    assert d["scenarios"][0]["mined"] is None
    assert d["scenarios"][3]["mined"]["positive"]["count"] == 0


def test_mined_negative_scenario_has_no_mined_cropland():
    bundle = generate_scene(NOISELESS, 1)
    report = run_scenarios(bundle, hyper=BENCHMARK_HYPER, seed=1)
    row = report.row("half_mined_negative")
    assert row.mined["positive"]["count"] == 0
    assert row.mined["negative"]["count"] == report.refinement["mined"]["negative"]["count"]


def test_training_errors_propagate():
    cfg = SceneConfig(width=32, height=32, field_count=0, field_size_range=(4, 8), background_cells=4,
                      human_polygon_count=4, human_coverage=0.05)
    with pytest.raises(UnlearnableError):
        run_scenarios(generate_scene(cfg, 0))
