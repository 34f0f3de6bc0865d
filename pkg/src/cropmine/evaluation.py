"""
Per-class pixel metrics and the seven-scenario label experiment.

Scenario training masks (human labels always take precedence, then mined
regions, then weak cropland pixels):

    full_human            all human polygons
    half_human            a seeded random half (floor) of the human polygon list
    half_all_mined        half + mined positive and negative regions
    half_mined_negative   half + mined negative regions
    half_mined_positive   half + mined positive regions
    half_weak             half + every weak-cropland pixel as cropland
    half_weak_mined_neg   half + mined negative regions + weak cropland
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import FormatError
from .mining import mined_raster, mined_summary, overlay
from .pipeline import RefineConfig, Refinement, refine
from .raster_io import CROPLAND, NON_CROPLAND, UNKNOWN, LabelMask, check_same_shape
from .seeding import derive_seed, make_rng
from .segmenter import SegHyper, predict_mask, train_segmenter
from .synth import CorruptionConfig, SceneBundle, SceneConfig, generate_scene, rasterize_polygons

CATEGORY_NAMES = {CROPLAND: "cropland", NON_CROPLAND: "non_cropland"}


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion_counts(pred: LabelMask, reference: LabelMask, positive: int = CROPLAND) -> ConfusionCounts:
    check_same_shape(pred, reference)
    known = reference.data != UNKNOWN
    if not known.any():
        raise FormatError("reference mask is entirely unknown")
    p = pred.data[known] == positive
    r = reference.data[known] == positive
    tp = int(np.count_nonzero(p & r))
    fp = int(np.count_nonzero(p & ~r))
    fn = int(np.count_nonzero(~p & r))
    return ConfusionCounts(tp, fp, fn, int(p.size) - tp - fp - fn)


def _ratio(a: int, b: int) -> float:
    return a / b if b else 0.0


def precision_recall_f1(counts: ConfusionCounts) -> tuple[float, float, float]:
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def class_metrics(pred: LabelMask, reference: LabelMask) -> dict:
    out = {}
    for code, name in CATEGORY_NAMES.items():
        c = confusion_counts(pred, reference, code)
        p, r, f = precision_recall_f1(c)
        out[name] = {"precision": p, "recall": r, "f1": f, "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}
    return out


@dataclass(frozen=True)
class Scenario:
    key: str
    title: str
    half: bool
    polarity: Optional[str]  # which mined regions to add, None for none
    weak: bool


SCENARIOS = (
    Scenario("full_human", "Human labels", False, None, False),
    Scenario("half_human", "Half human labels", True, None, False),
    Scenario("half_all_mined", "Half human labels + all mined labels", True, "both", False),
    Scenario("half_mined_negative", "Half human labels + mined negative labels", True, "negatives", False),
    Scenario("half_mined_positive", "Half human labels + mined positive labels", True, "positives", False),
    Scenario("half_weak", "Half human labels + weak labels", True, None, True),
    Scenario("half_weak_mined_negative", "Half human labels + weak labels + mined negative labels", True, "negatives", True),
)


@dataclass(frozen=True)
class ScenarioRow:
    key: str
    title: str
    mined: Optional[dict]  # mined_summary for the polarity used, None when no mining
    metrics: dict  # category -> precision/recall/f1/counts


@dataclass(frozen=True)
class ScenarioReport:
    rows: tuple[ScenarioRow, ...]
    seed: int
    refinement: dict = field(default_factory=dict)

    def row(self, key: str) -> ScenarioRow:
        return next(r for r in self.rows if r.key == key)

    def f1(self, key: str, category: str = "cropland") -> float:
        return self.row(key).metrics[category]["f1"]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "refinement": self.refinement,
            "scenarios": [
                {"key": r.key, "name": r.title, "mined": r.mined, "metrics": r.metrics} for r in self.rows
            ],
        }

    def to_text(self) -> str:
        return format_table(self.rows)


def format_table(rows: Sequence[ScenarioRow]) -> str:
    """Plain-text table with one C and one NC line per scenario."""
    header = ("Scenario", "Label", "Mined Labels (#)", "Mined Area (km2)", "F1 Score", "Precision", "Recall")
    lines = []
    for r in rows:
        for code, (label, polarity) in ((CROPLAND, ("C", "positive")), (NON_CROPLAND, ("NC", "negative"))):
            m = r.metrics[CATEGORY_NAMES[code]]
            if r.mined is None:
                count, area = "-", "-"
            else:
                count = str(r.mined[polarity]["count"])
                area = f"{r.mined[polarity]['area_km2']:.4f}"
            name = r.title if label == "C" else ""
            lines.append((name, label, count, area, f"{m['f1']:.2f}", f"{m['precision']:.2f}", f"{m['recall']:.2f}"))
    widths = [max(len(str(x[i])) for x in [header] + lines) for i in range(len(header))]

    def fmt(cells):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first] + rest).rstrip()

    rule = "-" * len(fmt(header))
    out = [fmt(header), rule]
    for i, line in enumerate(lines):
        out.append(fmt(line))
        if i % 2 == 1 and i != len(lines) - 1:
            out.append(rule)
    out.append("C = cropland; NC = non-cropland")
    return "\n".join(out) + "\n"


def half_polygons(polygons: Sequence, seed: int) -> list:
    """A seeded random floor(n/2) subset of the polygon list, in original order."""
    n = len(polygons)
    chosen = np.sort(make_rng(seed).permutation(n)[: n // 2])
    return [polygons[i] for i in chosen]


def scenario_mask(
    scenario: Scenario,
    full_human: LabelMask,
    half_human: LabelMask,
    weak: LabelMask,
    refinement: Refinement,
    pixel_size_m: float,
) -> tuple[LabelMask, Optional[dict]]:
    base = half_human if scenario.half else full_human
    mask = LabelMask(base.data, kind="extended")
    summary = None
    if scenario.polarity is not None:
        mined = refinement.mined.select(scenario.polarity)
        mask = overlay(mask, mined_raster(mined, refinement.filtered))
        summary = mined_summary(mined, refinement.filtered, pixel_size_m)
    if scenario.weak:
        mask = overlay(mask, np.where(weak.data == CROPLAND, CROPLAND, UNKNOWN))
    return mask, summary


def run_scenarios(
    bundle: SceneBundle,
    refine_config: Optional[RefineConfig] = None,
    hyper: Optional[SegHyper] = None,
    seed: int = 0,
    threads: int = 1,
) -> ScenarioReport:
    """Mine labels once, then train/predict/score the segmenter under every scenario."""
    hyper = hyper or SegHyper()
    refinement = refine(bundle.imagery, bundle.weak, refine_config, derive_seed(seed, "refine"), threads)
    polygons = list(bundle.human_polygons)
    shape = bundle.truth.shape
    full_human = rasterize_polygons(polygons, shape) if polygons else bundle.human
    half_human = rasterize_polygons(half_polygons(polygons, derive_seed(seed, "half")), shape)

    rows = []
    for sc in SCENARIOS:
        mask, summary = scenario_mask(
            sc, full_human, half_human, bundle.weak, refinement, bundle.imagery.pixel_size_m
        )
        model = train_segmenter(bundle.imagery, mask, hyper)
        pred = predict_mask(bundle.imagery, model)
        rows.append(ScenarioRow(sc.key, sc.title, summary, class_metrics(pred, bundle.truth)))

    info = {
        "regions_total": len(refinement.regions),
        "regions_filtered": len(refinement.filtered),
        "area_thresholds": list(refinement.filtered.thresholds or ()),
        "mined": mined_summary(refinement.mined, refinement.filtered, bundle.imagery.pixel_size_m),
        "kmeans_inertia": refinement.model.inertia,
        "kmeans_iterations": refinement.model.iterations_run,
    }
    return ScenarioReport(tuple(rows), seed, info)


BENCHMARK_SEEDS = (0, 1, 2, 3, 4)
BENCHMARK_CORRUPTION = CorruptionConfig(shift_px=(3, 3), dilation_radius=2, flip_rate=0.10)
# at the default rate of 1e-3 the logistic model is far from converged on a few
# thousand labeled pixels, so scenarios would differ mainly in optimizer step count
BENCHMARK_HYPER = SegHyper(learning_rate=0.05)


def benchmark_scene_config(seed: int) -> SceneConfig:
    return SceneConfig(width=256, height=256, corruption=BENCHMARK_CORRUPTION, seed=seed)


def run_benchmark(seeds: Sequence[int] = BENCHMARK_SEEDS, hyper: Optional[SegHyper] = None,
                  refine_config: Optional[RefineConfig] = None) -> list[ScenarioReport]:
    hyper = hyper or BENCHMARK_HYPER
    reports = []
    for s in seeds:
        bundle = generate_scene(benchmark_scene_config(s), s)
        reports.append(run_scenarios(bundle, refine_config, hyper, seed=s))
    return reports


def median_f1(reports: Sequence[ScenarioReport], key: str, category: str = "cropland") -> float:
    return statistics.median(r.f1(key, category) for r in reports)
