"""
Command-line entry point.

Every subcommand accepts ``--config FILE`` (one JSON document, sections
``scene``, ``cluster``, ``regions``, ``mining``, ``segmenter`` plus top-level
``seed``, ``out`` and ``inputs``); explicit flags override the file, the file
overrides built-in defaults.

Exit codes: 0 success, 1 usage or invalid configuration, 2 missing or
malformed data, 3 a pipeline stage failed.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .clustering import ClusterConfig, assign_clusters
from .errors import ConfigError, CoverageError, FormatError, PlacementError, StageError, UnlearnableError
from .evaluation import class_metrics, run_scenarios
from .mining import MinedLabels, MiningThresholds, compose_extended_mask, mine_labels, mined_raster, mined_summary
from .pipeline import RefineConfig, fit_cluster_model
from .raster_io import LabelMask, colorize, load_mask, load_raster, render_png, save_mask, save_raster
from .regions import RegionSet, extract_regions, filter_regions
from .seeding import derive_seed
from .segmenter import SegHyper, SegModel, predict_mask, train_segmenter
from .synth import HumanPolygon, SceneBundle, SceneConfig, generate_scene

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_STAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# flag dest -> (config section, key); section None means top level
_FLAGS = {
    "seed": (None, "seed"),
    "out": (None, "out"),
    "imagery": ("inputs", "imagery"),
    "weak": ("inputs", "weak"),
    "human": ("inputs", "human"),
    "truth": ("inputs", "truth"),
    "width": ("scene", "width"),
    "height": ("scene", "height"),
    "fields": ("scene", "field_count"),
    "noise": ("scene", "noise_std"),
    "coverage": ("scene", "human_coverage"),
    "polygons": ("scene", "human_polygon_count"),
    "shift": ("corruption", "shift_px"),
    "dilation": ("corruption", "dilation_radius"),
    "flip_rate": ("corruption", "flip_rate"),
    "k": ("cluster", "K"),
    "max_iters": ("cluster", "max_iters"),
    "tol": ("cluster", "tol"),
    "sample_size": ("cluster", "sample_size"),
    "standardize": ("cluster", "standardize"),
    "connectivity": ("regions", "connectivity"),
    "q_small": ("regions", "q_small"),
    "q_large": ("regions", "q_large"),
    "positive_min": ("mining", "positive_min"),
    "negative_max": ("mining", "negative_max"),
    "polarity": ("mining", "polarity"),
    "lr": ("segmenter", "learning_rate"),
    "epochs": ("segmenter", "epochs"),
    "batch_size": ("segmenter", "batch_size"),
    "window_radius": ("segmenter", "window_radius"),
    "l2": ("segmenter", "l2"),
    "train_seed": ("segmenter", "seed"),
}


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: malformed config ({e})") from e
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: config must be a JSON object")
    return doc


def merged_config(args: argparse.Namespace) -> dict:
    """Config file contents with every explicitly given flag written over them."""
    cfg = _load_config(getattr(args, "config", None))
    for dest, (section, key) in _FLAGS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if section is None:
            cfg[key] = value
        elif section == "corruption":
            cfg.setdefault("scene", {}).setdefault("corruption", {})[key] = value
        else:
            cfg.setdefault(section, {})[key] = value
    return cfg


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise FormatError(f"config section {name!r} must be an object")
    return dict(sec)


def _build(cls, kwargs: dict, what: str):
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"bad {what} settings: {e}") from e


def scene_config(cfg: dict, seed: int) -> SceneConfig:
    return _build(SceneConfig, dict(_section(cfg, "scene"), seed=seed), "scene")


def refine_config(cfg: dict) -> RefineConfig:
    cl = _section(cfg, "cluster")
    standardize = bool(cl.pop("standardize", True))
    rg = _section(cfg, "regions")
    mn = _section(cfg, "mining")
    mn.pop("polarity", None)
    return RefineConfig(
        cluster=_build(ClusterConfig, cl, "cluster"),
        standardize=standardize,
        connectivity=int(rg.get("connectivity", 4)),
        q_small=float(rg.get("q_small", 0.99)),
        q_large=float(rg.get("q_large", 0.25)),
        thresholds=_build(MiningThresholds, mn, "mining"),
    )


def polarity(cfg: dict) -> str:
    return _section(cfg, "mining").get("polarity", "both")


def seg_hyper(cfg: dict, seed: int) -> SegHyper:
    sec = _section(cfg, "segmenter")
    sec.setdefault("seed", derive_seed(seed, "train"))
    return _build(SegHyper, sec, "segmenter")


def _seed(cfg: dict) -> int:
    return int(cfg.get("seed", 0))


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")


def _read_json(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"missing file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{p}: malformed JSON ({e})") from e


def _require(cfg: dict, section: str, key: str, flag: str) -> str:
    value = _section(cfg, section).get(key) if section else cfg.get(key)
    if value is None:
        raise UsageError(f"cropmine: error: missing required input {flag}")
    return value


# ---------------------------------------------------------------- artifacts

def write_scene(bundle: SceneBundle, config: SceneConfig, seed: int, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    save_raster(bundle.imagery, out / "imagery")
    for name in ("truth", "weak", "human"):
        save_mask(getattr(bundle, name), out / name)
    manifest = {
        "config": config.to_dict(),
        "seed": seed,
        "layers": {"imagery": "imagery", "truth": "truth", "weak": "weak", "human": "human"},
        "human_polygons": [list(p) for p in bundle.human_polygons],
    }
    _write_json(out / "scene_manifest.json", manifest)
    return manifest


def read_scene(directory) -> SceneBundle:
    d = Path(directory)
    manifest = _read_json(d / "scene_manifest.json")
    layers = manifest.get("layers", {})
    try:
        polygons = tuple(HumanPolygon(*map(int, p)) for p in manifest.get("human_polygons", []))
        return SceneBundle(
            load_raster(d / layers["imagery"]),
            load_mask(d / layers["truth"]),
            load_mask(d / layers["weak"]),
            load_mask(d / layers["human"]),
            polygons,
        )
    except (KeyError, TypeError) as e:
        raise FormatError(f"{d}: incomplete scene manifest ({e})") from e


def regions_doc(clusters_path: str, connectivity: int, q_small: float, q_large: float,
                regions: RegionSet, filtered: RegionSet) -> dict:
    return {
        "clusters": str(clusters_path),
        "params": {"connectivity": connectivity, "q_small": q_small, "q_large": q_large},
        "total": len(regions),
        "thresholds": list(filtered.thresholds) if filtered.thresholds else None,
        "warning": filtered.warning,
        "regions": filtered.to_records(),
    }


def rebuild_regions(doc: dict, base: Path) -> RegionSet:
    """Recompute the filtered region set described by a regions.json document."""
    try:
        params = doc["params"]
        path = Path(doc["clusters"])
    except KeyError as e:
        raise FormatError(f"regions document lacks {e}") from e
    if not path.is_absolute() and not (path.with_name(path.name + ".json")).exists():
        path = base / path
    cmap = load_mask(path)
    return filter_regions(extract_regions(cmap, params["connectivity"]), params["q_small"], params["q_large"])


def render_filtered(cluster_map: LabelMask, filtered: RegionSet, path: Path) -> None:
    """Cluster colours on filtered regions, black elsewhere."""
    from PIL import Image

    rgb = colorize(cluster_map)
    rgb[~filtered.membership()] = 0
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(rgb).save(path, format="PNG")


# ---------------------------------------------------------------- pipeline

@dataclass
class PipelineConfig:
    out: Path
    seed: int = 0
    scene: Optional[SceneConfig] = None
    imagery: Optional[str] = None
    weak: Optional[str] = None
    human: Optional[str] = None
    truth: Optional[str] = None
    refine: RefineConfig = field(default_factory=RefineConfig)
    polarity: str = "both"
    hyper: SegHyper = field(default_factory=SegHyper)
    threads: int = 1
    record_timings: bool = False
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_merged(cls, cfg: dict, threads: int = 1, record_timings: bool = False) -> "PipelineConfig":
        seed = _seed(cfg)
        inputs = _section(cfg, "inputs")
        scene = None if inputs.get("imagery") else scene_config(cfg, seed)
        if scene is None and not (inputs.get("weak") and inputs.get("human")):
            raise UsageError("cropmine: error: file-backed runs need --imagery, --weak and --human")
        return cls(
            out=Path(_require(cfg, None, "out", "--out")),
            seed=seed,
            scene=scene,
            imagery=inputs.get("imagery"),
            weak=inputs.get("weak"),
            human=inputs.get("human"),
            truth=inputs.get("truth"),
            refine=refine_config(cfg),
            polarity=polarity(cfg),
            hyper=seg_hyper(cfg, seed),
            threads=threads,
            record_timings=record_timings,
            raw=cfg,
        )


def run_pipeline(config: PipelineConfig) -> Path:
    """cluster -> regions -> mine -> compose -> train -> predict -> eval, every artifact on disk."""
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    refine_seed = derive_seed(config.seed, "refine")
    rc = config.refine

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            result = fn()
        except (FormatError, FileNotFoundError):
            raise
        except Exception as e:
            raise StageError(name, e) from e
        timings[name] = round(time.perf_counter() - t0, 6)
        return result

    if config.scene is not None:
        bundle = stage("synth", lambda: generate_scene(config.scene, config.seed))
        write_scene(bundle, config.scene, config.seed, out / "scene")
        imagery, weak, human, truth = bundle.imagery, bundle.weak, bundle.human, bundle.truth
    else:
        bundle = None
        imagery = load_raster(config.imagery)
        weak = load_mask(config.weak)
        human = load_mask(config.human)
        truth = load_mask(config.truth) if config.truth else None

    model = stage("cluster", lambda: fit_cluster_model(imagery, rc.cluster, rc.standardize, refine_seed, config.threads))
    cmap = stage("assign", lambda: assign_clusters(imagery, model, config.threads))
    _write_json(out / "model.json", model.to_dict())
    save_mask(cmap, out / "clusters")

    regions = stage("regions", lambda: extract_regions(cmap, rc.connectivity))
    filtered = stage("filter", lambda: filter_regions(regions, rc.q_small, rc.q_large))
    _write_json(out / "regions.json", regions_doc("clusters", rc.connectivity, rc.q_small, rc.q_large, regions, filtered))

    mined = stage("mine", lambda: mine_labels(filtered, weak, rc.thresholds, config.polarity))
    mined_doc = dict(mined.to_dict(), summary=mined_summary(mined, filtered, imagery.pixel_size_m))
    _write_json(out / "mined.json", mined_doc)

    extended = stage("compose", lambda: compose_extended_mask(human, mined, filtered))
    save_mask(extended, out / "extended")

    seg = stage("train", lambda: train_segmenter(imagery, extended, config.hyper))
    _write_json(out / "segmodel.json", seg.to_dict())
    pred = stage("predict", lambda: predict_mask(imagery, seg))
    save_mask(pred, out / "predicted")

    if truth is not None:
        metrics = stage("eval", lambda: class_metrics(pred, truth))
        _write_json(out / "metrics.json", metrics)
    if bundle is not None:
        report = stage("scenarios", lambda: run_scenarios(bundle, rc, config.hyper, config.seed, config.threads))
        _write_json(out / "report.json", report.to_dict())
        (out / "report.txt").write_text(report.to_text())

    manifest = {
        "config": _echo(config),
        "seeds": {
            "global": config.seed,
            "refine": refine_seed,
            "sample": derive_seed(refine_seed, "sample"),
            "kmeans++": derive_seed(refine_seed, "kmeans++"),
            "train": config.hyper.seed,
        },
        "versions": {
            "cropmine": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    if config.record_timings:
        manifest["timings_s"] = timings
    _write_json(out / "run_manifest.json", manifest)
    return out


def _echo(config: PipelineConfig) -> dict:
    rc = config.refine
    return {
        "seed": config.seed,
        "scene": config.scene.to_dict() if config.scene else None,
        "inputs": {"imagery": config.imagery, "weak": config.weak, "human": config.human, "truth": config.truth},
        "cluster": dict(asdict(rc.cluster), standardize=rc.standardize),
        "regions": {"connectivity": rc.connectivity, "q_small": rc.q_small, "q_large": rc.q_large},
        "mining": dict(asdict(rc.thresholds), polarity=config.polarity),
        "segmenter": asdict(config.hyper),
        "threads": config.threads,
    }


# ---------------------------------------------------------------- subcommands

def cmd_synth(args) -> int:
    cfg = merged_config(args)
    seed = _seed(cfg)
    sc = scene_config(cfg, seed)
    bundle = generate_scene(sc, seed)
    write_scene(bundle, sc, seed, Path(_require(cfg, None, "out", "--out")))
    return EXIT_OK


def cmd_cluster(args) -> int:
    cfg = merged_config(args)
    rc = refine_config(cfg)
    imagery = load_raster(_require(cfg, "inputs", "imagery", "--imagery"))
    out = Path(_require(cfg, None, "out", "--out"))
    model = fit_cluster_model(imagery, rc.cluster, rc.standardize, derive_seed(_seed(cfg), "refine"), args.threads)
    _write_json(out / "model.json", model.to_dict())
    save_mask(assign_clusters(imagery, model, args.threads), out / "clusters")
    return EXIT_OK


def cmd_regions(args) -> int:
    cfg = merged_config(args)
    rc = refine_config(cfg)
    cmap = load_mask(args.clusters)
    if cmap.kind != "cluster":
        raise FormatError(f"{args.clusters}: expected a cluster mask, got kind {cmap.kind!r}")
    regions = extract_regions(cmap, rc.connectivity)
    filtered = filter_regions(regions, rc.q_small, rc.q_large)
    out = Path(_require(cfg, None, "out", "--out"))
    doc = regions_doc(str(Path(args.clusters).resolve()), rc.connectivity, rc.q_small, rc.q_large, regions, filtered)
    _write_json(out / "regions.json", doc)
    if args.png:
        render_filtered(cmap, filtered, Path(args.png))
    return EXIT_OK


def cmd_mine(args) -> int:
    cfg = merged_config(args)
    rc = refine_config(cfg)
    doc = _read_json(args.regions)
    filtered = rebuild_regions(doc, Path(args.regions).parent)
    weak = load_mask(_require(cfg, "inputs", "weak", "--weak"))
    mined = mine_labels(filtered, weak, rc.thresholds, polarity(cfg))
    out = Path(_require(cfg, None, "out", "--out"))
    pixel_size = args.pixel_size if args.pixel_size is not None else 4.7
    _write_json(out / "mined.json", dict(mined.to_dict(), summary=mined_summary(mined, filtered, pixel_size)))
    save_mask(LabelMask(mined_raster(mined, filtered), kind="extended"), out / "mined_labels")
    return EXIT_OK


def cmd_compose(args) -> int:
    cfg = merged_config(args)
    human = load_mask(_require(cfg, "inputs", "human", "--human"))
    filtered = rebuild_regions(_read_json(args.regions), Path(args.regions).parent)
    mined = MinedLabels.from_dict(_read_json(args.mined))
    save_mask(compose_extended_mask(human, mined, filtered), Path(_require(cfg, None, "out", "--out")))
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = merged_config(args)
    imagery = load_raster(_require(cfg, "inputs", "imagery", "--imagery"))
    model = train_segmenter(imagery, load_mask(args.mask), seg_hyper(cfg, _seed(cfg)))
    _write_json(Path(_require(cfg, None, "out", "--out")), model.to_dict())
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = merged_config(args)
    imagery = load_raster(_require(cfg, "inputs", "imagery", "--imagery"))
    try:
        model = SegModel.from_dict(_read_json(args.model))
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{args.model}: not a segmenter model ({e})") from e
    try:
        pred = predict_mask(imagery, model)
    except ValueError as e:
        raise FormatError(str(e)) from e
    save_mask(pred, Path(_require(cfg, None, "out", "--out")))
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = merged_config(args)
    metrics = class_metrics(load_mask(args.pred), load_mask(_require(cfg, "inputs", "truth", "--truth")))
    text = json.dumps(metrics, indent=2) + "\n"
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_scenarios(args) -> int:
    cfg = merged_config(args)
    seed = _seed(cfg)
    if args.scene:
        bundle = read_scene(args.scene)
    else:
        bundle = generate_scene(scene_config(cfg, seed), seed)
    report = run_scenarios(bundle, refine_config(cfg), seg_hyper(cfg, seed), seed, args.threads)
    out = Path(_require(cfg, None, "out", "--out"))
    _write_json(out / "report.json", report.to_dict())
    (out / "report.txt").write_text(report.to_text())
    sys.stdout.write(report.to_text())
    return EXIT_OK


def cmd_render(args) -> int:
    layer = load_mask(args.layer)
    render_png(layer, args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = merged_config(args)
    run_pipeline(PipelineConfig.from_merged(cfg, args.threads, args.record_timings))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_common(p, out_help="output path"):
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads; 1 is reference mode")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int, help="global seed (default 0)")
    p.add_argument("--out", help=out_help)


def _add_scene(p):
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--fields", type=int, help="number of crop fields")
    p.add_argument("--noise", type=float, help="per-pixel noise std")
    p.add_argument("--coverage", type=float, help="human label coverage fraction")
    p.add_argument("--polygons", type=int, help="human polygon count")
    p.add_argument("--shift", type=int, nargs=2, metavar=("DX", "DY"), help="weak-label shift in pixels")
    p.add_argument("--dilation", type=int, help="weak-label dilation radius")
    p.add_argument("--flip-rate", type=float, help="weak-label flip probability")


def _add_cluster(p):
    p.add_argument("--k", type=int, help="number of clusters (default 10)")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--sample-size", type=int)
    p.add_argument("--no-standardize", dest="standardize", action="store_const", const=False)


def _add_regions(p):
    p.add_argument("--connectivity", type=int, choices=(4, 8))
    p.add_argument("--q-small", type=float, help="small-region quantile (default 0.99)")
    p.add_argument("--q-large", type=float, help="large-region quantile (default 0.25)")


def _add_mining(p):
    p.add_argument("--positive-min", type=float, help="cropland threshold (default 0.8)")
    p.add_argument("--negative-max", type=float, help="non-cropland threshold (default 0.2)")
    p.add_argument("--polarity", choices=("both", "positives", "negatives"))


def _add_hyper(p):
    p.add_argument("--lr", type=float, help="Adam learning rate (default 1e-3)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--window-radius", type=int)
    p.add_argument("--l2", type=float)
    p.add_argument("--train-seed", type=int, help="shuffle seed (default derived from --seed)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cropmine", description="Mine cropland labels from weak layers and train a segmenter.")
    parser.add_argument("--threads", type=int, default=1, help="worker threads; 1 is reference mode")
    parser.add_argument("--version", action="version", version=f"cropmine {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic scene bundle")
    _add_common(p, "output directory")
    _add_scene(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cluster", help="fit k-means and write the cluster map")
    _add_common(p, "output directory")
    p.add_argument("--imagery")
    _add_cluster(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("regions", help="extract and filter connected regions")
    _add_common(p, "output directory")
    p.add_argument("--clusters", required=True)
    p.add_argument("--png", help="also render the filtered regions")
    _add_regions(p)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("mine", help="mine labels from filtered regions and the weak layer")
    _add_common(p, "output directory")
    p.add_argument("--regions", required=True, help="regions.json")
    p.add_argument("--weak")
    p.add_argument("--pixel-size", type=float, help="metres per pixel for area reports (default 4.7)")
    _add_mining(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("compose", help="merge human and mined labels")
    _add_common(p, "output mask path")
    p.add_argument("--human")
    p.add_argument("--regions", required=True)
    p.add_argument("--mined", required=True, help="mined.json")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("train", help="train the segmenter on a label mask")
    _add_common(p, "output model JSON")
    p.add_argument("--imagery")
    p.add_argument("--mask", required=True)
    _add_hyper(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict a cropland mask")
    _add_common(p, "output mask path")
    p.add_argument("--imagery")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="per-class precision, recall and F1")
    _add_common(p, "optional metrics JSON path")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scenarios", help="run the seven label scenarios")
    _add_common(p, "output directory")
    p.add_argument("--scene", help="scene directory from `synth`; omitted means generate one")
    _add_scene(p)
    _add_cluster(p)
    _add_regions(p)
    _add_mining(p)
    _add_hyper(p)
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("render", help="render a mask as PNG")
    p.add_argument("--layer", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("run", help="full pipeline")
    _add_common(p, "output directory")
    p.add_argument("--imagery")
    p.add_argument("--weak")
    p.add_argument("--human")
    p.add_argument("--truth")
    p.add_argument("--record-timings", action="store_true", help="add stage timings to run_manifest.json")
    _add_scene(p)
    _add_cluster(p)
    _add_regions(p)
    _add_mining(p)
    _add_hyper(p)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("cropmine: error: a subcommand is required")
        if args.threads < 1:
            raise UsageError("cropmine: error: --threads must be >= 1")
        return args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"cropmine: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, FileNotFoundError) as e:
        print(f"cropmine: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except StageError as e:
        print(f"cropmine: {e}", file=sys.stderr)
        return EXIT_STAGE
    except (PlacementError, CoverageError, UnlearnableError) as e:
        print(f"cropmine: stage failure: {e}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
