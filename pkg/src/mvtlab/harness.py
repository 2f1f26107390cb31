"""Experiment presets, traffic sweeps, repetition management, and emission
of comparison curves as CSV and SVG."""

from __future__ import annotations

import ast
import hashlib
import json
import xml.sax.saxutils as saxutils
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .evaluator import (
    LINEAR,
    NONLINEAR,
    Evaluator,
    WeightConfig,
    sample_evaluator,
)
from .evolution import EvolutionConfig, run_evolution
from .genome import SearchSpace
from .simstats import aggregate_runs, allocate_evolution, allocate_taguchi, simulate_conversions
from .taguchi import (
    OrthogonalArray,
    best_tested,
    load_array_file,
    load_bundled_array,
    predict_best,
)

COMPARISON_METHODS = ("evolution", "taguchi-predict", "taguchi-candidate")
DURING_METHODS = ("evolution", "taguchi")

DEFAULT_TRAFFIC_SWEEP = (
    1_000, 3_000, 10_000, 30_000, 100_000, 300_000, 1_000_000, 3_000_000, 10_000_000
)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    space: SearchSpace
    mode: str = LINEAR
    weights: WeightConfig = field(default_factory=WeightConfig)
    array_name: str | None = None
    array_path: str | None = None
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    traffic: tuple[int, ...] = DEFAULT_TRAFFIC_SWEEP
    repetitions: int = 20
    master_seed: int = 2024
    fixed_evaluator: bool = False
    curve: str = "comparison"  # or "during"
    out_dir: str = "out"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("need at least one repetition")
        if list(self.traffic) != sorted(set(self.traffic)):
            raise ValueError("traffic sweep must be strictly increasing")
        if self.curve not in ("comparison", "during"):
            raise ValueError(f"unknown curve kind {self.curve!r}")

    def load_design(self) -> OrthogonalArray:
        if self.array_path:
            return load_array_file(self.array_path)
        if self.array_name:
            return load_bundled_array(self.array_name)
        raise ValueError("config names no orthogonal array")


@dataclass(frozen=True)
class ResultSeries:
    traffic: tuple[int, ...]
    methods: tuple[str, ...]
    points: dict  # method -> tuple of (mean, lo, hi) per traffic value

    def __post_init__(self):
        for method in self.methods:
            for mean, lo, hi in self.points[method]:
                if not lo - 1e-12 <= mean <= hi + 1e-12:
                    raise ValueError(
                        f"interval violation for {method}: {lo} <= {mean} <= {hi}"
                    )


PRESETS: dict[str, ExperimentConfig] = {
    "setting1-linear": ExperimentConfig(
        name="setting1-linear", space=SearchSpace([2, 2, 2]), array_name="oa4_2x3"
    ),
    "setting2-linear": ExperimentConfig(
        name="setting2-linear", space=SearchSpace([3, 3, 3, 3]), array_name="oa9_3x4"
    ),
    "setting3-linear": ExperimentConfig(
        name="setting3-linear", space=SearchSpace([4, 4, 4, 4, 4]), array_name="oa16_4x5"
    ),
    "mixed-linear": ExperimentConfig(
        name="mixed-linear",
        space=SearchSpace([3, 6, 2, 3, 6, 2, 2, 6]),
        array_name="oa36_mixed",
    ),
    "mixed-nonlinear": ExperimentConfig(
        name="mixed-nonlinear",
        space=SearchSpace([3, 6, 2, 3, 6, 2, 2, 6]),
        array_name="oa36_mixed",
        mode=NONLINEAR,
    ),
    "during-experiment": ExperimentConfig(
        name="during-experiment",
        space=SearchSpace([3, 6, 2, 3, 6, 2, 2, 6]),
        array_name="oa36_mixed",
        curve="during",
    ),
}


def _derived_seed(*parts: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(list(parts))


def _evaluator_for(config: ExperimentConfig, rep: int) -> Evaluator:
    rep_key = 0 if config.fixed_evaluator else rep
    seed = int(_derived_seed(config.master_seed, 101, rep_key).generate_state(1)[0])
    return sample_evaluator(config.space, config.mode, config.weights, seed)


@dataclass(frozen=True)
class TaguchiArmResult:
    predict_cr: float
    candidate_cr: float
    served_avg_cr: float  # impression-weighted true CR over all served traffic


def run_taguchi_arm(
    array: OrthogonalArray,
    evaluator: Evaluator,
    total_traffic: int,
    rng: np.random.Generator,
) -> TaguchiArmResult:
    """Spread traffic evenly over the array rows, observe conversions, score
    rows by observed rate, and read off the predicted-best and best-tested
    candidates' true conversion rates."""
    if array.column_levels != evaluator.space.cardinalities:
        raise ValueError(
            f"array levels {array.column_levels} do not match "
            f"space {evaluator.space.cardinalities}"
        )
    allocation = allocate_taguchi(total_traffic, array.n_rows)
    true_crs = [evaluator.true_cr(array.row_candidate(r)) for r in range(array.n_rows)]
    scores = []
    for impressions, cr in zip(allocation, true_crs):
        conv = simulate_conversions(cr, impressions, rng)
        scores.append(conv / impressions)
    served = sum(n * cr for n, cr in zip(allocation, true_crs)) / total_traffic
    return TaguchiArmResult(
        predict_cr=evaluator.true_cr(predict_best(array, scores)),
        candidate_cr=evaluator.true_cr(best_tested(array, scores)),
        served_avg_cr=served,
    )


@dataclass(frozen=True)
class EvolutionArmResult:
    winner_cr: float
    served_avg_cr: float


def run_evolution_arm(
    config: ExperimentConfig,
    evaluator: Evaluator,
    total_traffic: int,
    rng: np.random.Generator,
) -> EvolutionArmResult:
    pop_size = sum(k - 1 for k in config.space.cardinalities)
    plan = allocate_evolution(total_traffic, config.evolution.generations, pop_size)
    result = run_evolution(config.space, evaluator, plan, config.evolution, rng)
    served = 0.0
    for record, slots in zip(result.records, plan):
        for (cand, _), impressions in zip(record.population, slots):
            served += impressions * evaluator.true_cr(cand)
    return EvolutionArmResult(
        winner_cr=evaluator.true_cr(result.winner),
        served_avg_cr=served / total_traffic,
    )


def _sweep(config: ExperimentConfig, metrics):
    """Shared sweep loop: metrics maps (tag_result, evo_result) to a dict of
    method -> measurement; both arms share the evaluator and total traffic."""
    array = config.load_design()
    per_method: dict[str, list[list[float]]] = {}
    for t_idx, total in enumerate(config.traffic):
        rep_values: dict[str, list[float]] = {}
        for rep in range(config.repetitions):
            evaluator = _evaluator_for(config, rep)
            tag_rng = np.random.Generator(
                np.random.PCG64(_derived_seed(config.master_seed, 202, t_idx, rep))
            )
            evo_rng = np.random.Generator(
                np.random.PCG64(_derived_seed(config.master_seed, 303, t_idx, rep))
            )
            tag = run_taguchi_arm(array, evaluator, total, tag_rng)
            evo = run_evolution_arm(config, evaluator, total, evo_rng)
            for method, value in metrics(tag, evo).items():
                rep_values.setdefault(method, []).append(value)
        for method, values in rep_values.items():
            per_method.setdefault(method, []).append(list(aggregate_runs(values)))
    methods = tuple(per_method)
    return ResultSeries(
        traffic=tuple(config.traffic),
        methods=methods,
        points={m: tuple(tuple(p) for p in per_method[m]) for m in methods},
    )


def run_comparison(config: ExperimentConfig) -> ResultSeries:
    """End-of-experiment comparison: winner / predicted-best / best-tested
    true conversion rates across the traffic sweep."""

    def metrics(tag: TaguchiArmResult, evo: EvolutionArmResult):
        return {
            "evolution": evo.winner_cr,
            "taguchi-predict": tag.predict_cr,
            "taguchi-candidate": tag.candidate_cr,
        }

    return _sweep(config, metrics)


def run_during_experiment_curve(config: ExperimentConfig) -> ResultSeries:
    """Impression-weighted mean true conversion rate of all traffic served
    during the experiment, per method."""

    def metrics(tag: TaguchiArmResult, evo: EvolutionArmResult):
        return {"evolution": evo.served_avg_cr, "taguchi": tag.served_avg_cr}

    return _sweep(config, metrics)


def emit_csv(series: ResultSeries, path) -> None:
    lines = ["traffic,method,mean,lo,hi"]
    for i, traffic in enumerate(series.traffic):
        for method in series.methods:
            mean, lo, hi = series.points[method][i]
            lines.append(f"{traffic},{method},{mean:.12g},{lo:.12g},{hi:.12g}")
    Path(path).write_text("\n".join(lines) + "\n")


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def emit_svg(series: ResultSeries, path, title: str = "") -> None:
    """Standalone SVG: one mean polyline plus a shaded interval band per
    method, traffic on a log axis."""
    if not series.traffic:
        raise ValueError("cannot plot an empty series")
    width, height = 720, 480
    ml, mr, mt, mb = 70, 20, 40, 50
    xs = [np.log10(t) for t in series.traffic]
    ys = [v for m in series.methods for p in series.points[m] for v in p]
    y_lo, y_hi = min(ys), max(ys)
    if y_hi - y_lo < 1e-9:
        y_lo, y_hi = y_lo - 0.001, y_hi + 0.001
    pad = 0.06 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(x):
        return ml + (x - xs[0]) / (xs[-1] - xs[0] or 1.0) * (width - ml - mr)

    def py(y):
        return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
            f'font-size="16">{saxutils.escape(title)}</text>'
        )
    # axes
    parts.append(
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" '
        'stroke="black"/>'
    )
    parts.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>')
    for t, x in zip(series.traffic, xs):
        parts.append(
            f'<text x="{px(x):.1f}" y="{height - mb + 18}" text-anchor="middle" '
            f'font-size="10">{t:g}</text>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{ml - 6}" y="{py(y) + 4:.1f}" text-anchor="end" '
            f'font-size="10">{y:.4f}</text>'
        )
    parts.append(
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        'font-size="12">total traffic (log scale)</text>'
    )
    for m_idx, method in enumerate(series.methods):
        color = _SVG_COLORS[m_idx % len(_SVG_COLORS)]
        pts = series.points[method]
        band = [(px(x), py(p[1])) for x, p in zip(xs, pts)]
        band += [(px(x), py(p[2])) for x, p in reversed(list(zip(xs, pts)))]
        band_str = " ".join(f"{a:.1f},{b:.1f}" for a, b in band)
        parts.append(f'<polygon points="{band_str}" fill="{color}" fill-opacity="0.15"/>')
        line = " ".join(f"{px(x):.1f},{py(p[0]):.1f}" for x, p in zip(xs, pts))
        parts.append(
            f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        ly = mt + 16 * (m_idx + 1)
        parts.append(
            f'<line x1="{width - mr - 150}" y1="{ly}" x2="{width - mr - 120}" '
            f'y2="{ly}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{width - mr - 112}" y="{ly + 4}" font-size="12" '
            f'class="legend">{saxutils.escape(method)}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def config_digest(config: ExperimentConfig) -> str:
    doc = {
        "name": config.name,
        "space": list(config.space.cardinalities),
        "mode": config.mode,
        "weights": [config.weights.bias, config.weights.delta_main, config.weights.delta_pair],
        "array": config.array_name or config.array_path,
        "evolution": [
            config.evolution.generations,
            config.evolution.mutation_rate,
            config.evolution.elite_fraction,
        ],
        "traffic": list(config.traffic),
        "repetitions": config.repetitions,
        "master_seed": config.master_seed,
        "fixed_evaluator": config.fixed_evaluator,
        "curve": config.curve,
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def run_experiment(config: ExperimentConfig) -> dict:
    """Run a configured experiment and write CSV, SVG, and a JSON manifest
    into the output directory. Returns the output paths."""
    from importlib.metadata import version as pkg_version

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.curve == "during":
        series = run_during_experiment_curve(config)
    else:
        series = run_comparison(config)
    csv_path = out / f"{config.name}.csv"
    svg_path = out / f"{config.name}.svg"
    manifest_path = out / f"{config.name}.manifest.json"
    emit_csv(series, csv_path)
    emit_svg(series, svg_path, title=config.name)
    try:
        ver = pkg_version("mvtlab")
    except Exception:
        ver = "unknown"
    manifest = {
        "name": config.name,
        "seed": config.master_seed,
        "config_sha256": config_digest(config),
        "mvtlab_version": ver,
        "numpy_version": np.__version__,
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return {"csv": csv_path, "svg": svg_path, "manifest": manifest_path, "series": series}


_CONFIG_KEYS = {
    "space", "mode", "bias", "delta_main", "delta_pair", "array",
    "generations", "mutation_rate", "elite_fraction",
    "traffic", "repetitions", "seed", "fixed_evaluator", "curve", "out", "name",
}


def parse_config(text: str, name: str = "custom") -> ExperimentConfig:
    """Parse a declarative key = value config file; values use Python
    literal syntax, e.g. `space = [3, 6, 2, 3, 6, 2, 2, 6]`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, _, rhs = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = ast.literal_eval(rhs.strip())
        except (ValueError, SyntaxError):
            values[key] = rhs.strip()  # bare strings (array names, modes)
    if "space" not in values:
        raise ValueError("config must define a space")
    weights = WeightConfig(
        bias=values.get("bias", WeightConfig.bias),
        delta_main=values.get("delta_main", WeightConfig.delta_main),
        delta_pair=values.get("delta_pair", WeightConfig.delta_pair),
    )
    evo = EvolutionConfig(
        generations=values.get("generations", 8),
        mutation_rate=values.get("mutation_rate", 0.01),
        elite_fraction=values.get("elite_fraction", 0.20),
    )
    array = values.get("array")
    bundled = array is not None and not str(array).endswith(".txt")
    return ExperimentConfig(
        name=str(values.get("name", name)),
        space=SearchSpace(values["space"]),
        mode=str(values.get("mode", LINEAR)),
        weights=weights,
        array_name=str(array) if bundled else None,
        array_path=None if bundled or array is None else str(array),
        evolution=evo,
        traffic=tuple(values.get("traffic", DEFAULT_TRAFFIC_SWEEP)),
        repetitions=int(values.get("repetitions", 20)),
        master_seed=int(values.get("seed", 2024)),
        fixed_evaluator=bool(values.get("fixed_evaluator", False)),
        curve=str(values.get("curve", "comparison")),
        out_dir=str(values.get("out", "out")),
    )


def get_preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return replace(PRESETS[name], **overrides)
