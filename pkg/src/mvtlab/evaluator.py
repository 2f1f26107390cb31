"""Ground-truth conversion-rate models.

A linear evaluator scores a candidate as bias plus one additive weight per
variable; a nonlinear evaluator adds a weight for every pair of chosen
values. Control-valued entries are pinned to zero so the control candidate's
true rate equals the bias exactly.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .genome import Candidate, SearchSpace, control

CR_FLOOR = 0.001
CR_CEIL = 0.999

LINEAR = "linear"
NONLINEAR = "nonlinear"

DEFAULT_BIAS = 0.05
DEFAULT_DELTA_MAIN = 0.01
DEFAULT_DELTA_PAIR = 0.005

DEFAULT_ENUMERATION_CAP = 10**7


class EvaluatorConfigError(ValueError):
    """Raised when weight magnitudes cannot produce a sane landscape."""


@dataclass(frozen=True)
class WeightConfig:
    bias: float = DEFAULT_BIAS
    delta_main: float = DEFAULT_DELTA_MAIN
    delta_pair: float = DEFAULT_DELTA_PAIR


@dataclass(frozen=True)
class Evaluator:
    """Holds the bias, per-variable main-effect table, and (in nonlinear
    mode) the per-variable-pair interaction table."""

    space: SearchSpace
    bias: float
    main_effects: tuple[tuple[float, ...], ...]
    interactions: dict = field(default_factory=dict)  # (j, k) -> 2-d array-like
    mode: str = LINEAR

    def __post_init__(self):
        if self.mode not in (LINEAR, NONLINEAR):
            raise ValueError(f"unknown mode {self.mode!r}")
        for i, (table, k) in enumerate(zip(self.main_effects, self.space.cardinalities)):
            if len(table) != k:
                raise ValueError(f"main-effect table size mismatch at variable {i}")
            if table[0] != 0.0:
                raise ValueError(f"main effect of control value must be 0 (variable {i})")
        if self.mode == LINEAR and self.interactions:
            raise ValueError("linear mode cannot carry interaction weights")

    def true_cr(self, c: Candidate) -> float:
        """Clamped true conversion rate of a candidate."""
        c.validate(self.space)
        cr = self.bias
        for i, v in enumerate(c.choices):
            cr += self.main_effects[i][v]
        if self.mode == NONLINEAR:
            for (j, k), table in self.interactions.items():
                cr += table[c.choices[j]][c.choices[k]]
        return min(max(cr, CR_FLOOR), CR_CEIL)

    def to_json(self) -> str:
        doc = {
            "space": list(self.space.cardinalities),
            "bias": self.bias,
            "mode": self.mode,
            "main_effects": [list(t) for t in self.main_effects],
            "interactions": {
                f"{j},{k}": [list(row) for row in table]
                for (j, k), table in sorted(self.interactions.items())
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Evaluator":
        doc = json.loads(text)
        interactions = {}
        for key, table in doc.get("interactions", {}).items():
            j, k = (int(s) for s in key.split(","))
            interactions[(j, k)] = tuple(tuple(row) for row in table)
        return cls(
            space=SearchSpace(doc["space"]),
            bias=doc["bias"],
            main_effects=tuple(tuple(t) for t in doc["main_effects"]),
            interactions=interactions,
            mode=doc["mode"],
        )


def sample_evaluator(
    space: SearchSpace,
    mode: str = LINEAR,
    magnitudes: WeightConfig | None = None,
    seed: int = 0,
) -> Evaluator:
    """Draw a random landscape: non-control main-effect entries uniform in
    [-delta_main, +delta_main], non-control pair entries (nonlinear mode)
    uniform in [-delta_pair, +delta_pair]. Deterministic given the seed."""
    mag = magnitudes or WeightConfig()
    if not 0.0 < mag.bias < 1.0:
        raise EvaluatorConfigError(f"bias must lie in (0, 1), got {mag.bias}")
    if mag.delta_main <= 0:
        raise EvaluatorConfigError("delta_main must be positive")
    if mag.delta_pair < 0:
        raise EvaluatorConfigError("delta_pair must be non-negative")
    n = len(space)
    n_pairs = n * (n - 1) // 2 if mode == NONLINEAR else 0
    worst = n * mag.delta_main + n_pairs * mag.delta_pair
    # Clamping absorbs rare extremes, but a half-range sum spanning the whole
    # probability interval would make the clamp the landscape.
    if worst >= 1.0:
        raise EvaluatorConfigError(
            f"worst-case weight sum {worst:.3f} exceeds the unit interval"
        )

    rng = np.random.Generator(np.random.PCG64(seed))
    main = []
    for k in space.cardinalities:
        table = rng.uniform(-mag.delta_main, mag.delta_main, size=k)
        table[0] = 0.0
        main.append(tuple(table.tolist()))

    interactions = {}
    if mode == NONLINEAR:
        for j in range(n):
            for k in range(j + 1, n):
                kj, kk = space.cardinalities[j], space.cardinalities[k]
                table = rng.uniform(-mag.delta_pair, mag.delta_pair, size=(kj, kk))
                table[0, :] = 0.0
                table[:, 0] = 0.0
                interactions[(j, k)] = tuple(tuple(row) for row in table.tolist())

    return Evaluator(
        space=space,
        bias=mag.bias,
        main_effects=tuple(main),
        interactions=interactions,
        mode=mode,
    )


def brute_force_best(
    ev: Evaluator,
    space: SearchSpace | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> tuple[Candidate, float]:
    """Exhaustive argmax of true_cr; lexicographically smallest candidate on
    exact ties. Independent oracle for testing the optimizers."""
    space = space or ev.space
    if space.total_combinations > cap:
        raise ValueError(
            f"{space.total_combinations} combinations exceed the enumeration cap {cap}"
        )
    best_c = control(space)
    best_cr = ev.true_cr(best_c)
    for choices in itertools.product(*(range(k) for k in space.cardinalities)):
        c = Candidate(choices)
        cr = ev.true_cr(c)
        if cr > best_cr:
            best_c, best_cr = c, cr
    return best_c, best_cr
