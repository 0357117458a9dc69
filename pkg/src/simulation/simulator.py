"""Sampling response matrices from a fully specified model."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..data import RawResponses
from ..estimation import conditional_probs
from ..models import ModelSpec, ParameterSet
from ..utils import config, get_logger, settings
from ..utils.errors import SpecValidationError

logger = get_logger(__name__)


@dataclass(frozen=True)
class SimulationPlan:
    """
    What to simulate.

    Attributes:
        spec: model specification
        params: true parameters
        n: number of units
        seed: base seed; blocks draw from spawned child seeds
        missing_rate: probability that a cell is missing, completely at random
        missing_code: sentinel written for missing cells
    """
    spec: ModelSpec
    params: ParameterSet
    n: int
    seed: int = 0
    missing_rate: float = 0.0
    missing_code: int = field(default_factory=lambda: config.missing_code)

    def __post_init__(self):
        if self.n < 1:
            raise SpecValidationError(f"n must be positive, got {self.n}")
        if not 0.0 <= self.missing_rate < 1.0:
            raise SpecValidationError(f"missing_rate must lie in [0, 1), got {self.missing_rate}")
        if self.params.k != self.spec.k:
            raise SpecValidationError(f"params have {self.params.k} classes, spec has {self.spec.k}")


@dataclass(frozen=True)
class SimulatedData:
    """Simulated responses plus the latent class (0-based) of every unit."""
    responses: RawResponses
    classes: np.ndarray

    def truth(self, plan: SimulationPlan) -> dict:
        """JSON-ready ground truth: spec, parameters and 1-based latent classes."""
        return {
            "spec": plan.spec.to_dict(),
            "params": plan.params.to_dict(plan.spec),
            "n": plan.n,
            "seed": plan.seed,
            "missing_rate": plan.missing_rate,
            "classes": (self.classes + 1).tolist(),
        }


def _block(plan: SimulationPlan, cumulative: list, size: int, seed: np.random.SeedSequence):
    rng = np.random.default_rng(seed)
    classes = rng.choice(plan.spec.k, size=size, p=plan.params.pi)
    rows = np.empty((size, plan.spec.r), dtype=np.int64)
    for j, cum in enumerate(cumulative):
        u = rng.random(size)
        rows[:, j] = (u[:, None] > cum[classes]).sum(axis=1)
    if plan.missing_rate > 0:
        rows[rng.random(rows.shape) < plan.missing_rate] = plan.missing_code
    return rows, classes


def simulate(
    plan: SimulationPlan,
    threads: Optional[int] = None,
    block_size: Optional[int] = None,
) -> SimulatedData:
    """
    Draw a class for every unit, then each item response independently
    given the class; identical plans give identical output for any thread
    count.
    """
    threads = settings.threads if threads is None else threads
    block_size = config.block_size if block_size is None else block_size

    probs = conditional_probs(plan.params, plan.spec)
    # cumulative class-by-category thresholds without the final 1
    cumulative = [np.cumsum(probs.item(j), axis=1)[:, :-1] for j in range(plan.spec.r)]

    sizes = [block_size] * (plan.n // block_size)
    if plan.n % block_size:
        sizes.append(plan.n % block_size)
    seeds = np.random.SeedSequence(plan.seed).spawn(len(sizes))

    jobs = list(zip(sizes, seeds))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda job: _block(plan, cumulative, *job), jobs))
    else:
        blocks = [_block(plan, cumulative, *job) for job in jobs]

    rows = np.vstack([b[0] for b in blocks])
    classes = np.concatenate([b[1] for b in blocks])
    logger.debug(f"Simulated {plan.n} units from {plan.spec.label()} in {len(blocks)} block(s)")
    return SimulatedData(
        responses=RawResponses(rows=rows, missing_code=plan.missing_code),
        classes=classes,
    )
