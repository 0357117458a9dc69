"""Multi-start EM fitting of latent-class IRT and standard LC models."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ..data import ResponseMatrix
from ..models import (
    ModelSpec,
    ParameterSet,
    count_free_params,
    deterministic_start,
    random_start,
)
from ..utils import config, get_logger, log_fit, settings
from ..utils.errors import DegenerateLikelihoodError, InfeasibleLogitsError, SpecValidationError
from .em import (
    ConditionalProbs,
    FisherScoring,
    conditional_probs,
    e_step,
    m_step_fisher,
    m_step_pi,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class StartPoint:
    """One starting value: a label, the seed that produced it (if any) and the parameters."""
    label: str
    params: ParameterSet
    seed: Optional[int] = None


@dataclass
class StartPolicy:
    """
    Which starting values to try.

    Attributes:
        deterministic: include the deterministic start
        n_random: number of random starts, seeded seed, seed + 1, ...
        seed: base seed of the random starts
        seeds: explicit seeds, overriding n_random/seed
        params: user-supplied start values
        extra: additional labelled starts (warm starts)
    """
    deterministic: bool = True
    n_random: int = 0
    seed: int = 0
    seeds: Optional[Sequence[int]] = None
    params: Optional[ParameterSet] = None
    extra: list = field(default_factory=list)

    @classmethod
    def from_mode(
        cls,
        start: int = 0,
        n_random: Optional[int] = None,
        seed: Optional[int] = None,
        params: Optional[ParameterSet] = None,
    ) -> "StartPolicy":
        """
        Build a policy from the 0/1/2 start coding.

        0: deterministic start plus `n_random` random starts
        1: random starts only (at least one)
        2: user-supplied parameters
        """
        n_random = config.n_random if n_random is None else n_random
        seed = config.seed if seed is None else seed
        if start == 0:
            return cls(deterministic=True, n_random=n_random, seed=seed)
        if start == 1:
            return cls(deterministic=False, n_random=max(n_random, 1), seed=seed)
        if start == 2:
            if params is None:
                raise SpecValidationError("start=2 needs user-supplied parameters")
            return cls(deterministic=False, n_random=n_random, seed=seed, params=params)
        raise SpecValidationError(f"Unknown start mode {start}; use 0, 1 or 2")

    @property
    def random_seeds(self) -> list[int]:
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        return [self.seed + i for i in range(self.n_random)]

    def with_extra(self, label: str, params: ParameterSet) -> "StartPolicy":
        return StartPolicy(
            deterministic=self.deterministic,
            n_random=self.n_random,
            seed=self.seed,
            seeds=self.seeds,
            params=self.params,
            extra=[*self.extra, (label, params)],
        )

    def starts(self, spec: ModelSpec, data: ResponseMatrix) -> list[StartPoint]:
        """Starting values in tie-break order: fixed starts first, then seeds ascending."""
        out = []
        if self.params is not None:
            out.append(StartPoint("user", self.params.normalize(spec)))
        for label, params in self.extra:
            out.append(StartPoint(label, params.normalize(spec)))
        if self.deterministic:
            out.append(StartPoint("deterministic", deterministic_start(spec, data)))
        for seed in sorted(self.random_seeds):
            out.append(StartPoint(f"seed={seed}", random_start(spec, data, seed), seed))
        if not out:
            raise SpecValidationError("The start policy produces no starting values")
        return out


@dataclass
class FitResult:
    """Result of a (multi-start) fit."""
    spec: ModelSpec
    params: ParameterSet
    lk: float
    np: int
    n: int
    phi: ConditionalProbs
    pp: np.ndarray
    iterations: int
    converged: bool
    start: str
    trace: list = field(default_factory=list)
    starts: list = field(default_factory=list)
    degenerate: list = field(default_factory=list)

    @property
    def aic(self) -> float:
        return -2.0 * self.lk + 2.0 * self.np

    @property
    def bic(self) -> float:
        return -2.0 * self.lk + np.log(self.n) * self.np

    @property
    def k(self) -> int:
        return self.spec.k

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "lk": self.lk,
            "np": self.np,
            "n": self.n,
            "aic": self.aic,
            "bic": self.bic,
            "iterations": self.iterations,
            "converged": self.converged,
            "start": self.start,
            "degenerate_classes": [c + 1 for c in self.degenerate],
            "params": self.params.to_dict(self.spec),
            "phi": self.phi.to_list(),
            "pp": self.pp.tolist(),
            "trace": list(self.trace),
            "starts": list(self.starts),
        }

    def summary(self) -> str:
        lines = [
            f"Model:       {self.spec.label()}",
            f"Items:       {self.spec.r}   Units: {self.n}",
            f"Log-lik:     {self.lk:.4f}",
            f"Parameters:  {self.np}",
            f"AIC:         {self.aic:.3f}",
            f"BIC:         {self.bic:.3f}",
            f"Iterations:  {self.iterations} ({'converged' if self.converged else 'NOT converged'})",
            f"Best start:  {self.start}",
            "",
            "Class  Weight   " + ("Support points" if not self.spec.is_standard_lc else ""),
        ]
        for c in range(self.k):
            row = f"{c + 1:>5}  {self.params.pi[c]:.4f}"
            if not self.spec.is_standard_lc:
                row += "   " + " ".join(f"{v:8.4f}" for v in self.params.xi[c])
            lines.append(row)
        if self.degenerate:
            lines.append(f"Degenerate classes: {[c + 1 for c in self.degenerate]}")
        return "\n".join(lines)


@dataclass
class _Run:
    start: StartPoint
    params: ParameterSet
    lk: float
    iterations: int
    converged: bool
    trace: list


def _class_order(params: ParameterSet, spec: ModelSpec) -> np.ndarray:
    """Ascending first-dimension support point; expected total score for the LC model."""
    if spec.is_standard_lc:
        scores = np.zeros(spec.k)
        for j, l in enumerate(spec.cats):
            scores += np.arange(l) @ params.probs[j, :l, :]
        return np.argsort(scores, kind="stable")
    return np.argsort(params.xi[:, 0], kind="stable")


def run_em(
    spec: ModelSpec,
    data: ResponseMatrix,
    start: StartPoint,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    sweeps: Optional[int] = None,
) -> _Run:
    """EM from a single start; the log-likelihood sequence is non-decreasing."""
    tol = config.tol if tol is None else tol
    max_iter = config.max_iter if max_iter is None else max_iter
    scorer = None if spec.is_standard_lc else FisherScoring(spec)

    params = start.params
    counts = e_step(params, spec, data)
    lk = counts.loglik
    trace = [lk]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        params = replace(params, pi=m_step_pi(counts))
        params = m_step_fisher(params, spec, counts, scorer=scorer, sweeps=sweeps)
        counts = e_step(params, spec, data)
        new_lk = counts.loglik
        trace.append(new_lk)
        change = abs(new_lk - lk) / max(abs(lk), 1e-300)
        lk = new_lk
        if it % 100 == 0:
            logger.debug(f"{spec.label()} [{start.label}] iteration {it}: lk={lk:.6f}")
        if change < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"{spec.label()} [{start.label}] did not converge in {max_iter} iterations")
    return _Run(start=start, params=params, lk=lk, iterations=it, converged=converged, trace=trace)


def _safe_run(spec, data, start, tol, max_iter, sweeps) -> Optional[_Run]:
    try:
        return run_em(spec, data, start, tol=tol, max_iter=max_iter, sweeps=sweeps)
    except (InfeasibleLogitsError, DegenerateLikelihoodError) as e:
        logger.warning(f"{spec.label()} [{start.label}] abandoned: {e}")
        return None


def fit(
    spec: ModelSpec,
    data: ResponseMatrix,
    policy: Optional[StartPolicy] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    threads: Optional[int] = None,
    sweeps: Optional[int] = None,
) -> FitResult:
    """
    Maximum-likelihood fit by EM over every start of the policy.

    Args:
        spec: model specification
        data: aggregated responses
        policy: starting values (deterministic start when omitted)
        tol: relative log-likelihood change declaring convergence
        max_iter: iteration cap per start
        threads: worker threads for independent starts
        sweeps: Fisher-scoring sweeps per EM iteration

    Returns:
        FitResult of the start with the largest log-likelihood; ties go to
        the earliest start (fixed starts, then lowest seed)
    """
    if tuple(data.cats) != tuple(spec.cats):
        raise SpecValidationError(f"Spec has categories {list(spec.cats)}, data has {list(data.cats)}")
    policy = policy or StartPolicy()
    threads = settings.threads if threads is None else threads
    starts = policy.starts(spec, data)

    logger.info(f"Fitting {spec.label()} on {data.n} units with {len(starts)} start(s)")
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(lambda s: _safe_run(spec, data, s, tol, max_iter, sweeps), starts))
    else:
        runs = [_safe_run(spec, data, s, tol, max_iter, sweeps) for s in starts]

    table = [
        {
            "start": s.label,
            "seed": s.seed,
            "lk": None if run is None else run.lk,
            "iterations": None if run is None else run.iterations,
            "converged": False if run is None else run.converged,
        }
        for s, run in zip(starts, runs)
    ]
    valid = [(i, run) for i, run in enumerate(runs) if run is not None]
    if not valid:
        raise DegenerateLikelihoodError(f"Every start of {spec.label()} failed")
    _, best = max(valid, key=lambda item: (item[1].lk, -item[0]))

    params = best.params.permute_classes(_class_order(best.params, spec))
    counts = e_step(params, spec, data)
    degenerate = [int(c) for c in np.flatnonzero(params.pi < config.degenerate_weight)]
    if degenerate:
        logger.warning(f"{spec.label()}: degenerate classes {[c + 1 for c in degenerate]}")

    result = FitResult(
        spec=spec,
        params=params,
        lk=best.lk,
        np=count_free_params(spec),
        n=data.n,
        phi=conditional_probs(params, spec),
        pp=counts.posterior,
        iterations=best.iterations,
        converged=best.converged,
        start=best.start.label,
        trace=best.trace,
        starts=table,
        degenerate=degenerate,
    )
    log_fit(
        f"{spec.label()} lk={result.lk:.4f} np={result.np} bic={result.bic:.3f} "
        f"iterations={result.iterations} converged={result.converged} start={result.start}"
    )
    return result


def posterior_memberships(result: FitResult, data: ResponseMatrix) -> np.ndarray:
    """(m, k) posterior class probabilities of each response pattern."""
    return e_step(result.params, result.spec, data).posterior
