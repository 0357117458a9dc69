"""Hierarchical model-based clustering of items into dimensions."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from tqdm import tqdm

from ..data import ResponseMatrix
from ..estimation import FitResult, StartPolicy, fit
from ..models import Difficulty, Discrimination, LinkKind, ModelSpec, each_item
from ..utils import config, get_logger, settings
from ..utils.errors import DegenerateLikelihoodError, SpecValidationError
from .lr_test import chi2_pvalue

logger = get_logger(__name__)


@dataclass
class ClusterTrace:
    """
    Agglomeration history of the items.

    merge follows the usual hclust convention: row h lists the two clusters
    joined at step h + 1, negative entries are 1-based items and positive
    entries refer to the cluster formed at that (1-based) step.

    Attributes:
        r: number of items
        merge: (r - 1, 2) merge table
        height: deviance of each step's model against the r-dimensional model
        step_deviance: deviance against the previous step's model
        df, step_df: parameter differences matching the two deviances
        p_value, step_p_value: chi-square upper tails of the two deviances
        lk, np: log-likelihood and free parameters of each step's model
        groups: 1-based item groups after each step
        converged: convergence flag of each adopted fit
        lk0, np0: the r-dimensional starting model
        order: 1-based leaf order for plotting
    """
    r: int
    merge: np.ndarray
    height: np.ndarray
    step_deviance: np.ndarray
    df: np.ndarray
    step_df: np.ndarray
    p_value: np.ndarray
    step_p_value: np.ndarray
    lk: np.ndarray
    np: np.ndarray
    groups: list
    converged: list
    lk0: float
    np0: int
    order: list = field(default_factory=list)
    fits: list = field(default_factory=list, repr=False)

    @property
    def steps(self) -> int:
        return self.r - 1

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "merge": self.merge.tolist(),
            "order": list(self.order),
            "height": self.height.tolist(),
            "step_deviance": self.step_deviance.tolist(),
            "df": self.df.tolist(),
            "step_df": self.step_df.tolist(),
            "p_value": self.p_value.tolist(),
            "step_p_value": self.step_p_value.tolist(),
            "lk": self.lk.tolist(),
            "np": self.np.tolist(),
            "lk0": self.lk0,
            "np0": self.np0,
            "groups": self.groups,
            "converged": self.converged,
        }


def leaf_order(merge: np.ndarray) -> list[int]:
    """1-based items in the order a dendrogram draws them."""
    def visit(entry: int) -> list[int]:
        if entry < 0:
            return [-entry]
        a, b = merge[entry - 1]
        return visit(int(a)) + visit(int(b))

    if len(merge) == 0:
        return [1]
    a, b = merge[-1]
    return visit(int(a)) + visit(int(b))


def _merge_entry(id_a: int, id_b: int) -> tuple[int, int]:
    """Items (negative) before clusters; two items by index, two clusters ascending."""
    if id_a < 0 and id_b < 0:
        return tuple(sorted((id_a, id_b), key=abs))
    return (min(id_a, id_b), max(id_a, id_b))


def _partition(groups: list[tuple[int, ...]]) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted((tuple(sorted(g)) for g in groups), key=lambda g: g[0]))


def _try_fit(spec, data, policy, tol, max_iter) -> Optional[FitResult]:
    try:
        return fit(spec, data, policy, tol=tol, max_iter=max_iter, threads=1)
    except DegenerateLikelihoodError as e:
        logger.warning(f"Candidate {spec.label()} skipped: {e}")
        return None


def class_item(
    data: ResponseMatrix,
    k: int,
    link=LinkKind.GLOBAL,
    disc=Discrimination.CONSTRAINED,
    difl=Difficulty.FREE,
    policy: Optional[StartPolicy] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    threads: Optional[int] = None,
    progress: bool = False,
) -> ClusterTrace:
    """
    Agglomerate items from one dimension per item down to a single dimension.

    At each step every pair of current groups is merged in turn and the
    merged model fitted from the current model's parameters plus random
    starts; the pair with the smallest LR statistic against the current
    model is adopted, refitted with the full start policy and becomes the
    next baseline.

    Args:
        data: aggregated responses
        k, link, disc, difl: model choices shared by every fit
        policy: starts of the r-dimensional fit and of each adopted merge
        threads: worker threads for the candidate fits of a step
        progress: show a progress bar on stderr

    Returns:
        ClusterTrace with r - 1 steps
    """
    r = len(data.cats)
    if r < 2:
        raise SpecValidationError("Clustering needs at least two items")
    if LinkKind.parse(link) is LinkKind.NONE:
        raise SpecValidationError("The standard latent class model has no dimensions to cluster")
    policy = policy or StartPolicy()
    threads = settings.threads if threads is None else threads
    spec = ModelSpec.build(k, link, data.cats, disc, difl, each_item(r))

    logger.info(f"Clustering {r} items with k={k}, {spec.link.label} link")
    baseline = fit(spec, data, policy, tol=tol, max_iter=max_iter, threads=threads)
    first = baseline

    groups: list[tuple[int, ...]] = [(j,) for j in range(r)]
    ids = {(j,): -(j + 1) for j in range(r)}

    merge, lk, n_par, history, converged, fits = [], [], [], [], [], []
    for step in tqdm(range(1, r), desc="Clustering", disable=not progress):
        pairs = sorted(combinations(sorted(groups, key=lambda g: g[0]), 2), key=lambda p: (p[0][0], p[1][0]))
        candidates = []
        for a, b in pairs:
            merged = [g for g in groups if g not in (a, b)] + [tuple(sorted(a + b))]
            cand_spec = baseline.spec.with_multi(_partition(merged))
            warm = baseline.params.regroup(baseline.spec, cand_spec)
            inner = StartPolicy(
                deterministic=False,
                n_random=config.cluster_random_starts,
                seed=policy.seed + step,
                extra=[("warm", warm)],
            )
            candidates.append((a, b, cand_spec, warm, inner))

        def run(candidate):
            _, _, cand_spec, _, inner = candidate
            return _try_fit(cand_spec, data, inner, tol, max_iter)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(run, candidates))
        else:
            results = [run(c) for c in candidates]

        best = None
        for candidate, result in zip(candidates, results):
            if result is None:
                continue
            if best is None or result.lk > best[1].lk:
                best = (candidate, result)
        if best is None:
            raise DegenerateLikelihoodError(f"No merge could be fitted at step {step}")

        (a, b, cand_spec, warm, _), inner_fit = best
        refit = _try_fit(cand_spec, data, policy.with_extra("warm", warm), tol, max_iter)
        adopted = refit if refit is not None and refit.lk >= inner_fit.lk else inner_fit

        merge.append(_merge_entry(ids[a], ids[b]))
        groups = [g for g in groups if g not in (a, b)] + [tuple(sorted(a + b))]
        ids[tuple(sorted(a + b))] = step
        lk.append(adopted.lk)
        n_par.append(adopted.np)
        history.append([[j + 1 for j in g] for g in _partition(groups)])
        converged.append(adopted.converged)
        fits.append(adopted)

        logger.info(
            f"Step {step}: merged {[j + 1 for j in a]} + {[j + 1 for j in b]}, "
            f"LR={-2.0 * (adopted.lk - baseline.lk):.4f}"
        )
        baseline = adopted

    lk_arr = np.asarray(lk)
    np_arr = np.asarray(n_par, dtype=np.int64)
    prev_lk = np.concatenate([[first.lk], lk_arr[:-1]])
    prev_np = np.concatenate([[first.np], np_arr[:-1]])
    height = -2.0 * (lk_arr - first.lk)
    step_deviance = -2.0 * (lk_arr - prev_lk)
    df = first.np - np_arr
    step_df = prev_np - np_arr
    merge_arr = np.asarray(merge, dtype=np.int64).reshape(-1, 2)

    return ClusterTrace(
        r=r,
        merge=merge_arr,
        height=height,
        step_deviance=step_deviance,
        df=df,
        step_df=step_df,
        p_value=np.array([chi2_pvalue(d, int(f)) for d, f in zip(height, df)]),
        step_p_value=np.array([chi2_pvalue(d, int(f)) for d, f in zip(step_deviance, step_df)]),
        lk=lk_arr,
        np=np_arr,
        groups=history,
        converged=converged,
        lk0=first.lk,
        np0=first.np,
        order=leaf_order(merge_arr),
        fits=fits,
    )


def suggest_cut(trace: ClusterTrace, alpha: Optional[float] = None) -> int:
    """
    Suggested number of dimensions r - h + 1, h the first step whose
    p-value falls below alpha; 1 when no step rejects.
    """
    alpha = config.alpha if alpha is None else alpha
    for h, p in enumerate(trace.p_value, start=1):
        if p < alpha:
            return trace.r - h + 1
    return 1
