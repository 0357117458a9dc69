"""Starting values: a deterministic rule and seeded random starts."""
import numpy as np
from scipy.stats import norm

from ..data import ResponseMatrix
from ..utils import get_logger
from .link import LinkKind, logits_to_probs, probs_to_logits
from .params import ParameterSet
from .spec import ModelSpec

logger = get_logger(__name__)

DIFFICULTY_NOISE = 0.5
DISCRIMINATION_NOISE = 0.2
MIN_DISCRIMINATION = 0.1


def marginal_probs(data: ResponseMatrix, j: int, pseudo: float = 0.5) -> np.ndarray:
    """Observed category proportions of item j, smoothed by a pseudo-count."""
    counts = data.freq @ data.indicators(j) + pseudo
    return counts / counts.sum()


def _marginal_difficulties(spec: ModelSpec, data: ResponseMatrix) -> np.ndarray:
    """beta_jx = -g_x(marginal proportions), NaN past l_j - 1."""
    kind = LinkKind.GLOBAL if spec.is_standard_lc else spec.link
    beta = np.full((spec.r, max(spec.cats) - 1), np.nan)
    for j, l in enumerate(spec.cats):
        beta[j, : l - 1] = -probs_to_logits(marginal_probs(data, j), kind)
    return beta


def _support_quantiles(k: int) -> np.ndarray:
    return norm.ppf((2 * np.arange(1, k + 1) - 1) / (2 * k))


def _lc_profiles(spec: ModelSpec, xi: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Class-conditional probabilities of a global-logit model at xi; LC starting profiles."""
    probs = np.full((spec.r, max(spec.cats), spec.k), np.nan)
    for j, l in enumerate(spec.cats):
        eta = xi[:, None] - beta[j, : l - 1][None, :]
        probs[j, :l, :] = logits_to_probs(eta, LinkKind.GLOBAL).T
    return probs


def _to_rating_scale(beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    location = np.nanmean(beta, axis=1)
    steps = np.nanmean(beta - location[:, None], axis=0)
    return location, steps


def deterministic_start(spec: ModelSpec, data: ResponseMatrix) -> ParameterSet:
    """
    Deterministic starting values.

    Equal class weights, support points at the standard-normal quantiles
    of (2c - 1) / (2k) on every dimension, unit discriminations and
    difficulties from the observed marginal logits of each item, shifted
    per dimension so that the reference constraints hold.
    """
    k = spec.k
    pi = np.full(k, 1.0 / k)
    points = _support_quantiles(k)
    beta = _marginal_difficulties(spec, data)

    if spec.is_standard_lc:
        return ParameterSet(pi=pi, probs=_lc_profiles(spec, points, beta))

    xi = np.repeat(points[:, None], spec.s, axis=1)
    gamma = np.ones(spec.r)
    if spec.rating_scale:
        location, steps = _to_rating_scale(beta)
        location += steps[0]
        steps -= steps[0]
        for group in spec.multi:
            location[list(group)] -= location[group[0]]
        return ParameterSet(pi=pi, xi=xi, beta=location, tau=steps, gamma=gamma)

    for group in spec.multi:
        beta[list(group)] -= beta[group[0], 0]
    return ParameterSet(pi=pi, xi=xi, beta=beta, gamma=gamma)


def random_start(spec: ModelSpec, data: ResponseMatrix, seed: int) -> ParameterSet:
    """
    Random starting values, reproducible for a fixed seed.

    Support points are standard normal, weights normalized uniforms,
    difficulties the deterministic ones plus N(0, 0.5^2) noise (kept
    ordered under global logits) and free discriminations 1 + N(0, 0.2^2)
    truncated below at 0.1.
    """
    rng = np.random.default_rng(seed)
    k = spec.k
    u = 1.0 - rng.uniform(size=k)
    pi = u / u.sum()

    if spec.is_standard_lc:
        raw = 1.0 - rng.uniform(size=(spec.r, max(spec.cats), k))
        for j, l in enumerate(spec.cats):
            raw[j, l:, :] = np.nan
        probs = raw / np.nansum(raw, axis=1, keepdims=True)
        return ParameterSet(pi=pi, probs=probs)

    xi = rng.standard_normal((k, spec.s))
    base = deterministic_start(spec, data)
    gamma = np.ones(spec.r)
    if spec.free_disc:
        gamma = np.maximum(1.0 + DISCRIMINATION_NOISE * rng.standard_normal(spec.r), MIN_DISCRIMINATION)

    ordered = spec.link is LinkKind.GLOBAL
    if spec.rating_scale:
        location = base.beta + DIFFICULTY_NOISE * rng.standard_normal(spec.r)
        steps = base.tau + DIFFICULTY_NOISE * rng.standard_normal(spec.l - 1)
        if ordered:
            steps = np.sort(steps)
        params = ParameterSet(pi=pi, xi=xi, beta=location, tau=steps, gamma=gamma)
    else:
        beta = base.beta + DIFFICULTY_NOISE * rng.standard_normal(base.beta.shape)
        if ordered:
            # NaN padding sorts last, so valid entries stay in front
            beta = np.sort(beta, axis=1)
        params = ParameterSet(pi=pi, xi=xi, beta=beta, gamma=gamma)

    logger.debug(f"Random start seed={seed} for {spec.label()}")
    return params.normalize(spec)
