"""
EM building blocks: conditional probabilities, E-step, M-steps.

The M-step for the IRT models is one or more Fisher-scoring sweeps on the
expected complete log-likelihood; each sweep updates the free
discriminations first and the ability/difficulty vector phi second, halving
a step until the objective does not decrease.
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import logsumexp, xlogy

from ..data import ResponseMatrix
from ..models import (
    DesignMatrices,
    LinkKind,
    ModelSpec,
    ParameterLayout,
    ParameterSet,
    covariance,
    derivative_matrix,
    logits_to_probs,
)
from ..utils import config, get_logger
from ..utils.errors import DegenerateLikelihoodError, InfeasibleLogitsError

logger = get_logger(__name__)

TINY = 1e-300


@dataclass(frozen=True)
class ConditionalProbs:
    """
    Class-conditional response probabilities.

    Attributes:
        phi: (r, max_l, k) array, phi[j, x, c] = p(X_j = x | class c); NaN past l_j
        cats: category counts l_j
    """
    phi: np.ndarray
    cats: tuple[int, ...]

    def item(self, j: int) -> np.ndarray:
        """(k, l_j) probabilities of item j."""
        return self.phi[j, : self.cats[j], :].T

    def to_list(self) -> list:
        """Nested lists [class][item][category]."""
        k = self.phi.shape[2]
        return [[self.phi[j, :l, c].tolist() for j, l in enumerate(self.cats)] for c in range(k)]


@dataclass(frozen=True)
class ExpectedCounts:
    """
    Expected frequencies from the E-step.

    Attributes:
        m_hat: (m, k) expected pattern-by-class frequencies
        posterior: (m, k) posterior class probabilities of each pattern
        m_c: (k,) expected class totals
        m_cj: per item, (k, l_j) expected category counts among observed responses
        n_cj: (k, r) expected class totals restricted to units observed on item j
        loglik: log-likelihood of the parameters that produced these counts
    """
    m_hat: np.ndarray
    posterior: np.ndarray
    m_c: np.ndarray
    m_cj: list
    n_cj: np.ndarray
    loglik: float


def item_probs(params: ParameterSet, spec: ModelSpec, j: int) -> np.ndarray:
    """(k, l_j) category probabilities of item j in every class."""
    l = spec.cats[j]
    if spec.is_standard_lc:
        return params.probs[j, :l, :].T
    d = spec.dimension_of[j]
    difficulty = params.beta[j] + params.tau[: l - 1] if spec.rating_scale else params.beta[j, : l - 1]
    eta = params.gamma[j] * (params.xi[:, d][:, None] - difficulty[None, :])
    return logits_to_probs(eta, spec.link)


def conditional_probs(params: ParameterSet, spec: ModelSpec) -> ConditionalProbs:
    """
    Evaluate p(X_j = x | class c) for every item, category and class.

    Raises:
        InfeasibleLogitsError: global logits of some item are not decreasing
    """
    phi = np.full((spec.r, max(spec.cats), spec.k), np.nan)
    for j, l in enumerate(spec.cats):
        phi[j, :l, :] = item_probs(params, spec, j).T
    return ConditionalProbs(phi=phi, cats=spec.cats)


def pattern_log_probs(probs: ConditionalProbs, data: ResponseMatrix) -> np.ndarray:
    """(m, k) log p(x | c), skipping missing responses."""
    k = probs.phi.shape[2]
    out = np.zeros((data.m, k))
    for j in range(data.r):
        rows = np.flatnonzero(data.observed[:, j])
        out[rows] += np.log(np.maximum(probs.phi[j, data.patterns[rows, j], :], TINY))
    return out


def _joint(params: ParameterSet, probs: ConditionalProbs, data: ResponseMatrix) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_pi = np.log(params.pi)
    return pattern_log_probs(probs, data) + log_pi[None, :]


def _manifest(joint: np.ndarray) -> np.ndarray:
    log_px = logsumexp(joint, axis=1)
    if not np.isfinite(log_px).all():
        bad = int(np.flatnonzero(~np.isfinite(log_px))[0])
        raise DegenerateLikelihoodError(f"Response pattern {bad + 1} has zero manifest probability")
    return log_px


def log_likelihood(params: ParameterSet, spec: ModelSpec, data: ResponseMatrix) -> float:
    """Observed-data log-likelihood sum_x n_x log p(x)."""
    joint = _joint(params, conditional_probs(params, spec), data)
    return float(data.freq @ _manifest(joint))


def e_step(params: ParameterSet, spec: ModelSpec, data: ResponseMatrix) -> ExpectedCounts:
    """
    Posterior class probabilities and expected frequencies given the data.

    Raises:
        DegenerateLikelihoodError: a pattern has zero probability under every class
    """
    joint = _joint(params, conditional_probs(params, spec), data)
    log_px = _manifest(joint)
    posterior = np.exp(joint - log_px[:, None])
    m_hat = data.freq[:, None] * posterior

    m_cj = [m_hat.T @ data.indicators(j) for j in range(data.r)]
    n_cj = np.stack([counts.sum(axis=1) for counts in m_cj], axis=1)
    return ExpectedCounts(
        m_hat=m_hat,
        posterior=posterior,
        m_c=m_hat.sum(axis=0),
        m_cj=m_cj,
        n_cj=n_cj,
        loglik=float(data.freq @ log_px),
    )


def m_step_pi(counts: ExpectedCounts) -> np.ndarray:
    """Closed-form class weights m_c / n."""
    return counts.m_c / counts.m_c.sum()


def m_step_lc(params: ParameterSet, spec: ModelSpec, counts: ExpectedCounts) -> ParameterSet:
    """Closed-form update of the standard LC model: weighted category proportions."""
    probs = params.probs.copy()
    for j, l in enumerate(spec.cats):
        total = counts.n_cj[:, j]
        for c in np.flatnonzero(total > 0):
            probs[j, :l, c] = counts.m_cj[j][c] / total[c]
    return replace(params, probs=probs)


def expected_complete_loglik(params: ParameterSet, spec: ModelSpec, counts: ExpectedCounts) -> float:
    """Item part of the expected complete log-likelihood, sum_c sum_j m_cj' log lambda_cj."""
    total = 0.0
    for j in range(spec.r):
        total += float(xlogy(counts.m_cj[j], item_probs(params, spec, j)).sum())
    return total


class FisherScoring:
    """
    Fisher scoring on the expected complete log-likelihood of an IRT model.

    Holds the design matrices of one spec; not shared across threads.
    """

    def __init__(self, spec: ModelSpec, max_halvings: Optional[int] = None, ridge: Optional[float] = None):
        self.spec = spec
        self.layout = ParameterLayout(spec)
        self.design = DesignMatrices(spec, self.layout)
        self.max_halvings = config.max_halvings if max_halvings is None else max_halvings
        self.ridge = config.ridge if ridge is None else ridge
        self.ridge_warned = False
        self.halving_warned = False

    # --- per-item quantities -------------------------------------------------

    def _terms(self, j: int, phi: np.ndarray, gamma: np.ndarray, counts: ExpectedCounts):
        Z = self.design[j]                       # (k, h, n_phi)
        A = Z @ phi                              # (k, h)
        lam = logits_to_probs(gamma[j] * A, self.spec.link)
        R = derivative_matrix(lam, self.spec.link)
        n = counts.n_cj[:, j]
        resid = (counts.m_cj[j] - n[:, None] * lam)[:, 1:]
        V = covariance(lam)[:, 1:, 1:]
        return Z, A, R, resid, V, n

    def objective(self, phi: np.ndarray, gamma: np.ndarray, counts: ExpectedCounts) -> float:
        """Expected complete log-likelihood at (phi, gamma); -inf at infeasible points."""
        total = 0.0
        try:
            for j in range(self.spec.r):
                A = self.design[j] @ phi
                lam = logits_to_probs(gamma[j] * A, self.spec.link)
                total += float(xlogy(counts.m_cj[j], lam).sum())
        except InfeasibleLogitsError:
            return -np.inf
        return total

    def gamma_scores(self, phi: np.ndarray, gamma: np.ndarray, counts: ExpectedCounts):
        """
        Score and information of every discrimination.

        Returns:
            (s, f): arrays of length r with s_j = sum_c A' R' resid and
            f_j = sum_c n_cj A' R' V R A, where A = Z_cj phi
        """
        r = self.spec.r
        s, f = np.zeros(r), np.zeros(r)
        for j in range(r):
            _, A, R, resid, V, n = self._terms(j, phi, gamma, counts)
            RA = np.einsum("kab,kb->ka", R, A)
            s[j] = np.einsum("ka,ka->", RA, resid)
            f[j] = np.einsum("k,ka,kab,kb->", n, RA, V, RA)
        return s, f

    def phi_scores(self, phi: np.ndarray, gamma: np.ndarray, counts: ExpectedCounts):
        """
        Score vector and information matrix of phi.

        Returns:
            (s2, F2) with s2 = sum gamma_j Z' R' resid and
            F2 = sum n_cj gamma_j^2 Z' R' V R Z over classes and items
        """
        p = self.layout.n_phi
        s2, F2 = np.zeros(p), np.zeros((p, p))
        for j in range(self.spec.r):
            Z, _, R, resid, V, n = self._terms(j, phi, gamma, counts)
            RZ = np.einsum("kab,kbp->kap", R, Z)
            s2 += gamma[j] * np.einsum("kap,ka->p", RZ, resid)
            F2 += gamma[j] ** 2 * np.einsum("k,kap,kab,kbq->pq", n, RZ, V, RZ)
        return s2, F2

    # --- steps ---------------------------------------------------------------

    def _halve(self, current: float, trial) -> Optional[np.ndarray]:
        step = 1.0
        for _ in range(self.max_halvings + 1):
            value, point = trial(step)
            if value >= current:
                return point
            step /= 2.0
        if not self.halving_warned:
            logger.warning(f"Step halving exhausted for {self.spec.label()}; keeping the previous value")
            self.halving_warned = True
        return None

    def _solve(self, F2: np.ndarray, s2: np.ndarray) -> np.ndarray:
        size = F2.shape[0]
        if np.linalg.cond(F2) > 1e12:
            if not self.ridge_warned:
                logger.warning(f"Information matrix of phi is near-singular for {self.spec.label()}; adding a ridge")
                self.ridge_warned = True
            scale = np.trace(F2) / size or 1.0
            F2 = F2 + self.ridge * scale * np.eye(size)
        return np.linalg.lstsq(F2, s2, rcond=None)[0]

    def gamma_step(self, phi, gamma_free, counts: ExpectedCounts) -> np.ndarray:
        lay = self.layout
        if lay.n_gamma == 0:
            return gamma_free
        gamma = lay.gamma_full(gamma_free)
        current = self.objective(phi, gamma, counts)
        s, f = self.gamma_scores(phi, gamma, counts)
        free = lay.gamma_index >= 0
        delta = np.zeros(lay.n_gamma)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(f > 0, s / f, 0.0)
        delta[lay.gamma_index[free]] = ratio[free]

        def trial(step):
            candidate = gamma_free + step * delta
            return self.objective(phi, lay.gamma_full(candidate), counts), candidate

        accepted = self._halve(current, trial)
        return gamma_free if accepted is None else accepted

    def phi_step(self, phi, gamma_free, counts: ExpectedCounts) -> np.ndarray:
        gamma = self.layout.gamma_full(gamma_free)
        current = self.objective(phi, gamma, counts)
        s2, F2 = self.phi_scores(phi, gamma, counts)
        delta = self._solve(F2, s2)

        def trial(step):
            candidate = phi + step * delta
            return self.objective(candidate, gamma, counts), candidate

        accepted = self._halve(current, trial)
        return phi if accepted is None else accepted

    def sweep(self, params: ParameterSet, counts: ExpectedCounts, sweeps: int = 1) -> ParameterSet:
        """Run `sweeps` passes of (gamma step, phi step); class weights are carried over."""
        packed = self.layout.pack(params)
        phi, gamma_free = packed.phi, packed.gamma_free
        for _ in range(sweeps):
            gamma_free = self.gamma_step(phi, gamma_free, counts)
            phi = self.phi_step(phi, gamma_free, counts)
        return self.layout.unpack(phi, gamma_free, params.pi)


def m_step_fisher(
    params: ParameterSet,
    spec: ModelSpec,
    counts: ExpectedCounts,
    scorer: Optional[FisherScoring] = None,
    sweeps: Optional[int] = None,
) -> ParameterSet:
    """
    Update discriminations and the ability/difficulty vector by Fisher scoring.

    Args:
        params: current parameters (class weights are kept as given)
        spec: model specification, link GLOBAL or LOCAL
        counts: expected counts of the current E-step
        scorer: reusable FisherScoring for the spec
        sweeps: Fisher sweeps; defaults to config estimation.fisher_sweeps

    Returns:
        Parameters whose expected complete log-likelihood is not lower
    """
    if spec.link is LinkKind.NONE:
        return m_step_lc(params, spec, counts)
    scorer = scorer or FisherScoring(spec)
    return scorer.sweep(params, counts, config.fisher_sweeps if sweeps is None else sweeps)
