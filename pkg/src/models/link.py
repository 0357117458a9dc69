"""
Link-function algebra for ordinal items.

A link maps the category probabilities lambda (length l) of an item to
l - 1 logits g = C log(M lambda). Global logits compare P(X >= x) with
P(X < x); local logits compare adjacent categories. For l = 2 both reduce
to the ordinary logit.

All functions accept batches: the category axis is the last axis.
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.special import expit, softmax

from ..utils import config
from ..utils.errors import InfeasibleLogitsError, SpecValidationError


class LinkKind(Enum):
    """Type of link; values follow the usual 0/1/2 coding."""
    NONE = 0    # standard latent class model, no IRT parameterization
    GLOBAL = 1  # cumulative logits (graded response models)
    LOCAL = 2   # adjacent-category logits (partial credit models)

    @classmethod
    def parse(cls, value) -> "LinkKind":
        """Accept a LinkKind, its integer code or its name."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().upper()
            if key.isdigit():
                return cls(int(key))
            aliases = {"LC": "NONE", "STANDARD": "NONE", "CUMULATIVE": "GLOBAL", "ADJACENT": "LOCAL"}
            try:
                return cls[aliases.get(key, key)]
            except KeyError:
                raise SpecValidationError(f"Unknown link {value!r}; use none, global or local")
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise SpecValidationError(f"Unknown link {value!r}; use 0, 1 or 2")

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class LinkMatrices:
    """Contrast matrix C ((l-1) x 2(l-1)) and marginalization matrix M (2(l-1) x l)."""
    C: np.ndarray
    M: np.ndarray
    l: int


@lru_cache(maxsize=64)
def link_matrices(l: int, kind: LinkKind) -> LinkMatrices:
    """Build C and M for an item with `l` categories."""
    if kind is LinkKind.NONE:
        raise SpecValidationError("The standard latent class model has no link matrices")
    if l < 2:
        raise SpecValidationError(f"An item needs at least 2 categories, got {l}")

    h = l - 1
    eye = np.eye(h)
    C = np.hstack([-eye, eye])

    M = np.zeros((2 * h, l))
    if kind is LinkKind.GLOBAL:
        tri = np.tril(np.ones((h, h)))
        M[:h, :h] = tri            # P(X < x)
        M[h:, 1:] = tri.T          # P(X >= x)
    else:
        M[:h, :h] = eye            # lambda_{x-1}
        M[h:, 1:] = eye            # lambda_x

    C.setflags(write=False)
    M.setflags(write=False)
    return LinkMatrices(C=C, M=M, l=l)


def _check_probs(lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if (lam <= 0).any():
        raise InfeasibleLogitsError("Category probabilities must be strictly positive")
    if np.abs(lam.sum(axis=-1) - 1.0).max() > 1e-12:
        raise InfeasibleLogitsError("Category probabilities must sum to one")
    return lam


def probs_to_logits(lam: np.ndarray, kind: LinkKind) -> np.ndarray:
    """
    Map probability vectors to logits, g = C log(M lambda).

    Args:
        lam: (..., l) strictly positive probabilities summing to one
        kind: GLOBAL or LOCAL

    Returns:
        (..., l - 1) logits
    """
    lam = _check_probs(lam)
    mats = link_matrices(lam.shape[-1], kind)
    return np.log(lam @ mats.M.T) @ mats.C.T


def logits_to_probs_unchecked(eta: np.ndarray, kind: LinkKind) -> np.ndarray:
    """
    Closed-form inverse of probs_to_logits without the feasibility check.

    Global logits give survival probabilities P(X >= x) = logistic(eta_x);
    if these are not decreasing in x some returned entries are <= 0.
    """
    eta = np.clip(np.asarray(eta, dtype=float), -config.logit_clamp, config.logit_clamp)
    lead = eta.shape[:-1]
    if kind is LinkKind.GLOBAL:
        surv = np.concatenate([np.ones(lead + (1,)), expit(eta), np.zeros(lead + (1,))], axis=-1)
        return surv[..., :-1] - surv[..., 1:]
    if kind is LinkKind.LOCAL:
        canonical = np.concatenate([np.zeros(lead + (1,)), np.cumsum(eta, axis=-1)], axis=-1)
        return softmax(canonical, axis=-1)
    raise SpecValidationError("The standard latent class model has no logits")


def logits_to_probs(eta: np.ndarray, kind: LinkKind) -> np.ndarray:
    """
    Map logits back to category probabilities.

    Raises:
        InfeasibleLogitsError: global logits are not decreasing, so some
            category would get a non-positive probability
    """
    lam = logits_to_probs_unchecked(eta, kind)
    if (lam <= 0).any():
        raise InfeasibleLogitsError("Global logits must be strictly decreasing in the category")
    return lam


def canonical_jacobian(lam: np.ndarray, kind: LinkKind) -> np.ndarray:
    """
    Jacobian dg/dc of the logits with respect to the baseline-category
    canonical parameters c_x = log(lambda_x / lambda_0), x = 1..l-1.
    """
    lam = np.asarray(lam, dtype=float)
    mats = link_matrices(lam.shape[-1], kind)
    cov = covariance(lam)[..., :, 1:]                     # d lambda / d c
    inner = mats.M @ cov                                  # (..., 2h, h)
    inner = inner / (lam @ mats.M.T)[..., :, None]
    return mats.C @ inner


def derivative_matrix(lam: np.ndarray, kind: LinkKind) -> np.ndarray:
    """
    Derivative R = dc/dg of the canonical parameters with respect to the logits.

    Local logits are first differences of the canonical parameters, so R is
    the lower-triangular matrix of ones. Global logits need the inverse of
    the Jacobian dg/dc.

    Args:
        lam: (..., l) strictly positive probabilities
        kind: GLOBAL or LOCAL

    Returns:
        (..., l - 1, l - 1) matrices
    """
    lam = np.asarray(lam, dtype=float)
    h = lam.shape[-1] - 1
    if kind is LinkKind.LOCAL:
        return np.broadcast_to(np.tril(np.ones((h, h))), lam.shape[:-1] + (h, h)).copy()
    if (lam <= 0).any():
        raise InfeasibleLogitsError("Derivative matrix needs strictly positive probabilities")
    return np.linalg.inv(canonical_jacobian(lam, kind))


def covariance(lam: np.ndarray) -> np.ndarray:
    """Multinomial covariance diag(lambda) - lambda lambda' for each vector."""
    lam = np.asarray(lam, dtype=float)
    eye = np.eye(lam.shape[-1])
    return lam[..., :, None] * eye - lam[..., :, None] * lam[..., None, :]
