"""Parameter sets, identifiability constraints and packing into (phi, gamma)."""
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..utils.errors import SpecValidationError
from .spec import ModelSpec


@dataclass(frozen=True)
class ParameterSet:
    """
    Parameters of a latent-class IRT model (or of a standard LC model).

    Attributes:
        pi: (k,) class weights
        xi: (k, s) support points, None for the standard LC model
        beta: free difficulties (r, max_l - 1), NaN past l_j - 1; or item
            locations (r,) under a rating scale; None for the LC model
        tau: (l - 1,) category steps under a rating scale, tau[0] = 0
        gamma: (r,) discriminations, None for the LC model
        probs: (r, max_l, k) class-conditional probabilities of the standard
            LC model, NaN past l_j
    """
    pi: np.ndarray
    xi: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    tau: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return self.pi.shape[0]

    @property
    def is_standard_lc(self) -> bool:
        return self.probs is not None

    def copy(self) -> "ParameterSet":
        def _c(a):
            return None if a is None else np.array(a, dtype=float, copy=True)
        return ParameterSet(
            pi=_c(self.pi), xi=_c(self.xi), beta=_c(self.beta),
            tau=_c(self.tau), gamma=_c(self.gamma), probs=_c(self.probs),
        )

    def permute_classes(self, order: np.ndarray) -> "ParameterSet":
        """Reorder latent classes; order[i] is the old index of new class i."""
        return replace(
            self,
            pi=self.pi[order],
            xi=None if self.xi is None else self.xi[order],
            probs=None if self.probs is None else self.probs[:, :, order],
        )

    def difficulty_table(self, spec: ModelSpec) -> np.ndarray:
        """(r, max_l - 1) table of beta_jx, combining beta_j + tau_x under a rating scale."""
        if spec.rating_scale:
            return self.beta[:, None] + self.tau[None, :]
        return self.beta

    def normalize(self, spec: ModelSpec) -> "ParameterSet":
        """
        Re-impose the identifiability constraints without changing the model.

        Each dimension is shifted so that its reference item has zero
        difficulty and, with free discriminations and free difficulties,
        rescaled so that the reference item has unit discrimination. Under a
        rating scale the steps are shifted so that tau[0] = 0 and the
        reference discrimination is set to one directly, since the shared
        steps cannot be rescaled per dimension.
        """
        out = self.copy()
        out = replace(out, pi=np.clip(out.pi, 0.0, None) / np.clip(out.pi, 0.0, None).sum())
        if spec.is_standard_lc:
            probs = out.probs / np.nansum(out.probs, axis=1, keepdims=True)
            return replace(out, probs=probs)

        xi, beta, gamma = out.xi, out.beta, out.gamma
        tau = out.tau
        if spec.rating_scale:
            beta += tau[0]
            tau -= tau[0]

        for d, group in enumerate(spec.multi):
            ref = group[0]
            b = beta[ref] if spec.rating_scale else beta[ref, 0]
            a = 1.0
            if spec.free_disc and not spec.rating_scale and gamma[ref] > 1e-8:
                a = gamma[ref]
            idx = list(group)
            xi[:, d] = a * (xi[:, d] - b)
            beta[idx] = a * (beta[idx] - b)
            gamma[idx] = gamma[idx] / a
            gamma[ref] = 1.0
            if spec.rating_scale:
                beta[ref] = 0.0
            else:
                beta[ref, 0] = 0.0

        if not spec.free_disc:
            gamma[:] = 1.0
        return replace(out, xi=xi, beta=beta, tau=tau, gamma=gamma)

    def regroup(self, source: ModelSpec, target: ModelSpec) -> "ParameterSet":
        """
        Carry the parameters of `source` over to the dimension structure of `target`.

        Each target dimension takes the average support points of the source
        dimensions its items belong to; item parameters are kept. When every
        target group lies inside one source group the result describes the
        same distribution as the input.
        """
        if self.is_standard_lc:
            return self.copy()
        dims = source.dimension_of
        xi = np.column_stack([
            self.xi[:, sorted({int(dims[j]) for j in group})].mean(axis=1)
            for group in target.multi
        ])
        return replace(self.copy(), xi=xi).normalize(target)

    def to_dict(self, spec: ModelSpec) -> dict:
        """JSON-ready parameter blocks; items and reference items are 1-based."""
        payload = {"weights": self.pi.tolist()}
        if self.is_standard_lc:
            payload["probs"] = [
                [self.probs[j, :l, c].tolist() for j, l in enumerate(spec.cats)]
                for c in range(self.k)
            ]
            return payload
        payload["support_points"] = self.xi.tolist()
        if spec.rating_scale:
            payload["difficulties"] = self.beta.tolist()
            payload["category_steps"] = self.tau.tolist()
        else:
            payload["difficulties"] = [self.beta[j, : l - 1].tolist() for j, l in enumerate(spec.cats)]
        payload["discriminations"] = self.gamma.tolist()
        payload["reference_items"] = [j + 1 for j in spec.reference_items]
        return payload

    @classmethod
    def from_dict(cls, payload: dict, spec: ModelSpec) -> "ParameterSet":
        """Inverse of to_dict; constraints are re-imposed with normalize."""
        pi = np.asarray(payload["weights"], dtype=float)
        if pi.shape != (spec.k,):
            raise SpecValidationError(f"weights must have {spec.k} entries")
        max_l = max(spec.cats)
        if spec.is_standard_lc:
            probs = np.full((spec.r, max_l, spec.k), np.nan)
            for c, per_class in enumerate(payload["probs"]):
                for j, row in enumerate(per_class):
                    probs[j, : spec.cats[j], c] = row
            return cls(pi=pi, probs=probs).normalize(spec)

        xi = np.asarray(payload["support_points"], dtype=float).reshape(spec.k, spec.s)
        gamma = np.asarray(payload.get("discriminations") or np.ones(spec.r), dtype=float)
        if spec.rating_scale:
            beta = np.asarray(payload["difficulties"], dtype=float).reshape(spec.r)
            tau = np.asarray(payload["category_steps"], dtype=float).reshape(spec.l - 1)
        else:
            beta = np.full((spec.r, max_l - 1), np.nan)
            for j, row in enumerate(payload["difficulties"]):
                if len(row) != spec.cats[j] - 1:
                    raise SpecValidationError(f"item {j + 1} needs {spec.cats[j] - 1} difficulties")
                beta[j, : len(row)] = row
            tau = None
        return cls(pi=pi, xi=xi, beta=beta, tau=tau, gamma=gamma).normalize(spec)


@dataclass(frozen=True)
class PackedParams:
    """Free parameters as flat vectors: phi (abilities + difficulties) and gamma_free."""
    phi: np.ndarray
    gamma_free: np.ndarray
    layout: "ParameterLayout"


@dataclass
class ParameterLayout:
    """
    Positions of the free parameters inside phi and gamma_free.

    phi lists xi_11..xi_1s, ..., xi_ks, then either the free beta_jx
    (item-major, beta_{j_d,1} removed) or the free beta_j followed by
    tau_2..tau_{l-1}. Index arrays hold -1 for constrained entries.
    """
    spec: ModelSpec
    xi_index: np.ndarray = field(init=False)
    beta_index: np.ndarray = field(init=False)
    tau_index: Optional[np.ndarray] = field(init=False)
    gamma_index: np.ndarray = field(init=False)
    n_phi: int = field(init=False)
    n_gamma: int = field(init=False)

    def __post_init__(self):
        spec = self.spec
        if spec.is_standard_lc:
            raise SpecValidationError("The standard latent class model has no phi layout")
        k, s, r = spec.k, spec.s, spec.r
        refs = set(spec.reference_items)

        self.xi_index = np.arange(k * s).reshape(k, s)
        pos = k * s

        if spec.rating_scale:
            self.beta_index = np.full(r, -1, dtype=np.int64)
            for j in range(r):
                if j not in refs:
                    self.beta_index[j] = pos
                    pos += 1
            self.tau_index = np.full(spec.l - 1, -1, dtype=np.int64)
            for x in range(1, spec.l - 1):
                self.tau_index[x] = pos
                pos += 1
        else:
            self.beta_index = np.full((r, max(spec.cats) - 1), -1, dtype=np.int64)
            for j in range(r):
                for x in range(spec.cats[j] - 1):
                    if x == 0 and j in refs:
                        continue
                    self.beta_index[j, x] = pos
                    pos += 1
            self.tau_index = None
        self.n_phi = pos

        self.gamma_index = np.full(r, -1, dtype=np.int64)
        n_gamma = 0
        if spec.free_disc:
            for j in range(r):
                if j not in refs:
                    self.gamma_index[j] = n_gamma
                    n_gamma += 1
        self.n_gamma = n_gamma

    def pack(self, params: ParameterSet) -> PackedParams:
        phi = np.zeros(self.n_phi)
        phi[self.xi_index.ravel()] = params.xi.ravel()
        mask = self.beta_index >= 0
        phi[self.beta_index[mask]] = params.beta[mask]
        if self.tau_index is not None:
            tmask = self.tau_index >= 0
            phi[self.tau_index[tmask]] = params.tau[tmask]
        gmask = self.gamma_index >= 0
        gamma_free = np.zeros(self.n_gamma)
        gamma_free[self.gamma_index[gmask]] = params.gamma[gmask]
        return PackedParams(phi=phi, gamma_free=gamma_free, layout=self)

    def unpack(self, phi: np.ndarray, gamma_free: np.ndarray, pi: np.ndarray) -> ParameterSet:
        spec = self.spec
        xi = phi[self.xi_index]
        if spec.rating_scale:
            beta = np.where(self.beta_index >= 0, phi[np.maximum(self.beta_index, 0)], 0.0)
            tau = np.where(self.tau_index >= 0, phi[np.maximum(self.tau_index, 0)], 0.0)
        else:
            beta = np.where(self.beta_index >= 0, phi[np.maximum(self.beta_index, 0)], 0.0)
            for j, l in enumerate(spec.cats):
                beta[j, l - 1:] = np.nan
            tau = None
        gamma = self.gamma_full(gamma_free)
        return ParameterSet(pi=np.array(pi, dtype=float), xi=xi, beta=beta, tau=tau, gamma=gamma)

    def gamma_full(self, gamma_free: np.ndarray) -> np.ndarray:
        """Full (r,) discrimination vector with fixed entries set to one."""
        if self.n_gamma == 0:
            return np.ones(self.spec.r)
        return np.where(self.gamma_index >= 0, gamma_free[np.maximum(self.gamma_index, 0)], 1.0)
