"""Design matrices Z_cj and free-parameter counts."""
from functools import cached_property

import numpy as np

from .params import ParameterLayout, ParameterSet
from .spec import ModelSpec


def count_free_params(spec: ModelSpec) -> int:
    """
    Number of free parameters.

    IRT models: (k - 1) class weights, s*k support points, the free
    difficulties (sum_j (l_j - 1) - s, or (r - s) + (l - 2) under a rating
    scale) and (r - s) discriminations when they are free. Standard LC
    model: (k - 1) + k * sum_j (l_j - 1).
    """
    k, r, s = spec.k, spec.r, spec.s
    if spec.is_standard_lc:
        return (k - 1) + k * sum(l - 1 for l in spec.cats)
    n = (k - 1) + s * k
    if spec.rating_scale:
        n += (r - s) + (spec.l - 2)
    else:
        n += sum(l - 1 for l in spec.cats) - s
    if spec.free_disc:
        n += r - s
    return n


class DesignMatrices:
    """
    All design matrices of a model, one (k, l_j - 1, n_phi) array per item.

    Row x of Z_cj has +1 in the column of xi_{c,d(j)} and -1 in the columns
    of the free difficulty parameters of (j, x), so that Z_cj phi equals
    xi_{c,d} - beta_jx (or xi_{c,d} - beta_j - tau_x).
    """

    def __init__(self, spec: ModelSpec, layout: ParameterLayout | None = None):
        self.spec = spec
        self.layout = layout or ParameterLayout(spec)

    @cached_property
    def items(self) -> list[np.ndarray]:
        spec, lay = self.spec, self.layout
        dims = spec.dimension_of
        out = []
        for j in range(spec.r):
            h = spec.cats[j] - 1
            Z = np.zeros((spec.k, h, lay.n_phi))
            for c in range(spec.k):
                Z[c, :, lay.xi_index[c, dims[j]]] = 1.0
            for x in range(h):
                if spec.rating_scale:
                    if lay.beta_index[j] >= 0:
                        Z[:, x, lay.beta_index[j]] = -1.0
                    if lay.tau_index[x] >= 0:
                        Z[:, x, lay.tau_index[x]] = -1.0
                elif lay.beta_index[j, x] >= 0:
                    Z[:, x, lay.beta_index[j, x]] = -1.0
            Z.setflags(write=False)
            out.append(Z)
        return out

    def __getitem__(self, j: int) -> np.ndarray:
        return self.items[j]


def build_design_matrix(spec: ModelSpec, c: int, j: int) -> np.ndarray:
    """Design matrix Z_cj, (l_j - 1) x len(phi), for 0-based class c and item j."""
    return DesignMatrices(spec)[j][c].copy()


def linear_predictor(params: ParameterSet, spec: ModelSpec, c: int, j: int) -> np.ndarray:
    """gamma_j (xi_{c,d} - beta_jx) for x = 1..l_j - 1, evaluated coordinate-wise."""
    d = spec.dimension_of[j]
    h = spec.cats[j] - 1
    if spec.rating_scale:
        difficulty = params.beta[j] + params.tau[:h]
    else:
        difficulty = params.beta[j, :h]
    return params.gamma[j] * (params.xi[c, d] - difficulty)
