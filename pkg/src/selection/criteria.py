"""Information criteria and ranked model comparison tables."""
from typing import Sequence

import pandas as pd

from ..estimation import FitResult
from ..utils.errors import NotNestedError


def information_table(fits: Sequence[FitResult]) -> pd.DataFrame:
    """
    Rank fits on the same data by BIC.

    Returns:
        DataFrame with one row per fit (model label, k, link, disc, difl, s,
        lk, np, aic, bic), sorted by bic and then by np

    Raises:
        NotNestedError: fits on data sets of different size
    """
    if not fits:
        return pd.DataFrame(columns=["model", "k", "link", "disc", "difl", "s", "lk", "np", "aic", "bic"])
    sizes = {f.n for f in fits}
    if len(sizes) > 1:
        raise NotNestedError(f"Fits use different data sizes: {sorted(sizes)}")

    rows = []
    for f in fits:
        spec = f.spec
        rows.append({
            "model": spec.label(),
            "k": spec.k,
            "link": spec.link.label,
            "disc": None if spec.is_standard_lc else spec.disc.name.lower(),
            "difl": None if spec.is_standard_lc else spec.difl.name.lower(),
            "s": None if spec.is_standard_lc else spec.s,
            "lk": f.lk,
            "np": f.np,
            "aic": f.aic,
            "bic": f.bic,
        })
    df = pd.DataFrame(rows)
    return df.sort_values(["bic", "np"], kind="mergesort").reset_index(drop=True)
