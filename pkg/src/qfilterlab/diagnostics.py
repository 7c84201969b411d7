"""Wiener-statistics diagnostics for innovation increments (quantum and classical)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class InnovationsReport:
    mean: float
    variance_ratio: float
    lag_autocorr: list = field(default_factory=list)
    n_increments: int = 0
    n_paths: int = 0

    def as_dict(self):
        return {
            "mean": self.mean,
            "variance_ratio": self.variance_ratio,
            "lag_autocorr": list(self.lag_autocorr),
            "n_increments": self.n_increments,
            "n_paths": self.n_paths,
        }


def innovations_report(increments, dt: float, max_lag=10) -> InnovationsReport:
    """Statistics of innovation increments ``dI`` of shape ``(n_paths, n_steps)``.

    * ``mean``: pooled mean of ``dI / sqrt(dt)``;
    * ``variance_ratio``: ``Var(I(T)) / T`` across paths (``I(T)**2 / T`` for a
      single path), with ``I(T)`` the summed increments;
    * ``lag_autocorr``: pooled autocorrelation of ``dI / sqrt(dt)`` at lags
      ``1..max_lag``, computed within each path.

    An all-zero input yields all-zero statistics.
    """
    inc = np.atleast_2d(np.asarray(increments, dtype=float))
    n_paths, n_steps = inc.shape
    t_final = n_steps * dt
    z = inc / np.sqrt(dt)
    mean = float(z.mean())
    totals = inc.sum(axis=1)
    if n_paths > 1:
        var_ratio = float(totals.var(ddof=1) / t_final)
    else:
        var_ratio = float(totals[0] ** 2 / t_final)
    zc = z - mean
    denom = float(np.mean(zc * zc))
    lags = []
    for k in range(1, max_lag + 1):
        if k >= n_steps or denom == 0.0:
            lags.append(0.0)
            continue
        lags.append(float(np.mean(zc[:, :-k] * zc[:, k:]) / denom))
    return InnovationsReport(mean, var_ratio, lags, inc.size, n_paths)
