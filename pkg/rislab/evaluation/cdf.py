from dataclasses import dataclass
from typing import Sequence

import numpy as np

from rislab.evaluation.exceptions import EmptyErrorListError, QuantileRangeError


@dataclass(frozen=True, eq=False)
class CdfCurve:
    """
    Empirical step CDF: ``probabilities[i] = (i + 1) / n`` is P(X <= values[i]).
    """
    values: np.ndarray
    probabilities: np.ndarray

    def __len__(self):
        return self.values.shape[0]


def nmse_cdf(errors: Sequence[float]) -> CdfCurve:
    values = np.sort(np.asarray(errors, dtype=np.float64).reshape(-1))
    if values.size == 0:
        raise EmptyErrorListError("cannot build a CDF from an empty error list")
    probabilities = np.arange(1, values.size + 1, dtype=np.float64) / values.size
    return CdfCurve(values, probabilities)


def percentile(curve: CdfCurve, q: float) -> float:
    """
    :return: the smallest value v with CDF(v) >= q
    """
    if not 0 < q <= 1:
        raise QuantileRangeError(f"q '{q}' must be in (0, 1]")
    index = int(np.searchsorted(curve.probabilities, q, side='left'))
    return float(curve.values[min(index, len(curve) - 1)])
