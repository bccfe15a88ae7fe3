import numpy as np

from core.exceptions import NaNEncountered


def fixed_order_dot(weights: np.ndarray, values: np.ndarray, chunk: int = 1024) -> float:
    """
    Sum of weights * values over contiguous chunks, partial sums combined
    pairwise in index order. The result does not depend on how node values
    were produced.
    """
    if not np.all(np.isfinite(values)):
        raise NaNEncountered("Integrand is not finite on every node")
    partials = [
        float(np.dot(weights[start : start + chunk], values[start : start + chunk]))
        for start in range(0, len(weights), chunk)
    ]
    return _pairwise(partials)


def fixed_order_matvec(matrix: np.ndarray, weighted: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """Row-wise counterpart of fixed_order_dot: returns matrix @ weighted."""
    if not np.all(np.isfinite(weighted)):
        raise NaNEncountered("Integrand is not finite on every node")
    if matrix.shape[0] == 0:
        return np.zeros(0)
    partials = [
        matrix[:, start : start + chunk] @ weighted[start : start + chunk]
        for start in range(0, matrix.shape[1], chunk)
    ]
    return _pairwise(partials)


def _pairwise(partials):
    if not partials:
        return 0.0
    while len(partials) > 1:
        paired = [partials[i] + partials[i + 1] for i in range(0, len(partials) - 1, 2)]
        if len(partials) % 2:
            paired.append(partials[-1])
        partials = paired
    return partials[0]
