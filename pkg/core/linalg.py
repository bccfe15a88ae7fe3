import logging

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

RIDGE_FACTOR = 1e-12


def solve_gram(gram: np.ndarray, rhs: np.ndarray, error_cls: type[Exception]) -> np.ndarray:
    """
    Solve the symmetric positive definite system gram @ c = rhs by Cholesky.
    On failure retry once with ridge 1e-12 * trace / size, then raise error_cls.
    """
    try:
        return linalg.cho_solve(linalg.cho_factor(gram), rhs)
    except linalg.LinAlgError:
        pass

    size = gram.shape[0]
    ridge = RIDGE_FACTOR * float(np.trace(gram)) / size
    logger.warning(f"Gram system of size {size} is not positive definite, retrying with ridge {ridge:.3e}")
    try:
        solution = linalg.cho_solve(linalg.cho_factor(gram + ridge * np.eye(size)), rhs)
    except linalg.LinAlgError:
        raise error_cls(f"Gram system of size {size} is singular even with ridge {ridge:.3e}")
    if not np.all(np.isfinite(solution)):
        raise error_cls(f"Gram system of size {size} produced non-finite coefficients")
    return solution
