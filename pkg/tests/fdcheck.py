"""Finite-difference gradient oracle, independent of the autodiff engine.

Central differences on the raw forward computation only: the function under
test receives plain ndarrays and must return a float.  Nothing here touches
tapes or recorded rules.
"""

import numpy as np

STEP = 1e-5
REL_TOL = 1e-4


def numerical_grad(f, arrays, wrt, step=STEP):
    """Central-difference gradient of ``f(*arrays)`` wrt ``arrays[wrt]``."""
    arrays = [np.array(a, dtype=np.float64) for a in arrays]
    target = arrays[wrt]
    grad = np.zeros_like(target)
    flat = target.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        hi = f(*arrays)
        flat[i] = orig - step
        lo = f(*arrays)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * step)
    return grad


def assert_grad_close(analytic, numeric, rel_tol=REL_TOL, what=""):
    """Relative-error comparison with an absolute floor for near-zero entries."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    assert analytic.shape == numeric.shape, f"{what}: shape {analytic.shape} vs {numeric.shape}"
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    rel = np.abs(analytic - numeric) / denom
    worst = float(rel.max()) if rel.size else 0.0
    assert worst < rel_tol, f"{what}: max relative gradient error {worst:.3e} >= {rel_tol}"
