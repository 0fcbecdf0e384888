"""Pure-NumPy fallback kernels for suppression and matching.

These are the reference semantics for the compiled twins in
``_kernels.pyx``: both backends run the same IEEE-754 operations in the
same order, so they produce bit-identical results and either one can
back the public API.

All kernels are single-class: callers partition detections by
(game, class) first.  Tie-breaking is total everywhere: among equal
confidences the earlier time wins, among equal times the lower input
index wins.
"""

from __future__ import annotations

import numpy as np


def _argmax_current(conf: np.ndarray, times: np.ndarray, active: np.ndarray) -> int:
    """Index of the maximum current confidence among active detections."""
    idx = np.flatnonzero(active)
    sub = conf[idx]
    cands = idx[sub == sub.max()]
    if cands.size > 1:
        cands = cands[np.lexsort((cands, times[cands]))]
    return int(cands[0])


def soft_nms_kernel(
    times: np.ndarray,
    confs: np.ndarray,
    window: float,
    floor: float,
    indicator: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Iterative soft suppression over one class.

    Repeatedly accepts the detection with the highest current confidence
    and multiplies every remaining confidence by
    ``min(|s - t_accepted| / (window / 2), 1)``; detections whose
    confidence falls below ``floor`` leave the pool.  With
    ``indicator=True`` the decay is replaced by the 0/1 indicator of
    ``|s - t| >= window / 2`` (the hard-suppression equivalence used by
    tests).

    Returns ``(indices, confidences)`` in acceptance order; the
    confidences are the decayed values at acceptance time.
    """
    n = times.shape[0]
    conf = np.array(confs, dtype=np.float64, copy=True)
    half_w = window / 2.0
    active = conf >= floor
    order: list[int] = []
    accepted: list[float] = []
    while active.any():
        i = _argmax_current(conf, times, active)
        order.append(i)
        accepted.append(conf[i])
        active[i] = False
        if not active.any():
            break
        dist = np.abs(times - times[i])
        if indicator:
            factor = np.where(dist < half_w, 0.0, 1.0)
        else:
            factor = np.minimum(dist / half_w, 1.0)
        conf[active] *= factor[active]
        active &= conf >= floor
    return (
        np.asarray(order, dtype=np.int64),
        np.asarray(accepted, dtype=np.float64),
    )


def hard_nms_kernel(times: np.ndarray, confs: np.ndarray, window: float) -> np.ndarray:
    """Classic greedy suppression over one class.

    Accepts detections in descending confidence and removes every
    remaining detection strictly within ``window / 2`` seconds of an
    accepted one.  Returns accepted indices in acceptance order.
    """
    n = times.shape[0]
    half_w = window / 2.0
    order = np.lexsort((np.arange(n), times, -confs))
    alive = np.ones(n, dtype=bool)
    kept: list[int] = []
    for i in order:
        if not alive[i]:
            continue
        kept.append(int(i))
        alive &= np.abs(times - times[i]) >= half_w
    return np.asarray(kept, dtype=np.int64)


def match_kernel(det_times: np.ndarray, gt_times: np.ndarray, radius: float) -> np.ndarray:
    """Greedy detection-to-ground-truth matching for one class.

    ``det_times`` must already be in rank order (descending confidence);
    ``gt_times`` must be sorted ascending.  Each detection matches the
    nearest still-unmatched ground truth within ``radius`` seconds
    (equidistant ties go to the earlier ground truth).  Returns a 0/1
    flag per detection (1 = true positive).
    """
    n = det_times.shape[0]
    m = gt_times.shape[0]
    flags = np.zeros(n, dtype=np.uint8)
    taken = np.zeros(m, dtype=bool)
    if m == 0:
        return flags
    for k in range(n):
        dist = np.abs(gt_times - det_times[k])
        cands = np.flatnonzero(~taken & (dist <= radius))
        if cands.size:
            if cands.size > 1:
                cands = cands[np.lexsort((gt_times[cands], dist[cands]))]
            taken[cands[0]] = True
            flags[k] = 1
    return flags
