"""Pure-numpy implementations of the hot numeric kernels.

This module is the fallback backend (``ALFORGE_BACKEND=numpy``) and the
semantic reference for the numba backend: both backends implement the same
contracts documented here. Results may differ between backends in the last
few ulps because numpy uses pairwise summation where the numba loops sum
sequentially; each backend is individually deterministic.
"""

from __future__ import annotations

import numpy as np


def pairwise_sqdist(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of ``x`` (n,d) and ``c`` (m,d)."""
    xx = np.einsum("ij,ij->i", x, x)
    cc = np.einsum("ij,ij->i", c, c)
    d2 = xx[:, None] + cc[None, :] - 2.0 * (x @ c.T)
    return np.maximum(d2, 0.0)


def assign_nearest(x: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid assignment.

    Returns ``(labels, sqd)`` where ``labels[i]`` is the index of the closest
    row of ``c`` (lowest index wins ties) and ``sqd[i]`` the squared distance.
    """
    d2 = pairwise_sqdist(x, c)
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.int64), d2[np.arange(len(x)), labels]


def centroid_sums(x: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster coordinate sums and member counts, accumulated in row order."""
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels, x)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; safe for entries up to +-1e4."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def contrastive_loss_grad(
    z: np.ndarray, pos: np.ndarray, tau: float
) -> tuple[float, np.ndarray]:
    """Shared core of the pairwise contrastive losses.

    ``z`` is (b, p); ``pos`` is a (b, b) 0/1 matrix marking, for each anchor
    row, which other rows are its positives (diagonal must be zero). For each
    anchor i with at least one positive, the contribution is

        -(1 / |P(i)|) * sum_{j in P(i)} log( exp(s_ij) / sum_{k != i} exp(s_ik) )

    with s = z z^T / tau, computed with per-row max subtraction. The loss is
    the mean over contributing anchors; rows without positives contribute
    nothing. Returns the loss and its gradient with respect to ``z``.
    """
    b = z.shape[0]
    s = (z @ z.T) / tau
    off = ~np.eye(b, dtype=bool)
    m = np.where(off, s, -np.inf).max(axis=1, keepdims=True)
    e = np.where(off, np.exp(s - m), 0.0)
    den = e.sum(axis=1, keepdims=True)
    log_prob = s - m - np.log(den)

    pcount = pos.sum(axis=1)
    anchors = pcount > 0
    n_anchors = int(anchors.sum())
    if n_anchors == 0:
        return 0.0, np.zeros_like(z)

    per_anchor = -(pos * log_prob).sum(axis=1)[anchors] / pcount[anchors]
    loss = float(per_anchor.sum() / n_anchors)

    g = e / den - pos / np.maximum(pcount, 1.0)[:, None]
    g[~anchors] = 0.0
    g /= n_anchors * tau
    grad = (g + g.T) @ z
    return loss, grad


def cross_entropy_rows(
    logits: np.ndarray, y0: np.ndarray, alpha: float
) -> tuple[float, np.ndarray]:
    """Mean label-smoothed softmax cross-entropy over rows, with gradient.

    ``y0`` holds 0-based class indices; the smoothed target for a row is
    ``(1 - alpha) * one_hot(y0) + alpha / n_classes`` spread over all classes.
    Returns ``(mean_loss, dlogits)``.
    """
    n, n_classes = logits.shape
    m = logits.max(axis=1, keepdims=True)
    e = np.exp(logits - m)
    den = e.sum(axis=1, keepdims=True)
    log_p = logits - m - np.log(den)

    t = np.full((n, n_classes), alpha / n_classes)
    t[np.arange(n), y0] += 1.0 - alpha
    loss = float(-(t * log_p).sum() / n)
    dlogits = (e / den - t) / n
    return loss, dlogits
