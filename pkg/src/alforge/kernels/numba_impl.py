"""Numba-compiled implementations of the hot numeric kernels.

Same contracts as :mod:`alforge.kernels.numpy_impl`. All kernels are compiled
without ``fastmath`` and without ``parallel`` so that every run of a given
backend is reproducible; ``cache=True`` persists compiled code across
processes.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def pairwise_sqdist(x, c):
    n, d = x.shape
    m = c.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for q in range(d):
                diff = x[i, q] - c[j, q]
                acc += diff * diff
            out[i, j] = acc
    return out


@njit(cache=True)
def assign_nearest(x, c):
    n, d = x.shape
    m = c.shape[0]
    labels = np.empty(n, dtype=np.int64)
    sqd = np.empty(n)
    for i in range(n):
        best = 0
        best_d = np.inf
        for j in range(m):
            acc = 0.0
            for q in range(d):
                diff = x[i, q] - c[j, q]
                acc += diff * diff
            if acc < best_d:
                best_d = acc
                best = j
        labels[i] = best
        sqd[i] = best_d
    return labels, sqd


@njit(cache=True)
def centroid_sums(x, labels, k):
    n, d = x.shape
    sums = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n):
        lab = labels[i]
        for q in range(d):
            sums[lab, q] += x[i, q]
        counts[lab] += 1
    return sums, counts


@njit(cache=True)
def softmax_rows(logits):
    n, c = logits.shape
    out = np.empty((n, c))
    for i in range(n):
        m = logits[i, 0]
        for j in range(1, c):
            if logits[i, j] > m:
                m = logits[i, j]
        den = 0.0
        for j in range(c):
            out[i, j] = np.exp(logits[i, j] - m)
            den += out[i, j]
        for j in range(c):
            out[i, j] /= den
    return out


@njit(cache=True)
def contrastive_loss_grad(z, pos, tau):
    b, p = z.shape
    s = np.dot(z, np.ascontiguousarray(z.T)) / tau

    pcount = np.zeros(b)
    n_anchors = 0
    for i in range(b):
        cnt = 0.0
        for k in range(b):
            cnt += pos[i, k]
        pcount[i] = cnt
        if cnt > 0.0:
            n_anchors += 1
    if n_anchors == 0:
        return 0.0, np.zeros((b, p))

    g = np.zeros((b, b))
    loss = 0.0
    for i in range(b):
        m = -np.inf
        for k in range(b):
            if k != i and s[i, k] > m:
                m = s[i, k]
        den = 0.0
        for k in range(b):
            if k != i:
                den += np.exp(s[i, k] - m)
        log_den = np.log(den)
        if pcount[i] > 0.0:
            acc = 0.0
            for k in range(b):
                if pos[i, k] > 0.0:
                    acc += s[i, k] - m - log_den
            loss += -acc / pcount[i]
            for k in range(b):
                if k == i:
                    continue
                g[i, k] = np.exp(s[i, k] - m) / den - pos[i, k] / pcount[i]

    loss /= n_anchors
    scale = 1.0 / (n_anchors * tau)
    gs = np.empty((b, b))
    for i in range(b):
        for k in range(b):
            gs[i, k] = (g[i, k] + g[k, i]) * scale
    grad = np.dot(gs, z)
    return loss, grad


@njit(cache=True)
def cross_entropy_rows(logits, y0, alpha):
    n, c = logits.shape
    dlogits = np.empty((n, c))
    smooth = alpha / c
    loss = 0.0
    for i in range(n):
        m = logits[i, 0]
        for j in range(1, c):
            if logits[i, j] > m:
                m = logits[i, j]
        den = 0.0
        for j in range(c):
            den += np.exp(logits[i, j] - m)
        log_den = np.log(den)
        row_loss = 0.0
        for j in range(c):
            t = smooth + (1.0 - alpha) * (1.0 if j == y0[i] else 0.0)
            log_p = logits[i, j] - m - log_den
            row_loss -= t * log_p
            dlogits[i, j] = (np.exp(log_p) - t) / n
        loss += row_loss
    return loss / n, dlogits
