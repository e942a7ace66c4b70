"""Dense/convolution/activation primitives with hand-written backward passes.

Everything runs in float64 numpy. Each forward returns whatever the matching
backward needs; there is no autodiff graph, just explicit plumbing for the
one architecture family this package trains.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -1e30  # stands in for -inf in masked logits; exp underflows to 0


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 (or 1x1) convolution, stride 1, 'same' padding.

    x: (B, C, H, W), w: (O, C, kh, kw), b: (O,). Returns (out, cols) where
    cols is the im2col buffer reused by the backward pass.
    """
    batch, _, height, width = x.shape
    out_ch, in_ch, kh, kw = w.shape
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    cols = np.empty((batch, in_ch, kh, kw, height, width), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + height, j : j + width]
    cols2 = cols.reshape(batch, in_ch * kh * kw, height * width)
    out = np.matmul(w.reshape(out_ch, -1), cols2)
    out = out.reshape(batch, out_ch, height, width) + b[None, :, None, None]
    return out, cols2


def conv2d_backward(
    dout: np.ndarray,
    cols2: np.ndarray,
    w: np.ndarray,
    x_shape: tuple[int, ...],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients for conv2d_forward. Returns (dx, dw, db)."""
    batch, _, height, width = x_shape
    out_ch, in_ch, kh, kw = w.shape
    dflat = dout.reshape(batch, out_ch, height * width)
    db = dflat.sum(axis=(0, 2))
    dw = np.matmul(dflat, cols2.transpose(0, 2, 1)).sum(axis=0).reshape(w.shape)
    dcols = np.matmul(w.reshape(out_ch, -1).T, dflat)
    dcols = dcols.reshape(batch, in_ch, kh, kw, height, width)
    ph, pw = kh // 2, kw // 2
    dxp = np.zeros((batch, in_ch, height + 2 * ph, width + 2 * pw), dtype=dout.dtype)
    for i in range(kh):
        for j in range(kw):
            dxp[:, :, i : i + height, j : j + width] += dcols[:, :, i, j]
    if ph or pw:
        dx = dxp[:, :, ph : ph + height, pw : pw + width]
    else:
        dx = dxp
    return dx, dw, db


def linear_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x: (B, F), w: (O, F), b: (O,)."""
    return x @ w.T + b


def linear_backward(
    dout: np.ndarray, x: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dx = dout @ w
    dw = dout.T @ x
    db = dout.sum(axis=0)
    return dx, dw, db


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dout * (x > 0.0)


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise softmax restricted to masked-in entries.

    Illegal entries get exactly zero probability; the ordering of legal
    logits is preserved by the renormalization.
    """
    z = np.where(mask, logits, NEG_INF)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z) * mask
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Per-row -sum(t * log p); rows of ``targets`` must live on the support
    of ``probs`` (illegal entries carry zero target mass by construction)."""
    safe = np.where(targets > 0, np.maximum(probs, 1e-300), 1.0)
    return -(targets * np.log(safe)).sum(axis=-1)
