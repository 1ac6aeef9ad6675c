"""Unbatched convolution primitives on float64 arrays.

1-D tensors are ``channels x time``; 2-D tensors are ``channels x height x width``.
Each kernel tap is one (batched) matmul over channels, so memory stays at the
size of the output rather than an im2col buffer.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError, ValidationError


def conv_output_length(length: int, kernel: int, stride: int = 1, dilation: int = 1,
                       padding: int = 0) -> int:
    return (length + 2 * padding - dilation * (kernel - 1) - 1) // stride + 1


def conv1d(x, weight, bias=None, stride: int = 1, dilation: int = 1, groups: int = 1,
           padding: int = 0) -> np.ndarray:
    """Cross-correlation; ``weight`` is ``(C_out, C_in // groups, K)``."""
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if x.ndim != 2 or weight.ndim != 3:
        raise ShapeError("conv1d expects x (C_in, T) and weight (C_out, C_in/groups, K)")
    c_in, _ = x.shape
    c_out, c_in_g, k = weight.shape
    if groups < 1 or c_in % groups or c_out % groups:
        raise ShapeError(f"groups={groups} must divide C_in={c_in} and C_out={c_out}")
    if c_in // groups != c_in_g:
        raise ShapeError(f"weight expects {c_in_g * groups} input channels, got {c_in}")
    if min(stride, dilation) < 1 or padding < 0:
        raise ValidationError("stride and dilation must be >= 1, padding >= 0")
    t_out = conv_output_length(x.shape[1], k, stride, dilation, padding)
    if t_out < 1:
        raise ShapeError(f"input of length {x.shape[1]} is too short for kernel {k}")

    xp = np.pad(x, ((0, 0), (padding, padding))) if padding else x
    span = stride * (t_out - 1) + 1
    # tap-major contiguous copy keeps every matmul on the BLAS path
    taps = np.ascontiguousarray(np.moveaxis(weight, 2, 0))
    if groups == 1:
        out = np.zeros((c_out, t_out))
        for j in range(k):
            s = j * dilation
            out += taps[j] @ xp[:, s:s + span:stride]
    else:
        xg = xp.reshape(groups, c_in_g, -1)
        wg = taps.reshape(k, groups, c_out // groups, c_in_g)
        out = np.zeros((groups, c_out // groups, t_out))
        for j in range(k):
            s = j * dilation
            out += np.matmul(wg[j], xg[..., s:s + span:stride])
        out = out.reshape(c_out, t_out)
    if bias is not None:
        out += np.asarray(bias, dtype=np.float64)[:, None]
    return out


def conv_transpose1d(x, weight, bias=None, stride: int = 1, padding: int = 0) -> np.ndarray:
    """Fractionally-strided convolution; ``weight`` is ``(C_in, C_out, K)``.

    Output length is ``(T - 1) * stride - 2 * padding + K``.
    """
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if x.ndim != 2 or weight.ndim != 3 or weight.shape[0] != x.shape[0]:
        raise ShapeError("conv_transpose1d expects x (C_in, T) and weight (C_in, C_out, K)")
    _, c_out, k = weight.shape
    t = x.shape[1]
    full_len = (t - 1) * stride + k
    if full_len - 2 * padding < 1:
        raise ShapeError("padding removes the whole output")
    full = np.zeros((c_out, full_len))
    span = (t - 1) * stride + 1
    taps = np.ascontiguousarray(np.moveaxis(weight, 2, 0).transpose(0, 2, 1))
    for j in range(k):
        full[:, j:j + span:stride] += taps[j] @ x
    out = full[:, padding:full_len - padding]
    if bias is not None:
        out = out + np.asarray(bias, dtype=np.float64)[:, None]
    return out


def conv2d(x, weight, bias=None, stride=(1, 1), padding=(0, 0)) -> np.ndarray:
    """Cross-correlation over (height, width); ``weight`` is ``(C_out, C_in, kh, kw)``."""
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if x.ndim != 3 or weight.ndim != 4 or weight.shape[1] != x.shape[0]:
        raise ShapeError("conv2d expects x (C_in, H, W) and weight (C_out, C_in, kh, kw)")
    c_out, _, kh, kw = weight.shape
    sh, sw = stride
    ph, pw = padding
    h_out = conv_output_length(x.shape[1], kh, sh, 1, ph)
    w_out = conv_output_length(x.shape[2], kw, sw, 1, pw)
    if h_out < 1 or w_out < 1:
        raise ShapeError(f"input {x.shape[1:]} is too small for kernel {(kh, kw)}")
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw))) if (ph or pw) else x
    out = np.zeros((c_out, h_out * w_out))
    h_span = sh * (h_out - 1) + 1
    w_span = sw * (w_out - 1) + 1
    taps = np.ascontiguousarray(weight.transpose(2, 3, 0, 1))
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, i:i + h_span:sh, j:j + w_span:sw].reshape(x.shape[0], -1)
            out += taps[i, j] @ patch
    out = out.reshape(c_out, h_out, w_out)
    if bias is not None:
        out += np.asarray(bias, dtype=np.float64)[:, None, None]
    return out


def avg_pool1d(x, kernel: int = 4, stride: int = 2, padding: int = 2) -> np.ndarray:
    """Average pooling that ignores padded positions, so constants map to constants."""
    x = np.asarray(x, dtype=np.float64)
    t_out = conv_output_length(x.shape[-1], kernel, stride, 1, padding)
    xp = np.pad(x, [(0, 0)] * (x.ndim - 1) + [(padding, padding)])
    ones = np.pad(np.ones(x.shape[-1]), (padding, padding))
    span = stride * (t_out - 1) + 1
    total = np.zeros(x.shape[:-1] + (t_out,))
    count = np.zeros(t_out)
    for j in range(kernel):
        total += xp[..., j:j + span:stride]
        count += ones[j:j + span:stride]
    return total / count
