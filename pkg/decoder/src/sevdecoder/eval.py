"""Structural-similarity scoring used to evaluate reconstructions."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _luma(rgb: np.ndarray) -> np.ndarray:
    r = rgb[..., 0].astype(np.float64)
    g = rgb[..., 1].astype(np.float64)
    b = rgb[..., 2].astype(np.float64)
    return 0.299 * r + 0.587 * g + 0.114 * b


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2
    w = np.exp(-(ax**2) / (2 * sigma**2))
    win = np.outer(w, w)
    return win / win.sum()


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM between two uint8 RGB images, computed on luma."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    x = _luma(a)
    y = _luma(b)
    win = _gaussian_window()
    wx = sliding_window_view(x, win.shape)
    wy = sliding_window_view(y, win.shape)
    mu_x = np.einsum("ijkl,kl->ij", wx, win)
    mu_y = np.einsum("ijkl,kl->ij", wy, win)
    xx = np.einsum("ijkl,kl->ij", wx * wx, win) - mu_x**2
    yy = np.einsum("ijkl,kl->ij", wy * wy, win) - mu_y**2
    xy = np.einsum("ijkl,kl->ij", wx * wy, win) - mu_x * mu_y
    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2
    score = ((2 * mu_x * mu_y + c1) * (2 * xy + c2)) / (
        (mu_x**2 + mu_y**2 + c1) * (xx + yy + c2)
    )
    return float(score.mean())
