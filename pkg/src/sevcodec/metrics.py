"""Full-reference quality metrics: PSNR, SSIM, MS-SSIM."""

from dataclasses import dataclass

import numpy as np

from .video import Frame, rgb_to_luma

PSNR_CAP_DB = 100.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03
_L = 255.0

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
_MS_SSIM_MIN_SIDE = 176  # 5 dyadic scales x 11-tap window


@dataclass(frozen=True)
class MetricResult:
    per_frame: tuple
    mean: float


def _check_dims(ref: Frame, dist: Frame):
    if (ref.width, ref.height) != (dist.width, dist.height):
        raise ValueError(
            f"dimension mismatch: {ref.width}x{ref.height} vs "
            f"{dist.width}x{dist.height}"
        )


def psnr(ref: Frame, dist: Frame) -> float:
    """PSNR in dB over all RGB samples jointly; identical frames cap at 100."""
    _check_dims(ref, dist)
    diff = ref.pixels.astype(np.float64) - dist.pixels.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(255.0**2 / mse))


def _gaussian_kernel_1d(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2
    x = np.arange(size) - half
    k = np.exp(-(x * x) / (2 * sigma * sigma))
    return k / k.sum()


def _filter_valid(img: np.ndarray, kernel1d: np.ndarray) -> np.ndarray:
    """Separable 'valid' correlation with a 1D kernel along both axes."""
    size = len(kernel1d)
    h, w = img.shape
    rows = np.zeros((h, w - size + 1))
    for i, kv in enumerate(kernel1d):
        rows += kv * img[:, i : i + w - size + 1]
    out = np.zeros((h - size + 1, w - size + 1))
    for i, kv in enumerate(kernel1d):
        out += kv * rows[i : i + h - size + 1, :]
    return out


def _ssim_maps(x: np.ndarray, y: np.ndarray):
    """Per-window luminance*contrast-structure and contrast-structure maps."""
    win = _gaussian_kernel_1d(_SSIM_WINDOW, _SSIM_SIGMA)
    c1 = (_K1 * _L) ** 2
    c2 = (_K2 * _L) ** 2
    mu_x = _filter_valid(x, win)
    mu_y = _filter_valid(y, win)
    mu_xx = mu_x * mu_x
    mu_yy = mu_y * mu_y
    mu_xy = mu_x * mu_y
    sigma_xx = _filter_valid(x * x, win) - mu_xx
    sigma_yy = _filter_valid(y * y, win) - mu_yy
    sigma_xy = _filter_valid(x * y, win) - mu_xy
    cs = (2 * sigma_xy + c2) / (sigma_xx + sigma_yy + c2)
    ssim_map = ((2 * mu_xy + c1) / (mu_xx + mu_yy + c1)) * cs
    return ssim_map, cs


def ssim(ref: Frame, dist: Frame) -> float:
    """Mean SSIM on the BT.601 luma plane, 11x11 Gaussian window sigma 1.5."""
    _check_dims(ref, dist)
    if min(ref.width, ref.height) < _SSIM_WINDOW:
        raise ValueError(
            f"frame must be at least {_SSIM_WINDOW}x{_SSIM_WINDOW} for SSIM"
        )
    x = rgb_to_luma(ref).values.astype(np.float64)
    y = rgb_to_luma(dist).values.astype(np.float64)
    ssim_map, _ = _ssim_maps(x, y)
    return float(ssim_map.mean())


def _downsample2(img: np.ndarray) -> np.ndarray:
    """2x2 average pooling with stride 2, odd remainders cropped."""
    h, w = img.shape
    img = img[: h - h % 2, : w - w % 2]
    return (img[0::2, 0::2] + img[0::2, 1::2] + img[1::2, 0::2] + img[1::2, 1::2]) / 4.0


def ms_ssim(ref: Frame, dist: Frame) -> float:
    """5-scale MS-SSIM on luma with the standard per-scale weights."""
    _check_dims(ref, dist)
    if min(ref.width, ref.height) < _MS_SSIM_MIN_SIDE:
        raise ValueError(
            f"frame must be at least {_MS_SSIM_MIN_SIDE} pixels on a side "
            f"for 5-scale MS-SSIM"
        )
    x = rgb_to_luma(ref).values.astype(np.float64)
    y = rgb_to_luma(dist).values.astype(np.float64)
    n_scales = len(MS_SSIM_WEIGHTS)
    score = 1.0
    for level in range(n_scales):
        ssim_map, cs_map = _ssim_maps(x, y)
        if level < n_scales - 1:
            # negative means are clamped so fractional powers stay real
            score *= max(float(cs_map.mean()), 0.0) ** MS_SSIM_WEIGHTS[level]
            x = _downsample2(x)
            y = _downsample2(y)
        else:
            score *= max(float(ssim_map.mean()), 0.0) ** MS_SSIM_WEIGHTS[level]
    return score


def sequence_metric(ref_frames, dist_frames, fn) -> MetricResult:
    if len(ref_frames) != len(dist_frames):
        raise ValueError("frame count mismatch")
    scores = tuple(fn(r, d) for r, d in zip(ref_frames, dist_frames))
    return MetricResult(per_frame=scores, mean=float(np.mean(scores)))
