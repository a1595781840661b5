"""Soft edge detector: Canny edges, edge-color codebook, per-pixel labels."""

from dataclasses import dataclass

import numpy as np

from .video import Frame, LumaPlane, _LUMA_WEIGHTS

# 5x5 integer Gaussian (sigma 1.4), sum 159.
_GAUSS5 = np.array(
    [
        [2, 4, 5, 4, 2],
        [4, 9, 12, 9, 4],
        [5, 12, 15, 12, 5],
        [4, 9, 12, 9, 4],
        [2, 4, 5, 4, 2],
    ],
    dtype=np.int64,
)
_GAUSS5_SUM = 159

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int64)
_SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.int64)

# tan(22.5 deg) ~= 2378/5741; integer ratio keeps direction binning exact.
_TAN_NUM = 2378
_TAN_DEN = 5741


@dataclass(frozen=True)
class EdgeMap:
    mask: np.ndarray

    def __post_init__(self):
        m = self.mask
        if m.ndim != 2 or m.dtype != np.uint8:
            raise ValueError(f"expected (H, W) uint8 mask, got {m.shape} {m.dtype}")
        if not np.isin(m, (0, 1)).all():
            raise ValueError("edge mask values must be 0 or 1")

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]


@dataclass(frozen=True)
class Codebook:
    """Palette of up to k-1 RGB centroids for edge-pixel colors.

    Label 0 is reserved for non-edge pixels, so the palette holds at most
    k-1 entries; centroids are sorted by BT.601 luminance, ties by RGB.
    """

    k: int
    centroids: np.ndarray  # (effective_count, 3) uint8

    def __post_init__(self):
        if not 2 <= self.k <= 256:
            raise ValueError(f"k must be in [2, 256], got {self.k}")
        c = self.centroids
        if c.ndim != 2 or c.shape[1] != 3 or c.dtype != np.uint8:
            raise ValueError("centroids must be an (n, 3) uint8 array")
        if c.shape[0] > self.k - 1:
            raise ValueError(f"{c.shape[0]} centroids exceed k-1={self.k - 1}")

    @property
    def effective_count(self) -> int:
        return self.centroids.shape[0]


@dataclass(frozen=True)
class SoftEdgeMap:
    """Per-pixel label map: 0 = non-edge, label l >= 1 = centroid l-1."""

    labels: np.ndarray  # (H, W) uint8
    k: int

    def __post_init__(self):
        m = self.labels
        if m.ndim != 2 or m.dtype != np.uint8:
            raise ValueError(f"expected (H, W) uint8 labels, got {m.shape} {m.dtype}")
        if m.size and int(m.max()) > self.k - 1:
            raise ValueError(f"label {int(m.max())} out of range for k={self.k}")

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


def _convolve2d_int(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-size integer correlation with edge-replicated borders."""
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(values, ((ph, ph), (pw, pw)), mode="edge").astype(np.int64)
    h, w = values.shape
    out = np.zeros((h, w), dtype=np.int64)
    for dy in range(kh):
        for dx in range(kw):
            kv = kernel[dy, dx]
            if kv:
                out += kv * padded[dy : dy + h, dx : dx + w]
    return out


def detect_edges(luma: LumaPlane, low: int = 50, high: int = 150) -> EdgeMap:
    """Canny edge detection with frozen stage constants.

    5x5 integer Gaussian (sigma 1.4), 3x3 Sobel, four-direction non-maximum
    suppression and 8-connected double-threshold hysteresis, all in exact
    arithmetic so results are identical across platforms.
    """
    if low >= high:
        raise ValueError(f"low threshold {low} must be < high threshold {high}")
    v = luma.values
    blurred = (_convolve2d_int(v, _GAUSS5) + _GAUSS5_SUM // 2) // _GAUSS5_SUM
    gx = _convolve2d_int(blurred, _SOBEL_X)
    gy = _convolve2d_int(blurred, _SOBEL_Y)
    mag = np.sqrt(gx.astype(np.float64) ** 2 + gy.astype(np.float64) ** 2)

    ax = np.abs(gx)
    ay = np.abs(gy)
    horiz = ay * _TAN_DEN <= ax * _TAN_NUM  # gradient ~horizontal
    vert = (~horiz) & (ax * _TAN_DEN <= ay * _TAN_NUM)
    diag_main = (~horiz) & (~vert) & (gx * gy > 0)  # toward (+row, +col)
    diag_anti = (~horiz) & (~vert) & (gx * gy < 0)

    pm = np.pad(mag, 1, mode="constant")

    def shifted(dy, dx):
        h, w = mag.shape
        return pm[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]

    before = (
        horiz * shifted(0, -1)
        + vert * shifted(-1, 0)
        + diag_main * shifted(-1, -1)
        + diag_anti * shifted(-1, 1)
    )
    after = (
        horiz * shifted(0, 1)
        + vert * shifted(1, 0)
        + diag_main * shifted(1, 1)
        + diag_anti * shifted(1, -1)
    )
    # Asymmetric tie rule thins two-pixel plateaus to a single line.
    nms = np.where((mag > 0) & (mag >= before) & (mag > after), mag, 0.0)

    strong = nms >= high
    weak = nms >= low
    edges = strong.copy()
    grow = True
    while grow:
        neighbors = np.zeros_like(edges)
        pe = np.pad(edges, 1, mode="constant")
        h, w = edges.shape
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy or dx:
                    neighbors |= pe[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        added = weak & neighbors & ~edges
        grow = bool(added.any())
        edges |= added
    return EdgeMap(mask=edges.astype(np.uint8))


def fit_codebook(edge_colors: np.ndarray, k: int, seed: int) -> Codebook:
    """Seeded deterministic k-means (k-means++ init) over edge-pixel colors.

    Fits k-1 clusters; if fewer distinct colors exist they become the palette
    directly. Lloyd iterations stop when the largest centroid shift drops
    below 0.5 or after 50 rounds.
    """
    if not 2 <= k <= 256:
        raise ValueError(f"k must be in [2, 256], got {k}")
    colors = np.asarray(edge_colors, dtype=np.uint8).reshape(-1, 3)
    if colors.shape[0] == 0:
        return Codebook(k=k, centroids=np.zeros((0, 3), dtype=np.uint8))

    distinct = np.unique(colors, axis=0)
    n_clusters = k - 1
    if distinct.shape[0] <= n_clusters:
        return Codebook(k=k, centroids=_canonical_order(distinct))

    pts = colors.astype(np.float64)
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(pts, n_clusters, rng)

    prev_sse = np.inf
    for _ in range(50):
        d2 = _sq_dists(pts, centroids)
        assign = np.argmin(d2, axis=1)
        sse = float(d2[np.arange(len(pts)), assign].sum())
        assert sse <= prev_sse + 1e-6, "Lloyd distortion increased"
        prev_sse = sse

        new_centroids = centroids.copy()
        for c in range(n_clusters):
            members = pts[assign == c]
            if len(members):
                new_centroids[c] = members.mean(axis=0)
            else:
                nearest = _sq_dists(pts, new_centroids).min(axis=1)
                new_centroids[c] = pts[int(np.argmax(nearest))]
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < 0.5:
            break

    rounded = np.clip(np.floor(centroids + 0.5), 0, 255).astype(np.uint8)
    return Codebook(k=k, centroids=_canonical_order(rounded))


def _kmeanspp_init(pts: np.ndarray, n_clusters: int, rng) -> np.ndarray:
    chosen = [pts[int(rng.integers(len(pts)))]]
    while len(chosen) < n_clusters:
        d2 = _sq_dists(pts, np.array(chosen)).min(axis=1)
        total = d2.sum()
        if total <= 0:
            # all points coincide with a centroid already
            chosen.append(pts[int(rng.integers(len(pts)))])
            continue
        idx = int(rng.choice(len(pts), p=d2 / total))
        chosen.append(pts[idx])
    return np.array(chosen, dtype=np.float64)


def _sq_dists(pts: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - centroids[None, :, :]
    return (diff * diff).sum(axis=2)


def _canonical_order(centroids: np.ndarray) -> np.ndarray:
    """Sort by BT.601 luminance ascending, ties by (R, G, B)."""
    if centroids.shape[0] == 0:
        return centroids.astype(np.uint8)
    c = centroids.astype(np.int64)
    luma = c @ _LUMA_WEIGHTS
    order = np.lexsort((c[:, 2], c[:, 1], c[:, 0], luma))
    return centroids[order].astype(np.uint8)


def quantize_soft_edges(frame: Frame, edges: EdgeMap, book: Codebook) -> SoftEdgeMap:
    """Label each edge pixel with its nearest centroid (plus one); 0 elsewhere."""
    if (frame.height, frame.width) != (edges.height, edges.width):
        raise ValueError(
            f"frame {frame.width}x{frame.height} vs edges "
            f"{edges.width}x{edges.height}"
        )
    labels = np.zeros((frame.height, frame.width), dtype=np.uint8)
    idx = edges.mask.astype(bool)
    if idx.any():
        if book.effective_count == 0:
            raise ValueError("nonempty edge mask but empty codebook")
        pts = frame.pixels[idx].astype(np.int64)
        cents = book.centroids.astype(np.int64)
        diff = pts[:, None, :] - cents[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        labels[idx] = np.argmin(d2, axis=1).astype(np.uint8) + 1
    return SoftEdgeMap(labels=labels, k=book.k)


def label_entropy(softmap: SoftEdgeMap) -> float:
    """Shannon entropy (bits/symbol) of the label histogram."""
    counts = np.bincount(softmap.labels.ravel(), minlength=softmap.k)
    counts = counts[counts > 0]
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def render_grayscale(softmap: SoftEdgeMap, book: Codebook) -> LumaPlane:
    """Render labels to luminance: 0 stays black, others show centroid luma."""
    if softmap.labels.size and int(softmap.labels.max()) > book.effective_count:
        raise ValueError("label out of codebook range")
    lut = np.zeros(1 + book.effective_count, dtype=np.uint8)
    if book.effective_count:
        acc = book.centroids.astype(np.int64) @ _LUMA_WEIGHTS
        lut[1:] = np.clip((acc + 500) // 1000, 0, 255).astype(np.uint8)
    return LumaPlane(values=lut[softmap.labels])
