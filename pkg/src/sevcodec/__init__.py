"""Two-stage soft-edge video codec toolkit."""

from .container import (
    DecodedVideo,
    EncodeConfig,
    EncodeResult,
    ExternalCodec,
    RawPngCodec,
    SevFile,
    SevHeader,
    bitrate_kbps,
    decode_sev,
    encode_video,
    parse_container,
    read_sem,
    serialize_container,
    write_sem,
)
from .downsample import downsample
from .entropy import (
    CompressedChunk,
    CorruptStreamError,
    HuffmanTable,
    RunToken,
    compress_chunk,
    decompress_chunk,
    huffman_build,
    rle_tokenize,
)
from .metrics import ms_ssim, psnr, ssim
from .rdsweep import SweepConfig, run_sweep
from .softedge import (
    Codebook,
    EdgeMap,
    SoftEdgeMap,
    detect_edges,
    fit_codebook,
    label_entropy,
    quantize_soft_edges,
    render_grayscale,
)
from .video import (
    Frame,
    FramePartition,
    LumaPlane,
    VideoIOError,
    VideoSequence,
    load_video,
    partition_frames,
    rgb_to_luma,
    save_frames,
)

__version__ = "0.1.0"
