import struct
from fractions import Fraction

import numpy as np
import pytest

from sevcodec import (
    CorruptStreamError,
    EncodeConfig,
    ExternalCodec,
    Frame,
    RawPngCodec,
    SevFile,
    SevHeader,
    VideoSequence,
    bitrate_kbps,
    decode_sev,
    encode_video,
    parse_container,
    psnr,
    read_sem,
    serialize_container,
    write_sem,
)
from sevcodec.container import ContainerError

from conftest import make_rect_video


def _golden_header_bytes():
    """Hand-assembled minimal header per the documented byte layout."""
    out = bytearray()
    out += b"SEVC"
    out += bytes([1])  # version
    out += struct.pack("<H", 2)  # width
    out += struct.pack("<H", 2)  # height
    out += struct.pack("<I", 25)  # fps numerator
    out += struct.pack("<I", 1)  # fps denominator
    out += struct.pack("<I", 1)  # frame count
    out += bytes([1])  # scale
    out += bytes([2])  # k
    out += bytes([1])  # effective_count
    out += struct.pack("<Q", 7)  # kmeans seed
    out += bytes([50, 150])  # canny thresholds
    out += bytes([0])  # key codec id (raw)
    out += struct.pack("<I", 1)  # key frame count
    out += bytes([0])  # varint delta: key index 0
    out += bytes([10, 20, 30])  # palette entry
    return bytes(out)


class TestHeader:
    def test_golden_fixture_parses(self):
        header, used = SevHeader.from_bytes(_golden_header_bytes())
        assert used == len(_golden_header_bytes())
        assert (header.width, header.height) == (2, 2)
        assert header.fps == Fraction(25)
        assert header.frame_count == 1
        assert header.scale == 1
        assert header.k == 2
        assert header.kmeans_seed == 7
        assert (header.canny_low, header.canny_high) == (50, 150)
        assert header.key_indices == (0,)
        assert np.array_equal(header.palette, [[10, 20, 30]])

    def test_golden_fixture_round_trips(self):
        header, _ = SevHeader.from_bytes(_golden_header_bytes())
        assert header.to_bytes() == _golden_header_bytes()

    def test_bad_magic(self):
        data = b"XXXX" + _golden_header_bytes()[4:]
        with pytest.raises(ContainerError, match="magic"):
            SevHeader.from_bytes(data)

    def test_unsupported_version(self):
        data = bytearray(_golden_header_bytes())
        data[4] = 9
        with pytest.raises(ContainerError, match="version"):
            SevHeader.from_bytes(bytes(data))

    def test_truncation(self):
        with pytest.raises(ContainerError):
            SevHeader.from_bytes(_golden_header_bytes()[:10])

    def test_non_monotone_key_indices(self):
        header, _ = SevHeader.from_bytes(_golden_header_bytes())
        with pytest.raises(ContainerError):
            SevHeader(
                width=2,
                height=2,
                fps=Fraction(25),
                frame_count=4,
                scale=1,
                k=2,
                kmeans_seed=0,
                canny_low=50,
                canny_high=150,
                key_codec_id=0,
                key_indices=(0, 3, 2),
                palette=header.palette,
            )


class TestContainerRoundTrip:
    def test_one_frame_video(self):
        video = make_rect_video(n_frames=1)
        result = encode_video(video, EncodeConfig(alpha=1.0, scale=2, k=8))
        assert len(result.sev.chunks) == 0
        assert len(result.sev.header.key_indices) == 1
        data = serialize_container(result.sev)
        assert parse_container(data) == result.sev

    def test_serialize_parse_identity(self, rect_video):
        result = encode_video(rect_video, EncodeConfig(alpha=0.25, scale=2, k=8))
        data = serialize_container(result.sev)
        assert serialize_container(parse_container(data)) == data

    def test_trailing_garbage_rejected(self, rect_video):
        result = encode_video(rect_video, EncodeConfig(alpha=0.25, scale=2, k=8))
        data = serialize_container(result.sev) + b"\x00"
        with pytest.raises(ContainerError, match="trailing"):
            parse_container(data)

    def test_section_size_accounting(self, rect_video):
        result = encode_video(rect_video, EncodeConfig(alpha=0.25, scale=2, k=8))
        data = serialize_container(result.sev)
        assert len(data) == sum(result.sev.section_sizes().values())


class TestEncodeDecode:
    def test_alpha_one_degenerates_to_keyframes_only(self, rect_video):
        result = encode_video(rect_video, EncodeConfig(alpha=1.0, scale=2, k=8))
        assert result.sev.chunks == ()
        decoded = decode_sev(result.sev)
        # RAW codec is lossless: key frames come back bit-identical
        for i, frame in zip(decoded.header.key_indices, decoded.key_frames):
            assert np.array_equal(frame.pixels, rect_video.frames[i].pixels)
            assert psnr(rect_video.frames[i], frame) == 100.0

    def test_key_frames_bit_identical_with_raw_codec(self, rect_video):
        result = encode_video(rect_video, EncodeConfig(alpha=0.25, scale=2, k=8))
        decoded = decode_sev(result.sev)
        for i, frame in zip(decoded.header.key_indices, decoded.key_frames):
            assert np.array_equal(frame.pixels, rect_video.frames[i].pixels)

    def test_map_symmetry_across_config_grid(self, rect_video):
        for scale in (2, 4):
            for k in (2, 8):
                for seed in (0, 9):
                    cfg = EncodeConfig(alpha=0.25, scale=scale, k=k, kmeans_seed=seed)
                    result = encode_video(rect_video, cfg)
                    decoded = decode_sev(parse_container(serialize_container(result.sev)))
                    for a, b in zip(result.key_maps, decoded.key_maps):
                        assert np.array_equal(a.labels, b.labels)
                    for t, m in result.g_maps.items():
                        assert np.array_equal(m.labels, decoded.g_maps[t].labels)

    def test_gop_structure(self):
        video = make_rect_video(n_frames=20)
        result = encode_video(video, EncodeConfig(alpha=0.2, scale=2, k=8))
        assert len(result.sev.header.key_indices) == 4
        assert result.sev.header.key_indices == (0, 5, 10, 15)
        assert len(result.sev.chunks) == 4
        assert all(c.frame_count == 4 for c in result.sev.chunks)

    def test_corrupt_chunk_names_gop(self, rect_video):
        result = encode_video(rect_video, EncodeConfig(alpha=0.25, scale=2, k=8))
        chunks = list(result.sev.chunks)
        bad = chunks[2]
        chunks[2] = type(bad)(
            scan_mode=bad.scan_mode,
            frame_count=bad.frame_count + 1,
            width=bad.width,
            height=bad.height,
            k=bad.k,
            label_lengths=bad.label_lengths,
            run_lengths=bad.run_lengths,
            payload_bit_count=bad.payload_bit_count,
            payload=bad.payload,
        )
        corrupted = SevFile(
            header=result.sev.header,
            key_payload=result.sev.key_payload,
            chunks=tuple(chunks),
        )
        with pytest.raises(CorruptStreamError, match="GOP 2"):
            decode_sev(corrupted)


class TestExternalCodec:
    def test_cp_identity_codec(self, rect_video):
        # cp as E1/D1: the "bitstream" is the raw RGB24 itself
        codec = ExternalCodec("cp {in} {out}", "cp {in} {out}")
        cfg = EncodeConfig(alpha=0.25, scale=2, k=8, key_codec=codec)
        result = encode_video(rect_video, cfg)
        assert result.sev.header.key_codec_id == 1
        decoded = decode_sev(result.sev, key_codec=codec)
        for i, frame in zip(decoded.header.key_indices, decoded.key_frames):
            assert np.array_equal(frame.pixels, rect_video.frames[i].pixels)

    def test_failing_command_diagnostics(self, rect_video):
        codec = ExternalCodec("false", "false")
        cfg = EncodeConfig(alpha=1.0, scale=2, k=8, key_codec=codec)
        with pytest.raises(ContainerError, match="external codec failed"):
            encode_video(rect_video, cfg)

    def test_ext_decode_requires_explicit_codec(self, rect_video):
        codec = ExternalCodec("cp {in} {out}", "cp {in} {out}")
        result = encode_video(rect_video, EncodeConfig(alpha=1.0, key_codec=codec))
        with pytest.raises(ContainerError, match="external key codec"):
            decode_sev(result.sev)


def _padded_sev(total_bits, frame_count, fps):
    """SevFile whose serialized size is exactly total_bits, via payload padding."""
    header = SevHeader(
        width=2,
        height=2,
        fps=fps,
        frame_count=frame_count,
        scale=1,
        k=2,
        kmeans_seed=0,
        canny_low=50,
        canny_high=150,
        key_codec_id=0,
        key_indices=(0,),
        palette=np.zeros((0, 3), np.uint8),
    )
    overhead = len(header.to_bytes()) + 8 + 4
    assert total_bits % 8 == 0
    pad = total_bits // 8 - overhead
    return SevFile(header=header, key_payload=b"\x00" * pad, chunks=())


class TestBitrate:
    def test_ten_second_example(self):
        sev = _padded_sev(71_400, frame_count=250, fps=Fraction(25))
        report = bitrate_kbps(sev)
        assert report.total_bits == 71_400
        assert report.total_kbps == pytest.approx(7.14, rel=1e-9)

    def test_8000_frame_example(self):
        sev = _padded_sev(2_284_800, frame_count=8000, fps=Fraction(25))
        report = bitrate_kbps(sev)
        assert report.total_kbps == pytest.approx(7.14, rel=1e-9)

    def test_split_sums_to_total(self, rect_video):
        result = encode_video(rect_video, EncodeConfig(alpha=0.25, scale=2, k=8))
        report = bitrate_kbps(result.sev)
        assert report.total_bits == report.key_bits + report.g_bits + report.header_bits
        assert report.total_kbps == pytest.approx(
            report.key_kbps + report.g_kbps + report.header_kbps
        )

    def test_key_only_stream(self):
        video = make_rect_video(n_frames=4)
        result = encode_video(video, EncodeConfig(alpha=1.0, scale=2, k=8))
        report = bitrate_kbps(result.sev)
        assert report.g_bits == 0
        assert report.key_bits > 0


class TestSem:
    def test_round_trip(self, rect_video, tmp_path):
        result = encode_video(rect_video, EncodeConfig(alpha=0.25, scale=2, k=8))
        decoded = decode_sev(result.sev)
        path = tmp_path / "maps.sem"
        write_sem(path, decoded)
        sem = read_sem(path)
        assert sem.k == 8
        assert (sem.width, sem.height) == (
            decoded.header.map_width,
            decoded.header.map_height,
        )
        assert np.array_equal(sem.palette, decoded.header.palette)
        assert len(sem.entries) == len(rect_video)
        key_set = set(decoded.header.key_indices)
        for idx, is_key, m in sem.entries:
            assert is_key == (1 if idx in key_set else 0)
            src = (
                decoded.key_maps[decoded.header.key_indices.index(idx)]
                if is_key
                else decoded.g_maps[idx]
            )
            assert np.array_equal(m.labels, src.labels)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.sem"
        p.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ContainerError, match="magic"):
            read_sem(p)
