"""The embedding and extraction pipeline.

Per frame: the luma plane is clipped to [2, 253] and decomposed with the
reversible integer Haar transform; two encrypted payload bit streams go
into the LSBs of the HL and HH detail coefficients in keyed order, the
other two into the LSBs of the U and V chroma samples. Payload bits are
stream-permuted before carrier placement, and every frame gets a fresh
keystream whose public values land in a sidecar the extractor consumes.

The clip guarantees reconstruction stays inside [0, 255]; because the
transform is an exact integer bijection, a second decomposition of the
stored stego frame returns the edited coefficients bit for bit.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import elgamal, permute
from .bitplane import PackedPayload, QrPlane, pack, payload_from_bits, unpack
from .elgamal import CipherBundle, ElGamalPrivate, ElGamalPublic
from .errors import CapacityError, CryptoError, FormatError, ShapeError
from .videoio import FrameYuv420
from .wavelet import fwd_haar_int, inv_haar_int

QR_LEVELS = ("L", "M", "Q", "H")

# Fixed carrier mapping: L->HL, M->HH, Q->U, H->V.
CARRIER_TAGS = {
    "L": permute.TAG_COEFF_HL,
    "M": permute.TAG_COEFF_HH,
    "Q": permute.TAG_CHROMA_U,
    "H": permute.TAG_CHROMA_V,
}
PAYLOAD_TAGS = {
    "L": permute.TAG_PAYLOAD_L,
    "M": permute.TAG_PAYLOAD_M,
    "Q": permute.TAG_PAYLOAD_Q,
    "H": permute.TAG_PAYLOAD_H,
}
LEVEL_INDEX = {level: i for i, level in enumerate(QR_LEVELS)}

CLIP_LO = 2
CLIP_HI = 253

SIDECAR_FORMAT = "qrsteg-sidecar"
SIDECAR_VERSION = 1


@dataclass
class StegoConfig:
    """Key material for one run; private key only needed to extract."""

    key: permute.StegoKey
    public: ElGamalPublic
    private: ElGamalPrivate | None = None


@dataclass
class FramePayload:
    """Per-level cipher bundles plus the stream-permuted bit view of each ciphertext."""

    bundles: dict[str, CipherBundle]
    bits: dict[str, np.ndarray]


def set_lsb(value, bit):
    """Force the floor-parity LSB: 2 * floor(v / 2) + bit. Never moves floor(v / 2)."""
    return 2 * (value // 2) + bit


def get_lsb(value):
    """Floor-parity LSB: v - 2 * floor(v / 2), always 0 or 1."""
    return value - 2 * (value // 2)


def clip_cover(frame: FrameYuv420) -> FrameYuv420:
    """The cover as the embedder actually uses it: luma limited to [2, 253]."""
    return FrameYuv420(y=np.clip(frame.y, CLIP_LO, CLIP_HI), u=frame.u.copy(), v=frame.v.copy())


class FrameCoder:
    """Embeds and extracts single frames of one geometry under one key.

    All eight permutations are built once here and reused across frames;
    they depend only on (key, tag, size).
    """

    def __init__(self, key: permute.StegoKey, width: int, height: int):
        if width % 2 or height % 2 or width <= 0 or height <= 0:
            raise ShapeError(f"cover dimensions must be even and positive, got {width}x{height}")
        self.key = key
        self.width = width
        self.height = height
        self.capacity_bits = (width // 2) * (height // 2)  # per carrier
        self._carrier = {
            level: permute.keyed_permutation(key, tag, self.capacity_bits).forward
            for level, tag in CARRIER_TAGS.items()
        }
        self._payload = {
            level: permute.keyed_permutation(key, tag, self.capacity_bits).forward
            for level, tag in PAYLOAD_TAGS.items()
        }

    def qr_shape(self) -> tuple[int, int]:
        """(width, height) every payload plane must have."""
        return self.width // 2, self.height // 2

    def permute_payload(self, level: str, cipher_bits: np.ndarray) -> np.ndarray:
        return cipher_bits[self._payload[level]]

    def unpermute_payload(self, level: str, permuted: np.ndarray) -> np.ndarray:
        out = np.empty_like(permuted)
        out[self._payload[level]] = permuted
        return out

    def embed(self, frame: FrameYuv420, payload: FramePayload) -> FrameYuv420:
        if frame.width != self.width or frame.height != self.height:
            raise ShapeError("frame geometry does not match this coder")
        for level in QR_LEVELS:
            bits = payload.bits.get(level)
            if bits is None or bits.size != self.capacity_bits:
                raise CapacityError(
                    f"level {level} carries {0 if bits is None else bits.size} bits, "
                    f"carrier holds exactly {self.capacity_bits}"
                )
        bands = fwd_haar_int(np.clip(frame.y, CLIP_LO, CLIP_HI))
        for level, band in (("L", bands.hl), ("M", bands.hh)):
            flat = band.reshape(-1)
            idx = self._carrier[level]
            flat[idx] = set_lsb(flat[idx], payload.bits[level].astype(np.int64))
        y = inv_haar_int(bands)
        if y.min() < 0 or y.max() > 255:
            raise ShapeError("internal error: reconstruction left the sample range")
        out_u = frame.u.reshape(-1).copy()
        out_v = frame.v.reshape(-1).copy()
        for level, plane in (("Q", out_u), ("H", out_v)):
            idx = self._carrier[level]
            plane[idx] = set_lsb(plane[idx], payload.bits[level].astype(np.uint8))
        h2, w2 = self.height // 2, self.width // 2
        return FrameYuv420(
            y=y.astype(np.uint8),
            u=out_u.reshape(h2, w2),
            v=out_v.reshape(h2, w2),
        )

    def extract(self, frame: FrameYuv420) -> dict[str, np.ndarray]:
        """Recover the four ciphertext bit streams in original bit order."""
        if frame.width != self.width or frame.height != self.height:
            raise ShapeError("frame geometry does not match this coder")
        bands = fwd_haar_int(frame.y)
        streams: dict[str, np.ndarray] = {}
        for level, carrier in (
            ("L", bands.hl.reshape(-1)),
            ("M", bands.hh.reshape(-1)),
            ("Q", frame.u.reshape(-1).astype(np.int64)),
            ("H", frame.v.reshape(-1).astype(np.int64)),
        ):
            permuted = get_lsb(carrier[self._carrier[level]]).astype(np.uint8)
            streams[level] = self.unpermute_payload(level, permuted)
        return streams


def payload_rng(key: permute.StegoKey, level: str, frame_index: int) -> permute.Splitmix64:
    """Ephemeral-exponent stream for one (frame, level), derived so frames
    can be processed in any order with identical results."""
    seed = permute.derive_seed(key.seed, permute.TAG_KEY_DRAW, LEVEL_INDEX[level], frame_index)
    return permute.Splitmix64(seed)


def prepare_payload(
    qr_set: Mapping[str, QrPlane], cfg: StegoConfig, frame_index: int, coder: FrameCoder
) -> FramePayload:
    """Pack, encrypt, and stream-permute one four-plane payload set."""
    qw, qh = coder.qr_shape()
    bundles: dict[str, CipherBundle] = {}
    bits: dict[str, np.ndarray] = {}
    for level in QR_LEVELS:
        plane = qr_set.get(level)
        if plane is None:
            raise CapacityError(f"payload set lacks level {level}")
        if (plane.width, plane.height) != (qw, qh):
            raise CapacityError(
                f"level {level} plane is {plane.width}x{plane.height}, cover needs {qw}x{qh}"
            )
        packed = pack(plane)
        rng = payload_rng(cfg.key, level, frame_index)
        bundle = elgamal.stream_encrypt(packed.data, cfg.public, rng)
        cipher_bits = np.unpackbits(
            np.frombuffer(bundle.ciphertext, dtype=np.uint8), count=coder.capacity_bits
        )
        bundles[level] = bundle
        bits[level] = coder.permute_payload(level, cipher_bits)
    return FramePayload(bundles=bundles, bits=bits)


@dataclass
class Sidecar:
    """Everything the extractor needs besides the keys and the stego video.

    Secret bits never appear here: per frame and level it records only the
    sender public values that regenerate the keystream.
    """

    width: int
    height: int
    qr_width: int
    qr_height: int
    plain_len: int
    key_fingerprint: str
    frame_rate: str = "25:1"
    frames: list[dict[str, list[int]]] = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "format": SIDECAR_FORMAT,
            "version": SIDECAR_VERSION,
            "video": {
                "width": self.width,
                "height": self.height,
                "frame_count": len(self.frames),
                "frame_rate": self.frame_rate,
            },
            "qr": {"width": self.qr_width, "height": self.qr_height},
            "plain_len": self.plain_len,
            "key_fingerprint": self.key_fingerprint,
            "frames": [
                {level: [str(d) for d in publics] for level, publics in record.items()}
                for record in self.frames
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Sidecar":
        try:
            doc = json.loads(text)
        except ValueError as exc:
            raise FormatError(f"sidecar is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("format") != SIDECAR_FORMAT:
            raise FormatError("not a qrsteg sidecar")
        if doc.get("version") != SIDECAR_VERSION:
            raise FormatError(f"unsupported sidecar version {doc.get('version')}")
        try:
            video = doc["video"]
            side = cls(
                width=int(video["width"]),
                height=int(video["height"]),
                qr_width=int(doc["qr"]["width"]),
                qr_height=int(doc["qr"]["height"]),
                plain_len=int(doc["plain_len"]),
                key_fingerprint=str(doc["key_fingerprint"]),
                frame_rate=str(video.get("frame_rate", "25:1")),
                frames=[
                    {level: [int(d) for d in publics] for level, publics in record.items()}
                    for record in doc["frames"]
                ],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed sidecar field: {exc}") from exc
        return side

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="ascii")

    @classmethod
    def read(cls, path: str | Path) -> "Sidecar":
        try:
            text = Path(path).read_text(encoding="ascii")
        except OSError as exc:
            raise FormatError(f"cannot read sidecar {path}: {exc}") from exc
        return cls.from_json(text)


def new_sidecar(cfg: StegoConfig, coder: FrameCoder, frame_rate: str = "25:1") -> Sidecar:
    qw, qh = coder.qr_shape()
    return Sidecar(
        width=coder.width,
        height=coder.height,
        qr_width=qw,
        qr_height=qh,
        plain_len=(coder.capacity_bits + 7) // 8,
        key_fingerprint=cfg.key.fingerprint(),
        frame_rate=frame_rate,
    )


def embed_video(
    frames: Iterable[FrameYuv420],
    qr_sets: Sequence[Mapping[str, QrPlane]],
    cfg: StegoConfig,
    *,
    coder: FrameCoder | None = None,
    sidecar: Sidecar | None = None,
) -> Iterator[FrameYuv420]:
    """Embed one payload set per frame, cycling the supplied sets.

    Appends one record per frame to the sidecar when given. Every frame
    draws fresh ephemeral exponents, so identical payloads still produce
    different ciphertext from frame to frame.
    """
    if not qr_sets:
        raise CapacityError("at least one payload set is required")
    cfg.public.validate()
    sets = itertools.cycle(qr_sets)
    for index, frame in enumerate(frames):
        if coder is None:
            coder = FrameCoder(cfg.key, frame.width, frame.height)
        payload = prepare_payload(next(sets), cfg, index, coder)
        if sidecar is not None:
            sidecar.frames.append(
                {level: list(payload.bundles[level].sender_publics) for level in QR_LEVELS}
            )
        yield coder.embed(frame, payload)


@dataclass
class ExtractedSet:
    """One frame's recovered payload planes plus a padding sanity verdict."""

    planes: dict[str, QrPlane]
    pad_clean: bool


def decode_frame_streams(
    streams: Mapping[str, np.ndarray],
    publics_by_level: Mapping[str, Sequence[int]],
    cfg: StegoConfig,
    qr_width: int,
    qr_height: int,
    plain_len: int,
) -> ExtractedSet:
    """Decrypt extracted ciphertext bit streams back into payload planes."""
    if cfg.private is None:
        raise CryptoError("extraction requires the private key")
    bit_count = qr_width * qr_height
    planes: dict[str, QrPlane] = {}
    pad_clean = True
    for level in QR_LEVELS:
        bits = streams[level]
        if bits.size != bit_count:
            raise ShapeError(
                f"level {level} stream has {bits.size} bits, payload needs {bit_count}"
            )
        packed = payload_from_bits(bits)
        if len(packed.data) != plain_len:
            raise FormatError(
                f"sidecar plain_len {plain_len} disagrees with payload size {len(packed.data)}"
            )
        bundle = CipherBundle(
            sender_publics=tuple(publics_by_level[level]),
            ciphertext=packed.data,
            plain_len=plain_len,
        )
        plain = elgamal.stream_decrypt(bundle, cfg.public.p, cfg.private)
        if bit_count % 8:
            # Pad bits are never transmitted, so after decryption they hold
            # keystream residue; report them for the caller's warning.
            tail = plain[-1] & ((1 << (8 - bit_count % 8)) - 1)
            pad_clean = pad_clean and tail == 0
        planes[level] = unpack(PackedPayload(bit_count=bit_count, data=plain), qr_width, qr_height)
    return ExtractedSet(planes=planes, pad_clean=pad_clean)


def extract_video(
    frames: Iterable[FrameYuv420],
    cfg: StegoConfig,
    sidecar: Sidecar,
    *,
    coder: FrameCoder | None = None,
) -> Iterator[ExtractedSet]:
    """Recover one payload set per frame using the sidecar's key material."""
    for index, frame in enumerate(frames):
        if coder is None:
            coder = FrameCoder(cfg.key, frame.width, frame.height)
        if (frame.width, frame.height) != (sidecar.width, sidecar.height):
            raise ShapeError("stego video geometry disagrees with the sidecar")
        if index >= len(sidecar.frames):
            raise FormatError(f"sidecar records {len(sidecar.frames)} frames, video has more")
        streams = coder.extract(frame)
        yield decode_frame_streams(
            streams,
            sidecar.frames[index],
            cfg,
            sidecar.qr_width,
            sidecar.qr_height,
            sidecar.plain_len,
        )
