"""Command-line surface: keygen, embed, extract, attack, bench.

Every command is deterministic under --seed (QRSTEG_SEED works as a
fallback). Failures print one machine-readable JSON line on stderr and
exit with 2 for usage problems, 3 for format problems, 4 for crypto
problems, and 5 for capacity problems.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from collections import deque
from pathlib import Path

from . import bench as bench_mod
from . import bitplane, elgamal
from .attacks import AttackSpec, attack_video
from .errors import FormatError, QrstegError, UsageError
from .permute import Splitmix64, StegoKey, derive_seed
from .quality import QualityReport, mse, ssim
from .stego import (
    QR_LEVELS,
    FrameCoder,
    Sidecar,
    StegoConfig,
    clip_cover,
    embed_video,
    extract_video,
    new_sidecar,
)
from .videoio import VideoMeta, read_pgm, read_raw_yuv, read_y4m, write_pgm, write_y4m

DEFAULT_KEY_BITS = 256
DEFAULT_BENCH_ATTACKS = "sp:0.01,sp:0.1,gauss:0:0.01,gauss:0:0.1,poisson,speckle:0.05"


def parse_seed_text(text: str) -> int:
    """Accept a 64-bit integer (decimal or 0x hex) or hash a passphrase."""
    try:
        value = int(text, 0)
    except ValueError:
        return StegoKey.from_passphrase(text).seed
    if not 0 <= value < 1 << 64:
        raise UsageError("integer seeds must fit in 64 bits")
    return value


def resolve_seed(args, *, required: bool) -> int | None:
    if getattr(args, "seed", None) is not None:
        return parse_seed_text(args.seed)
    env = os.environ.get("QRSTEG_SEED")
    if env:
        return parse_seed_text(env)
    if required:
        raise UsageError("this command needs --seed (or the QRSTEG_SEED environment variable)")
    return None


def _load_qr_files(args) -> dict[str, bitplane.QrPlane]:
    paths = {"L": args.qr_l, "M": args.qr_m, "Q": args.qr_q, "H": args.qr_h}
    missing = [flag for flag, p in paths.items() if p is None]
    if missing:
        raise UsageError(f"missing payload images for levels {', '.join(missing)}")
    planes = {}
    for level, path in paths.items():
        with open(path, "rb") as handle:
            planes[level] = bitplane.load_qr(read_pgm(handle))
    return planes


def _open_video(args):
    """Returns (meta, frame iterator, file handle). Caller closes the handle."""
    path = Path(args.input)
    handle = open(path, "rb")
    if path.suffix.lower() == ".y4m":
        meta, frames = read_y4m(handle)
        return meta, frames, handle
    width = getattr(args, "width", None)
    height = getattr(args, "height", None)
    if width is None or height is None:
        handle.close()
        raise UsageError("raw video input needs --width and --height")
    return VideoMeta(width=width, height=height), read_raw_yuv(handle, width, height), handle


def _refuse_overwrite(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise UsageError(f"{path} exists; pass --force to overwrite")


def cmd_keygen(args) -> int:
    pub_path = Path(args.pub)
    priv_path = Path(args.priv)
    _refuse_overwrite(pub_path, args.force)
    _refuse_overwrite(priv_path, args.force)
    seed = resolve_seed(args, required=False)
    rng = Splitmix64(derive_seed(seed, 0x4B4559)) if seed is not None else secrets.SystemRandom()
    if args.paper_fidelity:
        p, alpha, factors = elgamal.DEMO_P, elgamal.DEMO_ALPHA, elgamal.DEMO_P_FACTORS
    else:
        p, alpha = elgamal.generate_key_params(args.bits, rng)
        factors = (2, (p - 1) // 2)
    pub, priv = elgamal.keygen(p, alpha, rng, p_minus_1_factors=factors, forced_x=args.exponent)
    elgamal.save_public_key(pub, pub_path)
    elgamal.save_private_key(priv, priv_path)
    print(f"wrote {pub_path} (p: {p.bit_length()} bits, alpha={pub.alpha}, y={pub.y})")
    print(f"wrote {priv_path}")
    return 0


def cmd_embed(args) -> int:
    seed = resolve_seed(args, required=True)
    key = StegoKey(seed=seed)
    cfg = StegoConfig(key=key, public=elgamal.load_public_key(args.pub))
    qr_set = _load_qr_files(args)
    meta, frames, handle = _open_video(args)
    coder = FrameCoder(key, meta.width, meta.height)
    sidecar = new_sidecar(cfg, coder, meta.frame_rate)
    report = QualityReport()
    pending: deque = deque()

    def tap(source):
        for frame in source:
            ref = clip_cover(frame)
            pending.append((mse(frame, ref), ref))
            yield frame

    def measured(source):
        for stego_frame in source:
            clip_m, ref = pending.popleft()
            report.add_frame(ref, stego_frame)
            report.clip_mse.append(clip_m)
            yield stego_frame

    out_path = Path(args.output)
    try:
        with open(out_path, "wb") as out:
            count = write_y4m(
                meta,
                measured(embed_video(tap(frames), [qr_set], cfg, coder=coder, sidecar=sidecar)),
                out,
            )
    finally:
        handle.close()
    if count == 0:
        out_path.unlink(missing_ok=True)
        raise FormatError("input video has no frames")

    report.embedded_bits = count * 4 * coder.capacity_bits
    report.luma_pixels = count * meta.width * meta.height
    sidecar_path = Path(args.sidecar) if args.sidecar else Path(str(out_path) + ".sidecar.json")
    sidecar.write(sidecar_path)

    print(f"embedded {report.embedded_bits} bits into {count} frames -> {out_path}")
    print(f"capacity: {report.capacity():g} bpp")
    print(
        f"psnr: {report.average_psnr():.3f} dB (luma only {report.average_psnr(luma_only=True):.3f} dB), "
        f"mse: {report.average_mse():.4f}"
    )
    clip_avg = sum(report.clip_mse) / len(report.clip_mse)
    print(f"clip preconditioning mse (cover vs clipped cover): {clip_avg:.6f}")
    print(f"sidecar: {sidecar_path}")
    if args.report:
        with open(args.report, "w", newline="") as out:
            report.write_csv(out)
    return 0


def cmd_extract(args) -> int:
    seed = resolve_seed(args, required=True)
    key = StegoKey(seed=seed)
    cfg = StegoConfig(
        key=key,
        public=elgamal.load_public_key(args.pub),
        private=elgamal.load_private_key(args.priv),
    )
    sidecar_path = Path(args.sidecar) if args.sidecar else Path(str(args.input) + ".sidecar.json")
    sidecar = Sidecar.read(sidecar_path)
    if key.fingerprint() != sidecar.key_fingerprint:
        print(
            "warning: seed fingerprint does not match the sidecar; recovered data will be noise",
            file=sys.stderr,
        )
    originals = {}
    for level, path in (("L", args.qr_l), ("M", args.qr_m), ("Q", args.qr_q), ("H", args.qr_h)):
        if path:
            with open(path, "rb") as handle:
                originals[level] = bitplane.load_qr(read_pgm(handle))

    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta, frames, handle = _open_video(args)
    ssim_sums = {level: 0.0 for level in QR_LEVELS}
    count = 0
    pad_warned = False
    try:
        for result in extract_video(frames, cfg, sidecar):
            for level in QR_LEVELS:
                plane = result.planes[level]
                with open(out_dir / f"{count:04d}_{level}.pgm", "wb") as out:
                    write_pgm(bitplane.render(plane), out)
                if level in originals:
                    ssim_sums[level] += ssim(
                        bitplane.render(originals[level]), bitplane.render(plane)
                    )
            if not result.pad_clean and not pad_warned:
                print(
                    "warning: packing pad bits are nonzero (expected for geometries "
                    "whose payload bit count is not a whole number of bytes)",
                    file=sys.stderr,
                )
                pad_warned = True
            count += 1
    finally:
        handle.close()
    if count < len(sidecar.frames):
        print(
            f"warning: sidecar records {len(sidecar.frames)} frames, video held {count}",
            file=sys.stderr,
        )
    print(f"extracted {count} payload sets into {out_dir}")
    if originals and count:
        for level in QR_LEVELS:
            if level in originals:
                print(f"ssim {level}: {ssim_sums[level] / count:.4f}")
    if args.report and count:
        with open(args.report, "w", newline="") as out:
            out.write("qr_level,ssim\n")
            for level in QR_LEVELS:
                if level in originals:
                    out.write(f"{level},{ssim_sums[level] / count:.6f}\n")
    return 0


def cmd_attack(args) -> int:
    specs = [AttackSpec.parse(text) for text in (args.attack or [])]
    seed = resolve_seed(args, required=False)
    if seed is None:
        seed = 0
    meta, frames, handle = _open_video(args)
    try:
        with open(args.output, "wb") as out:
            count = write_y4m(meta, attack_video(frames, specs, seed), out)
    finally:
        handle.close()
    labels = ",".join(spec.label() for spec in specs) or "none"
    print(f"wrote {count} frames to {args.output} (attacks: {labels}, seed: {seed})")
    return 0


def cmd_bench(args) -> int:
    seed = resolve_seed(args, required=False)
    if seed is None:
        seed = 0
    specs = [AttackSpec.parse(text) for text in args.attacks.split(",") if text.strip()]
    if args.pub and args.priv:
        pub = elgamal.load_public_key(args.pub)
        priv = elgamal.load_private_key(args.priv)
    elif args.pub or args.priv:
        raise UsageError("bench needs both --pub and --priv, or neither")
    else:
        rng = Splitmix64(derive_seed(seed, 0x42454E4348))
        if args.paper_fidelity:
            pub, priv = elgamal.keygen(
                elgamal.DEMO_P, elgamal.DEMO_ALPHA, rng, p_minus_1_factors=elgamal.DEMO_P_FACTORS
            )
        else:
            p, alpha = elgamal.generate_key_params(args.bits, rng)
            pub, priv = elgamal.keygen(p, alpha, rng, p_minus_1_factors=(2, (p - 1) // 2))
    result = bench_mod.run(
        dataset=Path(args.input),
        pub=pub,
        priv=priv,
        seed=seed,
        attack_specs=specs,
        attack_seeds=args.attack_seeds,
        max_frames=args.max_frames,
        robust_frames=args.robust_frames,
    )
    bench_mod.print_tables(result)
    if args.report:
        bench_mod.write_reports(result, Path(args.report))
        print(f"reports: {args.report} and {bench_mod.attacks_report_path(Path(args.report))}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrsteg",
        description="Hide encrypted QR payloads in raw YUV video and measure the damage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", help="64-bit integer or passphrase (env QRSTEG_SEED as fallback)")

    p = sub.add_parser("keygen", help="write a public/private key file pair")
    p.add_argument("--pub", required=True, help="output path for the public key")
    p.add_argument("--priv", required=True, help="output path for the private key")
    p.add_argument("--bits", type=int, default=DEFAULT_KEY_BITS, help="safe-prime size (default 256)")
    p.add_argument(
        "--paper-fidelity",
        action="store_true",
        help="use the small built-in demo parameters (p=997, alpha=809)",
    )
    p.add_argument("--exponent", type=int, help="fix the private exponent (testing only)")
    p.add_argument("--force", action="store_true", help="overwrite existing files")
    add_seed(p)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("embed", help="hide four payload images in a cover video")
    p.add_argument("--input", required=True, help="cover video (.y4m, or raw with --width/--height)")
    p.add_argument("--output", required=True, help="stego video path (.y4m)")
    p.add_argument("--qr-l", help="payload image for the HL carrier (PGM)")
    p.add_argument("--qr-m", help="payload image for the HH carrier (PGM)")
    p.add_argument("--qr-q", help="payload image for the U carrier (PGM)")
    p.add_argument("--qr-h", help="payload image for the V carrier (PGM)")
    p.add_argument("--pub", required=True, help="receiver public key file")
    p.add_argument("--width", type=int, help="raw input width")
    p.add_argument("--height", type=int, help="raw input height")
    p.add_argument("--sidecar", help="sidecar path (default: <output>.sidecar.json)")
    p.add_argument("--report", help="write per-frame fidelity CSV here")
    add_seed(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover payload images from a stego video")
    p.add_argument("--input", required=True, help="stego video (.y4m, or raw with --width/--height)")
    p.add_argument("--output", required=True, help="directory for recovered PGM files")
    p.add_argument("--pub", required=True, help="receiver public key file")
    p.add_argument("--priv", required=True, help="receiver private key file")
    p.add_argument("--sidecar", help="sidecar path (default: <input>.sidecar.json)")
    p.add_argument("--qr-l", help="original L payload for SSIM reporting")
    p.add_argument("--qr-m", help="original M payload for SSIM reporting")
    p.add_argument("--qr-q", help="original Q payload for SSIM reporting")
    p.add_argument("--qr-h", help="original H payload for SSIM reporting")
    p.add_argument("--width", type=int, help="raw input width")
    p.add_argument("--height", type=int, help="raw input height")
    p.add_argument("--report", help="write the SSIM table CSV here")
    add_seed(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("attack", help="run noise attacks over a video")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument(
        "--attack",
        action="append",
        help="attack spec (sp:D, gauss:M:V, poisson, speckle:V); repeatable, applied in order",
    )
    p.add_argument("--width", type=int, help="raw input width")
    p.add_argument("--height", type=int, help="raw input height")
    add_seed(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("bench", help="fidelity and robustness tables over a Y4M directory")
    p.add_argument("--input", required=True, help="directory of .y4m cover clips")
    p.add_argument("--report", help="CSV path for the fidelity table (robustness CSV lands beside it)")
    p.add_argument("--attacks", default=DEFAULT_BENCH_ATTACKS, help="comma-separated attack specs")
    p.add_argument("--attack-seeds", type=int, default=5, help="noise seeds per attack (default 5)")
    p.add_argument("--max-frames", type=int, help="cap frames per clip")
    p.add_argument(
        "--robust-frames", type=int, default=30, help="frames per clip for the robustness runs"
    )
    p.add_argument("--pub", help="use an existing public key")
    p.add_argument("--priv", help="use an existing private key")
    p.add_argument(
        "--paper-fidelity", action="store_true", help="generate the small demo key instead of a fresh one"
    )
    p.add_argument("--bits", type=int, default=DEFAULT_KEY_BITS, help="key size when generating")
    add_seed(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QrstegError as exc:
        line = json.dumps({"error": type(exc).__name__, "exit": exc.exit_code, "message": str(exc)})
        print(line, file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        line = json.dumps({"error": "OSError", "exit": 3, "message": str(exc)})
        print(line, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
