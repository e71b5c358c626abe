"""ElGamal key handling and the XOR-keystream variant used for payloads.

Two schemes share the key material. The classic scheme encrypts one
integer unit per ephemeral exponent; its ciphertext is larger than the
message. The stream variant draws a sequence of shared secrets, expands
them into a byte keystream, and XORs that with the payload, so the
ciphertext has exactly the payload's length. The receiver regenerates
the keystream from the sender's public values and its private exponent.
"""

from __future__ import annotations

import json
import secrets
from dataclasses import dataclass
from pathlib import Path

from .errors import CryptoError, FormatError

MILLER_RABIN_ROUNDS = 40

# Small primes used to pre-sieve candidates during key generation.
_SIEVE_PRIMES: list[int] = []


def _sieve_primes(limit: int = 2000) -> list[int]:
    if not _SIEVE_PRIMES:
        flags = bytearray([1]) * limit
        flags[0:2] = b"\x00\x00"
        for i in range(2, int(limit**0.5) + 1):
            if flags[i]:
                flags[i * i :: i] = b"\x00" * len(flags[i * i :: i])
        _SIEVE_PRIMES.extend(i for i in range(limit) if flags[i])
    return _SIEVE_PRIMES


def modpow(base: int, exp: int, modulus: int) -> int:
    """Square-and-multiply base**exp mod modulus, result in [0, modulus)."""
    if modulus < 2:
        raise CryptoError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise CryptoError("exponent must be non-negative")
    result = 1
    base %= modulus
    while exp:
        if exp & 1:
            result = result * base % modulus
        base = base * base % modulus
        exp >>= 1
    return result


def is_probable_prime(n: int, rounds: int = MILLER_RABIN_ROUNDS) -> bool:
    """Miller-Rabin with the given number of random rounds."""
    if n < 2:
        return False
    for p in _sieve_primes():
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = 2 + secrets.randbelow(n - 3)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class ElGamalPublic:
    """Receiver public key: prime modulus p, primitive root alpha, y = alpha^x mod p."""

    p: int
    alpha: int
    y: int

    def validate(self, p_minus_1_factors: tuple[int, ...] | None = None) -> None:
        """Check the key invariants.

        The primitive-root property is only verified when the prime
        factorization of p - 1 is supplied; factoring arbitrary moduli
        is out of scope, so unverified keys are accepted as-is.
        """
        if not is_probable_prime(self.p):
            raise CryptoError(f"p = {self.p} is not prime")
        if not 1 < self.alpha < self.p - 1:
            raise CryptoError("alpha out of range (1, p - 1)")
        if not 0 < self.y < self.p:
            raise CryptoError("y out of range (0, p)")
        if p_minus_1_factors:
            for q in p_minus_1_factors:
                if (self.p - 1) % q != 0:
                    raise CryptoError(f"{q} does not divide p - 1")
                if modpow(self.alpha, (self.p - 1) // q, self.p) == 1:
                    raise CryptoError(f"alpha is not a primitive root of p (order divides (p-1)/{q})")


@dataclass(frozen=True)
class ElGamalPrivate:
    """Receiver private exponent."""

    x: int


@dataclass(frozen=True)
class CipherBundle:
    """Stream-cipher output: sender public values plus XORed payload bytes.

    sender_publics holds one group element per keystream draw; together
    with the receiver's private exponent they regenerate the keystream.
    Trailing entries may contribute only truncated bytes but are kept,
    so regeneration mirrors encryption exactly.
    """

    sender_publics: tuple[int, ...]
    ciphertext: bytes
    plain_len: int

    def validate(self, p: int) -> None:
        if len(self.ciphertext) != self.plain_len:
            raise CryptoError("ciphertext length disagrees with plain_len")
        if self.plain_len > 0 and not self.sender_publics:
            raise CryptoError("bundle carries payload but no sender public values")
        for d in self.sender_publics:
            if not 0 < d < p:
                raise CryptoError(f"sender public value {d} out of range (0, p)")


@dataclass(frozen=True)
class Keystream:
    """Expanded key bytes plus the public values needed to regenerate them."""

    sender_publics: tuple[int, ...]
    key_bytes: bytes
    exponents: tuple[int, ...] | None = None  # retained only when captured for tests


# Paper-scale demo parameters, small enough to brute-force in tests.
DEMO_P = 997
DEMO_ALPHA = 809
DEMO_P_FACTORS = (2, 3, 83)  # p - 1 = 996 = 2^2 * 3 * 83


def keygen(p: int, alpha: int, rng, *, p_minus_1_factors: tuple[int, ...] | None = None,
           forced_x: int | None = None) -> tuple[ElGamalPublic, ElGamalPrivate]:
    """Draw a private exponent in (1, p - 2) and derive the public key.

    rng must expose randrange(start, stop). forced_x bypasses the draw
    so fixed test keys are reproducible.
    """
    if p < 5:
        raise CryptoError(f"modulus too small for key generation: {p}")
    if not 1 < alpha < p - 1:
        raise CryptoError("alpha out of range (1, p - 1)")
    x = forced_x if forced_x is not None else rng.randrange(2, p - 2)
    if not 1 < x < p - 2:
        raise CryptoError(f"private exponent {x} out of range (1, p - 2)")
    pub = ElGamalPublic(p=p, alpha=alpha, y=modpow(alpha, x, p))
    pub.validate(p_minus_1_factors)
    return pub, ElGamalPrivate(x=x)


def classic_encrypt(m: int, pub: ElGamalPublic, k: int) -> tuple[int, int]:
    """Encrypt one integer unit: returns (alpha^k, y^k * m) mod p."""
    if not 0 <= m <= pub.p - 1:
        raise CryptoError(f"message unit {m} out of range [0, p - 1]")
    if not 1 < k < pub.p - 2:
        raise CryptoError(f"ephemeral exponent {k} out of range (1, p - 2)")
    d = modpow(pub.alpha, k, pub.p)
    z = modpow(pub.y, k, pub.p) * m % pub.p
    return d, z


def classic_decrypt(d: int, z: int, pub: ElGamalPublic, priv: ElGamalPrivate) -> int:
    """Invert classic_encrypt: m = d^(p - 1 - x) * z mod p."""
    if not 0 < d < pub.p:
        raise CryptoError(f"invalid ciphertext: d = {d} not in (0, p)")
    if not 0 <= z < pub.p:
        raise CryptoError(f"invalid ciphertext: z = {z} not in [0, p)")
    r = modpow(d, pub.p - 1 - priv.x, pub.p)
    return r * z % pub.p


def int_to_bytes_le(v: int) -> bytes:
    """Minimal little-endian byte decomposition of a positive integer."""
    if v <= 0:
        raise CryptoError(f"cannot expand non-positive value {v}")
    return v.to_bytes((v.bit_length() + 7) // 8, "little")


def keystream(pub: ElGamalPublic, nbytes: int, rng, *, capture_exponents: bool = False) -> Keystream:
    """Derive at least nbytes of key material, then truncate to exactly nbytes.

    Each draw picks a fresh ephemeral exponent k, records alpha^k mod p
    for the receiver, and appends the minimal little-endian bytes of
    y^k mod p to the key. Excess bytes are dropped from the end; the
    public value that produced them is still recorded.
    """
    if nbytes < 0:
        raise CryptoError("requested key length is negative")
    publics: list[int] = []
    exponents: list[int] = []
    parts: list[bytes] = []
    total = 0
    while total < nbytes:
        k = rng.randrange(2, pub.p - 2)
        publics.append(modpow(pub.alpha, k, pub.p))
        shared = modpow(pub.y, k, pub.p)
        chunk = int_to_bytes_le(shared)
        parts.append(chunk)
        total += len(chunk)
        if capture_exponents:
            exponents.append(k)
    key = b"".join(parts)[:nbytes]
    return Keystream(
        sender_publics=tuple(publics),
        key_bytes=key,
        exponents=tuple(exponents) if capture_exponents else None,
    )


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise CryptoError("XOR operands differ in length")
    n = len(a)
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(n, "little")


def stream_encrypt(plain: bytes, pub: ElGamalPublic, rng) -> CipherBundle:
    """XOR the payload with a fresh keystream; no ciphertext expansion."""
    ks = keystream(pub, len(plain), rng)
    return CipherBundle(
        sender_publics=ks.sender_publics,
        ciphertext=xor_bytes(plain, ks.key_bytes),
        plain_len=len(plain),
    )


def regenerate_keystream(sender_publics: tuple[int, ...], p: int, priv: ElGamalPrivate, nbytes: int) -> bytes:
    """Receiver-side keystream: expand d^x mod p for every sender public value."""
    parts = [int_to_bytes_le(modpow(d, priv.x, p)) for d in sender_publics]
    key = b"".join(parts)
    if len(key) < nbytes:
        raise CryptoError(
            f"corrupt bundle: regenerated keystream has {len(key)} bytes, need {nbytes}"
        )
    return key[:nbytes]


def stream_decrypt(bundle: CipherBundle, p: int, priv: ElGamalPrivate) -> bytes:
    """Invert stream_encrypt using the receiver's private exponent."""
    bundle.validate(p)
    key = regenerate_keystream(bundle.sender_publics, p, priv, bundle.plain_len)
    return xor_bytes(bundle.ciphertext, key)


def generate_key_params(bits: int, rng) -> tuple[int, int]:
    """Find a safe prime p = 2q + 1 of the given size and a generator alpha.

    With p - 1 = 2q, alpha is a primitive root iff alpha^2 != 1 and
    alpha^q != 1 (mod p), so the generator check here is exact.
    """
    if bits < 16:
        raise CryptoError("key size below 16 bits is not supported")
    small = _sieve_primes()
    while True:
        q = rng.getrandbits(bits - 1) | (1 << (bits - 2)) | 1
        p = 2 * q + 1
        if any(q % s == 0 or p % s == 0 for s in small if s < q):
            continue
        if not is_probable_prime(q, rounds=8):
            continue
        if not is_probable_prime(p, rounds=8):
            continue
        if is_probable_prime(q) and is_probable_prime(p):
            break
    for alpha in range(2, 1000):
        if modpow(alpha, 2, p) != 1 and modpow(alpha, q, p) != 1:
            return p, alpha
    raise CryptoError("no generator found below 1000 (astronomically unlikely)")


# --- key files -------------------------------------------------------------
#
# Structured text with decimal-string fields so arbitrary-precision values
# survive any JSON reader. See docs/wire_format.md.

PUBLIC_KIND = "elgamal-public"
PRIVATE_KIND = "elgamal-private"


def save_public_key(pub: ElGamalPublic, path: str | Path) -> None:
    doc = {"kind": PUBLIC_KIND, "p": str(pub.p), "alpha": str(pub.alpha), "y": str(pub.y)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="ascii")


def save_private_key(priv: ElGamalPrivate, path: str | Path) -> None:
    doc = {"kind": PRIVATE_KIND, "x": str(priv.x)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="ascii")


def _load_key_doc(path: str | Path, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="ascii"))
    except (OSError, ValueError) as exc:
        raise FormatError(f"cannot read key file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("kind") != kind:
        raise FormatError(f"{path} is not a {kind} file")
    return doc


def load_public_key(path: str | Path) -> ElGamalPublic:
    doc = _load_key_doc(path, PUBLIC_KIND)
    try:
        return ElGamalPublic(p=int(doc["p"]), alpha=int(doc["alpha"]), y=int(doc["y"]))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad public key fields in {path}: {exc}") from exc


def load_private_key(path: str | Path) -> ElGamalPrivate:
    doc = _load_key_doc(path, PRIVATE_KIND)
    try:
        return ElGamalPrivate(x=int(doc["x"]))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad private key fields in {path}: {exc}") from exc


# --- bundle container ------------------------------------------------------
#
# Binary layout: magic "MECB", version byte, plain_len u64le, entry count
# u64le, then per entry a u16le length followed by that many ASCII decimal
# digits, then the raw ciphertext bytes.

BUNDLE_MAGIC = b"MECB"
BUNDLE_VERSION = 1


def write_bundle(bundle: CipherBundle, stream) -> None:
    stream.write(BUNDLE_MAGIC)
    stream.write(bytes([BUNDLE_VERSION]))
    stream.write(bundle.plain_len.to_bytes(8, "little"))
    stream.write(len(bundle.sender_publics).to_bytes(8, "little"))
    for d in bundle.sender_publics:
        text = str(d).encode("ascii")
        if len(text) > 0xFFFF:
            raise FormatError("sender public value too large for bundle container")
        stream.write(len(text).to_bytes(2, "little"))
        stream.write(text)
    stream.write(bundle.ciphertext)


def _read_exact(stream, n: int, what: str) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise FormatError(f"truncated bundle: expected {n} bytes of {what}")
    return data


def read_bundle(stream) -> CipherBundle:
    if _read_exact(stream, 4, "magic") != BUNDLE_MAGIC:
        raise FormatError("not a cipher bundle (bad magic)")
    version = _read_exact(stream, 1, "version")[0]
    if version != BUNDLE_VERSION:
        raise FormatError(f"unsupported bundle version {version}")
    plain_len = int.from_bytes(_read_exact(stream, 8, "plain_len"), "little")
    count = int.from_bytes(_read_exact(stream, 8, "entry count"), "little")
    publics = []
    for _ in range(count):
        n = int.from_bytes(_read_exact(stream, 2, "entry length"), "little")
        text = _read_exact(stream, n, "entry digits")
        try:
            publics.append(int(text.decode("ascii")))
        except ValueError as exc:
            raise FormatError(f"bad bundle entry: {text!r}") from exc
    ciphertext = _read_exact(stream, plain_len, "ciphertext")
    return CipherBundle(sender_publics=tuple(publics), ciphertext=ciphertext, plain_len=plain_len)
