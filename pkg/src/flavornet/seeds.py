"""Child-seed derivation.

Every random draw in the package flows from a single 64-bit root seed.
A child seed is the first 8 bytes of ``blake2b(root || key_1 || ... || key_n)``
read little-endian, where each key is the ``repr`` of a stage name or an
index.  Derivation is therefore stable across processes and platforms,
which ``hash()`` is not.
"""

import hashlib
import random

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *keys) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed) & MASK64).encode())
    for key in keys:
        h.update(b"\x1f")
        h.update(repr(key).encode())
    return int.from_bytes(h.digest(), "little")


def child_rng(seed: int, *keys) -> random.Random:
    """Return a private ``random.Random`` seeded from ``derive_seed``."""
    return random.Random(derive_seed(seed, *keys))
