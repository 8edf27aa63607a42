"""Deterministic child seeds.

Every random stream (optimizer restarts, measurement settings, calibration
columns, folded circuits) is keyed by the root seed plus a path of labels, so
results do not depend on evaluation order or worker count.
"""

import hashlib
from typing import Union

Label = Union[str, int]


def derive_seed(root: int, *path: Label) -> int:
    """64-bit seed from BLAKE2b over the root seed and a label path."""
    digest = hashlib.blake2b(digest_size=8)
    digest.update(str(int(root)).encode())
    for label in path:
        digest.update(b"\x1f")
        digest.update(str(label).encode())
    return int.from_bytes(digest.digest(), "big")
