"""Named, order-independent random streams derived from one master seed."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, *labels) -> int:
    """64-bit seed from ``sha256("<master>/<label>/<label>...")``.

    Streams are keyed by name, so adding a replication or a customer never
    shifts the draws of any other stream.
    """
    key = "/".join([str(int(master)), *map(str, labels)])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")


def stream(master: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *labels))
