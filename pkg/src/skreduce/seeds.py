"""Named random substreams derived from one root seed."""

from __future__ import annotations

import hashlib

import numpy as np


def _name_key(name) -> int:
    return int.from_bytes(hashlib.blake2b(str(name).encode(), digest_size=4).digest(), "big")


def substream(root: int, *names) -> np.random.Generator:
    """Generator for the path `names` under `root`; same path, same stream.

    Uses Philox so streams are counter-based and independent of call order.
    """
    seq = np.random.SeedSequence(entropy=int(root), spawn_key=tuple(_name_key(n) for n in names))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(root: int, *names) -> int:
    return int(substream(root, *names).integers(0, 2**63 - 1))
