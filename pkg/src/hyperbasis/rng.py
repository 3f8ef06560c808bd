"""Seed handling: one 64-bit master seed, child streams derived by label."""

import hashlib
import os

import numpy as np

SEED_ENV = "HYPERBASIS_SEED"
DEFAULT_SEED = 0


def derive_seed(master: int, label: str) -> int:
    """64-bit child seed from ``(master, label)`` via BLAKE2b."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master).to_bytes(8, "little", signed=False))
    h.update(label.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def stream(master: int, label: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, label))


def master_seed(explicit: int | None = None) -> int:
    """Resolve the master seed: explicit value, then ``HYPERBASIS_SEED``, then 0."""
    if explicit is not None:
        return int(explicit) & 0xFFFFFFFFFFFFFFFF
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env, 0) & 0xFFFFFFFFFFFFFFFF
    return DEFAULT_SEED
