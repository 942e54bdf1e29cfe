"""Deterministic seed derivation: a master seed plus a component name maps
to a stable 63-bit sub-seed, so every random component is reproducible
without manual seed bookkeeping."""

import hashlib


def subseed(master_seed, name):
    digest = hashlib.sha256(("%d:%s" % (master_seed, name)).encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1
