"""Seeding.

A RandomSource is ``numpy.random.Generator`` over PCG64. Replicate seeds are
derived with ``SeedSequence`` hashing, which numpy documents as stable across
versions, so ``derive_seed(master, g, r)`` is reproducible anywhere.
"""

import numpy as np

RandomSource = np.random.Generator


def make_rng(seed: int) -> RandomSource:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def derive_seed(master_seed: int, *keys: int) -> int:
    """64-bit seed for the stream identified by ``(master_seed, *keys)``."""
    seq = np.random.SeedSequence([int(master_seed), *(int(k) for k in keys)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def bitgen(rng: RandomSource):
    """``(next_double, state_address)`` for handing ``rng`` to compiled kernels."""
    bit_generator = rng.bit_generator
    if not isinstance(bit_generator, np.random.PCG64):
        raise TypeError(f"kernels need a PCG64-backed generator, got {type(bit_generator).__name__}")
    iface = bit_generator.ctypes
    return iface.next_double, iface.state_address
