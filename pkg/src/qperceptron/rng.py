"""Counter-based random streams keyed by integer tuples.

Every stream is a Philox generator seeded from ``SeedSequence(keys)``, so a
stream depends only on its keys and never on the order in which work is
scheduled.
"""

import numpy as np


def stream(*keys):
    """Independent ``numpy.random.Generator`` for the integer key tuple ``keys``."""
    if not keys:
        raise ValueError("at least one key is required")
    entropy = [int(k) for k in keys]
    if any(k < 0 for k in entropy):
        raise ValueError(f"keys must be non-negative integers, got {keys!r}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
