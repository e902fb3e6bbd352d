"""Deterministic derivation of child seeds for nested replication streams."""

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def child_seed(seed: int, index: int) -> int:
    """Mix (seed, index) into an independent 64-bit child seed.

    Uses the splitmix64 finalizer on seed + (index+1)*golden-ratio, so child
    streams depend only on (seed, index); replications can therefore run in
    any order or degree of parallelism without changing their draws.
    """
    if index < 0:
        raise ValueError(f"index must be nonnegative, got {index}")
    z = (seed + (index + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK
