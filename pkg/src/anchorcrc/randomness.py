"""Seedable random streams for reproducible, parallel replications.

Each stream is a Philox counter-based generator keyed by a hash of
``(master_seed, stream_id)``, so replication ``i`` of a simulation draws the
same numbers no matter which worker runs it or in what order.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .model import ValidationError

_MASK64 = (1 << 64) - 1


class RngStream:
    """Single-owner random stream identified by ``(master_seed, stream_id)``."""

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def uniform(self, size=None):
        return self.generator.random(size)

    def bernoulli(self, p, size=None):
        p = np.asarray(p, dtype=float)
        if np.any((p < 0) | (p > 1)):
            raise ValidationError("Bernoulli probability outside [0, 1]")
        if size is None:
            size = p.shape
        out = self.generator.random(size) < p
        return bool(out) if np.ndim(out) == 0 else out

    def gamma(self, shape, size=None):
        """Gamma(shape, 1) variates; any shape > 0, including shape < 1."""
        if np.any(np.asarray(shape) <= 0):
            raise ValidationError("gamma shape must be positive")
        return self.generator.standard_gamma(shape, size)

    def beta(self, a: float, b: float, size=None):
        if a <= 0 or b <= 0:
            raise ValidationError("beta parameters must be positive")
        return self.generator.beta(a, b, size)

    def dirichlet(self, alphas: Sequence[float], size: int | None = None) -> np.ndarray:
        """Dirichlet draws from normalized independent Gamma(alpha_k, 1) variates.

        Returns shape ``(k,)`` when ``size`` is None, else ``(size, k)``.
        """
        alphas = np.asarray(alphas, dtype=float)
        if alphas.ndim != 1 or alphas.size < 2 or np.any(alphas <= 0):
            raise ValidationError("dirichlet needs at least two positive alphas")
        shape = alphas.shape if size is None else (size, alphas.size)
        g = self.generator.standard_gamma(np.broadcast_to(alphas, shape))
        return g / g.sum(axis=-1, keepdims=True)

    def srswor(self, population_size: int, sample_size: int) -> np.ndarray:
        """Simple random sample without replacement of distinct indices in
        ``[0, population_size)``; every subset of the given size is equally
        likely. Indices come back sorted."""
        if not 0 <= sample_size <= population_size:
            raise ValidationError(
                f"cannot draw {sample_size} of {population_size} without replacement"
            )
        idx = self.generator.choice(population_size, size=sample_size, replace=False)
        return np.sort(idx)


def as_stream(seed: int | RngStream, stream_id: int = 0) -> RngStream:
    if isinstance(seed, RngStream):
        return seed
    return RngStream(seed, stream_id)
