"""Square-lattice geometry with periodic boundary conditions.

Sites live on an L x L torus and are indexed ``i = x + L * y`` with
``0 <= x, y < L``.  Every site owns two bonds, one towards +x and one
towards +y, so the lattice has exactly ``2 * N`` bonds and every site has
four incident bonds.  Bond ``2 * i`` is the +x bond of site ``i`` and bond
``2 * i + 1`` its +y bond; this ownership convention is what makes the
instance and decomposition files portable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class LatticeSpec:
    """An L x L periodic square lattice."""

    L: int
    periodic: bool = True

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 2:
            raise ParameterError(f"lattice size must be an integer >= 2, got {self.L!r}")
        if not self.periodic:
            raise ParameterError("only periodic lattices are supported")

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    @property
    def n_bonds(self) -> int:
        return 2 * self.L * self.L

    def site_index(self, x: int, y: int) -> int:
        L = self.L
        return (x % L) + L * (y % L)

    def site_coords(self, i) :
        """Coordinates (x, y) of site index i; accepts arrays."""
        return i % self.L, i // self.L

    def bond_endpoints(self, b: int) -> tuple[int, int]:
        """Endpoint site indices of bond b under the ownership convention."""
        L = self.L
        i, d = divmod(b, 2)
        x, y = i % L, i // L
        if d == 0:
            return i, (x + 1) % L + L * y
        return i, x + L * ((y + 1) % L)

    def bond_endpoint_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized endpoints (u, v) for all 2N bonds, int32."""
        L = self.L
        i = np.arange(self.n_sites, dtype=np.int32)
        x = i % L
        y = i // L
        right = (x + 1) % L + L * y
        up = x + L * ((y + 1) % L)
        u = np.repeat(i, 2)
        v = np.empty(self.n_bonds, dtype=np.int32)
        v[0::2] = right
        v[1::2] = up
        return u, v
