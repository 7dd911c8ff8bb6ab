"""Ground-state cluster decompositions and their on-disk format.

A decomposition assigns every lattice site one cluster label.  Labels are
dense integers starting at 0; clusters of the fixed/box field variants may
be spatially disconnected.  The text format is one header line
``L seed variant params`` followed by one ``x y cluster_id`` line per site
in site-index order, and round-trips bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import ContractError, FormatError
from .lattice import LatticeSpec

if TYPE_CHECKING:
    from .disorder import DisorderModel


@dataclass(frozen=True, eq=False)
class ClusterDecomposition:
    """A partition of all N sites into clusters.

    sizes maps cluster id to site count (indexed by label).  provenance may
    carry diagnostics such as engine name or decimation statistics.
    """

    spec: LatticeSpec
    labels: np.ndarray
    sizes: np.ndarray
    model: "DisorderModel | None" = None
    seed: int | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)

    def validate(self):
        n = self.spec.n_sites
        if self.labels.shape != (n,):
            raise ContractError("labels array has wrong shape")
        k = self.n_clusters
        if k == 0 or self.labels.min() < 0 or self.labels.max() >= k:
            raise ContractError("labels must be dense in [0, n_clusters)")
        recount = np.bincount(self.labels, minlength=k)
        if not (recount == self.sizes).all():
            raise ContractError("sizes disagree with a label recount")
        if (self.sizes == 0).any():
            raise ContractError("labels must be dense: every cluster id needs a site")
        if int(self.sizes.sum()) != n:
            raise ContractError("cluster sizes must sum to N")


def cluster_size_histogram(decomp: ClusterDecomposition) -> dict[int, int]:
    """Map cluster size -> number of clusters of that size."""
    sizes, counts = np.unique(decomp.sizes, return_counts=True)
    return {int(s): int(c) for s, c in zip(sizes, counts)}


def write_decomposition(decomp: ClusterDecomposition, path):
    seed = 0 if decomp.seed is None else decomp.seed
    if decomp.model is None:
        raise ContractError("cannot serialize a decomposition without its disorder model")
    header = f"{decomp.spec.L} {seed} {decomp.model.variant.value} {decomp.model.param_text()}"
    L = decomp.spec.L
    n = decomp.spec.n_sites
    with open(path, "w") as fh:
        fh.write(header + "\n")
        # chunked so multi-million-site lattices do not materialize at once
        for start in range(0, n, 1 << 20):
            i = np.arange(start, min(start + (1 << 20), n))
            rows = np.column_stack((i % L, i // L, decomp.labels[i]))
            fh.write("\n".join(f"{x} {y} {c}" for x, y, c in rows.tolist()))
            fh.write("\n")


def read_decomposition(path) -> ClusterDecomposition:
    from .disorder import DisorderModel, Variant

    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(path, 1, "empty decomposition file")
    head = lines[0].split()
    if len(head) != 4:
        raise FormatError(path, 1, f"expected `L seed variant params`, got {lines[0]!r}")
    try:
        L, seed = int(head[0]), int(head[1])
        variant = Variant(head[2])
        key, _, value = head[3].partition("=")
        params = {key: float(value)}
        model = DisorderModel(variant=variant, **params)
    except ValueError as exc:
        raise FormatError(path, 1, str(exc)) from None
    spec = LatticeSpec(L)
    if len(lines) != 1 + spec.n_sites:
        raise FormatError(path, len(lines), f"expected {spec.n_sites} site lines")
    labels = np.empty(spec.n_sites, dtype=np.int32)
    seen = np.zeros(spec.n_sites, dtype=bool)
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(path, ln, f"expected `x y cluster_id`, got {line!r}")
        try:
            x, y, c = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise FormatError(path, ln, f"non-integer field in {line!r}") from None
        if not (0 <= x < L and 0 <= y < L):
            raise FormatError(path, ln, "site coordinates out of range")
        i = x + L * y
        if seen[i]:
            raise FormatError(path, ln, f"duplicate site ({x}, {y})")
        seen[i] = True
        labels[i] = c
    k = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=k).astype(np.int64)
    decomp = ClusterDecomposition(spec=spec, labels=labels, sizes=sizes, model=model, seed=seed)
    decomp.validate()
    return decomp
