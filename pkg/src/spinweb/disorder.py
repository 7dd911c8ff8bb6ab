"""Disorder realizations of the random transverse-field Ising lattice.

Three variants are supported.  FixedH draws bonds uniformly on (0, 1] and
sets every field to exp(theta).  BoxH draws bonds the same way and fields
uniformly on (0, exp(theta)].  Diluted keeps a bond with probability p and
treats bond magnitudes as effectively infinite against the fields, so only
presence matters and its clusters are plain bond-percolation clusters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .clusters import ClusterDecomposition
from .errors import ParameterError, VariantError
from .lattice import LatticeSpec

# Critical control parameter theta = ln h of the fixed-field variant.
THETA_C = -0.17034


class Variant(enum.Enum):
    FIXED_H = "fixed_h"
    BOX_H = "box_h"
    DILUTED = "diluted"


@dataclass(frozen=True)
class DisorderModel:
    """A disorder variant plus the parameter that variant actually uses."""

    variant: Variant
    theta: float | None = None
    p: float | None = None

    def __post_init__(self):
        if self.variant in (Variant.FIXED_H, Variant.BOX_H):
            if self.theta is None or not math.isfinite(self.theta):
                raise ParameterError(f"{self.variant.value} requires a finite theta, got {self.theta!r}")
            if self.p is not None:
                raise ParameterError(f"{self.variant.value} does not take a dilution p")
        elif self.variant is Variant.DILUTED:
            if self.p is None or not (0.0 <= self.p <= 1.0):
                raise ParameterError(f"diluted requires p in [0, 1], got {self.p!r}")
            if self.theta is not None:
                raise ParameterError("diluted does not take a theta")
        else:
            raise ParameterError(f"unknown variant {self.variant!r}")

    def param_text(self) -> str:
        """The variant parameter as a `key=value` token for file headers."""
        if self.variant is Variant.DILUTED:
            return f"p={self.p!r}"
        return f"theta={self.theta!r}"


@dataclass(frozen=True, eq=False)
class DisorderInstance:
    """One sampled realization of bonds and fields on a lattice.

    bonds holds 2N entries following the bond ownership convention of
    LatticeSpec.  For FixedH/BoxH the entries are coupling strengths in
    (0, 1]; for Diluted they are presence flags in {0.0, 1.0} and fields
    are 1.0 placeholders (magnitudes are irrelevant there).
    """

    spec: LatticeSpec
    model: DisorderModel
    seed: int
    bonds: np.ndarray
    fields: np.ndarray = field(repr=False)

    def validate(self):
        spec, model = self.spec, self.model
        if self.bonds.shape != (spec.n_bonds,):
            raise ParameterError("bonds array has wrong shape")
        if self.fields.shape != (spec.n_sites,):
            raise ParameterError("fields array has wrong shape")
        if model.variant is Variant.DILUTED:
            if not np.isin(self.bonds, (0.0, 1.0)).all():
                raise ParameterError("diluted bonds must be 0/1 presence flags")
        else:
            if not ((self.bonds > 0.0) & (self.bonds <= 1.0)).all():
                raise ParameterError("bonds must lie in (0, 1]")
            h_max = math.exp(model.theta)
            if model.variant is Variant.FIXED_H:
                if not (self.fields == h_max).all():
                    raise ParameterError("fixed_h fields must all equal exp(theta)")
            elif not ((self.fields > 0.0) & (self.fields <= h_max)).all():
                raise ParameterError("box_h fields must lie in (0, exp(theta)]")


def sample_disorder(spec: LatticeSpec, model: DisorderModel, seed: int) -> DisorderInstance:
    """Draw one disorder realization, bit-identical for equal (spec, model, seed).

    Bonds are drawn before fields.  Uniform draws on (0, 1] use 1 - u with
    u in [0, 1) so exact zeros cannot occur.
    """
    rng = np.random.default_rng(seed)
    n, nb = spec.n_sites, spec.n_bonds
    if model.variant is Variant.DILUTED:
        bonds = (rng.random(nb) < model.p).astype(np.float64)
        fields = np.ones(n)
    else:
        bonds = 1.0 - rng.random(nb)
        if model.variant is Variant.FIXED_H:
            fields = np.full(n, math.exp(model.theta))
        else:
            fields = math.exp(model.theta) * (1.0 - rng.random(n))
    return DisorderInstance(spec=spec, model=model, seed=int(seed), bonds=bonds, fields=fields)


def percolation_clusters(instance: DisorderInstance) -> ClusterDecomposition:
    """Connectivity clusters of the present bonds of a diluted instance.

    Labels are dense, assigned by first appearance in site-index order.
    """
    if instance.model.variant is not Variant.DILUTED:
        raise VariantError("percolation_clusters requires the diluted variant; run SDRG instead")
    spec = instance.spec
    n = spec.n_sites
    parent = np.arange(n, dtype=np.int64)

    def find(i):
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    u, v = spec.bond_endpoint_arrays()
    present = instance.bonds > 0.0
    for a, b in zip(u[present].tolist(), v[present].tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    labels = np.empty(n, dtype=np.int32)
    next_label = 0
    label_of_root = {}
    for i in range(n):
        r = find(i)
        lab = label_of_root.get(r)
        if lab is None:
            lab = label_of_root[r] = next_label
            next_label += 1
        labels[i] = lab
    sizes = np.bincount(labels, minlength=next_label).astype(np.int64)
    return ClusterDecomposition(spec=spec, labels=labels, sizes=sizes,
                                model=instance.model, seed=instance.seed)


def write_instance_debug(instance: DisorderInstance, path):
    """Dump an instance as text: header, `x y h` per site, `x y dir J` per bond."""
    spec = instance.spec
    L = spec.L
    lines = [f"{L} {instance.seed} {instance.model.variant.value} {instance.model.param_text()}"]
    fields = instance.fields.tolist()
    bonds = instance.bonds.tolist()
    for i in range(spec.n_sites):
        x, y = i % L, i // L
        lines.append(f"{x} {y} {fields[i]!r}")
    for i in range(spec.n_sites):
        x, y = i % L, i // L
        lines.append(f"{x} {y} x {bonds[2 * i]!r}")
        lines.append(f"{x} {y} y {bonds[2 * i + 1]!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
