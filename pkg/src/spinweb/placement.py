"""Node placement: disjoint circular regions packed onto the torus.

Heterogeneous node radii follow a truncated power law and the disks are
packed one at a time in an outward spiral: each new disk sits tangent to
an already placed disk, at the feasible tangency point closest to the
lattice center.  A small surface gap between disks keeps the discretized
regions (radius shrunk by half the gap) strictly disjoint; its default
is a hundredth of a lattice unit, so surfaces are effectively tangent
and adjacent regions sit one site apart, which is what lets spin
clusters bridge neighboring nodes.  A hexagonal packing of uniform disks
provides the homogeneous benchmark at the same coverage.

All geometry uses the torus metric.  Placement is sequential by nature
(every candidate is tested against all prior disks), so determinism
reduces to consuming the radius stream in placement order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, FormatError, ParameterError
from .lattice import LatticeSpec

RADIUS_EXPONENT = 2.67
MIN_RADIUS = 2.0
SURFACE_GAP = 0.01
FAILURE_BUDGET = 1000
HEX_DENSITY = math.pi / (2.0 * math.sqrt(3.0))

_DEG = np.deg2rad(np.arange(360.0))
_COS = np.cos(_DEG)
_SIN = np.sin(_DEG)


@dataclass(frozen=True)
class Disk:
    """A circular node region: center on the torus, radius >= 2."""

    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if not (self.radius >= MIN_RADIUS):
            raise ParameterError(f"disk radius must be >= {MIN_RADIUS}, got {self.radius!r}")


@dataclass
class NodeLayout:
    """Disks plus their disjoint discretized regions on an L x L torus.

    ``site_to_node[i]`` is the node id owning site i, or -1.  ``coverage``
    is exactly the covered-site fraction.  ``incomplete`` marks layouts
    that ran out of placement attempts before reaching their target.
    ``meta`` carries packing provenance (kind, gap, seed, radius law).
    """

    L: int
    disks: list[Disk]
    site_to_node: np.ndarray
    coverage: float
    incomplete: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.L * self.L
        if self.site_to_node.shape != (n,):
            raise ContractError("site map length does not match the lattice")
        k = len(self.disks)
        if self.site_to_node.size and (self.site_to_node.min() < -1 or self.site_to_node.max() >= k):
            raise ContractError("site map references an unknown node id")
        occupied = int(np.count_nonzero(self.site_to_node >= 0))
        if abs(self.coverage - occupied / n) > 1e-12:
            raise ContractError("coverage does not match the site map")
        if k:
            sizes = np.bincount(self.site_to_node[self.site_to_node >= 0], minlength=k)
            if sizes.min() == 0:
                raise ContractError("every node region must be nonempty")

    @property
    def n_nodes(self) -> int:
        return len(self.disks)

    def region_sizes(self) -> np.ndarray:
        return np.bincount(self.site_to_node[self.site_to_node >= 0], minlength=len(self.disks))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_radius(rng, gamma: float, r_min: float, r_max: float) -> float:
    """Draw one radius from the truncated power law p(r) ~ r**-gamma.

    Inverse-CDF sampling of the unbounded Pareto law with rejection of
    draws above r_max, so the accepted density is the exact truncation.
    """
    if not gamma > 1.0:
        raise ParameterError(f"radius exponent must exceed 1, got {gamma!r}")
    if not (MIN_RADIUS <= r_min < r_max):
        raise ParameterError(f"need {MIN_RADIUS} <= r_min < r_max, got {r_min!r}, {r_max!r}")
    rng = _as_generator(rng)
    inv = -1.0 / (gamma - 1.0)
    while True:
        u = 1.0 - rng.random()
        r = r_min * u**inv
        if r <= r_max:
            return r


def _disk_sites(L: int, cx: float, cy: float, radius: float) -> np.ndarray:
    """Sorted site ids within torus distance ``radius`` of (cx, cy)."""
    if 2.0 * radius >= L:
        raise ParameterError(f"disk of radius {radius} wraps onto itself on an L={L} torus")
    xs = np.arange(math.floor(cx - radius), math.floor(cx + radius) + 2)
    ys = np.arange(math.floor(cy - radius), math.floor(cy + radius) + 2)
    dx2 = (xs - cx) ** 2
    dy2 = (ys - cy) ** 2
    inside = dx2[:, None] + dy2[None, :] <= radius * radius
    ix, iy = np.nonzero(inside)
    ids = (xs[ix] % L).astype(np.int64) + L * (ys[iy] % L).astype(np.int64)
    return np.sort(ids)


def discretize_disk(disk: Disk, spec: LatticeSpec) -> np.ndarray:
    """Site set of a disk: all sites within torus distance radius."""
    return _disk_sites(spec.L, disk.cx, disk.cy, disk.radius)


class _DiskIndex:
    """Growing disk arrays plus a tiered spatial hash on the torus.

    Tier t holds disks with radius in (r_min * 2**t, r_min * 2**(t+1)],
    gridded at that upper radius, so conflict queries around a point scan
    a constant-size cell ring per tier instead of every large disk.
    """

    def __init__(self, L: int, r_min: float, r_max: float):
        self.L = L
        self.n = 0
        cap = 64
        self.cx = np.empty(cap)
        self.cy = np.empty(cap)
        self.r = np.empty(cap)
        self.dc = np.empty(cap)
        n_tiers = max(1, math.ceil(math.log2(r_max / r_min)))
        self.tier_rmax = [r_min * 2.0 ** (t + 1) for t in range(n_tiers)]
        self.tier_rmax[-1] = max(self.tier_rmax[-1], r_max)
        self.cells: list[dict] = [{} for _ in range(n_tiers)]
        self.ncells = [max(1, int(L // rm)) for rm in self.tier_rmax]

    def _tier(self, radius: float) -> int:
        for t, rm in enumerate(self.tier_rmax):
            if radius <= rm:
                return t
        return len(self.tier_rmax) - 1

    def add(self, cx: float, cy: float, radius: float, dist_center: float):
        if self.n == self.cx.shape[0]:
            for name in ("cx", "cy", "r", "dc"):
                arr = getattr(self, name)
                grown = np.empty(2 * arr.shape[0])
                grown[: self.n] = arr[: self.n]
                setattr(self, name, grown)
        i = self.n
        self.cx[i], self.cy[i], self.r[i], self.dc[i] = cx, cy, radius, dist_center
        t = self._tier(radius)
        m = self.ncells[t]
        key = (int(cx * m / self.L) % m, int(cy * m / self.L) % m)
        self.cells[t].setdefault(key, []).append(i)
        self.n += 1

    def near(self, px: float, py: float, reach: float) -> np.ndarray:
        """Ids of disks whose centers may lie within reach + tier radius."""
        L = self.L
        out: list[int] = []
        for t, rm in enumerate(self.tier_rmax):
            grid = self.cells[t]
            if not grid:
                continue
            m = self.ncells[t]
            cell = L / m
            span = int((reach + rm) / cell) + 1
            cx0 = int(px * m / L)
            cy0 = int(py * m / L)
            if 2 * span + 1 >= m:
                for ids in grid.values():
                    out.extend(ids)
                continue
            for ix in range(cx0 - span, cx0 + span + 1):
                for iy in range(cy0 - span, cy0 + span + 1):
                    ids = grid.get((ix % m, iy % m))
                    if ids:
                        out.extend(ids)
        return np.asarray(out, dtype=np.int64)


def _torus_delta(a, b, L):
    d = np.abs(a - b)
    return np.minimum(d, L - d)


def pack_spiral(
    spec: LatticeSpec,
    rng,
    gamma: float = RADIUS_EXPONENT,
    r_min: float = MIN_RADIUS,
    r_max: float | None = None,
    coverage_target: float = 0.3,
    gap: float = SURFACE_GAP,
    failure_budget: int = FAILURE_BUDGET,
) -> NodeLayout:
    """Pack power-law disks by outward-spiral tangent placement.

    The first disk sits at the lattice center.  Every further disk gets a
    fresh radius and is placed tangent to an existing disk (surface
    separation exactly ``gap``) at the feasible candidate closest to the
    lattice center, ties to the smaller tangency angle; tangency angles
    are scanned in one-degree steps.  A radius that fits nowhere counts
    as a failure and is resampled; ``failure_budget`` consecutive
    failures end the packing with ``incomplete=True``.

    Discretization shrinks each radius by ``gap / 2``, which turns the
    geometric separation into site-level disjointness.  The default gap
    is small enough that disks are effectively tangent (maximally dense
    packing, boundary sites of neighbors typically adjacent) yet strictly
    positive so no site can belong to two regions.
    """
    L = spec.L
    if r_max is None:
        r_max = L / 8.0
    if not (MIN_RADIUS <= r_min < r_max):
        raise ParameterError(f"need {MIN_RADIUS} <= r_min < r_max, got {r_min!r}, {r_max!r}")
    if 2.0 * (r_max + gap) >= L:
        raise ParameterError(f"r_max {r_max} too large for an L={L} torus")
    if not 0.0 < coverage_target < HEX_DENSITY:
        raise ParameterError(
            f"coverage target must lie in (0, {HEX_DENSITY:.4f}), got {coverage_target!r}"
        )
    if gap < 0.0:
        raise ParameterError(f"gap must be non-negative, got {gap!r}")
    seed = rng if isinstance(rng, (int, np.integer)) else 0
    rng = _as_generator(rng)

    n = spec.n_sites
    site_map = np.full(n, -1, dtype=np.int32)
    covered = 0
    center = L / 2.0
    index = _DiskIndex(L, r_min, r_max)
    disks: list[Disk] = []
    sampled: list[float] = []
    saturated: list[float] = []

    def place(cx: float, cy: float, radius: float, dist_center: float):
        nonlocal covered
        node = len(disks)
        sites = _disk_sites(L, cx, cy, radius - gap / 2.0)
        if np.any(site_map[sites] >= 0):
            raise ContractError("disk regions overlap; packing invariant broken")
        site_map[sites] = node
        covered += sites.size
        disks.append(Disk(float(cx), float(cy), float(radius)))
        index.add(cx, cy, radius, dist_center)
        saturated.append(math.inf)

    def best_candidate(radius: float):
        # lower bound on any candidate's distance to the lattice center,
        # used to cut the host scan once no host can beat the incumbent
        k = index.n
        lb = index.dc[:k] - (index.r[:k] + radius + gap)
        order = np.argsort(lb, kind="stable")
        best = None
        best_key = (math.inf, math.inf, math.inf)
        for h in order:
            if lb[h] >= best_key[0]:
                break
            if radius >= saturated[h]:
                continue
            ring = index.r[h] + radius + gap
            px = (index.cx[h] + ring * _COS) % L
            py = (index.cy[h] + ring * _SIN) % L
            reach = index.r[h] + 2.0 * radius + 2.0 * gap
            near = index.near(index.cx[h], index.cy[h], reach)
            dx = _torus_delta(px[:, None], index.cx[near][None, :], L)
            dy = _torus_delta(py[:, None], index.cy[near][None, :], L)
            need = (radius + index.r[near] + gap - 1e-9) ** 2
            feasible = np.all(dx * dx + dy * dy >= need[None, :], axis=1)
            if not feasible.any():
                saturated[h] = min(saturated[h], radius)
                continue
            ddx = _torus_delta(px, center, L)
            ddy = _torus_delta(py, center, L)
            dist = np.where(feasible, np.hypot(ddx, ddy), math.inf)
            a = int(np.argmin(dist))
            key = (float(dist[a]), float(a), float(h))
            if key < best_key:
                best_key = key
                best = (px[a], py[a], float(dist[a]))
        return best

    r0 = sample_radius(rng, gamma, r_min, r_max)
    sampled.append(r0)
    place(center, center, r0, 0.0)

    failures = 0
    incomplete = False
    while covered / n < coverage_target:
        if failures >= failure_budget:
            incomplete = True
            break
        radius = sample_radius(rng, gamma, r_min, r_max)
        sampled.append(radius)
        cand = best_candidate(radius)
        if cand is None:
            failures += 1
            continue
        failures = 0
        place(cand[0], cand[1], radius, cand[2])

    meta = {
        "kind": "spiral",
        "gap": gap,
        "seed": int(seed),
        "gamma": gamma,
        "r_min": r_min,
        "r_max": r_max,
        "coverage_target": coverage_target,
        "sampled_radii": np.asarray(sampled),
    }
    return NodeLayout(L, disks, site_map, covered / n, incomplete, meta)


def hexagonal_radius(pitch: float, coverage: float) -> float:
    """Uniform disk radius giving the requested coverage at this pitch."""
    return pitch * math.sqrt(coverage * math.sqrt(3.0) / (2.0 * math.pi))


def _expected_disk_count(L, gamma, r_min, r_max, coverage, gap):
    # mean discretized disk area E[(r - gap/2)^2] under the truncated law
    a, b, g = r_min, r_max, gamma
    norm = (g - 1.0) / (a ** (1.0 - g) - b ** (1.0 - g))

    def moment(m):
        p = m + 1.0 - g
        return norm * (b**p - a**p) / p

    mean_sq = moment(2) - gap * moment(1) + gap * gap / 4.0
    return coverage * L * L / (math.pi * mean_sq)


def pack_hexagonal(
    spec: LatticeSpec,
    coverage_target: float,
    pitch: float | None = None,
    gamma: float = RADIUS_EXPONENT,
    r_min: float = MIN_RADIUS,
    r_max: float | None = None,
    match_count: int | None = None,
) -> NodeLayout:
    """Tangent hexagonal packing of uniform disks grown from the center.

    The grid-like benchmark mirrors the heterogeneous packing: equal
    disks sit tangent (one surface gap apart) in hexagonal arrangement
    and are added nearest-center first until the covered site fraction
    reaches the target, so both packings form a compact patch at the
    same overall coverage.  A spread-out arrangement at the same global
    coverage would leave inter-disk gaps no cluster can bridge and the
    benchmark would stop being grid-like.  The uniform radius sets node
    count parity: pass a heterogeneous run's node count as
    ``match_count`` (preferred; r_u = sqrt(coverage L^2 / (pi n))) or
    fall back to the analytic disk-count expectation from the radius
    law.  An explicit ``pitch`` overrides the center spacing (default
    2 r_u + gap); larger pitches thin the benchmark out.
    """
    L = spec.L
    if not 0.0 < coverage_target < HEX_DENSITY:
        raise ParameterError(
            f"coverage target must lie in (0, {HEX_DENSITY:.4f}), got {coverage_target!r}"
        )
    if r_max is None:
        r_max = L / 8.0
    if match_count is not None:
        if match_count < 1:
            raise ParameterError(f"match_count must be positive, got {match_count!r}")
        expected = float(match_count)
    else:
        expected = _expected_disk_count(L, gamma, r_min, r_max, coverage_target, SURFACE_GAP)
    r_u = math.sqrt(coverage_target * L * L / (math.pi * max(expected, 1.0)))
    if r_u < MIN_RADIUS:
        raise ParameterError(f"hexagonal radius {r_u:.4f} below the minimum {MIN_RADIUS}")
    if 2.0 * r_u >= L / 2.0:
        raise ParameterError(f"hexagonal radius {r_u:.4f} too large for L={L}")
    if pitch is None:
        pitch = 2.0 * r_u + SURFACE_GAP
    if pitch < 2.0 * r_u:
        raise ParameterError(f"pitch {pitch:.4f} overlaps disks of radius {r_u:.4f}")
    if pitch > L / 2.0:
        raise ParameterError(f"pitch must lie in (0, L/2], got {pitch!r}")

    # triangular lattice points around the lattice center, nearest first;
    # ties resolved by angle so growth is deterministic ring by ring
    center = L / 2.0
    ay = pitch * math.sqrt(3.0) / 2.0
    span = int(math.ceil(L / pitch)) + 2
    cands = []
    for j in range(-span, span + 1):
        y = j * ay
        for i in range(-span, span + 1):
            x = i * pitch + j * pitch / 2.0
            d2 = x * x + y * y
            if d2 > (L / 2.0) ** 2:
                continue
            cands.append((d2, math.atan2(y, x), i, j, x, y))
    cands.sort(key=lambda t: (t[0], t[1], t[2], t[3]))

    n = spec.n_sites
    site_map = np.full(n, -1, dtype=np.int32)
    disks: list[Disk] = []
    covered = 0
    for d2, ang, i, j, x, y in cands:
        if covered / n >= coverage_target:
            break
        cx = (center + x) % L
        cy = (center + y) % L
        sites = _disk_sites(L, cx, cy, r_u)
        # near the torus half-width distant lattice points can fold onto
        # already placed disks; skip them instead of failing
        if np.any(site_map[sites] >= 0):
            continue
        site_map[sites] = len(disks)
        covered += sites.size
        disks.append(Disk(float(cx), float(cy), float(r_u)))
    incomplete = covered / n < coverage_target

    meta = {
        "kind": "hex",
        "gap": 0.0,
        "seed": 0,
        "gamma": 0.0,
        "r_min": r_u,
        "r_max": r_u,
        "coverage_target": coverage_target,
        "pitch": pitch,
    }
    return NodeLayout(L, disks, site_map, covered / n, incomplete, meta)


def write_layout(layout: NodeLayout, path, include_sites: bool = False) -> None:
    """Write a layout file; the site map is recomputable and optional.

    Format: a comment line carrying the packing kind and surface gap, a
    header line ``L seed gamma r_min r_max coverage``, one line per disk
    ``id cx cy r`` (full geometric radius), and optionally a ``sites``
    block with one owner id per site.
    """
    meta = layout.meta
    lines = [
        f"# spinweb layout v1 kind={meta.get('kind', 'spiral')} gap={meta.get('gap', SURFACE_GAP)!r}",
        f"{layout.L} {int(meta.get('seed', 0))} {meta.get('gamma', 0.0)!r} "
        f"{meta.get('r_min', 0.0)!r} {meta.get('r_max', 0.0)!r} {layout.coverage!r}",
    ]
    for i, d in enumerate(layout.disks):
        lines.append(f"{i} {d.cx!r} {d.cy!r} {d.radius!r}")
    if include_sites:
        lines.append("sites")
        ids = layout.site_to_node
        lines.extend(" ".join(str(v) for v in ids[j : j + 16]) for j in range(0, ids.size, 16))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_layout(path) -> NodeLayout:
    """Read a layout file, rebuilding and verifying the site map."""
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or not raw[0].startswith("# spinweb layout v1"):
        raise FormatError(path, 1, "not a spinweb layout file")
    fields = dict(
        tok.split("=", 1) for tok in raw[0].removeprefix("# spinweb layout v1").split() if "=" in tok
    )
    kind = fields.get("kind", "spiral")
    if kind not in ("spiral", "hex"):
        raise FormatError(path, 1, f"unknown packing kind {kind!r}")
    try:
        gap = float(fields.get("gap", SURFACE_GAP))
    except ValueError as exc:
        raise FormatError(path, 1, "bad gap value") from exc
    if len(raw) < 2:
        raise FormatError(path, 2, "missing header line")
    head = raw[1].split()
    if len(head) != 6:
        raise FormatError(path, 2, "expected 'L seed gamma r_min r_max coverage'")
    try:
        L = int(head[0])
        seed = int(head[1])
        g_gamma, g_rmin, g_rmax, cov = (float(v) for v in head[2:])
    except ValueError as exc:
        raise FormatError(path, 2, str(exc)) from exc

    disks: list[Disk] = []
    sites_at = None
    for ln, line in enumerate(raw[2:], start=3):
        if not line.strip():
            continue
        if line.strip() == "sites":
            sites_at = ln
            break
        tok = line.split()
        if len(tok) != 4:
            raise FormatError(path, ln, "expected 'id cx cy r'")
        try:
            idx = int(tok[0])
            cx, cy, r = (float(v) for v in tok[1:])
        except ValueError as exc:
            raise FormatError(path, ln, str(exc)) from exc
        if idx != len(disks):
            raise FormatError(path, ln, "disk ids must run 0,1,2,...")
        try:
            disks.append(Disk(cx % L, cy % L, r))
        except ParameterError as exc:
            raise FormatError(path, ln, str(exc)) from exc

    n = L * L
    site_map = np.full(n, -1, dtype=np.int32)
    for i, d in enumerate(disks):
        sites = _disk_sites(L, d.cx, d.cy, d.radius - gap / 2.0)
        if np.any(site_map[sites] >= 0):
            raise FormatError(path, 3 + i, f"disk {i} overlaps an earlier disk")
        site_map[sites] = i

    if sites_at is not None:
        tokens: list[str] = []
        for line in raw[sites_at:]:
            tokens.extend(line.split())
        if len(tokens) != n:
            raise FormatError(path, sites_at, f"sites block has {len(tokens)} entries, expected {n}")
        try:
            stored = np.array([int(v) for v in tokens], dtype=np.int32)
        except ValueError as exc:
            raise FormatError(path, sites_at, str(exc)) from exc
        if not np.array_equal(stored, site_map):
            raise FormatError(path, sites_at, "sites block disagrees with the disk geometry")

    coverage = int(np.count_nonzero(site_map >= 0)) / n
    if abs(coverage - cov) > 1e-9:
        raise FormatError(path, 2, f"header coverage {cov!r} does not match the disks ({coverage!r})")
    meta = {
        "kind": kind,
        "gap": gap,
        "seed": seed,
        "gamma": g_gamma,
        "r_min": g_rmin,
        "r_max": g_rmax,
    }
    try:
        return NodeLayout(L, disks, site_map, coverage, False, meta)
    except ContractError as exc:
        raise FormatError(path, 0, str(exc)) from exc
