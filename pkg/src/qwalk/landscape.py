"""Discrete energy landscapes and their text file format.

A configuration is ``N`` coordinates of ``b`` bits each, packed little-endian
into a single state index ``s = sum_k c_k * 2**(b*k)``.  Moves change exactly
one coordinate by +1 or -1 modulo ``2**b``; move ``m = 2*k + d`` acts on
coordinate ``k`` with direction ``+1`` (``d = 0``) or ``-1`` (``d = 1``), so
``m ^ 1`` is always the inverse move.

File format::

    coords=N bits=b
    <energy of state 0>
    <energy of state 1>
    ...

with exactly ``2**(b*N)`` energy lines.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import LandscapeFormatError, ValidationError

MAX_TOTAL_BITS = 30
_HEADER = re.compile(r"^\s*coords\s*=\s*(\d+)\s+bits\s*=\s*(\d+)\s*$")


@dataclass(frozen=True, eq=False)
class EnergyLandscape:
    num_coords: int
    bits_per_coord: int
    energies: np.ndarray
    name: str = ""
    ground_set: tuple = field(init=False)

    def __post_init__(self):
        if self.num_coords < 1 or self.bits_per_coord < 1:
            raise ValidationError("num_coords and bits_per_coord must be positive")
        if self.num_coords * self.bits_per_coord > MAX_TOTAL_BITS:
            raise ValidationError(f"at most {MAX_TOTAL_BITS} total bits are supported")
        energies = np.array(self.energies, dtype=float)
        energies.setflags(write=False)
        if energies.shape != (self.num_states,):
            raise ValidationError(
                f"expected {self.num_states} energies, got shape {energies.shape}"
            )
        if not np.all(np.isfinite(energies)):
            raise ValidationError("energies must be finite")
        object.__setattr__(self, "energies", energies)
        ground = np.flatnonzero(energies == energies.min())
        object.__setattr__(self, "ground_set", tuple(int(i) for i in ground))

    @property
    def num_states(self) -> int:
        return 1 << (self.num_coords * self.bits_per_coord)

    @property
    def num_moves(self) -> int:
        return 2 * self.num_coords

    @property
    def levels(self) -> int:
        return 1 << self.bits_per_coord

    def coords(self, index: int) -> tuple:
        b, mask = self.bits_per_coord, self.levels - 1
        return tuple((index >> (b * k)) & mask for k in range(self.num_coords))

    def index(self, coords) -> int:
        if len(coords) != self.num_coords:
            raise ValidationError("wrong number of coordinates")
        s = 0
        for k, c in enumerate(coords):
            if not 0 <= c < self.levels:
                raise ValidationError(f"coordinate {k} out of range: {c}")
            s |= int(c) << (self.bits_per_coord * k)
        return s

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """``table[m, s]`` is the state reached from ``s`` by move ``m``."""
        b, levels = self.bits_per_coord, self.levels
        states = np.arange(self.num_states, dtype=np.int64)
        table = np.empty((self.num_moves, self.num_states), dtype=np.int64)
        for k in range(self.num_coords):
            shift = b * k
            c = (states >> shift) & (levels - 1)
            base = states - (c << shift)
            table[2 * k] = base + (((c + 1) % levels) << shift)
            table[2 * k + 1] = base + (((c - 1) % levels) << shift)
        table.setflags(write=False)
        return table

    def energy_deltas(self) -> np.ndarray:
        """``deltas[m, s] = E(move(s, m)) - E(s)``."""
        return self.energies[self.neighbor_table] - self.energies[None, :]

    def is_ground(self) -> np.ndarray:
        mask = np.zeros(self.num_states, dtype=bool)
        mask[list(self.ground_set)] = True
        return mask

    def permute_coords(self, perm) -> "EnergyLandscape":
        """Landscape with coordinate ``k`` of the result equal to ``perm[k]`` here."""
        perm = list(perm)
        if sorted(perm) != list(range(self.num_coords)):
            raise ValidationError("perm must be a permutation of the coordinates")
        new = np.empty_like(self.energies)
        for s in range(self.num_states):
            c = self.coords(s)
            new[self.index([c[perm[k]] for k in range(self.num_coords)])] = self.energies[s]
        return EnergyLandscape(self.num_coords, self.bits_per_coord, new, self.name)

    def summary(self) -> dict:
        return {
            "coords": self.num_coords,
            "bits": self.bits_per_coord,
            "states": self.num_states,
            "ground": len(self.ground_set),
            "min_energy": float(self.energies.min()),
            "max_energy": float(self.energies.max()),
        }


def parse_landscape(text: str, name: str = "") -> EnergyLandscape:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise LandscapeFormatError("missing 'coords=N bits=b' header", line=1)
    match = _HEADER.match(lines[0])
    if match is None:
        raise LandscapeFormatError(
            f"bad header {lines[0]!r}, expected 'coords=N bits=b'", line=1
        )
    n, b = int(match.group(1)), int(match.group(2))
    if n < 1 or b < 1:
        raise LandscapeFormatError("coords and bits must be positive", line=1)
    if n * b > MAX_TOTAL_BITS:
        raise LandscapeFormatError(f"coords*bits exceeds {MAX_TOTAL_BITS}", line=1)
    expected = 1 << (n * b)
    body = lines[1:]
    if len(body) != expected:
        raise LandscapeFormatError(
            f"expected {expected} energy lines after the header, found {len(body)}"
        )
    energies = np.empty(expected)
    for i, raw in enumerate(body):
        try:
            value = float(raw.strip())
        except ValueError:
            raise LandscapeFormatError(f"not a decimal number: {raw!r}", line=i + 2) from None
        if not math.isfinite(value):
            raise LandscapeFormatError(f"energy must be finite: {raw!r}", line=i + 2)
        energies[i] = value
    return EnergyLandscape(n, b, energies, name)


def load_landscape(path) -> EnergyLandscape:
    path = Path(path)
    return parse_landscape(path.read_text(), name=path.stem)


def format_landscape(landscape: EnergyLandscape) -> str:
    head = f"coords={landscape.num_coords} bits={landscape.bits_per_coord}\n"
    return head + "".join(f"{float(e)!r}\n" for e in landscape.energies)


def save_landscape(landscape: EnergyLandscape, path) -> None:
    Path(path).write_text(format_landscape(landscape))


def bundled_landscape_names() -> list:
    root = resources.files("qwalk") / "data" / "landscapes"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".txt"))


def bundled_landscape_path(name: str) -> Path:
    return Path(str(resources.files("qwalk") / "data" / "landscapes" / f"{name}.txt"))


def bundled_landscape(name: str) -> EnergyLandscape:
    return load_landscape(bundled_landscape_path(name))
