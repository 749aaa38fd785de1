"""Wavelength-dependent complex refractive indices.

A ``Material`` is either a constant (n, k) pair or a table of
(wavelength_nm, n, k) rows interpolated linearly in wavelength.  Only
passive media are supported (k >= 0 everywhere).  Tabulated materials
refuse queries outside the covered wavelength range: silent
extrapolation would corrupt downstream optimization results.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

__all__ = [
    "Material",
    "MaterialRangeError",
    "NkParseError",
    "eval_index",
    "load_nk_table",
    "builtin",
]


class MaterialRangeError(ValueError):
    """Queried wavelength falls outside a tabulated material's range."""


class NkParseError(ValueError):
    """Malformed nk table input."""


@dataclass(frozen=True)
class Material:
    """Immutable optical material; safe for concurrent reads."""

    name: str
    n: float | None = None
    k: float | None = None
    table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.table is None:
            if self.n is None:
                raise ValueError(f"material {self.name!r}: need n or a table")
            if self.n < 0 or (self.k is not None and self.k < 0):
                raise ValueError(f"material {self.name!r}: n and k must be >= 0")
            if self.k is None:
                object.__setattr__(self, "k", 0.0)
        else:
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 3 or tab.shape[0] < 2:
                raise ValueError(
                    f"material {self.name!r}: table must have >= 2 rows of "
                    "(wavelength_nm, n, k)"
                )
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise ValueError(
                    f"material {self.name!r}: table wavelengths must be "
                    "strictly increasing"
                )
            if np.any(tab[:, 0] <= 0):
                raise ValueError(f"material {self.name!r}: wavelengths must be > 0")
            if np.any(tab[:, 1] < 0) or np.any(tab[:, 2] < 0):
                raise ValueError(f"material {self.name!r}: n and k must be >= 0")
            object.__setattr__(self, "table", tab)

    @classmethod
    def constant(cls, name: str, n: float, k: float = 0.0) -> "Material":
        return cls(name=name, n=float(n), k=float(k))

    @classmethod
    def from_table(cls, name: str, rows) -> "Material":
        return cls(name=name, table=np.asarray(rows, dtype=float))

    @property
    def is_tabulated(self) -> bool:
        return self.table is not None

    def wavelength_range(self) -> tuple[float, float] | None:
        if self.table is None:
            return None
        return float(self.table[0, 0]), float(self.table[-1, 0])

    def index(self, wavelength_nm):
        """Complex refractive index n + ik at the given wavelength(s)."""
        wl = np.asarray(wavelength_nm, dtype=float)
        if self.table is None:
            out = np.broadcast_to(self.n + 1j * self.k, wl.shape).copy()
            return complex(out) if out.ndim == 0 else out
        lo, hi = self.wavelength_range()
        if np.any(wl < lo) or np.any(wl > hi):
            raise MaterialRangeError(
                f"material {self.name!r}: wavelength {wavelength_nm} nm outside "
                f"tabulated range [{lo}, {hi}] nm"
            )
        n = np.interp(wl, self.table[:, 0], self.table[:, 1])
        k = np.interp(wl, self.table[:, 0], self.table[:, 2])
        out = n + 1j * k
        return complex(out) if out.ndim == 0 else out


def eval_index(material: Material, wavelength_nm):
    """Complex index n + ik; linear interpolation for tabulated materials."""
    return material.index(wavelength_nm)


def load_nk_table(source, name: str = "nk-table") -> Material:
    """Parse an nk file into a tabulated Material.

    Format: UTF-8 text, '#'-prefixed comments, data lines
    ``wavelength_nm,n,k`` (comma separated, scientific notation accepted).
    """
    if isinstance(source, (str, bytes)):
        source = io.StringIO(source if isinstance(source, str) else source.decode())
    rows = []
    last_wl = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise NkParseError(
                f"{name}: line {lineno}: expected 'wavelength_nm,n,k', got {line!r}"
            )
        try:
            wl, n, k = (float(p) for p in parts)
        except ValueError:
            raise NkParseError(
                f"{name}: line {lineno}: non-numeric value in {line!r}"
            ) from None
        if wl <= 0:
            raise NkParseError(f"{name}: line {lineno}: wavelength must be > 0")
        if last_wl is not None and wl <= last_wl:
            raise NkParseError(
                f"{name}: line {lineno}: wavelengths must be strictly increasing "
                f"({wl} after {last_wl})"
            )
        if n < 0 or k < 0:
            raise NkParseError(f"{name}: line {lineno}: n and k must be >= 0")
        rows.append((wl, n, k))
        last_wl = wl
    if len(rows) < 2:
        raise NkParseError(f"{name}: need at least 2 data rows, got {len(rows)}")
    return Material.from_table(name, rows)


# Default optical constants.  Only the hBN index (2.0) is pinned by the
# modelled experiment; the rest are documented, swappable defaults taken
# from standard handbook data (shipped nk tables for Si and Al).
_CONSTANT_DEFAULTS = {
    "air": (1.0, 0.0),
    "vacuum": (1.0, 0.0),
    "sio2": (1.46, 0.0),
    "hbn": (2.0, 0.0),
    "al2o3": (1.76, 0.0),
}
_TABLE_FILES = {"si": "si.nk", "al": "al.nk"}
_builtin_cache: dict[str, Material] = {}


def builtin(name: str) -> Material:
    """Bundled default material by name (air, sio2, hbn, al2o3, si, al)."""
    key = name.lower()
    if key in _builtin_cache:
        return _builtin_cache[key]
    if key in _CONSTANT_DEFAULTS:
        n, k = _CONSTANT_DEFAULTS[key]
        mat = Material.constant(key, n, k)
    elif key in _TABLE_FILES:
        text = (
            resources.files("planaremit")
            .joinpath("data", _TABLE_FILES[key])
            .read_text(encoding="utf-8")
        )
        mat = load_nk_table(io.StringIO(text), name=key)
    else:
        raise KeyError(
            f"unknown builtin material {name!r}; available: "
            f"{sorted(_CONSTANT_DEFAULTS) + sorted(_TABLE_FILES)}"
        )
    _builtin_cache[key] = mat
    return mat
