"""Finite-dimensional sample container shared by the simulators and the limit samplers."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalError, ParameterError


@dataclass
class FddSample:
    """``reps x len(u_grid)`` matrix of observations at the scales ``u_grid``.

    ``lattice`` is the spacing of the value lattice before normalization
    divided by the scale (``None`` for continuous samples); distribution
    tests use it to break ties.
    """

    values: np.ndarray
    u_grid: np.ndarray
    t: Optional[float] = None
    case: str = ""
    normalization: dict = field(default_factory=dict)
    lattice: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        self.u_grid = np.atleast_1d(np.asarray(self.u_grid, dtype=float))
        if self.values.shape[1] != len(self.u_grid):
            raise ParameterError("values must have one column per grid point")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("sample contains non-finite entries")

    @property
    def reps(self) -> int:
        return self.values.shape[0]

    def column(self, u: float) -> np.ndarray:
        idx = np.flatnonzero(np.isclose(self.u_grid, u))
        if not len(idx):
            raise ParameterError(f"u={u} is not on the grid")
        return self.values[:, idx[0]]

    def to_csv(self, target) -> None:
        """Write ``rep,u,value,t,case`` rows to a path or an open text file."""
        own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
        fh = open(target, "w", newline="") if own else target
        try:
            w = csv.writer(fh)
            w.writerow(["rep", "u", "value", "t", "case"])
            t = "" if self.t is None else repr(float(self.t))
            for r, row in enumerate(self.values):
                for u, x in zip(self.u_grid, row):
                    w.writerow([r, repr(float(u)), repr(float(x)), t, self.case])
        finally:
            if own:
                fh.close()

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, source) -> "FddSample":
        own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
        fh = open(source, newline="") if own else source
        try:
            rows = list(csv.DictReader(fh))
        finally:
            if own:
                fh.close()
        if not rows:
            raise ParameterError("empty sample file")
        u_grid = sorted({float(r["u"]) for r in rows})
        reps = max(int(r["rep"]) for r in rows) + 1
        col = {u: j for j, u in enumerate(u_grid)}
        values = np.full((reps, len(u_grid)), math.nan)
        for r in rows:
            values[int(r["rep"]), col[float(r["u"])]] = float(r["value"])
        t = rows[0]["t"]
        return cls(values, np.array(u_grid), float(t) if t else None, rows[0]["case"])
