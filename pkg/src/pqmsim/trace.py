"""Per-step simulation records shared by every simulator."""
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

# CSV column order; absent (None) columns are dropped on output.
COLUMNS = ("t", "n_in", "n_out", "R", "R_prime",
           "c_l1_in", "c_l1_out", "conc_in", "conc_out", "p_meas")


@dataclass(frozen=True)
class TraceRecord:
    t: float
    n_in: Optional[float] = None
    n_out: Optional[float] = None
    R: Optional[float] = None
    R_prime: Optional[float] = None
    c_l1_in: Optional[float] = None
    c_l1_out: Optional[float] = None
    conc_in: Optional[float] = None
    conc_out: Optional[float] = None
    p_meas: Optional[float] = None

    def populated(self):
        return tuple(f.name for f in fields(self) if getattr(self, f.name) is not None)


@dataclass
class Trace:
    """Ordered records plus run diagnostics (clamp counts, budgets, ...)."""

    records: list
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def columns(self):
        if not self.records:
            return ()
        present = set(self.records[0].populated())
        return tuple(c for c in COLUMNS if c in present)
