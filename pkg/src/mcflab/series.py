"""Per-record time series of a run, with CSV round-tripping."""

from __future__ import annotations

import csv
import math

import numpy as np

BASE_COLUMNS = ("t", "sup", "inf", "mean")


class TimeSeries:
    """Ordered records ``(t, sup, inf, mean, probe0.., extras..)``.

    Probe columns are named ``probe0``, ``probe1``, ... in the order of
    ``probe_points``.  Extra columns (clearances, bound checks) are added the
    first time a record supplies them; earlier rows read back as NaN.
    """

    def __init__(self, probe_points=()):
        self.probe_points = [tuple(float(c) for c in np.atleast_1d(p)) for p in probe_points]
        self._rows: list[dict[str, float]] = []
        self._extra_names: list[str] = []

    def __len__(self):
        return len(self._rows)

    @property
    def columns(self) -> list[str]:
        probes = [f"probe{i}" for i in range(len(self.probe_points))]
        return list(BASE_COLUMNS) + probes + self._extra_names

    def append(self, t: float, field=None, extras=None, **values) -> None:
        """Add one record.

        With ``field`` the base and probe columns are measured from it;
        otherwise they must be passed as keyword values.
        """
        t = float(t)
        if self._rows and not t > self._rows[-1]["t"]:
            raise ValueError(f"record times must increase: {t} after {self._rows[-1]['t']}")
        row = {"t": t}
        if field is not None:
            row.update(sup=field.sup(), inf=field.inf(), mean=field.mean())
            for i, p in enumerate(self.probe_points):
                row[f"probe{i}"] = field.at(p)
        row.update({k: float(v) for k, v in values.items()})
        if "sup" in row and "inf" in row and row["sup"] < row["inf"]:
            raise ValueError("sup below inf")
        for k, v in (extras or {}).items():
            if k not in self._extra_names:
                self._extra_names.append(k)
            row[k] = float(v)
        self._rows.append(row)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(name)
        return np.array([r.get(name, math.nan) for r in self._rows])

    def __getitem__(self, name: str) -> np.ndarray:
        return self.column(name)

    def last(self) -> dict[str, float]:
        return dict(self._rows[-1])

    def to_csv(self, path) -> None:
        cols = self.columns
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self._rows:
                w.writerow([repr(r.get(c, math.nan)) for c in cols])

    @classmethod
    def read_csv(cls, path) -> "TimeSeries":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        n_probe = sum(1 for c in header if c.startswith("probe"))
        ts = cls(probe_points=[(math.nan,)] * n_probe)
        known = set(BASE_COLUMNS) | {f"probe{i}" for i in range(n_probe)}
        ts._extra_names = [c for c in header if c not in known]
        for r in rows[1:]:
            ts._rows.append({c: float(v) for c, v in zip(header, r)})
        return ts
