"""Dataset container and light input validation."""

from dataclasses import dataclass, field

import numpy as np
from sklearn.utils.validation import check_array


@dataclass(frozen=True)
class Dataset:
    """``n`` observations of a ``J``-dimensional continuous outcome.

    Attributes
    ----------
    values : ndarray of shape (n, J)
    columns : tuple of str
        Column labels, one per dimension.
    meta : dict
        Free-form provenance (generator id, seed, source file, ...).
    """

    values: np.ndarray
    columns: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = check_array(self.values, dtype=np.float64, ensure_2d=True, copy=True)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        columns = tuple(self.columns) or tuple(f"y{j + 1}" for j in range(values.shape[1]))
        if len(columns) != values.shape[1]:
            raise ValueError(
                f"{len(columns)} column labels for {values.shape[1]} columns"
            )
        object.__setattr__(self, "columns", columns)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def J(self):
        return self.values.shape[1]

    def subset(self, rows):
        return Dataset(self.values[np.asarray(rows)], self.columns, dict(self.meta))

    def to_csv(self, path):
        header = ",".join(self.columns)
        np.savetxt(path, self.values, delimiter=",", header=header, comments="", fmt="%.17g")


def as_array(data):
    """Return the (n, J) float array behind ``data`` (Dataset or array-like)."""
    if isinstance(data, Dataset):
        return data.values
    return check_array(data, dtype=np.float64, ensure_2d=True)


def column_labels(data):
    if isinstance(data, Dataset):
        return data.columns
    return tuple(f"y{j + 1}" for j in range(as_array(data).shape[1]))
