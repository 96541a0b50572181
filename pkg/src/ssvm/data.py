"""Problem data for the penalized SVM solvers.

Everything downstream consumes the types defined here: a validated sample
(`Dataset`), a contiguous column partition (`BlockPartition`), the
label-signed design matrix (`SignedDesign`), per-coefficient penalty
weights (`PenaltyWeights`) and the solver settings (`SolverConfig`).
All of them are treated as immutable once built; the arrays they hold are
marked read-only so accidental mutation fails loudly.
"""

import csv
from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    """An input file or dataset violates the data contract."""


def _freeze(a):
    a.flags.writeable = False
    return a


@dataclass
class Dataset:
    """A classification sample: features ``X`` (n x p) and labels in {-1, +1}.

    ``X`` is stored in column-major order because every solver in this
    package walks the design one column (or column block) at a time.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asfortranarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(np.ravel(self.y), dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError("X must be a non-empty two-dimensional matrix")
        if y.shape[0] != X.shape[0]:
            raise DataError(
                "label count %d does not match row count %d" % (y.shape[0], X.shape[0])
            )
        if not np.isfinite(X).all():
            raise DataError("X contains non-finite values")
        if not np.all(np.abs(y) == 1.0):
            raise DataError("invalid label: labels must be -1 or +1")
        self.X = _freeze(X)
        self.y = _freeze(y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


def _parse_label(token, where):
    try:
        value = float(token)
    except ValueError:
        raise DataError("%s: invalid label %r" % (where, token)) from None
    if value == 1.0 or value == -1.0:
        return value
    if value == 0.0:
        return -1.0  # {0, 1} encodings map onto {-1, +1}
    raise DataError("%s: invalid label %r (expected -1, 0 or +1)" % (where, token))


def _load_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        records = [rec for rec in csv.reader(fh) if rec and any(t.strip() for t in rec)]
    if records:
        try:
            for tok in records[0]:
                float(tok)
        except ValueError:
            records = records[1:]  # header row
    if not records:
        raise DataError("%s: empty dataset" % path)
    labels, rows = [], []
    width = len(records[0])
    if width < 2:
        raise DataError("%s: need a label column and at least one feature" % path)
    for k, rec in enumerate(records, start=1):
        where = "%s, row %d" % (path, k)
        if len(rec) != width:
            raise DataError("%s: expected %d fields, got %d" % (where, width, len(rec)))
        labels.append(_parse_label(rec[0], where))
        try:
            rows.append([float(tok) for tok in rec[1:]])
        except ValueError:
            raise DataError("%s: non-numeric feature value" % where) from None
    return np.asarray(rows), np.asarray(labels)


def _load_sparse(path, n_features):
    labels, rows = [], []
    max_idx = 0
    with open(path, encoding="utf-8") as fh:
        for k, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            where = "%s, line %d" % (path, k)
            labels.append(_parse_label(tokens[0], where))
            entries = []
            prev = 0
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise DataError("%s: malformed entry %r" % (where, tok))
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise DataError("%s: malformed entry %r" % (where, tok)) from None
                if idx < 1:
                    raise DataError("%s: indices are 1-based, got %d" % (where, idx))
                if idx <= prev:
                    raise DataError("%s: indices must be strictly increasing" % where)
                prev = idx
                entries.append((idx - 1, val))
            max_idx = max(max_idx, prev)
            rows.append(entries)
    if not rows:
        raise DataError("%s: empty dataset" % path)
    p = n_features if n_features is not None else max_idx
    if p < 1:
        raise DataError("%s: no feature indices and no feature count given" % path)
    if max_idx > p:
        raise DataError("%s: feature index %d exceeds feature count %d" % (path, max_idx, p))
    X = np.zeros((len(rows), p))
    for i, entries in enumerate(rows):
        for j, val in entries:
            X[i, j] = val
    return X, np.asarray(labels)


def load_dataset(path, fmt="csv", n_features=None):
    """Read a dataset from disk.

    Parameters
    ----------
    path : str
        File to read.
    fmt : {"csv", "sparse"}
        ``csv``: label in the first column, optional header row.
        ``sparse``: one sample per line, ``<label> <idx>:<value> ...`` with
        strictly increasing 1-based indices.
    n_features : int, optional
        Column count for the sparse format; defaults to the largest index
        seen in the file.
    """
    if fmt == "csv":
        X, y = _load_csv(path)
    elif fmt == "sparse":
        X, y = _load_sparse(path, n_features)
    else:
        raise ValueError("unknown format %r (expected 'csv' or 'sparse')" % fmt)
    return Dataset(X, y)


@dataclass
class BlockPartition:
    """Contiguous column blocks given by strictly increasing boundaries.

    ``boundaries`` has G+1 entries starting at 0 and ending at p; block g
    holds columns ``boundaries[g]:boundaries[g+1]``.
    """

    boundaries: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(self.boundaries, dtype=np.int64)
        if b.ndim != 1 or b.shape[0] < 2:
            raise ValueError("need at least two boundaries")
        if b[0] != 0:
            raise ValueError("boundaries must start at 0")
        if np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        self.boundaries = _freeze(b)

    @property
    def G(self):
        return self.boundaries.shape[0] - 1

    @property
    def n_features(self):
        return int(self.boundaries[-1])

    @property
    def sizes(self):
        return np.diff(self.boundaries)

    def block_slice(self, g):
        return slice(int(self.boundaries[g]), int(self.boundaries[g + 1]))


def make_partition(p, G):
    """Split p columns into G contiguous blocks of balanced size.

    The first ``p mod G`` blocks get the extra column.
    """
    if G < 1 or G > p:
        raise ValueError("need 1 <= G <= p, got G=%d for p=%d" % (G, p))
    base, extra = divmod(p, G)
    sizes = [base + 1] * extra + [base] * (G - extra)
    return BlockPartition(np.concatenate([[0], np.cumsum(sizes)]))


@dataclass
class SignedDesign:
    """Design matrix with each row pre-multiplied by its label.

    ``A[i, j] = y[i] * X[i, j]``, so the hinge argument for sample i is
    ``1 - A[i] @ beta_plus - y[i] * beta0``.  The label vector doubles as
    the intercept column of the augmented design.  Squared column norms are
    cached because the coordinate updates divide by them constantly.
    """

    A: np.ndarray
    y: np.ndarray
    partition: BlockPartition
    col_sq_norms: np.ndarray

    def __post_init__(self):
        if self.A.shape != (self.y.shape[0], self.partition.n_features):
            raise ValueError("design shape inconsistent with labels or partition")
        if self.col_sq_norms.shape != (self.A.shape[1],):
            raise ValueError("column norm cache has the wrong length")
        _freeze(self.A)
        _freeze(self.col_sq_norms)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.A.shape[1]

    @property
    def G(self):
        return self.partition.G

    def block(self, g):
        return self.A[:, self.partition.block_slice(g)]

    def unsign(self):
        """Recover the raw feature matrix; exact because labels are +-1."""
        return np.asfortranarray(self.A * self.y[:, None])


def build_signed_design(dataset, partition):
    if partition.n_features != dataset.p:
        raise ValueError(
            "partition covers %d columns, X has %d" % (partition.n_features, dataset.p)
        )
    A = np.empty(dataset.X.shape, order="F")
    np.multiply(dataset.X, dataset.y[:, None], out=A)
    col_sq = np.einsum("ij,ij->j", A, A)
    return SignedDesign(A, dataset.y, partition, col_sq)


@dataclass
class PenaltyWeights:
    """Per-coefficient l1 weights; the intercept is never penalized."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.alpha, dtype=np.float64)
        if a.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if not np.isfinite(a).all() or np.any(a < 0.0):
            raise ValueError("weights must be finite and non-negative")
        self.alpha = _freeze(a)

    @classmethod
    def ones(cls, p):
        return cls(np.ones(p))

    def block(self, partition, g):
        return self.alpha[partition.block_slice(g)]


@dataclass
class SolverConfig:
    """Settings for the ADMM engine.

    phi is the augmented-Lagrangian parameter, theta the dual step length
    (valid up to the golden ratio), and variant picks the block update:
    ``cd`` sweeps coordinates, ``prox`` takes one majorized proximal step.
    """

    phi: float = 1.0
    theta: float = 1.618
    tol: float = 1e-6
    max_iter: int = 20000
    inner_sweeps: int = 10
    inner_tol: float = 1e-8
    eta_safety: float = 1.01
    variant: str = "cd"
    support_eps: float = 1e-6

    def __post_init__(self):
        if not self.phi > 0.0:
            raise ValueError("phi must be positive")
        if not 0.0 < self.theta <= 1.6181:
            raise ValueError("theta must lie in (0, 1.6181]")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.inner_sweeps < 1:
            raise ValueError("inner_sweeps must be at least 1")
        if not self.inner_tol > 0.0:
            raise ValueError("inner_tol must be positive")
        if not self.eta_safety > 1.0:
            raise ValueError("eta_safety must exceed 1")
        if self.variant not in ("cd", "prox"):
            raise ValueError("variant must be 'cd' or 'prox'")
        if not self.support_eps >= 0.0:
            raise ValueError("support_eps must be non-negative")


def objective(dataset, weights, lam, beta0, beta_plus):
    """Mean hinge loss plus the weighted l1 penalty.

    ``(1/n) sum_i (1 - y_i x_i' beta_plus - y_i beta0)_+ + lam * sum_j alpha_j |beta_j|``
    """
    beta_plus = np.asarray(beta_plus, dtype=np.float64)
    if beta_plus.shape != (dataset.p,):
        raise ValueError("beta_plus must have length %d" % dataset.p)
    if weights.alpha.shape != (dataset.p,):
        raise ValueError("weights must have length %d" % dataset.p)
    if lam < 0.0:
        raise ValueError("lam must be non-negative")
    margins = 1.0 - dataset.y * (dataset.X @ beta_plus) - dataset.y * beta0
    hinge = float(np.maximum(margins, 0.0).mean())
    return hinge + lam * float(weights.alpha @ np.abs(beta_plus))
