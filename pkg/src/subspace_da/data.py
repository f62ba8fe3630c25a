"""Dataset containers, CSV ingestion, normalisation and the synthetic shift generator.

All randomness in the package is drawn from numpy's Philox 4x64 counter-based
bit generator (``np.random.Generator(np.random.Philox(seed))``), so datasets
are reproducible from a spec and a seed alone.
"""

from __future__ import annotations

import ast
import csv
import math
import operator
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, InvalidSpec, NonIntegerLabel, ParseError, RaggedRows
from .linalg import as_feature_matrix

__all__ = [
    "LabeledDataset",
    "ZScoreTransform",
    "SyntheticShiftSpec",
    "make_rng",
    "load_csv",
    "csv_header",
    "save_csv",
    "zscore_fit_apply",
    "l2_normalize_rows",
    "synth_shift",
    "parse_spec_text",
    "load_spec",
    "format_float",
]


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def format_float(value) -> str:
    return "%.17g" % float(value)


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with class ids in ``1..K``.

    ``classes`` keeps the original label values (``classes[k - 1]`` is the
    value that was mapped to id ``k``) so predictions can be reported in the
    caller's label space.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    classes: tuple = field(default=())

    def __post_init__(self):
        x = as_feature_matrix(self.features, "features")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ParseError(
                f"{y.shape[0] if y.ndim else 0} labels for {x.shape[0]} feature rows"
            )
        y = y.astype(np.int64)
        k = int(self.n_classes)
        if y.size and (y.min() < 1 or y.max() > k):
            raise ParseError(f"labels must lie in 1..{k}")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "n_classes", k)
        if not self.classes:
            object.__setattr__(self, "classes", tuple(range(1, k + 1)))

    @classmethod
    def from_raw(cls, features, raw_labels):
        """Remap arbitrary integer labels to contiguous ids in sorted order."""
        raw = np.asarray(raw_labels, dtype=np.int64)
        classes, ids = np.unique(raw, return_inverse=True)
        return cls(features, ids + 1, len(classes), tuple(int(c) for c in classes))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def mapping(self) -> dict:
        return {orig: k + 1 for k, orig in enumerate(self.classes)}

    def subset(self, idx):
        return LabeledDataset(self.features[idx], self.labels[idx], self.n_classes, self.classes)

    def with_features(self, features):
        return LabeledDataset(features, self.labels, self.n_classes, self.classes)


# --------------------------------------------------------------------- CSV


def _parse_float(token, line, col):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(
            f"line {line}: non-numeric value {token!r} in column {col!r}", line=line
        ) from None
    if not math.isfinite(value):
        raise ParseError(f"line {line}: non-finite value {token!r} in column {col!r}", line=line)
    return value


def _parse_label(token, line):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        value = float(token)
    except ValueError:
        value = math.nan
    if math.isfinite(value) and value.is_integer():
        return int(value)
    raise NonIntegerLabel(f"line {line}: label {token!r} is not an integer", line=line)


def csv_header(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        row = next(csv.reader(fh), None)
    if row is None:
        raise ParseError("line 1: missing header row", line=1)
    return [c.strip() for c in row]


def load_csv(path, label_column="label"):
    """Read a header-first numeric CSV.

    With ``label_column=None`` every column is a feature and a plain
    ``(n, D)`` array is returned. Otherwise the named column is pulled out as
    integer labels and a :class:`LabeledDataset` is returned whose
    ``mapping`` reports how raw labels were remapped to ``1..K``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("line 1: missing header row", line=1)
        header = [c.strip() for c in header]
        if label_column is not None and label_column not in header:
            raise ParseError(f"line 1: no column named {label_column!r}", line=1)
        label_idx = header.index(label_column) if label_column is not None else None
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise RaggedRows(
                    f"line {lineno}: expected {len(header)} fields, found {len(row)}",
                    line=lineno,
                )
            values = []
            for j, token in enumerate(row):
                token = token.strip()
                if j == label_idx:
                    labels.append(_parse_label(token, lineno))
                else:
                    values.append(_parse_float(token, lineno, header[j]))
            rows.append(values)
    if not rows:
        raise ParseError("file holds no data rows", line=2)
    x = np.array(rows, dtype=np.float64)
    if label_idx is None:
        return as_feature_matrix(x)
    return LabeledDataset.from_raw(x, labels)


def save_csv(path, features, labels=None):
    """Write features (and optionally a trailing ``label`` column) losslessly."""
    x = as_feature_matrix(features)
    header = [f"f{j}" for j in range(x.shape[1])]
    if labels is not None:
        header.append("label")
        labels = np.asarray(labels, dtype=np.int64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i, row in enumerate(x):
            cells = [format_float(v) for v in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            fh.write(",".join(cells) + "\n")


# ----------------------------------------------------------- normalisation


@dataclass(frozen=True)
class ZScoreTransform:
    """Per-column affine map ``(x - mean) / std`` with population std.

    Columns whose std is numerically zero are only centered; they are listed
    in ``degenerate``.
    """

    means: np.ndarray
    stds: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return np.flatnonzero(self.stds == 0.0)

    def apply(self, x):
        x = as_feature_matrix(x)
        if x.shape[1] != self.means.shape[0]:
            raise DimensionMismatch(
                f"data has {x.shape[1]} columns, transform expects {self.means.shape[0]}"
            )
        scale = np.where(self.stds == 0.0, 1.0, self.stds)
        return (x - self.means) / scale

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# normalization=zscore std=population(1/n); one column per line: mean,std\n")
            for m, s in zip(self.means, self.stds):
                fh.write(f"{format_float(m)},{format_float(s)}\n")


def zscore_fit_apply(train, others=()):
    """Fit z-score statistics on ``train`` and apply them to ``train`` and ``others``.

    Returns ``(train_normalized, [others_normalized...], transform)``.
    """
    train = as_feature_matrix(train, "train")
    if train.shape[0] < 2:
        raise ValueError("z-score fitting needs at least 2 rows")
    means = train.mean(axis=0)
    stds = train.std(axis=0)
    tiny = 1e-12 * np.maximum(1.0, np.abs(means))
    stds = np.where(stds <= tiny, 0.0, stds)
    transform = ZScoreTransform(means, stds)
    return transform.apply(train), [transform.apply(o) for o in others], transform


def l2_normalize_rows(x) -> np.ndarray:
    x = as_feature_matrix(x)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return np.divide(x, norms, out=x.copy(), where=norms > 0)


# -------------------------------------------------------- synthetic shift


@dataclass(frozen=True)
class SyntheticShiftSpec:
    """Parameters of the seeded two-domain Gaussian benchmark.

    Class centers sit at ``class_separation / sqrt(2)`` times orthonormal
    directions drawn inside the leading ``min(dim, classes + 1)``
    coordinates, so every pair of centers is exactly ``class_separation``
    apart. The target is a fresh draw rotated by ``rotation_angle`` in the
    first two coordinates and then shifted by ``translation``. When
    ``translation`` is ``None`` the shift has norm ``translation_norm`` and
    points at the first class center.
    """

    classes: int = 3
    per_class: int = 60
    dim: int = 20
    class_separation: float = 4.0
    rotation_angle: float = math.pi / 6
    translation: tuple | None = None
    noise_sigma: float = 1.0
    seed: int = 0
    translation_norm: float = 2.0

    def __post_init__(self):
        if self.translation is not None:
            object.__setattr__(self, "translation", tuple(float(t) for t in self.translation))
        problems = []
        if self.classes < 2:
            problems.append("classes must be >= 2")
        if self.per_class < 4:
            problems.append("per_class must be >= 4")
        if self.dim < 2:
            problems.append("dim must be >= 2 (rotation acts on the first two coordinates)")
        if self.dim < self.classes:
            problems.append("dim must be >= classes")
        if not self.noise_sigma > 0:
            problems.append("noise_sigma must be > 0")
        if self.class_separation < 0:
            problems.append("class_separation must be >= 0")
        if self.translation is not None and len(self.translation) != self.dim:
            problems.append(f"translation has length {len(self.translation)}, expected {self.dim}")
        if problems:
            raise InvalidSpec("; ".join(problems))

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


def synth_shift(spec: SyntheticShiftSpec):
    """Draw ``(source, target)`` labeled datasets from ``spec``.

    Target labels are returned for evaluation only; no training path in the
    package accepts them.
    """
    rng = make_rng(spec.seed)
    k, dim = spec.classes, spec.dim
    span = min(dim, k + 1)
    q, _ = np.linalg.qr(rng.standard_normal((span, k)))
    centers = np.zeros((k, dim))
    centers[:, :span] = (spec.class_separation / math.sqrt(2.0)) * q.T

    labels = np.repeat(np.arange(1, k + 1), spec.per_class)
    n = labels.shape[0]

    def draw():
        return centers[labels - 1] + spec.noise_sigma * rng.standard_normal((n, dim))

    xs = draw()
    xt = draw()
    c, s = math.cos(spec.rotation_angle), math.sin(spec.rotation_angle)
    x0, x1 = xt[:, 0].copy(), xt[:, 1].copy()
    xt[:, 0] = c * x0 - s * x1
    xt[:, 1] = s * x0 + c * x1
    if spec.translation is not None:
        xt += np.asarray(spec.translation)
    else:
        norm = np.linalg.norm(centers[0])
        direction = centers[0] / norm if norm > 0 else np.full(dim, 1.0 / math.sqrt(dim))
        xt += spec.translation_norm * direction

    ps = rng.permutation(n)
    pt = rng.permutation(n)
    source = LabeledDataset(xs[ps], labels[ps], k)
    target = LabeledDataset(xt[pt], labels[pt], k)
    return source, target


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_arith(node):
    # +, -, *, / over numeric literals and the name ``pi``; nothing else.
    if isinstance(node, ast.Expression):
        return _eval_arith(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        v = _eval_arith(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_arith(node.left), _eval_arith(node.right))
    raise ValueError("unsupported expression")


def _parse_number(text):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        value = _eval_arith(ast.parse(text, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise InvalidSpec(f"cannot parse number {text!r}") from None
    if not math.isfinite(value):
        raise InvalidSpec(f"cannot parse number {text!r}")
    return value


def parse_spec_text(text) -> SyntheticShiftSpec:
    """Parse ``key=value`` lines (``#`` comments) into a :class:`SyntheticShiftSpec`.

    ``translation`` takes a comma-separated vector and overrides
    ``translation_norm``. Numbers may use ``pi``
    (e.g. ``rotation_angle = pi/6``).
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec(f"line {lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        values[key] = value
    ints = {"classes", "per_class", "dim", "seed"}
    floats = {"class_separation", "rotation_angle", "noise_sigma", "translation_norm"}
    kwargs = {}
    for key, value in values.items():
        if key in ints:
            number = _parse_number(value)
            if not number.is_integer():
                raise InvalidSpec(f"{key} must be an integer")
            kwargs[key] = int(number)
        elif key in floats:
            kwargs[key] = _parse_number(value)
        elif key == "translation":
            kwargs[key] = tuple(_parse_number(v) for v in value.split(","))
        else:
            raise InvalidSpec(f"unknown key {key!r}")
    return SyntheticShiftSpec(**kwargs)


def load_spec(path) -> SyntheticShiftSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec_text(fh.read())
