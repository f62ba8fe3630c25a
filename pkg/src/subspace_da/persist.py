"""Plain-text model files and normalisation sidecars.

JCSL model layout (comma-separated, every float written with 17 significant
digits so a save/load round trip is bit-exact)::

    D,d,K,alpha,beta
    <D rows of T, d values each>
    <target mean, D values>
    <K rows: w_y (d values) followed by final_objective>
    labels,<K original label values>            (optional)
    v,<y>                                       (optional, once per class)
    <D rows of V_y>

Baseline models start with ``linear,<method>,D,d,K,c`` followed, for subspace
methods, by ``T`` and the target mean, then the ``K`` weight rows and an
optional ``labels`` line.
"""

from __future__ import annotations

import numpy as np

from .baselines import LinearPipelineModel
from .data import ZScoreTransform, format_float, l2_normalize_rows
from .errors import ParseError
from .jcsl import JcslBinaryModel, JcslMulticlassModel
from .linalg import SubspaceBasis
from .svm import LinearModel

__all__ = ["save_model", "load_model", "save_normalization", "load_normalization", "Normalization"]


def _row(values):
    return ",".join(format_float(v) for v in np.ravel(values))


def _matrix(lines, m):
    lines.extend(_row(r) for r in m)


def save_model(path, model, *, include_v=True):
    lines = []
    if isinstance(model, JcslMulticlassModel):
        t = model.t
        lines.append(f"{t.ambient_dim},{t.d},{model.n_classes},"
                     f"{format_float(model.alpha)},{format_float(model.beta)}")
        _matrix(lines, t.basis)
        lines.append(_row(t.mean))
        for bm in model.per_class:
            lines.append(_row(np.append(bm.w, bm.final_objective)))
        if model.classes:
            lines.append("labels," + ",".join(str(int(c)) for c in model.classes))
        if include_v:
            for k, bm in enumerate(model.per_class, start=1):
                if bm.v is not None:
                    lines.append(f"v,{k}")
                    _matrix(lines, bm.v)
    elif isinstance(model, LinearPipelineModel):
        clf = model.classifier
        dim = clf.dim if model.basis is None else model.basis.ambient_dim
        lines.append(f"linear,{model.method},{dim},{clf.dim},{clf.n_classes},{format_float(clf.c)}")
        if model.basis is not None:
            _matrix(lines, model.basis.basis)
            lines.append(_row(model.basis.mean))
        _matrix(lines, clf.weights)
        if model.classes:
            lines.append("labels," + ",".join(str(int(c)) for c in model.classes))
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


class _Reader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def done(self):
        return self.pos >= len(self.lines)

    def peek(self):
        return self.lines[self.pos].split(",")

    def floats(self, count):
        if self.done():
            raise ParseError(f"line {self.pos + 1}: unexpected end of model file", line=self.pos + 1)
        cells = self.lines[self.pos].split(",")
        self.pos += 1
        if len(cells) != count:
            raise ParseError(f"line {self.pos}: expected {count} values, found {len(cells)}", line=self.pos)
        try:
            return np.array([float(c) for c in cells])
        except ValueError:
            raise ParseError(f"line {self.pos}: non-numeric value", line=self.pos) from None

    def matrix(self, rows, cols):
        return np.stack([self.floats(cols) for _ in range(rows)]) if rows else np.zeros((0, cols))


def _ints(cells, line):
    try:
        return [int(c) for c in cells]
    except ValueError:
        raise ParseError(f"line {line}: expected integers", line=line) from None


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ParseError("line 1: empty model file", line=1)
    r = _Reader(lines)
    head = r.peek()
    if head[0] == "linear":
        if len(head) != 6:
            raise ParseError("line 1: malformed linear model header", line=1)
        r.pos += 1
        method = head[1]
        dim, d, k = _ints(head[2:5], 1)
        c = float(head[5])
        basis = None
        if method != "na":
            basis = SubspaceBasis(r.matrix(dim, d), r.floats(dim))
        weights = r.matrix(k, d)
        classes = ()
        if not r.done() and r.peek()[0] == "labels":
            classes = tuple(_ints(r.peek()[1:], r.pos + 1))
            r.pos += 1
        return LinearPipelineModel(method, LinearModel(weights, c), basis, classes)

    if len(head) != 5:
        raise ParseError("line 1: expected header D,d,K,alpha,beta", line=1)
    r.pos += 1
    dim, d, k = _ints(head[:3], 1)
    alpha, beta = float(head[3]), float(head[4])
    t = SubspaceBasis(r.matrix(dim, d), r.floats(dim))
    rows = [r.floats(d + 1) for _ in range(k)]
    classes = ()
    vs = {}
    while not r.done():
        cells = r.peek()
        line = r.pos + 1
        r.pos += 1
        if cells[0] == "labels":
            classes = tuple(_ints(cells[1:], line))
        elif cells[0] == "v":
            vs[_ints(cells[1:2], line)[0]] = r.matrix(dim, d)
        else:
            raise ParseError(f"line {line}: unexpected content", line=line)
    per_class = tuple(
        JcslBinaryModel(vs.get(i + 1), row[:d], float(row[d]), 0) for i, row in enumerate(rows)
    )
    return JcslMulticlassModel(t, per_class, alpha, beta, None, classes)


class Normalization:
    """Stateless description of how features were normalised before training."""

    def __init__(self, kind="none", zscore=None):
        self.kind = kind
        self.zscore = zscore

    def apply(self, x):
        if self.kind == "zscore":
            return self.zscore.apply(x)
        if self.kind == "l2":
            return l2_normalize_rows(x)
        return np.asarray(x, dtype=np.float64)


def save_normalization(path, kind, zscore=None):
    if kind == "zscore":
        zscore.save(path)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# normalization={kind}\n")


def load_normalization(path) -> Normalization:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("# normalization="):
        raise ParseError("line 1: missing normalization header", line=1)
    kind = lines[0].split("=", 1)[1].split()[0]
    if kind != "zscore":
        return Normalization(kind)
    means, stds = [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        try:
            m, s = (float(v) for v in ln.split(","))
        except ValueError:
            raise ParseError(f"line {lineno}: expected mean,std", line=lineno) from None
        means.append(m)
        stds.append(s)
    return Normalization("zscore", ZScoreTransform(np.array(means), np.array(stds)))
