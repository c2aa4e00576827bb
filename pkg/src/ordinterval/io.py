"""CSV ingestion and emission for interval datasets.

Two formats are supported, both UTF-8 with '.' as the decimal separator:

* IVD (wide): header ``id,label,f1_l,f1_u,...,fK_l,fK_u``. The label column
  may be omitted for prediction input.
* IVF (long): header ``id,label,channel,t,lower,upper`` with rows sorted by
  (id, channel, t); the label column may likewise be omitted.

Missing or malformed values are hard errors naming the row and column;
there is no imputation.
"""

from __future__ import annotations

import csv
from typing import Sequence

import numpy as np

from .errors import SchemaError
from .intervals import IntervalCurve, IntervalVector, LabeledDataset


def _parse_float(text: str, row: int, column: str) -> float:
    text = text.strip()
    if not text:
        raise SchemaError(f"row {row}: missing value in column {column!r}")
    try:
        return float(text)
    except ValueError:
        raise SchemaError(f"row {row}: cannot parse {text!r} in column {column!r}") from None


def _parse_int(text: str, row: int, column: str) -> int:
    text = text.strip()
    if not text:
        raise SchemaError(f"row {row}: missing value in column {column!r}")
    try:
        return int(text)
    except ValueError:
        raise SchemaError(f"row {row}: cannot parse {text!r} in column {column!r}") from None


def read_ivd_csv(path: str, n_classes: int | None = None):
    """Read a wide-format interval CSV.

    Returns a LabeledDataset when a label column is present, otherwise a
    (ids, observations) pair. ``n_classes`` defaults to the maximum label.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "id":
            raise SchemaError(f"{path}: first column must be 'id', got {header[:1]}")
        has_label = len(header) > 1 and header[1] == "label"
        feat_cols = header[2:] if has_label else header[1:]
        if len(feat_cols) == 0 or len(feat_cols) % 2 != 0:
            raise SchemaError(f"{path}: expected paired f<k>_l,f<k>_u feature columns")
        for k in range(len(feat_cols) // 2):
            lo_name, up_name = feat_cols[2 * k], feat_cols[2 * k + 1]
            if not (lo_name.endswith("_l") and up_name.endswith("_u")):
                raise SchemaError(
                    f"{path}: feature columns must alternate *_l,*_u, got {lo_name!r},{up_name!r}"
                )
        n_feat = len(feat_cols) // 2
        ids, labels, obs = [], [], []
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            expected = 1 + (1 if has_label else 0) + 2 * n_feat
            if len(row) != expected:
                raise SchemaError(f"{path}: row {row_num}: expected {expected} fields, got {len(row)}")
            ids.append(row[0].strip())
            offset = 1
            if has_label:
                labels.append(_parse_int(row[1], row_num, "label"))
                offset = 2
            lo = [_parse_float(row[offset + 2 * k], row_num, feat_cols[2 * k]) for k in range(n_feat)]
            up = [
                _parse_float(row[offset + 2 * k + 1], row_num, feat_cols[2 * k + 1])
                for k in range(n_feat)
            ]
            obs.append(IntervalVector(lo, up))
    if not obs:
        raise SchemaError(f"{path}: no data rows")
    if has_label:
        q = n_classes if n_classes is not None else max(labels)
        return LabeledDataset(
            observations=tuple(obs), labels=tuple(labels), n_classes=q, ids=tuple(ids)
        )
    return ids, obs


def write_ivd_csv(path: str, ids: Sequence, observations: Sequence[IntervalVector],
                  labels: Sequence[int] | None = None) -> None:
    n_feat = len(observations[0])
    cols = ["id"] + (["label"] if labels is not None else [])
    for k in range(1, n_feat + 1):
        cols += [f"f{k}_l", f"f{k}_u"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for i, (obs_id, o) in enumerate(zip(ids, observations)):
            fields = [str(obs_id)]
            if labels is not None:
                fields.append(str(int(labels[i])))
            for k in range(n_feat):
                fields.append(repr(float(o.lower[k])))
                fields.append(repr(float(o.upper[k])))
            fh.write(",".join(fields) + "\n")


def read_ivf_csv(path: str, n_classes: int | None = None):
    """Read a long-format interval-valued-function CSV.

    Rows must arrive sorted by (id, channel, t) and every id must cover the
    same (channel, t) combinations. Returns a LabeledDataset when labels are
    present, else (ids, curves).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        with_label = header == ["id", "label", "channel", "t", "lower", "upper"]
        without_label = header == ["id", "channel", "t", "lower", "upper"]
        if not (with_label or without_label):
            raise SchemaError(f"{path}: unexpected IVF header {header}")
        rows = []
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}: row {row_num}: expected {len(header)} fields")
            rec_id = row[0].strip()
            if with_label:
                label = _parse_int(row[1], row_num, "label")
                channel = _parse_int(row[2], row_num, "channel")
                t = _parse_float(row[3], row_num, "t")
                lo = _parse_float(row[4], row_num, "lower")
                up = _parse_float(row[5], row_num, "upper")
            else:
                label = None
                channel = _parse_int(row[1], row_num, "channel")
                t = _parse_float(row[2], row_num, "t")
                lo = _parse_float(row[3], row_num, "lower")
                up = _parse_float(row[4], row_num, "upper")
            rows.append((rec_id, label, channel, t, lo, up))
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    ids, labels, curves = [], [], []
    i = 0
    first_layout = None
    while i < len(rows):
        rec_id = rows[i][0]
        j = i
        while j < len(rows) and rows[j][0] == rec_id:
            j += 1
        block = rows[i:j]
        label = block[0][1]
        if any(r[1] != label for r in block):
            raise SchemaError(f"{path}: id {rec_id!r} has inconsistent labels")
        layout = [(r[2], r[3]) for r in block]
        if first_layout is None:
            first_layout = layout
            channels = sorted({c for c, _ in layout})
            grid = [t for c, t in layout if c == channels[0]]
            if sorted(grid) != grid or len(set(grid)) != len(grid):
                raise SchemaError(f"{path}: id {rec_id!r}: grid not strictly increasing")
            expected_layout = [(c, t) for c in channels for t in grid]
            if layout != expected_layout:
                raise SchemaError(f"{path}: id {rec_id!r}: rows not sorted by (channel, t)")
        elif layout != first_layout:
            raise SchemaError(f"{path}: id {rec_id!r}: (channel, t) layout differs from first id")
        n_ch = len({c for c, _ in layout})
        n_t = len(layout) // n_ch
        lo = np.array([r[4] for r in block]).reshape(n_ch, n_t)
        up = np.array([r[5] for r in block]).reshape(n_ch, n_t)
        grid_vals = [t for (c, t) in layout[:n_t]]
        curves.append(IntervalCurve(grid_vals, lo, up))
        ids.append(rec_id)
        labels.append(label)
        i = j
    if with_label:
        q = n_classes if n_classes is not None else max(labels)
        return LabeledDataset(
            observations=tuple(curves), labels=tuple(labels), n_classes=q, ids=tuple(ids)
        )
    return ids, curves


def write_ivf_csv(path: str, ids: Sequence, curves: Sequence[IntervalCurve],
                  labels: Sequence[int] | None = None) -> None:
    cols = ["id"] + (["label"] if labels is not None else []) + ["channel", "t", "lower", "upper"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for i, (obs_id, c) in enumerate(zip(ids, curves)):
            for v in range(c.n_channels):
                for t_idx in range(c.n_points):
                    fields = [str(obs_id)]
                    if labels is not None:
                        fields.append(str(int(labels[i])))
                    fields += [
                        str(v + 1),
                        repr(float(c.grid[t_idx])),
                        repr(float(c.lower[v, t_idx])),
                        repr(float(c.upper[v, t_idx])),
                    ]
                    fh.write(",".join(fields) + "\n")


def write_predictions_csv(path: str, ids: Sequence, labels: Sequence[int],
                          probabilities: np.ndarray | None = None) -> None:
    """Write ``id,predicted_label`` rows, plus p1..pQ when probabilities exist."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        cols = ["id", "predicted_label"]
        if probabilities is not None:
            cols += [f"p{q}" for q in range(1, probabilities.shape[1] + 1)]
        fh.write(",".join(cols) + "\n")
        for i, (obs_id, label) in enumerate(zip(ids, labels)):
            fields = [str(obs_id), str(int(label))]
            if probabilities is not None:
                fields += [repr(float(v)) for v in probabilities[i]]
            fh.write(",".join(fields) + "\n")
