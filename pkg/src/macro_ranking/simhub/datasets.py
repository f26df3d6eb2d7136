"""Context streams and their CSV representation.

Two long-format files describe a stream:

- contexts: ``t,item_id,relevance[,stratum]``, one row per (step, item)
- groups: ``constraint_id,item_id,weight``, the intervention-association matrix

Items are ordered by first appearance in the contexts file, constraints by
first appearance in the groups file. Pairs missing from the contexts file
have relevance 0.
"""

from __future__ import annotations

import hashlib
import re
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from macro_ranking.core.exceptions import DatasetError, ValidationError
from macro_ranking.core.types import Context, FloatArray

CONTEXT_COLUMNS = ("t", "item_id", "relevance")
GROUP_COLUMNS = ("constraint_id", "item_id", "weight")
STRATUM_COLUMN = "stratum"

DEFAULT_SPLIT = (0.6, 0.2, 0.2)


@dataclass(frozen=True, eq=False)
class ContextStream:
    """An ordered sequence of contexts sharing one item and constraint set."""

    contexts: tuple[Context, ...]
    item_ids: tuple[str, ...]
    constraint_ids: tuple[str, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.contexts:
            raise ValidationError("a context stream needs at least one step")
        n, m = len(self.item_ids), len(self.constraint_ids)
        for ctx in self.contexts:
            if ctx.n != n or ctx.m != m:
                raise ValidationError(f"context at t={ctx.t} has n={ctx.n}, m={ctx.m}; stream has n={n}, m={m}")
        if self.labels is not None and len(self.labels) != len(self.contexts):
            raise ValidationError("stratum labels must have one entry per step")
        object.__setattr__(self, "contexts", tuple(self.contexts))

    @property
    def n(self) -> int:
        return len(self.item_ids)

    @property
    def m(self) -> int:
        return len(self.constraint_ids)

    @property
    def T(self) -> int:
        return len(self.contexts)

    def __len__(self) -> int:
        return len(self.contexts)

    def __getitem__(self, index: int) -> Context:
        return self.contexts[index]

    @property
    def steps(self) -> list[int]:
        return [ctx.t for ctx in self.contexts]

    def relevance_matrix(self) -> FloatArray:
        """Relevance per step (rows) and item (columns)."""
        return np.stack([ctx.r for ctx in self.contexts])

    def checksum(self) -> str:
        """SHA-256 over steps, relevances, association matrices, and labels."""
        digest = hashlib.sha256()
        for ctx in self.contexts:
            digest.update(str(ctx.t).encode())
            digest.update(ctx.r.tobytes())
            digest.update(ctx.W.tobytes())
        for label in self.labels or ():
            digest.update(label.encode())
        return digest.hexdigest()

    def subset(self, start: int, stop: int) -> ContextStream:
        return ContextStream(
            contexts=self.contexts[start:stop],
            item_ids=self.item_ids,
            constraint_ids=self.constraint_ids,
            labels=self.labels[start:stop] if self.labels is not None else None,
        )

    def shuffled(self, seed: int = 0) -> ContextStream:
        """The same contexts in a seeded random order.

        Steps keep their original numbers, so step-derived strata no longer
        line up with content; stream labels travel with their contexts.
        """
        order = np.random.default_rng(seed).permutation(self.T)
        contexts = tuple(
            Context(t=slot.t, r=self.contexts[i].r, W=self.contexts[i].W)
            for slot, i in zip(self.contexts, order, strict=True)
        )
        labels = tuple(self.labels[i] for i in order) if self.labels is not None else None
        return ContextStream(
            contexts=contexts, item_ids=self.item_ids, constraint_ids=self.constraint_ids, labels=labels
        )

    def split(self, ratios: Sequence[float] = DEFAULT_SPLIT) -> tuple[ContextStream, ContextStream, ContextStream]:
        """Chronological train/dev/test split; every part keeps at least one step."""
        if len(ratios) != 3 or any(r <= 0 for r in ratios):
            raise ValidationError(f"split needs three positive ratios, got {list(ratios)}")
        if self.T < 3:
            raise ValidationError(f"cannot split a stream of {self.T} steps into three parts")
        weights = np.asarray(ratios, dtype=np.float64) / float(sum(ratios))
        n_train = min(max(1, int(round(weights[0] * self.T))), self.T - 2)
        n_dev = min(max(1, int(round(weights[1] * self.T))), self.T - n_train - 1)
        return (
            self.subset(0, n_train),
            self.subset(n_train, n_train + n_dev),
            self.subset(n_train + n_dev, self.T),
        )


def _read_table(path: Path, columns: Sequence[str], optional: Sequence[str] = ()) -> pd.DataFrame:
    if not path.exists():
        raise DatasetError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise DatasetError(f"ragged row in {path.name}: {e}", line=line, cause=e) from e
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f"{path.name} is empty", line=1, cause=e) from e

    missing = [c for c in columns if c not in frame.columns]
    unknown = [c for c in frame.columns if c not in columns and c not in optional]
    if missing or unknown:
        raise DatasetError(
            f"{path.name} header must be {','.join(columns)}; missing {missing}, unexpected {unknown}", line=1
        )
    frame = frame.fillna("")
    for index, row in enumerate(frame.itertuples(index=False)):
        for column, value in zip(frame.columns, row, strict=True):
            if value.strip() == "":
                raise DatasetError(f"missing value for {column!r} in {path.name}", line=index + 2)
    return frame


def _numeric(frame: pd.DataFrame, column: str, name: str) -> np.ndarray:
    values = pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        row = int(bad[0])
        raise DatasetError(f"{column} {frame[column].iloc[row]!r} in {name} is not a finite number", line=row + 2)
    return values


def load_csv(contexts_path: str | Path, groups_path: str | Path) -> ContextStream:
    """Load a context stream from a contexts file and a groups file.

    Args:
        contexts_path: CSV with header ``t,item_id,relevance`` and an
            optional ``stratum`` column
        groups_path: CSV with header ``constraint_id,item_id,weight``

    Returns:
        The validated stream, relevances clamped to [0, 1]

    Raises:
        DatasetError: On missing files, ragged rows, non-finite numbers,
            duplicate rows, or items in the groups file that never occur in
            the contexts file. Line numbers count the header as line 1.
    """
    contexts_path, groups_path = Path(contexts_path), Path(groups_path)
    ctx_frame = _read_table(contexts_path, CONTEXT_COLUMNS, optional=(STRATUM_COLUMN,))
    grp_frame = _read_table(groups_path, GROUP_COLUMNS)

    t_values = _numeric(ctx_frame, "t", contexts_path.name)
    non_integer = np.flatnonzero(t_values != np.round(t_values))
    if non_integer.size:
        bad = int(non_integer[0])
        raise DatasetError(f"step {ctx_frame['t'].iloc[bad]!r} is not an integer", line=bad + 2)
    relevance = _numeric(ctx_frame, "relevance", contexts_path.name)
    steps = t_values.astype(np.int64)

    item_ids = list(dict.fromkeys(ctx_frame["item_id"].str.strip()))
    item_pos = {item: j for j, item in enumerate(item_ids)}
    step_ids = sorted(set(int(t) for t in steps))
    step_pos = {t: i for i, t in enumerate(step_ids)}

    rel = np.zeros((len(step_ids), len(item_ids)))
    seen = np.zeros_like(rel, dtype=bool)
    labels: list[str | None] = [None] * len(step_ids)
    has_strata = STRATUM_COLUMN in ctx_frame.columns
    for index, (t, item) in enumerate(zip(steps, ctx_frame["item_id"].str.strip(), strict=True)):
        i, j = step_pos[int(t)], item_pos[item]
        if seen[i, j]:
            raise DatasetError(f"duplicate row for t={t}, item {item!r}", line=index + 2)
        seen[i, j] = True
        rel[i, j] = relevance[index]
        if has_strata:
            label = ctx_frame[STRATUM_COLUMN].iloc[index].strip()
            if labels[i] is not None and labels[i] != label:
                raise DatasetError(f"step {t} has conflicting strata {labels[i]!r} and {label!r}", line=index + 2)
            labels[i] = label

    weights = _numeric(grp_frame, "weight", groups_path.name)
    negative = np.flatnonzero(weights < 0)
    if negative.size:
        raise DatasetError("group weights must be nonnegative", line=int(negative[0]) + 2)
    constraint_ids = list(dict.fromkeys(grp_frame["constraint_id"].str.strip()))
    if not constraint_ids:
        raise DatasetError(f"{groups_path.name} defines no constraints", line=1)
    W = np.zeros((len(constraint_ids), len(item_ids)))
    for index, (cid, item) in enumerate(
        zip(grp_frame["constraint_id"].str.strip(), grp_frame["item_id"].str.strip(), strict=True)
    ):
        if item not in item_pos:
            raise DatasetError(f"unknown item {item!r} in {groups_path.name}", line=index + 2)
        W[constraint_ids.index(cid), item_pos[item]] = weights[index]

    contexts = tuple(Context(t=t, r=rel[step_pos[t]], W=W) for t in step_ids)
    stream = ContextStream(
        contexts=contexts,
        item_ids=tuple(item_ids),
        constraint_ids=tuple(constraint_ids),
        labels=tuple(str(label) for label in labels) if has_strata else None,
    )
    logger.info(f"Loaded {stream.T} steps, {stream.n} items, {stream.m} constraints from {contexts_path}")
    return stream


def write_csv(stream: ContextStream, contexts_path: str | Path, groups_path: str | Path) -> None:
    """Write ``stream`` in the canonical long format read by ``load_csv``.

    Every (step, item) pair is written; groups rows are written for nonzero
    weights only.
    """
    contexts_path, groups_path = Path(contexts_path), Path(groups_path)
    rows = {
        "t": np.repeat([ctx.t for ctx in stream.contexts], stream.n),
        "item_id": np.tile(np.array(stream.item_ids, dtype=object), stream.T),
        "relevance": stream.relevance_matrix().ravel(),
    }
    if stream.labels is not None:
        rows[STRATUM_COLUMN] = np.repeat(np.array(stream.labels, dtype=object), stream.n)
    W = stream.contexts[0].W
    if any(not np.array_equal(ctx.W, W) for ctx in stream.contexts):
        raise ValidationError("the CSV format needs the same association matrix at every step")
    group_rows = [
        (cid, item, float(W[i, j]))
        for i, cid in enumerate(stream.constraint_ids)
        for j, item in enumerate(stream.item_ids)
        if W[i, j] != 0
    ]

    contexts_path.parent.mkdir(parents=True, exist_ok=True)
    groups_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        pd.DataFrame(rows).to_csv(contexts_path, index=False, lineterminator="\n")
        pd.DataFrame(group_rows, columns=list(GROUP_COLUMNS)).to_csv(groups_path, index=False, lineterminator="\n")
    except OSError as e:
        raise DatasetError(f"cannot write dataset files: {e}", cause=e) from e
    logger.info(f"Wrote {stream.T} steps to {contexts_path} and {len(group_rows)} group rows to {groups_path}")
