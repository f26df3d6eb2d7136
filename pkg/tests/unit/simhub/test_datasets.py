"""Tests for context streams and their CSV files."""

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from macro_ranking.core.exceptions import DatasetError, ValidationError
from macro_ranking.forecast.strata import stream_labels
from macro_ranking.simhub.datasets import load_csv, write_csv


@pytest.fixture
def groups_csv(tmp_path):
    path = tmp_path / "groups.csv"
    path.write_text("constraint_id,item_id,weight\nfresh,b,1\nfresh,c,0.5\n")
    return path


def _contexts(tmp_path, body: str):
    path = tmp_path / "contexts.csv"
    path.write_text("t,item_id,relevance\n" + body)
    return path


def test_load_orders_items_by_first_appearance(tmp_path, groups_csv):
    """Items follow first appearance; missing pairs get relevance 0; steps are sorted."""
    contexts = _contexts(tmp_path, "2,b,0.5\n2,a,0.25\n1,c,1.5\n1,a,0.75\n")
    stream = load_csv(contexts, groups_csv)
    assert stream.item_ids == ("b", "a", "c")
    assert stream.constraint_ids == ("fresh",)
    assert stream.steps == [1, 2]
    assert_allclose(stream.relevance_matrix(), [[0.0, 0.75, 1.0], [0.5, 0.25, 0.0]])
    assert_allclose(stream[0].W, [[1.0, 0.0, 0.5]])


def test_missing_value_names_line(tmp_path, groups_csv):
    """An empty relevance is reported with its line number."""
    contexts = _contexts(tmp_path, "1,b,0.5\n1,a,\n")
    with pytest.raises(DatasetError) as info:
        load_csv(contexts, groups_csv)
    assert info.value.line == 3


def test_nan_relevance_names_line(tmp_path, groups_csv):
    """A literal NaN is not a finite number."""
    contexts = _contexts(tmp_path, "1,b,0.5\n1,a,0.1\n2,b,NaN\n")
    with pytest.raises(DatasetError) as info:
        load_csv(contexts, groups_csv)
    assert info.value.line == 4


def test_ragged_row(tmp_path, groups_csv):
    """A row with an extra field is a dataset error."""
    contexts = _contexts(tmp_path, "1,b,0.5\n1,a,0.1,9\n")
    with pytest.raises(DatasetError):
        load_csv(contexts, groups_csv)


def test_duplicate_row(tmp_path, groups_csv):
    """A (step, item) pair may appear once."""
    contexts = _contexts(tmp_path, "1,b,0.5\n1,b,0.1\n")
    with pytest.raises(DatasetError) as info:
        load_csv(contexts, groups_csv)
    assert info.value.line == 3


def test_unknown_group_item(tmp_path):
    """Group items must occur in the contexts file."""
    contexts = _contexts(tmp_path, "1,b,0.5\n")
    groups = tmp_path / "groups.csv"
    groups.write_text("constraint_id,item_id,weight\ng,z,1\n")
    with pytest.raises(DatasetError) as info:
        load_csv(contexts, groups)
    assert info.value.line == 2


def test_bad_header(tmp_path, groups_csv):
    """Unexpected columns are reported on line 1."""
    path = tmp_path / "contexts.csv"
    path.write_text("step,item_id,relevance\n1,a,0.5\n")
    with pytest.raises(DatasetError) as info:
        load_csv(path, groups_csv)
    assert info.value.line == 1


def test_missing_file(tmp_path, groups_csv):
    """A missing file is a dataset error."""
    with pytest.raises(DatasetError):
        load_csv(tmp_path / "nope.csv", groups_csv)


def test_strata_column(tmp_path, groups_csv):
    """Stratum labels are kept per step and must agree within a step."""
    path = tmp_path / "contexts.csv"
    path.write_text("t,item_id,relevance,stratum\n1,b,0.5,night\n1,c,0.5,night\n2,b,0.1,day\n")
    stream = load_csv(path, groups_csv)
    assert stream.labels == ("night", "day")

    path.write_text("t,item_id,relevance,stratum\n1,b,0.5,night\n1,c,0.5,day\n")
    with pytest.raises(DatasetError):
        load_csv(path, groups_csv)


def test_hourly_export_with_many_items(tmp_path):
    """A 217-item export with hourly strata loads with hour-of-day labels."""
    gen = np.random.default_rng(8)
    steps = np.arange(1, 49)
    items = [f"ch{j:03d}" for j in range(217)]
    contexts = pd.DataFrame(
        {
            "t": np.repeat(steps, len(items)),
            "item_id": np.tile(items, len(steps)),
            "relevance": gen.uniform(size=len(steps) * len(items)),
            "stratum": np.repeat([str(t % 24) for t in steps], len(items)),
        }
    )
    groups = pd.DataFrame(
        {"constraint_id": ["news"] * 20 + ["kids"] * 10, "item_id": items[:20] + items[100:110], "weight": 1.0}
    )
    contexts.to_csv(tmp_path / "contexts.csv", index=False)
    groups.to_csv(tmp_path / "groups.csv", index=False)

    stream = load_csv(tmp_path / "contexts.csv", tmp_path / "groups.csv")
    assert (stream.T, stream.n, stream.m) == (48, 217, 2)
    assert stream.labels == tuple(str(t % 24) for t in steps)
    assert stream_labels(stream, "stratum") == stream_labels(stream, "hour_of_day")
    assert stream[0].W.sum(axis=1).tolist() == [20.0, 10.0]
    assert_allclose(stream.relevance_matrix().ravel(), contexts["relevance"], rtol=1e-12)


def test_write_then_load_preserves_stream(tmp_path, short_synthetic):
    """Writing and reading the synthetic stream keeps its content."""
    stream, _ = short_synthetic
    write_csv(stream, tmp_path / "c.csv", tmp_path / "g.csv")
    loaded = load_csv(tmp_path / "c.csv", tmp_path / "g.csv")
    assert loaded.item_ids == stream.item_ids
    assert loaded.constraint_ids == stream.constraint_ids
    assert loaded.steps == stream.steps
    assert_allclose(loaded.relevance_matrix(), stream.relevance_matrix(), rtol=0, atol=1e-15)
    assert_allclose(loaded[0].W, stream[0].W)


def test_split_is_chronological(short_synthetic):
    """Train, dev and test are consecutive and cover the stream."""
    stream, _ = short_synthetic
    train, dev, test = stream.split((0.6, 0.2, 0.2))
    assert (train.T, dev.T, test.T) == (24, 8, 8)
    assert train.steps + dev.steps + test.steps == stream.steps
    with pytest.raises(ValidationError):
        stream.split((1.0, 0.0, 1.0))


def test_shuffled_reorders_contents(short_synthetic):
    """Shuffling keeps the steps and the multiset of contexts and is seeded."""
    stream, _ = short_synthetic
    shuffled = stream.shuffled(seed=5)
    assert shuffled.steps == stream.steps
    keys = sorted(ctx.content_key() for ctx in stream.contexts)
    assert sorted(ctx.content_key() for ctx in shuffled.contexts) == keys
    assert shuffled.checksum() != stream.checksum()
    assert stream.shuffled(seed=5).checksum() == shuffled.checksum()


def test_checksum_sensitive_to_content(toy_stream):
    """Changing one relevance changes the checksum."""
    other = toy_stream.subset(0, toy_stream.T)
    assert other.checksum() == toy_stream.checksum()
    assert toy_stream.subset(0, 3).checksum() != toy_stream.checksum()
    assert len(toy_stream) == 6
