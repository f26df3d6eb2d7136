"""Test fixtures and configuration."""

from collections.abc import Generator
from pathlib import Path
from typing import Any

import numpy as np
import pytest
from loguru import logger

from macro_ranking.core.types import Context, InterventionSpec, PositionWeights
from macro_ranking.simhub.datasets import ContextStream
from macro_ranking.simhub.synthetic import SyntheticSpec, generate_synthetic, synthetic_intervention


@pytest.fixture(scope="session")
def test_dir() -> Path:
    """Return the test directory path."""
    return Path(__file__).parent


@pytest.fixture(scope="session")
def project_root() -> Path:
    """Return the project root directory path."""
    return Path(__file__).parent.parent


@pytest.fixture(autouse=True)
def quiet_logger() -> Generator[None, None, None]:
    """Keep loguru at WARNING during tests so DEBUG step logs stay off."""
    logger.remove()
    logger.add(lambda _: None, level="WARNING")
    yield
    logger.remove()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator shared by randomized tests."""
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def synthetic_stream() -> ContextStream:
    """The default 8-item, 400-step synthetic stream."""
    return generate_synthetic()


@pytest.fixture(scope="session")
def short_synthetic() -> tuple[ContextStream, InterventionSpec]:
    """A 40-step synthetic stream with its default intervention at phi = 100."""
    spec = SyntheticSpec(horizon=40)
    return generate_synthetic(spec), synthetic_intervention(spec, phi=100.0)


@pytest.fixture
def toy_stream() -> ContextStream:
    """Three items, one constraint on item 2, relevance falling with the item index."""
    W = np.array([[0.0, 0.0, 1.0]])
    contexts = tuple(Context(t=t, r=np.array([0.9, 0.6, 0.3]), W=W) for t in range(1, 7))
    return ContextStream(contexts=contexts, item_ids=("a", "b", "c"), constraint_ids=("c_only",))


@pytest.fixture
def toy_spec() -> InterventionSpec:
    """Intervention matching ``toy_stream``: full-list DCG/RR weights, target 3."""
    return InterventionSpec(
        tau=np.array([3.0]),
        phi=np.array([10.0]),
        horizon_T=6,
        weights=PositionWeights.for_metrics(3),
    )


@pytest.fixture
def experiment_yaml(tmp_path: Path) -> Path:
    """Small synthetic experiment configuration for command tests."""
    path = tmp_path / "experiment.yaml"
    path.write_text(
        "seed: 3\n"
        "dataset:\n"
        "  source: synthetic\n"
        "  synthetic:\n"
        "    horizon: 24\n"
        "intervention:\n"
        "  phi: 100.0\n"
        "  phi_grid: [0.01, 1.0, 100.0]\n"
        "controllers:\n"
        "  - kind: unconstrained\n"
        "  - kind: stationary\n"
        "    gain: 1.0\n"
        "    progress_mode: expected\n"
        "  - kind: oracle\n"
        "    progress_mode: expected\n"
        "forecast:\n"
        "  method: oracle\n"
        "  n_offline: 2\n"
        "  n_online: 1\n"
    )
    return path


@pytest.fixture
def test_data() -> dict[str, Any]:
    """Provide a few random relevance and association draws.

    Returns:
        Dict[str, Any]: Relevance vector and association matrix for five items
    """
    gen = np.random.default_rng(7)
    return {"r": gen.uniform(size=5), "W": (gen.uniform(size=(2, 5)) < 0.5).astype(float)}
