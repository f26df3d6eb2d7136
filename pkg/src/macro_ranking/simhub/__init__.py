"""Datasets and the control loop.

Sweeps live in ``macro_ranking.simhub.sweep``; they depend on the forecast
package, which itself builds on the modules exported here.
"""

from macro_ranking.simhub.datasets import ContextStream, load_csv, write_csv
from macro_ranking.simhub.episode import EpisodeResult, run_episode
from macro_ranking.simhub.synthetic import SyntheticSpec, generate_synthetic, synthetic_intervention

__all__ = [
    "ContextStream",
    "EpisodeResult",
    "SyntheticSpec",
    "generate_synthetic",
    "load_csv",
    "run_episode",
    "synthetic_intervention",
    "write_csv",
]
