"""Birkhoff-von Neumann decomposition and ranking sampling."""

from macro_ranking.bvn.decomposition import BvnDecomposition, decompose, sample

__all__ = ["BvnDecomposition", "decompose", "sample"]
