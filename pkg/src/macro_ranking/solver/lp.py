"""Shared linear-programming plumbing for the Birkhoff polytope."""

from typing import Any

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.optimize import linprog

from macro_ranking.core.exceptions import SolverError
from macro_ranking.core.types import FloatArray

HIGHS_OPTIONS: dict[str, Any] = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def birkhoff_equalities(n: int, n_blocks: int, n_vars: int, offset: int = 0) -> tuple[sp.csr_matrix, FloatArray]:
    """Unit row and column sums for ``n_blocks`` consecutive n x n blocks.

    Block ``s`` occupies variables ``offset + s*n*n .. offset + (s+1)*n*n``
    in row-major (position, item) order.
    """
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    grid = np.arange(n * n).reshape(n, n)
    for s in range(n_blocks):
        base = offset + s * n * n
        row_base = s * 2 * n
        for k in range(n):
            rows.append(np.full(n, row_base + k))
            cols.append(base + grid[k, :])
        for j in range(n):
            rows.append(np.full(n, row_base + n + j))
            cols.append(base + grid[:, j])
    row_idx = np.concatenate(rows) if rows else np.empty(0, dtype=int)
    col_idx = np.concatenate(cols) if cols else np.empty(0, dtype=int)
    data = np.ones(row_idx.shape[0])
    a_eq = sp.csr_matrix((data, (row_idx, col_idx)), shape=(2 * n * n_blocks, n_vars))
    return a_eq, np.ones(2 * n * n_blocks)


def run_linprog(
    c: FloatArray,
    a_ub: sp.spmatrix | None,
    b_ub: FloatArray | None,
    a_eq: sp.spmatrix | None,
    b_eq: FloatArray | None,
    label: str,
) -> FloatArray:
    """Minimize ``c @ x`` over ``x >= 0`` with HiGHS, raising on any failure."""
    try:
        result = linprog(
            c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=(0, None),
            method="highs",
            options=HIGHS_OPTIONS,
        )
    except ValueError as e:
        raise SolverError(f"{label}: invalid LP ({e})", cause=e) from e
    if result.status != 0 or result.x is None:
        logger.warning(f"{label}: HiGHS returned status {result.status} ({result.message})")
        raise SolverError(f"{label}: {result.message}")
    return np.asarray(result.x, dtype=np.float64)
