"""Higher-order dependence engine.

Everything here derives from one sparse operator: the citation
adjacency row-normalized by outdegree. On a DAG that operator is
nilpotent, so the power series behind each quantity is a finite sum
with at most ``longest_path_length`` + 1 terms, and iteration stops on
an exactly zero increment rather than an epsilon test. The full n x n
dependence matrix is never materialized; only n x k blocks flow
through the iteration.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .citegraph import CitationGraph, Membership, longest_path_length

AUTO = "auto"


@dataclass(frozen=True, eq=False)
class NormalizedCitationOperator:
    """Sparse citation operator with rows normalized by outdegree.

    Row ``i`` carries 1/outdegree(i) at every cited neighbour; rows of
    sink publications are empty. ``order_bound`` is the longest path
    length in the graph, beyond which all operator powers vanish.
    """

    matrix: sparse.csr_matrix
    order_bound: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def build_operator(graph: CitationGraph) -> NormalizedCitationOperator:
    """Build the outdegree-normalized citation operator for a graph."""
    out = graph.outdegree
    inv = np.zeros(graph.n, dtype=np.float64)
    cited_any = out > 0
    inv[cited_any] = 1.0 / out[cited_any]
    data = np.repeat(inv, out)
    matrix = sparse.csr_matrix(
        (data, graph.indices.copy(), graph.indptr.copy()),
        shape=(graph.n, graph.n),
    )
    return NormalizedCitationOperator(
        matrix=matrix, order_bound=longest_path_length(graph)
    )


def _row_blocks(n: int, threads: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, n, threads + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def propagate(operator: NormalizedCitationOperator, matrix, threads: int = 1):
    """Apply the operator to an n x k matrix (sparse or dense).

    Output row ``i`` is the outdegree-weighted mean of the input rows
    of the publications that ``i`` cites; sink rows come out zero.
    Each output row is one sequential accumulation over the cited
    neighbours in index order, so results are bitwise identical for
    any worker count.
    """
    w = operator.matrix
    if matrix.shape[0] != w.shape[0]:
        raise ValueError(
            f"matrix has {matrix.shape[0]} rows, operator expects {w.shape[0]}"
        )
    if threads <= 1:
        out = w @ matrix
    else:
        blocks = _row_blocks(w.shape[0], threads)
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            parts = list(pool.map(lambda ab: w[ab[0] : ab[1], :] @ matrix, blocks))
        if sparse.issparse(matrix):
            out = sparse.vstack(parts, format="csr")
        else:
            out = np.vstack(parts)
    if sparse.issparse(out):
        out = out.tocsr()
        out.sort_indices()
    return out


@dataclass(frozen=True, eq=False)
class DependenceStack:
    """Operator powers applied to a start matrix, plus their partial sums.

    ``increments[i]`` holds the contribution of citation paths of
    length exactly ``i``; ``partial(i)`` the contribution of paths of
    length up to ``i``. ``complete`` is set when the iteration ran far
    enough that the next increment is exactly zero.
    """

    increments: tuple[sparse.csr_matrix, ...]
    order_count: int
    complete: bool

    def partial(self, i: int) -> np.ndarray:
        """Dense partial sum of increments 0..i."""
        if not 0 <= i <= self.order_count:
            raise ValueError(f"order {i} outside 0..{self.order_count}")
        acc = np.zeros(self.increments[0].shape, dtype=np.float64)
        for inc in self.increments[: i + 1]:
            coo = inc.tocoo()
            acc[coo.row, coo.col] += coo.data
        return acc


def dependence_stack(
    operator: NormalizedCitationOperator,
    membership,
    max_order=AUTO,
    threads: int = 1,
) -> DependenceStack:
    """Iterate the operator against the membership columns.

    ``max_order`` AUTO runs to the longest path length; a numeric value
    truncates earlier (order-limited analyses). Iteration always stops
    early on an exactly zero increment, which nilpotency guarantees to
    happen within ``order_bound`` + 1 steps.
    """
    start = membership.weights if isinstance(membership, Membership) else membership
    if start.shape[0] != operator.n:
        raise ValueError(
            f"membership has {start.shape[0]} rows, operator expects {operator.n}"
        )
    if max_order == AUTO:
        limit = operator.order_bound
    else:
        limit = int(max_order)
        if limit < 0:
            raise ValueError("max_order must be nonnegative")
    current = sparse.csr_matrix(start, dtype=np.float64)
    current.sort_indices()
    increments = [current]
    saw_zero = False
    for _ in range(limit):
        current = propagate(operator, current, threads=threads)
        if current.nnz == 0:
            saw_zero = True
            break
        increments.append(current)
    order_count = len(increments) - 1
    complete = saw_zero or order_count >= operator.order_bound
    return DependenceStack(
        increments=tuple(increments), order_count=order_count, complete=complete
    )


def total_dependence(stack: DependenceStack) -> np.ndarray:
    """Dense total dependence of each publication on each discipline."""
    if not stack.complete:
        raise ValueError(
            "stack was truncated; total dependence needs the complete iteration"
        )
    return stack.partial(stack.order_count)


def dependence_vector(
    operator: NormalizedCitationOperator, max_order=AUTO, threads: int = 1
) -> np.ndarray:
    """Total dependence of each publication on the whole network.

    Computed as the stack iteration with a single all-ones column. At
    full order it satisfies r = (operator) r + 1, which is PageRank
    with damping factor one and a unit exogenous vector.
    """
    ones = sparse.csr_matrix(np.ones((operator.n, 1), dtype=np.float64))
    stack = dependence_stack(operator, ones, max_order=max_order, threads=threads)
    return stack.partial(stack.order_count)[:, 0]


def source_dependence(operator: NormalizedCitationOperator, membership) -> np.ndarray:
    """Dense k x n dependence of each discipline on each publication.

    The transposed analogue of the stack iteration: start from the
    membership transpose and repeatedly right-multiply by the operator,
    summing until the increment vanishes.
    """
    q = membership.weights if isinstance(membership, Membership) else membership
    q = sparse.csr_matrix(q, dtype=np.float64)
    if q.shape[0] != operator.n:
        raise ValueError(
            f"membership has {q.shape[0]} rows, operator expects {operator.n}"
        )
    increment = q.T.tocsr()
    total = increment.toarray()
    w = operator.matrix
    for _ in range(operator.order_bound):
        increment = (increment @ w).tocsr()
        if increment.nnz == 0:
            break
        coo = increment.tocoo()
        total[coo.row, coo.col] += coo.data
    return total


@dataclass(frozen=True, eq=False)
class FlowDecomposition:
    """Discipline-to-discipline citation flow split by path length.

    ``partial_flows[i]`` aggregates paths of length up to ``i``;
    ``order_flows[i-1]`` is the flow carried by paths of length exactly
    ``i``; ``total`` is the last partial flow.
    """

    partial_flows: tuple[np.ndarray, ...]
    order_flows: tuple[np.ndarray, ...]
    total: np.ndarray

    @property
    def order_count(self) -> int:
        return len(self.order_flows)


def flow_decomposition(stack: DependenceStack, membership) -> FlowDecomposition:
    """Project a dependence stack onto discipline-by-discipline flows.

    Each order flow is the membership-weighted aggregation of one
    increment, so order flows are nonnegative by construction and the
    partial flows are their running sums.
    """
    q = membership.weights if isinstance(membership, Membership) else membership
    q = sparse.csr_matrix(q, dtype=np.float64)
    if q.shape[0] != stack.increments[0].shape[0]:
        raise ValueError("membership and stack come from different graphs")
    qt = q.T.tocsr()
    partials: list[np.ndarray] = []
    order_flows: list[np.ndarray] = []
    running: np.ndarray | None = None
    for i, inc in enumerate(stack.increments):
        block = (qt @ inc).toarray()
        if i == 0:
            running = block
        else:
            order_flows.append(block)
            running = running + block
        partials.append(running)
    return FlowDecomposition(
        partial_flows=tuple(partials),
        order_flows=tuple(order_flows),
        total=partials[-1],
    )
