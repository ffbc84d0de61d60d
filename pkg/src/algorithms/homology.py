"""
Mod-2 Morse-Bott chain complex.
Assembles the complex from cascade counts, checks that the boundary squares
to zero and computes Betti numbers by GF(2) Gaussian elimination.
"""

import itertools
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from config import Config
from models.data_models import ChainComplexGF2, CritPoint, MorseBottProblem, SearchParams
from models.exceptions import DSquaredError, NotMorseBottError
from algorithms.cascades import count_mod2, index
from algorithms.geometry import check_morse_bott

logger = logging.getLogger(__name__)

Counter = Callable[[MorseBottProblem, CritPoint, CritPoint, SearchParams], int]


def gf2_row_echelon(M) -> Tuple[np.ndarray, List[int]]:
    """Row-reduce a binary matrix over GF(2); pivot is the lowest row index.

    Rows are packed eight columns to a byte, so a row operation is one XOR
    over the packed row. The reduced matrix is returned unpacked.
    """
    dense = np.asarray(M, dtype=np.uint8) % 2
    m, n = dense.shape
    P = np.packbits(dense, axis=1)
    pivot_cols: List[int] = []
    pivot_row = 0

    for col in range(n):
        byte, shift = col >> 3, 7 - (col & 7)
        hits = np.nonzero((P[pivot_row:, byte] >> shift) & 1)[0]
        if hits.size == 0:
            continue

        found = pivot_row + int(hits[0])
        if found != pivot_row:
            P[[pivot_row, found]] = P[[found, pivot_row]]

        below = pivot_row + 1 + np.nonzero((P[pivot_row + 1:, byte] >> shift) & 1)[0]
        P[below] ^= P[pivot_row]

        pivot_cols.append(col)
        pivot_row += 1
        if pivot_row == m:
            break

    return np.unpackbits(P, axis=1, count=n), pivot_cols


def gf2_rank(M) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    _, pivot_cols = gf2_row_echelon(M)
    return len(pivot_cols)


def boundary_from_graph(graph: nx.DiGraph, generators: Sequence[CritPoint],
                        top_degree: int) -> Dict[int, np.ndarray]:
    """Boundary matrices (rows: degree k-1, columns: degree k) from edge counts."""
    by_degree = {k: [c.label for c in generators if index(c) == k] for k in range(-1, top_degree + 2)}
    boundary = {}
    for k in range(1, top_degree + 1):
        B = np.zeros((len(by_degree[k - 1]), len(by_degree[k])), dtype=np.uint8)
        for j, source in enumerate(by_degree[k]):
            for i, target in enumerate(by_degree[k - 1]):
                if graph.has_edge(source, target):
                    B[i, j] = graph[source][target]['count'] % 2
        boundary[k] = B
    return boundary


def complex_from_counts(generators: Sequence[CritPoint], counts: Dict[Tuple[str, str], int],
                        top_degree: int) -> ChainComplexGF2:
    """Chain complex with boundary coefficients n(c, c') = counts[(c, c')]."""
    graph = nx.DiGraph()
    for c in generators:
        graph.add_node(c.label, index=index(c), submanifold=c.submanifold, f=c.f_value)
    for (source, target), count in counts.items():
        if count % 2:
            graph.add_edge(source, target, count=count)
    return ChainComplexGF2(
        generators=list(generators),
        boundary=boundary_from_graph(graph, generators, top_degree),
        graph=graph,
        top_degree=top_degree
    )


def build_complex(problem: MorseBottProblem, search: Optional[SearchParams] = None,
                  counter: Counter = count_mod2) -> ChainComplexGF2:
    """Morse-Bott complex of the quadruple; every index-difference-1 pair is counted."""
    search = search or SearchParams.from_config(Config)
    failing = [r for r in check_morse_bott(problem) if not r.passed]
    if failing:
        raise NotMorseBottError(
            f"{problem.name} is not Morse-Bott: " + "; ".join(f"{r.name}: {r.diagnostic}" for r in failing))

    generators = sorted(problem.crit_points(), key=lambda c: (index(c), c.label))
    counts = {}
    for c1, c2 in itertools.permutations(generators, 2):
        if index(c1) - index(c2) != 1:
            continue
        counts[(c1.label, c2.label)] = counter(problem, c1, c2, search)

    cx = complex_from_counts(generators, counts, problem.manifold.dim)
    logger.info(f"Complex of {problem.name}: {len(generators)} generators, "
                f"{cx.graph.number_of_edges()} boundary entries")
    return cx


def verify_d_squared(cx: ChainComplexGF2) -> bool:
    for k in range(2, cx.top_degree + 1):
        product = (cx.boundary_matrix(k - 1).astype(np.int64) @ cx.boundary_matrix(k).astype(np.int64)) % 2
        if product.any():
            logger.error(f"Boundary does not square to zero between degrees {k} and {k - 2}")
            return False
    return True


def betti(cx: ChainComplexGF2) -> List[int]:
    """Mod-2 Betti numbers b_0 .. b_top."""
    if not verify_d_squared(cx):
        raise DSquaredError("boundary matrices do not compose to zero")
    numbers = []
    for k in range(cx.top_degree + 1):
        n_k = len(cx.generators_in(k))
        rank_out = gf2_rank(cx.boundary_matrix(k)) if k >= 1 else 0
        rank_in = gf2_rank(cx.boundary_matrix(k + 1)) if k + 1 <= cx.top_degree else 0
        numbers.append(n_k - rank_out - rank_in)
    return numbers


def euler_characteristic(cx: ChainComplexGF2) -> int:
    return sum((-1) ** k * len(cx.generators_in(k)) for k in range(cx.top_degree + 1))


def compare_quadruples(problem_a: MorseBottProblem, problem_b: MorseBottProblem,
                       search: Optional[SearchParams] = None) -> bool:
    """Equal Betti sequences for two quadruples on the same manifold."""
    manifold_a, manifold_b = problem_a.manifold, problem_b.manifold
    if (manifold_a.name, manifold_a.dim, manifold_a.ambient_dim) != \
            (manifold_b.name, manifold_b.dim, manifold_b.ambient_dim):
        raise ValueError(f"{problem_a.name} and {problem_b.name} live on different manifolds")
    betti_a = betti(build_complex(problem_a, search))
    betti_b = betti(build_complex(problem_b, search))
    logger.info(f"Betti numbers {problem_a.name}: {betti_a}, {problem_b.name}: {betti_b}")
    return betti_a == betti_b


def complex_to_dict(cx: ChainComplexGF2) -> Dict:
    d_squared_ok = verify_d_squared(cx)
    boundary = sorted(
        [cx.graph.nodes[source]['index'], source, target]
        for source, target in cx.graph.edges
    )
    return {
        "degrees": cx.degrees(),
        "generators": [
            {"label": c.label, "submanifold": c.submanifold, "ind_f": c.ind_f,
             "ind_h": c.ind_h, "index": index(c), "f": round(c.f_value, 12)}
            for c in cx.generators
        ],
        "boundary": boundary,
        "betti": betti(cx) if d_squared_ok else None,
        "euler": euler_characteristic(cx),
        "d_squared_ok": d_squared_ok
    }
