"""Convex-cost rationalization of cyclically monotone choice data.

Forward direction: from a cyclically monotone dataset, build per-observation
potentials phi_i (an Afriat-style longest-path construction over the edge
weights u(i -> k) = <p^i, v^k - v^i>), extend them off the data as the
max-affine convex function

    f(v) = max_i [ phi_i + <g_i, v - v^i> ],      g_i = p^i,

and obtain the rationalizing cost as the convex conjugate of f.  For a
max-affine f the conjugate is the finite linear program

    C(p) = min { sum_i lam_i * c_i :  lam >= 0, sum lam_i = 1,
                 sum_i lam_i * g_i = p },         c_i = <g_i, v^i> - phi_i,

equal to +inf outside conv{g_i}.  Fenchel equality <v^i, p^i> = f(v^i) +
C(p^i) then certifies that every observation maximizes <v, p> - C(p).

Converse direction: closed-form and iterative solvers produce the choice
probabilities of a perturbed utility model, argmax_{p in simplex}
<v, p> - C(p), whose outputs are cyclically monotone by construction.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.special import xlogy

from .core import (
    TOL_CM,
    TOL_OPT,
    Dataset,
    SimplexPoint,
    ValueVector,
    comp_dot,
    exact_simplex_array,
)
from .errors import (
    CycloratError,
    EmptyDomainError,
    NoProgressError,
    NotCyclicallyMonotoneError,
)
from .lp import batch_support_values, enumerate_basic_values, solve_equality_lp
from .monotonicity import check_cyclic_monotonicity, edge_weights

#: Columns up to which the conjugate LP is solved by exhaustive support scan.
VERTEX_ENUM_MAX_N = 12
#: Feasibility slack used when deciding p in conv{g_i}.
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class PotentialFit:
    """Potentials and gradients of a convex function fitted to the data.

    ``potentials[i]`` is the fitted value at observation i+1's value vector;
    ``gradients[i]`` is that observation's probability vector.  The base
    observation (1-based ``base_index``) is pinned to potential zero, since
    the fitted function is only determined up to an additive constant.
    Subgradient consistency holds:

        potentials[j] >= potentials[i] + <gradients[i], v^j - v^i> - 1e-9.
    """

    base_index: int
    potentials: np.ndarray
    gradients: np.ndarray

    def __post_init__(self):
        pot = np.asarray(self.potentials, dtype=float).copy()
        grad = np.asarray(self.gradients, dtype=float).copy()
        pot.flags.writeable = False
        grad.flags.writeable = False
        object.__setattr__(self, "potentials", pot)
        object.__setattr__(self, "gradients", grad)

    @property
    def n(self) -> int:
        return self.potentials.size

    def to_dict(self) -> dict:
        return {
            "base_index": self.base_index,
            "potentials": self.potentials.tolist(),
            "gradients": self.gradients.tolist(),
        }


def compute_potentials(dataset: Dataset, tol: float = TOL_CM) -> PotentialFit:
    """Fit potentials by longest paths from the first observation.

    phi_j is the longest-path value from observation 1 to j in the digraph
    with edge weights u(i -> k) = <p^i, v^k - v^i>, computed as negated
    Bellman-Ford shortest paths under w = -u.  A negative w-cycle makes the
    longest paths unbounded; in that case ``NotCyclicallyMonotoneError`` is
    raised with a witness attached.
    """
    n = dataset.n
    if n == 1:
        return PotentialFit(1, np.zeros(1), dataset.probs_matrix)

    W = edge_weights(dataset)
    dist = np.full(n, np.inf)
    dist[0] = 0.0
    for _ in range(n - 1):
        cand = dist[:, None] + W
        best = np.min(cand, axis=0)
        improved = best < dist
        if not improved.any():
            break
        dist = np.where(improved, best, dist)
    else:
        cand = dist[:, None] + W
        if (np.min(cand, axis=0) < dist).any():
            verdict = check_cyclic_monotonicity(dataset, tol)
            if not verdict.is_pass:
                raise NotCyclicallyMonotoneError(
                    "dataset has a negative cycle; potentials are unbounded",
                    witness=verdict.witness,
                )
            # Residual relaxability is numerical dust; keep the current dist.

    phi = dist[0] - dist
    return PotentialFit(1, phi, dataset.probs_matrix)


def evaluate_extension(fit: PotentialFit, dataset: Dataset, v) -> float:
    """Max-affine extension of the fitted potentials at any value vector.

    Returns max_i [ phi_i + <g_i, v - v^i> ]; convex and piecewise affine,
    and interpolates the potentials at the observed value vectors.
    """
    vv = v.entries if isinstance(v, ValueVector) else np.asarray(v, dtype=float)
    V = dataset.values_matrix
    G = fit.gradients
    phi = fit.potentials
    return max(
        phi[i] + comp_dot(G[i], vv - V[i]) for i in range(fit.n)
    )


def _max_affine_data(fit: PotentialFit, dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Gradients G and affine offsets c_i = <g_i, v^i> - phi_i."""
    V = dataset.values_matrix
    G = fit.gradients
    c = np.array([comp_dot(G[i], V[i]) - fit.potentials[i] for i in range(fit.n)])
    return G, c


def cost_description(fit: PotentialFit, dataset: Dataset) -> dict:
    """Serializable description of the fitted conjugate cost.

    The cost is determined by the gradient vertices g_i and the affine
    offsets c_i = <g_i, v^i> - phi_i: C(p) is the lower convex envelope of
    the points (g_i, c_i) on conv{g_i} and +inf elsewhere.
    """
    G, c = _max_affine_data(fit, dataset)
    return {
        "kind": "max-affine conjugate",
        "vertices": G.tolist(),
        "offsets": c.tolist(),
    }


def _conjugate_lp_data(G: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, size = G.shape
    A = np.vstack([G.T, np.ones((1, n))])
    b = np.concatenate([q, [1.0]])
    return A, b


def _conjugate_single(G: np.ndarray, c: np.ndarray, q: np.ndarray, feas_tol: float) -> float:
    A, b = _conjugate_lp_data(G, q)
    if G.shape[0] <= VERTEX_ENUM_MAX_N:
        return enumerate_basic_values(c, A, b, feas_tol=feas_tol)
    res = solve_equality_lp(c, A, b, feas_tol=feas_tol)
    if res.status == "infeasible":
        return math.inf
    if res.status != "optimal":
        raise CycloratError(f"conjugate LP did not converge: {res.status}")
    return res.value


def conjugate_cost(
    fit: PotentialFit,
    dataset: Dataset,
    p,
    *,
    feas_tol: float = FEAS_TOL,
) -> float:
    """Convex conjugate of the max-affine extension, as a finite LP.

    Returns the minimum of sum_i lam_i (<g_i, v^i> - phi_i) over mixture
    weights lam >= 0, sum lam = 1, with sum_i lam_i g_i = p.  Outside
    conv{g_i} the conjugate is +inf, returned as ``math.inf`` (a domain
    signal, not an error).  Small instances are solved exactly by support
    enumeration; larger ones by a dense two-phase simplex.
    """
    q = p.entries if isinstance(p, SimplexPoint) else np.asarray(p, dtype=float)
    G, c = _max_affine_data(fit, dataset)
    return _conjugate_single(G, c, q, feas_tol)


def _conjugate_batch_hull(G: np.ndarray, c: np.ndarray, Q: np.ndarray) -> np.ndarray | None:
    """Evaluate the conjugate at many in-hull points via the lower hull.

    The conjugate restricted to conv{g_i} is the lower convex envelope of
    the points (g_i, c_i); each lower facet of their hull (in coordinates
    with the last probability dropped) is a supporting affine function and
    the envelope is their pointwise max.  Returns None when the hull cannot
    be built, so the caller can fall back to the LP route.
    """
    d = G.shape[1] - 1
    pts = np.hstack([G[:, :-1], c[:, None]])
    hull = None
    for opts in ("", "QJ"):
        try:
            hull = ConvexHull(pts, qhull_options=opts or None)
            break
        except (QhullError, ValueError):
            continue
    if hull is None:
        return None
    eq = hull.equations
    ny = eq[:, d]
    lower = ny < -1e-12
    if not lower.any():
        return None
    nx = eq[lower, :d]
    off = eq[lower, -1]
    planes = -(off[None, :] + Q[:, :-1] @ nx.T) / ny[lower][None, :]
    return planes.max(axis=1)


def _conjugate_many(
    G: np.ndarray, c: np.ndarray, Q: np.ndarray, feas_tol: float
) -> np.ndarray:
    """Conjugate values at a batch of feasible points.

    Routes to the support scan at small n; to the lower-hull evaluation for
    moderate n and few alternatives (cross-checked against the LP route on
    a leading subsample, falling back wholesale on any mismatch); and to
    per-query simplex solves otherwise.
    """
    n, size = G.shape
    if n <= VERTEX_ENUM_MAX_N:
        A = np.vstack([G.T, np.ones((1, n))])
        B = np.hstack([Q, np.ones((Q.shape[0], 1))])
        return batch_support_values(c, A, B, feas_tol=feas_tol)
    if size <= 8:
        vals = _conjugate_batch_hull(G, c, Q)
        if vals is not None:
            probe = min(8, Q.shape[0])
            ok = all(
                abs(vals[k] - _conjugate_single(G, c, Q[k], feas_tol)) <= 1e-9
                for k in range(probe)
            )
            if ok:
                return vals
    return np.array([_conjugate_single(G, c, q, feas_tol) for q in Q])


# ---------------------------------------------------------------------------
# Perturbed utility model solvers.


def softmax_probabilities(v) -> np.ndarray:
    """Softmax with a max-shift guard, renormalized exactly."""
    arr = v.entries if isinstance(v, ValueVector) else np.asarray(v, dtype=float)
    z = np.exp(arr - np.max(arr))
    return exact_simplex_array(z)


def simplex_projection(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-threshold)."""
    arr = v.entries if isinstance(v, ValueVector) else np.asarray(v, dtype=float)
    u = np.sort(arr)[::-1]
    cums = np.cumsum(u)
    j = np.arange(1, arr.size + 1)
    rho = int(np.max(np.flatnonzero(u - (cums - 1.0) / j > 0)))
    theta = (cums[rho] - 1.0) / (rho + 1.0)
    out = np.maximum(arr - theta, 0.0)
    return exact_simplex_array(out)


def pum_solve_closed(kind: str, v) -> SimplexPoint:
    """Closed-form perturbed-utility choice for the two strictly convex costs.

    ``negentropy`` (C(p) = sum p ln p) gives the softmax of v; ``quadratic``
    (C(p) = 0.5 * sum p^2) gives the Euclidean projection of v onto the
    simplex.  Both maximizers are unique by strict convexity.
    """
    if kind == "negentropy":
        return SimplexPoint(softmax_probabilities(v))
    if kind == "quadratic":
        return SimplexPoint(simplex_projection(v))
    raise ValueError(f"unknown cost kind {kind!r}; expected 'negentropy' or 'quadratic'")


class CostEvaluator(abc.ABC):
    """A convex cost on the simplex (or a subset of it)."""

    #: Whether ``grad`` is available and the cost is finite on the interior.
    smooth: bool = False

    @abc.abstractmethod
    def value(self, p: np.ndarray) -> float:
        """Cost at p; +inf outside the effective domain."""

    def grad(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no gradient")


class NegEntropyCost(CostEvaluator):
    """C(p) = sum_a p_a ln p_a (negative Shannon entropy)."""

    smooth = True

    def value(self, p: np.ndarray) -> float:
        return math.fsum(xlogy(p, p).tolist())

    def grad(self, p: np.ndarray) -> np.ndarray:
        return 1.0 + np.log(np.maximum(p, 1e-300))


class QuadraticCost(CostEvaluator):
    """C(p) = 0.5 * sum_a p_a^2."""

    smooth = True

    def value(self, p: np.ndarray) -> float:
        return 0.5 * math.fsum((p * p).tolist())

    def grad(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(p, dtype=float)


class DataDerivedCost(CostEvaluator):
    """Conjugate of a fitted max-affine extension; +inf outside conv{g_i}."""

    smooth = False

    def __init__(self, fit: PotentialFit, dataset: Dataset, *, feas_tol: float = FEAS_TOL):
        self.fit = fit
        self.dataset = dataset
        self.feas_tol = feas_tol
        self.vertices, self.offsets = _max_affine_data(fit, dataset)

    def value(self, p: np.ndarray) -> float:
        return _conjugate_single(self.vertices, self.offsets, np.asarray(p, float), self.feas_tol)


class SmoothedDataDerivedCost(DataDerivedCost):
    """Data-derived cost plus epsilon * sum p ln p, restoring strict convexity.

    The entropic term biases the maximizer; the induced suboptimality under
    the unsmoothed cost is at most epsilon * ln(number of alternatives).
    """

    def __init__(
        self,
        fit: PotentialFit,
        dataset: Dataset,
        epsilon: float,
        *,
        feas_tol: float = FEAS_TOL,
    ):
        if epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")
        super().__init__(fit, dataset, feas_tol=feas_tol)
        self.epsilon = epsilon

    def value(self, p: np.ndarray) -> float:
        base = super().value(p)
        if math.isinf(base):
            return base
        return base + self.epsilon * math.fsum(xlogy(p, p).tolist())


@dataclass(frozen=True)
class PumSolution:
    """Solver output: the point, its objective, and the certified gap.

    ``unique`` is False for piecewise-linear costs, whose argmax can be a
    face; the returned point still maximizes the objective.
    """

    probs: SimplexPoint
    objective: float
    gap: float
    unique: bool
    iterations: int


def _solve_smooth_mirror(
    cost: CostEvaluator, v: np.ndarray, tol: float, budget: int
) -> PumSolution:
    # Entropic mirror ascent on F(p) = <v, p> - C(p) with a backtracked step;
    # certified by the Frank-Wolfe gap max_a grad_a - <grad, p>.
    n = v.size
    p = np.full(n, 1.0 / n)
    if not math.isfinite(cost.value(p)):
        raise EmptyDomainError("cost is infinite at the simplex barycenter")

    def objective(q: np.ndarray) -> float:
        return comp_dot(v, q) - cost.value(q)

    f_p = objective(p)
    for it in range(1, budget + 1):
        g = v - cost.grad(p)
        gap = float(np.max(g)) - comp_dot(g, p)
        if gap <= tol:
            return PumSolution(SimplexPoint(p), f_p, gap, True, it)
        step = 1.0
        log_p = np.log(np.maximum(p, 1e-300))
        while True:
            z = log_p + step * g
            z -= np.max(z)
            cand = exact_simplex_array(np.exp(z))
            f_cand = objective(cand)
            if f_cand > f_p:
                break
            step *= 0.5
            if step < 1e-14:
                raise NoProgressError(
                    f"mirror ascent stalled with gap {gap:.3e} > {tol:.3e}"
                )
        p, f_p = cand, f_cand
    raise NoProgressError(f"gap above {tol:.3e} after {budget} iterations")


def _solve_data_derived(cost: DataDerivedCost, v: np.ndarray, tol: float) -> PumSolution:
    # The objective is piecewise linear over conv{g_i}; its maximum over the
    # polytope is attained at a vertex, found by direct enumeration.
    G, c = cost.vertices, cost.offsets
    scores = np.array([comp_dot(v, G[j]) - c[j] for j in range(G.shape[0])])
    j = int(np.argmax(scores))
    return PumSolution(SimplexPoint(G[j]), float(scores[j]), 0.0, False, 1)


def _solve_smoothed_data(
    cost: SmoothedDataDerivedCost, v: np.ndarray, tol: float, budget: int
) -> PumSolution:
    # Maximize J(lam) = <v, G'lam> - c'lam - eps * sum q ln q over the
    # mixture simplex with pairwise Frank-Wolfe; substituting the mixture
    # cost c'lam for C(q) is tight at the optimum because the optimal q can
    # take its cheapest representation.
    G, c, eps = cost.vertices, cost.offsets, cost.epsilon
    n = G.shape[0]
    lam = np.full(n, 1.0 / n)
    q = lam @ G

    def j_value(qv: np.ndarray, cost_lin: float) -> float:
        return comp_dot(v, qv) - cost_lin - eps * math.fsum(xlogy(qv, qv).tolist())

    cost_lin = comp_dot(c, lam)
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    for it in range(1, budget + 1):
        grad_q = v - eps * (1.0 + np.log(np.maximum(q, 1e-300)))
        grad_lam = G @ grad_q - c
        s = int(np.argmax(grad_lam))
        gap = float(grad_lam[s]) - comp_dot(grad_lam, lam)
        if gap <= tol:
            return PumSolution(
                SimplexPoint(exact_simplex_array(np.maximum(q, 0.0))),
                j_value(q, cost_lin),
                gap,
                True,
                it,
            )
        active = np.flatnonzero(lam > 1e-15)
        a = int(active[np.argmin(grad_lam[active])])
        if s == a:
            break
        gamma_max = float(lam[a])
        dq = G[s] - G[a]
        dcost = float(c[s] - c[a])

        # Golden-section the 1-D slice; J is concave along the segment.
        lo, hi = 0.0, gamma_max
        m1 = hi - (hi - lo) / phi
        m2 = lo + (hi - lo) / phi
        f1 = j_value(q + m1 * dq, cost_lin + m1 * dcost)
        f2 = j_value(q + m2 * dq, cost_lin + m2 * dcost)
        for _ in range(60):
            if hi - lo < 1e-14 * (1.0 + gamma_max):
                break
            if f1 < f2:
                lo, m1, f1 = m1, m2, f2
                m2 = lo + (hi - lo) / phi
                f2 = j_value(q + m2 * dq, cost_lin + m2 * dcost)
            else:
                hi, m2, f2 = m2, m1, f1
                m1 = hi - (hi - lo) / phi
                f1 = j_value(q + m1 * dq, cost_lin + m1 * dcost)
        gamma = 0.5 * (lo + hi)
        end = j_value(q + gamma_max * dq, cost_lin + gamma_max * dcost)
        if end > j_value(q + gamma * dq, cost_lin + gamma * dcost):
            gamma = gamma_max
        if gamma <= 0.0:
            break
        lam = lam.copy()
        lam[s] += gamma
        lam[a] -= gamma
        if lam[a] < 1e-17:
            lam[a] = 0.0
        cost_lin = cost_lin + gamma * dcost
        q = q + gamma * dq
        if it % 64 == 0:
            q = lam @ G
            cost_lin = comp_dot(c, lam)
    raise NoProgressError(f"pairwise Frank-Wolfe stalled above gap {tol:.3e}")


def pum_solve_general(
    cost: CostEvaluator,
    v,
    tol: float = TOL_OPT,
    *,
    budget: int = 100_000,
) -> PumSolution:
    """Maximize <v, p> - C(p) over the feasible probabilities.

    The returned solution carries a certified optimality gap at most ``tol``
    (a Frank-Wolfe gap, computable without knowing the optimum).  Strictly
    convex costs yield the unique maximizer to within the gap; data-derived
    piecewise-linear costs yield a maximizing vertex flagged as non-unique.
    Raises ``NoProgressError`` when the gap stalls above ``tol`` within the
    iteration budget and ``EmptyDomainError`` when the cost is nowhere
    finite on the feasible set.
    """
    arr = v.entries if isinstance(v, ValueVector) else np.asarray(v, dtype=float)
    if isinstance(cost, SmoothedDataDerivedCost):
        return _solve_smoothed_data(cost, arr, tol, budget)
    if isinstance(cost, DataDerivedCost):
        return _solve_data_derived(cost, arr, tol)
    if cost.smooth:
        return _solve_smooth_mirror(cost, arr, tol, budget)
    raise EmptyDomainError(f"no solver route for cost {type(cost).__name__}")


# ---------------------------------------------------------------------------
# Round-trip verification.


@dataclass(frozen=True)
class RationalizationReport:
    """Numerical certificate that the fitted cost rationalizes the data.

    For each observation i, ``fenchel_gaps[i]`` is |<v^i, p^i> - C(p^i) -
    f(v^i)| and ``optimality_gaps[i]`` is the largest advantage any sampled
    competitor q attains over p^i in <v^i, q> - C(q).  Both should sit at
    numerical noise level for cyclically monotone data.
    """

    fenchel_gaps: np.ndarray
    optimality_gaps: np.ndarray
    tolerance: float
    n_vertex_points: int
    n_mixture_points: int

    @property
    def max_fenchel_gap(self) -> float:
        return float(np.max(self.fenchel_gaps))

    @property
    def max_optimality_gap(self) -> float:
        return float(np.max(self.optimality_gaps))

    @property
    def passed(self) -> bool:
        return (
            self.max_fenchel_gap <= self.tolerance
            and self.max_optimality_gap <= self.tolerance
        )

    def to_dict(self) -> dict:
        return {
            "fenchel_gaps": self.fenchel_gaps.tolist(),
            "optimality_gaps": self.optimality_gaps.tolist(),
            "max_fenchel_gap": self.max_fenchel_gap,
            "max_optimality_gap": self.max_optimality_gap,
            "tolerance": self.tolerance,
            "n_vertex_points": self.n_vertex_points,
            "n_mixture_points": self.n_mixture_points,
            "passed": self.passed,
        }


def verify_rationalization(
    dataset: Dataset,
    fit: PotentialFit,
    tol: float = TOL_OPT,
    *,
    mixtures: int = 1000,
    rng: np.random.Generator | None = None,
    feas_tol: float = FEAS_TOL,
) -> RationalizationReport:
    """Check Fenchel equality and sampled optimality at every observation.

    The competitor pool contains every gradient vertex g_j plus ``mixtures``
    random convex combinations drawn from the supplied generator (seeded
    from 0 when omitted, so runs are reproducible).  All pool points lie in
    conv{g_j}, where the conjugate is finite by construction.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    G, c = _max_affine_data(fit, dataset)
    V = dataset.values_matrix
    n = dataset.n

    extension = np.array([evaluate_extension(fit, dataset, V[i]) for i in range(n)])
    if mixtures > 0:
        weights = rng.dirichlet(np.ones(n), size=mixtures)
        pool = np.vstack([G, weights @ G])
    else:
        pool = G
    pool_cost = _conjugate_many(G, c, pool, feas_tol)
    bad = ~np.isfinite(pool_cost)
    if bad.any():
        for k in np.flatnonzero(bad):
            pool_cost[k] = _conjugate_single(G, c, pool[k], feas_tol)
        if not np.all(np.isfinite(pool_cost)):
            raise CycloratError("conjugate reported infeasible at an in-hull point")

    cost_at_p = pool_cost[:n]
    own = np.array([comp_dot(V[i], G[i]) for i in range(n)]) - cost_at_p
    fenchel = np.abs(own - extension)
    competitor = V @ pool.T - pool_cost[None, :]
    opt_gaps = competitor.max(axis=1) - own
    return RationalizationReport(
        fenchel_gaps=fenchel,
        optimality_gaps=opt_gaps,
        tolerance=tol,
        n_vertex_points=n,
        n_mixture_points=pool.shape[0] - n,
    )
