"""
Truncated continuous-time Markov chain of the priority queue.

The chain is built directly from the transition rates of the physical queue,
solved for its stationary vector and reduced to the same quantities the
closed-form engine predicts. It is the brute-force oracle of the package.

States are ordered lexicographically by ``(phase, n1, n2)``. Arrivals that
would push a class count past its cap are dropped, so the truncation error is
measured by the probability mass on the boundary (``tail_mass``).
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order
from scipy.sparse.linalg import LinearOperator, gmres, spilu, spsolve

from .analytic import ServerOccupancy
from .conf import settings
from .exceptions import ConfigurationError, SolverError, TruncationError
from .model import ServerPhase, SystemState, require_stable, validate

logger = logging.getLogger(__name__)

METHOD_DIRECT = "direct"
METHOD_GMRES = "gmres"
METHOD_POWER = "power"


@dataclass(frozen=True)
class TruncationSpec:
    n1_max: int = 32
    n2_max: int = 32
    tail_eps: float = 1e-12
    auto_grow: bool = True
    #: Hard budget on the number of states; ``None`` reads the
    #: ``TRUNCATION_MAX_STATES`` setting.
    max_states: int = None

    def __post_init__(self):
        if self.n1_max < 2 or self.n2_max < 2:
            raise ConfigurationError(
                f"truncation caps must be at least 2 to contain the (1,1) states, "
                f"got n1_max={self.n1_max}, n2_max={self.n2_max}"
            )
        if not self.tail_eps > 0:
            raise ConfigurationError(f"tail_eps must be positive, got {self.tail_eps!r}")

    @property
    def state_budget(self):
        if self.max_states is None:
            return settings.TRUNCATION_MAX_STATES
        return self.max_states

    def state_count(self):
        """Number of valid states inside the caps (before pruning)."""
        return 1 + self.n1_max * (self.n2_max + 1) + (self.n1_max + 1) * self.n2_max


@dataclass
class TruncatedChain:
    params: object
    spec: TruncationSpec
    #: valid states, in dense id order
    states: list
    #: off-diagonal transition rates, ``rates[i, j]`` from state ``i`` to ``j``
    rates: sp.csr_matrix
    index: dict = field(repr=False)
    n1: np.ndarray = field(repr=False)
    n2: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.states)

    def rate(self, source, target):
        """Transition rate between two states; 0 when absent."""
        try:
            return float(self.rates[self.index[source], self.index[target]])
        except KeyError:
            return 0.0

    def outflow(self):
        return np.asarray(self.rates.sum(axis=1)).ravel()

    def generator(self):
        """The generator ``Q`` with ``-outflow`` on the diagonal."""
        return (self.rates - sp.diags(self.outflow())).tocsr()


@dataclass
class StationarySolution:
    chain: TruncatedChain
    probs: np.ndarray
    residual: float
    tail_mass: float
    method: str

    def prob(self, state):
        """Stationary probability of ``state`` (0 outside the truncation)."""
        i = self.chain.index.get(state)
        return 0.0 if i is None else float(self.probs[i])

    def pgf(self, z1, z2, phase=None):
        """
        Partial sum ``sum p(i, j, k) z1**i z2**j``, restricted to one server
        phase when ``phase`` is given.
        """
        chain = self.chain
        terms = self.probs * np.power(float(z1), chain.n1) * np.power(float(z2), chain.n2)
        if phase is not None:
            terms = terms[chain.phase == int(phase)]
        return float(terms.sum())


@dataclass(frozen=True)
class CtmcMetrics:
    p000: float
    occupancy: ServerOccupancy
    l1: float
    l2: float
    F02_at_1: float
    F02_prime_at_1: float
    tail_mass: float
    residual: float
    states: int
    n1_max: int
    n2_max: int
    method: str

    @property
    def l_total(self):
        return self.l1 + self.l2


@dataclass(frozen=True)
class MarginalDistributions:
    class1: np.ndarray
    class2: np.ndarray
    total: np.ndarray


@dataclass(frozen=True)
class AutoTruncation:
    spec: TruncationSpec
    tail_mass: float
    chain: TruncatedChain
    solution: StationarySolution


def _transitions(n1, n2, phase, params, spec):
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    if phase == ServerPhase.FREE:
        yield (1, 0, ServerPhase.SERVING_CLASS1), lambda1
        yield (0, 1, ServerPhase.SERVING_CLASS2), lambda2
        return

    if n1 < spec.n1_max:
        yield (n1 + 1, n2, phase), lambda1
    if n2 < spec.n2_max:
        yield (n1, n2 + 1, phase), lambda2

    if phase == ServerPhase.SERVING_CLASS1:
        if n1 >= 2:
            yield (n1 - 1, n2, ServerPhase.SERVING_CLASS1), mu
        elif n2 >= 1:
            yield (0, n2, ServerPhase.SERVING_CLASS2), mu
        else:
            yield (0, 0, ServerPhase.FREE), mu
    else:
        # a waiting class-1 customer always goes next; nobody is preempted
        if n1 >= 1:
            yield (n1, n2 - 1, ServerPhase.SERVING_CLASS1), mu
        elif n2 >= 2:
            yield (0, n2 - 1, ServerPhase.SERVING_CLASS2), mu
        else:
            yield (0, 0, ServerPhase.FREE), mu


def _enumerate_states(spec):
    states = [SystemState(0, 0, ServerPhase.FREE)]
    for n1 in range(1, spec.n1_max + 1):
        for n2 in range(0, spec.n2_max + 1):
            states.append(SystemState(n1, n2, ServerPhase.SERVING_CLASS1))
    for n1 in range(0, spec.n1_max + 1):
        for n2 in range(1, spec.n2_max + 1):
            states.append(SystemState(n1, n2, ServerPhase.SERVING_CLASS2))
    return states


def build_generator(params, spec):
    """
    Build the truncated chain for ``params`` inside the caps of ``spec``.

    Zero rates are not stored. When a class never arrives, the states that
    cannot be reached from the empty system are dropped so the chain stays
    irreducible.
    """
    validate(params)
    if not isinstance(spec, TruncationSpec):
        raise ConfigurationError(f"expected a TruncationSpec, got {spec!r}")

    states = _enumerate_states(spec)
    index = {s: i for i, s in enumerate(states)}
    rows, cols, data = [], [], []
    for i, s in enumerate(states):
        for target, rate in _transitions(s.n1, s.n2, s.phase, params, spec):
            if rate > 0.0:
                rows.append(i)
                cols.append(index[SystemState(*target)])
                data.append(rate)
    n = len(states)
    rates = sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    if params.lambda1 == 0.0 or params.lambda2 == 0.0:
        reachable = np.sort(breadth_first_order(rates, 0, directed=True, return_predecessors=False))
        if len(reachable) < n:
            logger.debug("pruning %d unreachable states", n - len(reachable))
            rates = rates[reachable][:, reachable].tocsr()
            states = [states[i] for i in reachable]
            index = {s: i for i, s in enumerate(states)}

    logger.debug("built chain with %d states and %d rates", len(states), rates.nnz)
    return TruncatedChain(
        params=params,
        spec=spec,
        states=states,
        rates=rates,
        index=index,
        n1=np.array([s.n1 for s in states], dtype=np.int64),
        n2=np.array([s.n2 for s in states], dtype=np.int64),
        phase=np.array([int(s.phase) for s in states], dtype=np.int64),
    )


def _solve_direct(chain):
    # pi Q = 0 with the last balance equation replaced by sum(pi) = 1
    n = len(chain)
    a = chain.generator().T.tocsr()
    a = sp.vstack([a[:-1], sp.csr_matrix(np.ones((1, n)))]).tocsc()
    b = np.zeros(n)
    b[-1] = 1.0
    return spsolve(a, b)


def _warm_start(previous, chain):
    """Stationary vector of a smaller truncation laid onto ``chain``, 0 elsewhere."""
    guess = np.zeros(len(chain))
    for state, prob in zip(previous.chain.states, previous.probs):
        i = chain.index.get(state)
        if i is not None:
            guess[i] = prob
    return guess


def _solve_power(chain, initial=None):
    params = chain.params
    uniform_rate = params.lambda1 + params.lambda2 + params.mu
    q_t = chain.generator().T.tocsr()
    p_t = (sp.identity(len(chain), format="csr") + q_t / uniform_rate).tocsr()
    tolerance = settings.SOLVER_TOLERANCE
    if initial is not None and initial.sum() > 0.0:
        pi = initial / initial.sum()
    else:
        pi = np.full(len(chain), 1.0 / len(chain))
    for step in range(settings.POWER_ITERATION_MAX_STEPS):
        pi = p_t @ pi
        if step % 100 == 0 and np.abs(q_t @ (pi / pi.sum())).max() <= tolerance:
            break
    else:
        raise SolverError(
            "power iteration did not converge",
            diagnostics={
                "method": METHOD_POWER,
                "states": len(chain),
                "steps": settings.POWER_ITERATION_MAX_STEPS,
            },
        )
    return pi


def _solve_gmres(chain, initial=None):
    # with the empty state pinned to 1 the other balance equations form a
    # nonsingular M-matrix system
    q_t = chain.generator().T.tocsc()
    a = q_t[1:, 1:].tocsc()
    b = -q_t[1:, [0]].toarray().ravel()
    x0 = initial[1:] / initial[0] if initial is not None and initial[0] > 0.0 else None
    diagnostics = {"method": METHOD_GMRES, "states": len(chain)}
    try:
        ilu = spilu(
            a,
            drop_tol=settings.ILU_DROP_TOLERANCE,
            fill_factor=settings.ILU_FILL_FACTOR,
        )
    except RuntimeError as e:
        raise SolverError(f"incomplete factorization failed: {e}", diagnostics) from e
    preconditioner = LinearOperator(a.shape, ilu.solve)
    x, info = gmres(
        a,
        b,
        x0=x0,
        M=preconditioner,
        rtol=settings.SOLVER_TOLERANCE / 10,
        atol=0.0,
        restart=50,
        maxiter=settings.KRYLOV_MAX_RESTARTS,
    )
    if info != 0:
        diagnostics["info"] = info
        raise SolverError("GMRES did not converge", diagnostics)
    return np.concatenate(([1.0], x))


def solve_stationary(chain, method=None, previous=None):
    """
    Solve ``pi Q = 0``, ``sum(pi) = 1`` for the truncated chain.

    Chains up to ``DIRECT_SOLVE_MAX_STATES`` states are factorized directly.
    Larger ones use ILU-preconditioned GMRES; ``"power"`` selects power
    iteration on the chain uniformized at ``lambda1 + lambda2 + mu``.

    :param previous: solution of a smaller truncation of the same parameters;
      the iterative methods start from it.
    """
    n = len(chain)
    if method is None:
        method = METHOD_DIRECT if n <= settings.DIRECT_SOLVE_MAX_STATES else METHOD_GMRES
    if method != METHOD_DIRECT:
        logger.warning("solving %d states iteratively (%s)", n, method)
    initial = None
    if previous is not None and method != METHOD_DIRECT:
        initial = _warm_start(previous, chain)

    if n == 1:
        probs = np.ones(1)
    elif method == METHOD_DIRECT:
        probs = _solve_direct(chain)
    elif method == METHOD_GMRES:
        probs = _solve_gmres(chain, initial)
    elif method == METHOD_POWER:
        probs = _solve_power(chain, initial)
    else:
        raise ValueError(f"unknown solver method {method!r}")

    diagnostics = {"method": method, "states": n}
    if not np.all(np.isfinite(probs)):
        raise SolverError("stationary solve produced non-finite values", diagnostics)
    # rounding leaves negatives of the order of machine epsilon
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if not total > 0.0:
        raise SolverError("stationary solve produced a zero vector", diagnostics)
    probs = probs / total

    residual = float(np.abs(chain.generator().T @ probs).max()) if n > 1 else 0.0
    if residual > settings.SOLVER_TOLERANCE:
        diagnostics["residual"] = f"{residual:.3g}"
        raise SolverError("balance residual above tolerance", diagnostics)

    boundary = (chain.n1 == chain.spec.n1_max) | (chain.n2 == chain.spec.n2_max)
    tail_mass = float(probs[boundary].sum())
    logger.debug("solved %d states by %s: residual=%.3g tail=%.3g", n, method, residual, tail_mass)
    return StationarySolution(
        chain=chain, probs=probs, residual=residual, tail_mass=tail_mass, method=method
    )


def balance_residuals(solution):
    """Per-state inflow minus outflow under the stationary vector."""
    return solution.chain.generator().T @ solution.probs


def _boundary_masses(solution):
    chain = solution.chain
    class1 = float(solution.probs[chain.n1 == chain.spec.n1_max].sum())
    class2 = float(solution.probs[chain.n2 == chain.spec.n2_max].sum())
    return class1, class2


def auto_truncate(params, spec=None):
    """
    Grow the caps until the boundary mass drops below ``spec.tail_eps``.

    Each round doubles the cap of every class whose boundary carries at least
    half of the allowed tail. Without ``auto_grow`` a single solve is done.
    Iterative solves start from the previous round's solution.

    :raises TruncationError: when the next truncation would exceed the state
      budget.
    """
    require_stable(params, "auto_truncate")
    spec = spec or TruncationSpec()
    solution = None
    while True:
        if spec.state_count() > spec.state_budget:
            last_tail = solution.tail_mass if solution is not None else None
            last = solution.chain.spec if solution is not None else spec
            raise TruncationError(
                f"state budget of {spec.state_budget} exceeded before tail_mass < "
                f"{spec.tail_eps:g}; raise the budget or the tail epsilon",
                tail_mass=last_tail,
                n1_max=last.n1_max,
                n2_max=last.n2_max,
            )

        chain = build_generator(params, spec)
        solution = solve_stationary(chain, previous=solution)
        if solution.tail_mass < spec.tail_eps:
            return AutoTruncation(spec, solution.tail_mass, chain, solution)
        if not spec.auto_grow:
            logger.warning(
                "tail_mass %.3g above tail_eps %.3g with auto_grow disabled",
                solution.tail_mass,
                spec.tail_eps,
            )
            return AutoTruncation(spec, solution.tail_mass, chain, solution)

        class1, class2 = _boundary_masses(solution)
        grow1 = class1 >= spec.tail_eps / 2
        grow2 = class2 >= spec.tail_eps / 2
        if not (grow1 or grow2):
            grow1 = grow2 = True
        spec = replace(
            spec,
            n1_max=spec.n1_max * 2 if grow1 else spec.n1_max,
            n2_max=spec.n2_max * 2 if grow2 else spec.n2_max,
        )
        logger.debug(
            "tail_mass %.3g: growing caps to %dx%d", solution.tail_mass, spec.n1_max, spec.n2_max
        )


def metrics(solution):
    chain, probs = solution.chain, solution.probs
    class2_idle1 = (chain.phase == int(ServerPhase.SERVING_CLASS2)) & (chain.n1 == 0)
    return CtmcMetrics(
        p000=solution.prob(SystemState(0, 0, ServerPhase.FREE)),
        occupancy=ServerOccupancy(
            p_class1=float(probs[chain.phase == int(ServerPhase.SERVING_CLASS1)].sum()),
            p_class2=float(probs[chain.phase == int(ServerPhase.SERVING_CLASS2)].sum()),
            p_free=float(probs[chain.phase == int(ServerPhase.FREE)].sum()),
        ),
        l1=float(probs @ chain.n1),
        l2=float(probs @ chain.n2),
        F02_at_1=float(probs[class2_idle1].sum()),
        F02_prime_at_1=float(probs[class2_idle1] @ chain.n2[class2_idle1]),
        tail_mass=solution.tail_mass,
        residual=solution.residual,
        states=len(chain),
        n1_max=chain.spec.n1_max,
        n2_max=chain.spec.n2_max,
        method=solution.method,
    )


def marginal_distributions(solution):
    """
    Distributions of ``N1``, ``N2`` and ``N1 + N2``; index ``n`` holds the
    probability of count ``n``.
    """
    chain, probs = solution.chain, solution.probs
    total = chain.n1 + chain.n2
    return MarginalDistributions(
        class1=np.bincount(chain.n1, weights=probs, minlength=chain.spec.n1_max + 1),
        class2=np.bincount(chain.n2, weights=probs, minlength=chain.spec.n2_max + 1),
        total=np.bincount(total, weights=probs, minlength=chain.spec.n1_max + chain.spec.n2_max + 1),
    )


def solve(params, spec=None):
    """Convenience: auto-truncate, solve and return :func:`metrics`."""
    return metrics(auto_truncate(params, spec).solution)
