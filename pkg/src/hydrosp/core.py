"""Two-stage stochastic program containers and whole-problem operations.

A TwoStageProgram holds the first-stage LP/MBP data and a template that
turns a ScenarioSample into the second-stage block (q, T, W, h, bounds);
a FiniteProgram pins down a scenario list with probabilities.  All
internal solves are minimization; max-sense programs are negated at entry
and results reported back in the user's sense.
"""

from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
import csv

import numpy as np

from .lp import (LinearProgram, LpSolution, solve_lp, solve_mbp,
                 OPTIMAL, INFEASIBLE)
from .scenarios import ScenarioSample, PriceCurve, InflowVector
from .tolerances import FEASIBILITY_TOL, INTEGRALITY_TOL


@dataclass(frozen=True, eq=False)
class FirstStage:
    c: np.ndarray
    A: np.ndarray
    senses: tuple
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binaries: tuple = ()
    names: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=np.float64))
        n = len(self.c)
        A = np.asarray(self.A, dtype=np.float64).reshape(-1, n) if np.size(self.A) \
            else np.zeros((0, n))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64))
        object.__setattr__(self, "lb", np.asarray(self.lb, dtype=np.float64))
        object.__setattr__(self, "ub", np.asarray(self.ub, dtype=np.float64))
        object.__setattr__(self, "binaries", tuple(int(j) for j in self.binaries))

    @property
    def nvars(self):
        return len(self.c)


@dataclass(frozen=True, eq=False)
class SecondStage:
    """One scenario's recourse block: min/max q'y s.t. T x + W y (sense) h."""

    q: np.ndarray
    T: np.ndarray
    W: np.ndarray
    senses: tuple
    h: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=np.float64))
        n2 = len(self.q)
        m2 = len(np.asarray(self.h))
        object.__setattr__(self, "h", np.asarray(self.h, dtype=np.float64))
        object.__setattr__(self, "W",
                           np.asarray(self.W, dtype=np.float64).reshape(m2, n2))
        T = np.asarray(self.T, dtype=np.float64)
        if T.ndim != 2:
            T = T.reshape(m2, -1) if T.size else T.reshape(m2, 0)
        elif T.shape[0] != m2:
            raise ValueError(f"T has {T.shape[0]} rows, expected {m2}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "lb", np.asarray(self.lb, dtype=np.float64))
        object.__setattr__(self, "ub", np.asarray(self.ub, dtype=np.float64))

    @property
    def nvars(self):
        return len(self.q)

    @property
    def nrows(self):
        return len(self.h)


@dataclass(frozen=True, eq=False)
class TwoStageProgram:
    first_stage: FirstStage
    second_stage: object          # callable ScenarioSample -> SecondStage
    sense: str = "min"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")

    @property
    def sign(self):
        # internal canonical sense is minimization
        return 1.0 if self.sense == "min" else -1.0


@dataclass(frozen=True, eq=False)
class FiniteProgram:
    program: TwoStageProgram
    scenarios: list
    probabilities: np.ndarray = None

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("need at least one scenario")
        p = self.probabilities
        if p is None:
            given = [getattr(s, "probability", None) for s in self.scenarios]
            if all(v is not None for v in given):
                p = np.array(given, dtype=np.float64)
            else:
                n = len(self.scenarios)
                p = np.full(n, 1.0 / n)
        else:
            p = np.asarray(p, dtype=np.float64)
        if len(p) != len(self.scenarios):
            raise ValueError("probability count must match scenario count")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1")
        object.__setattr__(self, "probabilities", p)

    @property
    def n_scenarios(self):
        return len(self.scenarios)


def scenario_stages(fp):
    """Instantiate all second-stage blocks and check structural invariants."""
    n1 = fp.program.first_stage.nvars
    stages = []
    W0 = None
    for i, s in enumerate(fp.scenarios):
        st = fp.program.second_stage(s)
        if st.T.shape[1] != n1:
            raise ValueError(
                f"scenario {i}: T has {st.T.shape[1]} first-stage columns, "
                f"expected {n1}")
        if W0 is None:
            W0 = st.W
        elif st.W.shape != W0.shape or not np.array_equal(st.W, W0):
            raise ValueError(f"scenario {i}: recourse matrix W varies across "
                             "scenarios (fixed recourse required)")
        stages.append(st)
    return stages


def solve_stage(stage, x, sign, max_iter=None):
    """Solve one scenario subproblem at a fixed first stage (internal min)."""
    rhs = stage.h - stage.T @ x if stage.T.size else stage.h.copy()
    lp = LinearProgram(sign * stage.q, stage.W, stage.senses, rhs,
                       stage.lb, stage.ub)
    return solve_lp(lp, max_iter=max_iter)


def _stage_values(fp, stages, x, workers=None):
    sign = fp.program.sign

    def one(i):
        sol = solve_stage(stages[i], x, sign)
        if sol.status == INFEASIBLE:
            raise RuntimeError(
                f"scenario {i}: second stage infeasible at the given first "
                "stage (models are expected to have complete recourse)")
        if not sol.ok:
            raise RuntimeError(f"scenario {i}: subproblem solve failed "
                               f"({sol.status})")
        return sol

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(one, range(len(stages))))
    else:
        sols = [one(i) for i in range(len(stages))]
    return sols


@dataclass(frozen=True, eq=False)
class DeterministicEquivalent:
    lp: LinearProgram             # internal min sense
    binaries: tuple
    n_first: int
    y_offsets: tuple              # start column of each scenario block
    stages: list
    sign: float


def build_deterministic_equivalent(fp):
    """One monolithic LP/MBP over (x, y_1..y_N), in internal min sense."""
    fs = fp.program.first_stage
    stages = scenario_stages(fp)
    sign = fp.program.sign
    n1 = fs.nvars
    offs = []
    n = n1
    for st in stages:
        offs.append(n)
        n += st.nvars
    m = fs.A.shape[0] + sum(st.nrows for st in stages)

    c = np.zeros(n)
    c[:n1] = sign * fs.c
    lb = np.empty(n)
    ub = np.empty(n)
    lb[:n1] = fs.lb
    ub[:n1] = fs.ub
    A = np.zeros((m, n))
    b = np.empty(m)
    senses = []

    m1 = fs.A.shape[0]
    A[:m1, :n1] = fs.A
    b[:m1] = fs.b
    senses.extend(fs.senses)

    r = m1
    for st, off, prob in zip(stages, offs, fp.probabilities):
        k, nv = st.nrows, st.nvars
        c[off:off + nv] = sign * prob * st.q
        lb[off:off + nv] = st.lb
        ub[off:off + nv] = st.ub
        if k:
            A[r:r + k, :n1] = st.T
            A[r:r + k, off:off + nv] = st.W
            b[r:r + k] = st.h
            senses.extend(st.senses)
            r += k

    lp = LinearProgram(c, A, senses, b, lb, ub)
    return DeterministicEquivalent(lp, fs.binaries, n1, tuple(offs), stages, sign)


@dataclass(frozen=True, eq=False)
class DeterministicSolution:
    x: np.ndarray
    objective: float              # user sense
    ys: list
    solution: LpSolution


def solve_deterministic(fp, node_limit=100000):
    de = build_deterministic_equivalent(fp)
    if de.binaries:
        sol = solve_mbp(de.lp, de.binaries, node_limit=node_limit)
    else:
        sol = solve_lp(de.lp)
    if not sol.ok:
        raise RuntimeError(f"deterministic equivalent solve failed: {sol.status}")
    x = sol.x[:de.n_first].copy()
    ys = [sol.x[off:off + st.nvars].copy()
          for off, st in zip(de.y_offsets, de.stages)]
    return DeterministicSolution(x, de.sign * sol.objective, ys, sol)


def check_first_stage_feasible(fs, x, tol=FEASIBILITY_TOL):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (fs.nvars,):
        raise ValueError(f"first-stage vector has shape {x.shape}, "
                         f"expected ({fs.nvars},)")
    if np.any(x < fs.lb - tol) or np.any(x > fs.ub + tol):
        raise ValueError("first-stage decision violates variable bounds")
    if fs.A.shape[0]:
        res = fs.A @ x - fs.b
        for i, sense in enumerate(fs.senses):
            v = res[i]
            bad = (sense in ("=", "==") and abs(v) > tol) or \
                  (sense in ("<=", "<") and v > tol) or \
                  (sense in (">=", ">") and v < -tol)
            if bad:
                raise ValueError(f"first-stage row {i} violated by {v:.3e}")
    for j in fs.binaries:
        if abs(x[j] - round(x[j])) > INTEGRALITY_TOL:
            raise ValueError(f"first-stage variable {j} must be binary")


def scenario_values(fp, x, workers=None):
    """Per-scenario totals c'x + Q(x, xi_s) in the user's sense."""
    x = np.asarray(x, dtype=np.float64)
    fs = fp.program.first_stage
    check_first_stage_feasible(fs, x)
    stages = scenario_stages(fp)
    sols = _stage_values(fp, stages, x, workers=workers)
    sign = fp.program.sign
    cx = float(fs.c @ x)
    return np.array([cx + sign * s.objective for s in sols])


def evaluate_decision(fp, x, workers=None):
    """Expected objective of a fixed first-stage decision (user sense)."""
    vals = scenario_values(fp, x, workers=workers)
    return float(fp.probabilities @ vals)


def expected_scenario(scenarios, probabilities=None):
    """Probability-weighted component mean of the scenario payloads.

    Hydro samples average price and inflow component-wise; plain numeric
    payloads (scalars or arrays) average directly.
    """
    if not scenarios:
        raise ValueError("need at least one scenario")
    n = len(scenarios)
    if probabilities is None:
        given = [getattr(s, "probability", None) for s in scenarios]
        probabilities = (np.array(given, dtype=np.float64)
                         if all(v is not None for v in given)
                         else np.full(n, 1.0 / n))
    p = np.asarray(probabilities, dtype=np.float64)
    p = p / p.sum()
    first = scenarios[0]
    if hasattr(first, "price") and hasattr(first, "inflow"):
        prices = sum(w * s.price.values for w, s in zip(p, scenarios))
        inflows = sum(w * s.inflow.values for w, s in zip(p, scenarios))
        return ScenarioSample(PriceCurve(prices), InflowVector(inflows),
                              probability=1.0)
    try:
        arrs = [np.asarray(s, dtype=np.float64) for s in scenarios]
    except (TypeError, ValueError):
        raise TypeError(
            "scenarios are neither hydro samples nor numeric payloads; "
            "cannot form their mean") from None
    mean = sum(w * a for w, a in zip(p, arrs))
    return float(mean) if np.ndim(mean) == 0 else mean


def solve_expected_value_problem(fp, node_limit=100000):
    """First-stage optimizer of the single-scenario mean problem."""
    mean = expected_scenario(fp.scenarios, fp.probabilities)
    ev = FiniteProgram(fp.program, [mean], np.array([1.0]))
    return solve_deterministic(ev, node_limit=node_limit).x


# --- scenario CSV serialization ------------------------------------------

def write_scenarios(path, scenarios, probabilities=None, plant_ids=None):
    """Columns: scenario_id, period, price, one inflow column per plant,
    probability (filled on period-0 rows)."""
    if probabilities is None:
        probabilities = [s.probability if s.probability is not None else ""
                         for s in scenarios]
    first = scenarios[0]
    nplants = first.inflow.at(0).shape[0]
    if plant_ids is None:
        plant_ids = [f"p{i}" for i in range(nplants)]
    with open(path, "w", newline="") as fh:
        fh.write("# units: price Eur/MWh, inflow m3/s\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario_id", "period", "price"]
                   + [f"inflow_{p}" for p in plant_ids] + ["probability"])
        for sid, s in enumerate(scenarios):
            T = len(s.price)
            for t in range(T):
                prob = probabilities[sid] if t == 0 else ""
                w.writerow([sid, t, repr(float(s.price.values[t]))]
                           + [repr(float(v)) for v in s.inflow.at(t)]
                           + [repr(float(prob)) if prob != "" else ""])


def read_scenarios(path):
    """Inverse of write_scenarios; returns (scenarios, probabilities)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(r for r in fh if not r.startswith("#"))
        header = next(reader)
        inflow_cols = [i for i, h in enumerate(header) if h.startswith("inflow_")]
        for row in reader:
            rows.append(row)
    by_sid = {}
    probs = {}
    for row in rows:
        sid, t = int(row[0]), int(row[1])
        entry = by_sid.setdefault(sid, {})
        entry[t] = (float(row[2]), [float(row[i]) for i in inflow_cols])
        if t == 0 and row[-1] != "":
            probs[sid] = float(row[-1])
    scenarios = []
    probabilities = []
    for sid in sorted(by_sid):
        periods = by_sid[sid]
        T = len(periods)
        prices = np.array([periods[t][0] for t in range(T)])
        inflows = np.array([periods[t][1] for t in range(T)])
        prob = probs.get(sid)
        scenarios.append(ScenarioSample(PriceCurve(prices), InflowVector(inflows),
                                        probability=prob))
        probabilities.append(prob)
    if any(p is None for p in probabilities):
        n = len(scenarios)
        probabilities = [1.0 / n] * n
    return scenarios, np.array(probabilities, dtype=np.float64)
