"""Day-ahead bidding model: choose hourly and block order curves before
prices clear; dispatch, production, and imbalances follow per scenario.

Maximizes expected market revenue plus terminal water value, minus
imbalance penalties.  First stage: price-independent volumes x^I_t,
price-dependent volumes x^D_{i,t} (monotone in the level index), block
volumes x^B_{i,b}.  Second stage: cleared volumes, plant dispatch, river
flows, imbalance purchases/sales, and the water-value variables.
"""

from dataclasses import dataclass
import csv

import numpy as np

from ..hydro import rescale, Resolution, default_initial_volumes
from ..scenarios import block_price_levels, block_hours
from ..core import FirstStage, SecondStage, TwoStageProgram
from .common import (PenaltyConfig, RowSet, WaterLayout, add_mass_balance,
                     water_bounds)
from .dispatch import interp_weights, accepted_block_levels


@dataclass(frozen=True)
class DayAheadLayout:
    horizon: int          # T hours
    n_levels: int         # P price levels
    n_blocks: int         # |B|
    n_plants: int         # H
    n_groups: int         # water-value groups

    # first-stage columns
    def xi(self, t):
        return t

    def xd(self, i, t):
        return self.horizon + i * self.horizon + t

    def xb(self, i, b):
        return self.horizon * (1 + self.n_levels) + i * self.n_blocks + b

    @property
    def n_first(self):
        return self.horizon * (1 + self.n_levels) + self.n_levels * self.n_blocks

    # second-stage columns
    def y(self, t):
        return t

    def yb(self, b):
        return self.horizon + b

    def yplus(self, t):
        return self.horizon + self.n_blocks + t

    def yminus(self, t):
        return 2 * self.horizon + self.n_blocks + t

    def p(self, t):
        return 3 * self.horizon + self.n_blocks + t

    @property
    def water(self):
        return WaterLayout(self.n_plants, self.horizon,
                           base=4 * self.horizon + self.n_blocks)

    def w(self, g):
        return self.water.end + g

    @property
    def n_second(self):
        return self.water.end + self.n_groups


@dataclass(frozen=True)
class DayAheadStrategy:
    """A complete set of day-ahead orders plus the levels they refer to."""

    xi: np.ndarray        # (T,)
    xd: np.ndarray        # (P, T)
    xb: np.ndarray        # (P, B)
    level_values: np.ndarray   # (P, T) prices of the hourly levels
    blocks: tuple              # ((start, stop), ...)

    @property
    def horizon(self):
        return len(self.xi)

    def hourly_offered(self, t):
        """Worst-case volume committed in hour t (monotone curves make the
        top level the maximum hourly dispatch)."""
        blocks_at_t = [b for b, (s, e) in enumerate(self.blocks) if s <= t < e]
        return float(self.xi[t] + self.xd[-1, t]
                     + sum(self.xb[:, b].sum() for b in blocks_at_t))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("# units: volume MWh/h, price Eur/MWh\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["order_type", "period", "level", "price", "volume"])
            T, P = self.horizon, self.xd.shape[0]
            for t in range(T):
                w.writerow(["independent", t, "", "", repr(float(self.xi[t]))])
            for i in range(P):
                for t in range(T):
                    w.writerow(["dependent", t, i,
                                repr(float(self.level_values[i, t])),
                                repr(float(self.xd[i, t]))])
            for i in range(self.xb.shape[0]):
                for b, (start, stop) in enumerate(self.blocks):
                    w.writerow([f"block_{start}_{stop}", b, i, "",
                                repr(float(self.xb[i, b]))])

    @classmethod
    def from_csv(cls, path):
        xi = {}
        xd = {}
        xb = {}
        lv = {}
        blocks = {}
        with open(path, newline="") as fh:
            reader = csv.reader(r for r in fh if not r.startswith("#"))
            next(reader)
            for row in reader:
                kind, period, level, price, volume = row
                if kind == "independent":
                    xi[int(period)] = float(volume)
                elif kind == "dependent":
                    xd[(int(level), int(period))] = float(volume)
                    lv[(int(level), int(period))] = float(price)
                elif kind.startswith("block_"):
                    _, start, stop = kind.split("_")
                    b = int(period)
                    blocks[b] = (int(start), int(stop))
                    xb[(int(level), b)] = float(volume)
                else:
                    raise ValueError(f"unknown order type {kind!r}")
        T = len(xi)
        P = (max(k[0] for k in xd) + 1) if xd else 0
        B = (max(blocks) + 1) if blocks else 0
        return cls(
            xi=np.array([xi[t] for t in range(T)]),
            xd=np.array([[xd[(i, t)] for t in range(T)] for i in range(P)]),
            xb=(np.array([[xb[(i, b)] for b in range(B)] for i in range(P)])
                if B else np.zeros((P, 0))),
            level_values=np.array([[lv[(i, t)] for t in range(T)]
                                   for i in range(P)]),
            blocks=tuple(blocks[b] for b in range(B)),
        )


@dataclass(frozen=True)
class ProductionSchedule:
    """Second-stage witness for one scenario."""

    y: np.ndarray = None          # (T,) hourly dispatched volume
    yb: np.ndarray = None         # (B,) block dispatched volume
    yplus: np.ndarray = None      # (T,) deficit bought
    yminus: np.ndarray = None     # (T,) surplus sold
    production: np.ndarray = None # (T,)
    discharge: np.ndarray = None  # (H, 2, T)
    spill: np.ndarray = None      # (H, T)
    volume: np.ndarray = None     # (H, T)
    water_value: np.ndarray = None  # (G,)


def extract_schedule(layout, yvec):
    T, B, H, G = (layout.horizon, layout.n_blocks, layout.n_plants,
                  layout.n_groups)
    wl = layout.water
    return ProductionSchedule(
        y=np.array([yvec[layout.y(t)] for t in range(T)]),
        yb=np.array([yvec[layout.yb(b)] for b in range(B)]),
        yplus=np.array([yvec[layout.yplus(t)] for t in range(T)]),
        yminus=np.array([yvec[layout.yminus(t)] for t in range(T)]),
        production=np.array([yvec[layout.p(t)] for t in range(T)]),
        discharge=np.array([[[yvec[wl.q(h, s, t)] for t in range(T)]
                             for s in (0, 1)] for h in range(H)]),
        spill=np.array([[yvec[wl.s(h, t)] for t in range(T)] for h in range(H)]),
        volume=np.array([[yvec[wl.m(h, t)] for t in range(T)] for h in range(H)]),
        water_value=np.array([yvec[layout.w(g)] for g in range(G)]),
    )


@dataclass(frozen=True, eq=False)
class DayAheadModel:
    program: TwoStageProgram
    layout: DayAheadLayout
    network: object
    scaled: object
    levels: object               # PriceLevels
    blocks: tuple
    block_levels: np.ndarray     # (P, B)
    penalties: PenaltyConfig
    m0: np.ndarray
    water_value: object          # WaterValuePool

    def strategy_from_x(self, x):
        lay = self.layout
        T, P, B = lay.horizon, lay.n_levels, lay.n_blocks
        x = np.asarray(x, dtype=np.float64)
        return DayAheadStrategy(
            xi=np.array([x[lay.xi(t)] for t in range(T)]),
            xd=np.array([[x[lay.xd(i, t)] for t in range(T)] for i in range(P)]),
            xb=np.array([[x[lay.xb(i, b)] for b in range(B)] for i in range(P)]),
            level_values=self.levels.values.copy(),
            blocks=tuple(self.blocks),
        )

    def x_from_strategy(self, strategy):
        lay = self.layout
        T, P, B = lay.horizon, lay.n_levels, lay.n_blocks
        if strategy.xi.shape != (T,) or strategy.xd.shape != (P, T):
            raise ValueError(
                f"strategy dimensions {strategy.xd.shape} do not match the "
                f"model's {P} levels x {T} hours")
        if strategy.xb.shape != (P, B):
            raise ValueError(
                f"strategy has {strategy.xb.shape[1]} blocks, model has {B}")
        x = np.zeros(lay.n_first)
        for t in range(T):
            x[lay.xi(t)] = strategy.xi[t]
            for i in range(P):
                x[lay.xd(i, t)] = strategy.xd[i, t]
        for i in range(P):
            for b in range(B):
                x[lay.xb(i, b)] = strategy.xb[i, b]
        return x

    def schedule_from_y(self, yvec):
        return extract_schedule(self.layout, yvec)


def total_capacity(network):
    return float(sum(p.capacity_mw for p in network.plants))


def build_day_ahead(network, levels, blocks=None, water_value=None,
                    penalties=None, m0=None):
    """Assemble the day-ahead two-stage program (max sense).

    levels: PriceLevels over the trading horizon; water_value: a
    WaterValuePool (WaterValuePool.zero(...) for a model that assigns no
    value to stored water).
    """
    if water_value is None:
        raise ValueError(
            "day-ahead model needs a water-value pool; pass "
            "WaterValuePool.zero(plant_ids) to pin the water value to zero")
    if tuple(water_value.plant_ids) != tuple(network.plant_ids):
        raise ValueError("water-value pool plants do not match the river")
    if penalties is None:
        penalties = PenaltyConfig()
    T = levels.horizon
    if blocks is None:
        blocks = [(s, min(s + 4, T)) for s in range(0, T, 4)]
    blocks = tuple((int(a), int(b)) for a, b in blocks)
    scaled = rescale(network, Resolution(1))
    if m0 is None:
        m0 = default_initial_volumes(scaled)
    m0 = np.asarray(m0, dtype=np.float64)

    H = len(network.plants)
    P = levels.count
    B = len(blocks)
    groups = water_value.groups
    G = len(groups)
    lay = DayAheadLayout(T, P, B, H, G)
    block_levels = block_price_levels(levels, blocks)
    cap = 2.0 * total_capacity(network)

    # first stage: monotone bid curves and the 200% hourly cap
    n1 = lay.n_first
    rows_x = []
    senses_x = []
    rhs_x = []
    for t in range(T):
        for i in range(P - 1):
            row = np.zeros(n1)
            row[lay.xd(i, t)] = 1.0
            row[lay.xd(i + 1, t)] = -1.0
            rows_x.append(row)
            senses_x.append("<=")
            rhs_x.append(0.0)
    for t in range(T):
        row = np.zeros(n1)
        row[lay.xi(t)] = 1.0
        row[lay.xd(P - 1, t)] = 1.0
        for b, (start, stop) in enumerate(blocks):
            if start <= t < stop:
                for i in range(P):
                    row[lay.xb(i, b)] = 1.0
        rows_x.append(row)
        senses_x.append("<=")
        rhs_x.append(cap)
    fs = FirstStage(c=np.zeros(n1),
                    A=np.array(rows_x) if rows_x else np.zeros((0, n1)),
                    senses=tuple(senses_x), b=np.array(rhs_x),
                    lb=np.zeros(n1), ub=np.full(n1, cap))

    n2 = lay.n_second
    wl = lay.water
    group_index = {g: gi for gi, g in enumerate(groups)}

    def second_stage(sample):
        prices = sample.price.values
        if len(prices) < T:
            raise ValueError(f"scenario has {len(prices)} price periods, "
                             f"model needs {T}")
        rows = RowSet(n1, n2)
        # cleared hourly volume = independent + interpolated dependent
        for t in range(T):
            xc = {lay.xi(t): -1.0}
            for i, w in interp_weights(prices[t], levels.values[:, t]):
                xc[lay.xd(i, t)] = xc.get(lay.xd(i, t), 0.0) - w
            rows.add(xc, {lay.y(t): 1.0}, "=", 0.0)
        # cleared block volume = sum of accepted levels
        accepted = accepted_block_levels(prices, block_levels, blocks)
        for b in range(B):
            xc = {lay.xb(i, b): -1.0 for i in range(P) if accepted[i, b]}
            rows.add(xc, {lay.yb(b): 1.0}, "=", 0.0)
        # production from discharge segments
        for t in range(T):
            yc = {lay.p(t): 1.0}
            for h in range(H):
                yc[wl.q(h, 0, t)] = -scaled.mu1[h]
                yc[wl.q(h, 1, t)] = -scaled.mu2[h]
            rows.add({}, yc, "=", 0.0)
        # commitment - production = bought - sold
        for t in range(T):
            yc = {lay.y(t): 1.0, lay.p(t): -1.0,
                  lay.yplus(t): -1.0, lay.yminus(t): 1.0}
            for b, (start, stop) in enumerate(blocks):
                if start <= t < stop:
                    yc[lay.yb(b)] = 1.0
            rows.add({}, yc, "=", 0.0)
        add_mass_balance(rows, wl, scaled, m0, lambda t: sample.inflow.at(t))
        for c in water_value.cuts:
            yc = {lay.w(group_index[c.group]): 1.0}
            for h in range(H):
                if c.slopes[h]:
                    yc[wl.m(h, T - 1)] = -float(c.slopes[h])
            rows.add({}, yc, "<=", c.intercept)
        Tm, W, senses, hvec = rows.materialize()

        q = np.zeros(n2)
        for t in range(T):
            rho = prices[t]
            q[lay.y(t)] = rho
            q[lay.yminus(t)] = penalties.alpha(t) * rho
            q[lay.yplus(t)] = -penalties.beta(t) * rho
        for b, (start, stop) in enumerate(blocks):
            q[lay.yb(b)] = (stop - start) * prices[start:stop].mean()
        for g in groups:
            q[lay.w(group_index[g])] = water_value.weights[g]

        lb = np.zeros(n2)
        ub = np.full(n2, np.inf)
        water_bounds(wl, scaled, lb, ub)
        for g in range(G):
            lb[lay.w(g)] = -np.inf
        return SecondStage(q=q, T=Tm, W=W, senses=senses, h=hvec, lb=lb, ub=ub)

    program = TwoStageProgram(fs, second_stage, sense="max")
    return DayAheadModel(program=program, layout=lay, network=network,
                         scaled=scaled, levels=levels, blocks=blocks,
                         block_levels=block_levels, penalties=penalties,
                         m0=m0, water_value=water_value)
