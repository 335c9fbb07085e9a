"""Market clearing rules for hourly and block orders.

Hourly price-dependent volumes interpolate linearly between the two price
levels bracketing the realized price (clamped to the level range); block
orders are accepted all-or-nothing per level when the level's block price
does not exceed the realized block mean price.
"""

import numpy as np


def interp_weights(rho, levels):
    """Weights w_i with y_dep = sum_i w_i * x_i for realized price rho.

    Returns a list of (index, weight) pairs (one entry when rho sits on a
    level or outside the range, two otherwise).
    """
    levels = np.asarray(levels, dtype=np.float64)
    if levels.ndim != 1 or len(levels) == 0:
        raise ValueError("levels must be a non-empty 1-d array")
    if np.any(np.diff(levels) < 0):
        raise ValueError("price levels must be sorted ascending")
    P = len(levels)
    if rho <= levels[0]:
        return [(0, 1.0)]
    if rho >= levels[-1]:
        return [(P - 1, 1.0)]
    i = int(np.searchsorted(levels, rho, side="right")) - 1
    if levels[i] == rho:
        return [(i, 1.0)]
    gap = levels[i + 1] - levels[i]
    w_hi = (rho - levels[i]) / gap
    return [(i, 1.0 - w_hi), (i + 1, w_hi)]


def hourly_dispatch(rho, levels, x_independent, x_dependent):
    """Dispatched hourly volume for one hour."""
    x_dependent = np.asarray(x_dependent, dtype=np.float64)
    y = float(x_independent)
    for i, w in interp_weights(rho, levels):
        y += w * x_dependent[i]
    return y


def block_dispatch(prices, block_levels, blocks, x_block):
    """Dispatched volume per block.

    block_levels has shape (P, B); level i of block b is accepted when
    block_levels[i, b] <= mean of prices over the block's hours.
    """
    prices = np.asarray(prices, dtype=np.float64)
    block_levels = np.asarray(block_levels, dtype=np.float64)
    x_block = np.asarray(x_block, dtype=np.float64)
    B = len(blocks)
    out = np.zeros(B)
    for b, (start, stop) in enumerate(blocks):
        rho_bar = prices[start:stop].mean()
        accepted = block_levels[:, b] <= rho_bar
        out[b] = float(x_block[accepted, b].sum())
    return out


def accepted_block_levels(prices, block_levels, blocks):
    """Boolean (P, B) mask of accepted block order levels."""
    prices = np.asarray(prices, dtype=np.float64)
    block_levels = np.asarray(block_levels, dtype=np.float64)
    mask = np.zeros(block_levels.shape, dtype=bool)
    for b, (start, stop) in enumerate(blocks):
        mask[:, b] = block_levels[:, b] <= prices[start:stop].mean()
    return mask
