"""One screening pass: MMLE association, leading variables and leading sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, correlations_with, variable_set
from .glm import GRAD_TOL, MAX_ITER, mmle_all

TIE_DECIMALS = 12


@dataclass
class ScreenReport:
    assoc: dict
    leaders: list
    leading_sets: list
    flags: list


def screen(ds: Dataset, candidates, selected, k0: int, r_thresh: float,
           grad_tol: float = GRAD_TOL, max_iter: int = MAX_ITER) -> ScreenReport:
    """Rank candidates by |MMLE| given ``selected`` and group them around leaders.

    The leading set of a leader holds every candidate whose absolute
    correlation with it is at least ``r_thresh``. A variable claimed by
    several leaders goes to the highest-ranked one; a leader that is itself
    absorbed that way gets an empty leading set.
    """
    cand = variable_set(candidates, ds.p)
    selected = variable_set(selected, ds.p)
    if not cand:
        raise ValueError("candidates must be nonempty")
    if k0 < 1:
        raise ValueError("k0 must be >= 1")
    if not 0 < r_thresh <= 1:
        raise ValueError("r_thresh must be in (0, 1]")
    if set(cand) & set(selected):
        raise ValueError("candidates overlap the selected set")

    cols = np.array(cand, dtype=int)
    coef, conv = mmle_all(ds, cols, selected, grad_tol, max_iter)
    mag = np.abs(coef)
    # ranks on |mmle| rounded to TIE_DECIMALS so values equal up to rounding in the
    # batched fits tie; the stable sort then keeps ascending index among ties
    order = np.argsort(-np.round(mag, TIE_DECIMALS), kind="stable")
    leaders = [int(cols[i]) for i in order[:k0]]

    claimed = np.zeros(cols.size, dtype=bool)
    sets = []
    for lead in leaders:
        if claimed[cols == lead][0]:
            sets.append(())
            continue
        r = correlations_with(ds, lead, cols)
        member = (np.abs(r) >= r_thresh) & ~claimed
        member[cols == lead] = True
        claimed |= member
        sets.append(tuple(int(j) for j in cols[member]))
    assoc = {int(j): float(m) for j, m in zip(cols, mag)}
    flags = [int(j) for j in cols[~conv]]
    return ScreenReport(assoc, leaders, sets, flags)
