"""Monodromy solution discovery and parameter homotopy for linear-in-parameter families."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .solutions import NONSINGULAR, classify, dedup_indices, is_real
from .tracker import MAX_STEPS, OK, TrackerConfig, newton_polish, track

log = logging.getLogger(__name__)


@dataclass
class StoppingRule:
    """Stop after ``quiet_loops`` loops without a new solution, at ``target``
    solutions, or after ``max_loops`` loops (which counts as not stabilized)."""
    quiet_loops: int = 10
    target: int | None = None
    max_loops: int = 500


@dataclass
class MonodromyResult:
    Y: np.ndarray
    p0: object
    loops: int
    loops_since_new: int
    rule: str
    stabilized: bool
    history: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def count(self) -> int:
        return self.Y.shape[0]

    def evidence(self) -> dict:
        return {"loops": self.loops, "loops_since_new": self.loops_since_new,
                "rule": self.rule, "stabilized": self.stabilized,
                "history": list(self.history), "seconds": round(self.seconds, 3)}


def _register(family, Y, p0, known, cfg):
    """Polish candidate endpoints at p0 and return the nonsingular new ones."""
    if Y.shape[0] == 0:
        return Y
    y, res, cond, contr, conv = newton_polish(family, Y, p0, cfg)
    cls = classify(res, cond, contr, cfg, conv)
    y = y[cls == NONSINGULAR]
    if y.shape[0] == 0:
        return y
    new = dedup_indices(y, cfg.dedup_tol, known)
    return y[new]


def monodromy(family, p0, y0, sample: Callable[[np.random.Generator], object],
              stop: StoppingRule | None = None, cfg: TrackerConfig | None = None,
              rng: np.random.Generator | None = None, progress: Callable | None = None) -> MonodromyResult:
    """Grow a solution set at parameters ``p0`` by tracking around random triangle loops."""
    stop = stop or StoppingRule()
    cfg = cfg or TrackerConfig()
    rng = rng or np.random.default_rng()
    loop_cfg = replace(cfg, max_steps=min(cfg.max_steps, cfg.loop_max_steps),
                       infinity_norm=min(cfg.infinity_norm, cfg.loop_infinity_norm))
    start = time.perf_counter()
    known = _register(family, np.atleast_2d(np.asarray(y0, dtype=complex)), p0,
                      None, cfg)
    if known.shape[0] == 0:
        raise ValueError("the start point is not a nonsingular solution at p0")
    loops = quiet = 0
    history = [known.shape[0]]
    rule = "max_loops"
    while True:
        if stop.target is not None and known.shape[0] >= stop.target:
            rule = "target"
            break
        if quiet >= stop.quiet_loops:
            rule = "quiet"
            break
        if loops >= stop.max_loops:
            break
        p1, p2 = sample(rng), sample(rng)
        res = track(family, known, [(p0, p1), (p1, p2), (p2, p0)], loop_cfg)
        ends = res.y[res.status == OK]
        # a loop that dropped most paths at the step cap is no evidence of completeness
        capped = np.mean(res.status == MAX_STEPS) > 0.25 and loop_cfg.max_steps < cfg.max_steps
        if capped:
            loop_cfg = replace(loop_cfg, max_steps=min(2 * loop_cfg.max_steps, cfg.max_steps))
        new = _register(family, ends, p0, known, cfg)
        loops += 1
        if new.shape[0]:
            known = np.concatenate([known, new])
            quiet = 0
        elif not capped:
            quiet += 1
        history.append(known.shape[0])
        if progress:
            progress(loops, known.shape[0])
        log.info("monodromy loop %d: %d solutions", loops, known.shape[0])
    return MonodromyResult(known, p0, loops, quiet, rule, rule in ("quiet", "target"),
                           history, time.perf_counter() - start)


@dataclass
class Endpoints:
    """Classified endpoints of a parameter homotopy."""
    y: np.ndarray
    cls: np.ndarray
    residual: np.ndarray
    condition: np.ndarray
    real: np.ndarray
    status: np.ndarray
    t: np.ndarray


def parameter_homotopy(family, Y, p_start, p_target, cfg: TrackerConfig | None = None,
                       rng: np.random.Generator | None = None,
                       waypoint: Callable[[np.random.Generator], object] | None = None) -> Endpoints:
    """Track every start solution from ``p_start`` to ``p_target`` and classify endpoints.

    With ``cfg.waypoint`` the path bends through one random complex parameter
    point, which keeps real targets from sitting on the discriminant.
    """
    cfg = cfg or TrackerConfig()
    rng = rng or np.random.default_rng()
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    if cfg.waypoint and waypoint is not None:
        pw = waypoint(rng)
        segments = [(p_start, pw), (pw, p_target)]
    else:
        segments = [(p_start, p_target)]
    res = track(family, Y, segments, cfg)
    P = Y.shape[0]
    y = res.y.copy()
    cls = np.full(P, "failed", dtype=object)
    residual = np.full(P, np.inf)
    cond = np.full(P, np.inf)
    done = res.status == OK
    near = (~done) & (res.t >= 1 - cfg.near_end) & (np.abs(y).max(axis=1, initial=0) < cfg.infinity_norm)
    cand = np.flatnonzero(done | near)
    if cand.size:
        yp, r, c, k, conv = newton_polish(family, y[cand], p_target, cfg)
        cc = classify(r, c, k, cfg, conv)
        ok_pol = np.all(np.isfinite(yp), axis=1)
        y[cand[ok_pol]] = yp[ok_pol]
        residual[cand] = r
        cond[cand] = c
        cls[cand] = cc
        # a path that stalled just short of t = 1 is heading for a singular endpoint
        stalled = near[cand] & (cc == "failed")
        cls[cand[stalled]] = "singular"
    real = is_real(y, cfg.realness_tol) if P else np.zeros(0, dtype=bool)
    return Endpoints(y, cls, residual, cond, real, res.status, res.t)
