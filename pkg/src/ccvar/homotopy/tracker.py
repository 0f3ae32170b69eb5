"""Batched predictor-corrector path tracking for parameter homotopies.

A *family* is any object with an integer attribute ``n_unknowns`` and a method

    evaluate(y, t, pa, dp) -> (F, J, Fdp)

returning, for a batch of points ``y`` of shape (P, m) and per-path times
``t`` of shape (P,), the residual at parameters ``pa + t * dp``, its Jacobian
in ``y`` (P, m, m) and the parameter derivative contracted with ``dp``
(P, m).  Families are linear in their parameters in every use here, so the
parameter point is never materialized per path.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..linalg import condition_estimate

OK, DIVERGED, MIN_STEP, MAX_STEPS = 0, 1, 2, 3
STATUS_NAMES = {OK: "ok", DIVERGED: "diverged", MIN_STEP: "min-step", MAX_STEPS: "max-steps"}


@dataclass
class TrackerConfig:
    """Step control and acceptance thresholds (all norms are max-norms)."""
    h_init: float = 0.02
    h_min: float = 1e-12
    h_max: float = 0.2
    newton_tol: float = 1e-9          # relative corrector tolerance during tracking
    max_newton: int = 3
    max_first_correction: float = 0.05  # relative size allowed for the first Newton update
    contraction_max: float = 0.5
    grow_after: int = 3
    grow: float = 2.0
    shrink: float = 0.5
    max_steps: int = 20000
    infinity_norm: float = 1e10
    polish_iters: int = 8
    polish_tol: float = 1e-13
    residual_tol: float = 1e-10
    singular_threshold: float = 1e8
    realness_tol: float = 1e-8
    dedup_tol: float = 1e-6
    near_end: float = 1e-3
    waypoint: bool = True
    threads: int = 1
    chunk_size: int = 256
    # monodromy loops can afford to drop a rare expensive path; it is found again later
    loop_max_steps: int = 400
    loop_infinity_norm: float = 1e8


@dataclass
class TrackResult:
    y: np.ndarray
    status: np.ndarray
    t: np.ndarray
    steps: np.ndarray
    extra: dict = field(default_factory=dict)


def _norm(a: np.ndarray) -> np.ndarray:
    return np.abs(a).max(axis=-1) if a.shape[-1] else np.zeros(a.shape[:-1])


def safe_solve(J: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched solve; singular members give NaN instead of aborting the batch."""
    vec = b.ndim == J.ndim - 1
    rhs = b[..., None] if vec else b
    try:
        x = np.linalg.solve(J, rhs)
    except np.linalg.LinAlgError:
        x = np.full(np.broadcast_shapes(J.shape[:-1], rhs.shape[:-2] + (J.shape[-1],))
                    + rhs.shape[-1:], np.nan, dtype=np.result_type(J, rhs))
        for k in range(J.shape[0]):
            try:
                x[k] = np.linalg.solve(J[k], rhs[k])
            except np.linalg.LinAlgError:
                pass
    return x[..., 0] if vec else x


def _track_segment(family, Y, pa, pb, cfg: TrackerConfig):
    P, m = Y.shape
    dp = pb - pa
    y = np.array(Y, dtype=complex)
    t = np.zeros(P)
    h = np.full(P, cfg.h_init)
    succ = np.zeros(P, dtype=int)
    steps = np.zeros(P, dtype=int)
    status = np.full(P, -1)
    if m == 0:
        return y, np.full(P, OK), np.ones(P), steps

    def velocity(yy, tt):
        F, J, Fdp = family.evaluate(yy, tt, pa, dp)
        return -safe_solve(J, Fdp)

    while True:
        act = np.flatnonzero(status < 0)
        if act.size == 0:
            break
        ya, ta = y[act], t[act]
        ha = np.minimum(h[act], 1.0 - ta)
        t1 = np.where(ha >= 1.0 - ta, 1.0, ta + ha)
        hh = (t1 - ta)[:, None]
        k1 = velocity(ya, ta)
        k2 = velocity(ya + 0.5 * hh * k1, ta + 0.5 * hh[:, 0])
        k3 = velocity(ya + 0.5 * hh * k2, ta + 0.5 * hh[:, 0])
        k4 = velocity(ya + hh * k3, t1)
        yc = ya + hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ok = np.all(np.isfinite(yc), axis=1)
        conv = np.zeros(act.size, dtype=bool)
        prev = None
        for it in range(cfg.max_newton):
            F, J, _ = family.evaluate(yc, t1, pa, dp)
            dy = safe_solve(J, F)
            ndy = _norm(dy)
            scale = 1 + _norm(yc)
            bad = ~np.isfinite(ndy)
            if it == 0:
                bad |= ndy > cfg.max_first_correction * scale
            elif prev is not None:
                bad |= (ndy > cfg.contraction_max * prev) & (ndy > cfg.newton_tol * scale) & ~conv
            ok &= ~bad
            upd = ok & ~conv
            yc[upd] = yc[upd] - dy[upd]
            conv |= upd & (ndy <= cfg.newton_tol * scale)
            prev = ndy
            if np.all(conv | ~ok):
                break
        ok &= conv
        steps[act] += 1
        acc = act[ok]
        rej = act[~ok]
        y[acc] = yc[ok]
        t[acc] = t1[ok]
        succ[acc] += 1
        grow = acc[succ[acc] >= cfg.grow_after]
        h[grow] = np.minimum(h[grow] * cfg.grow, cfg.h_max)
        succ[grow] = 0
        h[rej] *= cfg.shrink
        succ[rej] = 0
        status[acc[t[acc] >= 1.0]] = OK
        status[acc[_norm(y[acc]) > cfg.infinity_norm]] = DIVERGED
        status[rej[h[rej] < cfg.h_min]] = MIN_STEP
        still = np.flatnonzero(status < 0)
        status[still[steps[still] >= cfg.max_steps]] = MAX_STEPS
    return y, status, t, steps


def _track_chunk(family, Y, segments, cfg):
    P = Y.shape[0]
    y = np.array(Y, dtype=complex)
    status = np.full(P, OK)
    t_end = np.ones(P)
    steps = np.zeros(P, dtype=int)
    for si, (pa, pb) in enumerate(segments):
        live = np.flatnonzero(status == OK)
        if live.size == 0:
            break
        ys, st, ts, ns = _track_segment(family, y[live], pa, pb, cfg)
        y[live] = ys
        status[live] = st
        steps[live] += ns
        if si == len(segments) - 1:
            t_end[live] = ts
        else:
            t_end[live[st != OK]] = 0.0
    return y, status, t_end, steps


def track(family, Y0, segments, cfg: TrackerConfig | None = None) -> TrackResult:
    """Track every row of ``Y0`` through consecutive parameter segments.

    ``segments`` is a list of (p_start, p_end) pairs.  Paths that stop early
    keep their last point; ``status`` tells why.  ``t`` is the time reached
    on the final segment (0 if the path stopped on an earlier one).
    """
    cfg = cfg or TrackerConfig()
    Y0 = np.atleast_2d(np.asarray(Y0, dtype=complex))
    P = Y0.shape[0]
    if P == 0:
        return TrackResult(Y0.copy(), np.zeros(0, dtype=int), np.zeros(0), np.zeros(0, dtype=int))
    chunks = [np.arange(i, min(P, i + cfg.chunk_size)) for i in range(0, P, cfg.chunk_size)]
    if cfg.threads > 1 and len(chunks) == 1 and P > 1:
        size = -(-P // cfg.threads)
        chunks = [np.arange(i, min(P, i + size)) for i in range(0, P, size)]
    if cfg.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(lambda idx: _track_chunk(family, Y0[idx], segments, cfg), chunks))
    else:
        parts = [_track_chunk(family, Y0[idx], segments, cfg) for idx in chunks]
    y = np.concatenate([p[0] for p in parts])
    status = np.concatenate([p[1] for p in parts])
    t = np.concatenate([p[2] for p in parts])
    steps = np.concatenate([p[3] for p in parts])
    return TrackResult(y, status, t, steps)


def newton_polish(family, Y, p, cfg: TrackerConfig | None = None):
    """Newton at fixed parameters ``p``; returns (y, residual, cond, contraction, converged).

    ``residual`` is ||F|| / (1 + ||J|| ||y||) in max-norms; ``cond`` is the
    1-norm condition of J diag(1 + |y|) after row equilibration; ``contraction`` is
    the ratio of the last two meaningful Newton updates (NaN when Newton
    converged too fast to measure one).
    """
    cfg = cfg or TrackerConfig()
    y = np.array(np.atleast_2d(Y), dtype=complex)
    P, m = y.shape
    zeros = np.zeros(P)
    if m == 0 or P == 0:
        return y, np.zeros(P), np.ones(P), np.full(P, np.nan), np.ones(P, dtype=bool)
    dp = np.zeros_like(p)
    conv = np.zeros(P, dtype=bool)
    steps = []
    for _ in range(cfg.polish_iters):
        F, J, _ = family.evaluate(y, zeros, p, dp)
        dy = safe_solve(J, F)
        ndy = _norm(dy)
        scale = 1 + _norm(y)
        finite = np.isfinite(ndy)
        upd = finite & ~conv
        y[upd] -= dy[upd]
        steps.append(np.where(upd, ndy / scale, np.nan))
        conv |= finite & (ndy <= cfg.polish_tol * scale)
        if np.all(conv | ~finite):
            break
    F, J, _ = family.evaluate(y, zeros, p, dp)
    jn = np.abs(J).sum(axis=-1).max(axis=-1)
    residual = _norm(F) / (1 + jn * _norm(y))
    finite = np.all(np.isfinite(J), axis=(1, 2))
    cond = np.full(P, np.inf)
    if finite.any():
        # relative scaling: large chart coordinates alone should not read as singular
        Jf = J[finite] * (1 + np.abs(y[finite]))[:, None, :]
        Jf = Jf / np.maximum(np.abs(Jf).max(axis=-1, keepdims=True), 1e-300)
        cond[finite] = condition_estimate(Jf)
    # last ratio of Newton updates that stand above the rounding floor eps * cond
    noise = 1e3 * np.finfo(float).eps * np.maximum(1, np.nan_to_num(cond, posinf=1))
    contraction = np.full(P, np.nan)
    hist = np.array(steps).reshape(len(steps), P)
    for i in range(1, hist.shape[0]):
        meas = hist[i - 1] > noise
        with np.errstate(invalid="ignore"):
            contraction = np.where(meas & np.isfinite(hist[i]), hist[i] / hist[i - 1], contraction)
    return y, residual, cond, contraction, conv
