"""Sparse epsilon-kernel approximation of a convex hull.

Points are added greedily: each round picks the input point farthest from
the convex hull of the current selection. Distances to the hull come from a
Gilbert / Frank-Wolfe iteration (closest point on the segment towards the
extreme vertex), augmented with pairwise steps that move weight away from the
worst active vertex so that points inside the hull certify in few iterations.

Greedy rounds are lazy: hull distances only shrink as the selection grows,
so a previous round's value is an upper bound and only the top candidates
need to be recomputed.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator
from .exceptions import InvalidConfigError

MAX_INNER_ITERS = 20_000
CHUNK = 32_768
REFRESH_EVERY = 64
COARSE_ITERS = 256
LEVEL_ITERS = 256
GREEDY_SLACK = 0.1
MAX_CANDIDATES = 20_000
RESOLUTION = 0.25


@dataclass(frozen=True)
class HullSelection:
    """Greedy hull selection.

    Attributes
    ----------
    indices : ndarray of int
        Row indices into the input point array, in selection order.
    points : ndarray of shape (len(indices), d)
    residuals : ndarray
        Max hull distance over the input after each greedy round (the
        distance of the point added in the next round, or the final residual).
    epsilon : float
    tolerance : float
        Absolute stopping distance ``epsilon * diam``.
    pairs : ndarray of shape (len(indices), 2) or None
        ``(observation, dimension)`` for pooled derivative rows.
    """

    indices: np.ndarray
    points: np.ndarray
    residuals: np.ndarray
    epsilon: float
    tolerance: float
    pairs: np.ndarray = None
    n_seeds: int = 0


def estimate_diameter(points):
    """Max pairwise distance among the 2d axis-extreme points.

    Within a factor ``sqrt(d)`` of the true diameter.
    """
    P = np.asarray(points, dtype=np.float64)
    if P.shape[0] < 2:
        return 0.0
    ext = np.unique(np.concatenate([P.argmin(axis=0), P.argmax(axis=0)]))
    E = P[ext]
    diff = E[:, None, :] - E[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))


def _distance_chunk(Q, S, c, SS, tol, max_iter, floor=0.0):
    """Upper/lower bounds on dist(q, conv(S)) for each row of ``Q``.

    ``S`` and ``Q`` are already centred by ``c``; ``SS`` is the Gram matrix of
    the centred ``S``. Returns ``(ub, lb, lam)`` with ``lam`` the convex
    weights of the witness points. Iteration for a row also stops once its
    upper bound falls below ``floor``.
    """
    m, s = Q.shape[0], S.shape[0]
    diagS = np.diag(SS)
    QS = Q @ S.T
    qq = np.einsum("ij,ij->i", Q, Q)
    rows = np.arange(m)
    d2 = qq[:, None] - 2.0 * QS + diagS[None, :]
    k0 = np.argmin(d2, axis=1)
    lam = np.zeros((m, s))
    lam[rows, k0] = 1.0
    ub = np.sqrt(np.maximum(d2[rows, k0], 0.0))
    lb = np.zeros(m)
    if s == 1:
        return ub, ub.copy(), lam
    stop = max(tol, floor)
    idx = np.flatnonzero(ub >= stop)
    # working copies for the rows still iterating; compacted as rows finish
    L = lam[idx]
    Pw = SS[k0[idx]]
    QSw = QS[idx]
    qqw = qq[idx]
    lbw = np.zeros(idx.size)
    it = 0
    while idx.size and it < max_iter:
        it += 1
        if it % REFRESH_EVERY == 0:
            Pw = L @ SS
        r = np.arange(idx.size)
        tt = np.einsum("ij,ij->i", L, Pw)
        qt = np.einsum("ij,ij->i", L, QSw)
        v2 = np.maximum(qqw - 2.0 * qt + tt, 0.0)
        v = np.sqrt(v2)
        cv = QSw - Pw
        f = np.argmax(cv, axis=1)
        cf = cv[r, f]
        gap = cf - (qt - tt)
        with np.errstate(divide="ignore", invalid="ignore"):
            lbw = np.maximum(lbw, np.where(v > 0, (v2 - gap) / v, 0.0))
            # Gilbert step towards vertex f
            ef2 = diagS[f] - 2.0 * Pw[r, f] + tt
            g_fw = np.where(ef2 > 0, np.clip(gap / ef2, 0.0, 1.0), 0.0)
            # pairwise step: weight from the worst active vertex to f
            am = np.argmin(np.where(L > 0, cv, np.inf), axis=1)
            pw = cf - cv[r, am]
            ed2 = diagS[f] - 2.0 * SS[f, am] + diagS[am]
            g_pw = np.where(ed2 > 0, np.clip(pw / ed2, 0.0, L[r, am]), 0.0)
        dec_fw = 2.0 * g_fw * gap - g_fw**2 * ef2
        dec_pw = 2.0 * g_pw * pw - g_pw**2 * ed2
        done = (v < stop) | (v - lbw <= tol) | (np.maximum(dec_fw, dec_pw) <= 0.0)
        ub[idx] = v
        lb[idx] = lbw
        use_pw = dec_pw > dec_fw
        gf = np.where(done | use_pw, 0.0, g_fw)
        gp = np.where(done | ~use_pw, 0.0, g_pw)
        SSf = SS[f]
        L *= (1.0 - gf)[:, None]
        L[r, f] += gf + gp
        Pw *= (1.0 - gf)[:, None]
        Pw += (gf + gp)[:, None] * SSf
        hit = np.flatnonzero(gp)
        if hit.size:
            L[hit, am[hit]] = np.maximum(L[hit, am[hit]] - gp[hit], 0.0)
            Pw[hit] -= gp[hit, None] * SS[am[hit]]
        n_done = int(np.count_nonzero(done))
        if n_done and 4 * n_done >= idx.size:
            lam[idx[done]] = L[done]
            keep = ~done
            idx, L, Pw, QSw, qqw, lbw = idx[keep], L[keep], Pw[keep], QSw[keep], qqw[keep], lbw[keep]
    if idx.size:
        lam[idx] = L
    return ub, np.minimum(lb, ub), lam


def batch_hull_distance(Q, S, tol, max_iter=MAX_INNER_ITERS, floor=0.0):
    """Hull distances of many query points against one selection.

    Returns ``(ub, lb, witness)``: ``ub`` is the exact distance from each
    query to its witness point in ``conv(S)``, ``lb`` a certified lower bound
    on the true distance. Rows whose bound drops below ``floor`` are not
    refined further.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    c = S.mean(axis=0)
    Sc = S - c
    SS = Sc @ Sc.T
    ubs, lbs, wits = [], [], []
    for start in range(0, Q.shape[0], CHUNK):
        Qc = Q[start : start + CHUNK] - c
        _, lb, lam = _distance_chunk(Qc, Sc, c, SS, tol, max_iter, floor)
        wit = lam @ S
        diff = Q[start : start + CHUNK] - wit
        ubs.append(np.sqrt(np.einsum("ij,ij->i", diff, diff)))
        lbs.append(np.minimum(lb, ubs[-1]))
        wits.append(wit)
    return np.concatenate(ubs), np.concatenate(lbs), np.concatenate(wits)


def _iteration_budget(epsilon):
    return int(min(math.ceil(1.0 / epsilon**2), MAX_INNER_ITERS))


def hull_distance(q, S, epsilon, diam=None):
    """Approximate distance from ``q`` to ``conv(S)``.

    The returned distance exceeds the exact one by at most
    ``epsilon * diam`` (``diam`` defaults to the diameter of ``S`` and ``q``).

    Returns
    -------
    distance : float
    witness : ndarray
        Point of ``conv(S)`` realising ``distance``.
    """
    q = np.asarray(q, dtype=np.float64).ravel()
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    if S.shape[0] == 0:
        raise InvalidConfigError("hull_distance needs a nonempty point set")
    if diam is None:
        allp = np.vstack([S, q])
        diff = allp[:, None, :] - allp[None, :, :]
        diam = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
    tol = epsilon * diam
    ub, _, wit = batch_hull_distance(q[None, :], S, tol, _iteration_budget(epsilon))
    return float(ub[0]), wit[0]


def _line_distance(P, a, b):
    d = b - a
    dd = d @ d
    X = P - a
    if dd == 0:
        return np.sqrt(np.einsum("ij,ij->i", X, X))
    proj = (X @ d) / dd
    R = X - proj[:, None] * d[None, :]
    return np.sqrt(np.maximum(np.einsum("ij,ij->i", R, R), 0.0))


def _argmax_first(x):
    return int(np.argmax(x))


def _seed_points(P, rng):
    """Three initial vertices found from a random probe point.

    The probe itself is not selected: the farthest point from any point is
    a hull vertex, and so is the farthest point from the line through two
    vertices.
    """
    m = P.shape[0]
    probe = int(rng.integers(m))
    i1 = _argmax_first(np.sum((P - P[probe]) ** 2, axis=1))
    i2 = _argmax_first(np.sum((P - P[i1]) ** 2, axis=1))
    seeds = [i1]
    if i2 != i1 and np.any(P[i2] != P[i1]):
        seeds.append(i2)
        ld = _line_distance(P, P[i1], P[i2])
        i3 = _argmax_first(ld)
        if ld[i3] > 0:
            seeds.append(i3)
    return seeds


def _top_order(ub, live, size):
    """Indices of ``live`` with the ``size`` largest bounds, sorted by (-ub, index)."""
    if live.size > size:
        part = np.argpartition(-ub[live], size - 1)[:size]
        cand = live[part]
    else:
        cand = live
    return cand[np.lexsort((cand, -ub[cand]))]


def _segment_update(P, W, ub, rows, vertex):
    """Tighten bounds after ``vertex`` joins the selection.

    Each witness moves to the closest point of the segment between itself
    and the new vertex, which stays inside the enlarged hull. Returns the
    mask of rows whose witness moved; for the others the new vertex does not
    violate the optimality condition ``<q - w, v - w> <= 0``, so a certified
    distance stays certified.
    """
    moved = np.zeros(rows.size, dtype=bool)
    for start in range(0, rows.size, CHUNK):
        r = rows[start : start + CHUNK]
        Wr = W[r]
        e = vertex - Wr
        v = P[r] - Wr
        ee = np.einsum("ij,ij->i", e, e)
        ve = np.einsum("ij,ij->i", v, e)
        hit = (ve > 0) & (ee > 0)
        moved[start : start + r.size] = hit
        if not hit.any():
            continue
        g = np.clip(ve[hit] / ee[hit], 0.0, 1.0)
        rh = r[hit]
        Wh = Wr[hit] + g[:, None] * e[hit]
        diff = P[rh] - Wh
        W[rh] = Wh
        ub[rh] = np.minimum(ub[rh], np.sqrt(np.einsum("ij,ij->i", diff, diff)))
    return moved


def min_norm_point(q, S, rtol=1e-12, max_major=1000):
    """Exact nearest point of ``conv(S)`` to ``q`` by Wolfe's active-set method.

    Returns ``(distance, witness)``. Finite and cheap for small ``S``; used
    to settle the few leading candidates of each greedy round.
    """
    X = np.atleast_2d(S) - q
    G = X @ X.T
    diag = np.diag(G)
    scale = float(np.max(diag))
    C = [int(np.argmin(diag))]
    lam = np.ones(1)
    for _ in range(max_major):
        x = lam @ X[C]
        gx = X @ x
        j = int(np.argmin(gx))
        if x @ x - gx[j] <= rtol * scale or j in C:
            break
        C.append(j)
        lam = np.append(lam, 0.0)
        while True:
            m = len(C)
            K = np.ones((m + 1, m + 1))
            K[:m, :m] = G[np.ix_(C, C)]
            K[m, m] = 0.0
            rhs = np.zeros(m + 1)
            rhs[m] = 1.0
            try:
                alpha = np.linalg.solve(K, rhs)[:m]
            except np.linalg.LinAlgError:
                alpha = np.linalg.lstsq(K, rhs, rcond=None)[0][:m]
            if np.all(alpha > 1e-15):
                lam = alpha
                break
            # move towards the affine minimiser until a weight hits zero
            neg = alpha <= 1e-15
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(neg, lam / (lam - alpha), np.inf)
            lam = lam + min(1.0, float(np.min(ratio))) * (alpha - lam)
            keep = lam > 1e-15
            C = [c for c, k in zip(C, keep) if k]
            lam = lam[keep]
    lam = lam / lam.sum()
    witness = lam @ np.atleast_2d(S)[C]
    return float(np.linalg.norm(q - witness)), witness


STALE, EXACT, DOMINATED, COARSE = 0, 1, 2, 3


def _lazy_argmax(P, S, ub, W, state, live, tol, max_iter, slack=0.0):
    """Farthest live row of ``P`` from conv(S), refreshing stale bounds lazily.

    ``ub`` holds upper bounds on the current hull distances and ``state``
    records how good each bound is: ``STALE`` (from an earlier selection),
    ``COARSE`` (refreshed with a capped iteration count), ``EXACT``
    (converged to ``tol``) or ``DOMINATED`` (refinement stopped once the
    bound fell below the running best plus ``tol``). Stale candidates are
    refreshed coarsely in growing batches; only the leading coarse ones are
    refined to convergence. The returned distance ``best`` satisfies
    ``max(best + tol, best / (1 - slack)) >= `` every other distance; ties go
    to the lowest index.
    """
    best, top = -1.0, -1
    size = 256
    coarse_iter = min(max_iter, COARSE_ITERS)

    def threshold():
        return max(best + tol, best / (1.0 - slack)) if best >= 0 else 0.0

    def settle(rows, new, wit, done):
        nonlocal best, top
        floor = threshold()
        better = new < ub[rows]
        ub[rows[better]] = new[better]
        W[rows[better]] = wit[better]
        dominated = ub[rows] < floor
        state[rows] = np.where(done, EXACT, np.where(dominated, DOMINATED, COARSE))
        cert = rows[state[rows] == EXACT]
        if cert.size:
            i = cert[np.lexsort((cert, -ub[cert]))[0]]
            if ub[i] > best or (ub[i] == best and i < top):
                best, top = float(ub[i]), int(i)

    def coarse(rows):
        floor = threshold()
        new, lb, wit = batch_hull_distance(P[rows], S, tol, coarse_iter, floor)
        settle(rows, new, wit, ((new - lb <= tol) & (new >= floor)) | (new < tol))

    def settle_exact(rows):
        out = [min_norm_point(P[i], S) for i in rows]
        new = np.array([o[0] for o in out])
        wit = np.array([o[1] for o in out])
        settle(rows, new, wit, np.ones(rows.size, dtype=bool))

    batch = 32
    while True:
        order = _top_order(ub, live, size)
        st = state[order]
        done = order[st == EXACT]
        if done.size:
            i = done[0]
            if ub[i] > best or (ub[i] == best and i < top):
                best, top = float(ub[i]), int(i)
        open_ = order[(st == STALE) | (st == COARSE)]
        if open_.size == 0:
            if order.size == live.size:
                return best, top
            if best >= 0 and threshold() >= ub[order[-1]]:
                return best, top
            size *= 4
            continue
        if best >= 0 and threshold() >= ub[open_[0]]:
            return best, top
        if state[open_[0]] == COARSE:
            lead = open_[:3]
            settle_exact(lead[state[lead] == COARSE])
            continue
        stale = open_[state[open_] == STALE][:batch]
        coarse(stale)
        batch = min(batch * 2, 4096)


def _representatives(P, cell):
    """Lowest-index row of every occupied grid cell of side ``cell``."""
    keys = np.floor((P - P.min(axis=0)) / cell).astype(np.int64)
    bits = [int(b).bit_length() for b in keys.max(axis=0)]
    if sum(bits) <= 63:
        packed = np.zeros(keys.shape[0], dtype=np.int64)
        for col, nb in zip(keys.T, bits):
            packed = (packed << nb) | col
        _, first = np.unique(packed, return_index=True)
        return np.sort(first)
    order = np.lexsort(keys.T[::-1])
    ks = keys[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = np.any(ks[1:] != ks[:-1], axis=1)
    # lexsort is stable, so each run starts at its lowest original index
    return np.sort(order[first])


def _greedy(P, budget, epsilon, rng, groups=None, slack=0.0):
    """Greedy farthest-point selection, coarse-to-fine on large inputs.

    Inputs above ``MAX_CANDIDATES`` rows are reduced to one representative
    per grid cell, so every row lies within ``delta`` of a candidate. The
    grid is refined whenever ``delta`` exceeds ``RESOLUTION`` times the
    current farthest distance, as long as the finer grid keeps at most
    ``MAX_CANDIDATES`` representatives; it is dropped altogether once it
    would be finer than ``tol / 2``.
    """
    m, dim = P.shape
    diam = estimate_diameter(P)
    tol = epsilon * diam
    max_iter = _iteration_budget(epsilon)
    selected = []
    seen_groups = set()

    def count():
        return len(seen_groups) if groups is not None else len(selected)

    def add(i):
        selected.append(i)
        if groups is not None:
            seen_groups.add(int(groups[i]))

    for i in _seed_points(P, rng):
        if count() >= budget:
            break
        add(i)
    n_seeds = len(selected)
    residuals = []
    if count() >= budget or m <= len(selected):
        return selected, np.asarray(residuals), tol, n_seeds
    is_sel = np.zeros(m, dtype=bool)
    is_sel[selected] = True

    def candidates(delta):
        if delta <= tol / 2:
            return np.arange(m), 0.0
        return _representatives(P, delta / np.sqrt(dim)), delta

    R, delta = candidates(diam / 16) if m > MAX_CANDIDATES else (np.arange(m), 0.0)
    frozen = False
    best = 0.0
    while True:
        R = R[~is_sel[R]]
        Q = P[R]
        S = P[selected]
        iters = max_iter if len(selected) <= dim + 1 else min(max_iter, LEVEL_ITERS)
        # rows below the last farthest distance need no precise value yet
        floor = 0.5 * best
        ub, lb, W = batch_hull_distance(Q, S, tol, iters, floor)
        done = (((ub - lb <= tol) | (iters >= max_iter)) & (ub >= floor)) | (ub < tol)
        state = np.where(done, EXACT, COARSE).astype(np.int8)
        live = np.flatnonzero(ub >= tol)
        finer = None
        while True:
            if live.size == 0:
                residuals.append(float(np.max(ub, initial=0.0)))
                break
            best, top = _lazy_argmax(Q, S, ub, W, state, live, tol, max_iter, slack)
            if delta > RESOLUTION * best and not frozen:
                R_new, d_new = candidates(RESOLUTION * best / 2)
                if R_new.size <= MAX_CANDIDATES:
                    finer = (R_new, d_new)
                    break
                frozen = True
            residuals.append(best)
            if best < tol or count() >= budget:
                break
            add(int(R[top]))
            is_sel[R[top]] = True
            S = P[selected]
            ub[top] = 0.0
            live = live[live != top]
            moved = _segment_update(Q, W, ub, live, S[-1])
            state[state != EXACT] = STALE
            state[live[moved]] = STALE
            live = live[ub[live] >= tol]
        if finer is None:
            break
        R, delta = finer
    return selected, np.asarray(residuals), tol, n_seeds


def select_hull_points(points, budget, epsilon, seed=None, slack=0.0):
    """Greedy sparse approximation of the convex hull of ``points``.

    Parameters
    ----------
    points : array-like of shape (m, d)
    budget : int
        Maximum number of selected points (seeds included).
    epsilon : float in (0, 1)
        Relative tolerance; selection stops once every point is within
        ``epsilon * diam`` of the selected hull.
    seed : int or Generator, optional
        Drives the random probe that starts the seeding.
    slack : float in [0, 1)
        Relative slack of the greedy step: a round may add any point whose
        distance is at least ``(1 - slack)`` times the largest one. Zero gives
        the exact farthest-point rule (up to ``epsilon * diam``).
    """
    P = np.atleast_2d(np.asarray(points, dtype=np.float64))
    _check_hull_args(P.shape[0], budget, epsilon)
    rng = as_generator(seed)
    if P.shape[0] < 3:
        idx = np.arange(P.shape[0])
        return HullSelection(idx, P[idx], np.zeros(0), epsilon, 0.0)
    sel, res, tol, n_seeds = _greedy(P, budget, epsilon, rng, slack=_check_slack(slack))
    idx = np.asarray(sel, dtype=np.int64)
    return HullSelection(idx, P[idx], res, epsilon, tol, n_seeds=n_seeds)


def _check_slack(slack):
    if not 0 <= slack < 1:
        raise InvalidConfigError(f"slack must lie in [0, 1), got {slack}")
    return float(slack)


def _check_hull_args(m, budget, epsilon):
    if m < 1:
        raise InvalidConfigError("need at least one point")
    if budget < 0:
        raise InvalidConfigError(f"budget must be nonnegative, got {budget}")
    if not 0 < epsilon < 1:
        raise InvalidConfigError(f"epsilon must lie in (0, 1), got {epsilon}")


def hull_augmentation(expansion, budget, epsilon, seed=None, pooled=True, return_selection=False,
                      slack=GREEDY_SLACK):
    """Observations whose derivative rows approximate the derivative hull.

    Derivative rows of all observations and dimensions are pooled (``nJ``
    points) and selected greedily with tolerance ``epsilon / J`` until
    ``budget`` distinct observations are covered or the residual drops below
    tolerance. With ``pooled=False`` each dimension gets its own hull and an
    even share of the budget. ``slack`` relaxes the farthest-point rule as in
    :func:`select_hull_points`; derivative rows trace smooth curves whose
    points are nearly all extreme, and exact farthest-point search would
    revisit most of them every round.

    Returns
    -------
    ndarray of int
        Distinct observation indices in order of first selection (and the
        :class:`HullSelection` when ``return_selection``).
    """
    n, J, d = expansion.Aprime.shape
    if budget <= 0:
        empty = np.zeros(0, dtype=np.int64)
        if return_selection:
            return empty, HullSelection(empty, np.zeros((0, d)), np.zeros(0), epsilon, 0.0, np.zeros((0, 2), dtype=np.int64))
        return empty
    if not 0 < epsilon < 1:
        raise InvalidConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    rng = as_generator(seed)
    slack = _check_slack(slack)
    tol_eps = epsilon / J
    if pooled:
        P = expansion.Aprime.reshape(n * J, d)
        groups = np.repeat(np.arange(n), J)
        if P.shape[0] < 3:
            flat = np.arange(P.shape[0])
            res, tol, n_seeds = np.zeros(0), 0.0, flat.size
        else:
            sel, res, tol, n_seeds = _greedy(P, budget, tol_eps, rng, groups=groups, slack=slack)
            flat = np.asarray(sel, dtype=np.int64)
        pairs = np.stack([flat // J, flat % J], axis=1)
        points = P[flat]
    else:
        shares = [budget // J + (1 if j < budget % J else 0) for j in range(J)]
        pair_list, pts, res_list = [], [], []
        tol = 0.0
        for j in range(J):
            if shares[j] == 0:
                continue
            Pj = expansion.Aprime[:, j, :]
            if n < 3:
                sel, res_j, tol_j = list(range(n)), np.zeros(0), 0.0
            else:
                sel, res_j, tol_j, _ = _greedy(Pj, shares[j], tol_eps, rng, groups=np.arange(n), slack=slack)
            pair_list.extend((i, j) for i in sel)
            pts.append(Pj[sel])
            res_list.append(res_j)
            tol = max(tol, tol_j)
        pairs = np.asarray(pair_list, dtype=np.int64).reshape(-1, 2)
        points = np.vstack(pts) if pts else np.zeros((0, d))
        res = np.concatenate(res_list) if res_list else np.zeros(0)
        flat = pairs[:, 0] * J + pairs[:, 1]
        n_seeds = 0
    _, first = np.unique(pairs[:, 0], return_index=True)
    obs = pairs[np.sort(first), 0]
    obs = obs[:budget]
    if return_selection:
        return obs, HullSelection(flat, points, res, epsilon, tol, pairs, n_seeds)
    return obs


def selection_to_csv(path, selection):
    """Selected points in order; ``residual`` is the hull distance at which a
    greedy point was added (empty for seed points)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("order,index,observation,dimension,residual\n")
        for k, idx in enumerate(selection.indices):
            obs, dim = selection.pairs[k] if selection.pairs is not None else (idx, 0)
            r = k - selection.n_seeds
            res = repr(float(selection.residuals[r])) if 0 <= r < len(selection.residuals) else ""
            fh.write(f"{k},{int(idx)},{int(obs)},{int(dim)},{res}\n")


def residuals_to_csv(path, selection):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("round,selected,residual\n")
        for r, value in enumerate(selection.residuals):
            fh.write(f"{r},{selection.n_seeds + r},{float(value)!r}\n")
