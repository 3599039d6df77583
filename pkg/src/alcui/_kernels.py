"""Hot loops of type elimination.

Two interchangeable implementations of each kernel: a numba-compiled loop
nest and a vectorised numpy version. Set ALCUI_NO_NUMBA=1 to force numpy
(numba is also skipped when it cannot be imported).
"""
import os

import numpy as np

try:
    if os.environ.get("ALCUI_NO_NUMBA", "") not in ("", "0"):
        raise ImportError("numba disabled by ALCUI_NO_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack an (N, P) boolean matrix into (N, W) uint64 words, bit j of row i at word j//64."""
    n, p = bits.shape
    w = max(1, (p + 63) // 64)
    out = np.zeros((n, w), dtype=np.uint64)
    for j in range(p):
        col = bits[:, j].astype(np.uint64)
        out[:, j // 64] |= col << np.uint64(j % 64)
    return out


def _subset_matrix_np(dem: np.ndarray, tw: np.ndarray) -> np.ndarray:
    # S[t, u] = dem[u] is a subset of tw[t]
    n = tw.shape[0]
    out = np.ones((n, dem.shape[0]), dtype=bool)
    for k in range(tw.shape[1]):
        miss = dem[None, :, k] & ~tw[:, None, k]
        out &= miss == 0
    return out


def eliminate_numpy(tw, dem, ex_role, ex_idx, ex_body, ex_pol, alive):
    alive = alive.copy()
    n = tw.shape[0]
    if n == 0 or len(ex_idx) == 0:
        return alive
    subs = [_subset_matrix_np(dem[r], tw) for r in range(dem.shape[0])]
    has = np.zeros((len(ex_idx), n), dtype=bool)
    body = np.zeros((len(ex_idx), n), dtype=bool)
    for e in range(len(ex_idx)):
        has[e] = (tw[:, ex_idx[e] // 64] >> np.uint64(ex_idx[e] % 64)) & np.uint64(1) == 1
        b = (tw[:, ex_body[e] // 64] >> np.uint64(ex_body[e] % 64)) & np.uint64(1) == 1
        body[e] = b if ex_pol[e] else ~b
    changed = True
    while changed:
        changed = False
        for e in range(len(ex_idx)):
            cand = alive & body[e]
            wit = subs[ex_role[e]][:, cand].any(axis=1)
            dead = alive & has[e] & ~wit
            if dead.any():
                alive &= ~dead
                changed = True
    return alive


def _eliminate_loops(tw, dem, ex_role, ex_idx, ex_body, ex_pol, alive):
    alive = alive.copy()
    n = tw.shape[0]
    nw = tw.shape[1]
    ne = ex_idx.shape[0]
    changed = True
    while changed:
        changed = False
        for t in range(n):
            if not alive[t]:
                continue
            for e in range(ne):
                bi = ex_idx[e]
                if (tw[t, bi // 64] >> np.uint64(bi % 64)) & np.uint64(1) == 0:
                    continue
                r = ex_role[e]
                bb = ex_body[e]
                found = False
                for u in range(n):
                    if not alive[u]:
                        continue
                    bit = (tw[u, bb // 64] >> np.uint64(bb % 64)) & np.uint64(1)
                    if (bit == 1) != ex_pol[e]:
                        continue
                    ok = True
                    for k in range(nw):
                        if dem[r, u, k] & ~tw[t, k] != 0:
                            ok = False
                            break
                    if ok:
                        found = True
                        break
                if not found:
                    alive[t] = False
                    changed = True
                    break
    return alive


if HAVE_NUMBA:
    eliminate_numba = njit(cache=True)(_eliminate_loops)
else:
    eliminate_numba = None


def eliminate(tw, dem, ex_role, ex_idx, ex_body, ex_pol, alive):
    """Greatest set of alive types in which every existential has a witness.

    tw: (N, W) uint64 type bitsets; dem: (R, N, W) per-role demand sets;
    existential e is bit ex_idx[e] over role ex_role[e] with body literal
    (ex_body[e], ex_pol[e]). u witnesses e at t iff the body literal holds in
    u and dem[r, u] is a subset of t.
    """
    args = (np.ascontiguousarray(tw, dtype=np.uint64),
            np.ascontiguousarray(dem, dtype=np.uint64),
            np.asarray(ex_role, dtype=np.int64), np.asarray(ex_idx, dtype=np.int64),
            np.asarray(ex_body, dtype=np.int64), np.asarray(ex_pol, dtype=np.bool_),
            np.asarray(alive, dtype=np.bool_))
    if HAVE_NUMBA:
        return eliminate_numba(*args)
    return eliminate_numpy(*args)
