"""Compiled inner loops for free-distance search and Viterbi decoding."""
import numpy as np
from numba import njit

STATUS_DONE = 0
STATUS_PRUNED = 1
STATUS_CAP = 2


@njit(cache=True)
def free_distance_kernel(nxt, out, ed, d_best, max_sweeps):
    """Pairwise state-distance traversal of a code trellis.

    ``D[a, b]`` (``a <= b``) holds the least accumulated squared distance seen
    for a pair of equal-length paths that diverged from a common state and now
    sit in states ``a`` and ``b``. Only pairs whose entry improved during the
    previous sweep are extended, reading the value they held when the sweep
    began.

    Returns ``(d_inf, merge_depth, sweeps, status, D, active_min)`` where
    ``active_min[s]`` is the smallest extended entry in sweep ``s``.
    """
    n_states, n_inputs = nxt.shape
    D = np.full((n_states, n_states), np.inf)
    flag = np.zeros((n_states, n_states), dtype=np.bool_)
    cap = n_states * n_states
    act_a = np.empty(cap, dtype=np.int64)
    act_b = np.empty(cap, dtype=np.int64)
    n_act = 0
    d_inf = np.inf
    depth = 0
    active_min = np.full(max_sweeps + 1, np.inf)

    # Paths diverging from the same state.
    for s in range(n_states):
        for x in range(n_inputs):
            t = nxt[s, x]
            y = out[s, x]
            for xt in range(x + 1, n_inputs):
                tt = nxt[s, xt]
                d = ed[y, out[s, xt]]
                a = t if t < tt else tt
                b = tt if t < tt else t
                if d < D[a, b]:
                    D[a, b] = d
                    if a == b:
                        if d < d_inf:
                            d_inf = d
                            depth = 1
                    elif not flag[a, b]:
                        flag[a, b] = True
                        act_a[n_act] = a
                        act_b[n_act] = b
                        n_act += 1
                if d_inf <= d_best:
                    return d_inf, depth, 0, STATUS_PRUNED, D, active_min

    sweep = 0
    cur_a = np.empty(cap, dtype=np.int64)
    cur_b = np.empty(cap, dtype=np.int64)
    cur_d = np.empty(cap, dtype=np.float64)
    while n_act > 0:
        if sweep >= max_sweeps:
            return d_inf, depth, sweep, STATUS_CAP, D, active_min
        sweep += 1
        n_cur = n_act
        for p in range(n_cur):
            a = act_a[p]
            b = act_b[p]
            cur_a[p] = a
            cur_b[p] = b
            cur_d[p] = D[a, b]
            flag[a, b] = False
        n_act = 0
        amin = np.inf
        for p in range(n_cur):
            base = cur_d[p]
            if base >= d_inf:
                continue
            if base < amin:
                amin = base
            s = cur_a[p]
            st = cur_b[p]
            for x in range(n_inputs):
                t = nxt[s, x]
                y = out[s, x]
                for xt in range(n_inputs):
                    tt = nxt[st, xt]
                    d = base + ed[y, out[st, xt]]
                    a = t if t < tt else tt
                    b = tt if t < tt else t
                    if d < D[a, b]:
                        D[a, b] = d
                        if a == b:
                            if d < d_inf:
                                d_inf = d
                                depth = sweep + 1
                                if d_inf <= d_best:
                                    active_min[sweep] = amin
                                    return d_inf, depth, sweep, STATUS_PRUNED, D, active_min
                        elif not flag[a, b]:
                            flag[a, b] = True
                            act_a[n_act] = a
                            act_b[n_act] = b
                            n_act += 1
        active_min[sweep] = amin
    return d_inf, depth, sweep, STATUS_DONE, D, active_min


@njit(cache=True)
def _branch_metrics(r, points, bm):
    for y in range(points.shape[0]):
        dr = r.real - points[y].real
        di = r.imag - points[y].imag
        bm[y] = dr * dr + di * di


@njit(cache=True)
def _best_state(pm):
    state = 0
    for s in range(1, pm.shape[0]):
        if pm[s] < pm[state]:
            state = s
    return state


@njit(cache=True)
def viterbi_kernel(received, points, pred_s, pred_x, pred_y, start, forced, end):
    """Block Viterbi with full traceback.

    ``pred_*[t, a]`` list the a-th predecessor (state, input, output) of state
    ``t`` in ascending state order, so a strict ``<`` compare keeps the lowest
    predecessor state on ties. The path starts in ``start``; at steps with
    ``forced[t] >= 0`` only that input is admitted (a termination tail must
    pin every input, since one with a shorter register could otherwise take
    any value without leaving the final state). Traceback starts from ``end``,
    or from the best state when ``end < 0``. Returns the decided input per
    step and the final path metric.
    """
    steps = received.shape[0]
    n_states, n_pred = pred_s.shape
    pm = np.full(n_states, np.inf)
    pm[start] = 0.0
    new = np.empty(n_states)
    bm = np.empty(points.shape[0])
    surv = np.empty((steps, n_states), dtype=np.uint8)
    offset = 0.0
    for t in range(steps):
        _branch_metrics(received[t], points, bm)
        lo = np.inf
        pin = forced[t]
        for s in range(n_states):
            best = np.inf
            arg = 0
            for a in range(n_pred):
                if pin >= 0 and pred_x[s, a] != pin:
                    continue
                m = pm[pred_s[s, a]] + bm[pred_y[s, a]]
                if m < best:
                    best = m
                    arg = a
            new[s] = best
            surv[t, s] = arg
            if best < lo:
                lo = best
        for s in range(n_states):
            pm[s] = new[s] - lo
        offset += lo
    state = end if end >= 0 else _best_state(pm)
    final = pm[state] + offset
    decided = np.empty(steps, dtype=np.int64)
    for t in range(steps - 1, -1, -1):
        a = surv[t, state]
        decided[t] = pred_x[state, a]
        state = pred_s[state, a]
    return decided, final


@njit(cache=True)
def viterbi_stream_kernel(received, points, pred_s, pred_x, pred_y, depth):
    """Sliding-window Viterbi committing each decision ``depth`` steps late.

    Survivors live in a ring buffer of ``depth + 1`` columns; the trailing
    ``depth`` decisions are flushed from the best final state.
    """
    steps = received.shape[0]
    n_states, n_pred = pred_s.shape
    ring = depth + 1
    pm = np.full(n_states, np.inf)
    pm[0] = 0.0
    new = np.empty(n_states)
    bm = np.empty(points.shape[0])
    surv = np.empty((ring, n_states), dtype=np.uint8)
    decided = np.empty(steps, dtype=np.int64)
    for t in range(steps):
        _branch_metrics(received[t], points, bm)
        lo = np.inf
        col = t % ring
        for s in range(n_states):
            best = np.inf
            arg = 0
            for a in range(n_pred):
                m = pm[pred_s[s, a]] + bm[pred_y[s, a]]
                if m < best:
                    best = m
                    arg = a
            new[s] = best
            surv[col, s] = arg
            if best < lo:
                lo = best
        state = 0
        for s in range(n_states):
            pm[s] = new[s] - lo
            if pm[s] < pm[state]:
                state = s
        if t >= depth:
            for u in range(t, t - depth, -1):
                state = pred_s[state, surv[u % ring, state]]
            decided[t - depth] = pred_x[state, surv[(t - depth) % ring, state]]
    state = 0
    for s in range(1, n_states):
        if pm[s] < pm[state]:
            state = s
    start = steps - depth if steps > depth else 0
    for u in range(steps - 1, start - 1, -1):
        a = surv[u % ring, state]
        decided[u] = pred_x[state, a]
        state = pred_s[state, a]
    return decided


@njit(cache=True)
def viterbi_table_kernel(labels, table, pred_s, pred_x, pred_y, start, forced, end):
    """Block Viterbi on hard-decided labels with a branch-metric lookup table.

    ``table[r, y]`` is the cost of hypothesising output ``y`` when label ``r``
    was detected (e.g. Hamming distance for a binary receiver). ``start``,
    ``forced`` and ``end`` behave as in ``viterbi_kernel``.
    """
    steps = labels.shape[0]
    n_states, n_pred = pred_s.shape
    pm = np.full(n_states, np.inf)
    pm[start] = 0.0
    new = np.empty(n_states)
    surv = np.empty((steps, n_states), dtype=np.uint8)
    for t in range(steps):
        row = labels[t]
        lo = np.inf
        pin = forced[t]
        for s in range(n_states):
            best = np.inf
            arg = 0
            for a in range(n_pred):
                if pin >= 0 and pred_x[s, a] != pin:
                    continue
                m = pm[pred_s[s, a]] + table[row, pred_y[s, a]]
                if m < best:
                    best = m
                    arg = a
            new[s] = best
            surv[t, s] = arg
            if best < lo:
                lo = best
        for s in range(n_states):
            pm[s] = new[s] - lo
    state = end if end >= 0 else _best_state(pm)
    decided = np.empty(steps, dtype=np.int64)
    for t in range(steps - 1, -1, -1):
        a = surv[t, state]
        decided[t] = pred_x[state, a]
        state = pred_s[state, a]
    return decided
