"""Compiled inner loops.

Trees are stored in breadth-first order as an array of child counts; the
children of node i are the contiguous block starting at
1 + sum(n_children[:i]).  Every function draws from a numpy ``Generator``
passed in by the caller, in a fixed order, so the Python-level samplers and
the Monte Carlo loop consume identical streams.

Random choices are made branch-free (sums of comparisons): the branches are
unpredictable and mispredictions otherwise dominate the cost per node.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _resized(buf, size):
    out = np.zeros(size, dtype=buf.dtype)
    out[: buf.shape[0]] = buf
    return out


@njit(cache=True, nogil=True)
def _draw_value(gen, values, cdf):
    u = gen.random()
    j = 0
    for q in range(values.shape[0] - 1):
        j += u >= cdf[q]
    return values[j]


@njit(cache=True, nogil=True)
def draw_offspring(gen, p_zero, p_le_one):
    u = gen.random()
    return np.int32(u >= p_zero) + np.int32(u >= p_le_one)


@njit(cache=True, nogil=True)
def grow_bgw(gen, p_zero, p_le_one, values, cdf, max_nodes, max_height):
    """Breadth-first BGW tree, optionally labelled.

    When ``values`` is non-empty each node draws its label X (inverse cdf)
    immediately before its offspring count.  Returns (n_children, x, height,
    truncated); ``x`` is all zero for an unlabelled tree.

    A generation that would push the size past ``max_nodes``, or lie deeper
    than ``max_height``, is dropped whole: the result is the tree cut at its
    last complete generation, with that generation's labels still drawn.
    """
    labelled = values.shape[0] > 0
    nch = np.zeros(64, dtype=np.int32)
    x = np.zeros(64, dtype=np.int32)
    start = 0
    end = 1
    height = 0
    while end > start:
        if end > nch.shape[0]:
            size = nch.shape[0]
            while size < end:
                size *= 2
            nch = _resized(nch, size)
            x = _resized(x, size)
        if height >= max_height:
            if labelled:
                for i in range(start, end):
                    x[i] = _draw_value(gen, values, cdf)
            return nch[:end], x[:end], height, True
        born = 0
        for i in range(start, end):
            if labelled:
                x[i] = _draw_value(gen, values, cdf)
            z = draw_offspring(gen, p_zero, p_le_one)
            nch[i] = z
            born += z
        if end + born > max_nodes:
            nch[start:end] = 0
            return nch[:end], x[:end], height, True
        if born == 0:
            return nch[:end], x[:end], height, False
        start = end
        end += born
        height += 1
    return nch[:end], x[:end], height, False


@njit(cache=True, nogil=True)
def grow_diamond(gen, beta, max_nodes, max_height):
    """Drainage tree of one bottom cell on the half-plane diamond lattice.

    Row k of the tree occupies a contiguous interval of columns [a, b].  Cell
    j of row k+1 drains left into column j (prob beta) or right into j+1, so
    only columns a-1 .. b can join, and interior columns always do.  Returns
    (n_children, height, truncated) in the layout used by ``grow_bgw``.
    """
    nch = np.zeros(64, dtype=np.int32)
    a = 0
    b = 0
    start = 0
    end = 1
    height = 0
    while end > start:
        if end > nch.shape[0]:
            size = nch.shape[0]
            while size < end:
                size *= 2
            nch = _resized(nch, size)
        nch[start:end] = 0
        if height >= max_height:
            return nch[:end], height, True
        born = 0
        first = b + 1
        last = a - 2
        for j in range(a - 1, b + 1):
            target = j + np.int64(gen.random() >= beta)
            if a <= target <= b:
                nch[start + target - a] += 1
                born += 1
                if j < first:
                    first = j
                last = j
        if end + born > max_nodes:
            nch[start:end] = 0
            return nch[:end], height, True
        if born == 0:
            return nch[:end], height, False
        a = first
        b = last
        start = end
        end += born
        height += 1
    return nch[:end], height, False


@njit(cache=True, nogil=True)
def draw_x(gen, values, cdf, n):
    out = np.empty(n, dtype=np.int32)
    for i in range(n):
        out[i] = _draw_value(gen, values, cdf)
    return out


@njit(cache=True, nogil=True)
def runoff_pass(nch, x):
    """W_i = max(0, x_i + sum of children's W), leaves first.

    Walks the breadth-first order backwards; node i's children end where
    node i+1's begin, so no offset table is needed.
    """
    n = nch.shape[0]
    w = np.empty(n, dtype=np.int64)
    stop = n
    for i in range(n - 1, -1, -1):
        s = np.int64(x[i])
        for c in range(stop - nch[i], stop):
            s += w[c]
        stop -= nch[i]
        w[i] = s if s > 0 else 0
    return w


@njit(cache=True, nogil=True)
def generations(nch):
    n = nch.shape[0]
    g = np.zeros(n, dtype=np.int64)
    c = 1
    for i in range(n):
        for _ in range(nch[i]):
            g[c] = g[i] + 1
            c += 1
    return g


@njit(cache=True, nogil=True)
def contrib_pass(nch, w):
    """Flags nodes joined to the root by a path of positive runoff.

    Returns (flags, generation).
    """
    n = nch.shape[0]
    gen_of = np.zeros(n, dtype=np.int64)
    flag = np.zeros(n, dtype=np.bool_)
    flag[0] = w[0] > 0
    c = 1
    for i in range(n):
        for _ in range(nch[i]):
            gen_of[c] = gen_of[i] + 1
            flag[c] = flag[i] and w[c] > 0
            c += 1
    return flag, gen_of


@njit(cache=True, nogil=True)
def bgw_replicate(gen, p_zero, p_le_one, values, cdf, max_nodes, max_height, track_contrib):
    """One labelled BGW tree reduced to summary numbers.

    Returns (n_nodes, height, w0, contributing_height, y_root, truncated);
    contributing height is -1 unless ``track_contrib``.
    """
    nch, x, height, truncated = grow_bgw(gen, p_zero, p_le_one, values, cdf, max_nodes, max_height)
    n = nch.shape[0]
    w = runoff_pass(nch, x)
    inflow = np.int64(0)
    for c in range(1, 1 + nch[0]):
        inflow += w[c]
    ch = -1
    if track_contrib:
        flag, gen_of = contrib_pass(nch, w)
        ch = 0
        for i in range(n):
            if flag[i] and gen_of[i] > ch:
                ch = gen_of[i]
    return n, height, w[0], ch, w[0] - inflow, truncated


@njit(cache=True, nogil=True)
def hitting_time(gen, p_zero, p_le_one, cap):
    """First n with S_n = -1 for the walk with steps (offspring - 1).

    Returns (n, censored); censored samples report n = cap.
    """
    s = 0
    n = 0
    while n < cap:
        n += 1
        s += draw_offspring(gen, p_zero, p_le_one) - 1
        if s == -1:
            return n, False
    return cap, True
