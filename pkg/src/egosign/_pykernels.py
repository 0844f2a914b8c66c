"""Pure-Python kernels.

Reference implementations of the inner loops that ``_ckernels.pyx`` compiles.
Both versions perform the same floating point operations in the same order,
so results are bit-identical whichever backend is loaded.
"""


def fit_line(xs, ys):
    """Least-squares fit of ``x = slope * y + intercept``.

    Raises ``ZeroDivisionError`` when the y values have zero spread.
    """
    n = len(xs)
    if n != len(ys) or n < 2:
        raise ValueError("need at least two (x, y) pairs of equal length")
    sx = 0.0
    sy = 0.0
    for i in range(n):
        sx += xs[i]
        sy += ys[i]
    mx = sx / n
    my = sy / n
    sxy = 0.0
    syy = 0.0
    for i in range(n):
        dy = ys[i] - my
        sxy += dy * (xs[i] - mx)
        syy += dy * dy
    if syy == 0.0:
        raise ZeroDivisionError("all y values are equal")
    slope = sxy / syy
    return slope, mx - slope * my


def nearest_labels(mids, left, centre, right):
    """Index of the nearest anchor per midpoint: 0=L, 1=C, 2=R.

    Ties resolve in L, C, R order.
    """
    out = []
    for m in mids:
        dl = abs(m - left)
        dc = abs(m - centre)
        dr = abs(m - right)
        lo = dl
        if dc < lo:
            lo = dc
        if dr < lo:
            lo = dr
        if dl == lo:
            out.append(0)
        elif dc == lo:
            out.append(1)
        else:
            out.append(2)
    return out


def lcs_length(a, b):
    """Length of the longest common subsequence of two int sequences."""
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            if x == y:
                cur.append(prev[j] + 1)
            else:
                cur.append(cur[j] if cur[j] > prev[j + 1] else prev[j + 1])
        prev = cur
    return prev[-1]


def ngram_matches(pred, ref, n):
    """(clipped matches, candidate n-gram total) for order ``n``."""
    total = len(pred) - n + 1
    if total <= 0:
        return 0, 0
    counts = {}
    for i in range(len(ref) - n + 1):
        g = tuple(ref[i:i + n])
        counts[g] = counts.get(g, 0) + 1
    matched = 0
    for i in range(total):
        g = tuple(pred[i:i + n])
        c = counts.get(g, 0)
        if c:
            counts[g] = c - 1
            matched += 1
    return matched, total
