"""Pure-Python loop implementations used as independent test oracles."""
import math
import statistics


def _dist(rows):
    n = len(rows)
    return [[math.sqrt(sum((a - b) ** 2 for a, b in zip(rows[i], rows[j]))) for j in range(n)] for i in range(n)]


def _double_centered(d):
    n = len(d)
    rm = [sum(r) / n for r in d]
    cm = [sum(d[i][j] for i in range(n)) / n for j in range(n)]
    gm = sum(rm) / n
    return [[d[i][j] - rm[i] - cm[j] + gm for j in range(n)] for i in range(n)]


def _u_centered(d):
    n = len(d)
    rs = [sum(r) for r in d]
    cs = [sum(d[i][j] for i in range(n)) for j in range(n)]
    tot = sum(rs)
    return [[0.0 if i == j else d[i][j] - rs[i] / (n - 2) - cs[j] / (n - 2) + tot / ((n - 1) * (n - 2))
             for j in range(n)] for i in range(n)]


def _inner(a, b):
    return sum(a[i][j] * b[i][j] for i in range(len(a)) for j in range(len(a)))


def naive_dcor_biased(x, y):
    a, b = _double_centered(_dist(x)), _double_centered(_dist(y))
    n2 = len(x) ** 2
    v = _inner(a, a) / n2 * _inner(b, b) / n2
    if v <= 1e-24:
        return 0.0
    return math.sqrt(max(_inner(a, b) / n2, 0.0) / math.sqrt(v))


def naive_dcor_unbiased(x, y):
    n = len(x)
    a, b = _u_centered(_dist(x)), _u_centered(_dist(y))
    s = 1.0 / (n * (n - 3))
    return _inner(a, b) * s / math.sqrt(_inner(a, a) * s * _inner(b, b) * s)


def naive_hsic(x, y):
    n = len(x)

    def gram(rows):
        d = _dist(rows)
        pairs = [d[i][j] for i in range(n) for j in range(i + 1, n)]
        med = statistics.median(pairs)
        if med == 0:
            nz = [p for p in pairs if p > 0]
            med = statistics.median(nz) if nz else 1.0
        return [[math.exp(-d[i][j] ** 2 / (2 * med * med)) for j in range(n)] for i in range(n)]

    k, l = gram(x), gram(y)
    h = [[(1.0 if i == j else 0.0) - 1.0 / n for j in range(n)] for i in range(n)]

    def mm(p, q):
        return [[sum(p[i][t] * q[t][j] for t in range(n)) for j in range(n)] for i in range(n)]

    m = mm(mm(mm(k, h), l), h)
    return sum(m[i][i] for i in range(n)) / n ** 2
