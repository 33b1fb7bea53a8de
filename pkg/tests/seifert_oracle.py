"""Slow, independent signature oracle from the Seifert form of the fibre surface.

For the Brieskorn fibre surface of T(p, q) the Seifert matrix is the tensor
product -(A_p (x) A_q) with A_n the (n-1)x(n-1) upper bidiagonal matrix with
1 on the diagonal and -1 above it. The signature of V + V^T is found by
symmetric Gaussian elimination over the rationals.
"""

from fractions import Fraction


def _bidiagonal(n):
    m = n - 1
    return [[1 if i == j else (-1 if j == i + 1 else 0) for j in range(m)] for i in range(m)]


def _kron(a, b):
    return [[x * y for x in ra for y in rb] for ra in a for rb in b]


def seifert_matrix(p, q):
    return [[-v for v in row] for row in _kron(_bidiagonal(p), _bidiagonal(q))]


def symmetric_signature(m):
    a = [[Fraction(v) for v in row] for row in m]
    n = len(a)
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if a[i][i] != 0), None)
        if piv is None:
            # no nonzero diagonal: add a row/column with a nonzero off-diagonal
            pair = next(((i, j) for i in active for j in active if i != j and a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            continue
        d = a[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for i in active:
            f = a[i][piv] / d
            if f:
                for k in range(n):
                    a[i][k] -= f * a[piv][k]
                for k in range(n):
                    a[k][i] -= f * a[k][piv]
    return pos - neg


def seifert_signature(p, q):
    v = seifert_matrix(p, q)
    n = len(v)
    return symmetric_signature([[v[i][j] + v[j][i] for j in range(n)] for i in range(n)])


def det(m):
    a = [[Fraction(v) for v in row] for row in m]
    n = len(a)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            out = -out
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return out
