"""Reference computations that share no code path with the package.

Everything here is deliberately naive: explicit loops, Gaussian elimination
on the normal equations, full refits and an erf power series.
"""
import math

import numpy as np


def gauss_solve(A, b):
    """Gaussian elimination with partial pivoting on plain Python floats."""
    n = len(A)
    M = [list(map(float, A[i])) + [float(b[i])] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[piv] = M[piv], M[col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            for c in range(col, n + 1):
                M[r][c] -= f * M[col][c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        x[r] = (M[r][n] - sum(M[r][c] * x[c] for c in range(r + 1, n))) / M[r][r]
    return np.array(x)


def design(X, intercept=True):
    X = np.asarray(X, dtype=float).reshape(len(X), -1)
    return np.column_stack([np.ones(len(X)), X]) if intercept else X


def normal_equations_beta(X, y, intercept=True):
    D = design(X, intercept)
    return gauss_solve(D.T @ D, D.T @ y)


def explicit_inverse(A):
    k = len(A)
    return np.column_stack([gauss_solve(A, np.eye(k)[:, j]) for j in range(k)])


def explicit_hat(X, intercept=True):
    D = design(X, intercept)
    return D @ explicit_inverse(D.T @ D) @ D.T


def explicit_studentized(X, y, intercept=True):
    D = design(X, intercept)
    beta = normal_equations_beta(X, y, intercept)
    r = y - D @ beta
    H = explicit_hat(X, intercept)
    sigma = math.sqrt(float(r @ r) / (len(y) - D.shape[1]))
    return np.array([r[i] / (sigma * math.sqrt(1.0 - H[i, i])) for i in range(len(y))])


def refit_delta_betas(X, y, intercept=True):
    """beta - beta_(i) by refitting without each row."""
    X = np.asarray(X, dtype=float).reshape(len(y), -1)
    full = normal_equations_beta(X, y, intercept)
    out = []
    for i in range(len(y)):
        keep = [j for j in range(len(y)) if j != i]
        out.append(full - normal_equations_beta(X[keep], y[keep], intercept))
    return np.array(out)


def erf_series(x):
    total, term, n = 0.0, x, 0
    terms = []
    while True:
        t = term / (2 * n + 1)
        terms.append(t)
        if abs(t) < 1e-18:
            break
        n += 1
        term *= -x * x / n
    return 2.0 / math.sqrt(math.pi) * math.fsum(terms)


def normal_cdf(z):
    return 0.5 * (1.0 + erf_series(z / math.sqrt(2.0)))


def normal_quantile_bisection(p, lo=-8.0, hi=8.0):
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def loop_sse(a, b):
    s = 0.0
    for u, v in zip(a, b):
        s += (u - v) * (u - v)
    return s
