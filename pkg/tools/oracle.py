"""Independent high-precision oracle for frozen test values.

Uses mpmath only and imports nothing from ``halfspace_ln``.  Symmetric
functions are expanded directly.  Integrals in s are rewritten in the ray
value ``x = phi`` through ``s = 1 / (2 f(x, 1, ..., 1))`` so that no root
finding happens inside quadrature.  The primitive of ``1 / sqrt(2K)`` is
checked on cones with closed-form K through Gauss hypergeometric functions.

Run ``python tools/oracle.py > tests/oracle_values.py``.
"""

import itertools
import pprint

import mpmath as mp

mp.mp.dps = 40
HALF = mp.mpf(1) / 2


def sigma(lam, j):
    if j == 0:
        return mp.mpf(1)
    return mp.fsum(mp.fprod(c) for c in itertools.combinations(lam, j))


def f_ray(n, k, l, x):
    lam = [x] + [mp.mpf(1)] * (n - 1)
    c = (mp.binomial(n, l) / mp.binomial(n, k)) ** (mp.mpf(1) / (k - l))
    return c * (sigma(lam, k) / sigma(lam, l)) ** (mp.mpf(1) / (k - l))


def s_of(n, k, l, x):
    return 1 / (2 * f_ray(n, k, l, x))


def ds_dx(n, k, l, x):
    # d sigma_j / dx along (x, 1, ..., 1) is C(n-1, j-1)
    lam = [x] + [mp.mpf(1)] * (n - 1)
    dlog = mp.binomial(n - 1, k - 1) / sigma(lam, k)
    if l:
        dlog -= mp.binomial(n - 1, l - 1) / sigma(lam, l)
    return -s_of(n, k, l, x) * dlog / (k - l)


def lower_end(n, k):
    return -mp.mpf(n - k) / k


def phi(n, k, l, s):
    # f vanishes at the cone boundary and equals 1 at x = 1
    target = 1 / (2 * mp.mpf(s))
    lo = lower_end(n, k) + mp.mpf(10) ** -30
    hi = mp.mpf(1)
    while f_ray(n, k, l, hi) < target:
        hi *= 2
    return mp.findroot(lambda x: f_ray(n, k, l, x) - target, (lo, hi), solver="anderson")


def A_at(n, k, l, x):
    s = s_of(n, k, l, x)
    return 1 / (s * (1 - x)) - 1 / (2 * n * s * (s - HALF))


def B_from_x(n, k, l, x):
    # B(s) = int_{1/2}^s A ds, with ds = s'(x) dx and x running from 1 down to phi(s).
    # Near x = 1 the two terms of A cancel; tanh-sinh nodes crowd that end,
    # so the integrand is evaluated at triple precision.
    def integrand(t):
        if t == 1:
            return mp.mpf(0)
        with mp.workdps(3 * mp.mp.dps):
            return A_at(n, k, l, t) * ds_dx(n, k, l, t)

    return -mp.quad(integrand, [x, 1])


def G_from_x(n, k, l, x):
    s = s_of(n, k, l, x)
    return ((s - HALF) / s) ** (mp.mpf(1) / n) * mp.exp(B_from_x(n, k, l, x))


def K(n, k, l, X):
    lo = lower_end(n, k) + mp.mpf(10) ** -25
    x = mp.findroot(lambda v: G_from_x(n, k, l, v) - X, (lo, 1 - mp.mpf(10) ** -25), solver="anderson")
    return s_of(n, k, l, x)


def F_closed(n, k, X):
    X = mp.mpf(X)
    if k == 1:  # 2K = 1 + X^n
        return X * mp.hyp2f1(HALF, mp.mpf(1) / n, 1 + mp.mpf(1) / n, -X**n)
    # (4, 2): 2K = sqrt(1 + 2 X^4)
    return X * mp.hyp2f1(mp.mpf(1) / 4, mp.mpf(1) / 4, mp.mpf(5) / 4, -2 * X**4)


GENERIC = {(3, 2, 1): [0.6, 1.0, 5.0], (6, 3, 2): [0.6, 1.0, 5.0], (5, 2, 0): [0.6, 1.0, 5.0],
           (6, 5, 0): [0.6, 1.0, 5.0]}
K_POINTS = [0.5, 2.0, 30.0]
F_CASES = {(3, 1): [0.5, 2.0, 50.0], (5, 1): [0.5, 2.0, 50.0], (4, 2): [0.5, 2.0, 50.0]}


def main():
    generic = {}
    for (n, k, l), s_list in GENERIC.items():
        rows = []
        for s in s_list:
            x = phi(n, k, l, s)
            rows.append((s, float(x), float(A_at(n, k, l, x)), float(B_from_x(n, k, l, x)),
                         float(G_from_x(n, k, l, x))))
        kvals = [(X, float(K(n, k, l, X))) for X in K_POINTS]
        generic[(n, k, l)] = {"profile": rows, "K": kvals}
    prim = {}
    for (n, k), xs in F_CASES.items():
        prim[(n, k)] = [(X, float(F_closed(n, k, X))) for X in xs]
    prim_inf = {(5, 1): float(mp.quad(lambda t: 1 / mp.sqrt(1 + t**5), [0, 1, mp.inf]))}
    print('"""Frozen values printed by tools/oracle.py; do not edit by hand."""\n')
    print("# (n, k, l) -> rows (s, phi, A, B, G) and K samples (x, K(x))")
    print("GENERIC = " + pprint.pformat(generic, width=110))
    print("\n# (n, k) -> (X, F(X)) for closed-form K")
    print("PRIMITIVE = " + pprint.pformat(prim, width=110))
    print("PRIMITIVE_INF = " + pprint.pformat(prim_inf))


if __name__ == "__main__":
    main()
