"""Rope probabilities by direct numerical integration of a hand-written Student-t density."""

import mpmath


def t_density(x, dof):
    nu = mpmath.mpf(dof)
    c = mpmath.gamma((nu + 1) / 2) / (mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2))
    return c * (1 + x * x / nu) ** (-(nu + 1) / 2)


def rope_triple(loc, scale, dof, rope):
    with mpmath.workdps(30):
        lo = (mpmath.mpf(-rope) - loc) / scale
        hi = (mpmath.mpf(rope) - loc) / scale
        f = lambda x: t_density(x, dof)  # noqa: E731
        left = mpmath.quad(f, [-mpmath.inf, lo])
        mid = mpmath.quad(f, [lo, hi])
        right = mpmath.quad(f, [hi, mpmath.inf])
        return float(left), float(mid), float(right)
