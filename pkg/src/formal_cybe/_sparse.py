"""Small helpers for sparse rational vectors and tensors stored as dicts.

Zero entries are never stored; every helper preserves that.
"""
from fractions import Fraction


def addto(target, key, value):
    if not value:
        return
    v = target.get(key)
    if v is None:
        target[key] = value
    else:
        v += value
        if v:
            target[key] = v
        else:
            del target[key]


def add(a, b):
    out = dict(a)
    for k, v in b.items():
        addto(out, k, v)
    return out


def sub(a, b):
    out = dict(a)
    for k, v in b.items():
        addto(out, k, -v)
    return out


def scale(a, c):
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def accumulate(target, source, c=1):
    """target += c * source, in place."""
    if not c:
        return target
    for k, v in source.items():
        addto(target, k, v * c)
    return target


def frac(x):
    """Parse an int, Fraction or "num/den" string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted; use 'num/den' strings")
    return Fraction(x)


def fmt(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
