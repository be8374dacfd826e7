"""Error-free float products for compensated summation.

The recoil double sum multiplies wave numbers (~1e7) with time separations
(~1e-1) and then cancels almost completely for symmetric geometries, so the
pair terms are expanded into exact float tuples (Dekker's algorithm) and fed
to math.fsum.  The result is the correctly rounded value of the real sum over
the stored inputs.
"""

from __future__ import annotations

_SPLIT = 134217729.0  # 2**27 + 1, splits a 53-bit significand into two halves


def two_product(a: float, b: float) -> tuple[float, float]:
    """Return (p, e) with p = fl(a*b) and p + e == a*b exactly."""
    p = a * b
    ac = _SPLIT * a
    ah = ac - (ac - a)
    al = a - ah
    bc = _SPLIT * b
    bh = bc - (bc - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def triple_product_terms(a: float, b: float, c: float) -> tuple[float, float, float, float]:
    """Four floats whose exact sum equals the real product a*b*c."""
    p, e = two_product(a, b)
    q, f = two_product(p, c)
    g, h = two_product(e, c)
    return q, f, g, h
