"""Exact rational evaluation of the inference-cost formulas term by term.

Independent of the C++ implementation; prints golden values for the toy
architecture used in the unit tests.
"""
from fractions import Fraction as F


def c1(a, n):
    d, h, L, ff, g, V, nA = a["d"], a["h"], a["L"], a["ff"], a["g"], a["V"], a["nA"]
    ne = a.get("ne", 1)
    ff_e = a.get("ffe", ff)
    attn = (4 + F(4, g)) * n * d * d + (8 + F(3, g)) * n * d + 2 * n * (n + 1) * d + F(11, 2) * h * n * (n + 1)
    ffn = ne * (5 * n * d + 6 * n * d * ff_e + (nA + 1) * n * ff_e)
    return L * (attn + ffn) + 4 * d + 2 * d * V + 10 * V


def ci(a, n, i):
    """Direct per-token cost, written out component by component."""
    d, h, L, ff, g, V, nA = a["d"], a["h"], a["L"], a["ff"], a["g"], a["V"], a["nA"]
    ne = a.get("ne", 1)
    ff_e = a.get("ffe", ff)
    norm = 4 * d
    qkv = (2 + F(4, g)) * d * d
    rope = (3 + F(3, g)) * d
    scores = 2 * d * (n + i)
    softmax = 11 * h * (n + i)
    values = 2 * d * (n + i)
    out_proj = 2 * d * d
    resid = d
    attn = norm + qkv + rope + scores + softmax + values + out_proj + resid
    ffn = ne * (4 * d + 4 * d * ff_e + nA * ff_e + ff_e + 2 * d * ff_e + d)
    return L * (attn + ffn) + 4 * d + 2 * d * V + 10 * V


def total(a, n, o):
    return c1(a, n) + sum(ci(a, n, i) for i in range(2, o + 1))


def params(a):
    d = a["d"]
    return d * a["V"] + a["L"] * d * (2 + (2 + F(2, a["g"])) * d + 3 * a["ff"]) + d


TOY = dict(d=8, h=2, L=2, ff=32, g=1, V=16, nA=6)
TOY_MOE = dict(TOY, ne=2, ffe=16)

if __name__ == "__main__":
    print("N toy", params(TOY))
    print("C1 toy n=1", c1(TOY, 1))
    print("C1 toy n=4", c1(TOY, 4))
    print("Ci toy n=4 i=2", ci(TOY, 4, 2))
    print("Ci toy n=4 i=3", ci(TOY, 4, 3))
    print("Cic toy", ci(TOY, 4, 3) - ci(TOY, 4, 2))
    print("Ctotal toy n=4 o=3", total(TOY, 4, 3))
    print("C1 toy-moe n=4", c1(TOY_MOE, 4))
    g4 = dict(TOY, g=2)
    print("C1 toy g=2 n=4", c1(g4, 4), "Ctotal g=2 n=4 o=5", total(g4, 4, 5))
