"""The Heisenberg dga end to end.

Transfers an A-infinity structure onto cohomology, evaluates <[x], [y], [y]>
as a Toda bracket and by the Massey formula, and compares id cup [m_3] with the
realizability obstruction of H/[x]H.
"""
import numpy as np

from todabracket.ainf import transfer
from todabracket.dga import cohomology, heisenberg_dga
from todabracket.graded import quotient_module
from todabracket.toda import chain_of_multiplications, massey_oracle, triple_bracket, verify_main_theorem


def show(H, v):
    return " + ".join(H.labels[i] for i in np.flatnonzero(v)) or "0"


A = heisenberg_dga(2)
H = cohomology(A)
print("H^*:", ", ".join("%s (%d)" % (l, d) for l, d in zip(H.labels, H.degrees)))

S = transfer(A, max_order=4)
print("m_3([x], [y], [y]) =", show(H, S.m_basis(3, "[x]", "[y]", "[y]")))

els = [A.element(g) for g in "xyy"]
res = triple_bracket(*chain_of_multiplications(A, els))
cls, _ = massey_oracle(A, *els)
print("<[x], [y], [y]> =", show(H, res.ring_value()), " indeterminacy", res.indeterminacy_dim)
print("Massey formula  =", show(H, cls))

M = quotient_module(H, [0], [H.element("[x]")])[0]
r = verify_main_theorem(A, 1, M)
print("id cup [m_3] =", r["lhs"])
print("kappa_3(M)   =", r["rhs"])
print("equal:", r["equal"], " Ext dimension:", r["ext_dim"])
