"""Cohomology of BZ/2 through the category cochain complex and the bar complex,
then the graded/ungraded comparison over a Laurent ring."""
from todabracket.catcoh import (cohomology_of_category, constant_bimodule, cyclic_group_table,
                                graded_restriction, group_category, group_cohomology_bar)
from todabracket.graded import DegreeWindow, laurent_ring

T = cyclic_group_table(2)
C = group_category(T)
for n in range(5):
    print("H^%d(BZ/2; F_2): category %s, bar %s"
          % (n, cohomology_of_category(C, constant_bimodule(C, [2]), n), group_cohomology_bar(T, n, 2)))

R = laurent_ring(2, 2, DegreeWindow(-8, 8))
r = graded_restriction(R, 2, 1, 3)
print("F_2[u, 1/u], |u| = 2, rank 1:", "agree" if r["agree"] else "differ")
