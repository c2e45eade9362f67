"""Exact computations with dg-algebras, brackets, obstructions and cohomology of categories."""
