"""Exponents where the linearization at the 2-zone solution picks up a kernel."""
import warnings

from nodal_annulus import AnnulusSpec, find_degeneracies, morse_index_at, spherical_multiplicity

spec = AnnulusSpec(1.0, 2.0, 2)
m = 2
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    scan = find_degeneracies(spec, m, (1.001, 20.0), 4, refine=True)
for w in caught:
    print("warning:", w.message)

print(f"{'p_k':>10} {'l':>2} {'j':>2} {'index below':>12} {'index above':>12} {'mult':>5}")
for q in scan:
    below = morse_index_at(spec, q.p_k - 1e-5, m).morse_index
    above = morse_index_at(spec, q.p_k + 1e-5, m).morse_index
    print(f"{q.p_k:10.6f} {q.l:2d} {q.j:2d} {below:12d} {above:12d} {spherical_multiplicity(2, q.j):5d}")
