# ## Imports

import itertools

from thetalab import ExtendedExchangeMatrix
from thetalab.dominance import dom_membership, in_n_set_at, n_set_membership, nu, psi

# ## The Markov quiver

B = [[0, 2, -2], [-2, 0, 2], [2, -2, 0]]
Bt = ExtendedExchangeMatrix.principal(B)
m = (1, 1, 1)

# Mutating once at the first index.

psi(Bt, (0,), (3, 1, 2))

nu(Bt, (0,), m, (3, 1, 2)), nu(Bt, (0,), m, (3, 2, 1))

# ## The set N_m along one mutation

box = list(itertools.product(range(5), repeat=3))
inside = [n for n in box if in_n_set_at(Bt, m, n, (0,))]
len(inside), len(box)

# Every surviving n satisfies n1 <= min(2 n2, 2 n3 + 1).

all(n[0] <= min(2 * n[1], 2 * n[2] + 1) for n in inside)

n_set_membership(Bt, m, (5, 1, 1), depth=1)

n_set_membership(Bt, m, (2, 1, 1), depth=3)

# ## Dominance region

# Same coordinate sum as m, and the same parities, since nu B always has even entries.

dom_membership(B, m, (3, -1, 1), depth=3)

dom_membership(B, m, (2, -1, 2), depth=3)

dom_membership(B, m, (2, 1, 1), depth=3)
