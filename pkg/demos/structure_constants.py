# ## Imports

from thetalab import ExtendedExchangeMatrix, build_scattering_diagram
from thetalab.bases import RationalFan2D, bcone_product_expand, exact_theta_F, ray_basis_element
from thetalab.broken_lines import POSITIVE_Q
from thetalab.io import display_series
from thetalab.structure import a_limit, expand_product_in_theta_basis, structure_table

# ## Products of theta functions in type A2

A2 = ExtendedExchangeMatrix.principal([[0, 1], [-1, 0]])
diagram = build_scattering_diagram(A2, 6)

expand_product_in_theta_basis(diagram, [((1, 0), 1), ((-1, 0), 1)], 6)

# The same constant from pairs of broken lines, with the endpoint pushed towards m.

print(display_series(a_limit(diagram, (1, 0), (-1, 0), (0, 1), 6)))

table = structure_table(diagram, (2, -1), (-1, -1), POSITIVE_Q, 8)
for m, series in sorted(table.entries.items()):
    print(m, display_series(series))

# ## A non-finite example

kronecker = build_scattering_diagram(ExtendedExchangeMatrix.principal([[0, 2], [-2, 0]]), 5)
expand_product_in_theta_basis(kronecker, [((-1, 1), 1), ((1, -2), 1)], 5)

# ## Ray basis and products inside one cone

G2 = ExtendedExchangeMatrix.principal([[0, -3], [1, 0]])
g2 = build_scattering_diagram(G2, 10)
fan = RationalFan2D.from_diagram(g2)
fan.rays

rho = ray_basis_element(fan, exact_theta_F(g2), (3, -2), None)
print(display_series(rho.F))

report = bcone_product_expand(g2, [((-2, 3), 1), ((-1, 1), 2)], 8, 4)
report.ok, report.expansion
