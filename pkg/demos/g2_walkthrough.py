# ## Imports

from thetalab import ExtendedExchangeMatrix, build_scattering_diagram, mutate_diagram, theta
from thetalab.broken_lines import mutate_broken_line, mutate_theta
from thetalab.io import display_pointed, display_series
from thetalab.lattice import eta_step
from thetalab.render import render_svg
from thetalab.substitution import SeedFrame

# ## The G2 scattering diagram

# A square exchange matrix gets principal coefficients appended as frozen columns.

Bt = ExtendedExchangeMatrix.principal([[0, -3], [1, 0]])
Bt.d

diagram = build_scattering_diagram(Bt, 6)
diagram.is_certified_finite()

for wall in diagram.walls:
    print(wall.normal, "outgoing" if wall.outgoing else "initial", display_series(wall.f))

# ## A theta function from broken lines

res = theta(diagram, (-2, 3), order=6)
print(res.broken_line_count, res.finiteness)
print(display_pointed(res.m, res.F))

for line in res.lines:
    print(line.coeff, line.final.n, line.final.m)

# ## Mutating at the first index

# Each broken line moves to a broken line for the mutated diagram ending at eta_1(Q).

moved = [mutate_broken_line(g, SeedFrame(Bt), 0) for g in res.lines]
eta_step(Bt.B, 0, res.Q)
[(g.coeff, g.final.n, g.final.m) for g in moved]

# Substituting and multiplying gives the theta function for the mutated matrix.

image = mutate_theta(res, SeedFrame(Bt), 0)
piece = image.piece((2, -3))
print(display_pointed((2, -3), piece.series))

# ## Pictures

with open("g2.svg", "w") as fh:
    fh.write(render_svg(diagram, res.lines))

with open("g2_mutated.svg", "w") as fh:
    fh.write(render_svg(mutate_diagram(diagram, 0), moved))
