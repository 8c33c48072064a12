"""Conditional independences in the unrolled decision process."""

from efekit.dsep import active_trail, d_separated
from efekit.model import to_dag

g = to_dag(None, 1, 2)
print("nodes:", ", ".join(g.nodes))

queries = [
    ({"o_2"}, {"a_1"}, {"s_2"}),
    ({"o_2"}, {"a_1"}, set()),
    ({"s_1"}, {"s_3"}, {"s_2"}),
    ({"o_1"}, {"o_3"}, {"s_2"}),
    ({"s_1"}, {"a_1"}, {"s_2"}),
]
for x, y, given in queries:
    sep = d_separated(g, x, y, given)
    line = f"{sorted(x)} _|_ {sorted(y)} | {sorted(given)}: {sep}"
    if not sep:
        line += "   via " + " - ".join(active_trail(g, x, y, given))
    print(line)
