"""Where a mutant starts matters: amplifiers versus suppressors.

Generates one scale-free graph, classifies its vertices by the degree
threshold, then follows the expected mutant count over time from the
best and worst starting vertex. Ends with the two-sided bounds for a
fitness-advantaged mutant, which need no extra iteration.
"""

import numpy as np

import fixlab as fx

graph = fx.generate("preferential_attachment", 60, seed=42, weighting="unweighted", m=1)
labels = fx.degree_selection_class(graph)
degrees = graph.k_out

amp = int(np.argmin(degrees))
sup = int(np.argmax(degrees))
print(f"{labels.count('amplifier')} amplifiers, {labels.count('suppressor')} suppressors "
      f"on {graph.n} vertices")
print(f"lowest degree  vertex {amp} (k={degrees[amp]}): {labels[amp]}")
print(f"highest degree vertex {sup} (k={degrees[sup]}): {labels[sup]}")

for name, v in (("amplifier", amp), ("suppressor", sup)):
    tab = fx.trajectory(graph, [v], rule="bd", steps=2000)
    limit = fx.undirected_closed_form(graph, v, rule="bd").limit_expected_mutants
    print(f"{name}: expected mutants 1.0 -> {tab.ex[200]:.3f} (t=200) "
          f"-> {tab.ex[-1]:.3f} (t=2000), exact limit {limit:.3f}")

r = 1.5
rep = fx.bound_report(graph, amp, r, "bd-b")
print(f"fitness {r} mutant on vertex {amp} under bd-b: "
      f"fixation in [{rep.lower:.4f}, {rep.upper:.4f}]")
