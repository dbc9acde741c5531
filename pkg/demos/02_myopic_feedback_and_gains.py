"""Myopic feedback and conditional expected gains.

The adaptive story on the 3-node toy graph: seed the hub, watch one step of
outcomes, and let the observed failures steer the second pick.  Also the
two-node instance where watching a failure *raises* the value of a seed
under the single-attempt model but never under the multi-attempt one.
"""

from myopicim import (
    EstimatorConfig,
    GreedyPolicy,
    InfluenceGraph,
    PartialRealization,
    Realization,
    empty_partial_realization,
    exact_marginal_gain,
    mc_marginal_gain,
    modified_ic,
    observe_myopic,
    run_adaptive_policy,
    standard_ic,
)
from myopicim.rng import derive_rng

# v=0 can reach u=1 (probability .9) and w=2 (probability .1)
graph = InfluenceGraph(3, [(0, 1, 0.9), (0, 2, 0.1)])
model = modified_ic()
lg = model.build_layered(graph, 3)

print("== expected gains with nothing observed ==")
psi = empty_partial_realization(lg)
for node, name in [(0, "v"), (1, "u"), (2, "w")]:
    est = exact_marginal_gain(node, psi, lg, model)
    print(f"  gain({name}) = {est.mean:.4f}  ({est.sample_count} worlds enumerated)")

print()
print("== the world where v reaches w but never u ==")
statuses = lg.forced_statuses.copy()
for t in (1, 2):
    statuses[lg.edge_index(0, t, 2)] = True  # v -> w live at every attempt
world = Realization(lg, statuses)
psi1 = observe_myopic(world, psi, [0], model)
print(f"after seeding v and one step of feedback: {psi1}")
for node, name in [(1, "u")]:
    est = exact_marginal_gain(node, psi1, lg, model)
    print(f"  gain({name} | feedback) = {est.mean:.4f}")

result = run_adaptive_policy(GreedyPolicy(EstimatorConfig(mode="exact")),
                             graph, model, 2, 3, world)
print(f"adaptive greedy seeds {result.seeds.entries}, final spread {result.utility_final}")

print()
print("== watching a failure can raise a gain (single-attempt only) ==")
chain = InfluenceGraph(2, [(0, 1, 0.9)])
for m in (standard_ic(), modified_ic()):
    clg = m.build_layered(chain, 3)
    before = PartialRealization(clg, {}, {0: 1})
    after = PartialRealization(clg, {clg.edge_index(0, 1, 1): False}, {0: 1}, clock=2)
    g1 = exact_marginal_gain(1, before, clg, m).mean
    g2 = exact_marginal_gain(1, after, clg, m).mean
    marker = "VIOLATION" if g2 > g1 else "diminishing"
    print(f"  {m.variant:18s} gain(before)={g1:.3f}  gain(after failure)={g2:.3f}  [{marker}]")

print()
print("== Monte Carlo agrees with enumeration ==")
est = exact_marginal_gain(0, empty_partial_realization(lg), lg, model)
mc = mc_marginal_gain(0, empty_partial_realization(lg), lg, model, 20000, derive_rng(0, 1))
print(f"  exact {est.mean:.4f}  vs  MC {mc.mean:.4f} +/- {mc.std_error:.4f}")
