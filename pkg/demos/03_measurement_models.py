"""Measurement models: closed forms against the brute-force protocol.

The brute-force protocol tensors the input with the probe state, applies
the interaction channel, weights by a meter effect, and partial-traces.
For a nondisturbing interaction the same quantities collapse to small
sums over the probe table.  This script evaluates both paths for the
measured instrument, the measured observable, the post-interaction probe
instrument and observable, and the second-round apparatus.
"""

import numpy as np

from nondisturbing import (
    State,
    apparatus_from_mm,
    max_abs,
    measured_instrument_direct,
    measured_instrument_nd,
    measured_observable_nd,
    post_probe_instrument_direct,
    post_probe_instrument_nd,
    post_probe_observable,
    probability,
    random_density,
    random_model,
    remeasure_apparatus,
    remeasured_effect_by_substitution,
)

model = random_model(dim_base=3, dim_probe=2, outcomes=3, kraus_count=2, seed=2)
rho = State(random_density(3, 3))
print(f"model: base dim {model.dim_base}, probe dim {model.dim_probe}, "
      f"meter outcomes {model.meter.labels}")

print("\n=== Measured instrument ===")
for x in model.meter.labels:
    closed = measured_instrument_nd(model, x, rho)
    direct = measured_instrument_direct(model, x, rho)
    print(f"outcome {x}: probability {closed.trace:.4f}, "
          f"closed vs direct {max_abs(closed.matrix - direct.matrix):.2e}")

print("\n=== Measured observable ===")
observable = measured_observable_nd(model)
total = sum(observable.effect_matrix(x) for x in observable.labels)
print("completeness defect:", max_abs(total - np.eye(3)))
print("probabilities from the observable:",
      [round(probability(rho, observable.effect(x)), 4) for x in observable.labels])
print("every effect is diagonal in the context:",
      all(model.nd.context.is_measurable(observable.effect_matrix(x))
          for x in observable.labels))

print("\n=== Post-interaction probe ===")
sigma = State(random_density(2, 4))
probe_obs = post_probe_observable(model, rho)
for x in model.meter.labels:
    closed = post_probe_instrument_nd(model, rho, x, sigma)
    direct = post_probe_instrument_direct(model, rho, x, sigma)
    paired = np.trace(sigma.matrix @ probe_obs.effect_matrix(x)).real
    print(f"outcome {x}: closed vs direct {max_abs(closed.matrix - direct.matrix):.2e}, "
          f"duality gap {abs(paired - closed.trace):.2e}")

print("\n=== The apparatus the model induces on its probe ===")
apparatus = apparatus_from_mm(model)
for i in range(2):
    atom_state = State(model.nd.context.atom(i))
    obs = apparatus.observable(atom_state)
    defect = max_abs(
        sum(obs.effect_matrix(x) for x in obs.labels) - np.eye(2)
    )
    print(f"atom {i}: apparatus observable completeness defect {defect:.2e}")

print("\n=== Remeasuring with the state-dependent meter ===")
family = remeasure_apparatus(model)
for x in family.labels:
    closed = family.effect(rho, x)
    oracle = remeasured_effect_by_substitution(model, rho, x)
    print(f"outcome {x}: closed vs substitution oracle {max_abs(closed - oracle):.2e}")
summed = sum(family.effect(rho, x) for x in family.labels)
dephased = model.nd.context.dephase(rho.matrix)
print("outcome sum equals dim_base times the dephased input:",
      max_abs(summed - model.dim_base * dephased))
