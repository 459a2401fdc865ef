"""
Instance diagnostics and the CTS regret bound
=============================================

Everything the bound needs is computed exactly by enumerating super arms:
gaps, triggering sets and the minimum triggering probability of every arm.
"""
from cmabpta import SuperArm, diagnose, make_blb, sampling_threshold, theorem1_bound

inst = make_blb(16, 2, 0.2, 0.15)
d = diagnose(inst)
print("optimal value", d.opt_value, "over", len(d.super_arms), "super arms")
print("largest gap", round(d.gap_max, 4), "smallest per-arm gap", round(min(d.gap_array()), 4))
print("p* =", d.p_star, " k~* =", d.k_tilde_star, " K~ =", d.K_tilde)

# how many samples of a bad slate before the posterior rules it out
bad = SuperArm((5, 6))
print("sampling threshold for", bad.arms, round(sampling_threshold(bad, d, 1.0, 1e-3, 100_000), 1))

# the three summands; the constant term dominates for small epsilon
for eps in (1e-3, 5e-3):
    b = theorem1_bound(d, B=1.0, epsilon=eps, rho=0.5, alpha=1.0, T=100_000)
    print(f"eps={eps}: log {b.log_term:.3g}  exploration {b.exploration_term:.3g}  "
          f"constant {b.constant_term:.3g}  total {b.total:.3g}")
