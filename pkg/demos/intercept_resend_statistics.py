"""
How often does an intercept-resend attacker get caught?
=======================================================

Eve measures every transmitted half in a random basis and forwards what
she saw.  A check pair she touched comes out correlated one time in four,
so with n checks per message she is caught with probability
1 - (3/4)^n.  Here the Monte Carlo runs are put next to that formula.
"""

from cqsd import ChannelSpec, attack_stats, detection_probability_closed_form

spec = ChannelSpec("intercept_resend", p=1.0, scope="transmissions")

print(" n   simulated   closed form")
for n in (1, 2, 4, 8):
    report = attack_stats(1, n, spec, trials=4000, seed=n)
    print(f"{n:2d}   {report.abort_rate:.4f}      {detection_probability_closed_form(n, 1.0):.4f}")

# a timid attacker touching only a fraction of the qubits
for p in (0.1, 0.5):
    report = attack_stats(1, 4, ChannelSpec("intercept_resend", p=p, scope="transmissions"), 4000, seed=9)
    print(f"p={p}: abort rate {report.abort_rate:.4f} vs {report.closed_form_prediction:.4f}")

# messages that get through an attacked transmission are damaged
report = attack_stats(1, 1, spec, 4000, seed=3)
print(f"bit error rate on undetected messages: {report.mean_bit_error_rate:.3f}")
