#!/usr/bin/env python
# Estimate the Schur-test constants for the tail of the kernel operator and
# compare the product with the truncated operator norm it should dominate
from bargmann_lab import fock, functionals, quadrature, symbols

rule = quadrature.build_product_rule(1, 24)
spec = fock.TruncationSpec(1, 6, 2)

ball = symbols.make_symbol({"family": "ball_indicator", "R": 1.0}, 1, 2)
for r in (1.0, 2.0, 3.0):
    rep = functionals.schur_tail_report(ball, r, spec, rule)
    print(f"r={r:g}  alpha={rep.alpha_hat:.3g}  beta={rep.beta_hat:.3g}  "
          f"tail^2={rep.tail_norm ** 2:.3g}  bound={rep.bound:.3g}  passes={rep.passes}")
    # printed constants carry no decay in r and are shown only for comparison
    print(f"      closed-form alpha={rep.alpha_printed:.3g}  beta={rep.beta_printed:.3g}")

# a constant symbol does not decay, so beta stays flat
const = symbols.make_symbol({"family": "constant"}, 1, 4)
for r in (1.0, 3.0):
    print(r, functionals.schur_tail_report(const, r, fock.TruncationSpec(1, 6, 4), rule).beta_hat)
