#!/usr/bin/env python3
"""Self-normalized moments two ways, and quadratic-form covariances.

Product moments E Y_1^{e_1} ... Y_r^{e_r} of Y = Z/||Z|| are computed by
Monte Carlo and, independently, by the deterministic Laplace-transform
integral; the table shows their agreement in standard-error units. The
second table compares Monte Carlo covariances of Y'AY against the
finite-fourth-moment formula. Prints to stdout only.
"""

import numpy as np

import signspectra as ss
from signspectra.selfnorm import (
    MomentSpec,
    integral_moment,
    mc_moment,
    quadform_stats,
    theoretical_quadform_cov,
)

print("product moments, Monte Carlo (2e5 reps) vs deterministic integral")
print(f"{'population':<14} {'exponents':<10} {'p':>5} {'monte carlo':>14} "
      f"{'integral':>14} {'z':>6}")
for name, dist in (("gaussian", ss.gaussian()), ("t(5)", ss.student_t(5.0))):
    for exps in ((2,), (4,), (2, 2)):
        for p in (16, 64):
            spec = MomentSpec(exps, p)
            mc = mc_moment(dist, spec, 200_000, ss.derive_stream(29, p + len(exps)))
            integ = integral_moment(dist, spec)
            z = (mc.value - integ.value) / mc.stderr
            print(f"{name:<14} {str(exps):<10} {p:>5} {mc.value:>14.6e} "
                  f"{integ.value:>14.6e} {z:>+6.2f}")

print()
print("quadratic form Y'AY: Monte Carlo covariance vs formula (p = 128)")
p = 128
G = ss.derive_stream(31, 0).standard_normal((p, p))
A = 0.5 * (G + G.T)
A /= np.linalg.norm(A, 2)
for name, dist, tau in (("gaussian", ss.gaussian(), 3.0), ("t(6)", ss.student_t(6.0), 6.0)):
    st = quadform_stats(dist, p, A, A, 2000, ss.derive_stream(31, ord(name[0])))
    th = theoretical_quadform_cov(A, A, tau, p)
    print(f"{name:<10} var(Y'AY): mc {st.cov_ab:.4e} +- {st.cov_ab_stderr:.1e}, "
          f"formula {th:.4e}")
