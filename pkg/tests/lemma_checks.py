"""Per-sample checks of the three quantitative singular-value inequalities.

Each check evaluates both sides with the library's own operations on seeded
random matrix pairs and returns the worst relative slack
max((lhs - rhs)/rhs); values <= 0 mean the inequality held with room to
spare.  Gap indices cycle through 1..d-1 with the sample index, so a run of
n samples exercises every index.
"""

import numpy as np

from anosov_lab.linalg import (
    Subspace,
    apply_matrix,
    cartan,
    min_angle,
    sin_distance,
)

REL_SLACK = 1e-9


def families_slack(seed, d, n):
    """Worst relative slack of all three inequality families over n seeded
    pairs in dimension d.

    Families (for the cycling gap index p, alpha = angle(U_p(h), U_{d-p}(g^-1))):
      product:      d(U_p(gh), U_p(g))   <= |h||h^-1| gap_p(g)
                    d(U_p(gh), g U_p(h)) <= |g||g^-1| gap_p(h)
      contraction:  d(g(P), U_p(g))      <= gap_p(g) / sin angle(P, U_{d-p}(g^-1))
      growth:       sigma_p(gh)    >= sin(alpha) sigma_p(g) sigma_p(h)
                    sigma_{p+1}(gh) <= sigma_{p+1}(g) sigma_{p+1}(h) / sin(alpha)
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf

    def rel(lhs, rhs):
        return (lhs - rhs) / max(abs(rhs), 1e-300)

    for i in range(n):
        p = 1 + i % (d - 1)
        g = rng.normal(size=(d, d)) @ np.diag(np.exp(rng.uniform(-2, 2, d)))
        h = rng.normal(size=(d, d)) @ np.diag(np.exp(rng.uniform(-2, 2, d)))
        dg, dh, dgh = cartan(g), cartan(h), cartan(g @ h)
        u_g = Subspace(dg.left[:, :p])
        u_h = Subspace(dh.left[:, :p])
        u_gh = Subspace(dgh.left[:, :p])
        repeller = Subspace(dg.right[:, p:])  # U_{d-p}(g^-1): last right columns

        # product bounds
        worst = max(worst, rel(
            sin_distance(u_gh, u_g),
            (dh.sigma[0] / dh.sigma[-1]) * dg.gap_ratio(p),
        ))
        worst = max(worst, rel(
            sin_distance(u_gh, apply_matrix(g, u_h)),
            (dg.sigma[0] / dg.sigma[-1]) * dh.gap_ratio(p),
        ))

        # contraction bound on a random transverse subspace
        pf = Subspace.span(rng.normal(size=(d, p)))
        sin_ang = np.sin(min_angle(pf, repeller))
        if sin_ang > 1e-3:
            worst = max(worst, rel(
                sin_distance(apply_matrix(g, pf), u_g),
                dg.gap_ratio(p) / sin_ang,
            ))

        # growth bounds
        sin_alpha = np.sin(min_angle(u_h, repeller))
        if sin_alpha > 1e-12:
            worst = max(worst, rel(
                sin_alpha * dg.sigma[p - 1] * dh.sigma[p - 1],
                dgh.sigma[p - 1],
            ))
            worst = max(worst, rel(
                dgh.sigma[p],
                dg.sigma[p] * dh.sigma[p] / sin_alpha,
            ))
    return worst
