"""Admission quantities: minimum intensity, INR threshold, safety radii.

Run:  python3 demos/admission.py
"""

from cachestream import SimConfig
from cachestream.admission import admit_new_link, eta, min_intensity, params_from_config
from cachestream.experiments import feasibility, feasibility_report

cfg = SimConfig()
print(feasibility_report(cfg))

# Below lambda_min the discovery probability drops under eta_min.
lam_min = min_intensity(cfg)
for scale in (0.5, 1.0, 2.0):
    p = params_from_config(cfg, lambda_n=scale * lam_min)
    print(f"lambda_n = {scale:.1f} x lambda_min: eta = {eta(p, cfg.psi, cfg.upsilon):.4f}")

# Sparse highest-quality nodes once lambda grows to 0.6 with caching case 1.
for lam in (0.2, 0.4, 0.6, 0.8):
    f = feasibility(cfg.replace(lam=lam))
    flags = ["below" if low else "ok" for low in f.below_min]
    print(f"lambda = {lam}: per-type intensity "
          + ", ".join(f"{x:.4f} ({s})" for x, s in zip(f.type_intensity, flags)))

f = feasibility(cfg)
print(admit_new_link(cfg.upsilon, f.rho, [2 * f.R_U, 3 * f.R_U], f.R_U))
print(admit_new_link(cfg.upsilon, f.rho, [0.5 * f.R_U], f.R_U))
