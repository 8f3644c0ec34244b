# %% [markdown]
# # How visible is a nearly perfect cloak?
#
# The regularised cloak blows up a ball of radius ``rho`` instead of a point,
# so it is only approximately invisible.  Here we measure the scattered field
# in the annulus ``2 < |x| < 4`` while ``rho`` shrinks and read the decay rate
# off a log-log fit.

# %%
from cloaksim import experiments as ex

grid = ex.default_rho_grid()  # 2^-4 .. 2^-12
print("rho grid:", ", ".join(f"{r:.2e}" for r in grid))

# %% [markdown]
# ## Plane-wave illumination
#
# An incoming plane wave sees the small ball as a tiny dipole, and the
# scattered field on the annulus has size ``~ rho^3``.

# %%
records = ex.run_sweep("plane_wave", 1.0, grid)
fit = ex.fit_rate(records, "exterior_norm", skip=ex.FIT_SKIP)
for r in records:
    print(f"rho={r.rho:.3e}  ||E_c|| on annulus = {r.exterior_norm:.4e}")
print(f"slope {fit.slope:.3f}, R^2 {fit.r_squared:.6f}")

# %% [markdown]
# ## A source hidden inside the cloak
#
# A current ``j_1(r) V_1^1`` placed in the cloaked region leaks out more
# strongly.  The magnetic field outside decays only like ``rho^2``.

# %%
records = ex.run_sweep("interior_nonresonant", 1.0, grid)
fit = ex.fit_rate(records, "exterior_norm", skip=ex.FIT_SKIP)
print(f"H-norm slope {fit.slope:.3f}")

# %% [markdown]
# The interior field approaches a fixed limit as ``rho -> 0``.  Its distance
# to that limit halves with each halving of ``rho``.

# %%
for r in records:
    print(f"rho={r.rho:.3e}  gap to limit = {r.limit_gap:.4e}")
