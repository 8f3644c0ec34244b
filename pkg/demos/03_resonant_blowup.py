# %% [markdown]
# # Sources at a resonant frequency
#
# At ``omega`` equal to the first zero of ``j_1`` the cloaked region supports
# a trapped field.  What happens next depends on whether the interior current
# couples to that trapped field.

# %%
from cloaksim import experiments as ex
from cloaksim import mode_solver as ms
from cloaksim.vsh import ModeIndex

w1 = ex.first_resonance(1)
grid = ex.default_rho_grid()
space = ms.resonance_space(w1)

# %% [markdown]
# The coupling is an inner product of the current with each trapped field.
# A current on the ``n = 1`` channel couples; one on ``n = 2`` does not.

# %%
for n in (1, 2):
    src = ms.InteriorSource(ModeIndex(n, 1))
    pairings = ms.compatibility(src, space)
    print(f"n={n}: largest pairing {max(abs(p) for p in pairings):.3e}, "
          f"compatible={ms.is_compatible(pairings)}")

# %% [markdown]
# ## Incompatible current
#
# The cloak leaks like ``rho`` and the energy stored inside grows like
# ``1/rho``: the field piles up in the trapped mode.

# %%
records = ex.run_sweep("interior_resonant_incompatible", w1, grid)
ext = ex.fit_rate(records, "exterior_norm", skip=ex.FIT_SKIP)
inn = ex.fit_rate(records, "interior_norm", skip=ex.FIT_SKIP)
print(f"exterior slope {ext.slope:.3f}, interior slope {inn.slope:.3f}")

# %% [markdown]
# The boundary pairing of the solved field with the trapped mode stays equal
# to the trapped mode's energy, whatever ``rho`` is.

# %%
mode = ModeIndex(1, 1)
for rho in grid[::4]:
    sol = ms.solve(ms.ScenarioConfig(rho, w1, ms.InteriorSource(mode)))
    print(f"rho={rho:.3e}  pairing = {ms.boundary_pairing(sol, mode).real:.12f}")

# %% [markdown]
# ## Compatible current
#
# Without coupling there is no pile-up, and visibility is back to a fast
# power of ``rho``.

# %%
records = ex.run_sweep("interior_resonant_compatible", w1, grid)
print(f"exterior slope {ex.fit_rate(records, 'exterior_norm', skip=ex.FIT_SKIP).slope:.3f}")
