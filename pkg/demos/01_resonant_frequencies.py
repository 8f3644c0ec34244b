# %% [markdown]
# # Which frequencies make the cloak resonate?
#
# Inside the cloaked region the material is vacuum, so a field can live there
# without leaking out whenever some spherical Bessel function ``j_n`` vanishes
# on the unit sphere.  We tabulate those frequencies and look at how close
# an everyday frequency like ``omega = 1`` is to any of them.

# %%
import numpy as np

from cloaksim import mode_solver as ms
from cloaksim import specfun as sf

# %% [markdown]
# The first few zeros of ``j_1``, ``j_2`` and ``j_3``:

# %%
for n in (1, 2, 3):
    zeros = sf.bessel_j_zeros(n, 4, 20.0)
    print(f"j_{n}:", ", ".join(f"{z.x:.10f}" for z in zeros))

# %% [markdown]
# Every zero is a resonance.  The resonance space at the first zero of
# ``j_1`` has six members: three values of ``m`` times two polarisations.

# %%
w1 = sf.bessel_j_zeros(1, 1, 5.0)[0].x
space = ms.resonance_space(w1)
print("omega =", w1, "carries", len(space.basis), "resonant fields on (n, m) =", space.pairs)

# %% [markdown]
# A naive test ``|j_n(omega)| < 1e-12`` would call ``omega = 1`` resonant for
# large ``n``, because ``j_n(1)`` is tiny there.  The library measures the
# distance to a zero relative to the local size of ``j_n`` instead.

# %%
for n in (1, 6, 12, 20):
    print(f"n={n:2d}  |j_n(1)| = {abs(float(sf.sph_bessel_j(n, 1.0))):.2e}  "
          f"relative measure = {ms.resonance_measure(n, 1.0):.3f}")
