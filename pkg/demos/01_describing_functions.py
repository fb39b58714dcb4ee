# %% [markdown]
# # Describing functions of reset elements
#
# A reset element behaves like a linear filter until its input crosses
# zero, at which point its state is scaled by gamma.  Driven by a sine,
# it produces the input frequency plus odd harmonics.  This script
# evaluates them in closed form and checks one case against simulation.

# %%
import math

import numpy as np

from resetdf import (SimConfig, describing_function, extract_harmonics,
                     make_clegg, make_gfore, make_gsore, simulate_element,
                     sweep)
from resetdf.approx import alpha_choice, beta_choice, kappa_choice
from resetdf.hosidf import log_grid

# %% [markdown]
# ## Clegg integrator
# An integrator that resets to zero keeps unit-like gain but lags by only
# about 38 degrees instead of 90.

# %%
clegg = make_clegg()
for w in (0.1, 1.0, 10.0):
    G1 = describing_function(clegg, w)
    print(f"w={w:5.1f}  |G1|*w={abs(G1) * w:.4f}  "
          f"phase={math.degrees(np.angle(G1)):.2f} deg")

# %%
# Third and fifth harmonics fall off as 1/n; even harmonics vanish.
print([round(abs(describing_function(clegg, 1.0, n)), 4) for n in (2, 3, 5)])

# %% [markdown]
# ## GFORE over frequency
# With alpha chosen from gamma, the element behaves like a low-pass filter
# whose high-frequency phase settles at -90 deg + atan(F).

# %%
g = 0.0
gfore = make_gfore(1.0, g, alpha_choice(g))
resp = sweep(gfore, log_grid(0.01, 100.0, 4), orders=(1, 3))
for w, m1, p1, m3 in zip(resp.omega, resp.magnitude_db(1), resp.phase_deg(1),
                         resp.magnitude_db(3)):
    print(f"{w:9.3f} rad/s  G1 {m1:7.2f} dB {p1:7.2f} deg   G3 {m3:7.2f} dB")

# %% [markdown]
# ## GSORE damping
# For second-order elements the damping beta = 1/(2 kappa) removes the
# dominant low-frequency harmonic.

# %%
k = kappa_choice(0.0)
for beta in (0.4, beta_choice(k), 1.0):
    G3 = describing_function(make_gsore(1.0, 0.0, k, beta), 0.05, 3)
    print(f"beta={beta:.4f}  |G3(0.05)|={abs(G3):.3e}")

# %% [markdown]
# ## Cross-check with the simulator

# %%
w = 0.7
f = w / (2 * math.pi)
spp = 2000
cfg = SimConfig.for_frequency(f, spp, settle_periods=20,
                              ref_phase=-w / (f * spp) / 2)
sim = extract_harmonics(simulate_element(gfore, cfg))
for n in (1, 3, 5):
    G = describing_function(gfore, w, n)
    print(f"n={n}  analytic {abs(G):.5f}  simulated {abs(sim[n]):.5f}")
