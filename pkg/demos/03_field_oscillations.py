"""What a Z field does to the dephased return probability.

Without a field, the run-averaged return probability settles to 1/2 once
the coupling tone has damped away.  A field m adds an oscillation at
frequency 4m whose amplitude 1/8 never decays: the field Hamiltonian
carries no noise, so ensemble averaging cannot touch its phases.  The
coherence, by contrast, is blind to the field.
"""

import numpy as np

from spinsense import NoiseEnsemble, SystemParams, analytic_l1_coherence, simulate_table

ensemble = NoiseEnsemble(n_samples=100_000, master_seed=11)
times = np.linspace(0.0, 20.0, 401)

tables = {}
for m in (0.0, 0.7):
    params = SystemParams(j0=1.0, epsilon=0.5, m=m)
    tables[m] = simulate_table(params, times, ensemble)
    tail = tables[m]["pr_mc"][times > 10.0]
    print(
        f"m = {m}: late-time return probability in [{tail.min():.4f}, {tail.max():.4f}] "
        f"(swing {tail.max() - tail.min():.4f})"
    )

print("\nwithout a field the trace flattens at ~0.5; with one it keeps a 1/4 peak-to-peak swing")
print("whose frequency 4m = 2.8 encodes the field.\n")

coh0 = analytic_l1_coherence(SystemParams(1.0, 0.5, 0.0), times)
coh7 = analytic_l1_coherence(SystemParams(1.0, 0.5, 0.7), times)
print(f"coherence with vs without field: identical ({np.abs(coh0 - coh7).max():.1e}) --")
print("the coherence cannot see the field; only the return probability can.")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    for m, style in ((0.0, "C0"), (0.7, "C1")):
        axes[0].plot(times, tables[m]["pr_mc"], style, lw=1, label=f"m = {m}")
        axes[1].plot(times, tables[m]["c_norm_mc"], style, lw=1, label=f"m = {m}")
    axes[0].set_ylabel("return probability")
    axes[0].legend(loc="upper right")
    axes[1].set_ylabel("normalized coherence")
    axes[1].set_xlabel("t")
    axes[1].legend(loc="upper right")
    fig.tight_layout()
    fig.savefig("demos_03_field_oscillations.png", dpi=150)
    print("wrote demos_03_field_oscillations.png")
except ImportError:
    print("matplotlib not installed; skipping the figure")
