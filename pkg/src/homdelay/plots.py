"""Figure rendering for the CLI report paths (headless Agg backend)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def render_compare_figure(times, hom_norms, envelopes: dict, v_series,
                          comparisons: dict, path: str, delta: float = None) -> str:
    """Two stacked panels: response vs decay envelopes, and the
    functional value vs its comparison solutions. `envelopes` and
    `comparisons` map pipeline name -> series."""
    fig, (ax_norm, ax_val) = plt.subplots(2, 1, figsize=(8.0, 7.0), sharex=True)

    ax_norm.plot(times, hom_norms, color="black", lw=1.2, label="response hom-norm")
    for name, series in sorted(envelopes.items()):
        ax_norm.plot(times, series, lw=1.0, ls="--", label=f"envelope ({name})")
    if delta is not None:
        ax_norm.axhline(delta, color="gray", lw=0.8, ls=":", label="functional radius")
    ax_norm.set_yscale("log")
    ax_norm.set_ylabel("homogeneous norm")
    ax_norm.legend(loc="upper right", fontsize=8)
    ax_norm.grid(True, which="both", alpha=0.3)

    ax_val.plot(times, v_series, color="black", lw=1.2, label="functional v")
    for name, series in sorted(comparisons.items()):
        ax_val.plot(times, series, lw=1.0, ls="--", label=f"comparison u ({name})")
    ax_val.set_yscale("log")
    ax_val.set_xlabel("time")
    ax_val.set_ylabel("functional value")
    ax_val.legend(loc="upper right", fontsize=8)
    ax_val.grid(True, which="both", alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_simulation_figure(times, states, hom_norms, path: str) -> str:
    """State components and the homogeneous norm over time."""
    fig, (ax_state, ax_norm) = plt.subplots(2, 1, figsize=(8.0, 6.0), sharex=True)
    for i in range(states.shape[1]):
        ax_state.plot(times, states[:, i], lw=1.0, label=f"x{i + 1}")
    ax_state.set_ylabel("state")
    ax_state.legend(loc="upper right", fontsize=8)
    ax_state.grid(True, alpha=0.3)

    ax_norm.plot(times, hom_norms, color="black", lw=1.2)
    ax_norm.set_yscale("log")
    ax_norm.set_xlabel("time")
    ax_norm.set_ylabel("homogeneous norm")
    ax_norm.grid(True, which="both", alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
