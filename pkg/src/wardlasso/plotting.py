"""SVG rendering of sweep results."""

from __future__ import annotations

import warnings

import numpy as np

CONTOUR_LEVELS = (0.75, 0.95)


def sweep_svg(result, path, metric="auc_roc"):
    """Per-method AUC maps over (smoothing, cluster size) with contours at
    0.75 and 0.95, plus a best-method map. Output is byte-reproducible."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cs, sigmas, methods = result.c_values, result.sigma_values, result.methods
    means = np.array([[[result.cell(c, s, m, metric).mean() for s in sigmas]
                       for c in cs] for m in methods])
    with matplotlib.rc_context({"svg.hashsalt": "wardlasso", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(2, len(methods), figsize=(3.2 * len(methods), 6),
                                 squeeze=False)
        xs, ys = np.arange(len(sigmas)), np.arange(len(cs))
        for i, m in enumerate(methods):
            ax = axes[0, i]
            ax.imshow(means[i], origin="lower", vmin=0.5, vmax=1.0, cmap="viridis",
                      aspect="auto")
            if len(sigmas) > 1 and len(cs) > 1:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", UserWarning)
                    for level, style in zip(CONTOUR_LEVELS, ("--", "-")):
                        cset = ax.contour(xs, ys, means[i], levels=[level],
                                          colors="white", linestyles=style)
                        cset.set_gid(f"contour-{m}-{level}")
            ax.set_title(m, fontsize=9)
            ax.set_xticks(xs, [f"{s:g}" for s in sigmas])
            ax.set_yticks(ys, [str(c) for c in cs])
            ax.set_xlabel("smoothing")
            ax.set_ylabel("cluster size")
        best = means.argmax(axis=0)
        ax = axes[1, 0]
        ax.imshow(best, origin="lower", cmap="tab10", vmin=0, vmax=9, aspect="auto")
        for yi in ys:
            for xi in xs:
                ax.text(xi, yi, methods[best[yi, xi]], ha="center", va="center",
                        fontsize=6)
        ax.set_title("best method", fontsize=9)
        ax.set_xticks(xs, [f"{s:g}" for s in sigmas])
        ax.set_yticks(ys, [str(c) for c in cs])
        for ax in axes[1, 1:]:
            ax.axis("off")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
