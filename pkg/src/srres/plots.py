"""Figure rendering for the CLI report path.

Everything draws to files through the Agg backend; nothing here opens a
window or touches the exact-arithmetic pipeline.  Inputs are the same JSON
payloads the CLI prints, so figures always match the accompanying report.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _finish(fig, directory: str, name: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def betti_heatmap(rows, directory: str, name: str = "betti.png") -> str:
    """Heatmap of total-degree Betti numbers from (i, j, beta) triples."""
    if rows:
        imax = max(r[0] for r in rows)
        jmax = max(r[1] for r in rows)
    else:
        imax = jmax = 0
    grid = [[0] * (imax + 1) for _ in range(jmax + 1)]
    for i, j, b in rows:
        grid[j][i] += b
    fig, ax = plt.subplots(figsize=(1.2 + 0.6 * (imax + 1), 1.2 + 0.5 * (jmax + 1)))
    im = ax.imshow(grid, origin="lower", cmap="Blues", aspect="auto")
    for j, row in enumerate(grid):
        for i, b in enumerate(row):
            if b:
                ax.text(i, j, str(b), ha="center", va="center", fontsize=9)
    ax.set_xlabel("homological degree i")
    ax.set_ylabel("internal degree j")
    ax.set_xticks(range(imax + 1))
    ax.set_yticks(range(jmax + 1))
    ax.set_title("multigraded Betti numbers (totals)")
    fig.colorbar(im, ax=ax, shrink=0.8)
    return _finish(fig, directory, name)


def formality_lattice(entries, m: int, directory: str, name: str = "ef_lattice.png") -> str:
    """Scatter of formality verdicts over all coordinate subsets, by size."""
    layers = {}
    for verts, formal in entries:
        layers.setdefault(len(verts), []).append((tuple(verts), formal))
    fig, ax = plt.subplots(figsize=(1.5 + 0.35 * max(len(v) for v in layers.values()), 1.0 + 0.7 * (m + 1)))
    for size, items in sorted(layers.items()):
        items.sort()
        for k, (verts, formal) in enumerate(items):
            x = k - (len(items) - 1) / 2.0
            color = "#2a7e3b" if formal else "#b03030"
            ax.scatter([x], [size], s=160, c=color, zorder=3)
            label = "".join(map(str, verts)) if verts else "()"
            ax.annotate(label, (x, size), ha="center", va="center", fontsize=6, color="white", zorder=4)
    ax.set_ylabel("|I|")
    ax.set_yticks(range(m + 1))
    ax.set_xticks([])
    ax.set_title("equivariant formality by coordinate subset")
    return _finish(fig, directory, name)


def page_grid(pages_blob: dict, directory: str, name: str = "mvss_pages.png") -> str:
    """One panel per computed page: nonzero spot dimensions on the (p, q) grid."""
    pages = pages_blob.get("pages", [])
    n = max(1, len(pages))
    fig, axes = plt.subplots(1, n, figsize=(2.4 * n, 2.8), squeeze=False)
    for ax, page in zip(axes[0], pages or [{"r": 1, "dims": []}]):
        dims = page.get("dims", [])
        for spot in dims:
            ax.scatter([spot["p"]], [spot["q"]], s=90, c="#2a4d7e", zorder=3)
            ax.annotate(str(spot["dim"]), (spot["p"], spot["q"]), ha="center", va="bottom",
                        xytext=(0, 5), textcoords="offset points", fontsize=8)
        for d in page.get("differentials", []):
            r = page["r"]
            ax.annotate(
                "",
                xy=(d["p"] - r + 1, d["q"] + r),
                xytext=(d["p"], d["q"]),
                arrowprops={"arrowstyle": "->", "color": "#b03030"},
            )
        ax.set_title(f"page {page['r']}")
        ax.set_xlabel("p")
        ax.set_ylabel("q")
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _finish(fig, directory, name)
