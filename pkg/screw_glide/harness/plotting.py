import logging

import matplotlib as mpl
mpl.use('Agg', force=False)
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

# fixed salt and no date so repeated runs produce identical files
mpl.rcParams['svg.hashsalt'] = 'screw-glide'

REGIME_COLOURS = {
    'rest': 'tab:gray',
    'single': 'tab:blue',
    'sliding': 'tab:red',
    'crossing': 'tab:green',
    'source-branch': 'tab:purple',
}


def _glide_grid(ax, sys, extent):
    for g in sys.directions:
        ax.plot([0.0, extent * g[0]], [0.0, extent * g[1]], color='0.85', linewidth=0.6, zorder=0)


def render_svg(path, sys, paths, annotations=None, circles=(), points=None):
    """
    Render sampled paths to an SVG file.

    Args:
        path (str): Output file
        sys (GlideSystem): Glide directions drawn as a background grid (2-D only)
        paths (dict): label -> (n_samples, n_particles, 2) array, or a
            (positions, regime kinds) pair for regime-coloured segments
        annotations (dict, optional): Text lines written in the corner
        circles (iterable): (center, radius) ambiguity sets to outline
        points (dict, optional): label -> (m, 2) array drawn as markers

    Returns:
        str: The path written
    """
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    extent = 0.0
    for label, data in paths.items():
        regimes = None
        if isinstance(data, tuple):
            data, regimes = data
        data = np.asarray(data, dtype=float)
        if data.ndim == 2:
            data = data[:, None, :]
        extent = max(extent, float(np.abs(data).max()))
        for i in range(data.shape[1]):
            xy = data[:, i, :2]
            if regimes is None:
                ax.plot(xy[:, 0], xy[:, 1], linewidth=1.0, label=label if i == 0 else None)
                continue
            for k in range(len(xy) - 1):
                ax.plot(xy[k:k + 2, 0], xy[k:k + 2, 1], linewidth=1.4,
                        color=REGIME_COLOURS.get(regimes[k][i], 'black'))
    for label, xy in (points or {}).items():
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if len(xy):
            ax.scatter(xy[:, 0], xy[:, 1], s=6, label=label)
            extent = max(extent, float(np.abs(xy).max()))
    for center, radius in circles:
        ax.add_patch(plt.Circle(center, radius, fill=False, linestyle=':', color='0.4'))
        extent = max(extent, float(np.abs(center).max()) + radius)
    if sys.dimension == 2:
        _glide_grid(ax, sys, 1.1 * max(extent, 1e-3))
    if annotations:
        text = '\n'.join(f"{k}: {v}" for k, v in annotations.items())
        ax.text(0.02, 0.98, text, transform=ax.transAxes, va='top', fontsize=7, family='monospace')
    ax.set_aspect('equal')
    if points or any(not isinstance(d, tuple) for d in paths.values()):
        ax.legend(loc='lower right', fontsize=7)
    try:
        fig.savefig(path, format='svg', metadata={'Date': None})
    except OSError as e:
        raise OSError(f"Error writing {path}: {e}") from e
    finally:
        plt.close(fig)
    logger.info("Wrote %s", path)
    return path
