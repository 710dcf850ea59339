"""Hemisphere patch layouts.

Builds spiral layouts of a few sizes, shows that every patch center sits on
the hemisphere, and reports the spacing statistics that size the rendered
rectangles. With matplotlib installed, saves a 3D scatter of the n=100 layout.
"""

import math

import numpy as np

from hemicap import build_hemisphere_layout, min_pairwise_separation

for n in (25, 100, 400):
    layout = build_hemisphere_layout(n, radius=0.4)
    norms = np.linalg.norm(layout.centers, axis=1)
    sep = min_pairwise_separation(layout.centers / 0.4)
    print(f"n={n:4d}  radius spread {norms.min():.12f}..{norms.max():.12f} m  "
          f"min separation {math.degrees(sep):6.2f} deg  "
          f"patch half-angle {math.degrees(layout.patch_half_angle):5.2f} deg")

layout = build_hemisphere_layout(100, radius=0.4)
print("\nfirst five centers (x, y, z):")
for center in layout.centers[:5]:
    print("  ", np.round(center, 4))

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="3d")
    xs, ys, zs = layout.centers.T
    ax.scatter(xs, zs, ys, c=ys, cmap="viridis", s=25)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("z [m]")
    ax.set_zlabel("y [m] (up)")
    ax.set_title("spiral hemisphere layout, n=100")
    fig.savefig("hemisphere_layout.png", dpi=120)
    print("\nsaved hemisphere_layout.png")
except ImportError:
    print("\nmatplotlib not available; skipping the plot")
