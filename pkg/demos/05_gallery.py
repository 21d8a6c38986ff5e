"""Draw a gallery of random Kac lemniscates as SVG files.

One figure per degree, with root markers and the unit circle for scale:
the curve concentrates near the unit circle as the degree grows while a
large component frequently survives.  Files land in ./gallery/.
"""

import os

from lemnilab import EnsembleSpec, extract_lemniscate, roots, sample
from lemnilab.cli import emit_svg
from lemnilab.montecarlo import MC_GRID, derive_trial_seed

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "gallery")
os.makedirs(OUT, exist_ok=True)

for n in (10, 20, 30, 40, 50, 60):
    spec = EnsembleSpec("kac", n)
    p = sample(spec, derive_trial_seed(2026, n, 0))
    curve = extract_lemniscate(p, MC_GRID)
    path = os.path.join(OUT, f"kac_{n:03d}.svg")
    emit_svg(curve, roots(p), path)
    print(f"degree {n:>3}: b0 = {curve.b0:>2}, length = {curve.total_length:7.4f}  -> {path}")
