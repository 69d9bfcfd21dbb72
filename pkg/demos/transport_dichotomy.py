"""Velocity averages of transport waves with and without velocity dependence.

With a(y) = y the averages lose mass as n grows (compact); with a constant
speed they keep it (non-compact).
"""

import numpy as np

from hdistlab import sequences
from hdistlab.averaging import compactness_diagnostic, velocity_average
from hdistlab.grid import GridSpec
from hdistlab.profiles import bump

LADDER = (4, 8, 12, 16, 24)


def rho(y):
    return bump((np.asarray(y) - 0.5) / 0.3)


def main() -> None:
    spec = GridSpec.box((96, 96, 64), dim_y=1)
    ys = spec.coords(2)
    for label, a in (("a(y) = y", ys), ("a(y) = 1", np.ones_like(ys))):
        fam = sequences.transport_wave(spec, a, indices=LADDER)
        avgs = {n: velocity_average(fam(n), rho(ys)) for n in fam.indices}
        rep = compactness_diagnostic(avgs)
        norms = "  ".join(f"{v:.3e}" for v in rep.norms_l2)
        print(f"{label}: L2 norms of averages {norms}")
        print(f"{' ' * len(label)}  verdict {rep.verdict}")


if __name__ == "__main__":
    main()
