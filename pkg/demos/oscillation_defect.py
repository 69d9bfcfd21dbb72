"""Defect of an oscillating family against a direction-sensitive symbol.

u_n = exp(2 pi i n k.x) chi(x) concentrates its energy on the direction
pi(k), so the sampled bilinear form tends to conj(psi(pi(k))) int |chi|^2.
"""

import numpy as np

from hdistlab import defect, sequences
from hdistlab.grid import GridSpec
from hdistlab.symbols import Anisotropy, SymbolOnManifold, project


def main() -> None:
    spec = GridSpec.box((128, 128))
    aniso = Anisotropy((1.0, 1.0))
    k = (1, 2)

    def chi(x, y):
        return np.sin(np.pi * x) ** 4 * np.sin(np.pi * y) ** 4

    fam = sequences.oscillation(spec, k, chi, (4, 8, 12, 16))
    psi = SymbolOnManifold(lambda e: e[..., 0] ** 2, "eta1^2")
    est = defect.hmeasure_sample(fam, fam, None, None, psi, aniso)

    X, Y = spec.x_mesh()
    weight = np.mean(np.abs(chi(X, Y)) ** 2)
    eta = project(np.array(k, dtype=float), aniso)
    expected = float(eta[0] ** 2) * weight
    for n, v in est.samples:
        print(f"n={n:3d}  B_n={v.real:+.10f}{v.imag:+.2e}i")
    print(f"limit   {est.limit.real:+.10f}  (residual {est.fit_residual:.1e}, {est.method})")
    print(f"oracle  {expected:+.10f}")
    print(f"verdict {est.verdict}, positive={est.extras['positive']}")


if __name__ == "__main__":
    main()
