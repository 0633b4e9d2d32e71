"""Residual L-infinity norms as the stencil step shrinks.

Prints one row per step size for each scenario; with the order-4 stencil the
norms should fall by about 16 per halving until rounding takes over.
"""
import argparse

from madelung_ops.scenarios import (
    FreeParticleClosed,
    FreeParticleParams,
    WaveguideParams,
    waveguide_model,
)
from madelung_ops.verify import EQUATIONS, GridSpec, StencilConfig, all_residuals

CASES = {
    "free": (FreeParticleClosed(FreeParticleParams(0.1, 0.5, 0.8)), (-5, 5)),
    "n1": (waveguide_model(WaveguideParams(n=1)), (-4, 4)),
    "n2_pos": (waveguide_model(WaveguideParams(n=2)), (1, 4)),
    "n2_neg": (waveguide_model(WaveguideParams(n=2)), (-4, -1)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=4, choices=(2, 4))
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--h0", type=float, default=0.1)
    args = ap.parse_args()
    for name, (model, (lo, hi)) in CASES.items():
        grid = GridSpec(lo, hi, 41, 0.5, 9.5, 41)
        st = StencilConfig(args.h0, args.h0, args.order, gap_margin=0.0)
        prev = None
        print(f"# {name}")
        print("h         " + "  ".join(f"{eq:>22s}" for eq in EQUATIONS))
        for _ in range(args.levels):
            reps = all_residuals(model, grid, st)
            cells = []
            for eq in EQUATIONS:
                ratio = "" if prev is None else f"(x{prev[eq] / reps[eq].linf:5.1f})"
                cells.append(f"{reps[eq].linf:.3e} {ratio:>9s}")
            print(f"{st.dx:<9.4g} " + "  ".join(f"{c:>22s}" for c in cells))
            prev = {eq: reps[eq].linf for eq in EQUATIONS}
            st = st.halved()


if __name__ == "__main__":
    main()
