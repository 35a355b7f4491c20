"""Run the four bundled example mixtures end to end and write tables and plots.

    python scripts/reproduce_examples.py --out results/

Per example this writes the topography report, the elevation profile and
Pi curve for each pair (K = 2), or the simplex contour grid (K = 3).
SVGs are written only when matplotlib is importable.
"""

from __future__ import annotations

import argparse
import importlib.util
from pathlib import Path

from ridgetopo import cli
from ridgetopo.model import FIXTURE_DIR

HAVE_MPL = importlib.util.find_spec("matplotlib") is not None


def run(*argv) -> None:
    code = cli.main([str(a) for a in argv])
    if code != 0:
        raise SystemExit(f"ridgetopo {' '.join(map(str, argv))} exited with {code}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--resolution", type=int, default=400)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for n in (1, 2, 3, 4):
        src = FIXTURE_DIR / f"example{n}.json"
        stem = args.out / f"example{n}"
        print(f"example {n}:")
        run("analyze", src, "--out", f"{stem}_report.json", "--resolution", args.resolution)
        if n <= 2:
            svg = ["--svg", f"{stem}_elevation.svg"] if HAVE_MPL else []
            run("elevation", src, "--csv", f"{stem}_elevation.csv", "--x", "arclength", *svg)
            svg = ["--svg", f"{stem}_pi.svg"] if HAVE_MPL else []
            run("pi", src, "--csv", f"{stem}_pi.csv", "--bands", f"{stem}_bands.json", "--level", 0.5, *svg)
            svg = ["--svg", f"{stem}_kappa.svg"] if HAVE_MPL else []
            run("curvature", src, "--csv", f"{stem}_kappa.csv", "--out", f"{stem}_closed_form.json", *svg)
        else:
            svg = ["--svg", f"{stem}_contour.svg"] if HAVE_MPL else []
            run("contour", src, "--resolution", args.resolution, "--csv", f"{stem}_contour.csv", *svg)
            for i, j in ((1, 2), (2, 3), (1, 3)):
                run("pi", src, "--pair", i, j, "--bands", f"{stem}_bands_{i}{j}.json", "--level", 0.5)
            run("linkage", src, "--out", f"{stem}_linkage.json", "--dot", f"{stem}_linkage.dot")


if __name__ == "__main__":
    main()
