"""Write foliation portraits (CSV + SVG) for the bundled folded examples.

Usage: python3 scripts/portraits.py [OUTDIR]
"""
import pathlib
import sys

from frontal.cli import main as frontal

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
WINDOW = "--window=-0.4,0.4,-0.4,0.4"


def run(outdir):
    outdir.mkdir(parents=True, exist_ok=True)
    for name in ("saddle", "focus"):
        for bde in ("as", "ch"):
            stem = outdir / f"{name}_{bde}"
            code = frontal(["foliate", "-s", str(DATA / f"{name}.gen"), "--bde", bde, WINDOW,
                            "--seeds", "8", "--out", f"{stem}.csv", "--svg", f"{stem}.svg"])
            print(f"{stem}.svg: exit {code}")


if __name__ == "__main__":
    run(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "portraits"))
