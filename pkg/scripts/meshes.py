"""Write OBJ meshes of the pure-h second-kind examples (h = v^k/k!, k = 4, 5, 6).

The k = 4 surface has a self-intersection curve visible near the origin.
Usage: python3 scripts/meshes.py [OUTDIR]
"""
import pathlib
import sys

from frontal.cli import main as frontal

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def run(outdir):
    outdir.mkdir(parents=True, exist_ok=True)
    for k in (4, 5, 6):
        target = outdir / f"pure_h{k}.obj"
        code = frontal(["mesh", "-s", str(DATA / f"pure_h{k}.gen"), "--window=-1,1,-1.5,1.5",
                        "--res", "60x90", "-o", str(target)])
        print(f"{target}: exit {code}")


if __name__ == "__main__":
    run(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "meshes"))
