"""Write every corpus contract out as plain files the CLI can read.

    python scripts/export_corpus.py OUTDIR

Per fixture: NAME.hex, NAME.sol, NAME.srcmap, NAME.layout.json, NAME.sigs.
"""

import argparse
from pathlib import Path

from gasbound import corpus


def export(outdir: Path) -> list:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, fx in corpus.FIXTURES.items():
        files = {
            f"{name}.hex": fx.code.hex() + "\n",
            f"{name}.sol": fx.source,
            f"{name}.srcmap": fx.srcmap + "\n",
            f"{name}.layout.json": fx.layout.to_json() + "\n",
            f"{name}.sigs": "".join(s + "\n" for s in fx.signatures),
        }
        for fname, text in files.items():
            (outdir / fname).write_text(text)
            written.append(outdir / fname)
    return written


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    args = ap.parse_args()
    paths = export(args.outdir)
    print(f"wrote {len(paths)} files to {args.outdir}")


if __name__ == "__main__":
    main()
