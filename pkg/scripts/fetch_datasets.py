"""Place benchmark datasets where the shipped configs expect them.

No download locations are built in. Pass the URL or local path of an
archive (.tgz, .tar.gz, .zip) or of an already-unpacked directory:

    python3 scripts/fetch_datasets.py aifb https://example.org/aifb.tgz
    python3 scripts/fetch_datasets.py fb-toy ~/downloads/fb-toy/

Expected layout under ``data/`` (or ``--root``):

    aifb/   aifb_stripped.nt.gz  trainingSet.tsv  testSet.tsv
    mutag/  mutag_stripped.nt.gz trainingSet.tsv  testSet.tsv
    bgs/    bgs_stripped.nt.gz   trainingSet.tsv  testSet.tsv
    am/     am_stripped.nt.gz    trainingSet.tsv  testSet.tsv
    fb-toy/ train.txt valid.txt test.txt
    wn18/   train.txt valid.txt test.txt

Files are located anywhere inside the archive by name and copied into
place; the script exits non-zero listing anything it could not find.
"""

import argparse
import os
import shutil
import sys
import tarfile
import tempfile
import urllib.request
import zipfile

NC_FILES = ["{name}_stripped.nt.gz", "trainingSet.tsv", "testSet.tsv"]
LP_FILES = ["train.txt", "valid.txt", "test.txt"]
LAYOUT = {
    "aifb": NC_FILES,
    "mutag": NC_FILES,
    "bgs": NC_FILES,
    "am": NC_FILES,
    "fb-toy": LP_FILES,
    "wn18": LP_FILES,
}
DEFAULT_ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir, "data")


def fetch(source, workdir):
    """Local path for ``source``, downloading it first if it is a URL."""
    if "://" not in source:
        return os.path.expanduser(source)
    target = os.path.join(workdir, os.path.basename(source.split("?")[0]) or "download")
    with urllib.request.urlopen(source) as resp, open(target, "wb") as fh:
        shutil.copyfileobj(resp, fh)
    return target


def unpack(path, workdir):
    if os.path.isdir(path):
        return path
    out = os.path.join(workdir, "unpacked")
    if zipfile.is_zipfile(path):
        with zipfile.ZipFile(path) as zf:
            zf.extractall(out)
    elif tarfile.is_tarfile(path):
        with tarfile.open(path) as tf:
            if hasattr(tarfile, "data_filter"):
                tf.extractall(out, filter="data")
            else:  # interpreters without extraction filters
                tf.extractall(out)
    else:
        raise SystemExit(f"{path}: not a directory, zip or tar archive")
    return out


def find(tree, filename):
    for dirpath, _, files in os.walk(tree):
        if filename in files:
            return os.path.join(dirpath, filename)
    return None


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("dataset", choices=sorted(LAYOUT))
    p.add_argument("source", help="URL or local path of an archive or directory")
    p.add_argument("--root", default=DEFAULT_ROOT, help="data directory (default: data/ next to configs/)")
    args = p.parse_args(argv)

    dest = os.path.join(os.path.abspath(args.root), args.dataset)
    wanted = [f.format(name=args.dataset) for f in LAYOUT[args.dataset]]
    with tempfile.TemporaryDirectory() as work:
        tree = unpack(fetch(args.source, work), work)
        found = {f: find(tree, f) for f in wanted}
        missing = [f for f, path in found.items() if path is None]
        if missing:
            print(f"not found in {args.source}: {', '.join(missing)}", file=sys.stderr)
            return 1
        os.makedirs(dest, exist_ok=True)
        for f, path in found.items():
            shutil.copyfile(path, os.path.join(dest, f))
    print(f"{args.dataset}: {len(wanted)} files in {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
