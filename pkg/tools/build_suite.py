"""Convert public copies of UCI datasets into the ARFF benchmark suite.

The sources are redistributed inside PyPI packages, which makes them
reachable from a plain package mirror:

* ``keel-ds``: KEEL's comma-separated copies (no header, class last)
* ``orange3``: Orange's ``heart_disease.tab`` (Cleveland heart disease)
* ``scikit-learn``: the OpenML zoo fixture used by its test suite

Usage::

    pip download keel-ds orange3 --no-deps -d /tmp/wheels
    python tools/build_suite.py --wheels /tmp/wheels --out tests/data/suite
"""

from __future__ import annotations

import argparse
import gzip
import io
import zipfile
from pathlib import Path

import numpy as np

from boostbench.dataset import Attribute, Dataset, NOMINAL, NUMERIC, parse_arff, parse_csv, to_arff

# suite name -> (KEEL file stem, columns forced to nominal)
KEEL = {
    "breast-cancer": ("breast", "all"),
    "credit-a": ("crx", ()),
    "diabetes": ("pima", ()),
    "ionosphere": ("ionosphere", ()),
    "sonar": ("sonar", ()),
    "vehicle": ("vehicle", ()),
    "vote": ("housevotes", "all"),
    "vowel": ("vowel", ()),
}
OPTIONAL_KEEL = {"segment": ("segment", ()), "splice": ("splice", "all"), "mushroom": ("mushroom", "all")}


def _find_member(wheel_dir: Path, pattern: str, suffix: str) -> tuple[Path, str]:
    for wheel in sorted(wheel_dir.glob(pattern)):
        with zipfile.ZipFile(wheel) as zf:
            for name in zf.namelist():
                if name.endswith(suffix):
                    return wheel, name
    raise FileNotFoundError(f"no {suffix} in {pattern} under {wheel_dir}")


def _read_member(wheel_dir: Path, pattern: str, suffix: str) -> str:
    wheel, name = _find_member(wheel_dir, pattern, suffix)
    with zipfile.ZipFile(wheel) as zf:
        return zf.read(name).decode("utf-8")


def nominalize(ds: Dataset, columns) -> Dataset:
    """Recode numeric columns as nominal ones over their observed values."""
    cols = range(len(ds.attributes)) if columns == "all" else columns
    attrs = list(ds.attributes)
    X = ds.X.copy()
    for c in cols:
        a = attrs[c]
        if a.is_nominal:
            continue
        known = np.unique(X[~np.isnan(X[:, c]), c])
        labels = tuple(format(v, "g") for v in known)
        attrs[c] = Attribute(a.name, NOMINAL, labels)
        col = X[:, c]
        mask = ~np.isnan(col)
        col[mask] = np.searchsorted(known, col[mask])
    return Dataset(attrs, X, ds.weights, ds.class_index, ds.relation)


def from_keel(text: str, relation: str, nominal) -> Dataset:
    # KEEL rows carry stray spaces after commas
    rows = "\n".join(",".join(tok.strip() for tok in line.split(",")) for line in text.splitlines() if line.strip())
    ds = parse_csv(rows, header=False, relation=relation)
    return nominalize(ds, nominal) if nominal else ds


def from_orange_tab(text: str, relation: str) -> Dataset:
    lines = text.splitlines()
    names = lines[0].split("\t")
    body = ["\t".join(f if f not in ("", "?") else "?" for f in ln.split("\t")) for ln in lines[3:] if ln.strip()]
    csv_text = ",".join(n.replace(",", " ") for n in names) + "\n" + "\n".join(
        ",".join('"' + f + '"' if " " in f else f for f in ln.split("\t")) for ln in body
    )
    ds = parse_csv(csv_text, header=True, relation=relation)
    types = lines[1].split("\t")
    discrete = [i for i, t in enumerate(types) if t.strip() not in ("c", "continuous") and i != len(names) - 1]
    return nominalize(ds, discrete)


def zoo_from_sklearn(path: Path) -> Dataset:
    ds = parse_arff(gzip.open(path, "rt").read())
    keep = [i for i, a in enumerate(ds.attributes) if a.name != "animal"]
    return ds.select_attributes(keep)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wheels", type=Path, required=True, help="directory holding the downloaded wheels")
    ap.add_argument("--sklearn-data", type=Path, default=None, help="scikit-learn openml test data directory")
    ap.add_argument("--out", type=Path, default=Path("tests/data/suite"))
    ap.add_argument("--optional", action="store_true", help="also build the larger optional datasets")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    built: dict[str, Dataset] = {}
    table = dict(KEEL, **(OPTIONAL_KEEL if args.optional else {}))
    for name, (stem, nominal) in table.items():
        built[name] = from_keel(_read_member(args.wheels, "keel_ds*.whl", f"balanced/raw/{stem}.dat"), name, nominal)
    built["heart-c"] = from_orange_tab(_read_member(args.wheels, "[Oo]range3*.whl", "datasets/heart_disease.tab"), "heart-c")
    if args.sklearn_data is None:
        import sklearn

        args.sklearn_data = Path(sklearn.__file__).parent / "datasets/tests/data/openml"
    built["zoo"] = zoo_from_sklearn(args.sklearn_data / "id_62" / "data-v1-dl-52352.arff.gz")

    for name, ds in sorted(built.items()):
        (args.out / f"{name}.arff").write_text(to_arff(ds), encoding="utf-8")
        print(f"{name:15s} {len(ds):5d} instances {ds.n_features:3d} features {ds.n_classes:2d} classes")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
