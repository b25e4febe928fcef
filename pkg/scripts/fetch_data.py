#!/usr/bin/env python3
"""Download and prepare the benchmark datasets the registry points at.

Needs network access. Writes headered, comma-separated CSVs with a numeric
label column into datasets/data/, matching the shipped schemas exactly.

    python scripts/fetch_data.py adult-income cal-housing wine-quality
"""

import csv
import io
import sys
import urllib.request
from pathlib import Path

HERE = Path(__file__).resolve().parent
DATA = HERE.parent / "datasets" / "data"

ADULT_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data"
ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]
WINE_URLS = {
    "red": "https://archive.ics.uci.edu/ml/machine-learning-databases/wine-quality/winequality-red.csv",
    "white": "https://archive.ics.uci.edu/ml/machine-learning-databases/wine-quality/winequality-white.csv",
}


def fetch(url: str) -> str:
    print(f"  downloading {url}")
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read().decode("utf-8")


def adult_income() -> None:
    raw = fetch(ADULT_URL)
    out = DATA / "adult-income.csv"
    n = 0
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ADULT_COLUMNS)
        for record in csv.reader(io.StringIO(raw)):
            if not record or len(record) != len(ADULT_COLUMNS):
                continue
            record = [cell.strip() for cell in record]
            record[-1] = "1" if record[-1].rstrip(".") == ">50K" else "0"
            writer.writerow(record)
            n += 1
    print(f"  wrote {out} ({n} rows; expected 32561)")


def cal_housing() -> None:
    # the scikit-learn distribution; downloads on first use
    from sklearn.datasets import fetch_california_housing

    bunch = fetch_california_housing()
    out = DATA / "cal-housing.csv"
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(bunch.feature_names) + ["MedHouseVal"])
        for x, y in zip(bunch.data, bunch.target):
            writer.writerow([repr(float(v)) for v in x] + [repr(float(y) * 100_000)])
    print(f"  wrote {out} ({len(bunch.target)} rows; expected 20640)")


def wine_quality() -> None:
    out = DATA / "wine-quality.csv"
    n = 0
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header_written = False
        for kind, url in WINE_URLS.items():
            raw = fetch(url)
            reader = csv.reader(io.StringIO(raw), delimiter=";")
            header = next(reader)
            if not header_written:
                writer.writerow([h.strip().strip('"') for h in header])
                header_written = True
            for record in reader:
                if record:
                    writer.writerow(record)
                    n += 1
    print(f"  wrote {out} ({n} rows; expected 6497)")


STEPS = {
    "adult-income": adult_income,
    "cal-housing": cal_housing,
    "wine-quality": wine_quality,
}


def main(argv: list[str]) -> int:
    targets = argv or ["adult-income", "cal-housing"]
    unknown = [t for t in targets if t not in STEPS]
    if unknown:
        print(f"no automated fetch for {unknown}; see datasets/registry.json notes",
              file=sys.stderr)
        return 1
    DATA.mkdir(parents=True, exist_ok=True)
    for t in targets:
        print(f"{t}:")
        STEPS[t]()
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
