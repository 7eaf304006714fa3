#!/usr/bin/env python3
# Copyright 2026 The SGB Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Fetches the UCI default-of-credit-card-clients dataset (30,000 x 23)
and writes data/credit.csv in the layout the acceptance suite expects:
23 numeric feature columns x1..x23 plus a 0/1 'label' column.

Needs network access to archive.ics.uci.edu. The acceptance test
(criterion 5) reports SKIP when data/credit.csv is absent.
"""

import io
import os
import sys
import urllib.request
import zipfile

URL = ("https://archive.ics.uci.edu/static/public/350/"
       "default+of+credit+card+clients.zip")


def main() -> int:
    out_dir = os.path.join(os.path.dirname(__file__), "..", "data")
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, "credit.csv")
    if os.path.exists(out_path):
        print(f"{out_path} already exists")
        return 0

    print(f"downloading {URL} ...")
    blob = urllib.request.urlopen(URL, timeout=120).read()
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        xls_name = next(n for n in zf.namelist() if n.lower().endswith(".xls"))
        xls_bytes = zf.read(xls_name)

    try:
        import pandas as pd
    except ImportError:
        print("pandas is required (pip install pandas xlrd)", file=sys.stderr)
        return 1
    # header row 1 holds X1..X23 + Y; row 0 is the banner
    df = pd.read_excel(io.BytesIO(xls_bytes), header=1)
    df = df.drop(columns=[c for c in df.columns if str(c).upper() == "ID"])
    label_col = df.columns[-1]
    feats = df.columns[:-1]
    with open(out_path, "w") as f:
        f.write(",".join(f"x{i + 1}" for i in range(len(feats))) + ",label\n")
        for _, row in df.iterrows():
            f.write(",".join(str(float(row[c])) for c in feats))
            f.write(f",{int(row[label_col])}\n")
    print(f"wrote {out_path}: {len(df)} rows, {len(feats)} features")
    return 0


if __name__ == "__main__":
    sys.exit(main())
