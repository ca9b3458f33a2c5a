"""
Running experiments from Python or the shell
============================================

Every experiment is also available as ``karner <kind>``; this script calls
the same entry point and reads back the CSV it writes.
"""

import csv
import tempfile
from pathlib import Path

from karner import cli

out = Path(tempfile.mkdtemp())
# equivalent to: karner krein-table --set z_grid.step=5.0 --out <dir>
status = cli.main(["krein-table", "--set", "z_grid.step=5.0", "--out", str(out)])
print("exit status:", status)

with open(out / "krein-table.csv", newline="") as fh:
    rows = list(csv.DictReader(fh))
print(len(rows), "rows; first:", {k: rows[0][k] for k in ("z_re", "z_im", "tau_re", "passed")})
print((out / "krein-table.summary.json").read_text())
