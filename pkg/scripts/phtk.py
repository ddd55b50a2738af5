#!/usr/bin/env python3
"""CLI: analyze pseudo-Hermitian matrices, build H_nu models, run sweeps and ensembles."""

from __future__ import annotations

import sys
from pathlib import Path

# Ensure the package is importable when running as a script
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from phtk.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
