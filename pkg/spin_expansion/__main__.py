#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Entry point for `python -m spin_expansion`."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
