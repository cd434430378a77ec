#!/usr/bin/env python3
"""Run a named experiment preset and print where the outputs landed.

Equivalent to `adasamp preset NAME [--out DIR] [--seeds N]`; kept as a
script so experiments are runnable straight from a checkout.
"""

import sys

from adasamp.cli import main

if __name__ == "__main__":
    sys.exit(main(["preset", *sys.argv[1:]]))
