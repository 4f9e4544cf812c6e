#!/usr/bin/env python3
"""Run the six risk panels (symmetric k in {1.5, 2, 3} and the three
asymmetric exponent pairs) and write one CSV + plot script per panel.

Equivalent to `convexbench reproduce-fig2`; kept as a script so the panel
run is greppable and hackable.
"""
import sys

from convexbench.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce-fig2", *sys.argv[1:]]))
