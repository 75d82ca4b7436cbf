"""Run the space-form verification suite and print the check-by-check summary.

Every equality case of the comparison theorems (flat tubes, spherical
tubes, the focal radius of the equator, the hyperbolic Laplacian) should
come back PASS with the equality flag raised; the strict cases (small
sphere, product factor) pass with positive slack. The same run is
available from the command line:

    tubecomp verify --scenario spaceforms --out reports/
"""

import time

from tubecomp.scenarios import build_suite
from tubecomp.verification import run_suite

start = time.time()
scenarios = build_suite("spaceforms")
print(f"running {len(scenarios)} scenarios: " +
      ", ".join(sc.name for sc in scenarios))
report = run_suite(scenarios)
print(report.summary())
print(f"\nsuite ok: {report.ok}  ({time.time() - start:.1f}s)")

equalities = [(name, rep.name) for name, rep in report.entries if rep.equality]
print(f"equality-flagged checks ({len(equalities)}):")
for name, check in equalities:
    print(f"  {name} :: {check}")
