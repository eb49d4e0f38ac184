"""Werner states under strong driving: the death time ignores the dipole coupling.

Run with ``python3 demos/werner_death_time.py``.
"""

import numpy as np

from esdlab.entanglement import detect_esd
from esdlab.scan import concurrence_trace


def main():
    print("f      omega_c  t_esd")
    for f in (0.6, 0.8, 1.0):
        for omega_c in (0.0, 5.0, 15.0):
            trace, _ = concurrence_trace("werner", f, omega_c, "kinetic", t_max=3.0)
            print(f"{f:<6} {omega_c:<8g} {detect_esd(trace).t_esd:.6f}")
    trace, _ = concurrence_trace("werner", 1.0, 5.0, "closed-form", t_max=1.0)
    k = np.searchsorted(trace.times, [0.0, 0.2, 0.4, 0.6, 0.8])
    print("singlet concurrence at t = 0, 0.2, ..., 0.8:", np.round(trace.concurrence[k], 4))


if __name__ == "__main__":
    main()
