"""Revivals of a single excitation: the revival count climbs with the coupling in lobes.

Run with ``python3 demos/egge_lobes.py`` (about 10 s: full rotating-frame integration).
"""

import numpy as np

from esdlab.entanglement import local_maxima
from esdlab.scan import concurrence_trace, evaluate_cell


def main():
    print("omega_c  revivals  t_esd")
    for omega_c in np.linspace(0.0, 12.0, 25):
        cell = evaluate_cell("egge", 0.0, float(omega_c), "rotating-frame", rabi=25.0, t_max=3.0)
        print(f"{omega_c:<8.2f} {cell.revivals:<9d} {cell.t_esd:.4f}")
    trace, _ = concurrence_trace("egge", 0.0, 10.0, "secular", t_max=3.0)
    peaks = local_maxima(trace)
    print("maxima spacing at omega_c = 10:", np.round(np.diff(peaks), 4), "vs 2 pi / 30 =", round(2 * np.pi / 30, 4))


if __name__ == "__main__":
    main()
