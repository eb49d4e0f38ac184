"""An undriven single excitation: sudden death appears only with a warm reservoir.

Run with ``python3 demos/thermal_egge.py``.
"""

from esdlab.scan import evaluate_cell


def main():
    print("nbar   omega_c  status               revivals  t_esd")
    for nbar in (0.0, 0.05, 0.25):
        for omega_c in (2.0, 10.0):
            cell = evaluate_cell("egge", 0.0, omega_c, "thermal-undriven", nbar=nbar, t_max=10.0)
            print(f"{nbar:<6g} {omega_c:<8g} {cell.status.value:<20} {cell.revivals:<9d} {cell.t_esd:.4f}")


if __name__ == "__main__":
    main()
