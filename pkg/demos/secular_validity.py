"""How close the secular description comes to the full rotating-frame dynamics.

Run with ``python3 demos/secular_validity.py``.
"""

from esdlab.dynamics import SystemParams
from esdlab.scan import compare_models
from esdlab.xstate import Werner


def main():
    print("rabi   sup |C_rotating - C_secular|")
    for rabi in (10.0, 25.0, 50.0, 100.0, 250.0):
        cmp = compare_models(Werner(1.0), SystemParams.symmetric(rabi=rabi, omega_c=5.0), t_max=2.0)
        print(f"{rabi:<6g} {cmp.sup_norm:.5f}")


if __name__ == "__main__":
    main()
