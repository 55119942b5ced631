"""Generate the shipped representative ZnO loss table.

The table is a sum of three damped Lorentz bands (interband absorption
above the ~3.3 eV gap) sampled on a log grid; it stands in for first
principles real-axis data and is tagged "representative" in its card.
"""
from pathlib import Path

import numpy as np

from rodcasimir.dielectric import TabulatedLossData, write_loss_table

BANDS = [  # strength, centre [rad/s], width [rad/s]
    (0.90, 6.0e15, 1.5e15),
    (1.40, 1.3e16, 5.0e15),
    (0.40, 3.0e16, 1.2e16),
]


def lorentz_loss(w):
    out = np.zeros_like(w)
    for c, w0, g in BANDS:
        out += c * w0**2 * g * w / ((w0**2 - w**2) ** 2 + (g * w) ** 2)
    return out


def main():
    w = np.logspace(13, 18, 2001)
    loss = lorentz_loss(w)
    out = Path(__file__).resolve().parents[1] / "src" / "rodcasimir" / "data" / "materials" / "zno_loss.dat"
    header = ("Representative ZnO interband loss eps''(w); columns: w [rad/s], eps'' [-]\n"
              "three damped Lorentz bands, see tools/make_zno_loss_table.py")
    write_loss_table(out, TabulatedLossData(w, loss), header)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
