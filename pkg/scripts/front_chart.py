"""Radius-time chart of first arrivals in the Lorenz and Coulomb gauges.

Writes front_chart.csv (radius, t_arrival_lorenz, t_arrival_coulomb) and
prints the fitted Lorenz front speed.

    python scripts/front_chart.py [out.csv]
"""
import sys

from gauge_lab.analytic import SolenoidSpec
from gauge_lab.fields import Grid2
from gauge_lab.propagation import coulomb_companion, signal_locality_report, switch_on_scenario
from gauge_lab.runner import emit_plot_data

RADII = (20, 30, 40, 50, 60, 70, 80, 90)


def main(path="front_chart.csv"):
    spec = SolenoidSpec(radius=10.0, flux=1.0, t_on=2.0, feed_dipole=5.0)
    grid = Grid2.centered(256, 255.0, disk_radius=10.0)
    lorenz = switch_on_scenario(spec, grid, 100.0)
    coulomb = coulomb_companion(lorenz)
    reports = [signal_locality_report(s, RADII, 0.01, "A") for s in (lorenz, coulomb)]
    with open(path, "w") as fh:
        fh.write(emit_plot_data(reports, "arrivals"))
    lor, cou = reports
    print(f"Lorenz front speed {lor.fitted_speed:.4f} +- {lor.stderr:.4f}")
    for a, b in zip(lor.records, cou.records):
        print(f"r={a.radius:5.1f}  lorenz {a.t_arrival:7.2f} {a.flag:13s}"
              f"  coulomb {b.t_arrival:7.2f} {b.flag}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main(*sys.argv[1:2])
