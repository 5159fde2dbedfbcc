"""Error-ratio table for the grid operators and the leapfrog stepper.

Each row halves the spacing; second-order schemes show ratios near 4.
"""
import math

import numpy as np

from gauge_lab.fields import Grid2, ScalarField2, VectorField2, curl_z, div, grad
from gauge_lab.propagation import FDTDState, fdtd_lorenz_step


def operator_errors(n):
    g = Grid2.centered(n, 4.0)
    X, Y = g.coords()
    m = g.probe_mask()
    f = ScalarField2(g, np.sin(X) * np.cos(2 * Y))
    v = VectorField2(g, np.sin(X) * np.cos(Y), X * X * np.sin(Y))
    gr = grad(f)
    e_grad = max(np.max(np.abs(gr.vx - np.cos(X) * np.cos(2 * Y))[m]),
                 np.max(np.abs(gr.vy + 2 * np.sin(X) * np.sin(2 * Y))[m]))
    e_div = np.max(np.abs(div(v).values - np.cos(X) * np.cos(Y) - X * X * np.cos(Y))[m])
    e_curl = np.max(np.abs(curl_z(v).values - 2 * X * np.sin(Y) - np.sin(X) * np.sin(Y))[m])
    return e_grad, e_div, e_curl


def stepper_error(n):
    L = 2 * np.pi
    g = Grid2(n, n, L / n, L / n)
    X, Y = g.coords()
    w = math.sqrt(5.0)
    steps = int(math.ceil(1.0 / (0.25 * g.dx)))
    dt = 1.0 / steps
    exact = lambda t: np.cos(X) * np.cos(2 * Y) * np.cos(w * t)
    st = FDTDState.initial(g, dt, phi=exact(0.0), phi_prev=exact(-dt), boundary="periodic")
    for _ in range(steps):
        st = fdtd_lorenz_step(st)
    return float(np.max(np.abs(st.phi - exact(st.time))))


def main():
    sizes = (33, 65, 129, 257)
    rows = [operator_errors(n) + (stepper_error(n - 1),) for n in sizes]
    print(f"{'n':>5} {'grad':>10} {'div':>10} {'curl':>10} {'leapfrog':>10}")
    for n, r in zip(sizes, rows):
        print(f"{n:5d} " + " ".join(f"{e:10.3e}" for e in r))
    print("ratios")
    for (n, a), b in zip(zip(sizes, rows), rows[1:]):
        print(f"{n:5d} " + " ".join(f"{x / y:10.2f}" for x, y in zip(a, b)))


if __name__ == "__main__":
    main()
