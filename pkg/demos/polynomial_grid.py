"""Unbounded-curvature stress test: f(x) = x^2 (1 + x^2).

The quartic's curvature grows with x^2, so any constant rate that is
stable near the start, x = 3, is far from optimal near the minimum, and
any rate aggressive enough to finish fast diverges immediately. The NGN
cap c is not a rate: the realized step adapts, so even absurdly large
caps converge, and the best cap beats the best baseline rate.

Run: python3 demos/polynomial_grid.py
"""

from ngnopt import OptimizerSpec, ProblemSpec, RunBudget, build_problem, run_once


def main():
    problem = build_problem(ProblemSpec(kind="polynomial_1d"))
    budget = RunBudget(max_steps=100_000, success_loss=1e-15)
    caps = [10.0 ** e for e in range(-4, 5)]
    print("x^2 (1 + x^2) from x = 3, success at loss <= 1e-15, beta = 0.9")
    print(f"  {'c':>8}  {'ngn_m_v1':>20}  {'sgdm':>20}")
    best = {"ngn_m_v1": None, "sgdm": None}
    for c in caps:
        cells = []
        for kind in ("ngn_m_v1", "sgdm"):
            rec = run_once(problem, OptimizerSpec(kind=kind, c=c, beta1=0.9),
                           budget, seed=0)
            if rec.status == "converged":
                steps = rec.steps_to_success
                cells.append(f"{steps} steps")
                if best[kind] is None or steps < best[kind]:
                    best[kind] = steps
            else:
                cells.append(rec.status)
        print(f"  {c:>8g}  {cells[0]:>20}  {cells[1]:>20}")
    print()
    print(f"best ngn_m_v1: {best['ngn_m_v1']} steps; "
          f"best sgdm: {best['sgdm']} steps")


if __name__ == "__main__":
    main()
