"""Dense-matrix comparison of the propagation methods on the two-qubit
dissipative benchmark.

For a fixed evolution time the midpoint, truncated-Dyson, and Lorentzian
constructions are each compared against the exact propagator, together
with their a-priori error bounds and the midpoint convergence order.
"""

import numpy as np

from biqsp import matops, method_sim


def main():
    pair = matops.lindblad_benchmark_pair()
    T = 0.5
    print(f"pair: {pair.label}  (alpha_R={pair.alpha_R:.4f}, "
          f"beta_I={pair.beta_I:.4f}, T={T})")

    res = method_sim.dyson_lcu_propagator(pair, T, r=8, M=6)
    print(f"dyson-lcu   error {res.error_norm:.3e}  "
          f"bound {res.bound_predicted:.3e}")

    res = method_sim.lorentzian_method(pair, T, r=4, disc=(200.0, 20000))
    print(f"lorentzian  error {res.error_norm:.3e}  "
          f"bound {res.bound_predicted:.3e}")

    exact = matops.interaction_propagator(pair, T, steps=8192)
    rs = np.array([4, 8, 16, 32])
    errs = [np.linalg.norm(method_sim.midpoint_propagator(pair, T, r)
                           - exact, 2) for r in rs]
    slope = np.polyfit(np.log(rs), np.log(errs), 1)[0]
    for r, e in zip(rs, errs):
        print(f"midpoint    r={r:<3d} error {e:.3e}")
    print(f"midpoint convergence slope: {slope:.2f} (expected -2)")

    psi0 = np.zeros(pair.dim, dtype=complex)
    psi0[0] = 1.0
    bound = method_sim.postselection_bound(pair, T, psi0)
    print(f"postselection ceiling at T={T}: {bound:.4f}")


if __name__ == "__main__":
    main()
