"""Pin a qubit's steady state anywhere on the Bloch-sphere axis with two pumps.

A lossy auxiliary mode plus a pair of parametric pumps acts on the qubit as
a tunable bath: the pair-creation (Sigma) pump drives the qubit up, the
conversion (delta) pump drives it down, and the *ratio* of their strengths
chooses the stationary mixture.  At finite temperature this bath carries a
genuine photon chemical potential.

Run:  python3 demos/01_pumped_equilibrium.py
"""

import numpy as np

from bathforge import (
    BathSpec,
    DriveKind,
    DriveSpec,
    HilbertSpace,
    SystemSpec,
    chemical_potential,
    fermi_dirac_populations,
    partial_trace,
    steady_state,
    thermal_nbar,
    two_level_steady_state,
)

KAPPA_S = 12.98  # auxiliary-mode linewidth, MHz
G_DELTA = 0.10  # fix the cooling pump, sweep the heating pump against it


def qubit_pops(rho):
    return np.real(np.diag(partial_trace(rho, "qubit").matrix))


def main() -> None:
    spec = SystemSpec(
        dims=HilbertSpace((2, 2), ("snail", "qubit")),
        kappa_s=KAPPA_S,
        kappa_q_down=1e-7,  # infinitesimal: breaks the exact-parity point below
        kappa_q_up=1e-7,
        nbar_s=0.0,
    )

    print("Pump-ratio control of the stationary mixture (cold auxiliary mode)")
    print(f"{'g_S/g_d':>8} {'P_e (solver)':>13} {'P_e (rate law)':>15}")
    for ratio in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0):
        g_sigma = ratio * G_DELTA
        drives = [
            DriveSpec(DriveKind.SIGMA_GE, g_sigma),
            DriveSpec(DriveKind.DELTA_GE, G_DELTA),
        ]
        pops = qubit_pops(steady_state(spec, drives))
        law = two_level_steady_state(g_sigma, G_DELTA, 0.0)
        print(f"{ratio:>8.2f} {pops[1]:>13.6f} {law[1]:>15.6f}")

    print()
    print("The same states viewed as a grand-canonical bath at 40 mK:")
    bath = BathSpec(temperature=0.040, f_s=8010.0)
    nbar = thermal_nbar(bath)
    print(f"  thermal occupation of the mode: nbar = {nbar:.3e}")
    print(f"{'g_S/g_d':>8} {'mu / (h f_s)':>13} {'P_e (Fermi-Dirac)':>18}")
    for ratio in (0.25, 0.5, 1.0, 2.0, 4.0):
        g_sigma = ratio * G_DELTA
        mu = chemical_potential(g_sigma, G_DELTA, bath)
        fd = fermi_dirac_populations(mu, bath)
        print(f"{ratio:>8.2f} {mu / bath.f_s:>13.6f} {fd[1]:>18.6f}")
    print()
    print("Equal pumps sit exactly at mu = h f_s: the bath pays the full cost")
    print("of one excitation, and the two-level 'Fermi sea' is half filled.")


if __name__ == "__main__":
    main()
