"""Acceptance gate: one test per top-level correctness criterion.

Each test prints a single PASS/FAIL line with the measured figure of merit
next to its tolerance, then asserts.  Everything runs at desk scale (Hilbert
dimensions at most 2 x 3) against closed-form oracles or the experiment
presets; nothing here depends on the plotting component.
"""

import dataclasses

import numpy as np
import pytest

from bathforge.analytic import (
    BathSpec,
    RateSet,
    chemical_potential,
    fermi_dirac_populations,
    heating_population_analytic,
    heating_rate_weak_coupling,
    semiclassical_2level,
    thermal_nbar,
    two_level_steady_state,
)
from bathforge.config import resolve_config
from bathforge.core import TWO_PI, HilbertSpace, partial_trace
from bathforge.dynamics import Segment, evolve, run_sequence, steady_state
from bathforge.estimation import add_measurement_noise, design_pumps, fit_rates_2level
from bathforge.model import DriveKind, DriveSpec, SystemSpec
from bathforge.presets import NATURAL_GE_MHZ, build_preset, run_preset

KAPPA_S = 12.98


def clean_two_level_spec(**kwargs) -> SystemSpec:
    """Snail + qubit, two levels each, engineered dissipation only."""
    params = dict(
        dims=HilbertSpace((2, 2), ("snail", "qubit")),
        kappa_s=KAPPA_S,
        kappa_q_down=0.0,
        kappa_q_up=0.0,
        nbar_s=0.0,
    )
    params.update(kwargs)
    return SystemSpec(**params)


def verdict(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name}: {detail}")
    assert ok, f"{name}: {detail}"


def qubit_populations(rho) -> np.ndarray:
    qubit = partial_trace(rho, "qubit")
    return np.real(np.diag(qubit.matrix))


class TestAcceptance:
    def test_steady_state_matches_rate_law(self):
        """Full solver equals the pumped two-level rate-equation equilibrium."""
        g_max = 0.01 * KAPPA_S
        worst = 0.0
        for ratio in (0.0, 0.5, 1.0, 2.0, 5.0):
            if ratio <= 1.0:
                g_sigma, g_delta = ratio * g_max, g_max
            else:
                g_sigma, g_delta = g_max, g_max / ratio
            for nbar in (0.0, 0.1, 0.5):
                # Equal infinitesimal intrinsic rates break the exact parity
                # conservation at g_sigma = g_delta (where the pumped
                # stationary state is genuinely degenerate).  Being equal,
                # they bias toward the half/half point the degenerate ratio
                # targets anyway; elsewhere the shift is ~1e-7/Gamma ~ 1e-5.
                spec = clean_two_level_spec(
                    nbar_s=nbar, kappa_q_down=1e-7, kappa_q_up=1e-7
                )
                drives = [
                    DriveSpec(DriveKind.SIGMA_GE, g_sigma),
                    DriveSpec(DriveKind.DELTA_GE, g_delta),
                ]
                pops = qubit_populations(steady_state(spec, drives))
                expected = two_level_steady_state(g_sigma, g_delta, nbar)
                worst = max(worst, float(np.max(np.abs(pops - expected))))
        verdict(
            "steady-state vs rate law (15-point pump/occupation grid)",
            worst <= 1e-3,
            f"max |P - P_law| = {worst:.2e} (tol 1e-3)",
        )

    def test_chemical_potential_identity(self):
        """Fermi-Dirac at the pump-set potential reproduces the equilibrium."""
        strengths = np.logspace(-2, 0.5, 10)
        temps_mk = (15.0, 30.0, 60.0, 120.0, 240.0)
        worst = 0.0
        for t_mk in temps_mk:
            bath = BathSpec(temperature=t_mk * 1e-3, f_s=8010.0)
            nbar = thermal_nbar(bath)
            for g_sigma in strengths:
                for g_delta in strengths:
                    mu = chemical_potential(g_sigma, g_delta, bath)
                    fd = fermi_dirac_populations(mu, bath)
                    eq = two_level_steady_state(g_sigma, g_delta, nbar)
                    worst = max(worst, abs(fd[0] - eq[0]), abs(fd[1] - eq[1]))
        verdict(
            "chemical-potential identity (10x10x5 grid)",
            worst <= 1e-9,
            f"max |P_FD - P_eq| = {worst:.2e} (tol 1e-9)",
        )

    def test_heating_matches_exact_solution(self):
        """Evolution under the pair pump follows the closed-form law."""
        worst = 0.0
        for ratio in (0.001, 0.01, 0.05, 0.2):
            g = ratio * KAPPA_S
            rate = heating_rate_weak_coupling(g, KAPPA_S)
            t_final = 5.0 / (TWO_PI * rate)  # five effective lifetimes
            traj = evolve(
                clean_two_level_spec(),
                [DriveSpec(DriveKind.SIGMA_GE, g)],
                "0,g",
                t_final,
                sample_dt=t_final / 60,
                method="expm",
            )
            expected = heating_population_analytic(g, KAPPA_S, traj.times)
            worst = max(worst, float(np.max(np.abs(traj.populations["g"] - expected))))
        verdict(
            "exact heating solution (four coupling ratios)",
            worst <= 1e-6,
            f"max |P_g - closed form| = {worst:.2e} (tol 1e-6)",
        )

    def test_heating_weak_coupling_exponential(self):
        """At small coupling the excitation is a single exponential."""
        g = 0.005 * KAPPA_S
        rate = heating_rate_weak_coupling(g, KAPPA_S)
        t_final = 5.0 / (TWO_PI * rate)
        traj = evolve(
            clean_two_level_spec(),
            [DriveSpec(DriveKind.SIGMA_GE, g)],
            "0,g",
            t_final,
            sample_dt=t_final / 100,
            method="expm",
        )
        simple = np.exp(-TWO_PI * rate * traj.times)
        err = float(np.max(np.abs(traj.populations["g"] - simple)))
        verdict(
            "weak-coupling exponential over five lifetimes",
            err <= 1e-3,
            f"max |P_g - exp(-4g^2 t/kappa)| = {err:.2e} (tol 1e-3)",
        )

    def test_population_inversion(self):
        """The strong heating preset inverts the qubit despite natural decay."""
        preset, resolved = build_preset("heating_ge")
        g = resolved["runs"][0]["drives"][0]["g_eff_mhz"]
        engineered = 4.0 * g**2 / preset.spec.kappa_s
        ratio = engineered / NATURAL_GE_MHZ
        report = run_preset("heating_ge")
        finals = report.trajectories[0]["final_populations"]
        verdict(
            "population inversion at a >=200x pump-to-natural ratio",
            ratio >= 200.0 and finals["e"] > 0.8,
            f"rate ratio = {ratio:.1f} (need >= 200), final P_e = {finals['e']:.3f} (need > 0.8)",
        )

    def test_balanced_pumps(self):
        """Matched pump pairs pin a half/half mixture; stronger pair is faster."""
        preset, resolved = build_preset("balanced_ge")
        t_final, dt = 120.0, 0.05
        results = {}
        for run in preset.runs:
            traj = run_sequence(
                preset.spec,
                [Segment(run.drives, t_final)],
                run.initial_state,
                sample_dt=dt,
            )
            p_g = traj.populations["g"]
            p_e = traj.populations["e"]
            gap = abs(p_g[-1] - p_e[-1])
            # Settling is measured on the population difference the pump pair
            # actually controls: the second excited level also equilibrates,
            # but through the (identical) intrinsic rates in both runs, so it
            # would mask the engineered-rate comparison.
            diff = p_g - p_e
            dev = np.abs(diff - diff[-1])
            outside = np.nonzero(dev > 0.01)[0]
            t_settle = 0.0 if outside.size == 0 else float(traj.times[outside[-1] + 1])
            results[run.label] = (gap, t_settle)
        gap_54, t_54 = results["54_54"]
        gap_24, t_24 = results["24_22"]
        ok = gap_54 <= 0.04 and gap_24 <= 0.04 and t_54 <= 0.5 * t_24
        verdict(
            "balanced pumps: equal mixture, 2x faster at double rate",
            ok,
            f"|P_g-P_e| = {gap_54:.4f}/{gap_24:.4f} (tol 0.04), "
            f"settle {t_54:.1f}/{t_24:.1f} us (need first <= half of second)",
        )

    def test_quadratic_rate_scaling(self):
        """Extracted heating rates follow rate = a g^2 with a = 4/kappa."""
        strengths = (0.1, 0.2, 0.4)
        rates = []
        for g in strengths:
            rate = heating_rate_weak_coupling(g, KAPPA_S)
            t_final = 5.0 / (TWO_PI * rate)
            traj = evolve(
                clean_two_level_spec(),
                [DriveSpec(DriveKind.SIGMA_GE, g)],
                "0,g",
                t_final,
                sample_dt=t_final / 80,
                method="expm",
            )
            fit = fit_rates_2level((traj.times, traj.populations["g"]))
            rates.append(fit.params.get("ge"))
        rates = np.asarray(rates)
        g2 = np.asarray(strengths) ** 2
        a = float(np.sum(rates * g2) / np.sum(g2**2))
        predicted = a * g2
        ss_res = float(np.sum((rates - predicted) ** 2))
        ss_tot = float(np.sum((rates - rates.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot
        a_target = 4.0 / KAPPA_S
        rel = abs(a - a_target) / a_target
        verdict(
            "quadratic pump-strength scaling of the heating rate",
            r2 >= 0.999 and rel <= 0.03,
            f"r^2 = {r2:.6f} (need >= 0.999), a = {a:.4f} vs 4/kappa = {a_target:.4f} "
            f"({100 * rel:.2f}% off, tol 3%)",
        )

    def test_rate_fit_round_trip(self):
        """The two-level fitter recovers known rates, clean and noisy."""
        truth = RateSet({"ge": 0.011, "eg": 0.047})
        times = np.linspace(0.0, 12.0, 161)  # several 1/(2 pi (ge+eg)) lifetimes
        p_g, _ = semiclassical_2level(truth, 1.0, times)

        clean = fit_rates_2level((times, p_g))
        err_clean = max(
            abs(clean.params.get("ge") - 0.011) / 0.011,
            abs(clean.params.get("eg") - 0.047) / 0.047,
        )

        noisy_p = add_measurement_noise(np.column_stack([p_g, 1.0 - p_g]), 0.01, seed=2026)
        noisy = fit_rates_2level((times, noisy_p[:, 0]))
        err_noisy = max(
            abs(noisy.params.get("ge") - 0.011) / 0.011,
            abs(noisy.params.get("eg") - 0.047) / 0.047,
        )
        verdict(
            "rate-fit round trip (noiseless and sigma = 0.01)",
            err_clean <= 1e-3 and err_noisy <= 0.05,
            f"relative error {err_clean:.2e} clean (tol 1e-3), "
            f"{err_noisy:.2%} noisy (tol 5%)",
        )

    def test_gf_mixture(self):
        """Dual pumps balance ground and second-excited with a fixed residual."""
        preset, resolved = build_preset("gf_mix")
        sys = resolved["system"]
        assert sys["anharmonicity_mhz"] == 197.0
        assert sys["kappa_snail_mhz"] == 12.98
        assert sys["kappa_qubit_down_mhz"] == 0.029
        assert sys["kappa_qubit_up_mhz"] == 0.006
        assert resolved["measure_window_us"] == 1.2
        report = run_preset("gf_mix")
        finals = report.trajectories[0]["final_populations"]
        gap = abs(finals["g"] - finals["fplus"])
        verdict(
            "g-f mixture with residual excited population",
            gap <= 0.1 and finals["e"] > 0.05,
            f"|P_g - P_fplus| = {gap:.4f} (tol 0.1), P_e = {finals['e']:.4f} (need > 0.05)",
        )

    def test_detailed_balance(self):
        """A thermally occupied lossy mode equilibrates to the Bose ratio."""
        worst = 0.0
        for nbar in (0.01, 0.1, 1.0):
            spec = SystemSpec(
                dims=HilbertSpace((2, 2), ("snail", "qubit")), nbar_s=nbar
            )
            rho = steady_state(spec, ())
            snail = partial_trace(rho, "snail")
            p0, p1 = np.real(np.diag(snail.matrix))
            worst = max(worst, abs(p1 / p0 - nbar / (nbar + 1.0)))
        verdict(
            "detailed balance of the thermal mode",
            worst <= 1e-8,
            f"max |P_1/P_0 - nbar/(nbar+1)| = {worst:.2e} (tol 1e-8)",
        )

    def test_design_round_trip(self):
        """Designed pump pairs reproduce their target equilibria forward."""
        spec = clean_two_level_spec()
        # Forward verification runs with the same infinitesimal symmetry
        # breaker as the rate-law test: the (0.5, 0.5) target lands exactly
        # on the parity-degenerate pump point.
        forward_spec = clean_two_level_spec(kappa_q_down=1e-7, kappa_q_up=1e-7)
        worst = 0.0
        for target in ((0.5, 0.5), (0.2, 0.8), (0.9, 0.1)):
            result = design_pumps(target, spec, total_rate_budget=0.02)
            pops = qubit_populations(steady_state(forward_spec, result.drives))
            worst = max(worst, float(np.max(np.abs(pops - np.asarray(target)))))
        verdict(
            "design round trip over three target mixtures",
            worst <= 1e-3,
            f"max |P - target| = {worst:.2e} (tol 1e-3)",
        )
