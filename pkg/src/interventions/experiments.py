"""Named experiments run by the command-line tool.

Each experiment declares its full parameter schema and fills a
:class:`~interventions.report.Report` with results (tagged by provenance),
named invariant checks and CSV tables.  Nothing here reads the clock or
global state, so a report depends only on (parameters, seed, version).
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import collision as cov
from . import fock
from .config import Param, float_list
from .gaussian import (
    GaussianMoment,
    MeasurementModel,
    SystemContext,
    conditional_state,
    equivalent_pair,
    final_state,
    intervention_ledger,
    outcome_distribution,
    zeroing_shift,
)
from .grid import (
    Grid1D,
    GridDistribution,
    JointDistribution,
    apply_control,
    collision_map,
    discretize,
    measurement_update,
    noise_density,
    shift_error,
)
from .montecarlo import compare, run_trials, total_variance_z
from .report import Report

LN2 = math.log(2.0)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# classical


def _ledger_rows(ctx: SystemContext, coupling: float, sweep) -> list:
    rows = []
    for c in sweep:
        led = intervention_ledger(ctx, MeasurementModel.from_sharpness(c, ctx.thermal_variance, coupling))
        rows.append(
            [
                c,
                led.efficiency,
                ((c - 1) / c) ** 2,
                led.mutual_information,
                led.entropy_change,
                led.avg_work,
                led.avg_energy_change,
                led.extractable_work_bound,
            ]
        )
    return rows


def _sweep_checks(report: Report, rows: list, ctx: SystemContext) -> None:
    effs = [r[1] for r in rows]
    report.check("efficiency_strictly_increasing_in_C", all(b > a for a, b in zip(effs, effs[1:])))
    for c, eta, eta_cf, info, ds, work, du, wext in rows:
        report.check(f"ledger_consistency_C={c:g}", abs(abs(du) / work - eta_cf) <= 1e-12, f"eta={eta!r}")
        report.check(f"entropy_change_equals_minus_information_C={c:g}", abs(ds + info) <= 1e-12)
        scale = ctx.thermal_variance / (2 * ctx.mass)
        report.check(
            f"extractable_work_bound_closed_form_C={c:g}",
            abs(wext - scale * (c - 1) / c) <= 1e-12 * max(1.0, scale),
        )
        report.check(f"extractable_work_bound_below_work_C={c:g}", wext < work)


def classical_intervention(p: dict, seed: int, report: Report) -> None:
    ctx = SystemContext(p["mass"], p["temperature"])
    delta = ctx.thermal_variance
    model = MeasurementModel.from_sharpness(p["sharpness"], delta, p["coupling"])
    prior = ctx.thermal_prior()
    ledger = intervention_ledger(ctx, model)
    for key, value in ledger.as_dict().items():
        report.add(f"ledger.{key}", value, "analytic")
    report.add("apparatus_variance", model.apparatus_variance, "analytic")
    for name, ok in ledger.checks().items():
        report.check(f"ledger.{name}", ok)

    c = ledger.sharpness
    x = p["outcome"] * outcome_distribution(prior, model).std
    post = conditional_state(prior, model, x)
    report.check("posterior_variance_contraction", post.variance < delta)
    explained = ((c - 1) / (c * model.coupling)) ** 2 * outcome_distribution(prior, model).variance
    report.check("law_of_total_variance_closed_form", abs(explained + delta / c - delta) <= 1e-12 * delta)

    rows = _ledger_rows(ctx, model.coupling, p["sharpness_sweep"])
    report.table("ledger_sweep", ["C", "efficiency", "efficiency_closed_form", "mutual_information",
                                  "entropy_change", "avg_work", "avg_energy_change", "extractable_work_bound"], rows)
    _sweep_checks(report, rows, ctx)

    # grid route: measure at x, then zero the conditional mean
    grid_rows = []
    for points in (p["grid_points"] // 2, p["grid_points"]):
        grid = Grid1D.centered(0.0, prior.std, 8.0, points)
        d = discretize(prior, grid)
        cond, _ = measurement_update(d, model, x)
        shift = zeroing_shift(prior, model, x)
        final = apply_control(cond, shift)
        exact_cond = GridDistribution(grid, post.pdf(grid.nodes))
        exact_final = GridDistribution(grid, GaussianMoment(post.mean + shift, post.variance).pdf(grid.nodes))
        err_cond = cond.l1_distance(exact_cond)
        err_final = final.l1_distance(exact_final)
        grid_rows.append([points, grid.spacing, cond.mean(), cond.variance(), final.mean(), final.variance(),
                          err_cond, err_final, final.mass()])
        masses = (d.mass(), cond.mass(), final.mass())
        nonneg = all((g.values >= 0).all() for g in (d, cond, final))
    report.table("grid_conditional", ["points", "spacing", "cond_mean", "cond_variance", "final_mean",
                                      "final_variance", "l1_cond", "l1_final", "final_mass"], grid_rows)
    last = grid_rows[-1]
    report.add("grid.conditional_mean", last[2], "grid")
    report.add("grid.conditional_variance", last[3], "grid")
    report.add("grid.final_mean", last[4], "grid")
    report.add("grid.final_variance", last[5], "grid")
    report.check("grid.mass_conserved", all(abs(m - 1) <= 1e-9 for m in masses), f"masses={masses}")
    report.check("grid.nonnegative", nonneg)
    report.check("grid.analytic_agreement_l1", max(last[6], last[7]) <= 1e-5, f"l1={last[6]:.3e},{last[7]:.3e}")
    n_fine = p["grid_points"] + 1
    coarse = Grid1D.centered(0.0, prior.std, 8.0, n_fine // 2 + 1)
    fine = Grid1D.centered(0.0, prior.std, 8.0, n_fine)
    shifts = [shift + j * coarse.spacing / 8 for j in range(8)]
    e_coarse, e_fine = shift_error(prior, coarse, shifts), shift_error(prior, fine, shifts)
    report.table("grid_refinement", ["points", "spacing", "worst_shift_l1"],
                 [[coarse.points, coarse.spacing, e_coarse], [fine.points, fine.spacing, e_fine]])
    ratio = e_coarse / e_fine if e_fine > 0 else math.inf
    report.check("grid.refinement_convergence", ratio >= 3.0, f"ratio={ratio:.3f}")

    _monte_carlo(p, seed, report, ctx, model, ledger)


def _monte_carlo(p, seed, report, ctx, model, ledger) -> None:
    n = p["mc_trials"]
    summary = run_trials(ctx, model, n, seed, workers=p["workers"])
    for key in ("mean_work", "mean_energy_change", "mean_shift_cost", "conditional_slope", "prior_variance"):
        est = getattr(summary, key)
        report.add(f"mc.{key}", {"value": est.value, "stderr": est.stderr}, "monte-carlo")
    report.add("mc.empirical_efficiency", summary.empirical_efficiency, "monte-carlo")
    zs = compare(summary, ledger)
    report.table("mc_zscores", ["quantity", "empirical", "stderr", "analytic", "z"],
                 [[z.quantity, z.empirical, z.stderr, z.analytic, z.z] for z in zs])
    report.table("mc_bins", ["bin", "x_low", "x_high", "count", "mean_x", "mean_p", "var_p"],
                 [[b.index, b.x_low, b.x_high, b.count, b.mean_x, b.mean_p, b.var_p]
                  for b in summary.binned_conditional_moments])
    for z in zs:
        report.check(f"mc.z_{z.quantity}", not z.flagged, f"z={z.z:.3f}")
    tz = total_variance_z(summary)
    report.check("mc.law_of_total_variance", abs(tz) < 5, f"z={tz:.3f}")
    report.check("mc.energy_change_negative", summary.mean_energy_change.value < 0)
    other = 1 if p["workers"] > 1 else 4
    again = run_trials(ctx, model, n, seed, workers=other)
    report.check("mc.reproducible_bitwise", again.to_json() == summary.to_json(), f"workers {p['workers']} vs {other}")


def mc_validate(p: dict, seed: int, report: Report) -> None:
    ctx = SystemContext(p["mass"], p["temperature"])
    model = MeasurementModel.from_sharpness(p["sharpness"], ctx.thermal_variance, p["coupling"])
    ledger = intervention_ledger(ctx, model)
    report.add("analytic.avg_work", ledger.avg_work, "analytic")
    report.add("analytic.avg_energy_change", ledger.avg_energy_change, "analytic")
    report.add("analytic.efficiency", ledger.efficiency, "analytic")
    _monte_carlo(p, seed, report, ctx, model, ledger)


def equivalence_pair(p: dict, seed: int, report: Report) -> None:
    ctx = SystemContext(p["mass"], p["temperature"])
    pair = equivalent_pair(ctx, p["target_variance"], p["noise"])
    f1 = final_state(ctx, MeasurementModel(pair.sigma_conservative))
    f2 = final_state(ctx, MeasurementModel(pair.sigma_noisy), p["noise"])
    report.add("sigma_conservative", pair.sigma_conservative, "analytic")
    report.add("sigma_noisy", pair.sigma_noisy, "analytic")
    for tag, led in (("conservative", pair.ledger_conservative), ("noisy", pair.ledger_noisy)):
        for key, value in led.as_dict().items():
            report.add(f"{tag}.{key}", value, "analytic")
        for name, ok in led.checks().items():
            report.check(f"{tag}.{name}", ok)
    report.add("final_conservative", {"mean": f1.mean, "variance": f1.variance}, "analytic")
    report.add("final_noisy", {"mean": f2.mean, "variance": f2.variance}, "analytic")
    report.check("final_means_equal", abs(f1.mean - f2.mean) <= 1e-12)
    report.check("final_variances_equal", abs(f1.variance - f2.variance) <= 1e-12,
                 f"{f1.variance!r} vs {f2.variance!r}")
    e1, e2 = pair.ledger_conservative.efficiency, pair.ledger_noisy.efficiency
    report.check("noisy_protocol_less_efficient", e2 < e1, f"eta_conservative={e1:.6g}, eta_noisy={e2:.6g}")
    report.table(
        "equivalence_pair",
        ["protocol", "sigma", "added_variance", "avg_work", "avg_energy_change", "efficiency", "entropy_change"],
        [
            ["conservative", pair.sigma_conservative, 0.0, pair.ledger_conservative.avg_work,
             pair.ledger_conservative.avg_energy_change, e1, pair.ledger_conservative.entropy_change],
            ["noisy", pair.sigma_noisy, p["noise"], pair.ledger_noisy.avg_work,
             pair.ledger_noisy.avg_energy_change, e2, pair.ledger_noisy.entropy_change],
        ],
    )


# collisions


def collision_grid(p: dict, seed: int, report: Report) -> None:
    grid = Grid1D(-p["half_width"], p["half_width"], p["points"])
    a = GaussianMoment(p["mean_a"], p["var_a"])
    b = GaussianMoment(p["mean_b"], p["var_b"])
    pa, pb = discretize(a, grid), discretize(b, grid)
    rows = []
    for v in p["noise_variances"]:
        joint = collision_map(pa, pb, noise_density(v, grid.spacing), workers=p["workers"])
        ma, mb = joint.marginal_a(), joint.marginal_b()
        rows.append([v, joint.mass(), ma.mean(), mb.mean(), ma.variance(), mb.variance(),
                     bool((joint.values >= 0).all())])
        tag = f"V={v:g}"
        report.check(f"mass_conserved_{tag}", abs(joint.mass() - 1) <= 1e-9, f"mass={joint.mass()!r}")
        report.check(f"nonnegative_{tag}", rows[-1][-1])
        report.check(f"mean_swap_{tag}", max(_rel(ma.mean(), pb.mean()), _rel(mb.mean(), pa.mean())) <= 1e-4)
        report.check(
            f"variance_addition_{tag}",
            max(_rel(ma.variance(), pb.variance() + v), _rel(mb.variance(), pa.variance() + v)) <= 1e-4,
            f"V(p_a,f)={ma.variance():.10g}, expected {pb.variance() + v:.10g}",
        )
        report.add(f"final_mean_a_{tag}", ma.mean(), "grid")
        report.add(f"final_variance_a_{tag}", ma.variance(), "grid")
    report.table("collision_grid", ["noise_variance", "mass", "mean_a_final", "mean_b_final",
                                    "variance_a_final", "variance_b_final", "nonnegative"], rows)
    joint = collision_map(pa, pb, noise_density(p["delta_variance"], grid.spacing), workers=p["workers"])
    l1 = joint.l1_distance(JointDistribution.product(pb, pa))
    report.add("delta_limit_l1", l1, "grid")
    report.check("delta_limit_joint_is_swapped_product", l1 <= 1e-3, f"L1={l1:.3e}")


def collision_gaussian(p: dict, seed: int, report: Report) -> None:
    s_u, s_v, s_vu = cov.symplectic_of_generators()
    for name, m in (("U", s_u), ("V", s_v), ("VU", s_vu)):
        err = cov.symplectic_error(m.matrix)
        report.add(f"symplectic_error_{name}", err, "covariance")
        report.check(f"symplectic_{name}", err <= 1e-12)
    report.add("S_VU", s_vu.matrix, "covariance")
    report.check("momentum_relation_p_a_final", np.array_equal(s_vu.matrix[1], [0, 0, 0, 1, 0, 1]))
    total = np.array([0, 1, 0, 1, 0, 0.0])
    report.check("total_momentum_conserved", np.allclose(total @ s_vu.matrix, total, atol=0, rtol=0))

    a = cov.single_mode(p["mean_qa"], p["mean_pa"])
    b = cov.single_mode(p["mean_qb"], p["mean_pb"])
    rows = []
    for v in p["aux_p_variances"]:
        pt = cov.collision_point(a, b, v)
        state_f = cov.collide(cov.collision_input(a, b, v))
        rows.append([v, pt.swap_fidelity, pt.momentum_swap_fidelity, pt.log_negativity_ab_c,
                     pt.ppt_physical_ab_c, pt.var_p_a_final, pt.min_symplectic_eigenvalue])
        tag = f"aux={v:g}"
        report.check(f"physical_output_{tag}", pt.min_symplectic_eigenvalue >= 0.5 - 1e-10)
        report.check(f"variance_addition_{tag}", _rel(pt.var_p_a_final, pt.var_p_a_expected) <= 1e-14)
        report.check(f"mean_swap_{tag}", state_f.mean[1] == b.mean[1] and state_f.mean[3] == a.mean[1])
        report.check(f"entangled_ab_c_{tag}", pt.log_negativity_ab_c > 0, f"E_N={pt.log_negativity_ab_c:.6g}")
        report.check(f"ppt_unphysical_when_entangled_{tag}", pt.ppt_physical_ab_c == (pt.log_negativity_ab_c == 0))
        report.check(f"global_time_reversal_physical_{tag}", cov.ppt_physicality(state_f, [0, 1, 2]))
        local = cov.SymplecticMap(np.diag([2.0, 0.5, 1, 1, 1, 1]))
        report.check(
            f"log_negativity_local_invariance_{tag}",
            abs(cov.log_negativity(cov.evolve(state_f, local), [2]) - pt.log_negativity_ab_c) <= 1e-9,
        )
    report.table("collision_gaussian", ["aux_p_variance", "swap_fidelity", "momentum_swap_fidelity",
                                        "log_negativity_ab_c", "ppt_physical_ab_c", "var_p_a_final",
                                        "min_symplectic_eigenvalue"], rows)

    vs = list(p["aux_p_variances"])
    smallest = rows[vs.index(min(vs))]
    report.add("swap_fidelity_most_squeezed", smallest[1], "covariance")
    report.add("momentum_swap_fidelity_most_squeezed", smallest[2], "covariance")
    report.check("swap_fidelity_above_0.999_when_squeezed", smallest[1] > 0.999, f"F={smallest[1]:.6g}")
    vac = cov.collision_point(a, b, 0.5)
    report.add("swap_fidelity_vacuum_aux", vac.swap_fidelity, "covariance")
    report.check("swap_fidelity_below_1_vacuum_aux", vac.swap_fidelity < 1)
    same = cov.collision_point(a, a, 0.5)
    report.add("swap_fidelity_identical_inputs", same.swap_fidelity, "covariance")
    report.check("swap_fidelity_1_identical_inputs", abs(same.swap_fidelity - 1) <= 1e-9,
                 f"F={same.swap_fidelity:.6g}")
    product = cov.collision_input(a, b, min(vs))
    report.check("log_negativity_product_zero", cov.log_negativity(product, [2]) == 0)
    report.check("ppt_physical_product", cov.ppt_physicality(product, [2]))
    big = rows[vs.index(max(vs))][3]
    report.check("log_negativity_small_at_large_aux_variance", big < 1e-3, f"E_N={big:.6g} at aux={max(vs):g}")


# oscillator


def _bound_rows(nbars, lam, min_dim):
    rows = []
    for nb in nbars:
        space = fock.FockSpace.for_thermal(nb, min_dim)
        pair = fock.build_measurement(space, lam)
        rho = fock.thermal_state(space, nb)
        de = fock.energy_increase(rho, pair)
        gq, gp = fock.variance_ratios(rho, pair)
        cond, _ = fock.measure(rho, pair, +1)
        e_cond = fock.energy(cond, space) + space.frequency / 2
        rows.append([nb, space.dim, lam, de, (2 * nb + 1) * space.frequency / 4, gq, gp, e_cond,
                     (2 * nb + 1) * space.frequency / 2 * (gq + 1 / gq)])
    return rows


def oscillator_binary(p: dict, seed: int, report: Report) -> None:
    space = fock.FockSpace(p["dim"])
    nbar, lam = p["nbar"], p["lam"]
    ops = fock.build_operators(space)

    interior = slice(0, space.dim - 2)
    comm = (ops.q @ ops.p - ops.p @ ops.q)[interior, interior] - 1j * np.eye(space.dim - 2)
    report.check("canonical_commutator_interior", np.max(np.abs(comm)) <= 1e-10)
    for lv in sorted(set(p["completeness_lambdas"]) | {lam}):
        pr = fock.build_measurement(space, lv)
        err = pr.completeness_error()
        report.add(f"povm_completeness_error_lam={lv:g}", err, "fock")
        report.check(f"povm_completeness_lam={lv:g}", err < 1e-10, f"error={err:.3e}")
        uerr = np.max(np.abs(pr.unitary.conj().T @ pr.unitary - np.eye(space.dim)))
        report.check(f"measurement_unitary_lam={lv:g}", uerr < 1e-10)

    pair = fock.build_measurement(space, lam)
    rho = fock.thermal_state(space, nbar)
    final, ledger = fock.parity_feedback(rho, pair)
    for key, value in ledger.as_dict().items():
        report.add(f"ledger.{key}", value, "fock")
    for name, ok in ledger.checks().items():
        report.check(name, ok)
    h = fock.shannon_entropy(fock.thermal_populations(space, nbar))
    gain = ledger.entropy_measured - h
    report.add("entropy_gain_over_thermal", gain, "fock")
    report.check("entropy_gain_equals_ln2", abs(gain - LN2) <= 0.01, f"S(rho')-H={gain:.6g}, ln2={LN2:.6g}")
    drop = ledger.feedback_entropy_drop
    report.check("feedback_removes_ln2", abs(drop - LN2) <= 0.01, f"drop={drop:.6g}")
    report.check("energy_accounting_closes",
                 abs((ledger.energy_final - ledger.energy_initial) - ledger.energy_added) <= 1e-10)
    report.check("states_valid", _valid(final, space) and _valid(fock.unconditional(rho, pair), space))

    kraus, channels = fock.parity_feedback_channels(pair)
    via_cptp = fock.cptp_intervention(rho, kraus, channels)
    report.check("cptp_reproduces_parity_feedback", np.max(np.abs(via_cptp.unconditional_state - final)) <= 1e-12)

    # thermalisation map on the feedback output
    therm = fock.thermalisation_map(final, pair, delta_e=ledger.energy_added)
    report.add("thermalisation.entropy_change", therm.entropy_change, "fock")
    report.add("thermalisation.energy_change", therm.energy_change, "fock")
    report.check("thermalisation_trace_preserved", abs(np.trace(therm.state) - 1) <= 1e-8)
    report.check("thermalisation_entropy_unchanged", therm.entropy_unchanged, f"dS={therm.entropy_change:.6g}")
    report.check("thermalisation_energy_change_minus_delta_e", bool(therm.energy_matches_minus_delta_e),
                 f"dE={therm.energy_change:.6g}, -DeltaE={-ledger.energy_added:.6g}")

    # overlap structure
    unit = fock.build_measurement(space, math.sqrt(fock.DELTA0))  # mu = 1
    gram = fock.phi_gram(unit)
    g_rows = []
    for n in range(6):
        g_rows.append([n, fock.overlap_g(n, unit), float(np.real(gram[n + 1, n]))])
    report.check("overlap_g_matches_direct_overlap",
                 all(abs(r[1] - r[2]) <= 1e-8 for r in g_rows),
                 "; ".join(f"n={r[0]}: g={r[1]:.6g}, direct={r[2]:.6g}" for r in g_rows))
    k = gram.shape[0]
    far = max(abs(gram[m, n]) for m in range(k) for n in range(k) if abs(m - n) >= 2)
    report.check("overlap_zero_beyond_neighbours", far <= 1e-10, f"max |<phi_m|phi_n>|, |m-n|>=2: {far:.3e}")

    spectra = []
    for n in range(space.max_level + 1):
        psi = fock.psi_state(n, pair)
        spectra.append([n, float(np.real(rho[n, n])), float(np.real(psi[n])), float(np.imag(psi[n])),
                        fock.parity_expectation(psi, space), fock.overlap_g(n, pair),
                        float(np.real(np.vdot(psi, ops.n @ psi)))])
    report.table("oscillator_levels", ["n", "thermal_population", "re_n_psi_n", "im_n_psi_n",
                                       "parity_psi_n", "g_n", "energy_psi_n"], spectra)

    # uncertainty-energy bounds
    bound = _bound_rows(p["bound_nbars"], p["bound_lam"], space.dim)
    for nb, dim, _, de, lim, gq, _, e_cond, e_lim in bound:
        report.check(f"gamma_le_half_nbar={nb:g}", gq <= 0.5, f"gamma={gq:.6g}")
        report.check(f"energy_increase_bound_nbar={nb:g}", de <= lim, f"dE={de:.6g} (N={dim}) vs {lim:.6g}")
        report.check(f"variance_energy_bound_nbar={nb:g}", e_cond <= e_lim, f"E={e_cond:.6g} vs {e_lim:.6g}")
    high_rows = []
    for nb in p["high_t_nbars"]:
        hs = fock.FockSpace.for_thermal(nb, space.dim)
        hp = fock.build_measurement(hs, lam)
        hr = fock.thermal_state(hs, nb)
        hf, hl = fock.parity_feedback(hr, hp)
        th = fock.thermalisation_map(hf, hp, hl.energy_added)
        kt_ln2 = fock.temperature_of(nb, hs.frequency) * LN2
        high_rows.append([nb, hs.dim, lam, hl.energy_added, th.energy_change, kt_ln2])
        report.check(f"high_t_energy_increase_bound_nbar={nb:g}", hl.energy_added <= 1.1 * kt_ln2,
                     f"dE={hl.energy_added:.6g} vs {1.1 * kt_ln2:.6g}")
        report.check(f"erasure_cost_bound_nbar={nb:g}", abs(th.energy_change) <= 1.1 * kt_ln2,
                     f"|dE_therm|={abs(th.energy_change):.6g} vs {1.1 * kt_ln2:.6g}")
    report.table("energy_bounds", ["nbar", "dim", "lambda", "energy_increase", "bound", "gamma_q",
                                   "momentum_ratio", "conditional_energy", "variance_bound"], bound)
    report.table("high_temperature", ["nbar", "dim", "lambda", "energy_increase",
                                      "thermalisation_energy_change", "kT_ln2"], high_rows)

    # truncation robustness
    small = fock.binary_summary(space, nbar, lam)
    large = fock.binary_summary(fock.FockSpace(2 * space.dim), nbar, lam)
    trunc_rows = [[key, small[key], large[key], abs(large[key] - small[key])] for key in small]
    report.table("truncation", ["scalar", f"N={space.dim}", f"N={2 * space.dim}", "abs_change"], trunc_rows)
    worst = max(trunc_rows, key=lambda r: r[3])
    report.check("truncation_robust", worst[3] < 1e-6, f"largest change {worst[3]:.3e} in {worst[0]}")


def _valid(rho, space) -> bool:
    try:
        fock.check_density(rho, space)
    except Exception:
        return False
    return True


# registry


Runner = Callable[[dict, int, Report], None]

_MC = {
    "mass": Param(float, 1.0, "particle mass m"),
    "temperature": Param(float, 1.0, "k_B T"),
    "coupling": Param(float, 1.0, "pointer coupling mu"),
    "sharpness": Param(float, 2.0, "measurement sharpness C"),
    "workers": Param(int, 1, "Monte Carlo worker threads"),
}

SCHEMAS: dict[str, dict[str, Param]] = {
    "classical-intervention": {
        **_MC,
        "sharpness_sweep": Param(float_list, (1.5, 2.0, 5.0, 100.0), "C values for the ledger table"),
        "grid_points": Param(int, 4096, "grid points over +-8 sd"),
        "outcome": Param(float, 0.7, "grid outcome x in units of the outcome sd"),
        "mc_trials": Param(int, 200_000, "Monte Carlo trials"),
    },
    "mc-validate": {**_MC, "mc_trials": Param(int, 1_000_000, "Monte Carlo trials")},
    "equivalence-pair": {
        "mass": Param(float, 1.0),
        "temperature": Param(float, 2.0),
        "target_variance": Param(float, 1.0, "final variance reached by both protocols"),
        "noise": Param(float, 0.5, "momentum variance added by the noisy control"),
    },
    "collision-grid": {
        "points": Param(int, 1024),
        "half_width": Param(float, 10.0),
        "mean_a": Param(float, 1.0),
        "var_a": Param(float, 0.5),
        "mean_b": Param(float, -1.0),
        "var_b": Param(float, 0.5),
        "noise_variances": Param(float_list, (0.0, 0.1, 1.0)),
        "delta_variance": Param(float, 1e-4, "noise variance used for the delta-limit check"),
        "workers": Param(int, 1),
    },
    "collision-gaussian": {
        "mean_qa": Param(float, 0.0),
        "mean_pa": Param(float, 1.0),
        "mean_qb": Param(float, 0.0),
        "mean_pb": Param(float, -1.0),
        "aux_p_variances": Param(float_list, (1e-6, 1e-3, 0.05, 0.5, 10.0, 1e3)),
    },
    "oscillator-binary": {
        "nbar": Param(float, 1.0),
        "lam": Param(float, 0.01),
        "dim": Param(int, 64),
        "completeness_lambdas": Param(float_list, (1e-3, 0.1, 1.0, 10.0)),
        "bound_nbars": Param(float_list, (1.0, 2.0, 5.0)),
        "bound_lam": Param(float, 0.1),
        "high_t_nbars": Param(float_list, (5.0, 10.0, 20.0)),
    },
}

RUNNERS: dict[str, Runner] = {
    "classical-intervention": classical_intervention,
    "mc-validate": mc_validate,
    "equivalence-pair": equivalence_pair,
    "collision-grid": collision_grid,
    "collision-gaussian": collision_gaussian,
    "oscillator-binary": oscillator_binary,
}
