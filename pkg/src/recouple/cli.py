"""Command-line interface.

Subcommands: ``aht verify`` (coefficient cross-check table),
``gate-fidelity``, ``sawtooth``, ``husimi``, ``fit``.
"""

from __future__ import annotations

import csv
import json
import sys
from fractions import Fraction

import click
import numpy as np

from . import analysis
from .aht import (
    J2_MONOMIAL_WEIGHTS,
    SECOND_ORDER_DENOM,
    SECOND_ORDER_PAIR_ROWS,
    aht_terms,
    extract_pauli_coefficient,
    j2_coefficient,
)
from .model import CHAIN4, GRID3X3, LatticeSpec, SpinSystem, build_couplings, dipole_hamiltonian
from .processor import Processor
from .qstate import StateVector
from .sawtooth import SawtoothParams, initial_state, sawtooth_circuit
from .sequences import (
    ORIGINAL,
    RANDOMIZED,
    RANDOMIZED_SYMMETRIZED,
    super_whh_schedule,
    toggled_sequence,
)

SCHEME_BY_NAME = {
    "original": ORIGINAL,
    "randomized": RANDOMIZED,
    "symmetrized": RANDOMIZED_SYMMETRIZED,
}


def parse_nswhh(text: str) -> tuple:
    """'4,6,8' or '4..20' or '4..20..2'."""
    if ".." in text:
        parts = [int(p) for p in text.split("..")]
        if len(parts) == 2:
            lo, hi, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            lo, hi, step = parts
        else:
            raise click.BadParameter(f"cannot parse n_swhh range {text!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(p) for p in text.split(","))


def parse_pair(text: str) -> tuple:
    k, l = (int(p) for p in text.split(","))
    return (k, l)


@click.group()
def main():
    """Selective-recoupling pulse simulator."""


@main.group()
def aht():
    """Average-Hamiltonian diagnostics."""


def _solve_monomial_rows():
    """Extract the 15 second-order pair coefficients from the engine by
    solving five generic three-spin systems."""
    coupling_sets = [(1.0, 0.7, 1.3), (0.9, 1.2, 0.8), (1.1, 0.5, 0.6),
                     (0.7, 1.4, 1.0), (1.3, 0.9, 1.1)]
    rows_num = {"x": [], "y": [], "z": []}
    design = []
    for j_ak, j_al, j_kl in coupling_sets:
        J = np.zeros((3, 3))
        J[0, 1] = J[1, 0] = j_ak
        J[0, 2] = J[2, 0] = j_al
        J[1, 2] = J[2, 1] = j_kl
        system = SpinSystem(3, J)
        pw = toggled_sequence(super_whh_schedule(1, 2, 1.0), dipole_hamiltonian(system))
        h2 = aht_terms(pw, 2).h2
        for ax in "xyz":
            rows_num[ax].append(extract_pauli_coefficient(h2, 3, {1: ax, 2: ax}))
        design.append([
            j_al**2 * j_ak, j_ak**2 * j_al, j_al * j_ak * j_kl,
            j_ak**2 * j_kl, j_al**2 * j_kl,
        ])
    design = np.array(design)
    solved = {}
    for ax in "xyz":
        solved[ax] = np.linalg.solve(design, np.array(rows_num[ax])) * SECOND_ORDER_DENOM
    return solved


@aht.command("verify")
def aht_verify():
    """Cross-check engine output against the closed-form coefficient tables."""
    monomials = ("J_al^2 J_ak", "J_ak^2 J_al", "J_al J_ak J_kl",
                 "J_ak^2 J_kl", "J_al^2 J_kl")
    solved = _solve_monomial_rows()
    click.echo("second-order pair coefficients (units tau^2/1728)")
    click.echo(f"{'term':<28}{'engine':>14}{'closed form':>14}{'abs err':>12}{'rel err':>12}")
    worst = 0.0
    for ax in "xyz":
        for name, got, want in zip(monomials, solved[ax], SECOND_ORDER_PAIR_ROWS[ax]):
            abs_err = abs(got - want)
            rel_err = abs_err / abs(want)
            worst = max(worst, rel_err)
            click.echo(f"s{ax}s{ax} * {name:<22}{got:>14.6f}{want:>14d}{abs_err:>12.2e}{rel_err:>12.2e}")
    click.echo(f"worst relative error: {worst:.2e}")

    click.echo("\nsymmetrized monomial weights (column means, exact rationals)")
    cols = list(zip(*(SECOND_ORDER_PAIR_ROWS[ax] for ax in "xyz")))
    means = [Fraction(sum(col), 3 * SECOND_ORDER_DENOM) for col in cols]
    expect = [J2_MONOMIAL_WEIGHTS[0], J2_MONOMIAL_WEIGHTS[0], J2_MONOMIAL_WEIGHTS[1],
              J2_MONOMIAL_WEIGHTS[2], J2_MONOMIAL_WEIGHTS[2]]
    ok = True
    for name, got, want in zip(monomials, means, expect):
        match = "ok" if got == want else "MISMATCH"
        ok = ok and got == want
        click.echo(f"{name:<18} {str(got):>10} vs {str(want):>10}   {match}")

    click.echo("\ngrid second-order strengths j2 / J^3")
    grid = build_couplings(LatticeSpec(GRID3X3))
    refs = {
        "(0,1) edge":   (j2_coefficient(grid, 0, 1).j2, -923 / 192 + 113 / (54 * np.sqrt(2))),
        "(3,4) center": (j2_coefficient(grid, 3, 4).j2, -2357 / 288 + 113 / (27 * np.sqrt(2))),
    }
    for name, (got, want) in refs.items():
        click.echo(f"{name:<14} engine {got:+.12f}   closed form {want:+.12f}   "
                   f"abs err {abs(got-want):.2e}")
    if worst > 1e-9 or not ok:
        raise SystemExit(1)


def _common_output(results, out, fmt, experiment):
    if out:
        analysis.emit_results(results, fmt, out, experiment)
        click.echo(f"wrote {out}")
    else:
        text = (analysis.results_csv(results, experiment) if fmt == "csv"
                else analysis.results_json(results))
        click.echo(text, nl=False)


@main.command("gate-fidelity")
@click.option("--lattice", type=click.Choice([CHAIN4, GRID3X3]), default=CHAIN4)
@click.option("--pair", default="1,2", help="logical pair k,l")
@click.option("--phi", type=float, default=np.pi / 4)
@click.option("--nswhh", default="10", help="list '4,6,8' or range '4..20[..step]'")
@click.option("--scheme", type=click.Choice(list(SCHEME_BY_NAME)), default="original")
@click.option("--calibration", type=click.Choice(["0", "2"]), default="0")
@click.option("--runs", type=int, default=100)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON experiment config; explicit flags still apply to unset fields")
def gate_fidelity(lattice, pair, phi, nswhh, scheme, calibration, runs, seed, out, fmt, config_path):
    """Mean fidelity of a synthesized exchange gate vs repetition count."""
    if config_path:
        config = analysis.ExperimentConfig.from_json(open(config_path).read())
    else:
        config = analysis.ExperimentConfig(
            experiment=analysis.GATE_EXPERIMENT,
            lattice=lattice,
            scheme=SCHEME_BY_NAME[scheme],
            calibration_order=int(calibration),
            n_swhh_values=parse_nswhh(nswhh),
            runs=runs,
            master_seed=seed,
            pair=parse_pair(pair),
            phi=phi,
        )
    results = analysis.run_experiment(config)
    _common_output(results, out, fmt, analysis.GATE_EXPERIMENT)


@main.command("sawtooth")
@click.option("--nq", type=int, default=9)
@click.option("--k-param", "--K", "k_param", type=float, default=-0.5)
@click.option("--iterations", type=int, default=25)
@click.option("--nswhh", default="10")
@click.option("--scheme", type=click.Choice(list(SCHEME_BY_NAME)), default="original")
@click.option("--calibration", type=click.Choice(["0", "2"]), default="0")
@click.option("--runs", type=int, default=10)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def sawtooth_cmd(nq, k_param, iterations, nswhh, scheme, calibration, runs, seed, out, fmt, config_path):
    """Fidelity decay of the quantum sawtooth map on the nine-qubit grid."""
    if config_path:
        config = analysis.ExperimentConfig.from_json(open(config_path).read())
    else:
        config = analysis.ExperimentConfig(
            experiment=analysis.SAWTOOTH_EXPERIMENT,
            lattice=GRID3X3,
            scheme=SCHEME_BY_NAME[scheme],
            calibration_order=int(calibration),
            n_swhh_values=parse_nswhh(nswhh),
            iterations=iterations,
            runs=runs,
            master_seed=seed,
            n_q=nq,
            K=k_param,
        )
    results = analysis.run_experiment(config)
    _common_output(results, out, fmt, analysis.SAWTOOTH_EXPERIMENT)


@main.command("husimi")
@click.option("--nq", type=int, default=9)
@click.option("--k-param", "--K", "k_param", type=float, default=-0.5)
@click.option("--iterations", type=int, default=25)
@click.option("--window", type=int, default=10, help="average over the final WINDOW iterations")
@click.option("--nswhh", type=int, default=10)
@click.option("--scheme", type=click.Choice(list(SCHEME_BY_NAME)), default="original")
@click.option("--calibration", type=click.Choice(["0", "2"]), default="0")
@click.option("--seed", type=int, default=0)
@click.option("--resolution", type=int, default=64)
@click.option("--ideal", is_flag=True, help="evolve with exact blocks instead of noisy ones")
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def husimi_cmd(nq, k_param, iterations, window, nswhh, scheme, calibration, seed,
               resolution, ideal, out, fmt):
    """Husimi phase-space density averaged over a late-time window."""
    lattice = LatticeSpec(GRID3X3)
    system = build_couplings(lattice)
    params = SawtoothParams(n_q=nq, K=k_param)
    proc = Processor(system, nswhh, SCHEME_BY_NAME[scheme], int(calibration), lattice)
    circuit = sawtooth_circuit(params)
    rng = np.random.default_rng([seed, 0])
    state = initial_state(params)
    window_states = []
    for t in range(1, iterations + 1):
        if ideal:
            state, _, _ = proc.ideal(circuit, state)
        else:
            state, _, _ = proc.execute(circuit, state, rng)
        if t > iterations - window:
            window_states.append(state)
    grid = analysis.husimi_grid(window_states, (resolution, resolution))
    if fmt == "json":
        payload = {
            "theta": grid.theta.tolist(),
            "p": grid.p.tolist(),
            "values": grid.values.tolist(),
            "total_mass": grid.total_mass(),
        }
        text = json.dumps(payload, indent=2)
    else:
        import io
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["theta_index", "p_index", "theta", "p", "value"])
        for b in range(resolution):
            for a in range(resolution):
                writer.writerow([a, b, repr(float(grid.theta[a])), repr(float(grid.p[b])),
                                 repr(float(grid.values[b, a]))])
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.command("fit")
@click.option("--model", type=click.Choice(list(analysis.FIT_MODELS)), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--nswhh", type=int, default=None, help="needed for the t-dependent models")
@click.option("--min-x", type=float, default=None, help="drop points with x below this")
def fit_cmd(model, in_path, nswhh, min_x):
    """Fit a decay model to a CSV produced by gate-fidelity or sawtooth."""
    with open(in_path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    points = []
    for row in rows:
        x = float(row["t"]) if "t" in row else float(row["n_swhh"])
        if min_x is not None and x < min_x:
            continue
        points.append((x, float(row["mean_fidelity"])))
    if model in ("t2_over_n4", "t_over_n5") and nswhh is None and rows and "n_swhh" in rows[0]:
        ns = {row["n_swhh"] for row in rows}
        if len(ns) == 1:
            nswhh = int(next(iter(ns)))
    res = analysis.fit_decay(points, model, n_swhh=nswhh)
    click.echo(json.dumps({"model": res.model, "constant": res.constant,
                           "residual": res.residual, "points": res.points}))


if __name__ == "__main__":
    main()
