"""
Main Application Module

This module ties the library modules together into the nekcm command line
tool. It parses arguments, merges them with an optional configuration file,
dispatches to the requested computation and writes machine-readable results.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from cmdyn import (
    PhasePoint,
    conservation_report,
    energy,
    hamiltonians,
    integrate,
    lax_residual,
    moment_map,
    moment_map_matrix,
    trajectory_rows,
)
from config import COMMANDS, RunConfig
from errors import ConfigError, NekError, ResonanceError
from lattice import ParamSet
from monitoring import RunMonitor
from nekrasov import (
    defect_density,
    n1_partition_function,
    n1_product_series,
    plancherel_limit_check,
    prepotential,
    z1_closed_form,
    z2_closed_form,
    z_inst,
)
from partitions import MultiPartition, Partition
from qqchar import Observable, expectation, pole_residue_check
from specfun import EllipticCurveParams, TheoryKind, eisenstein_invariants, set_precision, theta, weierstrass_p
from spectral import DiagonalData, GaudinData, build_D, curve_points, lax_from_D, residues_and_rank, spectral_curve
from utils.helpers import (
    load_json_file,
    parse_number,
    random_rational,
    random_rational_params,
    save_csv_file,
    save_json_file,
    setup_logging,
    to_jsonable,
)

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_RESONANCE = 3
EXIT_NUMERICAL = 4

DEFAULT_NOME = 0.1


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of exiting."""

    def error(self, message):
        raise ConfigError(message)


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command line arguments.

    Every option defaults to None so that values from --config survive unless
    they are given explicitly.

    Returns:
        argparse.Namespace: Parsed arguments
    """
    parser = _ArgumentParser(prog="nekcm", description="Calogero-Moser systems, Nekrasov measures and qq-characters")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Command group")
    parser.add_argument("action", help="Action within the command group")
    parser.add_argument("--config", type=str, help="Load a RunConfig JSON file")
    parser.add_argument("--save-config", type=str, help="Write the merged configuration to a file")
    parser.add_argument("--output", type=str, help="Result file")
    parser.add_argument("--format", dest="fmt", choices=["json", "csv"], help="Result file format")
    parser.add_argument("--seed", type=int, help="Seed of every random choice")
    parser.add_argument("--threads", type=int, help="Worker threads (NEK_THREADS overrides)")
    parser.add_argument("--log-level", type=str, help="Logging level")
    parser.add_argument("--dry-run", action="store_const", const=True, help="Validate the configuration only")
    parser.add_argument("--check", action="store_const", const=True, help="Fail with exit code 4 if a check fails")
    parser.add_argument("--exact", action="store_const", const="exact", dest="mode", help="Exact rational arithmetic")
    parser.add_argument("--mode", choices=["float64", "extended", "exact"], help="Numeric mode")
    parser.add_argument("--dps", type=int, help="Digits for extended mode")
    parser.add_argument("--progress", action="store_const", const=True, help="Show progress bars")
    parser.add_argument("--log-dir", type=str, help="Directory for the evaluation journal")
    parser.add_argument("--theory", choices=["4d", "5d", "6d"], help="Rational, trigonometric or elliptic theory")
    parser.add_argument("--N", type=int, help="Number of colors or particles")
    parser.add_argument("--r", type=int, help="Number of quiver nodes")
    parser.add_argument("--order", type=int, help="Truncation order")
    parser.add_argument("--inner-order", type=int, help="Inner qq-character truncation")
    parser.add_argument("--params", dest="params_file", type=str, help="Parameter JSON file")
    parser.add_argument("--kind", choices=["rational", "trig", "elliptic"], help="Calogero-Moser variant")
    parser.add_argument("--t", dest="t_end", type=float, help="Integration end time")
    parser.add_argument("--dt", type=float, help="Time step")
    parser.add_argument("--integrator", choices=["rk4", "leapfrog", "dop853"], help="Time integrator")
    parser.add_argument("--nu", type=float, help="Calogero-Moser coupling")
    parser.add_argument("--tau", type=float, nargs=2, metavar=("RE", "IM"), help="Modular parameter")
    parser.add_argument("--data", dest="data_file", type=str, help="Diagonal data JSON file")
    parser.add_argument("--check-product", action="store_true", help="Compare N=1 series with the product formula")
    parser.add_argument("--partition", type=str, help="Partition or multipartition as JSON")
    parser.add_argument("--x", type=str, help="Evaluation point (number or p/q)")
    parser.add_argument("--z", type=str, help="Spectral parameter or argument")
    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge a configuration file with explicit command line values."""
    base = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {key: value for key, value in vars(args).items() if key not in ("config", "save_config")}
    extra = dict(base.extra)
    for key in ("check_product", "partition", "x", "z"):
        value = overrides.pop(key, None)
        if value not in (None, False):
            extra[key] = value
    config = base.merged(overrides)
    config.extra = extra
    return config.validate()


def build_params(config: RunConfig, rng: np.random.Generator) -> ParamSet:
    """
    Parameters from the parameter file, or generic rational ones drawn from the seed.
    """
    if config.params_file:
        data = load_json_file(config.params_file)
        if not isinstance(data, dict):
            raise ConfigError(f"Parameter file {config.params_file} must hold a JSON object")
    else:
        data = random_rational_params(rng, config.N)
        data["q"] = Fraction(1, 10)
    kind = TheoryKind.from_label(config.theory, nome=DEFAULT_NOME)
    if "p_nome" in data:
        data = dict(data, p_nome=parse_number(data["p_nome"]))
    params = ParamSet.from_dict(data, kind, config.mode)
    if params.N != config.N:
        logger.info(f"Using N={params.N} from the parameter file")
    return params


# Command handlers return (result, table, passed); table is (header, rows) or None.

def run_cm(config: RunConfig, rng: np.random.Generator):
    N = config.N
    nu = config.nu
    tau = config.tau_complex
    if config.action == "moment-map":
        exact = config.exact
        x: List[Any] = []
        while len(x) < N:
            value = random_rational(rng)
            if value not in x:
                x.append(value)
        p = [random_rational(rng) for _ in range(N)]
        nu_value = Fraction(nu).limit_denominator(10 ** 6) if exact else nu
        P, z = moment_map_matrix(x if exact else [float(v) for v in x], p if exact else [float(v) for v in p],
                                 nu_value, exact=exact)
        mu = moment_map(P, x if exact else [float(v) for v in x], z, nu_value)
        if exact:
            passed = all(entry == 0 for entry in mu)
            residual = 0 if passed else 1
        else:
            residual = float(np.max(np.abs(mu)))
            passed = residual <= 1e-12
        return {"x": x, "p": p, "nu": nu, "moment_map_residual": residual, "exact": exact}, None, passed

    if config.kind == "rational":
        state = PhasePoint.random(rng, N, nu)
    else:
        state = PhasePoint.random_periodic(rng, N, nu)

    if config.action == "simulate":
        trajectory = integrate(state, config.kind, config.t_end, config.dt, tau=tau,
                               integrator=config.integrator, progress=config.progress)
        report = conservation_report(trajectory, k_max=3)
        if config.kind == "rational":
            passed = max(report["hamiltonian_drift"]) <= 1e-8
        else:
            passed = report["energy_drift"] <= 1e-7
        final = trajectory.final()
        result = {"initial": {"x": state.x, "p": state.p}, "final": {"x": final.x, "p": final.p},
                  "steps": len(trajectory) - 1, "report": report}
        return result, trajectory_rows(trajectory, 3), passed

    if config.action == "conserved":
        values = hamiltonians(state, max(3, N)) if config.kind == "rational" else []
        return {"x": state.x, "p": state.p, "H": values,
                "energy": energy(state, config.kind, tau)}, None, True

    # lax-check
    worst = 0.0
    for _ in range(100):
        sample = PhasePoint.random(rng, N, nu, complex_values=True)
        worst = max(worst, lax_residual(sample))
    return {"samples": 100, "max_relative_residual": worst}, None, worst <= 1e-10


def run_nek(config: RunConfig, rng: np.random.Generator):
    params = build_params(config, rng)
    threads = config.effective_threads()
    K = config.order
    if config.action == "z":
        series = z_inst(params, K, threads=threads, progress=config.progress)
        result: Dict[str, Any] = {"coefficients": series.coefficients()}
        passed = True
        if config.extra.get("check_product"):
            product = n1_product_series(params, K)
            series_n1 = n1_partition_function(params, K, threads)
            if config.exact:
                passed = series_n1 == product
            else:
                passed = series_n1.max_abs_difference(product) <= 1e-10
            result["product_coefficients"] = product.coefficients()
        if config.check and params.kind.is_rational and K >= 1:
            closed = [z1_closed_form(params)] + ([z2_closed_form(params)] if K >= 2 else [])
            result["closed_forms"] = closed
            for k, value in enumerate(closed, start=1):
                if abs(complex(series[k] - value)) > 1e-9 * max(1.0, abs(complex(value))):
                    passed = False
        return result, None, passed

    if config.action == "prepotential":
        series = prepotential(params, max(K, 1), threads=threads)
        return {"coefficients": series.coefficients()}, None, True

    if config.action == "plancherel":
        lam = Partition(tuple(json.loads(config.extra.get("partition", "[2, 1]"))))
        errors = plancherel_limit_check(lam, [10, 100, 1000])
        passed = all(b < a for a, b in zip(errors, errors[1:]))
        return {"partition": lam.to_json(), "scales": [10, 100, 1000], "relative_errors": errors}, None, passed

    # defect
    image = MultiPartition.from_json(json.loads(config.extra.get("partition", json.dumps([[1]] * params.N))))
    coloring = list(range(params.N))
    fugacities = [params.q] * params.N
    density = defect_density(image, coloring, fugacities, params, bound=max(K, image.total_size()))
    return {"image": image.to_json(), "bound": K, "density": density}, None, True


def run_qq(config: RunConfig, rng: np.random.Generator):
    params = build_params(config, rng)
    if not params.kind.is_rational and config.action == "check":
        raise ConfigError("Residue checks need the 4d theory")
    threads = config.effective_threads()
    K = config.order
    inner = config.inner_order if config.inner_order is not None else K
    if config.action == "check":
        report = pole_residue_check(params, K, inner, exact=config.exact, threads=threads)
        if config.exact:
            passed = report.max_residue == 0 and report.polynomial
        else:
            passed = report.max_residue <= 1e-8
        return report.to_dict(), None, passed

    x = parse_number(config.extra.get("x", "1/3"), exact=config.exact)
    if config.exact:
        params = params.convert("exact")
    series = expectation(Observable.qq(inner, K), params, K, x, threads)
    return {"x": x, "coefficients": series.coefficients()}, None, True


def run_spec(config: RunConfig, rng: np.random.Generator):
    N, r = config.N, config.r
    if config.action == "lax":
        if config.data_file:
            data = GaudinData.from_dict(load_json_file(config.data_file))
        else:
            data = GaudinData.random(N, r, rng)
        poles = data.poles()
        lax = lambda z: lax_from_D(data.D, z, poles).L
        residues = residues_and_rank(lax, poles)
        residuals = []
        for _ in range(10):
            z = complex(2.0 * np.exp(2j * np.pi * rng.random()))
            L = lax(z)
            for x in curve_points(data, z):
                det = np.linalg.det(x * np.eye(data.N) - L)
                residuals.append(float(abs(det) / max(1.0, np.linalg.norm(L) ** data.N)))
        passed = all(info.rank == 1 for info in residues) and max(residuals) <= 1e-8
        result = {"poles": poles, "residue_ranks": [info.rank for info in residues],
                  "sigma_ratios": [info.sigma_ratio for info in residues], "curve_check_residuals": residuals}
        return result, None, passed

    # curve
    Z = np.exp(2j * np.pi * rng.random((r + 1, N))) * (1 + rng.random((r + 1, N)))
    B = rng.normal(size=(r + 2, N)) + 1j * rng.normal(size=(r + 2, N))
    data = DiagonalData.linear(Z, B)
    residuals = []
    for _ in range(50):
        x = complex(rng.normal() + 1j * rng.normal()) * 3
        z = complex(rng.normal() + 1j * rng.normal()) * 3
        expected = spectral_curve(x, z, data.scalars(x), data.z_values())
        value = complex(np.linalg.det(build_D(z, x, data)))
        residuals.append(abs(value - expected) / max(1.0, abs(expected)))
    return {"z_values": data.z_values(), "det_residuals": residuals}, None, max(residuals) <= 1e-9


def run_pfun(config: RunConfig, rng: np.random.Generator):
    tau = config.tau_complex
    if config.action == "theta":
        kind = TheoryKind.from_label(config.theory, nome=DEFAULT_NOME)
        x = parse_number(config.extra.get("x", "1/3"))
        return {"theory": config.theory, "x": x, "theta": theta(x, kind)}, None, True
    z = parse_number(config.extra.get("z", "0.3"))
    curve = EllipticCurveParams.from_tau(tau)
    g2, g3 = eisenstein_invariants(tau)
    deviation = max(abs(curve.g2 - g2) / abs(g2), abs(curve.g3 - g3) / max(1.0, abs(g3)))
    result = {"tau": tau, "z": z, "wp": weierstrass_p(z, tau), "wp_prime": weierstrass_p(z, tau, derivative=1),
              "g2": curve.g2, "g3": curve.g3, "roots": list(curve.roots()), "eisenstein_deviation": deviation}
    return result, None, deviation <= 1e-9


HANDLERS = {"cm": run_cm, "nek": run_nek, "qq": run_qq, "spec": run_spec, "pfun": run_pfun}


def write_output(config: RunConfig, result: Dict[str, Any], table: Optional[Tuple[List[str], List[List[float]]]]):
    """Write the result file, or print the JSON result when no output path is set."""
    if config.output:
        if config.fmt == "csv":
            if table is None:
                raise ConfigError(f"{config.command} {config.action} has no tabular output")
            save_csv_file(table[0], table[1], config.output)
        else:
            save_json_file(result, config.output)
        logger.info(f"Results written to {config.output}")
    else:
        print(json.dumps(to_jsonable(result), indent=2, sort_keys=True))


def run(config: RunConfig, monitor: Optional[RunMonitor] = None) -> int:
    """
    Dispatch a validated configuration.

    Returns:
        int: exit status (0 success, 4 failed check)
    """
    monitor = monitor or RunMonitor(config.log_dir)
    rng = np.random.default_rng(config.seed)
    if config.dry_run:
        if config.command in ("nek", "qq"):
            build_params(config, rng)
        if config.data_file:
            load_json_file(config.data_file)
        print(f"Configuration for {config.command} {config.action} is valid")
        return EXIT_OK
    with set_precision(config.dps if config.mode == "extended" else 15):
        with monitor.track(f"{config.command} {config.action}", seed=config.seed):
            result, table, passed = HANDLERS[config.command](config, rng)
    result["passed"] = bool(passed)
    write_output(config, result, table)
    summary = monitor.get_stats()
    logger.info(f"{config.command} {config.action}: passed={passed} in {summary['avg_duration']:.3f}s")
    if config.check and not passed:
        logger.error(f"Check failed for {config.command} {config.action}")
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application."""
    try:
        args = parse_arguments(argv)
        config = build_config(args)
        try:
            setup_logging(config.log_level)
        except ValueError as e:
            raise ConfigError(str(e))
        if args.save_config:
            config.save(args.save_config)
        return run(config)
    except ConfigError as e:
        logger.error(f"Configuration error: {str(e)}")
        print(f"Configuration error: {str(e)}", file=sys.stderr)
        return EXIT_CONFIG
    except ResonanceError as e:
        logger.error(f"Resonant parameters: {str(e)}")
        print(f"Resonant parameters: {str(e)}", file=sys.stderr)
        return EXIT_RESONANCE
    except NekError as e:
        logger.error(f"Numerical failure: {str(e)}")
        print(f"Numerical failure: {str(e)}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as e:
        logger.critical(f"Critical error in main: {str(e)}")
        print(f"Critical error: {str(e)}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    exit(main())
