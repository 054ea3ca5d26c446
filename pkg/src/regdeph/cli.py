"""Command-line interface: reproducible runs with bit-stable outputs.

Every command reads one INI config; the resolved configuration (defaults
filled, seed override applied) is hashed and the hash embedded in all output
headers, so identical config+seed reruns produce byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bath import spectral_moments
from .codes import PairingPlan, encode_adjacent, encode_modulated, find_pairing
from .config import (
    ConfigError,
    RunConfig,
    build_bath,
    build_geometry,
    build_state,
    config_hash,
    dump_state,
    parse_config,
    parse_label,
    serialize_config,
    time_grid,
)
from .core import BasisLabel, RegisterState, factor_curves, fidelity_curve
from .geometry import RegisterGeometry
from .oracle import TruncationLeakageError, check_instance, default_suite
from .regimes import classify, disorder_average_weights

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3

COMMANDS = ("simulate", "classify", "encode", "pairing", "disorder-scan", "validate-oracle")


def _fmt(value: float, precision: int) -> str:
    return f"{value:.{precision}g}"


def _write_csv(path: Path, cfg_hash: str, header: str, rows, precision: int):
    """Write a CSV atomically: header comments, column names, formatted rows."""
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w") as fh:
            fh.write(f"# regdeph {__version__}\n")
            fh.write(f"# config-sha256 = {cfg_hash}\n")
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v, precision) if isinstance(v, float) else str(v)
                                  for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _write_text(path: Path, cfg_hash: str, body: str):
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w") as fh:
            fh.write(f"# regdeph {__version__}\n")
            fh.write(f"# config-sha256 = {cfg_hash}\n")
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _maybe_exports(cfg: RunConfig, geometry, bath, out_dir: Path, digest: str):
    precision = cfg.output.precision
    if cfg.output.export_positions:
        _write_csv(out_dir / "positions.csv", digest, "index,x,y,z",
                   ((i, float(x), float(y), float(z))
                    for i, x, y, z in geometry.positions_csv_rows()), precision)
    if cfg.output.export_modes:
        _write_csv(out_dir / "modes.csv", digest, "omega,g2,kx,ky,kz",
                   ((float(w), float(g), float(kx), float(ky), float(kz))
                    for w, g, kx, ky, kz in bath.modes_csv_rows()), precision)


def _parse_track_pairs(text: str, n_qubits: int) -> list[tuple[BasisLabel, BasisLabel]]:
    pairs = []
    for chunk in filter(None, (p.strip() for p in text.split(";"))):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ConfigError(f"run.track_pairs entry must be 'label,label': {chunk!r}")
        pairs.append((parse_label(parts[0], n_qubits), parse_label(parts[1], n_qubits)))
    return pairs


def _cmd_simulate(cfg: RunConfig, out_dir: Path, digest: str, threads: int) -> int:
    geometry = build_geometry(cfg)
    bath = build_bath(cfg)
    state = build_state(cfg, geometry.n_qubits)
    times = time_grid(cfg)
    fid = fidelity_curve(state, times, bath, geometry.positions)
    tracked = _parse_track_pairs(cfg.run.track_pairs, geometry.n_qubits)
    columns = ["t", "F"]
    extra = []
    for idx, (i, j) in enumerate(tracked):
        eta, phi = factor_curves(i, j, times, bath, geometry.positions)
        extra.append((eta, phi))
        columns += [f"eta_{idx}", f"phi_{idx}"]
    rows = []
    for n, t in enumerate(times):
        row = [float(t), float(fid[n])]
        for eta, phi in extra:
            row += [float(eta[n]), float(phi[n])]
        rows.append(row)
    _write_csv(out_dir / "simulate.csv", digest, ",".join(columns), rows,
               cfg.output.precision)
    _maybe_exports(cfg, geometry, bath, out_dir, digest)
    print(f"wrote {out_dir / 'simulate.csv'}")
    return EXIT_OK


def _cmd_classify(cfg: RunConfig, out_dir: Path, digest: str, threads: int) -> int:
    geometry = build_geometry(cfg)
    bath = build_bath(cfg)
    moments = spectral_moments(bath)
    report = classify(geometry, moments, m=cfg.run.m, v=bath.v)
    data = report.as_dict()
    for key, value in data.items():
        if isinstance(value, float):
            print(f"{key} = {_fmt(value, cfg.output.precision)}")
        else:
            print(f"{key} = {value}")
    print(json.dumps(data, sort_keys=True))
    return EXIT_OK


def _resolve_plan(cfg: RunConfig, geometry: RegisterGeometry) -> PairingPlan | None:
    if cfg.run.pair_m is not None and cfg.run.pair_n is not None:
        kbar = cfg.bath.peak.center if cfg.bath.peak is not None else None
        residual = (abs(cfg.run.pair_m * kbar * geometry.d / np.pi - cfg.run.pair_n)
                    if kbar is not None else 0.0)
        return PairingPlan(m=cfg.run.pair_m, n=cfg.run.pair_n, residual=residual)
    if cfg.bath.peak is None:
        raise ConfigError("modulated pairing needs run.pair_m/pair_n or a [peak] section")
    return find_pairing(cfg.bath.peak.center, geometry.d,
                        m_max=cfg.run.m_max, eps_tol=cfg.run.eps_tol)


def _cmd_pairing(cfg: RunConfig, out_dir: Path, digest: str, threads: int) -> int:
    geometry = build_geometry(cfg)
    if cfg.bath.peak is None:
        raise ConfigError("pairing needs a [peak] section with the dominant wavenumber")
    n_logical = geometry.n_qubits // 2 if geometry.n_qubits % 2 == 0 else None
    plan = find_pairing(cfg.bath.peak.center, geometry.d, m_max=cfg.run.m_max,
                        eps_tol=cfg.run.eps_tol, n_logical=n_logical)
    if plan is None:
        print("pairing = none")
        print(f"# no (m, n) with residual <= {cfg.run.eps_tol:g} for m <= {cfg.run.m_max}",
              file=sys.stderr)
        return EXIT_TOLERANCE
    print(f"m = {plan.m}")
    print(f"n = {plan.n}")
    print(f"epsilon = {_fmt(plan.residual, cfg.output.precision)}")
    if plan.pairs:
        print("pairs = " + ";".join(f"{a},{b}" for a, b in plan.pairs))
    return EXIT_OK


def _cmd_encode(cfg: RunConfig, out_dir: Path, digest: str, threads: int) -> int:
    geometry = build_geometry(cfg)
    if geometry.n_qubits % 2 != 0:
        raise ConfigError("encode needs an even number of physical qubits")
    n_logical = geometry.n_qubits // 2
    state = build_state(cfg, n_logical)
    if cfg.run.code == "adjacent":
        encoded = encode_adjacent(state)
    else:
        plan = _resolve_plan(cfg, geometry)
        if plan is None:
            print("pairing = none", file=sys.stderr)
            return EXIT_TOLERANCE
        encoded = encode_modulated(state, plan)
        print(f"pairing m = {plan.m}, n = {plan.n}, "
              f"epsilon = {_fmt(plan.residual, cfg.output.precision)}")
    path = out_dir / "encoded_state.txt"
    _write_text(path, digest, dump_state(encoded))
    print(f"wrote {path}")
    return EXIT_OK


def _default_scan_labels(n_qubits: int) -> tuple[BasisLabel, BasisLabel]:
    up = BasisLabel((1,) * n_qubits)
    spins = [1] * n_qubits
    spins[0] = -1
    return up, BasisLabel(tuple(spins))


def _cmd_disorder_scan(cfg: RunConfig, out_dir: Path, digest: str, threads: int) -> int:
    run = cfg.run
    if run.delta_steps < 1:
        raise ConfigError(f"run.delta_steps must be >= 1, got {run.delta_steps}")
    geometry = build_geometry(cfg)
    if run.label_i and run.label_j:
        label_i = parse_label(run.label_i, geometry.n_qubits)
        label_j = parse_label(run.label_j, geometry.n_qubits)
    else:
        label_i, label_j = _default_scan_labels(geometry.n_qubits)
    deltas = np.linspace(run.delta_min, run.delta_max, run.delta_steps)
    rows = []
    for delta in deltas:
        geo = RegisterGeometry(dims=geometry.dims, d=geometry.d,
                               delta=float(delta), seed=geometry.seed)
        est1, est2 = disorder_average_weights(label_i, label_j, run.k_magnitude,
                                              geo, run.samples, threads=threads)
        rows.append([float(delta), est1.mean, est1.stderr, est2.mean, est2.stderr])
    _write_csv(out_dir / "disorder_scan.csv", digest,
               "delta,mean_lambda1,stderr1,mean_lambda2,stderr2",
               rows, cfg.output.precision)
    print(f"wrote {out_dir / 'disorder_scan.csv'}")
    return EXIT_OK


def _cmd_validate_oracle(cfg: RunConfig, out_dir: Path, digest: str, threads: int) -> int:
    suite = default_suite(seed=cfg.geometry.seed, n_cold=cfg.run.instances,
                          thermal_samples=cfg.run.oracle_samples)
    all_ok = True
    for inst in suite:
        check = check_instance(inst)
        status = "PASS" if check.passed else "FAIL"
        print(f"{inst.name}: deviation = {check.deviation:.3e} "
              f"({check.kind}, tolerance {check.tolerance:.3e}) {status}")
        all_ok = all_ok and check.passed
    return EXIT_OK if all_ok else EXIT_TOLERANCE


_HANDLERS = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "encode": _cmd_encode,
    "pairing": _cmd_pairing,
    "disorder-scan": _cmd_disorder_scan,
    "validate-oracle": _cmd_validate_oracle,
}


def run_command(command: str, cfg: RunConfig, out_dir: str | Path = None,
                threads: int = 1, quiet: bool = False) -> int:
    """Dispatch one command against a resolved config; returns the exit code."""
    if command not in _HANDLERS:
        raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    digest = config_hash(cfg)
    out = Path(out_dir) if out_dir is not None else Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    if not quiet:
        print(f"# regdeph {__version__}")
        print(f"# command = {command}")
        print(f"# seed = {cfg.geometry.seed}")
        print(f"# config-sha256 = {digest}")
        for line in serialize_config(cfg).strip().splitlines():
            print(f"# {line}")
    return _HANDLERS[command](cfg, out, digest, threads)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="regdeph",
        description="Dephasing dynamics of qubit registers in a common bosonic bath.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the INI run configuration")
    parser.add_argument("--output", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo ops")
    parser.add_argument("--quiet", action="store_true", help="suppress the run header")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        return run_command(args.command, cfg, out_dir=args.output,
                           threads=max(1, args.threads), quiet=args.quiet)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TruncationLeakageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
