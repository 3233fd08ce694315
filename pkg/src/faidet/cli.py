"""Command-line front end: sweep presets, config-file sweeps, inspection.

Config files are INI-style with explicit units in the key names; every
[system] key must be present (no silent defaults at this boundary) and all
dB/dBm values are converted to linear units while parsing.  Example:

    [system]
    tx_antennas = 4
    num_dr = 2
    num_er = 2
    ports = 200
    antenna_size_wavelengths = 0.5
    rho = 1.0
    power_dbm = 30
    noise_dbm = -50
    sinr_threshold_db = 10
    energy_weight = 1.0
    dr_distance_m = 10
    er_distance_m = 3
    pathloss_exponent = 2.7
    port_stride = 1
    max_ao_iterations = 30
    ao_tolerance_w = 1e-6

    [sweep]
    parameter = N
    values = 1, 10, 50, 200
    trials = 200
    seed = 0
    baseline = true
    workers = 1

Per-receiver keys (antenna_size_wavelengths, rho, noise_dbm,
sinr_threshold_db, energy_weight) accept comma-separated lists.  Presets
fig2/fig3/fig4 pin the reference scenario (4 transmit antennas, 2 DRs at
10 m, 2 ERs at 3 m, 30 dBm power, -50 dBm noise, pathloss exponent 2.7)
and expand to one sweep per curve; multi-sweep runs append the curve label
to the output file stem.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import ao, experiments
from .beamforming import sinr_margins
from .channel import STREAM_TRIAL, derive_rng, generate_scenario
from .experiments import SweepSpec, db_to_linear, dbm_to_watts
from .sysmodel import SystemConfig, eh_power_at_port, realized_weighted_eh, weighted_eh

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    """Invalid or missing configuration; reported with the field name."""


def reference_config(**overrides) -> SystemConfig:
    """The simulation scenario all presets share."""
    base = dict(
        tx_antennas=4,
        num_dr=2,
        num_er=2,
        ports=200,
        antenna_size=0.5,
        rho=1.0,
        power_w=dbm_to_watts(30.0),
        noise_w=dbm_to_watts(-50.0),
        sinr_threshold=db_to_linear(10.0),
        energy_weight=1.0,
        dr_distance_m=10.0,
        er_distance_m=3.0,
        pathloss_exponent=2.7,
        port_stride=1,
        max_ao_iterations=30,
        ao_tolerance_w=1e-6,
    )
    base.update(overrides)
    return SystemConfig(**base)


def preset_sweeps(name: str) -> list[tuple[str, SweepSpec]]:
    """Named sweep bundles reproducing the reference experiments.

    fig2: harvested power vs port count for two antenna sizes, with the
          fixed-array benchmark.
    fig3: harvested power vs SINR threshold for two antenna sizes at
          N = 200, with the benchmark.
    fig4: harvested power vs SINR threshold for CSI stride / accuracy
          combinations at W = 0.5, N = 200.
    """
    if name == "fig2":
        return [
            (
                f"w{str(w).replace('.', '')}",
                SweepSpec(
                    base=reference_config(antenna_size=w),
                    parameter="N",
                    values=(1, 10, 50, 200),
                    run_baseline=True,
                ),
            )
            for w in (0.2, 0.5)
        ]
    if name == "fig3":
        return [
            (
                f"w{str(w).replace('.', '')}_n200",
                SweepSpec(
                    base=reference_config(antenna_size=w),
                    parameter="gamma_db",
                    values=(4.0, 6.0, 8.0, 10.0, 12.0),
                    run_baseline=True,
                ),
            )
            for w in (0.2, 0.5)
        ]
    if name == "fig4":
        sweeps = []
        for stride in (1, 2, 4):
            for rho in (0.9, 0.95, 1.0):
                label = f"l{stride}_rho{str(rho).replace('.', '')}"
                sweeps.append(
                    (
                        label,
                        SweepSpec(
                            base=reference_config(rho=rho, port_stride=stride),
                            parameter="gamma_db",
                            values=(4.0, 8.0, 10.0, 12.0),
                        ),
                    )
                )
        return sweeps
    raise ConfigError(f"unknown preset {name!r} (expected fig2, fig3 or fig4)")


def _get(section: configparser.SectionProxy, key: str, convert, section_name: str):
    if key not in section:
        raise ConfigError(f"missing required key: [{section_name}] {key}")
    raw = section[key]
    try:
        return convert(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid value for [{section_name}] {key}: {raw!r} ({exc})") from exc


def _scalar_or_list(convert):
    def parse(raw: str):
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty value")
        values = tuple(convert(p) for p in parts)
        return values[0] if len(values) == 1 else values

    return parse


def _map_values(value, func):
    if isinstance(value, tuple):
        return tuple(func(v) for v in value)
    return func(value)


def _bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def load_config(path: str) -> tuple[SystemConfig, dict]:
    """Parse and validate a config file; raises ConfigError with the field."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    if "system" not in parser:
        raise ConfigError("missing required section: [system]")
    sys_sec = parser["system"]
    floats = _scalar_or_list(float)
    config = SystemConfig(
        tx_antennas=_get(sys_sec, "tx_antennas", int, "system"),
        num_dr=_get(sys_sec, "num_dr", int, "system"),
        num_er=_get(sys_sec, "num_er", int, "system"),
        ports=_get(sys_sec, "ports", int, "system"),
        antenna_size=_get(sys_sec, "antenna_size_wavelengths", floats, "system"),
        rho=_get(sys_sec, "rho", floats, "system"),
        power_w=dbm_to_watts(_get(sys_sec, "power_dbm", float, "system")),
        noise_w=_map_values(_get(sys_sec, "noise_dbm", floats, "system"), dbm_to_watts),
        sinr_threshold=_map_values(
            _get(sys_sec, "sinr_threshold_db", floats, "system"), db_to_linear
        ),
        energy_weight=_get(sys_sec, "energy_weight", floats, "system"),
        dr_distance_m=_get(sys_sec, "dr_distance_m", float, "system"),
        er_distance_m=_get(sys_sec, "er_distance_m", float, "system"),
        pathloss_exponent=_get(sys_sec, "pathloss_exponent", float, "system"),
        port_stride=_get(sys_sec, "port_stride", int, "system"),
        max_ao_iterations=_get(sys_sec, "max_ao_iterations", int, "system"),
        ao_tolerance_w=_get(sys_sec, "ao_tolerance_w", float, "system"),
    )
    try:
        config.validate()
    except ValueError as exc:
        raise ConfigError(f"invalid [system] configuration: {exc}") from exc

    sweep = {}
    if "sweep" in parser:
        sec = parser["sweep"]
        sweep["parameter"] = _get(sec, "parameter", str.strip, "sweep")
        if sweep["parameter"] in ("N", "L"):
            values = _get(sec, "values", _scalar_or_list(int), "sweep")
        else:
            values = _get(sec, "values", _scalar_or_list(float), "sweep")
        sweep["values"] = values if isinstance(values, tuple) else (values,)
        sweep["trials"] = int(sec.get("trials", "200"))
        sweep["seed"] = int(sec.get("seed", "0"))
        sweep["baseline"] = _bool(sec.get("baseline", "false"))
        sweep["workers"] = int(sec.get("workers", "1"))
    return config, sweep


def _spec_from_file(path: str, args) -> SweepSpec:
    config, sweep = load_config(path)
    if not sweep:
        raise ConfigError("missing required section: [sweep]")
    return SweepSpec(
        base=config,
        parameter=sweep["parameter"],
        values=sweep["values"],
        trials=sweep["trials"],
        master_seed=sweep["seed"],
        run_baseline=sweep["baseline"],
        workers=sweep["workers"],
    )


def _apply_overrides(spec: SweepSpec, args) -> SweepSpec:
    import dataclasses

    updates = {}
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.baseline is not None:
        updates["run_baseline"] = args.baseline
    return dataclasses.replace(spec, **updates) if updates else spec


def cmd_run(args) -> int:
    if bool(args.preset) == bool(args.config):
        print("error: exactly one of --preset or --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.preset:
            sweeps = preset_sweeps(args.preset)
            out_default = f"{args.preset}.csv"
        else:
            sweeps = [("", _spec_from_file(args.config, args))]
            out_default = Path(args.config).stem + ".csv"
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out if args.out else out_default)
    for label, spec in sweeps:
        spec = _apply_overrides(spec, args)
        target = out if len(sweeps) == 1 else out.with_name(f"{out.stem}_{label}{out.suffix}")
        result = experiments.run_sweep(spec, timing=args.timing)
        experiments.emit_csv(result, str(target))
        n_err = sum(1 for r in result.records if r.status == experiments.STATUS_ERROR)
        n_inf = sum(1 for r in result.records if r.status == ao.STATUS_INFEASIBLE)
        note = ""
        if n_inf:
            note += f", {n_inf} infeasible trials"
        if n_err:
            note += f", {n_err} failed trials"
        print(f"wrote {target} ({len(result.records)} rows{note})")
    return EXIT_OK


def cmd_inspect(args) -> int:
    try:
        if args.preset:
            config = preset_sweeps(args.preset)[0][1].base
        elif args.config:
            config, _ = load_config(args.config)
        else:
            config = reference_config()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    seed = args.seed if args.seed is not None else 0
    rng = derive_rng(seed, STREAM_TRIAL, 0)
    channels = generate_scenario(rng, config)
    result = ao.optimize(channels, config)

    print(
        f"scenario: M={config.tx_antennas} K_D={config.num_dr} K_E={config.num_er} "
        f"N={config.ports} L={config.port_stride} P={config.power_w} W, seed={seed}"
    )
    print(f"status: {result.status} after {result.iterations} iterations")
    trace = ", ".join(f"{v:.6e}" for v in result.objective_trace)
    print(f"objective trace [W]: {trace}")
    if result.solution is None:
        print("no feasible solution at this seed")
        return EXIT_RUNTIME
    margins = sinr_margins(result.solution, result.ports, channels, config)
    for i in range(config.num_dr):
        print(
            f"DR {i}: port {result.ports.dr_ports[i]}, "
            f"SINR margin {margins[i]:+.3e} (relative to threshold)"
        )
    for j in range(config.num_er):
        eh = eh_power_at_port(j, result.ports.er_ports[j], result.solution, channels, config)
        print(f"ER {j}: port {result.ports.er_ports[j]}, harvested {eh:.6e} W")
    print(f"weighted EH (estimated): {weighted_eh(result.solution, result.ports, channels, config):.6e} W")
    print(f"weighted EH (realized):  {realized_weighted_eh(result.solution, result.ports, channels, config):.6e} W")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .oracles import run_selftest

    checks = run_selftest()
    failed = 0
    for name, ok, detail in checks:
        marker = "PASS" if ok else "FAIL"
        print(f"[{marker}] {name} ({detail})")
        failed += 0 if ok else 1
    if failed:
        print(f"{failed}/{len(checks)} checks failed")
        return EXIT_RUNTIME
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faidet",
        description="Fluid-antenna IDET simulation: joint port selection and beamforming.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a sweep from a preset or config file")
    run.add_argument("--preset", choices=("fig2", "fig3", "fig4"))
    run.add_argument("--config", help="INI config file (see module docstring)")
    run.add_argument("--out", help="output CSV path (multi-sweep presets append a label)")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    base_group = run.add_mutually_exclusive_group()
    base_group.add_argument("--baseline", dest="baseline", action="store_true", default=None)
    base_group.add_argument("--no-baseline", dest="baseline", action="store_false")
    run.add_argument(
        "--timing",
        action="store_true",
        help="record wall-clock per trial (makes the CSV run-dependent)",
    )
    run.set_defaults(func=cmd_run)

    inspect = sub.add_parser("inspect", help="run and report a single trial in detail")
    inspect.add_argument("--preset", choices=("fig2", "fig3", "fig4"))
    inspect.add_argument("--config")
    inspect.add_argument("--seed", type=int)
    inspect.set_defaults(func=cmd_inspect)

    selftest = sub.add_parser("selftest", help="run the embedded oracle suite")
    selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
