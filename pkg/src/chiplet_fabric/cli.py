"""Command-line front end.

Every subcommand writes a CSV (to ``--output`` or stdout) whose leading ``#``
lines record the fully resolved configuration and seed, then prints a
one-line summary (to stdout when writing a file, otherwise to stderr).

Exit codes: 0 success, 1 model-range error, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Callable, Sequence

from . import channel as ch
from . import errdetect, fidmodel, fragsim, swapchain
from . import topology as topo

SEED_ENV = "CHIPLET_FABRIC_SEED"
SUBCOMMANDS = ("topo-metrics", "fid-sweep", "required-link", "chain-compare", "ecc-table",
               "frag-sim", "yield")

CX_PRESETS = {
    "mumbai": fidmodel.F_CX_MUMBAI,
    "hybrid_threshold": fidmodel.F_CX_HYBRID_THRESHOLD,
    "surface_threshold": fidmodel.F_CX_SURFACE_THRESHOLD,
    "bacon_shor_threshold": fidmodel.F_CX_BACON_SHOR_THRESHOLD,
}

MODEL_ERRORS = (fidmodel.ModelRangeError, ch.ChannelError, swapchain.ChainError,
                errdetect.CodeError, fragsim.SimulationError, topo.TopologyError,
                topo.InvalidParameter)


class ConfigError(ValueError):
    """Missing, unknown or malformed configuration value."""


# -------------------------------------------------------------------- config

def _parse_chips(text: str) -> tuple[int, int]:
    parts = str(text).lower().split("x")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"chips must look like WxH or N: {text!r}") from None
    if len(dims) == 1:
        return dims[0], 1
    if len(dims) != 2:
        raise ConfigError(f"chips must look like WxH or N: {text!r}")
    return dims


def _parse_floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(",", " ").split())


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    seed: int
    output: str | None = None
    layout: str | None = None
    chips: tuple[int, int] | None = None
    n_target: int | None = None
    depth: int | None = None
    dump_topology: str | None = None
    family: str = "falcon"
    n_max: int = 4000
    full: bool = False
    cx_preset: str | None = None
    f_cx_chip: float = fidmodel.F_CX_MUMBAI
    n_chip: int = topo.FALCON_SIZE
    delta_infid: float = 0.0002
    f_link: float = 0.91
    deltas: tuple[float, ...] = (0.0, 0.0001, 0.0002, 0.0005)
    d4_preset: str = "montreal"
    d4: ch.D4Params = field(default_factory=lambda: ch.D4_PRESETS["montreal"])
    link_eta: float = 0.12
    m_max: int = 20
    k_max: int = 20
    dump_choi: str | None = None
    max_n: int = 10
    n_circuits: int = 30
    circuit_depth: int = 12
    qubits: int = 50
    p_defect: float = 0.01
    chips_needed: int = 20

    @property
    def scaling(self) -> fidmodel.ScalingParams:
        return fidmodel.ScalingParams(self.f_cx_chip, self.n_chip, self.delta_infid, self.f_link)

    @property
    def trials(self) -> tuple[int, int]:
        return (800, 60) if self.full else (80, 6)

    def header(self) -> list[str]:
        data = asdict(self)
        data["d4"] = list(self.d4.as_array())
        return [f"# {k}={json.dumps(v)}" for k, v in data.items()]


# Parsers for keys accepted from config files and flags.
_KEY_TYPES: dict[str, Callable[[Any], Any]] = {
    "seed": int, "output": str, "layout": str, "chips": _parse_chips, "n_target": int,
    "depth": int, "dump_topology": str, "family": str, "n_max": int, "full": _parse_bool,
    "cx_preset": str, "f_cx_chip": float, "n_chip": int, "delta_infid": float,
    "f_link": float, "deltas": _parse_floats, "d4_preset": str, "epsilon": float,
    "eta": float, "delta": float, "theta": float, "link_eta": float, "m_max": int,
    "k_max": int, "dump_choi": str, "max_n": int, "n_circuits": int, "circuit_depth": int,
    "qubits": int, "p_defect": float, "chips_needed": int,
}
_D4_KEYS = ("epsilon", "eta", "delta", "theta")


def _coerce(key: str, value: Any) -> Any:
    if key not in _KEY_TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        return _KEY_TYPES[key](value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from None


def read_config_file(path: str) -> dict[str, Any]:
    """Flat key/value pairs from an INI file; section names only group keys."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    values: dict[str, Any] = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key in values:
                raise ConfigError(f"key {key!r} appears in more than one section")
            values[key] = _coerce(key, raw)
    return values


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer: {raw!r}") from None


def resolve_config(subcommand: str, file_values: dict[str, Any] | None = None,
                   flag_values: dict[str, Any] | None = None) -> RunConfig:
    """Merge defaults, file values and flags (flags win) into a validated RunConfig."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}; choose from {SUBCOMMANDS}")
    merged: dict[str, Any] = {}
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            if value is not None:
                merged[key] = _coerce(key, value)
    seed = merged.pop("seed", None)
    if seed is None:
        seed = _env_seed()
    cfg = RunConfig(subcommand=subcommand, seed=0 if seed is None else seed)

    preset = merged.pop("cx_preset", None)
    if preset is not None:
        if preset not in CX_PRESETS:
            raise ConfigError(f"unknown cx preset {preset!r}; valid presets: {sorted(CX_PRESETS)}")
        merged.setdefault("f_cx_chip", CX_PRESETS[preset])
        merged["cx_preset"] = preset

    d4_name = merged.get("d4_preset", cfg.d4_preset)
    explicit = {k: merged.pop(k) for k in _D4_KEYS if k in merged}
    if explicit:
        missing = [k for k in _D4_KEYS if k not in explicit]
        if missing:
            raise ConfigError(f"missing required key {missing[0]!r} for explicit D4 parameters")
        try:
            merged["d4"] = ch.D4Params(**explicit)
        except ch.ChannelError as exc:
            raise ConfigError(str(exc)) from None
        merged["d4_preset"] = "custom"
    else:
        if d4_name not in ch.D4_PRESETS:
            raise ConfigError(f"unknown D4 preset {d4_name!r}; valid presets: {sorted(ch.D4_PRESETS)}")
        merged["d4"] = ch.D4_PRESETS[d4_name]

    known = {f.name for f in fields(RunConfig)}
    cfg = replace(cfg, **{k: v for k, v in merged.items() if k in known})
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.subcommand == "topo-metrics":
        if cfg.layout is None:
            raise ConfigError("missing required key 'layout'")
        if cfg.layout not in topo.FAMILIES:
            raise ConfigError(f"unknown layout {cfg.layout!r}; valid layouts: {list(topo.FAMILIES)}")
    if cfg.subcommand in ("fid-sweep", "required-link") and cfg.family not in fidmodel.SWEEP_FAMILIES:
        raise ConfigError(f"unknown family {cfg.family!r}; valid families: "
                          f"{sorted(fidmodel.SWEEP_FAMILIES)}")
    for name in ("n_max", "m_max", "k_max", "max_n", "n_circuits", "circuit_depth", "qubits",
                 "chips_needed", "n_chip"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be >= 1")


def load_config(path: str, subcommand: str, overrides: dict[str, Any] | None = None) -> RunConfig:
    return resolve_config(subcommand, read_config_file(path), overrides)


# ------------------------------------------------------------------- helpers

def _csv_text(cfg: RunConfig, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    for line in cfg.header():
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v: Any) -> Any:
    if isinstance(v, float):
        return repr(v)
    return v


def _emit(cfg: RunConfig, header, rows, summary: str, out=sys.stdout, err=sys.stderr) -> None:
    text = _csv_text(cfg, header, rows)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(summary, file=out)
    else:
        out.write(text)
        print(summary, file=err)


def _write_json(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _topology_for(cfg: RunConfig) -> topo.Topology:
    graph_trials, embed_trials = cfg.trials
    layout = cfg.layout
    if cfg.chips is not None:
        w, h = cfg.chips
        if layout == "falcon":
            return topo.build_falcon_chiplets(w, h)
        if layout == "chiplet_grid":
            return topo.build_chiplet_grid(w, h)
        if layout == "grid":
            return topo.build_grid(w, h)
        if layout == "heavyhex_chiplets":
            return topo.build_heavyhex_chiplets(w * h)
        if layout == "expander":
            return topo.build_expander_chiplets(w * h, seed=cfg.seed, graph_trials=graph_trials,
                                                embed_trials=embed_trials)
        raise ConfigError(f"--chips is not supported for layout {layout!r}")
    if layout == "grid_tree" and cfg.depth is not None:
        return topo.build_grid_tree(cfg.depth)
    if cfg.n_target is None:
        raise ConfigError(f"layout {layout!r} needs --chips, --n or --depth")
    return topo.build_family(layout, cfg.n_target, seed=cfg.seed, graph_trials=graph_trials,
                             embed_trials=embed_trials)


# --------------------------------------------------------------- subcommands

def cmd_topo_metrics(cfg: RunConfig, out, err) -> None:
    t = _topology_for(cfg)
    row = topo.summarize(t)
    if cfg.dump_topology:
        _write_json(cfg.dump_topology, t.to_dict())
    header = list(row)
    _emit(cfg, header, [[row[k] for k in header]],
          f"{t.layout_name}: nodes={row['nodes']} diameter={row['diameter']} "
          f"spectral_gap={row['spectral_gap']:.6g} qubit_link_ratio={row['qubit_link_ratio']:.4g}",
          out, err)


def _n_range(cfg: RunConfig) -> list[int]:
    return fidmodel.family_sizes(cfg.family, cfg.n_max)


def cmd_fid_sweep(cfg: RunConfig, out, err) -> None:
    gt, et = cfg.trials
    links = tuple(fidmodel.LINK_FIDELITY_PRESETS.values())
    rows = fidmodel.sweep(cfg.family, _n_range(cfg), cfg.scaling, cfg.deltas, links,
                          seed=cfg.seed, graph_trials=gt, embed_trials=et, strict=False)
    header = ["n_total", "topology", "t_swap", "t_link", "f_chiplet_lo", "f_chiplet_mid",
              "f_chiplet_hi"] + [f"f_mono_Δ={d}" for d in cfg.deltas]
    body = [[r.n_total, r.topology, r.t_swap, r.t_link]
            + [r.f_chiplet_by_link[f] for f in links]
            + [r.f_mono_by_delta[d] for d in cfg.deltas] for r in rows]
    crossings = {d: fidmodel.crossover(rows, d) for d in cfg.deltas}
    _emit(cfg, header, body, f"fid-sweep {cfg.family}: {len(rows)} rows; crossover N by "
          f"delta (f_link={cfg.f_link}): {crossings}", out, err)


def cmd_required_link(cfg: RunConfig, out, err) -> None:
    gt, et = cfg.trials
    rows = fidmodel.required_link_sweep(cfg.family, _n_range(cfg), cfg.scaling, cfg.deltas,
                                        seed=cfg.seed, graph_trials=gt, embed_trials=et)
    header = ["n_total", "topology", "t_swap", "t_link"] + [f"f_link_required_Δ={d}"
                                                            for d in cfg.deltas]
    body = [[r["n_total"], r["topology"], r["t_swap"], r["t_link"]] + [r[d] for d in cfg.deltas]
            for r in rows]
    _emit(cfg, header, body, f"required-link {cfg.family}: {len(rows)} rows "
          f"(f_cx_chip={cfg.f_cx_chip})", out, err)


def cmd_chain_compare(cfg: RunConfig, out, err) -> None:
    m_values, k_values = range(1, cfg.m_max + 1), range(1, cfg.k_max + 1)
    rows = swapchain.chain_rows(cfg.d4, cfg.link_eta, m_values, k_values)
    agreement = swapchain.compare_models(cfg.d4, cfg.link_eta, m_values, k_values)
    if cfg.dump_choi:
        m, k = agreement.argmax if agreement.argmax != (0, 0) else (1, 1)
        _write_json(cfg.dump_choi, ch.choi_to_dict(
            swapchain.composite_link_chain(cfg.d4, cfg.link_eta, m, k)))
    header = ["method", "m", "k", "bell_overlap", "process_fidelity_vs_identity",
              "average_gate_fidelity"]
    body = [[r[h] for h in header] for r in rows]
    _emit(cfg, header, body, f"chain-compare {cfg.d4_preset}: max_abs_diff="
          f"{agreement.max_abs_diff:.6f} at (m,k)={agreement.argmax}, "
          f"max_rel_diff={agreement.max_rel_diff:.4f}", out, err)


def cmd_ecc_table(cfg: RunConfig, out, err) -> None:
    rows = errdetect.encoding_table(cfg.max_n)
    body = [[r.n, r.m, r.k, f"{r.efficiency:.2f}"] for r in rows]
    mismatches = errdetect.table_mismatches(rows)
    note = "; ".join(f"n={d['n']}: computed (m,k,eff)={d['computed']} vs published "
                     f"{d['published']}" for d in mismatches) or "none"
    _emit(cfg, list(errdetect.TABLE_HEADER), body,
          f"ecc-table: {len(rows)} rows; mismatches with published table: {note}", out, err)


def cmd_frag_sim(cfg: RunConfig, out, err) -> None:
    result = fragsim.fragment_sweep(cfg.n_circuits, cfg.circuit_depth, seed=cfg.seed)
    header = ["p_cx", "mean_fidelity_mono", "mean_fidelity_chiplet", "n_circuits", "depth", "seed"]
    body = [[r[h] for h in header] for r in result.rows]
    _emit(cfg, header, body, f"frag-sim: chiplet reference {result.chiplet_reference:.4f}; "
          f"crossover p_cx={result.crossover}", out, err)


def cmd_yield(cfg: RunConfig, out, err) -> None:
    y = fidmodel.defect_yield(cfg.qubits, cfg.p_defect)
    attempts = fidmodel.expected_attempts(cfg.chips_needed, cfg.qubits, cfg.p_defect)
    header = ["n_qubits", "p_defect", "yield", "chips_needed", "expected_attempts"]
    _emit(cfg, header, [[cfg.qubits, cfg.p_defect, y, cfg.chips_needed, attempts]],
          f"yield {y:.4f} for {cfg.qubits} qubits at p={cfg.p_defect}; "
          f"{attempts:.2f} expected attempts for {cfg.chips_needed} good chips", out, err)


COMMANDS = {
    "topo-metrics": cmd_topo_metrics,
    "fid-sweep": cmd_fid_sweep,
    "required-link": cmd_required_link,
    "chain-compare": cmd_chain_compare,
    "ecc-table": cmd_ecc_table,
    "frag-sim": cmd_frag_sim,
    "yield": cmd_yield,
}


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiplet-fabric", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with flat key/value sections")
    common.add_argument("--seed", type=int, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    common.add_argument("--output", "-o", help="CSV output path (default stdout)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("topo-metrics", parents=[common], help="graph metrics of one layout")
    p.add_argument("--layout", choices=topo.FAMILIES)
    p.add_argument("--chips", help="chip tiling WxH (or a chip count)")
    p.add_argument("--n", dest="n_target", type=int, help="target qubit count")
    p.add_argument("--depth", type=int, help="tree depth for grid_tree")
    p.add_argument("--dump-topology", help="write the topology JSON here")
    p.add_argument("--full", action="store_true", default=None,
                   help="full expander search (800 graphs x 60 embeddings)")

    for name, helptext in (("fid-sweep", "chiplet vs monolithic diameter fidelity"),
                           ("required-link", "link fidelity needed to match monolithic")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--family", choices=sorted(fidmodel.SWEEP_FAMILIES))
        p.add_argument("--n-max", type=int)
        p.add_argument("--cx-preset", help=f"on-chip CX fidelity preset: {sorted(CX_PRESETS)}")
        p.add_argument("--f-cx-chip", type=float)
        p.add_argument("--n-chip", type=int)
        p.add_argument("--f-link", type=float)
        p.add_argument("--delta", dest="deltas", type=float, action="append",
                       help="monolithic infidelity growth per qubit (repeatable)")
        p.add_argument("--full", action="store_true", default=None)

    p = sub.add_parser("chain-compare", parents=[common], help="composite chain vs ratio model")
    p.add_argument("--preset", dest="d4_preset", help=f"D4 preset: {sorted(ch.D4_PRESETS)}")
    for key in _D4_KEYS:
        p.add_argument(f"--{key}", type=float)
    p.add_argument("--link-eta", type=float, help="link damping strength")
    p.add_argument("--m-max", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--dump-choi", help="write the worst-case composite Choi JSON here")

    p = sub.add_parser("ecc-table", parents=[common], help="constant-weight encoding table")
    p.add_argument("--max-n", type=int)

    p = sub.add_parser("frag-sim", parents=[common], help="noisy fragment fidelity sweep")
    p.add_argument("--n-circuits", type=int)
    p.add_argument("--depth", dest="circuit_depth", type=int)

    p = sub.add_parser("yield", parents=[common], help="zero-defect chip yield")
    p.add_argument("--qubits", type=int)
    p.add_argument("--p", dest="p_defect", type=float)
    p.add_argument("--chips-needed", type=int)
    return parser


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    flags = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(args.subcommand, file_values, flags)
        COMMANDS[cfg.subcommand](cfg, out, err)
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return 2
    except MODEL_ERRORS as exc:
        print(f"model error: {exc}", file=err)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
