"""Command-line driver: run a configuration, write curves and a stability report.

Configuration comes from (in increasing priority) built-in defaults, a named
preset, a flat ``key = value`` file and ``--set key=value`` overrides.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from lelandfem.assembly import assemble
from lelandfem.convergence import study
from lelandfem.mesh import Mesh1D, build_aligned, build_uniform
from lelandfem.model import ConfigurationError, MarketParams, PriceCurve, default_half_width, from_transformed
from lelandfem.oracles import FdmConfig, bs_call_adjusted, bs_call_closed_form, fdm_solve
from lelandfem.presets import get_preset, preset_table
from lelandfem.stability import DEFAULT_THRESHOLD, analyze, ratio_check
from lelandfem.timestepper import NumericalBlowup, SchemeConfig, SolutionHistory, price_curve_at, run

log = logging.getLogger("lelandfem")

NUMBER_FORMAT = "{:.14e}"  # 15 significant digits


@dataclass(frozen=True)
class Numerics:
    order: int = 1
    h: float = 0.1
    n_elements: int | None = None  # uniform mesh of this size instead of an aligned one
    R: float | None = None
    d_tau: float = 0.001
    theta: float = 0.5
    n_rannacher: int = 4
    variant: str = "v1"
    v_boundary: str = "dirichlet"
    threshold: float = DEFAULT_THRESHOLD


@dataclass(frozen=True)
class Outputs:
    directory: Path = Path("out")
    formats: tuple[str, ...] = ("csv",)
    sample_times: tuple[float, ...] = (0.0,)


@dataclass(frozen=True)
class RunConfig:
    market: MarketParams = field(default_factory=MarketParams)
    numerics: Numerics = field(default_factory=Numerics)
    outputs: Outputs = field(default_factory=Outputs)
    preset: str | None = None
    oracles: bool = True
    study_levels: int = 0  # > 0 also writes a refinement study

    def echo(self) -> dict:
        out = {"market": asdict(self.market), "numerics": asdict(self.numerics)}
        out["outputs"] = {
            "formats": list(self.outputs.formats),
            "sample_times": list(self.outputs.sample_times),
        }
        out["preset"] = self.preset
        out["oracles"] = self.oracles
        out["Le"] = self.market.leland
        return out


_MARKET_KEYS = {f.name for f in fields(MarketParams)}
_NUMERIC_KEYS = {f.name for f in fields(Numerics)}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise ConfigurationError(f"expected on/off, got {text!r}")


def _convert(key: str, text: str, cls) -> object:
    kind = {f.name: f.type for f in fields(cls)}[key]
    text = text.strip()
    if "None" in str(kind) and text.lower() in ("", "none"):
        return None
    try:
        if "int" in str(kind) and "float" not in str(kind):
            return int(text)
        if "float" in str(kind):
            return float(text)
    except ValueError:
        raise ConfigurationError(f"bad value for {key}: {text!r}") from None
    return text


def _parse_times(text: str) -> tuple[float, ...]:
    parts = [t for t in text.replace(";", ",").split(",") if t.strip()]
    try:
        return tuple(float(t) for t in parts) or (0.0,)
    except ValueError:
        raise ConfigurationError(f"bad sample times: {text!r}") from None


def apply_settings(cfg: RunConfig, settings: dict[str, str]) -> RunConfig:
    """Return ``cfg`` with flat ``key -> text`` settings applied."""
    market, numerics, outputs = {}, {}, {}
    top: dict[str, object] = {}
    for key, text in settings.items():
        if key in _MARKET_KEYS:
            market[key] = _convert(key, text, MarketParams)
        elif key in _NUMERIC_KEYS:
            numerics[key] = _convert(key, text, Numerics)
        elif key in ("times", "sample_times"):
            outputs["sample_times"] = _parse_times(text)
        elif key in ("out", "directory"):
            outputs["directory"] = Path(text.strip())
        elif key == "formats":
            outputs["formats"] = tuple(f.strip() for f in text.split(",") if f.strip())
        elif key == "oracles":
            top["oracles"] = _parse_bool(text)
        elif key == "study_levels":
            top["study_levels"] = int(text)
        elif key == "preset":
            top["preset"] = text.strip()
        else:
            raise ConfigurationError(f"unknown configuration key {key!r}")
    try:
        return replace(
            cfg,
            market=replace(cfg.market, **market),
            numerics=replace(cfg.numerics, **numerics),
            outputs=replace(cfg.outputs, **outputs),
            **top,
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def read_config_file(path: Path) -> dict[str, str]:
    settings = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        settings[key.strip()] = value.strip()
    return settings


def parse_assignment(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigurationError(f"--set expects key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def validate(cfg: RunConfig) -> None:
    n = cfg.numerics
    if n.order not in (1, 2):
        raise ConfigurationError("order must be 1 or 2")
    if n.h <= 0 or n.d_tau <= 0:
        raise ConfigurationError("h and d_tau must be positive")
    for fmt in cfg.outputs.formats:
        if fmt not in ("csv", "json"):
            raise ConfigurationError(f"unknown output format {fmt!r}")
    for t in cfg.outputs.sample_times:
        if not 0.0 <= t <= cfg.market.T:
            raise ConfigurationError(f"sample time {t} outside [0, T]")


def build_mesh(cfg: RunConfig) -> Mesh1D:
    n, K = cfg.numerics, cfg.market.K
    if n.n_elements is not None:
        R = n.R if n.R is not None else default_half_width(K)
        return build_uniform(R, n.n_elements, n.order)
    return build_aligned(n.h, K, n.order, R_min=n.R)


def scheme_config(cfg: RunConfig) -> SchemeConfig:
    n = cfg.numerics
    return SchemeConfig(
        d_tau=n.d_tau,
        Le=cfg.market.leland,
        theta=n.theta,
        n_rannacher=n.n_rannacher,
        variant=n.variant,
        v_boundary=n.v_boundary,
    )


def _fmt(x: float) -> str:
    return NUMBER_FORMAT.format(x)


def time_label(t: float) -> str:
    return f"{t:g}"


def write_table(path: Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    rows = zip(*(np.asarray(columns[c], dtype=float) for c in names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_table(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    data = data.reshape(-1, len(names))
    return {name: data[:, i] for i, name in enumerate(names)}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n")


def _oracle_curve(history: SolutionHistory, t: float, at_x: np.ndarray, params: MarketParams) -> np.ndarray:
    tau = 0.5 * params.sigma**2 * (params.T - t)
    u = np.interp(at_x, history.nodes, history.state_at_tau(tau))
    return np.asarray(from_transformed(at_x, tau, u, params)[2])


def curve_columns(
    curve: PriceCurve,
    cfg: RunConfig,
    fdm_history: SolutionHistory | None,
    nodes: np.ndarray,
) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Columns for ``curve_t*.csv`` and, with oracles, ``comparison_t*.csv``."""
    m = cfg.market
    cols = {"S": curve.S, "V_fem": curve.V}
    if not cfg.oracles:
        return cols, {}
    tmt = m.T - curve.t
    V_fdm = _oracle_curve(fdm_history, curve.t, nodes, m) if fdm_history is not None else np.full_like(curve.V, np.nan)
    V_lin = bs_call_closed_form(curve.S, m.K, m.r, m.sigma, tmt)
    V_adj = bs_call_adjusted(curve.S, m.K, m.r, m.sigma, m.leland, tmt)
    cols.update(V_fdm=V_fdm, V_bs_linear=V_lin)
    comparison = {
        "S": curve.S,
        "V_fem": curve.V,
        "V_fdm": V_fdm,
        "V_bs_linear": V_lin,
        "V_bs_adjusted": V_adj,
        "diff_fdm": curve.V - V_fdm,
        "diff_bs_linear": curve.V - V_lin,
        "diff_bs_adjusted": curve.V - V_adj,
    }
    return cols, comparison


def run_experiment(cfg: RunConfig) -> int:
    """Run one configuration and write its artifacts. Returns an exit status."""
    try:
        validate(cfg)
        out = Path(cfg.outputs.directory)
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report: dict = {"config": cfg.echo()}
    try:
        mesh = build_mesh(cfg)
        scheme = scheme_config(cfg)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    advice = ratio_check(mesh.h_max, cfg.numerics.d_tau)
    report["mesh"] = {"R": mesh.R, "h": mesh.h_max, "n_elements": mesh.n_elements, "n_nodes": mesh.n_nodes}
    report["ratios"] = {"tau_h": advice.ratio_tau_h, "tau_h2": advice.ratio_tau_h2}
    report["ratio_advice"] = {"status": advice.status, "messages": advice.messages}

    t0 = time.perf_counter()
    try:
        history = run(assemble(mesh, cfg.market.K), cfg.market, scheme)
    except NumericalBlowup as exc:
        report.update(aborted=True, reason=str(exc), oscillation_index=None, flagged=True)
        report["timing"] = {"fem_seconds": time.perf_counter() - t0}
        _write_json(out / "stability.json", report)
        print(f"error: {exc}", file=sys.stderr)
        return 3
    fem_seconds = time.perf_counter() - t0

    stab = analyze(history, mesh, scheme, threshold=cfg.numerics.threshold)
    report.update(
        aborted=False,
        oscillation_index=stab.oscillation_index,
        flagged=stab.flagged,
        threshold=stab.threshold,
        worst_level=stab.worst_level,
        tau_worst=stab.tau_worst,
        per_level_index=stab.per_level_index,
    )

    fdm_history = None
    fdm_seconds = 0.0
    if cfg.oracles:
        t1 = time.perf_counter()
        fdm_cfg = FdmConfig.matching(mesh, cfg.numerics.d_tau, theta=cfg.numerics.theta,
                                     n_rannacher=cfg.numerics.n_rannacher)
        try:
            fdm_history = fdm_solve(cfg.market, mesh.R, fdm_cfg)
        except NumericalBlowup as exc:
            report["fdm_error"] = str(exc)
        fdm_seconds = time.perf_counter() - t1

    written = []
    for t in cfg.outputs.sample_times:
        curve = price_curve_at(history, t, cfg.market)
        cols, comparison = curve_columns(curve, cfg, fdm_history, history.nodes)
        label = time_label(t)
        if "csv" in cfg.outputs.formats:
            write_table(out / f"curve_t{label}.csv", cols)
            written.append(f"curve_t{label}.csv")
            if comparison:
                write_table(out / f"comparison_t{label}.csv", comparison)
                written.append(f"comparison_t{label}.csv")
        if "json" in cfg.outputs.formats:
            payload = {k: [float(_fmt(v)) for v in np.asarray(c)] for k, c in cols.items()}
            _write_json(out / f"curve_t{label}.json", {"t": t, "columns": payload})
            written.append(f"curve_t{label}.json")

    if cfg.study_levels > 0:
        res = study(cfg.market, cfg.numerics.order, cfg.study_levels, cfg.numerics.h,
                    theta=cfg.numerics.theta, n_rannacher=cfg.numerics.n_rannacher)
        rows = res.rows()
        write_table(out / "convergence.csv", {k: np.array([r[k] for r in rows]) for k in rows[0]})
        written.append("convergence.csv")

    # timing is kept out of the CSVs so that those stay byte-identical
    report["timing"] = {"fem_seconds": fem_seconds, "fdm_seconds": fdm_seconds}
    report["files"] = written
    _write_json(out / "stability.json", report)
    status = "FLAGGED" if stab.flagged else "ok"
    print(f"{cfg.preset or 'custom'}: Le={cfg.market.leland:.5f} oscillation_index={stab.oscillation_index:.4g} "
          f"[{status}] -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lelandfem", description=__doc__.splitlines()[0])
    p.add_argument("--preset", help="named parameter set (see --list-presets)")
    p.add_argument("--config", type=Path, help="flat key = value file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one setting; repeatable")
    p.add_argument("--out", type=Path, help="output directory (default: out)")
    p.add_argument("--oracles", choices=("on", "off"), help="also run the FDM and closed-form references")
    p.add_argument("--list-presets", action="store_true", help="print the preset table and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def list_presets() -> str:
    table = preset_table()
    print(table)
    return table


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.preset:
        try:
            preset = get_preset(args.preset)
        except KeyError as exc:
            raise ConfigurationError(exc.args[0]) from None
        cfg = apply_settings(cfg, preset.settings())
        cfg = replace(cfg, preset=preset.name)
    if args.config:
        try:
            cfg = apply_settings(cfg, read_config_file(args.config))
        except OSError as exc:
            raise ConfigurationError(f"cannot read {args.config}: {exc}") from None
    if args.overrides:
        cfg = apply_settings(cfg, dict(parse_assignment(a) for a in args.overrides))
    if args.out is not None:
        cfg = replace(cfg, outputs=replace(cfg.outputs, directory=args.out))
    if args.oracles is not None:
        cfg = replace(cfg, oracles=args.oracles == "on")
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.list_presets:
        list_presets()
        return 0
    try:
        cfg = config_from_args(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run_experiment(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
