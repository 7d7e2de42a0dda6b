#!/usr/bin/env python3
import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from datetime import datetime

from config import (
    DEFAULT_FRINGE_POINTS,
    DEFAULT_GRID_STEP,
    DEFAULT_QUADRATURE_POINTS,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_SHARDS,
    MAX_WORKERS,
    PROB_TOLERANCE,
)
from wigner import (
    AngleTriple,
    ConvergenceError,
    ShardFailure,
    SlitWheelConfig,
    ValidationError,
    derivation_summary,
    fringe_curve,
    fringe_curve_csv,
    ingest_counts,
    log,
    log_error,
    merge_montecarlo,
    montecarlo_shard,
    run_analysis,
    shard_ranges,
    with_options,
)
from wigner.census_functions import VARIANTS
from wigner.report_functions import (
    CENSUS_SCOPES,
    adversary_report,
    census_full_report,
    emit,
    emit_json,
    montecarlo_report,
    quantum_report,
    slitwheel_report,
)
from wigner.utils import require_label, run_guarded

COMMANDS = ["derive", "quantum", "slitwheel", "analyze", "census", "montecarlo", "adversary"]

# Cifras de la derivación que `derive` verifica
EXPECTED_SET_SIZE = 14
EXPECTED_TERMS = 28
EXPECTED_CANCELED = 24


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    shards: int = DEFAULT_SHARDS
    workers: int | None = None
    tolerance: float = PROB_TOLERANCE
    with_timing: bool = True
    p_min: float | None = None
    p_max: float | None = None
    sigma_convention: str | None = None
    predicate: str | None = None
    scope: str = "all"
    angles: tuple = (0.0, 30.0, 60.0)
    grid_step: float = DEFAULT_GRID_STEP
    l: int = 100
    slit_width: float = 0.149
    relative_angle: float = 0.0
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS
    numeric: bool = True
    fringe_csv: str | None = None
    fringe_points: int = DEFAULT_FRINGE_POINTS
    extra: float = 0.2
    balanced_extra: float = 0.2

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"comando desconocido: {self.command}", field="command")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError(f"seed fuera de [0, 2**64): {self.seed}", field="seed")
        if self.samples < 1:
            raise ValidationError(f"samples debe ser >= 1: {self.samples}", field="samples")
        if self.shards < 1:
            raise ValidationError(f"shards debe ser >= 1: {self.shards}", field="shards")
        if self.workers is not None and self.workers < 1:
            raise ValidationError(f"workers debe ser >= 1: {self.workers}", field="workers")
        if self.tolerance < 0:
            raise ValidationError(f"tolerancia negativa: {self.tolerance}", field="tolerance")
        if self.predicate is not None:
            require_label("predicate", self.predicate, VARIANTS)
        require_label("scope", self.scope, CENSUS_SCOPES)


def cmd_derive(cfg):
    summary = derivation_summary()
    sizes = summary["sizes"]
    checks = {
        "set_sizes": all(sizes[k] == EXPECTED_SET_SIZE for k in ("S13", "S12", "S23")),
        "terms_before_cancellation": summary["terms_before_cancellation"] == EXPECTED_TERMS,
        "terms_canceled": summary["terms_canceled"] == EXPECTED_CANCELED,
        "residual": summary["residual_matches"],
    }
    for name, ok in checks.items():
        if not ok:
            log_error("derive", f"verificación fallida: {name}")
    return {**summary, "checks": checks}, all(checks.values())


def cmd_quantum(cfg):
    return quantum_report(AngleTriple(*cfg.angles), cfg.grid_step), True


def cmd_slitwheel(cfg):
    wheel = SlitWheelConfig(cfg.l, cfg.slit_width, cfg.relative_angle, cfg.quadrature_points)
    report = slitwheel_report(wheel, AngleTriple(*cfg.angles), numeric=cfg.numeric)
    if cfg.fringe_csv:
        emit(fringe_curve_csv(fringe_curve(cfg.l, cfg.slit_width, cfg.fringe_points)), cfg.fringe_csv)
        log(f"Curva de franjas escrita en {cfg.fringe_csv}")
    return report, True


def cmd_analyze(cfg):
    if not cfg.input_path:
        raise ValidationError("se requiere --input", field="input")
    analysis_input = with_options(ingest_counts(cfg.input_path), cfg.p_min, cfg.p_max, cfg.sigma_convention)
    return run_analysis(analysis_input), True


def cmd_census(cfg):
    variants = (cfg.predicate,) if cfg.predicate else VARIANTS
    report = census_full_report(cfg.scope, variants, shards=cfg.shards, workers=cfg.workers,
                                with_timing=cfg.with_timing)
    return report, True


def run_montecarlo(seed, samples, shards, tolerance, workers=None):
    """Reparte las muestras en rangos contiguos; el resultado no depende de `shards`."""
    ranges = [(lo, hi) for lo, hi in shard_ranges(samples, shards) if hi > lo]
    partials, errors = [], []
    with ThreadPoolExecutor(max_workers=workers or min(len(ranges), MAX_WORKERS)) as executor:
        futures = {
            executor.submit(run_guarded, f"montecarlo [{lo}, {hi})", montecarlo_shard, seed, lo, hi - lo, tolerance): lo
            for lo, hi in ranges
        }
        for i, future in enumerate(as_completed(futures), 1):
            res = future.result()
            if i % 10 == 0 or i == len(futures):
                log(f"[{i}/{len(futures)}] shards de Monte Carlo completados")
            if "error" in res:
                errors.append(f"{futures[future]}: {res['error']}")
                continue
            partials.append(res)
    if errors:
        raise ShardFailure(errors)
    return merge_montecarlo(partials)


def cmd_montecarlo(cfg):
    summary = run_montecarlo(cfg.seed, cfg.samples, cfg.shards, cfg.tolerance, cfg.workers)
    report = montecarlo_report(summary, cfg.seed, cfg.shards, cfg.tolerance)
    if not report["passed"]:
        log_error("montecarlo", f"{summary['raw_failures']} fallas raw, {summary['efa_failures']} fallas EFA")
    return report, report["passed"]


def cmd_adversary(cfg):
    return adversary_report(cfg.extra, cfg.balanced_extra), True


def get_command_funcs(cfg):
    """Retorna el diccionario de comandos"""
    return {
        "derive": lambda: cmd_derive(cfg),
        "quantum": lambda: cmd_quantum(cfg),
        "slitwheel": lambda: cmd_slitwheel(cfg),
        "analyze": lambda: cmd_analyze(cfg),
        "census": lambda: cmd_census(cfg),
        "montecarlo": lambda: cmd_montecarlo(cfg),
        "adversary": lambda: cmd_adversary(cfg),
    }


def build_parser():
    parser = argparse.ArgumentParser(description="Desigualdad de Wigner extendida: derivación, simulación y análisis")
    parser.add_argument("command", choices=COMMANDS, help="Comando a ejecutar")
    parser.add_argument("--input", dest="input_path", help="Conteos (.toml, .csv o reporte .json)")
    parser.add_argument("--output", dest="output_path", help="Archivo de salida (por defecto stdout)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    parser.add_argument("--shards", type=int, default=DEFAULT_SHARDS)
    parser.add_argument("--workers", type=int, help="Hilos del pool (por defecto min(shards, MAX_WORKERS))")
    parser.add_argument("--tolerance", type=float, default=PROB_TOLERANCE)
    parser.add_argument("--no-timing", dest="with_timing", action="store_false",
                        help="Omite los tiempos para obtener JSON reproducible byte a byte")
    parser.add_argument("--p-min", type=float, help="Override de P_min")
    parser.add_argument("--p-max", type=float, help="Override de P_max")
    parser.add_argument("--sigma-convention", help="scaled | unscaled")
    parser.add_argument("--predicate", help="alice_only | both_sides (por defecto ambos)")
    parser.add_argument("--scope", default="all", help="perfect | one_step | groups | all")
    parser.add_argument("--angles", type=float, nargs=3, default=[0.0, 30.0, 60.0], metavar=("T1", "T2", "T3"),
                        help="Ángulos del singlete en grados")
    parser.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)
    parser.add_argument("--l", type=int, default=100, help="Momento angular orbital")
    parser.add_argument("--slit-width", type=float, default=0.149, help="Fracción de ancho de ranura W_s")
    parser.add_argument("--relative-angle", type=float, default=0.0, help="Ángulo relativo φo (rad)")
    parser.add_argument("--quadrature-points", type=int, default=DEFAULT_QUADRATURE_POINTS)
    parser.add_argument("--no-numeric", dest="numeric", action="store_false", help="Omite el oráculo por cuadratura")
    parser.add_argument("--fringe-csv", help="Escribe la curva de franjas en este CSV")
    parser.add_argument("--fringe-points", type=int, default=DEFAULT_FRINGE_POINTS)
    parser.add_argument("--extra", type=float, default=0.2, help="Peso extra del HVM adversario")
    parser.add_argument("--balanced-extra", type=float, default=0.2, help="Peso extra del HVM equilibrado")
    return parser


def main(argv=None):
    """Función principal: parsea, despacha y devuelve el código de salida (0, 1 o 2)."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return 0 if not e.code else 1

    start = datetime.now()
    t0 = time.perf_counter()
    try:
        cfg = RunConfig(**vars(args))
        log(f"=== Iniciando {cfg.command} ===")
        report, ok = get_command_funcs(cfg)[cfg.command]()
        emit_json(report, cfg.output_path, with_timing=cfg.with_timing)
    except ValidationError as e:
        log_error(args.command, e)
        return 1
    except (ConvergenceError, ShardFailure) as e:
        log_error(args.command, e)
        return 2

    status = "OK" if ok else "verificación fallida"
    print(f"✅ Completado: {cfg.command} {status} | ⏱️ {time.perf_counter() - t0:.0f}s "
          f"(inicio {start.strftime('%H:%M:%S')})", file=sys.stderr)
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
