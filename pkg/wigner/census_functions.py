"""Censo exhaustivo de modelos on/off sobre subconjuntos de símbolos.

Un subconjunto se codifica como entero: bit j encendido = el símbolo j de la
lista ordenada está "on" (todos los símbolos on son equiprobables). Las cuentas
por configuración salen de popcount(código & máscara_de_posición).
"""
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from config import (
    CENSUS_CHUNK_BITS,
    MAX_WORKERS,
    PUBLISHED_ONE_STEP_FLAT,
    PUBLISHED_ONE_STEP_UNIVERSE,
    PUBLISHED_PERFECT_FLAT,
    PUBLISHED_PERFECT_UNIVERSE,
)
from wigner.symbolcore_functions import N_SETTINGS, POSITIONS, one_step_symbols, perfect_parents, perfect_symbols
from wigner.utils import ShardFailure, ValidationError, log, require_label, run_guarded

VARIANTS = ("alice_only", "both_sides")
GROUPINGS = ("by_parent_pair",)
FLIPS_PER_STEP = len(POSITIONS)


@dataclass(frozen=True)
class FlatnessPredicate:
    variant: str = "alice_only"
    strict: bool = True  # False: las cuentas pueden diferir en a lo sumo 1

    def __post_init__(self):
        require_label("predicate", self.variant, VARIANTS)

    @property
    def spread(self):
        return 0 if self.strict else 1

    def to_dict(self):
        return {"variant": self.variant, "strict": self.strict}


@dataclass(frozen=True)
class CensusResult:
    universe_size: int
    flat_count: int
    predicate: FlatnessPredicate
    elapsed: float
    partition_count: int

    def __post_init__(self):
        if not 0 <= self.flat_count <= self.universe_size:
            raise ValidationError(f"flat_count fuera de [0, {self.universe_size}]: {self.flat_count}",
                                  field="flat_count")

    @property
    def proportion(self):
        return self.flat_count / self.universe_size


class PartialCensus(NamedTuple):
    start: int
    end: int
    flat_count: int


def position_masks(symbols):
    """Seis máscaras (1a, 2a, 3a, 1b, 2b, 3b) sobre los índices de la lista."""
    return tuple(
        sum(1 << j for j, s in enumerate(symbols) if s.code >> k & 1)
        for k in range(len(POSITIONS))
    )


def _counts_flat(counts, spread):
    return max(counts) - min(counts) <= spread


def is_flat(code, symbols, pred):
    if not 0 <= code < 2 ** len(symbols):
        raise ValidationError(f"código fuera de rango para {len(symbols)} símbolos: {code}", field="code")
    counts = [(code & mask).bit_count() for mask in position_masks(symbols)]
    flat = _counts_flat(counts[:N_SETTINGS], pred.spread)
    if pred.variant == "both_sides":
        flat = flat and _counts_flat(counts[N_SETTINGS:], pred.spread)
    return flat


def _side_flat(codes, masks, spread):
    counts = [np.bitwise_count(codes & np.uint64(mask)) for mask in masks]
    hi = np.maximum(np.maximum(counts[0], counts[1]), counts[2])
    lo = np.minimum(np.minimum(counts[0], counts[1]), counts[2])
    return (hi - lo) <= spread


def _flat_codes(codes, masks, pred):
    """Versión vectorizada de is_flat sobre un arreglo uint64 de códigos."""
    flat = _side_flat(codes, masks[:N_SETTINGS], pred.spread)
    if pred.variant == "both_sides":
        flat &= _side_flat(codes, masks[N_SETTINGS:], pred.spread)
    return flat


def census_scan_partitioned(range_start, range_end, symbols, pred):
    universe = 2 ** len(symbols)
    if not 0 <= range_start <= range_end <= universe:
        raise ValidationError(f"rango [{range_start}, {range_end}) fuera de [0, {universe}]", field="range")
    masks = position_masks(symbols)
    chunk = 1 << CENSUS_CHUNK_BITS
    flat = 0
    for lo in range(range_start, range_end, chunk):
        codes = np.arange(lo, min(lo + chunk, range_end), dtype=np.uint64)
        flat += int(np.count_nonzero(_flat_codes(codes, masks, pred)))
    return PartialCensus(range_start, range_end, flat)


def merge_census(partials, universe_size):
    """Suma exacta; los rangos deben cubrir [0, universe_size) sin solaparse."""
    ordered = sorted(partials, key=lambda p: p.start)
    position = 0
    for part in ordered:
        if part.start != position:
            kind = "solapados" if part.start < position else "con huecos"
            raise ValidationError(f"rangos {kind} en {part.start}", field="partitions")
        position = part.end
    if position != universe_size:
        raise ValidationError(f"los rangos terminan en {position}, no en {universe_size}", field="partitions")
    return sum(part.flat_count for part in ordered)


def shard_ranges(universe_size, shards):
    if shards < 1:
        raise ValidationError(f"shards debe ser >= 1: {shards}", field="shards")
    bounds = [universe_size * i // shards for i in range(shards + 1)]
    return list(zip(bounds, bounds[1:]))


def _scan_shards(symbols, pred, shards, workers):
    ranges = shard_ranges(2 ** len(symbols), shards)
    partials, errors = [], []
    with ThreadPoolExecutor(max_workers=workers or min(shards, MAX_WORKERS)) as executor:
        futures = {
            executor.submit(run_guarded, f"censo [{lo}, {hi})", census_scan_partitioned, lo, hi, symbols, pred): (lo, hi)
            for lo, hi in ranges
        }
        for i, future in enumerate(as_completed(futures), 1):
            result = future.result()
            if isinstance(result, dict) and "error" in result:
                errors.append(f"{futures[future]}: {result['error']}")
            else:
                partials.append(result)
            if i % 10 == 0 or i == len(futures):
                log(f"[{i}/{len(futures)}] shards del censo completados")
    if errors:
        raise ShardFailure(errors)
    return partials


def _census(symbols, pred, shards=1, workers=None):
    start = time.perf_counter()
    universe = 2 ** len(symbols)
    if shards == 1:
        partials = [census_scan_partitioned(0, universe, symbols, pred)]
    else:
        partials = _scan_shards(symbols, pred, shards, workers)
    flat = merge_census(partials, universe)
    return CensusResult(universe, flat, pred, time.perf_counter() - start, shards)


def census_speedup(symbols, pred, shards, workers=None):
    """Corre el censo con `shards` y con un solo shard para medir la aceleración.

    Devuelve (resultado con shards, resultado de referencia, speedup); speedup es
    None si la corrida con shards no tardó un tiempo medible.
    """
    sharded = _census(symbols, pred, shards, workers)
    baseline = _census(symbols, pred)
    if baseline.flat_count != sharded.flat_count:
        raise ShardFailure([f"{shards} shards: {sharded.flat_count} != {baseline.flat_count} con 1 shard"])
    speedup = baseline.elapsed / sharded.elapsed if sharded.elapsed > 0 else None
    log(f"Aceleración con {shards} shards: {speedup if speedup is None else round(speedup, 2)}x")
    return sharded, baseline, speedup


def census_perfect(pred):
    return _census(perfect_symbols(), pred)


def census_one_step(pred, shards=1, workers=None):
    """Los 2**24 subconjuntos de los 24 símbolos a un paso."""
    log(f"Censo a un paso ({pred.variant}) en {shards} shard(s)")
    return _census(one_step_symbols(), pred, shards, workers)


def likelihood_ratio(efa, free):
    if free.flat_count == 0:
        raise ZeroDivisionError("el censo libre no tiene subconjuntos planos")
    return efa.proportion / free.proportion


def published_likelihood_ratio():
    efa = PUBLISHED_PERFECT_FLAT / PUBLISHED_PERFECT_UNIVERSE
    return efa / (PUBLISHED_ONE_STEP_FLAT / PUBLISHED_ONE_STEP_UNIVERSE)


def parent_pair_groups():
    """Símbolos a un paso agrupados por su par (no ordenado) de padres perfectos.

    Cada par de padres es una arista del cubo de los 8 perfectos: 12 grupos de 2.
    """
    groups = {}
    for s in one_step_symbols():
        groups.setdefault(frozenset(perfect_parents(s)), []).append(s)
    return tuple(sorted(tuple(sorted(members)) for members in groups.values()))


def efa_group_census(grouping="by_parent_pair", pred=None):
    """Censo restringido: los símbolos de un mismo grupo se encienden juntos."""
    require_label("grouping", grouping, GROUPINGS)
    pred = pred or FlatnessPredicate()
    start = time.perf_counter()
    symbols = one_step_symbols()
    index = {s: j for j, s in enumerate(symbols)}
    group_masks = [sum(1 << index[s] for s in members) for members in parent_pair_groups()]

    group_codes = np.arange(2 ** len(group_masks), dtype=np.uint64)
    codes = np.zeros_like(group_codes)
    for j, mask in enumerate(group_masks):
        on = (group_codes >> np.uint64(j)) & np.uint64(1)
        codes |= on * np.uint64(mask)
    flat = int(np.count_nonzero(_flat_codes(codes, position_masks(symbols), pred)))
    return CensusResult(len(group_codes), flat, pred, time.perf_counter() - start, 1)


def multi_step_possibilities(steps):
    """Desvíos posibles tras `steps` inversiones sucesivas (6 posiciones por paso)."""
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise ValidationError(f"steps debe ser entero >= 1: {steps!r}", field="steps")
    return FLIPS_PER_STEP ** steps


def census_report(result, published_target=None, with_timing=True):
    report = {
        "universe_size": result.universe_size,
        "flat_count": result.flat_count,
        "proportion": result.proportion,
        "predicate": result.predicate.to_dict(),
        "partition_count": result.partition_count,
    }
    if published_target is not None:
        report["published_target"] = published_target
        report["matches_published"] = result.flat_count == published_target
    if with_timing:
        report["elapsed_s"] = round(result.elapsed, 6)
    return report
