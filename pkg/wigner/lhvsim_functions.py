"""Capa de probabilidad sobre los símbolos: modelos de variables ocultas (HVM) como
distribuciones sobre los 64 símbolos, la cadena de desigualdades, mezclas EFA y el
HVM adversario."""
from dataclasses import dataclass, field
from functools import cache
from typing import NamedTuple

import numpy as np

from config import PROB_TOLERANCE, RANDOM_STREAM
from wigner.symbolcore_functions import (
    DERIVATION_PAIRS,
    N_SETTINGS,
    N_SYMBOLS,
    SettingPair,
    Side,
    all_symbols,
    bit_index,
    classify_flips,
    contributes_to_coincidence,
    format_symbol,
    one_step_neighbors,
    parse_symbol,
    perfect_symbols,
    residual_set,
    substituted_residuals,
)
from wigner.utils import ValidationError

WORDS_PER_SAMPLE = RANDOM_STREAM["words_per_sample"]
COUNTER_BLOCKS = RANDOM_STREAM["counter_blocks_per_sample"]
SIMPLEX_STREAM = RANDOM_STREAM["streams"]["simplex"]
EFA_STREAM = RANDOM_STREAM["streams"]["efa"]

PAIR_11 = SettingPair(1, 1)


def indicator(symbols):
    """Vector 0/1 de longitud 64 con los símbolos dados."""
    vec = np.zeros(N_SYMBOLS)
    vec[[s.code for s in symbols]] = 1.0
    vec.flags.writeable = False
    return vec


@cache
def coincidence_indicator(p):
    return indicator(s for s in all_symbols() if contributes_to_coincidence(s, p))


@cache
def singles_indicator(side, setting):
    k = bit_index(side, setting)
    return indicator(s for s in all_symbols() if s.code >> k & 1)


@cache
def residual_indicator():
    return indicator(residual_set())


@cache
def _transition_matrices():
    """Matrices 8x64: perfectos, vecinos, vecinos por pérdida y por ganancia."""
    perfect = perfect_symbols()
    point = np.zeros((len(perfect), N_SYMBOLS))
    neighbors = np.zeros_like(point)
    loss = np.zeros_like(point)
    gain = np.zeros_like(point)
    for k, s in enumerate(perfect):
        point[k, s.code] = 1.0
        for flip in classify_flips(s):
            neighbors[k, flip.symbol.code] = 1.0
            (loss if flip.kind == "loss" else gain)[k, flip.symbol.code] = 1.0
    for m in (point, neighbors, loss, gain):
        m.flags.writeable = False
    return point, neighbors, loss, gain


@dataclass(frozen=True, eq=False)
class SymbolDistribution:
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (N_SYMBOLS,):
            raise ValidationError(f"se esperaban {N_SYMBOLS} pesos, hay {w.shape}", field="weights")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("pesos negativos o no finitos", field="weights")
        total = float(w.sum())
        if abs(total - 1.0) > PROB_TOLERANCE:
            raise ValidationError(f"los pesos suman {total!r}, no 1", field="weights")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def point(cls, symbol):
        w = np.zeros(N_SYMBOLS)
        w[symbol.code] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, symbols):
        symbols = list(symbols)
        w = np.zeros(N_SYMBOLS)
        w[[s.code for s in symbols]] = 1.0 / len(symbols)
        return cls(w)

    def weight(self, symbol):
        return float(self.weights[symbol.code])

    def mass(self, symbols):
        return float(self.weights @ indicator(symbols))


@dataclass(frozen=True)
class InequalityEvaluation:
    p13: float
    p12: float
    p23: float
    p11: float
    lhs: float
    rhs: float
    satisfied: bool

    @classmethod
    def from_probabilities(cls, p13, p12, p23, p11, tolerance=PROB_TOLERANCE):
        lhs = p13 - p11
        rhs = p12 + p23
        return cls(p13, p12, p23, p11, lhs, rhs, lhs <= rhs + tolerance)

    @property
    def margin(self):
        """lhs - rhs; positivo = violación."""
        return self.lhs - self.rhs

    def to_dict(self):
        return {"p13": self.p13, "p12": self.p12, "p23": self.p23, "p11": self.p11,
                "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin, "satisfied": self.satisfied}


class RawBound(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def coincidence_probability(d, p):
    return float(d.weights @ coincidence_indicator(p))


def singles_probability(d, side, setting):
    # Sin parámetro para la configuración remota: localidad por construcción
    return float(d.weights @ singles_indicator(Side(side), setting))


def singles_profile(d):
    """Alice 1-3 y luego Bob 1-3."""
    return tuple(singles_probability(d, side, k) for side in (Side.ALICE, Side.BOB)
                 for k in range(1, N_SETTINGS + 1))


def raw_bound_check(d, tolerance=PROB_TOLERANCE):
    p13, p12, p23 = (coincidence_probability(d, p) for p in DERIVATION_PAIRS)
    lhs = p13 - float(d.weights @ residual_indicator())
    rhs = p12 + p23
    return RawBound(lhs, rhs, lhs <= rhs + tolerance)


def extended_inequality(d, tolerance=PROB_TOLERANCE):
    p13, p12, p23 = (coincidence_probability(d, p) for p in DERIVATION_PAIRS)
    return InequalityEvaluation.from_probabilities(p13, p12, p23, coincidence_probability(d, PAIR_11), tolerance)


def same_setting_coincidences(d):
    """(P11, P22, P33): lo que delata a un HVM lejos de la anticorrelación."""
    return tuple(coincidence_probability(d, SettingPair(k, k)) for k in range(1, N_SETTINGS + 1))


def _validate_base(base_weights, epsilon):
    base = np.asarray(base_weights, dtype=float)
    if base.shape != (len(perfect_symbols()),):
        raise ValidationError(f"se esperaban 8 pesos base, hay {base.shape}", field="base_weights")
    if np.any(base < 0):
        raise ValidationError("pesos base negativos", field="base_weights")
    if abs(float(base.sum()) - 1.0) > PROB_TOLERANCE:
        raise ValidationError(f"los pesos base suman {float(base.sum())!r}, no 1", field="base_weights")
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon fuera de [0,1]: {epsilon}", field="epsilon")
    return base


def efa_mixture(base_weights, epsilon):
    """Caso 1 de la EFA: las seis desviaciones a un paso de cada perfecto son equiprobables."""
    base = _validate_base(base_weights, epsilon)
    point, neighbors, _, _ = _transition_matrices()
    return SymbolDistribution((1.0 - epsilon) * (base @ point) + (epsilon / 6.0) * (base @ neighbors))


def efa_mixture_biased(base_weights, epsilon, loss_fraction):
    """Casos 2 y 3: pérdida y ganancia con pesos distintos, uniformes entre posiciones.

    Cada perfecto tiene exactamente 3 inversiones de pérdida y 3 de ganancia.
    """
    base = _validate_base(base_weights, epsilon)
    if not 0.0 <= loss_fraction <= 1.0:
        raise ValidationError(f"loss_fraction fuera de [0,1]: {loss_fraction}", field="loss_fraction")
    point, _, loss, gain = _transition_matrices()
    weights = ((1.0 - epsilon) * (base @ point)
               + (epsilon * loss_fraction / 3.0) * (base @ loss)
               + (epsilon * (1.0 - loss_fraction) / 3.0) * (base @ gain))
    return SymbolDistribution(weights)


def substituted_residual_weights(d):
    """Peso de S y de sus dos formas sustituidas; ambas formas quedan acotadas por P11."""
    form_1, form_2 = substituted_residuals()
    return {
        "S": d.mass(residual_set()),
        "form_1": d.mass(form_1),
        "form_2": d.mass(form_2),
        "p11": coincidence_probability(d, PAIR_11),
    }


ADVERSARY_SYMBOL = "(+--,--+)"
BALANCING_SYMBOLS = ("(--+,+--)", "(-+-,-+-)")


def adversarial_hvm(extra):
    """Mezcla uniforme de perfectos + `extra` de (+--,--+): los singles se disparan
    en la configuración 1 de Alice y la 3 de Bob."""
    if not 0.0 <= extra < 1.0:
        raise ValidationError(f"extra fuera de [0,1): {extra}", field="extra")
    uniform = SymbolDistribution.uniform(perfect_symbols())
    spike = SymbolDistribution.point(parse_symbol(ADVERSARY_SYMBOL))
    d = SymbolDistribution((1.0 - extra) * uniform.weights + extra * spike.weights)
    return d, singles_profile(d)


def balanced_adversarial_hvm(extra):
    """El "acto de equilibrio": se agregan (--+,+--) y (-+-,-+-) en la misma proporción
    para aplanar los singles. Viola la desigualdad para extra > 1/7, pero P22 = extra."""
    if not 0.0 <= extra <= 1.0 / 3.0:
        raise ValidationError(f"extra fuera de [0,1/3]: {extra}", field="extra")
    uniform = SymbolDistribution.uniform(perfect_symbols())
    weights = (1.0 - 3.0 * extra) * uniform.weights
    for text in (ADVERSARY_SYMBOL, *BALANCING_SYMBOLS):
        weights = weights + extra * SymbolDistribution.point(parse_symbol(text)).weights
    d = SymbolDistribution(weights)
    return {
        "distribution": d,
        "singles_profile": singles_profile(d),
        "same_setting": same_setting_coincidences(d),
        "evaluation": extended_inequality(d),
    }


def distribution_to_json(d):
    return {format_symbol(s): d.weight(s) for s in sorted(all_symbols()) if d.weight(s) > 0.0}


def distribution_from_json(data):
    w = np.zeros(N_SYMBOLS)
    for text, weight in data.items():
        w[parse_symbol(text).code] += float(weight)
    return SymbolDistribution(w)


def _generator(seed, stream, start):
    if not 0 <= seed < 2 ** 64:
        raise ValidationError(f"seed fuera de [0, 2**64): {seed}", field="seed")
    bit_generator = np.random.Philox(key=seed + (stream << 64), counter=COUNTER_BLOCKS * start)
    return np.random.Generator(bit_generator)


def _exponentials(uniform):
    return -np.log1p(-uniform)


def random_distributions(seed, start, count):
    """Muestras [start, start+count) del stream simplex; matriz (count, 64)."""
    uniform = _generator(seed, SIMPLEX_STREAM, start).random((count, WORDS_PER_SAMPLE))
    exps = _exponentials(uniform)
    return exps / exps.sum(axis=1, keepdims=True)


def random_distribution(seed, index=0):
    """Punto uniforme del símplex de 63 dimensiones (normalización de exponenciales)."""
    return SymbolDistribution(random_distributions(seed, index, 1)[0])


def efa_draws(seed, start, count):
    """Pesos base (count, 8) y epsilon (count,) para la corrida EFA."""
    uniform = _generator(seed, EFA_STREAM, start).random((count, WORDS_PER_SAMPLE))
    n_perfect = len(perfect_symbols())
    exps = _exponentials(uniform[:, :n_perfect])
    return exps / exps.sum(axis=1, keepdims=True), uniform[:, n_perfect]


def _batch_probabilities(weights):
    p13, p12, p23 = (weights @ coincidence_indicator(p) for p in DERIVATION_PAIRS)
    return p13, p12, p23, weights @ coincidence_indicator(PAIR_11)


def montecarlo_shard(seed, start, count, tolerance=PROB_TOLERANCE):
    """Corre ambas propiedades sobre las muestras [start, start+count)."""
    weights = random_distributions(seed, start, count)
    p13, p12, p23, _ = _batch_probabilities(weights)
    raw_slack = (p13 - weights @ residual_indicator()) - (p12 + p23)

    base, eps = efa_draws(seed, start, count)
    point, neighbors, _, _ = _transition_matrices()
    mixtures = (1.0 - eps)[:, None] * (base @ point) + (eps / 6.0)[:, None] * (base @ neighbors)
    m13, m12, m23, m11 = _batch_probabilities(mixtures)
    efa_margin = (m13 - m11) - (m12 + m23)

    return {
        "start": start,
        "count": count,
        "raw_failures": int(np.count_nonzero(raw_slack > tolerance)),
        "raw_max_slack": float(raw_slack.max()),
        "efa_failures": int(np.count_nonzero(efa_margin > tolerance)),
        "efa_max_margin": float(efa_margin.max()),
    }


def merge_montecarlo(partials):
    """Suma fallas y toma máximos; rechaza rangos solapados."""
    ordered = sorted(partials, key=lambda r: r["start"])
    for prev, cur in zip(ordered, ordered[1:]):
        if cur["start"] < prev["start"] + prev["count"]:
            raise ValidationError(f"rangos solapados en {cur['start']}", field="shards")
    return {
        "samples": sum(r["count"] for r in ordered),
        "raw_failures": sum(r["raw_failures"] for r in ordered),
        "raw_max_slack": max(r["raw_max_slack"] for r in ordered),
        "efa_failures": sum(r["efa_failures"] for r in ordered),
        "efa_max_margin": max(r["efa_max_margin"] for r in ordered),
    }
