"""Álgebra exacta de conjuntos sobre los 64 símbolos de Wigner.

Codificación: entero 0-63, el bit k corresponde a la posición k en el orden
(1a, 2a, 3a, 1b, 2b, 3b); bit encendido = detección "+".
"""
import re
from dataclasses import dataclass
from enum import Enum
from functools import cache

from wigner.utils import ValidationError

POSITIONS = ("1a", "2a", "3a", "1b", "2b", "3b")
N_SETTINGS = 3
N_SYMBOLS = 2 ** len(POSITIONS)

_SYMBOL_RE = re.compile(r"^\(\s*([+\-−]{3})\s*[,;]\s*([+\-−]{3})\s*\)$")


class Side(str, Enum):
    ALICE = "a"
    BOB = "b"


def bit_index(side, setting):
    """Índice de bit de la posición (lado, configuración)."""
    if not 1 <= setting <= N_SETTINGS:
        raise ValidationError(f"configuración fuera de rango: {setting}", field="setting")
    return (setting - 1) + (0 if Side(side) is Side.ALICE else N_SETTINGS)


@dataclass(frozen=True, order=True)
class WignerSymbol:
    code: int

    def __post_init__(self):
        if not 0 <= self.code < N_SYMBOLS:
            raise ValidationError(f"código de símbolo fuera de rango: {self.code}", field="code")

    @property
    def outcomes(self):
        return tuple(bool(self.code >> k & 1) for k in range(len(POSITIONS)))

    def outcome(self, side, setting):
        return bool(self.code >> bit_index(side, setting) & 1)

    def __str__(self):
        return format_symbol(self)


# Alias: los conjuntos de símbolos son frozensets inmutables
SymbolSet = frozenset


@dataclass(frozen=True)
class SettingPair:
    alice_setting: int
    bob_setting: int

    def __post_init__(self):
        for name, value in (("alice_setting", self.alice_setting), ("bob_setting", self.bob_setting)):
            if not 1 <= value <= N_SETTINGS:
                raise ValidationError(f"índice de configuración fuera de rango: {value}", field=name)

    def __str__(self):
        return f"({self.alice_setting},{self.bob_setting})"


@dataclass(frozen=True)
class Flip:
    position: str
    kind: str  # "loss" (+ -> -) o "gain" (- -> +)
    symbol: WignerSymbol


# Pares usados en la derivación: S13, S12, S23
DERIVATION_PAIRS = (SettingPair(1, 3), SettingPair(1, 2), SettingPair(2, 3))

RESIDUAL_SYMBOLS = ("(+--,--+)", "(+-+,--+)", "(+--,+-+)", "(+-+,+-+)")

# Las dos formas de S tras la sustitución por EFA (caso 1)
SUBSTITUTED_FORMS = (
    ("(+--,+++)", "(+--,++-)", "(+--,+-+)", "(+-+,+-+)"),
    ("(++-,+-+)", "(+--,++-)", "(+--,+-+)", "(+-+,+-+)"),
)


def parse_symbol(text):
    """Convierte "(+--,-++)" en WignerSymbol; acepta '-' ASCII y el signo menos tipográfico."""
    match = _SYMBOL_RE.match(text.strip())
    if not match:
        raise ValidationError(f"símbolo mal formado: {text!r}", field="symbol")
    chars = match.group(1) + match.group(2)
    return WignerSymbol(sum(1 << k for k, c in enumerate(chars) if c == "+"))


def format_symbol(s):
    chars = "".join("+" if bit else "-" for bit in s.outcomes)
    return f"({chars[:3]},{chars[3:]})"


def symbols_from_text(texts):
    return SymbolSet(parse_symbol(t) for t in texts)


def sorted_text(symbols):
    """Lista ordenada por código, en sintaxis canónica (para reportes)."""
    return [format_symbol(s) for s in sorted(symbols)]


@cache
def all_symbols():
    return SymbolSet(WignerSymbol(code) for code in range(N_SYMBOLS))


def is_perfect_anticorrelation(s):
    alice = s.code & 0b111
    bob = s.code >> N_SETTINGS
    return alice ^ bob == 0b111


@cache
def perfect_symbols():
    """Los 8 símbolos perfectamente anticorrelacionados, en orden de código."""
    return tuple(sorted(s for s in all_symbols() if is_perfect_anticorrelation(s)))


def contributes_to_coincidence(s, p):
    return s.outcome(Side.ALICE, p.alice_setting) and s.outcome(Side.BOB, p.bob_setting)


def coincidence_contributors(p):
    return SymbolSet(s for s in all_symbols() if contributes_to_coincidence(s, p))


def imperfect_contributors(p):
    """S_ij: contribuyentes a la coincidencia en p que no son anticorrelaciones perfectas."""
    if p not in DERIVATION_PAIRS:
        raise ValidationError(
            f"par {p} no pertenece a la derivación; usar (1,3), (1,2) o (2,3)", field="setting_pair"
        )
    return SymbolSet(s for s in coincidence_contributors(p) if not is_perfect_anticorrelation(s))


@cache
def primed_sets():
    """S'12 y S'23: intersección literal de S12 (S23) con S13."""
    s13, s12, s23 = (imperfect_contributors(p) for p in DERIVATION_PAIRS)
    return s12 & s13, s23 & s13


@cache
def residual_set():
    s13 = imperfect_contributors(DERIVATION_PAIRS[0])
    s12_prime, s23_prime = primed_sets()
    return s13 - s12_prime - s23_prime


def residual_term_counts():
    """(términos antes de cancelar, términos cancelados) de S = S13 - S'12 - S'23."""
    s13 = imperfect_contributors(DERIVATION_PAIRS[0])
    s12_prime, s23_prime = primed_sets()
    total = len(s13) + len(s12_prime) + len(s23_prime)
    return total, total - len(residual_set())


def classify_flips(s):
    """Los seis vecinos a un paso, con la posición invertida y su clase (loss/gain)."""
    return tuple(
        Flip(position, "loss" if s.code >> k & 1 else "gain", WignerSymbol(s.code ^ (1 << k)))
        for k, position in enumerate(POSITIONS)
    )


def one_step_neighbors(s):
    return SymbolSet(flip.symbol for flip in classify_flips(s))


def step_distance(s):
    """Distancia de Hamming mínima a un símbolo perfecto."""
    return min((s.code ^ p.code).bit_count() for p in perfect_symbols())


@cache
def one_step_symbols():
    """Los 24 símbolos a distancia 1, en orden de código."""
    return tuple(sorted(s for s in all_symbols() if step_distance(s) == 1))


def perfect_parents(s):
    return SymbolSet(n for n in one_step_neighbors(s) if is_perfect_anticorrelation(n))


def same_setting_witnesses(s):
    """Configuraciones k en las que s aporta a la coincidencia (k,k)."""
    return [k for k in range(1, N_SETTINGS + 1) if contributes_to_coincidence(s, SettingPair(k, k))]


def substituted_residuals():
    return tuple(symbols_from_text(form) for form in SUBSTITUTED_FORMS)


def derivation_summary():
    """Contabilidad completa de la derivación, lista para el reporte de `derive`."""
    s13, s12, s23 = (imperfect_contributors(p) for p in DERIVATION_PAIRS)
    s12_prime, s23_prime = primed_sets()
    total, canceled = residual_term_counts()
    residual = residual_set()
    return {
        "imperfect_sets": {
            "S13": sorted_text(s13),
            "S12": sorted_text(s12),
            "S23": sorted_text(s23),
        },
        "sizes": {"S13": len(s13), "S12": len(s12), "S23": len(s23),
                  "S12_prime": len(s12_prime), "S23_prime": len(s23_prime)},
        "terms_before_cancellation": total,
        "terms_canceled": canceled,
        "residual": sorted_text(residual),
        "residual_matches": residual == symbols_from_text(RESIDUAL_SYMBOLS),
        "same_setting_witnesses": {format_symbol(s): same_setting_witnesses(s) for s in sorted(residual)},
        "substituted_forms": [sorted_text(form) for form in substituted_residuals()],
        "perfect_count": len(perfect_symbols()),
        "one_step_count": len(one_step_symbols()),
    }
