"""Predicciones cuánticas: singlete, barrido del ángulo de violación máxima,
intensidad coincidente OAM y probabilidad de las ruedas de ranuras (forma cerrada
y oráculo por cuadratura de Gauss-Legendre)."""
import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from config import DEFAULT_QUADRATURE_POINTS, QUADRATURE_TOLERANCE
from wigner.lhvsim_functions import InequalityEvaluation
from wigner.utils import ConvergenceError, ValidationError

MIN_QUADRATURE_POINTS = 16
MAX_GRID_STEP = 5.0
SCAN_ROW_BLOCK = 256


@dataclass(frozen=True)
class AngleTriple:
    theta1: float
    theta2: float
    theta3: float

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta3"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"ángulo no finito: {getattr(self, name)}", field=name)

    @property
    def degrees(self):
        return (self.theta1, self.theta2, self.theta3)

    @property
    def radians(self):
        return tuple(math.radians(t) for t in self.degrees)

    def to_dict(self):
        return {"theta1": self.theta1, "theta2": self.theta2, "theta3": self.theta3}


@dataclass(frozen=True)
class SlitWheelConfig:
    l: int
    slit_width_fraction: float
    relative_angle: float = 0.0  # radianes; 0 = mínimo anticorrelacionado
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS

    def __post_init__(self):
        if isinstance(self.l, bool) or not isinstance(self.l, int) or self.l < 1:
            raise ValidationError(f"l debe ser entero >= 1: {self.l!r}", field="l")
        if not 0.0 < self.slit_width_fraction < 1.0:
            raise ValidationError(f"ancho de ranura fuera de (0,1): {self.slit_width_fraction}",
                                  field="slit_width_fraction")
        if not math.isfinite(self.relative_angle):
            raise ValidationError("ángulo relativo no finito", field="relative_angle")
        if self.quadrature_points < MIN_QUADRATURE_POINTS:
            raise ValidationError(f"se requieren al menos {MIN_QUADRATURE_POINTS} puntos",
                                  field="quadrature_points")


@dataclass(frozen=True)
class SlitWheelPrediction:
    p: float
    p_min: float
    p_max: float

    def to_dict(self):
        return {"p": self.p, "p_min": self.p_min, "p_max": self.p_max}


def singlet_probability(theta_a, theta_b):
    """sin²(θa − θb), ángulos en grados."""
    return math.sin(math.radians(theta_a - theta_b)) ** 2


def wigner_evaluation(t):
    return InequalityEvaluation.from_probabilities(
        p13=singlet_probability(t.theta1, t.theta3),
        p12=singlet_probability(t.theta1, t.theta2),
        p23=singlet_probability(t.theta2, t.theta3),
        p11=singlet_probability(t.theta1, t.theta1),
    )


def max_violation_scan(grid_step):
    """Barrido exhaustivo de θ2, θ3 en [0°,180°) con θ1 = 0°; devuelve (ángulos, margen)."""
    if not 0.0 < grid_step <= MAX_GRID_STEP:
        raise ValidationError(f"paso de grilla fuera de (0, {MAX_GRID_STEP}]: {grid_step}", field="grid_step")
    n = math.ceil(180.0 / grid_step - 1e-9)
    grid = np.arange(n) * grid_step
    rad = np.radians(grid)
    sin2_t3 = np.sin(rad) ** 2

    best_margin, best = -np.inf, None
    for row in range(0, n, SCAN_ROW_BLOCK):
        t2 = rad[row:row + SCAN_ROW_BLOCK, None]
        # p11 = 0 para el singlete
        margins = sin2_t3[None, :] - np.sin(t2) ** 2 - np.sin(rad[None, :] - t2) ** 2
        block_max = float(margins.max())
        # Empates dentro de 1e-12 (simetría θ → −θ): gana el primero en orden de barrido
        if block_max > best_margin + 1e-12:
            i, j = np.argwhere(margins >= block_max - 1e-12)[0]
            best_margin, best = block_max, (row + int(i), int(j))
    i, j = best
    return AngleTriple(0.0, float(grid[i]), float(grid[j])), best_margin


def oam_coincidence(l, phi_a, phi_b):
    """cos²(l(φa − φb)), ángulos en radianes."""
    if l < 1:
        raise ValidationError(f"l debe ser >= 1: {l}", field="l")
    return math.cos(l * (phi_a - phi_b)) ** 2


def _coupling(slit_width_fraction):
    return math.sin(math.pi * slit_width_fraction) ** 2 / math.pi ** 2


def slitwheel_extremes(slit_width_fraction):
    w2 = slit_width_fraction ** 2
    coupling = _coupling(slit_width_fraction)
    return w2 - coupling, w2 + coupling


def _closed_form(l, slit_width_fraction, relative_angle):
    return slit_width_fraction ** 2 - math.cos(2 * l * relative_angle) * _coupling(slit_width_fraction)


def slitwheel_probability(c):
    p_min, p_max = slitwheel_extremes(c.slit_width_fraction)
    return SlitWheelPrediction(_closed_form(c.l, c.slit_width_fraction, c.relative_angle), p_min, p_max)


def _slit_integral(l, slit_width_fraction, relative_angle, points):
    """Integral de (1/4π²)·2cos²(l(φa−φb)) sobre las ranuras de ambas ruedas.

    El integrando tiene período π/l en cada ángulo, así que todos los pares de
    ranuras aportan lo mismo: se integra la ranura 0 de Alice contra una ranura
    de Bob (desplazada φo y reetiquetada −π/2l) y se multiplica por (2l)².
    """
    nodes, weights = np.polynomial.legendre.leggauss(points)
    width = math.pi * slit_width_fraction / l
    x = 0.5 * width * (nodes + 1.0)
    wx = 0.5 * width * weights
    bob = relative_angle - math.pi / (2 * l) + x
    density = 2.0 * np.cos(l * (x[:, None] - bob[None, :])) ** 2 / (4.0 * math.pi ** 2)
    return (2 * l) ** 2 * float(wx @ density @ wx)


def slitwheel_probability_numeric(c, tolerance=QUADRATURE_TOLERANCE):
    coarse = _slit_integral(c.l, c.slit_width_fraction, c.relative_angle, c.quadrature_points)
    fine = _slit_integral(c.l, c.slit_width_fraction, c.relative_angle, 2 * c.quadrature_points)
    if abs(fine - coarse) > tolerance:
        raise ConvergenceError(coarse, fine, tolerance)
    return fine


def fringe_curve(l, slit_width_fraction, n_points):
    """Forma cerrada muestreada en un período φo ∈ [0, π/l]."""
    if n_points < 2:
        raise ValidationError(f"se requieren al menos 2 puntos: {n_points}", field="n_points")
    SlitWheelConfig(l, slit_width_fraction)
    return [(float(phi), _closed_form(l, slit_width_fraction, float(phi)))
            for phi in np.linspace(0.0, math.pi / l, n_points)]


def fringe_curve_csv(curve):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["phi_o_rad", "probability"])
    writer.writerows((repr(phi), repr(p)) for phi, p in curve)
    return buffer.getvalue()


def settings_from_singlet(t, l):
    """θ → θ/l: la fase de franja l·φ replica los ángulos del singlete.

    Interpretación: 0/30/60 grados corresponden a 0/0.3/0.6 grados para l = 100.
    """
    return AngleTriple(t.theta1 / l, t.theta2 / l, t.theta3 / l)


def slitwheel_wigner_evaluation(l, slit_width_fraction, settings):
    """Forma cerrada en las tres diferencias de ángulo; p11 lleva el mínimo compensado."""
    phi1, phi2, phi3 = settings.radians
    p13 = _closed_form(l, slit_width_fraction, phi3 - phi1)
    p12 = _closed_form(l, slit_width_fraction, phi2 - phi1)
    p23 = _closed_form(l, slit_width_fraction, phi3 - phi2)
    p_min, p_max = slitwheel_extremes(slit_width_fraction)
    compensated = p_min - p_max * (p_min / p_max)
    return {
        "compensated": InequalityEvaluation.from_probabilities(p13, p12, p23, compensated),
        "uncompensated": InequalityEvaluation.from_probabilities(p13, p12, p23, p_min),
        "p_min": p_min,
        "p_max": p_max,
    }
