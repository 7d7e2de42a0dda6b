# Configuración general de las corridas (tolerancias, valores por defecto y cifras publicadas)

# Tolerancias
PROB_TOLERANCE = 1e-12
QUADRATURE_TOLERANCE = 1e-8
ORACLE_RELATIVE_TOLERANCE = 1e-6

# Valores por defecto del CLI
DEFAULT_SEED = 20140101
DEFAULT_SAMPLES = 100_000
DEFAULT_SHARDS = 8
MAX_WORKERS = 8
DEFAULT_GRID_STEP = 1.0
DEFAULT_QUADRATURE_POINTS = 64
DEFAULT_FRINGE_POINTS = 101

# Tamaño de bloque del censo: 2**20 códigos por iteración
CENSUS_CHUNK_BITS = 20

# Cifras publicadas (se reportan junto a lo recalculado, nunca se fuerzan)
PUBLISHED_PERFECT_FLAT = 25
PUBLISHED_PERFECT_UNIVERSE = 256
PUBLISHED_ONE_STEP_FLAT = 4083
PUBLISHED_ONE_STEP_UNIVERSE = 2 ** 24
PUBLISHED_VIOLATION = 368
PUBLISHED_SIGMA = 135
PUBLISHED_P_MIN = 0.002
PUBLISHED_P_MAX = 0.043

# Generador portable: Philox 4x64 (10 rondas), clave = seed + (stream << 64).
# La muestra i de un stream usa las palabras [64*i, 64*i + 64), es decir los
# bloques de contador [16*i, 16*i + 16); cada double consume una palabra.
RANDOM_STREAM = {
    "generator": "numpy.random.Philox",
    "key": "seed + (stream << 64)",
    "words_per_sample": 64,
    "counter_blocks_per_sample": 16,
    "streams": {"simplex": 0, "efa": 1},
}
