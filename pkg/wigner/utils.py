import json
import os
import sys
from datetime import datetime

# config.py vive en la raíz del repo
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))


class ValidationError(ValueError):
    """Entrada inválida, con el campo y la línea cuando se conocen."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        context = []
        if line is not None:
            context.append(f"línea {line}")
        if field is not None:
            context.append(f"campo '{field}'")
        super().__init__(f"{message} ({', '.join(context)})" if context else message)


class UnknownLabelError(ValidationError):
    """Etiqueta fuera del conjunto permitido (agrupación, convención, predicado)."""

    def __init__(self, kind, label, allowed):
        super().__init__(f"{kind} desconocido: {label!r}; opciones: {', '.join(allowed)}", field=kind)
        self.label = label


class ConvergenceError(RuntimeError):
    """La cuadratura no convergió al duplicar los puntos."""

    def __init__(self, coarse, fine, tolerance):
        self.coarse = coarse
        self.fine = fine
        super().__init__(
            f"cuadratura sin convergencia: {coarse:.12g} vs {fine:.12g} "
            f"(diferencia {abs(fine - coarse):.3g} > {tolerance:.1g})"
        )


class ShardFailure(RuntimeError):
    """Uno o más workers devolvieron {"error": ...}."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__(f"{len(self.errors)} shard(s) con error: {'; '.join(self.errors)}")


def log(message):
    """Función simple de logging (a stderr, para no ensuciar el JSON de stdout)."""
    print(f"[{datetime.now().strftime('%Y-%m-%d %H:%M:%S')}] {message}", file=sys.stderr)


def log_error(context, error):
    print(f"[ERROR] {context}: {error}", file=sys.stderr)


def require_label(kind, label, allowed):
    """Valida una etiqueta contra las opciones permitidas."""
    if label not in allowed:
        raise UnknownLabelError(kind, label, allowed)
    return label


def run_guarded(context, func, *args, **kwargs):
    """Ejecuta un trabajo de un worker y devuelve {"error": ...} en vez de propagar."""
    try:
        return func(*args, **kwargs)
    except Exception as e:
        log_error(context, e)
        return {"error": f"{type(e).__name__}: {e}"}


def dump_json(data):
    """JSON estable: claves ordenadas, sangría fija, salto de línea final."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)
