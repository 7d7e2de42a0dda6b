"""Armado y emisión de reportes: JSON estable a archivo o stdout y CSV de curvas."""
import sys
from pathlib import Path

from config import MAX_WORKERS, PUBLISHED_ONE_STEP_FLAT, PUBLISHED_PERFECT_FLAT, RANDOM_STREAM
from wigner.census_functions import (
    VARIANTS,
    FlatnessPredicate,
    census_one_step,
    census_perfect,
    census_report,
    census_speedup,
    efa_group_census,
    likelihood_ratio,
    multi_step_possibilities,
    parent_pair_groups,
    published_likelihood_ratio,
)
from wigner.lhvsim_functions import (
    adversarial_hvm,
    balanced_adversarial_hvm,
    distribution_to_json,
    extended_inequality,
    same_setting_coincidences,
    substituted_residual_weights,
)
from wigner.quantum_functions import (
    max_violation_scan,
    settings_from_singlet,
    slitwheel_probability,
    slitwheel_probability_numeric,
    slitwheel_wigner_evaluation,
    wigner_evaluation,
)
from wigner.symbolcore_functions import one_step_symbols, sorted_text
from wigner.utils import dump_json

TIMING_KEYS = ("elapsed_s", "baseline_elapsed_s", "speedup")
CENSUS_SCOPES = ("perfect", "one_step", "groups", "all")


def strip_timing(data):
    """Quita los campos de tiempo para que dos corridas den JSON idéntico byte a byte."""
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k not in TIMING_KEYS}
    if isinstance(data, list):
        return [strip_timing(v) for v in data]
    return data


def emit(text, output_path=None):
    if output_path is None:
        sys.stdout.write(text)
        return
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def emit_json(data, output_path=None, with_timing=True):
    emit(dump_json(data if with_timing else strip_timing(data)), output_path)


def quantum_report(angles, grid_step):
    scan_angles, margin = max_violation_scan(grid_step)
    return {
        "evaluation": {"angles": angles.to_dict(), **wigner_evaluation(angles).to_dict()},
        "max_violation_scan": {"grid_step": grid_step, "angles": scan_angles.to_dict(), "margin": margin},
    }


def slitwheel_report(config, singlet_angles, numeric=True):
    prediction = slitwheel_probability(config)
    report = {
        "config": {"l": config.l, "slit_width_fraction": config.slit_width_fraction,
                   "relative_angle": config.relative_angle},
        "prediction": prediction.to_dict(),
    }
    if numeric:
        value = slitwheel_probability_numeric(config)
        report["numeric"] = {
            "p": value,
            "quadrature_points": config.quadrature_points,
            "relative_difference": abs(value - prediction.p) / prediction.p_max,
        }
    settings = settings_from_singlet(singlet_angles, config.l)
    evaluation = slitwheel_wigner_evaluation(config.l, config.slit_width_fraction, settings)
    report["wigner"] = {
        "settings_deg": settings.to_dict(),
        "compensated": evaluation["compensated"].to_dict(),
        "uncompensated": evaluation["uncompensated"].to_dict(),
    }
    return report


def adversary_report(extra, balanced_extra):
    d, profile = adversarial_hvm(extra)
    balanced = balanced_adversarial_hvm(balanced_extra)
    return {
        "adversarial": {
            "extra": extra,
            "distribution": distribution_to_json(d),
            "singles_profile": list(profile),
            "evaluation": extended_inequality(d).to_dict(),
            "same_setting": list(same_setting_coincidences(d)),
        },
        "balanced": {
            "extra": balanced_extra,
            "distribution": distribution_to_json(balanced["distribution"]),
            "singles_profile": list(balanced["singles_profile"]),
            "same_setting": list(balanced["same_setting"]),
            "evaluation": balanced["evaluation"].to_dict(),
        },
        "substituted_forms": substituted_residual_weights(d),
    }


def montecarlo_report(summary, seed, shards, tolerance):
    return {
        "seed": seed,
        "shards": shards,
        "tolerance": tolerance,
        "random_stream": RANDOM_STREAM,
        **summary,
        "passed": summary["raw_failures"] == 0 and summary["efa_failures"] == 0,
    }


def census_full_report(scope="all", variants=VARIANTS, shards=1, workers=None, with_timing=True):
    """Censos pedidos para cada variante del predicado, con las cifras publicadas al lado."""
    report = {"scope": scope, "variants": list(variants)}
    perfect = {}
    if scope in ("perfect", "one_step", "all"):
        for variant in variants:
            perfect[variant] = census_perfect(FlatnessPredicate(variant))
        report["perfect"] = {v: census_report(r, PUBLISHED_PERFECT_FLAT, with_timing) for v, r in perfect.items()}
    if scope in ("one_step", "all"):
        one_step, ratios = {}, {}
        for variant in variants:
            pred = FlatnessPredicate(variant)
            if shards > 1 and with_timing:
                result, baseline, speedup = census_speedup(one_step_symbols(), pred, shards, workers)
                one_step[variant] = census_report(result, PUBLISHED_ONE_STEP_FLAT, with_timing)
                one_step[variant]["baseline_elapsed_s"] = round(baseline.elapsed, 6)
                one_step[variant]["speedup"] = speedup
            else:
                result = census_one_step(pred, shards=shards, workers=workers)
                one_step[variant] = census_report(result, PUBLISHED_ONE_STEP_FLAT, with_timing)
            ratios[variant] = likelihood_ratio(perfect[variant], result)
        report["one_step"] = one_step
        report["likelihood_ratio"] = {"recomputed": ratios, "published_counts": published_likelihood_ratio()}
        report["shards"] = shards
        report["workers"] = 1 if shards == 1 else workers or min(shards, MAX_WORKERS)
    if scope in ("groups", "all"):
        report["groups"] = {
            "grouping": "by_parent_pair",
            "members": [sorted_text(g) for g in parent_pair_groups()],
            "census": {v: census_report(efa_group_census("by_parent_pair", FlatnessPredicate(v)),
                                        with_timing=with_timing) for v in variants},
        }
    report["multi_step_possibilities"] = multi_step_possibilities(3)
    return report
