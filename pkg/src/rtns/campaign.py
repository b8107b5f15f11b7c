"""Seeded Monte Carlo campaigns: trial execution, CSV/JSON reporting.

Determinism contract: the CSV and JSON outputs are fully determined by
(master seed, config). Trials may run on any number of threads; rows are
sorted by (point index, trial index) before writing, every per-trial RNG is
derived from the master seed by a counter-based scheme, and wall-clock
timings are deliberately kept out of both output files.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from . import correlations as corr_mod
from . import expander as exp_mod
from . import parent as parent_mod
from . import transfer as transfer_mod
from .errors import DegenerateSampleError, InvalidParameterError, NumericalFailureError
from .sampling import SeedSpec, sample_complex_gaussian_matrix, sample_mps_tensor, sample_peps_tensor
from .spectral import operator_norm

__all__ = ["ExperimentConfig", "TrialRecord", "run_campaign", "EXPERIMENTS", "load_config"]

EXPERIMENTS = (
    "mps_gap",
    "peps_gap",
    "peps_gap_independent",
    "parent_gap_mps",
    "parent_gap_peps",
    "correlations",
    "expander",
    "wishart_check",
    "overlap_check",
    "trace_check",
    "peps_cp_check",
)

MC_MARGIN_FLOOR = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    d: int
    D: int
    trials: int
    master_seed: int
    N: int | None = None
    eps: float = 0.1
    sweep_param: str | None = None  # "d", "D", or "N"
    sweep_values: tuple = ()
    output_dir: str = "."
    threads: int = 1
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidParameterError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {self.trials}")
        if self.d < 1 or self.D < 1 or (self.N is not None and self.N < 1):
            raise InvalidParameterError("dimensions must be >= 1")
        if self.sweep_param is not None:
            if self.sweep_param not in ("d", "D", "N"):
                raise InvalidParameterError(f"sweep parameter must be d, D or N, got {self.sweep_param!r}")
            vals = list(self.sweep_values)
            if vals != sorted(set(vals)) or len(vals) == 0:
                raise InvalidParameterError("sweep values must be strictly increasing and nonempty")

    def points(self) -> list[dict]:
        base = {"d": self.d, "D": self.D, "N": self.N}
        if self.sweep_param is None:
            return [base]
        out = []
        for v in self.sweep_values:
            pt = dict(base)
            pt[self.sweep_param] = v
            out.append(pt)
        return out


@dataclass
class TrialRecord:
    point_index: int
    trial_index: int
    derived_seed: int
    parameters: dict
    measurements: dict
    flags: tuple[str, ...]
    wall_time_ms: float  # never serialized (would break byte-determinism)


# --- per-trial experiment bodies -------------------------------------------


def _trial_overlap(seed: SeedSpec, d, D, N):
    T = transfer_mod.mps_transfer(sample_mps_tensor(seed.child("tensor"), d, D))
    return {"overlap": transfer_mod.overlap_psi(T)}


def _trial_trace(seed: SeedSpec, d, D, N):
    T = transfer_mod.mps_transfer(sample_mps_tensor(seed.child("tensor"), d, D))
    return {"trace": float(transfer_mod.trace(T).real)}


def _trial_wishart(seed: SeedSpec, d, D, N):
    # n = D^2 column dimension, s = d samples; entries standard complex normal
    n, s = D * D, d
    G = sample_complex_gaussian_matrix(seed.child("ginibre"), s, n, 1.0)
    W = G.conj().T @ G
    return {"deviation": operator_norm(W / s - np.eye(n))}


def _trial_mps_gap(seed: SeedSpec, d, D, N):
    T = transfer_mod.mps_transfer(sample_mps_tensor(seed.child("tensor"), d, D))
    summary, cert = transfer_mod.transfer_gap(T)
    cp_image = transfer_mod.apply_cp(T, np.eye(D, dtype=np.complex128))
    first_defl, _ = transfer_mod.deflated_norms(T)
    return {
        "gap": summary.gap,
        "lambda1_mod": abs(summary.lambda1),
        "lambda2_mod": summary.lambda2_modulus,
        "cp_identity_dist": operator_norm(cp_image - np.eye(D)),
        "deflated_norm": first_defl,
        "cert_bound": cert.bound,
        "cert_applicable": float(cert.applicable),
    }


def _trial_peps_gap(seed: SeedSpec, d, D, N, independent=False):
    if N is None:
        raise InvalidParameterError("PEPS experiments need N")
    if independent:
        tensors = [sample_peps_tensor(seed.child(f"tensor/{i}"), d, D) for i in range(N)]
        T = transfer_mod.peps_transfer_independent(tensors)
    else:
        T = transfer_mod.peps_transfer(sample_peps_tensor(seed.child("tensor"), d, D), N)
    out = {"overlap": transfer_mod.overlap_psi(T)}
    tr = transfer_mod.trace(T)
    out["trace_re"], out["trace_im"] = tr.real, tr.imag
    if T.bond_dim <= 64:
        summary, _ = transfer_mod.transfer_gap(T)
        out["gap"] = summary.gap
        out["lambda2_mod"] = summary.lambda2_modulus
    return out


def _trial_peps_cp(seed: SeedSpec, d, D, N):
    if N is None:
        raise InvalidParameterError("PEPS experiments need N")
    T = transfer_mod.peps_transfer(sample_peps_tensor(seed.child("tensor"), d, D), N)
    n = T.bond_dim
    image = transfer_mod.apply_cp(T, np.eye(n, dtype=np.complex128))
    evals = np.linalg.eigvalsh(0.5 * (image + image.conj().T))
    return {
        "cp_identity_dist": operator_norm(image - np.eye(n)),
        "cp_identity_lambda_min": float(evals[0]),
    }


def _trial_parent_mps(seed: SeedSpec, d, D, N):
    if N is None:
        raise InvalidParameterError("parent Hamiltonian experiments need N")
    H = parent_mod.mps_parent(sample_mps_tensor(seed.child("tensor"), d, D), N)
    proj = H.projectors[0]
    out = {
        "rank": float(proj.rank),
        "rank_deficient": float(proj.rank_deficient),
        "p_tilde_dist": parent_mod.p_tilde_distance(proj),
        "commutator": parent_mod.commutator_norm(proj),
    }
    ground, gap = parent_mod.hamiltonian_gap(H)
    out["ground_energy"], out["gap"] = ground, gap
    return out


def _trial_parent_peps(seed: SeedSpec, d, D, N):
    if N is None:
        raise InvalidParameterError("parent Hamiltonian experiments need N")
    H = parent_mod.peps_parent(sample_peps_tensor(seed.child("tensor"), d, D), N)
    vert, hor = H.projectors
    ground, gap = parent_mod.hamiltonian_gap(H)
    return {
        "rank_vertical": float(vert.rank),
        "rank_horizontal": float(hor.rank),
        "rank_deficient": float(vert.rank_deficient or hor.rank_deficient),
        "ground_energy": ground,
        "gap": gap,
        "commutator_hv": parent_mod.projector_commutator_norm(hor, vert, arrangement="wedge"),
        "commutator_vh": parent_mod.projector_commutator_norm(vert, hor, arrangement="wedge"),
    }


def _trial_correlations(seed: SeedSpec, d, D, N):
    if N is None:
        raise InvalidParameterError("correlation experiments need N")
    T = transfer_mod.mps_transfer(sample_mps_tensor(seed.child("tensor"), d, D))
    summary, _ = transfer_mod.transfer_gap(T)
    ratio = summary.lambda2_modulus / abs(summary.lambda1)
    family = corr_mod.observable_family(d, seed.child("observables"), random_count=2)
    A = corr_mod.boundary_operator(T, family[0][1])
    Ap = corr_mod.boundary_operator(T, family[1][1])
    profile = corr_mod.correlation_profile(T, A, Ap, N)
    out = {
        "fit_rate": profile.fit_rate,
        "target_rate": -math.log(ratio) if ratio > 0 else math.inf,
        "lambda_ratio": ratio,
        "fit_residual": profile.residual,
    }
    for k, g in zip(profile.separations, profile.values):
        out[f"gamma_{k}"] = g
    return out


def _trial_expander(seed: SeedSpec, d, D, N):
    T = transfer_mod.mps_transfer(sample_mps_tensor(seed.child("tensor"), d, D))
    channel = exp_mod.normalize_channel(T, variant="tp")
    fp = exp_mod.fixed_point(channel)
    m_lower, k, eps = exp_mod.expander_report(channel, fp)
    return {
        "tp_residual": channel.tp_residual,
        "purity": fp.purity,
        "m_lower": m_lower,
        "kraus_rank": float(k),
        "eps": eps,
        "iterations": float(fp.iterations),
        "two_two_dist": exp_mod.two_two_distance(T, channel),
    }


_TRIAL_BODIES = {
    "overlap_check": _trial_overlap,
    "trace_check": _trial_trace,
    "wishart_check": _trial_wishart,
    "mps_gap": _trial_mps_gap,
    "peps_gap": _trial_peps_gap,
    "peps_gap_independent": lambda seed, d, D, N: _trial_peps_gap(seed, d, D, N, independent=True),
    "peps_cp_check": _trial_peps_cp,
    "parent_gap_mps": _trial_parent_mps,
    "parent_gap_peps": _trial_parent_peps,
    "correlations": _trial_correlations,
    "expander": _trial_expander,
}


def _run_trial(config: ExperimentConfig, point_index: int, point: dict, trial_index: int) -> TrialRecord:
    label = f"{config.experiment}/point{point_index}"
    seed = SeedSpec(master_seed=config.master_seed, trial_index=trial_index, stream_label=label)
    start = time.perf_counter()
    flags: list[str] = []
    measurements: dict = {}
    try:
        measurements = _TRIAL_BODIES[config.experiment](seed, point["d"], point["D"], point["N"])
        if measurements.pop("rank_deficient", 0.0):
            flags.append("rank_deficient")
    except DegenerateSampleError:
        flags.append("degenerate")
    except NumericalFailureError:
        flags.append("numerical_failure")
    return TrialRecord(
        point_index=point_index,
        trial_index=trial_index,
        derived_seed=seed.derived_entropy() % 2**63,
        parameters=dict(point),
        measurements=measurements,
        flags=tuple(flags),
        wall_time_ms=(time.perf_counter() - start) * 1000.0,
    )


# --- aggregation -------------------------------------------------------------


def _mc_margin(freq: float, trials: int) -> float:
    return 2.0 * math.sqrt(max(freq * (1.0 - freq), 0.0) / trials) + MC_MARGIN_FLOOR


def _frequency_check(name, values, threshold, report, above=True):
    """Pass/fail of an empirical violation frequency against a paper bound."""
    trials = len(values)
    if above:
        violations = sum(1 for v in values if v > threshold)
    else:
        violations = sum(1 for v in values if v < threshold)
    freq = violations / trials if trials else 0.0
    entry = {
        "bound": name,
        "threshold": threshold,
        "empirical_frequency": freq,
        "vacuous": report.vacuous,
        "value_only": report.vacuous or report.probability_bound is None,
    }
    if entry["value_only"]:
        entry["passed"] = None
    else:
        limit = report.probability_bound + _mc_margin(freq, trials)
        entry["bound_value"] = report.probability_bound
        entry["margin"] = _mc_margin(freq, trials)
        entry["passed"] = freq <= limit
    return entry


def _bound_checks(config: ExperimentConfig, point: dict, rows: list[TrialRecord]) -> list[dict]:
    d, D, N = point["d"], point["D"], point["N"]
    get = lambda key: [r.measurements[key] for r in rows if key in r.measurements]
    checks = []
    exp = config.experiment
    if exp == "overlap_check":
        vals = get("overlap")
        if vals:
            mean = sum(vals) / len(vals)
            checks.append(
                {"bound": "overlap_mean", "mean": mean, "passed": abs(mean - 1.0) <= 0.01}
            )
    elif exp == "trace_check":
        rep = bounds_mod.paper_bounds("trace_t", d=d, eps=config.eps)
        vals = get("trace")
        if vals:
            checks.append(_frequency_check("trace_t", vals, rep.value, rep))
    elif exp == "wishart_check":
        rep = bounds_mod.paper_bounds("wishart", n=D * D, s=d)
        vals = get("deviation")
        if vals:
            checks.append(_frequency_check("wishart", vals, rep.value, rep))
    elif exp == "mps_gap":
        gap_rep = bounds_mod.paper_bounds("mps_gap", d=d, D=D)
        vals = get("gap")
        if vals:
            entry = {
                "bound": "mps_gap",
                "threshold": gap_rep.value,
                "min_gap": min(vals),
                "vacuous": gap_rep.vacuous,
                "value_only": True,
                "passed": min(vals) >= gap_rep.value,
            }
            checks.append(entry)
        cp_rep = bounds_mod.paper_bounds("mps_cp", d=d, D=D)
        vals = get("cp_identity_dist")
        if vals:
            checks.append(_frequency_check("mps_cp", vals, cp_rep.value, cp_rep))
        defl_rep = bounds_mod.paper_bounds("mps_deflated", d=d)
        vals = get("deflated_norm")
        if vals:
            mean = sum(vals) / len(vals)
            checks.append(
                {
                    "bound": "mps_deflated_mean",
                    "threshold": defl_rep.value,
                    "mean": mean,
                    "value_only": True,
                    "passed": mean <= defl_rep.value,
                }
            )
    elif exp in ("peps_gap", "peps_gap_independent"):
        rep = bounds_mod.paper_bounds("peps_overlap", d=d, D=D, N=N)
        vals = get("overlap")
        if vals:
            checks.append(
                {
                    "bound": "peps_overlap",
                    "threshold": rep.value,
                    "max_deviation": max(abs(v - 1.0) for v in vals),
                    "vacuous": rep.vacuous,
                    "value_only": True,
                    "passed": (max(abs(v - 1.0) for v in vals) <= rep.value)
                    if not rep.vacuous
                    else None,
                }
            )
    elif exp == "peps_cp_check":
        rep = bounds_mod.paper_bounds("peps_cp_lower", d=d, D=D, N=N)
        vals = get("cp_identity_lambda_min")
        if vals:
            threshold = rep.value if not rep.vacuous else 0.5
            checks.append(
                {
                    "bound": "peps_cp_lower",
                    "threshold": threshold,
                    "min_lambda_min": min(vals),
                    "vacuous": rep.vacuous,
                    "value_only": True,
                    "passed": min(vals) >= threshold,
                }
            )
    elif exp == "parent_gap_mps":
        for kind in ("gap_h", "p_pi", "pi_commute"):
            rep = bounds_mod.paper_bounds(kind, d=d, D=D)
            checks.append(
                {
                    "bound": kind,
                    "value": rep.value,
                    "computable": rep.computable,
                    "exponent": rep.formula_inputs.get("exponent"),
                    "passed": None,
                }
            )
    return checks


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_campaign(config: ExperimentConfig) -> tuple[str, str]:
    """Execute all trials; write <experiment>.csv and <experiment>_summary.json."""
    points = config.points()
    tasks = [
        (pi, point, ti)
        for pi, point in enumerate(points)
        for ti in range(config.trials)
    ]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            rows = list(pool.map(lambda t: _run_trial(config, *t), tasks))
    else:
        rows = [_run_trial(config, *t) for t in tasks]
    rows.sort(key=lambda r: (r.point_index, r.trial_index))

    # fixed, sorted measurement schema across all rows
    keys = sorted({k for r in rows for k in r.measurements})
    os.makedirs(config.output_dir, exist_ok=True)
    csv_path = os.path.join(config.output_dir, f"{config.experiment}.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        header = ["point_index", "trial_index", "derived_seed", "d", "D", "N"] + keys + ["flags"]
        fh.write(",".join(header) + "\n")
        for r in rows:
            vals = [
                str(r.point_index),
                str(r.trial_index),
                str(r.derived_seed),
                str(r.parameters["d"]),
                str(r.parameters["D"]),
                str(r.parameters["N"] if r.parameters["N"] is not None else ""),
            ]
            vals += [_fmt_value(r.measurements[k]) if k in r.measurements else "" for k in keys]
            vals.append(";".join(r.flags))
            fh.write(",".join(vals) + "\n")

    summary = {"experiment": config.experiment, "trials": config.trials, "points": []}
    flagged = sum(1 for r in rows if r.flags)
    summary["flagged_trials"] = flagged
    summary["status"] = "failed" if flagged > len(rows) / 2 else "ok"
    for pi, point in enumerate(points):
        prows = [r for r in rows if r.point_index == pi and not r.flags]
        entry = {"point_index": pi, "parameters": point, "rejects": config.trials - len(prows)}
        stats = {}
        for k in keys:
            vals = [r.measurements[k] for r in prows if k in r.measurements]
            if vals:
                arr = np.asarray(vals, dtype=float)
                stats[k] = {
                    "mean": float(arr.mean()),
                    "median": float(np.median(arr)),
                    "min": float(arr.min()),
                    "max": float(arr.max()),
                }
        entry["stats"] = stats
        entry["bound_checks"] = _bound_checks(config, point, prows)
        summary["points"].append(entry)
    if config.sweep_param is not None:
        trends = {}
        for k in keys:
            medians = [
                pt["stats"][k]["median"] for pt in summary["points"] if k in pt["stats"]
            ]
            if len(medians) == len(points) and len(medians) >= 2:
                trends[k] = {
                    "medians": medians,
                    "nondecreasing": all(a <= b for a, b in zip(medians, medians[1:])),
                    "strictly_decreasing": all(a > b for a, b in zip(medians, medians[1:])),
                }
        summary["trends"] = trends
    json_path = os.path.join(config.output_dir, f"{config.experiment}_summary.json")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def load_config(path: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read an ExperimentConfig from a JSON file, applying CLI overrides."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    if "sweep_values" in raw:
        raw["sweep_values"] = tuple(raw["sweep_values"])
    known = {
        "experiment",
        "d",
        "D",
        "trials",
        "master_seed",
        "N",
        "eps",
        "sweep_param",
        "sweep_values",
        "output_dir",
        "threads",
        "tolerances",
    }
    unknown = set(raw) - known
    if unknown:
        raise InvalidParameterError(f"unknown config fields: {sorted(unknown)}")
    return ExperimentConfig(**raw)
