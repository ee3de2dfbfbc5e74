from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..coherence import coherence_curve, coherence_integral, spin_echo_curve
from ..estimation import (
    FrequencyRange,
    T2Scan,
    fit_spectrum,
    frequency_bounds,
    measure_t2se,
    run_t2_scan,
)
from ..pulses import (
    PulseSequence,
    SequenceFamily,
    SequenceKind,
    filter_samples,
    make_sequence,
    sequence_from_dict,
)
from ..stochastic import OUProcessParams, mc_coherence
from ..utils.config_manager import ConfigError, RunConfig
from ..utils.logging_config import setup_logging
from ..utils.progress import progress
from ..utils.result_io import write_csv, write_json

logger = setup_logging(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARTIAL = 3
EXIT_FIT_FAILURE = 4
EXIT_MC_FAIL = 5

Z_THRESHOLD = 3.0
PASS_FRACTION = 0.95


def cmd_filter(config: RunConfig) -> int:
    """Write |f~_t(omega)|^2 of the configured sequence to filter.csv."""
    seq = sequence_from_dict(config["sequence"])
    omegas = config.omega_grid()
    samples = filter_samples(seq, omegas)
    frame = pd.DataFrame(
        {"omega": [s.omega for s in samples], "ff": [s.ff for s in samples]}
    )
    path = write_csv(frame, config.output_dir / "filter.csv", config.provenance())
    logger.info(f"Wrote {len(frame)} filter samples to {path}")
    return EXIT_OK


def cmd_coherence(config: RunConfig) -> int:
    """Write the coherence curve of the configured family to coherence.csv.

    A spin echo with a ``taus`` grid sweeps the half-spacing; any other
    equidistant family sweeps ``n_list`` at fixed tau.
    """
    family = config.family()
    noise = config.noise()
    tol = float(config["tolerance"])
    if family.kind is SequenceKind.SPIN_ECHO and config["taus"] is not None:
        curve = spin_echo_curve(
            config.taus(), noise, tol=tol, max_workers=config.max_workers
        )
    else:
        if not family.is_equidistant:
            raise ConfigError(
                f"Coherence curves sweep equidistant families, got {family.kind.value}"
            )
        curve = coherence_curve(
            family, noise, config.n_list(), tol=tol, max_workers=config.max_workers
        )
    path = curve.to_csv(config.output_dir / "coherence.csv", config.provenance())
    logger.info(f"Wrote {len(curve)} coherence points to {path}")
    return EXIT_OK


def _on_grid(tau: float, dt: float) -> float:
    return max(1, int(round(tau / dt))) * dt


def default_mc_suite(params: OUProcessParams) -> List[SequenceFamily]:
    """Spin echo and CPMG n = 8, 32 with half-spacings on the dt grid."""
    tau_c, dt = params.tau_c, params.dt
    return [
        SequenceFamily.spin_echo(_on_grid(tau_c, dt)),
        SequenceFamily.cpmg(_on_grid(tau_c / 4, dt), 8),
        SequenceFamily.cpmg(_on_grid(tau_c / 16, dt), 32),
    ]


def cmd_mc_validate(config: RunConfig) -> int:
    """Compare Monte Carlo OU coherence with the coherence integral.

    The analytic value uses the grid-snapped pulse instants of the
    simulation. The suite passes when at least 95 % of the cases have
    |z| <= 3. The verdict is reported in mc_report.json and a FAIL exits
    with EXIT_MC_FAIL.
    """
    params = config.ou_params()
    tol = float(config["tolerance"])
    if config["mc_suite"] is not None:
        families = [SequenceFamily.from_dict(f) for f in config["mc_suite"]]
    else:
        families = default_mc_suite(params)
    sequences = [make_sequence(f) for f in families]

    cases: List[Dict[str, Any]] = []
    with progress.main_bar(total=len(families), desc="Monte Carlo suite") as bar:
        for family, seq in zip(families, sequences):
            estimate = mc_coherence(
                seq,
                params,
                batches=int(config["mc_batches"]),
                max_workers=config.max_workers,
            )
            snapped = PulseSequence(estimate.pulse_times, seq.readout_time)
            analytic = coherence_integral(snapped, params.spectrum, tol=tol)
            z = (estimate.W_hat - analytic) / estimate.stderr
            cases.append(
                {
                    "sequence": family.to_dict(),
                    "W_analytic": analytic,
                    "W_hat": estimate.W_hat,
                    "stderr": estimate.stderr,
                    "z": z,
                    "passed": bool(abs(z) <= Z_THRESHOLD),
                    "phase_variance": estimate.phase_variance,
                    "gaussian_prediction": estimate.gaussian_prediction,
                    "pulse_times": list(estimate.pulse_times),
                    "n_traj": estimate.n_traj,
                    "batches": estimate.batches,
                }
            )
            bar.update(1)

    fraction = float(np.mean([c["passed"] for c in cases]))
    verdict = "PASS" if fraction >= PASS_FRACTION else "FAIL"
    report = {
        "provenance": config.provenance(),
        "ou": params.to_dict(),
        "cases": cases,
        "pass_fraction": fraction,
        "verdict": verdict,
    }
    path = write_json(report, config.output_dir / "mc_report.json")
    if verdict == "FAIL":
        logger.warning(f"Monte Carlo validation failed: {fraction:.0%} of cases pass")
    logger.info(f"Monte Carlo verdict {verdict}, report in {path}")
    return EXIT_OK if verdict == "PASS" else EXIT_MC_FAIL


def _scan_kind(family: SequenceFamily) -> SequenceKind:
    if family.kind is SequenceKind.APCP:
        return SequenceKind.APCP
    if family.kind in (SequenceKind.CPMG, SequenceKind.SPIN_ECHO):
        return SequenceKind.CPMG
    raise ConfigError(f"T2L scans need an equidistant family, got {family.kind.value}")


def _t2_se(config: RunConfig) -> Tuple[float, str]:
    if config["t2_se"] is not None:
        return float(config["t2_se"]), "config"
    estimate = measure_t2se(
        config.noise(),
        config.se_taus(),
        config.window_policy(),
        max_workers=config.max_workers,
    )
    return estimate.t2, "spin_echo_fit"


def _scan_bounds(config: RunConfig) -> Optional[FrequencyRange]:
    if config["tau_p"] is None:
        return None
    if config["t2_se"] is None and config["se_taus"] is None:
        return None
    t2_se, _ = _t2_se(config)
    return frequency_bounds(t2_se, float(config["tau_p"]))


def cmd_t2scan(config: RunConfig) -> int:
    """Write scan.csv and scan_diagnostics.csv; partial scans exit 3.

    With ``tau_p`` and a T2SE (configured or measured from ``se_taus``) the
    grid must lie inside the frequency bounds unless ``force`` is set.
    """
    kind = _scan_kind(config.family())
    spectrum = config.spectrum()
    bounds = _scan_bounds(config)
    report = run_t2_scan(
        config.taus(),
        spectrum,
        kind=kind,
        window_policy=config.window_policy(),
        pulse_budget=int(config["pulse_budget"]),
        harmonics=int(config["harmonics"]),
        tol=float(config["tolerance"]),
        bounds=bounds,
        force=bool(config["force"]),
        max_workers=config.max_workers,
    )
    header = {**config.provenance(), "kind": kind.value}
    report.scan.to_csv(config.output_dir / "scan.csv", header)
    write_csv(report.diagnostics, config.output_dir / "scan_diagnostics.csv", header)
    if report.partial:
        logger.warning(
            f"{report.failures} of {len(report.diagnostics)} taus were rejected"
        )
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_reconstruct(config: RunConfig) -> int:
    """Fit the configured spectrum family to a scan; writes reconstruction.json."""
    config.require("scan")
    scan = T2Scan.from_csv(Path(config["scan"]))
    result = fit_spectrum(
        scan,
        config["model"],
        L=int(config["harmonics"]),
        n_starts=int(config["n_starts"]),
        seed=config.seed,
        bounds={k: tuple(v) for k, v in (config["fit_bounds"] or {}).items()},
        fixed=config["fit_fixed"],
        frequency_range=config.frequency_range(),
        max_workers=config.max_workers,
    )
    path = result.to_json(
        config.output_dir / "reconstruction.json", config.provenance()
    )
    logger.info(f"Wrote {result.model} reconstruction to {path}")
    return EXIT_OK


def cmd_bounds(config: RunConfig) -> int:
    """Write bounds.json; T2SE is measured from ``se_taus`` unless configured."""
    config.require("tau_p")
    t2_se, source = _t2_se(config)
    window = frequency_bounds(t2_se, float(config["tau_p"]))
    payload = {
        "provenance": config.provenance(),
        "omega_lo": window.omega_lo,
        "omega_hi": window.omega_hi,
        "t2_se": t2_se,
        "t2_se_source": source,
        "tau_p": float(config["tau_p"]),
    }
    write_json(payload, config.output_dir / "bounds.json")
    return EXIT_OK


COMMAND_HANDLERS: Dict[str, Callable[[RunConfig], int]] = {
    "filter": cmd_filter,
    "coherence": cmd_coherence,
    "mc-validate": cmd_mc_validate,
    "t2scan": cmd_t2scan,
    "reconstruct": cmd_reconstruct,
    "bounds": cmd_bounds,
}
