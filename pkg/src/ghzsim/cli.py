"""Command line entry point: ``ghzsim --config experiment.yaml``."""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

import yaml

from . import experiments as ex
from . import rates as rt
from .config import ExperimentConfig, load_config, with_overrides
from .errors import GhzSimError
from .modes import StateVector

log = logging.getLogger("ghzsim")

_EXTENSIONS = {"csv": ".csv", "yaml": ".yaml"}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _yaml(data) -> str:
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)


def _state_records(state: StateVector) -> list:
    return [
        {
            "modes": [str(p.mode) for p in term.photons],
            "centers_fs": [p.packet.center for p in term.photons],
            "real": term.amplitude.real,
            "imag": term.amplitude.imag,
        }
        for term in state.terms
    ]


def _state_output(state: StateVector, fmt_name: str, extra: dict) -> str:
    records = _state_records(state)
    if fmt_name == "csv":
        rows = [(" ".join(r["modes"]), fmt(r["real"]), fmt(r["imag"])) for r in records]
        return _csv(("modes", "real", "imag"), rows)
    return _yaml({**extra, "terms": records})


def _scan_output(records, fmt_name: str) -> str:
    if fmt_name == "csv":
        rows = [(fmt(r.delay), fmt(r.p_plus45), fmt(r.p_minus45)) for r in records]
        return _csv(("delay_fs", "p_plus45", "p_minus45"), rows)
    return _yaml([{"delay_fs": r.delay, "p_plus45": r.p_plus45, "p_minus45": r.p_minus45} for r in records])


def run_evolve(cfg: ExperimentConfig):
    params = cfg.ghz_params()
    prob, state = ex.postselected_ghz(params)
    state = state.erase_origins()
    fid = None
    if params.delay == 0 and params.convention == "paper":
        fid = ex.fidelity(state, ex.ghz_reference(ex.WavePacket(0.0, params.coherence_sigma)))
    text = _state_output(state, cfg.output.format, {"probability": prob, "fidelity_ghz": fid})
    summary = f"evolve: fourfold probability {prob:.6g}, {len(state)} terms"
    if fid is not None:
        summary += f", fidelity with GHZ {fid:.12f}"
    return text, summary


def run_histogram(cfg: ExperimentConfig):
    hist = ex.term_histogram(cfg.ghz_params())
    if cfg.output.format == "csv":
        text = _csv(("combination", "probability"), [(k, fmt(v)) for k, v in hist.probabilities.items()])
    else:
        text = _yaml(
            {
                "noise_w": hist.noise_w,
                "probabilities": hist.probabilities,
                "summed_ratio": hist.summed_ratio,
                "per_combination_ratio": hist.per_combination_ratio,
            }
        )
    summary = (
        f"histogram: desired:undesired {hist.summed_ratio:.4g}:1 summed, "
        f"{hist.per_combination_ratio:.4g}:1 per combination"
    )
    return text, summary


def run_scan(cfg: ExperimentConfig, control: bool):
    params = cfg.ghz_params()
    delays = cfg.scan.delays()
    if control:
        records = ex.control_scan(params, delays, cfg.ghz.theta2_deg)
    else:
        records = ex.delay_scan(params, delays, cfg.ghz.theta1_deg, cfg.ghz.theta2_deg)
    vis = ex.visibility(records)
    name = "control-scan" if control else "delay-scan"
    return _scan_output(records, cfg.output.format), f"{name}: {len(records)} points, visibility {vis:.6f}"


def run_entanglement(cfg: ExperimentConfig):
    params = cfg.ghz_params()
    _, ghz = ex.postselected_ghz(params)
    pair, fid = ex.entangled_entanglement_check(ghz.erase_origins(), cfg.ghz.theta1_deg)
    text = _state_output(pair, cfg.output.format, {"theta1_deg": cfg.ghz.theta1_deg, "fidelity": fid})
    return text, f"entanglement-check: theta1 {cfg.ghz.theta1_deg:g} deg, fidelity with diagonal Bell state {fid:.12f}"


def rate_params(cfg: ExperimentConfig) -> rt.RateParams:
    r = cfg.rates
    if r.calibrate == "none":
        return rt.RateParams.from_model(r.pulse_rate_hz, r.pair_mean, r.efficiency)
    return rt.calibrate(r.target_fourfold_per_pulse, r.calibrate, r.pulse_rate_hz, r.pair_mean, r.efficiency)


def run_rates(cfg: ExperimentConfig):
    params = rate_params(cfg)
    double, triple = rt.fourfold_terms(params)
    per_pulse = double + triple
    rate = per_pulse * params.pulse_rate
    report = rt.simulate_counts(params, cfg.rates.duration_s, cfg.seed, cfg.rates.method)
    inf = float("inf")
    rows = [
        ("pulse_rate", params.pulse_rate, "1/s"),
        ("pair_mean", params.pair_mean, "1/pulse"),
        ("efficiency", params.efficiency, "1"),
        ("postselect_prob_double", params.postselect_prob_double, "1"),
        ("postselect_prob_triple", params.postselect_prob_triple, "1"),
        ("fourfold_prob_per_pulse", per_pulse, "1/pulse"),
        ("fourfold_rate", rate, "1/s"),
        ("fourfold_interval", 1.0 / rate if rate > 0 else inf, "s"),
        ("triple_fourfold_interval", 1.0 / (triple * params.pulse_rate) if triple > 0 else inf, "s"),
        ("triple_to_double_ratio", rt.triple_to_double_ratio(params), "1"),
        ("mc_duration", report.duration, "s"),
        ("mc_pulses", report.pulses, "1"),
        ("mc_fourfold_double", report.fourfold_double, "counts"),
        ("mc_fourfold_triple", report.fourfold_triple, "counts"),
        ("mc_singles", report.singles, "counts"),
        ("mc_twofolds", report.twofolds, "counts"),
        ("mc_threefolds", report.threefolds, "counts"),
        ("expected_fourfold_double", double * report.pulses, "counts"),
    ]
    if cfg.output.format == "csv":
        text = _csv(("quantity", "value", "unit"), [(q, fmt(v), u) for q, v, u in rows])
    else:
        text = _yaml({q: {"value": float(v), "unit": u} for q, v, u in rows})
    interval = 1.0 / rate if rate > 0 else inf
    summary = f"rates: {rate:.4g} fourfolds/s (one per {interval:.4g} s); MC {report.fourfold} fourfolds in {report.duration:g} s"
    return text, summary


def run(cfg: ExperimentConfig) -> str:
    """Run the configured experiment, write its output file and return the summary line."""
    dispatch = {
        "evolve": run_evolve,
        "histogram": run_histogram,
        "delay-scan": lambda c: run_scan(c, control=False),
        "control-scan": lambda c: run_scan(c, control=True),
        "entanglement-check": run_entanglement,
        "rates": run_rates,
    }
    text, summary = dispatch[cfg.experiment](cfg)
    path = cfg.output.path or f"{cfg.experiment}{_EXTENSIONS[cfg.output.format]}"
    atomic_write(path, text)
    log.info("wrote %s", path)
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghzsim", description="Three-photon GHZ linear-optics simulator")
    parser.add_argument("--config", required=True, help="YAML experiment configuration")
    parser.add_argument("--output", help="output file (overrides output.path)")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides seed)")
    parser.add_argument("--format", choices=("csv", "yaml"), help="output format (overrides output.format)")
    parser.add_argument("--points", type=int, help="number of scan points (overrides scan.points)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = with_overrides(load_config(args.config), args.output, args.seed, args.format, args.points)
        summary = run(cfg)
    except GhzSimError as exc:
        print(f"ghzsim: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ghzsim: error: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
