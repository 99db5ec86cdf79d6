"""Command-line driver for the simulator.

Every experiment is a subcommand::

    entsim chsh --state werner --visibility 0.8
    entsim qkd-curve --l-max-km 160 --out curve.csv --plot
    entsim teleport --resource psi-plus --theta 1.1

Common flags: ``--seed`` (default 12345) makes every run reproducible,
``--out FILE`` writes the delimited results, ``--workers N`` splits Monte
Carlo sampling over independent child streams (bit-identical for a fixed
seed/worker pair), and ``--config FILE`` reads flat ``key=value`` lines
(command-line flags win; unknown keys are rejected).  Where supported,
``--plot`` renders a PNG figure next to the ``--out`` file.

Each run prints a single summary line to stdout of the form
``experiment=<name> <headline fields> seed=<seed>`` and exits 0 on
success, 2 on bad arguments, 1 on a runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import belltest, distill, protocols, qkdsim, tomography
from .measure import DetectorModel
from .qcore import BLOCH_X, BLOCH_Y, DensityMatrix, StateVector, fidelity
from .sources import BellKind, bell_state, ghz, nonmax_state, werner


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description (flags + config file + defaults)."""

    experiment: str
    params: dict
    seed: int = 12345
    shots: int | None = None
    out: str | None = None
    workers: int = 1
    plot: bool = False


@dataclass(frozen=True)
class _Opt:
    cast: Callable
    default: object
    help: str
    choices: tuple = ()
    flag: bool = False


@dataclass(frozen=True)
class _Experiment:
    help: str
    options: dict
    runner: Callable
    plot: bool = False
    shots_default: int | None = None
    shots_help: str = "samples to draw"


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) for c in row) + "\n")


def _maybe_plot(cfg: RunConfig, make_fig: Callable) -> None:
    """Render make_fig(plots_module) as PNG next to --out when --plot is set."""
    if not cfg.plot:
        return
    if cfg.out is None:
        raise ValueError("--plot needs --out to derive the image path")
    from . import plots  # matplotlib only loads when figures are wanted

    plots.save_figure(make_fig(plots), Path(cfg.out).with_suffix(".png"))


# ---------------------------------------------------------------------------
# shared option groups

_STATE_OPTS = {
    "state": _Opt(str, "singlet", "two-qubit state family",
                  choices=("singlet", "psi-plus", "phi-plus", "phi-minus",
                           "werner", "nonmax")),
    "visibility": _Opt(float, 1.0, "Werner-state visibility"),
    "alpha": _Opt(float, 1.0 / math.sqrt(2.0),
                  "amplitude of |00> for the nonmax family"),
    "phase": _Opt(float, 0.0, "relative phase of the nonmax family (rad)"),
}

_LINK_OPTS = {
    "length_km": _Opt(float, 0.0, "fiber length"),
    "alpha_db_per_km": _Opt(float, 0.2, "fiber attenuation"),
    "extra_loss_db": _Opt(float, 0.0, "fixed extra loss"),
    "f_rep_hz": _Opt(float, 1.0e6, "pulse repetition rate"),
    "mu": _Opt(float, 0.1, "mean photon (pair) number per pulse"),
    "eta": _Opt(float, 0.1, "detector efficiency"),
    "p_dark": _Opt(float, 1.0e-5, "dark-count probability per gate"),
    "n_det": _Opt(int, 4, "number of gated detectors"),
}


def _two_qubit_state(p: dict) -> DensityMatrix:
    name = p["state"]
    if name == "singlet":
        return bell_state(BellKind.PSI_MINUS).density()
    if name in ("psi-plus", "phi-plus", "phi-minus"):
        return bell_state(BellKind(name)).density()
    if name == "werner":
        return werner(p["visibility"])
    return nonmax_state(p["alpha"], p["phase"]).density()


def _link_params(p: dict, skip: tuple = ()) -> qkdsim.LinkParams:
    kwargs = {k: p[k] for k in _LINK_OPTS if k in p and k not in skip}
    return qkdsim.LinkParams(**kwargs)


def _patterns_arg(text: str):
    return tuple(text.split(",")) if text else None


def _bloch_input(theta: float, phi: float) -> StateVector:
    amps = [math.cos(0.5 * theta),
            complex(math.cos(phi), math.sin(phi)) * math.sin(0.5 * theta)]
    return StateVector((2,), amps)


# ---------------------------------------------------------------------------
# runners (each returns the headline fields for the stdout summary)


def _run_chsh(cfg: RunConfig, rng) -> str:
    p = cfg.params
    rho = _two_qubit_state(p)
    canonical = belltest.chsh(rho, belltest.ChshSettings.canonical())
    optimal = belltest.chsh_optimize(rho)
    chosen = optimal if p["settings"] == "optimal" else canonical
    if cfg.shots:
        detector = DetectorModel(eta=p["eta"], p_dark=p["p_dark"])
        est = belltest.chsh_estimate(rho, chosen.settings, cfg.shots,
                                     detector, rng, workers=cfg.workers)
        if cfg.out:
            est.counts.write_delimited(cfg.out)
        return (f"S={est.s_value:.6g} sigma_margin={est.sigma_margin:.6g} "
                f"S_exact={chosen.s_value:.6g}")
    if cfg.out:
        _write_rows(cfg.out, "key,value", [
            ("s_canonical", canonical.s_value),
            ("s_optimal", optimal.s_value),
            ("lhv_bound", belltest.LHV_BOUND),
            ("tsirelson", belltest.TSIRELSON),
            ("violated", chosen.violated),
        ])
    return f"S={chosen.s_value:.6g} violated={chosen.violated}"


def _run_mermin(cfg: RunConfig, rng) -> str:
    p = cfg.params
    rho = ghz(3, _patterns_arg(p["patterns"])).density()
    m = belltest.mermin3(rho)
    terms = [
        ("xyy", (BLOCH_X, BLOCH_Y, BLOCH_Y)),
        ("yxy", (BLOCH_Y, BLOCH_X, BLOCH_Y)),
        ("yyx", (BLOCH_Y, BLOCH_Y, BLOCH_X)),
        ("xxx", (BLOCH_X, BLOCH_X, BLOCH_X)),
    ]
    if cfg.out:
        from .measure import joint_expectation

        rows = [(name, joint_expectation(rho, axes)) for name, axes in terms]
        rows += [("m_value", m), ("lhv_bound", belltest.MERMIN_LHV_BOUND)]
        _write_rows(cfg.out, "key,value", rows)
    return f"M={m:.6g} |M|={abs(m):.6g} lhv_bound={belltest.MERMIN_LHV_BOUND:.6g}"


def _run_ghz_profile(cfg: RunConfig, rng) -> str:
    p = cfg.params
    state = ghz(p["n"], _patterns_arg(p["patterns"]))
    profile = belltest.diagonal_coincidence_profile(state)
    labels = list(profile)
    probs = np.array([profile[k] for k in labels])
    rows: list[tuple]
    if cfg.shots:
        counts = rng.multinomial(cfg.shots, probs / probs.sum())
        rows = [(lab, float(pr), int(c)) for lab, pr, c in zip(labels, probs, counts)]
        header = "outcome,probability,count"
    else:
        rows = [(lab, float(pr)) for lab, pr in zip(labels, probs)]
        header = "outcome,probability"
    if cfg.out:
        _write_rows(cfg.out, header, rows)
    _maybe_plot(cfg, lambda plots: plots.profile_figure(
        profile, title="diagonal-basis coincidence profile"))
    nonzero = int(np.count_nonzero(probs > 1e-12))
    return f"patterns={len(labels)} nonzero={nonzero} p_max={probs.max():.6g}"


def _run_efficiency_threshold(cfg: RunConfig, rng) -> str:
    p = cfg.params
    if p["alpha"] is not None:
        alphas = (p["alpha"],)
    elif p["alphas"]:
        alphas = tuple(float(x) for x in p["alphas"].split(","))
    else:
        alphas = belltest.DEFAULT_ALPHA_SWEEP
    sweep = belltest.threshold_sweep(alphas, p["tol"])
    if cfg.out:
        _write_rows(cfg.out, "alpha,eta_critical", sweep)
    _maybe_plot(cfg, lambda plots: plots.threshold_figure(sweep))
    a_last, eta_last = sweep[-1]
    return f"points={len(sweep)} eta(alpha={a_last:.6g})={eta_last:.6g}"


def _run_speed_bound(cfg: RunConfig, rng) -> str:
    p = cfg.params
    bound = belltest.speed_lower_bound(p["separation_m"], p["timing_s"])
    if cfg.out:
        _write_rows(cfg.out, "key,value", [
            ("separation_m", p["separation_m"]),
            ("timing_s", p["timing_s"]),
            ("bound_multiple_of_c", bound),
        ])
    return f"bound={bound:.6g}c"


def _run_bsm(cfg: RunConfig, rng) -> str:
    p = cfg.params
    rho = _two_qubit_state(p)
    probs = protocols.bsm_probabilities(rho)
    if p["mode"] == "partial":
        rows = [
            ("psi-minus", probs[BellKind.PSI_MINUS]),
            ("psi-plus", probs[BellKind.PSI_PLUS]),
            ("ambiguous", probs[BellKind.PHI_MINUS] + probs[BellKind.PHI_PLUS]),
        ]
    else:
        rows = [(k.value, probs[k]) for k in
                (BellKind.PSI_MINUS, BellKind.PSI_PLUS,
                 BellKind.PHI_MINUS, BellKind.PHI_PLUS)]
    header = "outcome,probability"
    if cfg.shots:
        pr = np.array([r[1] for r in rows])
        counts = rng.multinomial(cfg.shots, pr / pr.sum())
        rows = [(lab, pv, int(c)) for (lab, pv), c in zip(rows, counts)]
        header = "outcome,probability,count"
    if cfg.out:
        _write_rows(cfg.out, header, rows)
    _maybe_plot(cfg, lambda plots: plots.bar_pair_figure(
        [r[0] for r in rows], [r[1] for r in rows],
        "probability", "Bell-state analyzer outcomes"))
    top = max(rows, key=lambda r: r[1])
    return f"outcomes={len(rows)} top={top[0]} p_top={top[1]:.6g}"


def _run_teleport(cfg: RunConfig, rng) -> str:
    p = cfg.params
    source = _bloch_input(p["theta"], p["phi"])
    resource = BellKind(p["resource"])
    correction = not p["no_correction"]
    branches = protocols.teleport_outcomes(source, resource, p["bsm"], correction)
    rows = [(kind.value, prob, fidelity(source, bob)) for kind, prob, bob in branches]
    avg = sum(prob * fid for _, prob, fid in rows)
    header = "outcome,probability,fidelity"
    if cfg.shots:
        pr = np.array([r[1] for r in rows])
        counts = rng.multinomial(cfg.shots, pr / pr.sum())
        rows = [(lab, pv, fid, int(c)) for (lab, pv, fid), c in zip(rows, counts)]
        header = "outcome,probability,fidelity,count"
    if cfg.out:
        _write_rows(cfg.out, header, rows)
    return f"avg_fidelity={avg:.6g} bsm={p['bsm']} correction={correction}"


def _run_dense(cfg: RunConfig, rng) -> str:
    p = cfg.params
    msg_text = p["message"]
    if len(msg_text) != 2 or any(c not in "01" for c in msg_text):
        raise ValueError("message must be two bits, e.g. 10")
    message = (int(msg_text[0]), int(msg_text[1]))
    resource = BellKind(p["resource"])
    encoded = protocols.dense_code(message, resource)
    decoded, capacity = protocols.dense_decode(encoded, p["bsm"], resource, rng)
    if p["bsm"] == "full":
        received = f"{decoded[0]}{decoded[1]}"
        ok = decoded == message
    else:
        received = f"trit:{decoded}"
        ok = decoded != protocols.MESSAGE_TRITS[protocols.BsmKind.AMBIGUOUS]
    if cfg.out:
        _write_rows(cfg.out, "key,value", [
            ("sent", msg_text),
            ("received", received),
            ("resolved", ok),
            ("capacity_bits", capacity),
        ])
    return f"sent={msg_text} received={received} capacity={capacity:.6g}"


def _run_swap(cfg: RunConfig, rng) -> str:
    p = cfg.params
    pair = werner(p["visibility"])
    outcomes = protocols.swap_outcomes(pair, pair)
    rows = []
    kept_p = kept_s = float("nan")
    for kind, prob, kept in outcomes:
        s_val = belltest.chsh_optimize(kept).s_value
        rows.append((kind.value, prob, s_val))
        if kind is protocols.BsmKind.PSI_MINUS:
            kept_p, kept_s = prob, s_val
    if cfg.out:
        _write_rows(cfg.out, "outcome,probability,s_value", rows)
    return f"p_psi_minus={kept_p:.6g} S_kept={kept_s:.6g}"


def _run_tomo(cfg: RunConfig, rng) -> str:
    p = cfg.params
    rho = _two_qubit_state(p)
    settings = tomography.tomo_settings()
    counts = tomography.simulate_counts(rho, settings, cfg.shots, rng)
    if cfg.out:
        counts.write_delimited(cfg.out)
    linear = tomography.linear_inversion(counts)
    if p["method"] == "linear":
        estimate = tomography.project_to_physical(linear)
        extra = "method=linear"
    else:
        result = tomography.mle_reconstruct(counts)
        estimate = result.rho
        extra = (f"method=mle iterations={result.iterations} "
                 f"converged={result.converged}")
    fid = fidelity(rho, estimate)
    if cfg.out:
        tomography.write_matrix(estimate.mat, Path(cfg.out).with_suffix(".rho.csv"))
    _maybe_plot(cfg, lambda plots: plots.matrix_figure(
        estimate.mat, title="reconstructed state"))
    return f"fidelity={fid:.8g} shots_per_setting={cfg.shots} {extra}"


def _run_distill(cfg: RunConfig, rng) -> str:
    p = cfg.params
    rho = distill.hidden_family(p["weight"], p["alpha"])
    s_initial = belltest.chsh_optimize(rho).s_value
    filt, _, _ = distill.best_diagonal_filter(rho, p["grid"])
    filtered, prob = distill.local_filter(rho, filt)
    s_filtered = belltest.chsh_optimize(filtered).s_value
    if cfg.out:
        _write_rows(cfg.out, "key,value", [
            ("s_initial", s_initial),
            ("s_filtered", s_filtered),
            ("success_probability", prob),
            ("filter_t", float(filt.a[1, 1].real)),
            ("filter_s", float(filt.b[1, 1].real)),
        ])
    _maybe_plot(cfg, lambda plots: plots.bar_pair_figure(
        ["before", "after"], [s_initial, s_filtered],
        "CHSH S", "local filtering", hline=belltest.LHV_BOUND))
    return (f"s_initial={s_initial:.6g} s_filtered={s_filtered:.6g} "
            f"p_success={prob:.6g}")


def _run_qkd_rate(cfg: RunConfig, rng) -> str:
    p = cfg.params
    params = _link_params(p)
    point = qkdsim.secret_rate(params)
    reach = qkdsim.max_distance(params, p["threshold"])
    if cfg.out:
        rows = [(k, getattr(params, k)) for k in _LINK_OPTS]
        rows += [("t_link", point.t_link), ("qber", point.qber),
                 ("sifted_hz", point.sifted_hz), ("secret_hz", point.secret_hz),
                 ("max_distance_km", reach)]
        _write_rows(cfg.out, "key,value", rows)
    return (f"sifted_hz={point.sifted_hz:.6g} secret_hz={point.secret_hz:.6g} "
            f"qber={point.qber:.6g} max_km={reach:.6g}")


def _run_qkd_curve(cfg: RunConfig, rng) -> str:
    p = cfg.params
    params = _link_params(p, skip=("length_km",))
    points = qkdsim.rate_curve(params, p["l_max_km"], p["step_km"])
    reach = qkdsim.max_distance(params, p["threshold"])
    if cfg.out:
        qkdsim.write_rate_curve(points, cfg.out)
    _maybe_plot(cfg, lambda plots: plots.rate_curve_figure(points))
    return f"points={len(points)} max_km={reach:.6g}"


def _run_qkd_mc(cfg: RunConfig, rng) -> str:
    p = cfg.params
    params = _link_params(p)
    record = qkdsim.bb84_montecarlo(params, cfg.shots, p["source"],
                                    p["eve_fraction"], rng, cfg.workers)
    record.seed = cfg.seed
    if cfg.out:
        qkdsim.write_record(record, cfg.out)
    return (f"source={p['source']} sifted_bits={record.sifted_bits} "
            f"qber={record.qber:.6g}")


def _run_ekert(cfg: RunConfig, rng) -> str:
    p = cfg.params
    params = _link_params(p)
    record = qkdsim.ekert_montecarlo(params, cfg.shots, p["eve_fraction"],
                                     rng, cfg.workers)
    record.seed = cfg.seed
    if cfg.out:
        qkdsim.write_record(record, cfg.out)
    s_text = "nan" if record.s_value is None else f"{record.s_value:.6g}"
    return (f"sifted_bits={record.sifted_bits} qber={record.qber:.6g} "
            f"S={s_text}")


def _run_secret_share(cfg: RunConfig, rng) -> str:
    record = qkdsim.secret_sharing_ghz(cfg.shots, rng, cfg.workers)
    record.seed = cfg.seed
    if cfg.out:
        qkdsim.write_record(record, cfg.out)
    return f"sifted_bits={record.sifted_bits} qber={record.qber:.6g}"


# ---------------------------------------------------------------------------
# experiment table

EXPERIMENTS: dict[str, _Experiment] = {
    "chsh": _Experiment(
        "CHSH Bell-inequality value, exact or sampled",
        {**_STATE_OPTS,
         "settings": _Opt(str, "optimal", "analyzer settings",
                          choices=("canonical", "optimal")),
         "eta": _Opt(float, 1.0, "detector efficiency for sampling"),
         "p_dark": _Opt(float, 0.0, "dark-count probability for sampling")},
        _run_chsh, shots_default=0, shots_help="coincidences per setting pair"),
    "mermin": _Experiment(
        "three-party Mermin combination on a GHZ state",
        {"patterns": _Opt(str, "", "override the two superposed patterns, e.g. 000,111")},
        _run_mermin),
    "ghz-profile": _Experiment(
        "all-analyzers-diagonal coincidence profile of a GHZ state",
        {"n": _Opt(int, 3, "number of qubits"),
         "patterns": _Opt(str, "", "override the two superposed patterns")},
        _run_ghz_profile, plot=True, shots_default=0,
        shots_help="sampled coincidences"),
    "efficiency-threshold": _Experiment(
        "critical detection efficiency for closing the fair-sampling loophole",
        {"alpha": _Opt(float, None, "single state amplitude to evaluate"),
         "alphas": _Opt(str, "", "comma list of amplitudes"),
         "tol": _Opt(float, 1e-4, "bisection tolerance")},
        _run_efficiency_threshold, plot=True),
    "speed-bound": _Experiment(
        "lower bound on the speed of any hypothetical influence",
        {"separation_m": _Opt(float, 1.0e4, "detector separation"),
         "timing_s": _Opt(float, 5.0e-12, "timing uncertainty")},
        _run_speed_bound),
    "bsm": _Experiment(
        "Bell-state analyzer outcome distribution",
        {**_STATE_OPTS,
         "mode": _Opt(str, "full", "analyzer type", choices=("full", "partial"))},
        _run_bsm, plot=True, shots_default=0, shots_help="sampled outcomes"),
    "teleport": _Experiment(
        "single-qubit teleportation branch table",
        {"theta": _Opt(float, 0.6, "input Bloch polar angle"),
         "phi": _Opt(float, 0.3, "input Bloch azimuth"),
         "resource": _Opt(str, "psi-minus", "resource pair",
                          choices=tuple(k.value for k in BellKind)),
         "bsm": _Opt(str, "full", "analyzer type", choices=("full", "partial")),
         "no_correction": _Opt(_parse_bool, False,
                               "skip Bob's conditional correction", flag=True)},
        _run_teleport, shots_default=0, shots_help="sampled rounds"),
    "dense": _Experiment(
        "dense-coding round trip",
        {"message": _Opt(str, "10", "two bits to send"),
         "resource": _Opt(str, "phi-plus", "resource pair",
                          choices=tuple(k.value for k in BellKind)),
         "bsm": _Opt(str, "full", "analyzer type", choices=("full", "partial"))},
        _run_dense),
    "swap": _Experiment(
        "entanglement swapping of two source pairs",
        {"visibility": _Opt(float, 1.0, "visibility of both input Werner pairs")},
        _run_swap),
    "tomo": _Experiment(
        "two-qubit state tomography from simulated counts",
        {**_STATE_OPTS,
         "method": _Opt(str, "mle", "reconstruction method",
                        choices=("mle", "linear"))},
        _run_tomo, plot=True, shots_default=10_000,
        shots_help="counts per analyzer setting"),
    "distill": _Experiment(
        "local-filtering distillation revealing hidden nonlocality",
        {"weight": _Opt(float, distill.HIDDEN_FAMILY_WEIGHT, "mixing weight"),
         "alpha": _Opt(float, distill.HIDDEN_FAMILY_ALPHA, "pure-part amplitude"),
         "grid": _Opt(int, 40, "filter grid resolution")},
        _run_distill, plot=True),
    "qkd-rate": _Experiment(
        "analytic key rate and error rate at one link length",
        {**_LINK_OPTS, "threshold": _Opt(float, 0.15, "QBER limit for the reach")},
        _run_qkd_rate),
    "qkd-curve": _Experiment(
        "rate/QBER curve over link length",
        {**{k: v for k, v in _LINK_OPTS.items() if k != "length_km"},
         "l_max_km": _Opt(float, 160.0, "last length on the curve"),
         "step_km": _Opt(float, 1.0, "length step"),
         "threshold": _Opt(float, 0.15, "QBER limit for the reach")},
        _run_qkd_curve, plot=True),
    "qkd-mc": _Experiment(
        "Monte Carlo BB84-style key exchange",
        {**_LINK_OPTS,
         "source": _Opt(str, "faint", "photon source",
                        choices=("faint", "pair-triggered", "entangled")),
         "eve_fraction": _Opt(float, 0.0, "fraction of intercepted pulses")},
        _run_qkd_mc, shots_default=200_000, shots_help="pulses to simulate"),
    "ekert": _Experiment(
        "Monte Carlo entanglement-based exchange with a Bell-test subset",
        {**_LINK_OPTS,
         "eve_fraction": _Opt(float, 0.0, "fraction of intercepted pairs")},
        _run_ekert, shots_default=200_000, shots_help="pulses to simulate"),
    "secret-share": _Experiment(
        "three-party GHZ secret sharing",
        {}, _run_secret_share, shots_default=100_000,
        shots_help="triples to simulate"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entsim",
        description="photonic-entanglement experiment simulator")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, exp in EXPERIMENTS.items():
        sp = sub.add_parser(name, help=exp.help)
        sp.add_argument("--seed", type=int, default=None,
                        help="random seed (default 12345)")
        sp.add_argument("--out", default=None, help="delimited output file")
        sp.add_argument("--workers", type=int, default=None,
                        help="independent sampling streams (default 1)")
        sp.add_argument("--config", default=None,
                        help="key=value config file; flags take precedence")
        if exp.shots_default is not None:
            sp.add_argument("--shots", type=int, default=None,
                            help=f"{exp.shots_help} (default {exp.shots_default})")
        if exp.plot:
            sp.add_argument("--plot", action="store_true", default=None,
                            help="render a PNG next to --out")
        for key, opt in exp.options.items():
            flag = "--" + key.replace("_", "-")
            if opt.flag:
                sp.add_argument(flag, action="store_true", default=None,
                                help=opt.help)
            else:
                kwargs = {"type": opt.cast, "default": None, "help": opt.help}
                if opt.choices:
                    kwargs["choices"] = list(opt.choices)
                sp.add_argument(flag, **kwargs)
    return parser


def _read_config(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = text.partition("=")
            values[key.strip()] = value.strip()
    return values


def parse(argv=None) -> RunConfig:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    exp = EXPERIMENTS[ns.experiment]
    raw = vars(ns)

    common: dict[str, _Opt] = {
        "seed": _Opt(int, 12345, ""),
        "out": _Opt(str, None, ""),
        "workers": _Opt(int, 1, ""),
    }
    if exp.shots_default is not None:
        common["shots"] = _Opt(int, exp.shots_default, "")
    if exp.plot:
        common["plot"] = _Opt(_parse_bool, False, "", flag=True)
    allowed = {**exp.options, **common}

    file_cfg: dict[str, str] = {}
    if raw.get("config"):
        try:
            file_cfg = _read_config(raw["config"])
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        except ValueError as exc:
            parser.error(str(exc))
        unknown = sorted(set(file_cfg) - set(allowed))
        if unknown:
            parser.error(
                f"unknown config key(s) for {ns.experiment}: {', '.join(unknown)}")

    merged: dict = {}
    for key, opt in allowed.items():
        cli_value = raw.get(key)
        if cli_value is not None:
            merged[key] = cli_value
        elif key in file_cfg:
            try:
                value = opt.cast(file_cfg[key])
            except (TypeError, ValueError):
                parser.error(f"bad config value for {key}: {file_cfg[key]!r}")
            if opt.choices and value not in opt.choices:
                parser.error(f"config value for {key} must be one of {opt.choices}")
            merged[key] = value
        else:
            merged[key] = opt.default

    return RunConfig(
        experiment=ns.experiment,
        params={k: merged[k] for k in exp.options},
        seed=merged["seed"],
        shots=merged.get("shots"),
        out=merged["out"],
        workers=merged["workers"],
        plot=bool(merged.get("plot") or False),
    )


def run(cfg: RunConfig) -> int:
    if cfg.workers < 1:
        raise ValueError("workers must be positive")
    rng = np.random.default_rng(cfg.seed)
    headline = EXPERIMENTS[cfg.experiment].runner(cfg, rng)
    print(f"experiment={cfg.experiment} {headline} seed={cfg.seed}")
    return 0


def main(argv=None) -> int:
    cfg = parse(argv)
    try:
        return run(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
