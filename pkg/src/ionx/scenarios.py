"""Named scenario presets and the runner that turns a config into CSV files.

Every scenario writes its CSVs plus ``manifest.txt`` (the effective config,
readable again with ``--config``) into the output directory.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import FluxSeries, line_source_waveform
from .config import RunConfig
from .csvio import write_csv
from .drive import DriveSignal, Square, Step
from .noise import noise_chain
from .solver import (SimulationResult, membrane_exit_flux, simulate, solve_equilibrium,
                     solve_steady)

log = logging.getLogger(__name__)

PRESETS: dict = {
    "equilibrium": {},
    "custom": {},
    "fig3": {"drive": "step(5.0)", "tau_end": "60.0"},
    "fig5": {"drive": "step(5.0)", "tau_end": "100.0", "sweep.v_sig": "1,3,5,7"},
    "fig6": {"drive": "square(5.0, 40.0, 0.5)", "tau_end": "120.0", "output_dt": "0.25"},
    "fig7": {"drive": "square(5.0, 40.0, 0.5)", "tau_end": "80.0", "output_dt": "0.1",
             "sweep.v_sig": "3,5,7,9"},
    "fig8": {"sweep.v_sig": "1,3,5,7"},
    "fig9": {"sweep.v_sig": "1,3,5,7"},
    "fig10": {"sweep.v_sig": "1,2,3,4,5,6,7,8,9"},
}

SCENARIOS = tuple(PRESETS)


class UnknownScenarioError(KeyError):
    def __str__(self):
        return f"unknown scenario {self.args[0]!r}; valid names: {', '.join(SCENARIOS)}"


def with_amplitude(sig: DriveSignal, v: float) -> DriveSignal:
    """Same waveform as ``sig`` with amplitude ``v`` (step and square drives)."""
    if isinstance(sig, Square):
        return Square(v, sig.period, sig.duty)
    if isinstance(sig, Step):
        return Step(v)
    raise ValueError(f"cannot sweep the amplitude of {sig}")


def _label(v: float) -> str:
    return f"{v:g}"


def write_profile(path, s, state):
    c = state.c
    rho = state.charge_density(s)
    rows = zip(state.grid.centers, c[0], c[1], state.phi, rho)
    write_csv(path, ["xi", "c1", "c2", "phi", "rho"], rows)


def write_series(path, res: SimulationResult):
    write_csv(path, ["tau", "J_exit", "I_total"], zip(res.taus, res.exit_flux, res.current))


def _transient(raw: dict, v: float | None = None) -> SimulationResult:
    cfg = RunConfig(raw)
    s, g = cfg.system_and_grid()
    sig = cfg.drive_signal() if v is None else with_amplitude(cfg.drive_signal(), v)
    eq = solve_equilibrium(s, g, cfg.settings())
    return simulate(s, g, cfg.mode(sig), cfg.get("tau_end"), cfg.settings(), initial=eq)


@dataclass(frozen=True)
class SteadyPoint:
    v_sig: float
    J: float
    c_i0: float


def steady_point(raw: dict, v: float) -> SteadyPoint:
    """Steady exit flux and mid-membrane cation concentration under a constant drive ``v``."""
    cfg = RunConfig(raw)
    s, g = cfg.system_and_grid()
    settings = cfg.settings()
    eq = solve_equilibrium(s, g, settings)
    st = solve_steady(s, g, cfg.mode(Step(v)), eq, settings)
    return SteadyPoint(v, membrane_exit_flux(s, g, st), float(st.c[0, g.mid_membrane()]))


def _map(cfg: RunConfig, fn, values):
    jobs = cfg.get("jobs")
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, [cfg.raw] * len(values), values))
    return [fn(cfg.raw, v) for v in values]


# -- scenarios ---------------------------------------------------------------

def _equilibrium(cfg, out):
    s, g = cfg.system_and_grid()
    eq = solve_equilibrium(s, g, cfg.settings())
    path = os.path.join(out, "profile_equilibrium.csv")
    write_profile(path, s, eq)
    return [path]


def _custom(cfg, out):
    res = _transient(cfg.raw)
    s, _ = cfg.system_and_grid()
    files = [os.path.join(out, "series.csv"), os.path.join(out, "profile_final.csv")]
    write_series(files[0], res)
    write_profile(files[1], s, res.states[-1])
    return files


def _fig3(cfg, out):
    s, g = cfg.system_and_grid()
    settings = cfg.settings()
    res = _transient(cfg.raw)
    files = [os.path.join(out, "series.csv")]
    write_series(files[0], res)
    for tau in (1.0, cfg.get("tau_end")):
        path = os.path.join(out, f"profile_tau{_label(tau)}.csv")
        write_profile(path, s, res.state_at(tau))
        files.append(path)
    steady = solve_steady(s, g, cfg.mode(), res.states[0], settings)
    path = os.path.join(out, "profile_steady.csv")
    write_profile(path, s, steady)
    return files + [path]


def _fig5(cfg, out):
    vs = cfg.get("sweep.v_sig")
    runs = _map(cfg, _transient, vs)
    header = ["tau"] + [f"J_V{_label(v)}" for v in vs]
    rows = zip(runs[0].taus, *(r.exit_flux for r in runs))
    path = os.path.join(out, "fig5_flux.csv")
    write_csv(path, header, rows)
    pts = _map(cfg, steady_point, vs)
    path2 = os.path.join(out, "fig5_steady.csv")
    write_csv(path2, ["v_sig", "J_steady"], ((p.v_sig, p.J) for p in pts))
    return [path, path2]


def _fig6(cfg, out):
    res = _transient(cfg.raw)
    path = os.path.join(out, "series.csv")
    write_series(path, res)
    return [path]


def _fig7(cfg, out):
    vs = cfg.get("sweep.v_sig")
    runs = _map(cfg, _transient, vs)
    ch = cfg.channel()
    files = []
    for v, res in zip(vs, runs):
        conc = line_source_waveform(FluxSeries(res.taus, res.exit_flux), ch)
        path = os.path.join(out, f"channel_V{_label(v)}.csv")
        write_csv(path, ["tau", "concentration"], zip(conc.taus, conc.values))
        files.append(path)
    return files


def _noise_for(cfg: RunConfig, omegas):
    s, g = cfg.system_and_grid()
    eq = solve_equilibrium(s, g, cfg.settings())
    b = cfg.scaling_basis()
    pts = _map(cfg, steady_point, cfg.get("sweep.v_sig"))
    results = [noise_chain(s, b, eq, p.J, omegas, c_i0=p.c_i0, bandwidth=cfg.get("noise.bandwidth"),
                           V0=cfg.get("noise.V0"), dc_coefficient=cfg.get("noise.dc_coefficient"),
                           thermal_model=cfg.get("noise.thermal_model")) for p in pts]
    return pts, results


def _spectra(cfg, out, prefix):
    pts, results = _noise_for(cfg, cfg.omegas())
    files = []
    for p, r in zip(pts, results):
        path = os.path.join(out, f"{prefix}_V{_label(p.v_sig)}.csv")
        rows = zip(r.SNR.omegas, r.S_thermal.psd, r.S_shot.psd, r.S_J.psd, r.SNR.psd, r.snr_db)
        comments = [f"dc_impulse_weight = {r.S_shot.dc_impulse_weight!r}",
                    f"J = {r.J!r}", f"c_i0 = {r.c_i0!r}", f"theta = {r.rc.theta!r}"]
        write_csv(path, ["omega", "S_thermal", "S_shot", "S_J_total", "SNR", "SNR_dB"], rows, comments)
        files.append(path)
    return files


def _fig8(cfg, out):
    return _spectra(cfg, out, "spectrum")


def _fig9(cfg, out):
    return _spectra(cfg, out, "snr")


def _fig10(cfg, out):
    pts, results = _noise_for(cfg, np.array([0.0]))
    path = os.path.join(out, "snr_vs_vsig.csv")
    rows = ((p.v_sig, p.J, p.c_i0, r.SNR.psd[0], r.snr_db[0]) for p, r in zip(pts, results))
    write_csv(path, ["v_sig", "J_steady", "c_i0", "SNR_0", "SNR_0_dB"], rows)
    return [path]


_RUNNERS = {"equilibrium": _equilibrium, "custom": _custom, "fig3": _fig3, "fig5": _fig5,
            "fig6": _fig6, "fig7": _fig7, "fig8": _fig8, "fig9": _fig9, "fig10": _fig10}


def scenario_config(name: str, *layers: dict) -> RunConfig:
    """Defaults, then the scenario preset, then ``layers`` in order."""
    if name not in PRESETS:
        raise UnknownScenarioError(name)
    return RunConfig.resolve(PRESETS[name], *layers, {"scenario": name})


def run_scenario(name: str, out_dir, *layers: dict) -> list[str]:
    """Run scenario ``name`` and return the paths written (manifest last)."""
    cfg = scenario_config(name, *layers)
    os.makedirs(out_dir, exist_ok=True)
    log.info("running scenario %s into %s", name, out_dir)
    files = _RUNNERS[name](cfg, out_dir)
    manifest = os.path.join(out_dir, "manifest.txt")
    with open(manifest, "w", newline="\n") as fh:
        fh.write(cfg.manifest_text())
        for f in files:
            fh.write(f"# output: {os.path.basename(f)}\n")
    return files + [manifest]
