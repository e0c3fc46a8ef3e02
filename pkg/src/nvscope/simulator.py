"""Density-matrix propagation of sensor + nuclei through pulse programs.

Element semantics
-----------------
* ``LaserInit``: sensor projected to m_S = 0, nuclear reduced state kept.
* ``MwPulse``: exact rotation of the sensor (instantaneous by default).
* ``Delay``: each sensor branch evolves under its own nuclear Hamiltonian;
  with ``dephase`` the sensor coherence is dropped as well.
* ``RfPulse``: rotating-wave drive on the nuclei.
* ``LaserRead``: reports P0 = <0| Tr_nuc rho |0>, then re-initialises.

The initial state is the sensor in m_S = 0 and fully mixed nuclei.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .constants import angular, khz_to_mhz
from .sequence.builders import (
    build_correlation,
    build_fid,
    build_polarization_transient,
    build_pulsepol,
    build_pulsepol_spectrum_point,
    build_rabi,
    build_xy16_readout,
)
from .sequence.ir import (
    HALF_PI,
    Block,
    Delay,
    LaserInit,
    LaserRead,
    MwPulse,
    PulseProgram,
    RfPulse,
)
from .spin import (
    PROJ0,
    PROJ1,
    SX,
    SY,
    Eigensystem,
    SpinSystem,
    branch_hamiltonian,
    nuclear_operators,
    total_iz,
)

_SENSOR_AXES = {"X": (1.0, 0.0), "Y": (0.0, 1.0), "-X": (-1.0, 0.0), "-Y": (0.0, -1.0)}


class SimulationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Readout and options
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReadoutModel:
    """How a LaserRead turns the sensor population into a reported value.

    ``mode`` is ``"ideal"`` (exact probability), ``"contrast"`` (P0 shrunk
    towards 1/2 by ``contrast``) or ``"shot_noise"`` (contrast plus binomial
    photon statistics with a counter-based generator keyed on ``seed`` and
    the sweep point index).
    """

    mode: str = "ideal"
    contrast: float = 1.0
    photons_per_read: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("ideal", "contrast", "shot_noise"):
            raise ValueError(f"unknown readout mode {self.mode!r}")
        if not 0.0 <= self.contrast <= 1.0:
            raise ValueError(f"contrast must lie in [0, 1], got {self.contrast}")

    def generator(self, point_index: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(np.random.SeedSequence([self.seed, point_index])))


IDEAL = ReadoutModel()


@dataclass(frozen=True)
class SimulationOptions:
    """Optional non-ideal effects, all off by default.

    nuclear_depolarization : probability per laser pulse that each nucleus is
        depolarised (models nuclear relaxation competing with transfer).
    nv_decay_time : us; the readout signal relaxes towards 1/2 as
        exp(-t / nv_decay_time) with t the time since the last initialisation.
    mw_rabi : MHz; finite-width microwave pulses with this Rabi frequency.
    """

    nuclear_depolarization: float = 0.0
    nv_decay_time: Optional[float] = None
    mw_rabi: Optional[float] = None


DEFAULT_OPTIONS = SimulationOptions()


@dataclass
class RunResult:
    p0: np.ndarray
    state: np.ndarray


@dataclass
class SweepResult:
    """P0 against one swept control variable.

    ``traces`` holds every readout of every point (rows follow ``axis_values``)
    when a program has several readouts; ``derived`` collects quantities
    extracted by the sweep (fitted frequencies, dip positions, ...).
    """

    axis_name: str
    axis_values: np.ndarray
    p0_values: np.ndarray
    traces: Optional[np.ndarray] = None
    derived: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

def initial_state(system: SpinSystem) -> np.ndarray:
    d = system.nuclear_dim
    return np.kron(PROJ0, np.eye(d, dtype=complex) / d)


def sensor_rotation(axis: str, angle: float) -> np.ndarray:
    cx, cy = _SENSOR_AXES[axis]
    gen = cx * 2 * SX + cy * 2 * SY
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * gen


class Engine:
    """Compiles programs into state maps for one spin system.

    Propagators are cached per duration, and repetition blocks whose body is
    unitary are collapsed into a single matrix power.
    """

    def __init__(self, system: SpinSystem, options: SimulationOptions = DEFAULT_OPTIONS):
        self.system = system
        self.options = options
        self.d = system.nuclear_dim
        self.D = 2 * self.d
        self.h0 = branch_hamiltonian(system, 0)
        self.h1 = branch_hamiltonian(system, -1)
        self.eig0 = Eigensystem(self.h0)
        self.eig1 = Eigensystem(self.h1)
        self.fz = total_iz(system.n_nuclei) if system.n_nuclei else np.zeros((1, 1), complex)
        self._delay_cache = {}
        self._pulse_cache = {}
        self._block_cache = {}

    # -- primitive unitaries -------------------------------------------------
    def delay_unitary(self, t: float) -> np.ndarray:
        u = self._delay_cache.get(t)
        if u is None:
            u = np.zeros((self.D, self.D), dtype=complex)
            u[:self.d, :self.d] = self.eig0.propagator(t)
            u[self.d:, self.d:] = self.eig1.propagator(t)
            self._delay_cache[t] = u
        return u

    def pulse_unitary(self, p: MwPulse) -> np.ndarray:
        key = (p.axis, p.angle)
        u = self._pulse_cache.get(key)
        if u is None:
            if self.options.mw_rabi is None:
                u = np.kron(sensor_rotation(p.axis, p.angle), np.eye(self.d))
            else:
                w = angular(self.options.mw_rabi)
                cx, cy = _SENSOR_AXES[p.axis]
                drive = w * np.kron(cx * SX + cy * SY, np.eye(self.d))
                h = np.kron(PROJ0, self.h0) + np.kron(PROJ1, self.h1) + drive
                u = Eigensystem(h).propagator(p.angle / w)
            self._pulse_cache[key] = u
        return u

    def pulse_duration(self, p: MwPulse) -> float:
        if self.options.mw_rabi is None:
            return 0.0
        return p.angle / angular(self.options.mw_rabi)

    def rf_branch_unitary(self, rf: RfPulse, branch: int) -> np.ndarray:
        sys_ = self.system
        h = self.h0 if branch == 0 else self.h1
        n = sys_.n_nuclei
        if n == 0:
            return np.eye(1, dtype=complex)
        ix, iy, _ = nuclear_operators(n)
        ref = sys_.nuclei[0].gamma
        drive = np.zeros_like(h)
        for j, nuc in enumerate(sys_.nuclei):
            w = angular(khz_to_mhz(rf.rabi)) * nuc.gamma / ref
            drive = drive + w * (math.cos(rf.phase) * ix[j] + math.sin(rf.phase) * iy[j])
        omega = angular(rf.frequency)
        if np.max(np.abs(h @ self.fz - self.fz @ h)) < 1e-9 * max(1.0, np.max(np.abs(h))):
            # exact in the frame rotating at the rf frequency
            u_rot = Eigensystem(h - omega * self.fz + drive).propagator(rf.duration)
            frame = Eigensystem(self.fz).propagator(omega * rf.duration)
            return frame @ u_rot
        # Hamiltonian does not conserve Fz: piecewise-constant lab-frame integration
        fmax = max(np.max(np.abs(np.linalg.eigvalsh(h))) / math.pi, rf.frequency, 1e-3)
        steps = max(1, int(math.ceil(rf.duration * fmax * 40)))
        dt = rf.duration / steps
        fz_eig = Eigensystem(self.fz)
        u = np.eye(h.shape[0], dtype=complex)
        for k in range(steps):
            t_mid = (k + 0.5) * dt
            rot = fz_eig.propagator(omega * t_mid)
            hk = h + rot @ drive @ rot.conj().T
            u = Eigensystem(hk).propagator(dt) @ u
        return u

    # -- compilation ---------------------------------------------------------
    def compile(self, elements, merge: bool = True) -> list:
        """Translate elements into ops ``(kind, payload, duration)``."""
        ops = []
        for e in elements:
            if isinstance(e, Block):
                ops.extend(self._compile_block(e, merge))
            elif isinstance(e, MwPulse):
                ops.append(("U", self.pulse_unitary(e), self.pulse_duration(e)))
            elif isinstance(e, Delay):
                if e.duration > 0 or not merge:
                    ops.append(("U", self.delay_unitary(e.duration), e.duration))
                if e.dephase:
                    ops.append(("dephase", None, 0.0))
            elif isinstance(e, RfPulse):
                ops.append(("rf", e, e.duration))
            elif isinstance(e, LaserInit):
                ops.append(("init", None, 0.0))
            elif isinstance(e, LaserRead):
                ops.append(("read", None, 0.0))
            else:
                raise SimulationError(f"unknown element {e!r}")
        return _merge(ops) if merge else ops

    def _compile_block(self, block: Block, merge: bool) -> list:
        if not merge:
            body = self.compile(block.body, merge=False)
            return body * block.count
        cached = self._block_cache.get(block)
        if cached is not None:
            return cached
        body = self.compile(block.body)
        if len(body) == 1 and body[0][0] == "U":
            u, dur = body[0][1], body[0][2]
            out = [("U", np.linalg.matrix_power(u, block.count), dur * block.count)]
        else:
            out = _merge(body * block.count)
        self._block_cache[block] = out
        return out

    # -- execution -----------------------------------------------------------
    def run(self, program, readout: ReadoutModel = IDEAL, point_index: int = 0,
            rho: Optional[np.ndarray] = None,
            observer: Optional[Callable] = None) -> RunResult:
        elements = program.elements if isinstance(program, PulseProgram) else program
        ops = self.compile(elements, merge=observer is None)
        rho = initial_state(self.system) if rho is None else rho.copy()
        d = self.d
        reads = []
        since_init = 0.0
        for kind, payload, dur in ops:
            if kind == "U":
                rho = payload @ rho @ payload.conj().T
            elif kind == "dephase":
                rho[:d, d:] = 0
                rho[d:, :d] = 0
            elif kind == "rf":
                rho = self._apply_rf(rho, payload)
            elif kind == "init":
                rho = self._reset(rho)
                since_init = 0.0
            elif kind == "read":
                p = float(np.real(np.trace(rho[:d, :d])))
                if self.options.nv_decay_time:
                    p = 0.5 + (p - 0.5) * math.exp(-since_init / self.options.nv_decay_time)
                reads.append(p)
                rho = self._reset(rho)
                since_init = 0.0
                dur = 0.0
            since_init += dur
            if observer is not None:
                observer(kind, rho)
        return RunResult(self._report(np.array(reads), readout, point_index), rho)

    def _apply_rf(self, rho, rf):
        d = self.d
        u0 = self.rf_branch_unitary(rf, 0)
        occupied = (np.max(np.abs(rho[d:, :])) > 1e-14) if rho.size else False
        u1 = self.rf_branch_unitary(rf, 1) if occupied else np.eye(d, dtype=complex)
        u = np.zeros((self.D, self.D), dtype=complex)
        u[:d, :d] = u0
        u[d:, d:] = u1
        return u @ rho @ u.conj().T

    def _reset(self, rho):
        d = self.d
        nuc = rho[:d, :d] + rho[d:, d:]
        p = self.options.nuclear_depolarization
        if p:
            nuc = _depolarize(nuc, self.system.n_nuclei, p)
        out = np.zeros_like(rho)
        out[:d, :d] = nuc
        return out

    def _report(self, p, readout: ReadoutModel, point_index: int) -> np.ndarray:
        if readout.mode == "ideal":
            c = self.system.contrast
            return 0.5 + c * (p - 0.5) if c != 1.0 else p
        c = readout.contrast * self.system.contrast
        q = 0.5 + c * (p - 0.5)
        if readout.mode == "contrast":
            return q
        rng = readout.generator(point_index)
        counts = rng.binomial(readout.photons_per_read, np.clip(q, 0.0, 1.0))
        return counts / readout.photons_per_read


def _merge(ops: list) -> list:
    out = []
    for op in ops:
        if op[0] == "U" and out and out[-1][0] == "U":
            prev = out[-1]
            out[-1] = ("U", op[1] @ prev[1], prev[2] + op[2])
        else:
            out.append(op)
    return out


def _depolarize(rho, n, p):
    ix, iy, iz = nuclear_operators(n)
    for j in range(n):
        paulis = (2 * ix[j], 2 * iy[j], 2 * iz[j])
        rho = (1 - 0.75 * p) * rho + 0.25 * p * sum(s @ rho @ s for s in paulis)
    return rho


def run_program(system: SpinSystem, program: PulseProgram, readout: ReadoutModel = IDEAL,
                options: SimulationOptions = DEFAULT_OPTIONS, point_index: int = 0) -> RunResult:
    """Propagate the initial state through ``program``; returns P0 per readout."""
    return Engine(system, options).run(program, readout, point_index)


def nuclear_state(rho: np.ndarray, system: SpinSystem) -> np.ndarray:
    d = system.nuclear_dim
    return rho[:d, :d] + rho[d:, d:]


def nuclear_polarization(rho: np.ndarray, system: SpinSystem) -> np.ndarray:
    """<Iz_j> for every nucleus."""
    nuc = nuclear_state(rho, system)
    return np.array([float(np.real(np.trace(op @ nuc)))
                     for op in nuclear_operators(system.n_nuclei)[2]])


# ---------------------------------------------------------------------------
# Sweep engine
# ---------------------------------------------------------------------------

def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        threads = int(os.environ.get("NVSCOPE_THREADS", "1") or 1)
    return max(1, int(threads))


def _sweep(system, programs, readout, options, threads) -> np.ndarray:
    """P0 traces for a list of programs; order follows the input."""
    threads = resolve_threads(threads)

    def one(args):
        k, prog = args
        return Engine(system, options).run(prog, readout, point_index=k).p0

    if threads == 1:
        engine = Engine(system, options)
        rows = [engine.run(p, readout, point_index=k).p0 for k, p in enumerate(programs)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, enumerate(programs)))
    return np.array(rows)


def sweep_tau(system: SpinSystem, n_pulses: int, tau_grid, readout: ReadoutModel = IDEAL,
              options: SimulationOptions = DEFAULT_OPTIONS, threads=None) -> SweepResult:
    """XY16-N NMR spectrum; the axis is (2 tau)^-1 in MHz, ascending."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(tau_grid <= 0):
        raise ValueError("tau grid must be positive")
    order = np.argsort(1.0 / (2 * tau_grid), kind="stable")
    taus = tau_grid[order]
    p0 = _sweep(system, [build_xy16_readout(n_pulses, float(t)) for t in taus],
                readout, options, threads)[:, 0]
    return SweepResult("freq_MHz", 1.0 / (2 * taus), p0, derived={"tau_us": taus})


def sweep_pulses(system: SpinSystem, tau: float, n_grid, readout: ReadoutModel = IDEAL,
                 options: SimulationOptions = DEFAULT_OPTIONS, threads=None,
                 fit: bool = True) -> SweepResult:
    """P0 against the number of XY16 pulses at fixed tau (coherent driving)."""
    from .analysis.fitting import FitError, fit_damped_sinusoid

    n_grid = np.asarray(n_grid, dtype=int)
    p0 = _sweep(system, [build_xy16_readout(int(n), tau) for n in n_grid],
                readout, options, threads)[:, 0]
    t = n_grid * tau
    res = SweepResult("n_pulses", n_grid, p0, derived={"t_us": t})
    if fit and len(n_grid) >= 8 and np.ptp(p0) > 1e-6:
        try:
            comp = fit_damped_sinusoid(p0, t[1] - t[0], 1, t0=t[0])
            res.derived["f_osc_kHz"] = comp.components[0].freq * 1e3
        except FitError:
            pass
    return res


def sweep_correlation(system: SpinSystem, tau: float, t_corr_grid, n: int = 32,
                      readout: ReadoutModel = IDEAL,
                      options: SimulationOptions = DEFAULT_OPTIONS, threads=None) -> SweepResult:
    """Correlation signal P0(t_corr); the grid must be uniform."""
    grid = np.asarray(t_corr_grid, dtype=float)
    steps = np.diff(grid)
    if len(grid) > 1 and np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
        raise ValueError("correlation grid must be uniform")
    p0 = _sweep(system, [build_correlation(tau, float(t), n) for t in grid],
                readout, options, threads)[:, 0]
    dt = float(steps[0]) if len(grid) > 1 else float("nan")
    return SweepResult("t_corr_us", grid, p0, derived={"sample_rate_MHz": 1.0 / dt, "tau_us": tau})


def sweep_b0(system: SpinSystem, b0_grid, nucleus: int = 0) -> np.ndarray:
    """Rows (B0, f0, f1, f_XY) in (mT, MHz, MHz, MHz) from the branch spectra.

    f_XY is the XY-N resonance (f0 + f1) / 2. Hyperfine constants stay
    fixed while the Larmor frequency scales with B0.
    """
    rows = []
    for b in np.asarray(b0_grid, dtype=float):
        f0, f1 = system.with_field(float(b)).branch_frequencies(nucleus)
        rows.append((b, f0, f1, 0.5 * (f0 + f1)))
    return np.array(rows)


def sweep_pulsepol(system: SpinSystem, period_grid, repeats: int = 20,
                   readout: ReadoutModel = IDEAL,
                   options: SimulationOptions = DEFAULT_OPTIONS, threads=None) -> SweepResult:
    """PulsePol spectrum. ``period_grid`` holds 2*tau_pol values (us).

    ``derived['f_dip_MHz']`` is 3 / (2 tau_pol) at the interpolated P0 minimum.
    """
    from .analysis.spectral import DipError, find_dip

    grid = np.sort(np.asarray(period_grid, dtype=float))
    p0 = _sweep(system, [build_pulsepol_spectrum_point(float(T) / 2, repeats) for T in grid],
                readout, options, threads)[:, 0]
    res = SweepResult("period_us", grid, p0)
    try:
        # work on the equivalent-frequency axis (ascending)
        eq = SweepResult("freq_MHz", (3.0 / grid)[::-1], p0[::-1])
        center, depth = find_dip(eq)
        res.derived.update(f_dip_MHz=center, dip_depth=depth)
    except DipError:
        pass
    return res


def pulsepol_polarization(system: SpinSystem, tau_pol: float, variant: str, repeats: int = 20,
                          options: SimulationOptions = DEFAULT_OPTIONS) -> np.ndarray:
    """Nuclear <Iz> after (Pol)^repeats from the fully mixed nuclear state."""
    rho = Engine(system, options).run(build_pulsepol(tau_pol, variant, repeats)).state
    return nuclear_polarization(rho, system)


def polarization_transient(system: SpinSystem, period: float, n_blocks: int = 20,
                           repeats: int = 20, readout: ReadoutModel = IDEAL,
                           options: SimulationOptions = DEFAULT_OPTIONS) -> SweepResult:
    """P0(n) after the n-th (PolY)^repeats; ``period`` is 2*tau_pol in us."""
    prog = build_polarization_transient(period / 2, n_blocks, repeats)
    p0 = Engine(system, options).run(prog, readout).p0
    return SweepResult("block", np.arange(1, n_blocks + 1), p0,
                       derived={"block_duration_us": repeats * period})


def simulate_rabi(system: SpinSystem, T_rf_grid, rf_freq: float, rabi: float, period: float,
                  polarize_reps: int = 10, repeats: int = 20, readout: ReadoutModel = IDEAL,
                  options: SimulationOptions = DEFAULT_OPTIONS, threads=None,
                  fit: bool = True) -> SweepResult:
    """Nuclear Rabi oscillation read out by the first (PolY)^20--L_RO block."""
    from .analysis.fitting import FitError, fit_damped_sinusoid

    grid = np.asarray(T_rf_grid, dtype=float)
    progs = [build_rabi(polarize_reps, float(T), rf_freq, rabi, period / 2, repeats) for T in grid]
    traces = _sweep(system, progs, readout, options, threads)
    res = SweepResult("T_rf_us", grid, traces[:, 0], traces=traces)
    if fit and len(grid) >= 8:
        try:
            comp = fit_damped_sinusoid(res.p0_values, grid[1] - grid[0], 1, t0=grid[0],
                                       decay=False)
            f = comp.components[0].freq * 1e3
            res.derived.update(rabi_kHz=f, T_half_pi_us=1e3 / (4 * f))
        except FitError:
            pass
    return res


def simulate_fid(system: SpinSystem, polarity: str, n_readouts: int, tau: float, t_L: float,
                 rf_freq: float, rabi: float, T_half_pi: float, period: float,
                 polarize_reps: int = 5, repeats: int = 20, readout: ReadoutModel = IDEAL,
                 options: SimulationOptions = DEFAULT_OPTIONS) -> SweepResult:
    """Undersampled free-precession trace, one readout every ``t_L``."""
    prog = build_fid(polarity, T_half_pi, n_readouts, tau, t_L, rf_freq, rabi, period / 2,
                     polarize_reps, repeats)
    p0 = Engine(system, options).run(prog, readout).p0
    return SweepResult("t_us", np.arange(n_readouts) * t_L, p0,
                       derived={"sample_rate_MHz": 1.0 / t_L, "polarity": polarity})


def simulate_fid_difference(system: SpinSystem, n_readouts: int, tau: float, t_L: float,
                            rf_freq: float, rabi: float, T_half_pi: float, period: float,
                            **kw) -> SweepResult:
    """PolY trace minus PolX trace."""
    y = simulate_fid(system, "PolY", n_readouts, tau, t_L, rf_freq, rabi, T_half_pi, period, **kw)
    x = simulate_fid(system, "PolX", n_readouts, tau, t_L, rf_freq, rabi, T_half_pi, period, **kw)
    return SweepResult("t_us", y.axis_values, y.p0_values - x.p0_values,
                       traces=np.vstack([y.p0_values, x.p0_values]),
                       derived={"sample_rate_MHz": 1.0 / t_L})
