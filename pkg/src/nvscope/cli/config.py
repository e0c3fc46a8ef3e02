"""Loading and validating experiment configs."""

from __future__ import annotations

import hashlib
import json
from importlib import resources

import jsonschema
import numpy as np

from ..constants import DEFAULT_CONSTANTS
from ..simulator import ReadoutModel, SimulationOptions
from ..spin import NuclearSpec, SpinSystem, dipolar_coupling

GEOMETRY_TOL = 1e-6  # kHz

SPECIES_GAMMA = {
    "1H": DEFAULT_CONSTANTS.gamma_H,
    "13C": DEFAULT_CONSTANTS.gamma_C13,
    "15N": DEFAULT_CONSTANTS.gamma_N15,
}


class ConfigError(ValueError):
    def __init__(self, message, path="/"):
        super().__init__(message)
        self.path = path


def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("schema.json").read_text())


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def load(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}")
    validate(cfg)
    return cfg


def validate(cfg) -> None:
    validator = jsonschema.Draft202012Validator(schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(cfg))
    if err is not None:
        raise ConfigError(err.message, _pointer(err.absolute_path))


def fingerprint(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def grid(spec: dict) -> np.ndarray:
    if "values" in spec:
        return np.asarray(spec["values"], dtype=float)
    return np.linspace(spec["start"], spec["stop"], spec["num"])


def _nucleus(k: int, spec: dict) -> NuclearSpec:
    gamma = spec.get("gamma_kHz_per_mT", SPECIES_GAMMA[spec.get("species", "1H")])
    label = spec.get("label", f"n{k}")
    if "r_nm" in spec:
        nuc = NuclearSpec.from_geometry(label, gamma, spec["r_nm"], spec["theta_deg"])
        if "A_par_kHz" in spec:
            d = max(abs(nuc.A_par - spec["A_par_kHz"]), abs(nuc.A_perp - spec["A_perp_kHz"]))
            if d > GEOMETRY_TOL:
                raise ConfigError(
                    f"hyperfine ({spec['A_par_kHz']}, {spec['A_perp_kHz']}) kHz inconsistent "
                    f"with geometry ({spec['r_nm']} nm, {spec['theta_deg']} deg), which gives "
                    f"({nuc.A_par}, {nuc.A_perp}) kHz", f"/system/nuclei/{k}")
        return nuc
    return NuclearSpec(label, gamma, spec["A_par_kHz"], spec["A_perp_kHz"])


def build_system(cfg: dict) -> SpinSystem:
    s = cfg["system"]
    nuclei = [_nucleus(k, n) for k, n in enumerate(s["nuclei"])]
    couplings = [(c["i"], c["j"], c["d_zz_kHz"]) for c in s.get("nn_couplings", [])]
    for k, (i, j, _) in enumerate(couplings):
        if i >= len(nuclei) or j >= len(nuclei) or i == j:
            raise ConfigError(f"invalid nuclear pair ({i}, {j})", f"/system/nn_couplings/{k}")
    contrast = s.get("contrast", 1.0)
    if "B0_mT" in s:
        return SpinSystem(s["B0_mT"], nuclei, couplings, contrast)
    return SpinSystem.from_larmor(s["f_H_MHz"], nuclei, couplings, contrast)


def build_readout(cfg: dict, seed=None) -> ReadoutModel:
    r = dict(cfg["system"].get("readout", {}))
    if seed is not None:
        r["seed"] = seed
    return ReadoutModel(r.get("mode", "ideal"), r.get("contrast", 1.0),
                        r.get("photons_per_read", 1000), r.get("seed", 0))


def build_options(cfg: dict) -> SimulationOptions:
    o = cfg["system"].get("options", {})
    return SimulationOptions(o.get("nuclear_depolarization", 0.0), o.get("nv_decay_time_us"),
                             o.get("mw_rabi_MHz"))
