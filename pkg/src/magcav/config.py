"""Physical parameters, named presets and derived quantities.

Unit convention: every frequency-like quantity (anisotropy constants,
couplings, decay rates, mode frequencies) is an angular frequency in rad/s
and enters the equations of motion directly; times are in seconds.  The
only dimensionful conversion sits in :func:`pump_amplitude`, where an
optical power in watts is turned into a drive amplitude in rad/s.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import warnings
from dataclasses import dataclass, replace

from .constants import C_LIGHT, GYRO_ELECTRON, GYRO_PROTON, HBAR


class UnknownPresetError(ValueError):
    pass


class InvalidRegimeError(ValueError):
    """Raised when derived oscillator frequencies come out non-positive."""


class LosslessCavityWarning(UserWarning):
    pass


ORDERS = ("zeroth", "first", "second")


@dataclass(frozen=True)
class SmmPreset:
    """Giant-spin and nuclear-bath parameters of one nanomagnet."""

    name: str
    spin: float            # S, total spin of the magnetic core
    d_axial: float         # axial anisotropy D, rad/s
    e_transverse: float    # transverse anisotropy E, rad/s
    alpha: float           # hyperfine flip-flop coupling, rad/s
    gamma: float           # hyperfine Ising coupling, rad/s
    beta_bath: float       # intra-bath XY coupling, rad/s
    delta_bath: float      # intra-bath Ising coupling, rad/s
    n_bath: int            # number of bath spins N (collective J = N/2)
    omega_fund: float      # fundamental cavity mode frequency, rad/s

    def __post_init__(self):
        if self.spin < 1:
            raise ValueError(f"spin must be >= 1, got {self.spin}")
        if self.n_bath < 0:
            raise ValueError(f"n_bath must be >= 0, got {self.n_bath}")
        if self.d_axial <= 0:
            raise ValueError(f"d_axial must be > 0, got {self.d_axial}")
        if self.e_transverse < 0:
            raise ValueError(f"e_transverse must be >= 0, got {self.e_transverse}")

    @property
    def j_bath(self) -> float:
        """Collective bath spin J = N/2."""
        return self.n_bath / 2.0


@dataclass(frozen=True)
class CavityGeometry:
    """Fabry-Perot geometry; lengths in meters, reflectivities in (0, 1]."""

    length: float
    refractive_index: float
    reflectivity_1: float
    reflectivity_2: float
    mode_count: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("cavity length must be positive")
        if self.refractive_index < 1:
            raise ValueError("refractive index must be >= 1")
        if not (0 < self.reflectivity_2 <= self.reflectivity_1 <= 1):
            raise ValueError("need 0 < R2 <= R1 <= 1")
        if self.mode_count < 1:
            raise ValueError("mode_count must be >= 1")


@dataclass(frozen=True)
class DriveConfig:
    """Multi-mode pump settings.

    power is per mode, in watts.  pump_frequencies defaults to resonant
    driving (one pump per cavity mode at the mode frequency).  amplitudes,
    when given, override the power formula entirely.
    """

    power: float = 0.0
    pump_frequencies: tuple[float, ...] | None = None
    amplitudes: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("drive power must be >= 0")


@dataclass(frozen=True)
class PhysicalConfig:
    """All physical constants of one simulation scenario."""

    preset: SmmPreset
    geometry: CavityGeometry
    drive: DriveConfig
    b_field: float          # T
    gamma_s: float          # giant-spin damping rate, rad/s (covariance engine)
    gamma_b: float          # bath damping rate, rad/s
    kappa_s: float          # giant-spin pure dephasing rate, rad/s (density-matrix engine)
    kappa: float            # per-mode cavity decay rate, rad/s
    coupling_g: float       # giant-spin/photon coupling G, rad/s
    omega_e_override: float | None = None
    omega_b_override: float | None = None

    def __post_init__(self):
        for field in ("gamma_s", "gamma_b", "kappa_s", "kappa"):
            value = getattr(self, field)
            if value < 0 or not math.isfinite(value):
                raise ValueError(f"{field} must be a finite rate >= 0, got {value}")
        if self.b_field < 0:
            raise ValueError("b_field must be >= 0")

    # -- derived quantities -------------------------------------------------

    @property
    def spin(self) -> float:
        return self.preset.spin

    @property
    def j_bath(self) -> float:
        return self.preset.j_bath

    @property
    def self_kerr(self) -> float:
        """Self-Kerr constant of the giant spin (equals the axial anisotropy)."""
        return self.preset.d_axial

    @property
    def cross_kerr(self) -> float:
        """Cross-Kerr spin/bath constant (equals the Ising hyperfine coupling)."""
        return self.preset.gamma

    @property
    def mode_count(self) -> int:
        return self.geometry.mode_count

    @property
    def omega_e(self) -> float:
        if self.omega_e_override is not None:
            return self.omega_e_override
        return zeeman_frequencies(self.b_field)[0]

    @property
    def omega_b(self) -> float:
        if self.omega_b_override is not None:
            return self.omega_b_override
        return zeeman_frequencies(self.b_field)[1]

    def mode_frequencies(self) -> tuple[float, ...]:
        """Harmonics of the fundamental: omega_m = m * omega_fund."""
        return tuple(m * self.preset.omega_fund for m in range(1, self.mode_count + 1))

    def pump_frequencies(self) -> tuple[float, ...]:
        if self.drive.pump_frequencies is not None:
            freqs = self.drive.pump_frequencies
            if len(freqs) != self.mode_count:
                raise ValueError("pump_frequencies length must match mode_count")
            return freqs
        return self.mode_frequencies()

    def pump_amplitudes(self) -> tuple[float, ...]:
        if self.drive.amplitudes is not None:
            amps = self.drive.amplitudes
            if len(amps) != self.mode_count:
                raise ValueError("amplitudes length must match mode_count")
            return amps
        return tuple(
            pump_amplitude(self.drive.power, self.kappa, lam)
            for lam in self.pump_frequencies()
        )


# -- operations --------------------------------------------------------------


def zeeman_frequencies(b_field: float) -> tuple[float, float]:
    """Electron and proton Zeeman frequencies (rad/s) at a given field."""
    if b_field < 0:
        raise ValueError("b_field must be >= 0")
    return GYRO_ELECTRON * b_field, GYRO_PROTON * b_field


def derive_cavity(geometry: CavityGeometry) -> tuple[tuple[float, ...], float]:
    """Mode frequencies and common decay rate from the cavity geometry.

    omega_m = m pi c / (n_r L); the decay rate follows from the finesse
    relation and comes out as kappa = -c ln(R1 R2) / (4 n_r L), shared by
    all modes.  R1 R2 = 1 yields kappa = 0 and a lossless-cavity warning
    (no steady state exists then).
    """
    nl = geometry.refractive_index * geometry.length
    omega_1 = math.pi * C_LIGHT / nl
    freqs = tuple(m * omega_1 for m in range(1, geometry.mode_count + 1))
    rr = geometry.reflectivity_1 * geometry.reflectivity_2
    kappa = -C_LIGHT * math.log(rr) / (4.0 * nl)
    if kappa == 0.0:
        warnings.warn(
            "R1*R2 = 1: lossless cavity, kappa = 0 and no steady state exists",
            LosslessCavityWarning,
        )
    return freqs, kappa


def pump_amplitude(power: float, kappa: float, pump_frequency: float) -> float:
    """Drive amplitude (rad/s) for a pump of given power (W).

    The power enters as a photon flux power/hbar, which restores SI units;
    everything else is already an angular frequency.
    """
    if power < 0:
        raise ValueError("power must be >= 0")
    if pump_frequency <= 0:
        raise ZeroDivisionError("pump frequency must be positive")
    if power == 0:
        return 0.0
    if kappa <= 0:
        raise ValueError("kappa must be positive to drive the cavity")
    return math.sqrt(2.0 * (power / HBAR) * kappa / pump_frequency)


def hp_frequencies(cfg: PhysicalConfig, order: str) -> tuple[float, float | None]:
    """Oscillator frequencies of the bosonized giant spin and bath.

    zeroth order: Omega_s = 2 D S - omega_e, no bath oscillator.
    first/second order: Omega_s = 2 D S + gamma J - omega_e and
    Omega_n = gamma S + 2 beta J - 2 J delta - omega_b.
    Both must come out positive for the expansion to make sense.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")
    p = cfg.preset
    if order == "zeroth":
        omega_s = 2.0 * p.d_axial * p.spin - cfg.omega_e
        omega_n = None
    else:
        omega_s = 2.0 * p.d_axial * p.spin + p.gamma * p.j_bath - cfg.omega_e
        omega_n = (
            p.gamma * p.spin
            + 2.0 * p.beta_bath * p.j_bath
            - 2.0 * p.j_bath * p.delta_bath
            - cfg.omega_b
        )
    if not math.isfinite(omega_s) or omega_s <= 0:
        raise InvalidRegimeError(f"Omega_s = {omega_s} is not positive")
    if omega_n is not None and (not math.isfinite(omega_n) or omega_n <= 0):
        raise InvalidRegimeError(f"Omega_n = {omega_n} is not positive")
    return omega_s, omega_n


# -- presets -----------------------------------------------------------------

_FE8 = PhysicalConfig(
    preset=SmmPreset(
        name="Fe8",
        spin=10.0,
        d_axial=3.6e10,
        e_transverse=6.02e9,
        alpha=1.42e9,
        gamma=1.42e9,
        beta_bath=1e3,
        delta_bath=1e3,
        n_bath=50,
        omega_fund=6.75e11,
    ),
    geometry=CavityGeometry(
        length=1.05e-3,
        refractive_index=1.33,
        reflectivity_1=1.0,
        reflectivity_2=0.87,
        mode_count=6,
    ),
    drive=DriveConfig(power=1e-14),
    b_field=0.01,
    gamma_s=0.0,
    gamma_b=1e6,
    kappa_s=1e9,
    kappa=7.5e9,
    coupling_g=1e7,
)

_MN12 = PhysicalConfig(
    preset=SmmPreset(
        name="Mn12",
        spin=10.0,
        d_axial=8.64e10,
        e_transverse=0.0,
        alpha=1.42e9,
        gamma=1.42e9,
        beta_bath=1e3,
        delta_bath=1e3,
        n_bath=50,
        omega_fund=1.64e12,
    ),
    geometry=CavityGeometry(
        length=0.43e-3,
        refractive_index=1.33,
        reflectivity_1=1.0,
        reflectivity_2=0.94,
        mode_count=6,
    ),
    drive=DriveConfig(power=1e-14),
    b_field=0.01,
    gamma_s=0.0,
    gamma_b=1e6,
    kappa_s=1e9,
    kappa=7.5e9,
    coupling_g=1e7,
)

_PRESETS = {"fe8": _FE8, "mn12": _MN12}


def load_preset(name: str) -> PhysicalConfig:
    """Return the fully populated configuration of a named nanomagnet."""
    try:
        return _PRESETS[name.strip().lower()]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; available: {sorted(_PRESETS)}"
        ) from None


# -- overrides and file loading ----------------------------------------------

_INT_FIELDS = {"preset.n_bath", "geometry.mode_count"}
_TUPLE_FIELDS = {"drive.pump_frequencies", "drive.amplitudes"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _INT_FIELDS:
        return int(raw)
    if key in _TUPLE_FIELDS:
        if raw.lower() in ("", "none"):
            return None
        return tuple(float(tok) for tok in raw.split(","))
    if key == "preset.name":
        return raw
    if raw.lower() in ("none", ""):
        return None
    return float(raw)


def apply_overrides(cfg: PhysicalConfig, overrides: dict[str, str]) -> PhysicalConfig:
    """Apply dotted key=value overrides, e.g. {"preset.alpha": "3e9"}.

    Top-level keys (b_field, kappa, ...) take no dot prefix.  Values are
    parsed per field type; unknown keys raise KeyError.
    """
    groups: dict[str, dict] = {"preset": {}, "geometry": {}, "drive": {}, "": {}}
    for key, raw in overrides.items():
        section, _, field = key.partition(".")
        if not field:
            section, field = "", key
        if section not in groups:
            raise KeyError(f"unknown config section {section!r} in {key!r}")
        target = {"preset": cfg.preset, "geometry": cfg.geometry,
                  "drive": cfg.drive, "": cfg}[section]
        if field not in {f.name for f in dataclasses.fields(target)}:
            raise KeyError(f"unknown config key {key!r}")
        groups[section][field] = _parse_value(key if section else field, raw)

    preset = replace(cfg.preset, **groups["preset"]) if groups["preset"] else cfg.preset
    geometry = (
        replace(cfg.geometry, **groups["geometry"]) if groups["geometry"] else cfg.geometry
    )
    drive = replace(cfg.drive, **groups["drive"]) if groups["drive"] else cfg.drive
    return replace(cfg, preset=preset, geometry=geometry, drive=drive, **groups[""])


def load_config_file(path: str) -> PhysicalConfig:
    """Load a configuration from an INI-style file.

    The file starts from a named preset ([main] preset = fe8) and every
    other key overrides one field, mirroring the dataclass layout:

        [main]
        preset = fe8
        b_field = 0.02
        [preset]
        alpha = 3e9
        [geometry]
        mode_count = 2
        [drive]
        power = 1e-13
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)
    main = dict(parser["main"]) if parser.has_section("main") else {}
    preset_name = main.pop("preset", "fe8")
    cfg = load_preset(preset_name)
    overrides: dict[str, str] = dict(main)
    for section in ("preset", "geometry", "drive"):
        if parser.has_section(section):
            for field, raw in parser[section].items():
                overrides[f"{section}.{field}"] = raw
    return apply_overrides(cfg, overrides)


def config_as_dict(cfg: PhysicalConfig) -> dict:
    """Resolved configuration, including derived quantities, for sidecars."""
    as_dict = dataclasses.asdict(cfg)
    as_dict["derived"] = {
        "omega_e": cfg.omega_e,
        "omega_b": cfg.omega_b,
        "mode_frequencies": list(cfg.mode_frequencies()),
        "pump_amplitudes": list(cfg.pump_amplitudes()),
    }
    return as_dict
