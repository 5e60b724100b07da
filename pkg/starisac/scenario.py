"""
Scenario generation for the STAR-RIS MU-MIMO ISAC system.

Builds node geometry and one channel realization per seed. Every channel is
carried noise-normalized (divided by the noise standard deviation) so the
noise power never reappears downstream.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from typing_extensions import TypeAlias

from .logger import logger
from .validation import ConfigError, DomainError, ValidationUtils

ComplexMatrix: TypeAlias = np.ndarray
Position: TypeAlias = Tuple[float, float, float]

# Order of independent random streams spawned from one seed.
_STREAMS = ("positions", "h_bk", "h_bs", "h_sk", "g_si")

# Field order of the binary channel dump
_DUMP_FIELDS = ("h_bs", "h_bk", "h_sk", "v_t", "v_r", "g_si")

VARIANTS = ("STAR", "cRIS", "NoRIS")


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class PathLossExponents:
    direct: float = 3.6
    bs_ris: float = 2.2
    ris_user: float = 2.4
    bs_target: float = 2.2


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Dimensional and physical parameters of one scenario.

    Powers and ratios are stored linear (watts, plain ratios); ``from_dict``
    accepts the dBm/dB spellings used in JSON files.
    """

    n_tx: int = 6
    n_rx: int = 4
    n_user_antennas: int = 2
    n_ris_elements: int = 100
    n_users: int = 4
    n_targets: int = 2
    p_max: float = dbm_to_watts(10.0)
    sensing_sinr_threshold: float = db_to_linear(5.0)
    mean_rcs: float = 0.5
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 10e6
    rician_factor: float = db_to_linear(3.0)
    path_loss_exponents: PathLossExponents = field(default_factory=PathLossExponents)
    reflection_user_indices: Optional[Tuple[int, ...]] = None
    rng_seed: int = 0
    system_variant: str = "STAR"
    bs_position: Position = (0.0, 0.0, 5.0)
    ris_position: Position = (70.0, 10.0, 10.0)
    reflection_center: Position = (150.0, -20.0, 2.0)
    transmission_center: Position = (150.0, 40.0, 2.0)
    user_radius: float = 10.0
    target_azimuths_deg: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.reflection_user_indices is None:
            # Equal split between the two regions, extra user goes to reflection
            object.__setattr__(self, "reflection_user_indices",
                               tuple(range((self.n_users + 1) // 2)))
        else:
            object.__setattr__(self, "reflection_user_indices",
                               tuple(self.reflection_user_indices))

        problems = ValidationUtils.validate_config_dict(self._validation_view())
        if self.rician_factor < 0:
            problems.append(f"rician_factor must be >= 0, got {self.rician_factor!r}")
        if self.user_radius < 0:
            problems.append(f"user_radius must be >= 0, got {self.user_radius!r}")
        if self.target_azimuths_deg is not None and len(self.target_azimuths_deg) != self.n_targets:
            problems.append(
                f"target_azimuths_deg needs {self.n_targets} entries, got {len(self.target_azimuths_deg)}"
            )
        if problems:
            raise ConfigError("Invalid scenario configuration: " + "; ".join(problems))

    def _validation_view(self) -> Dict[str, Any]:
        view = {name: getattr(self, name) for name in (
            "n_tx", "n_rx", "n_user_antennas", "n_ris_elements", "n_users", "n_targets",
            "p_max", "sensing_sinr_threshold", "mean_rcs", "system_variant",
            "reflection_user_indices",
        )}
        view["noise_power"] = self.noise_power
        return view

    @property
    def noise_power(self) -> float:
        """Noise power in watts from the PSD and bandwidth."""
        return dbm_to_watts(self.noise_psd_dbm_hz + 10.0 * math.log10(self.bandwidth_hz))

    @property
    def p_max_dbm(self) -> float:
        return watts_to_dbm(self.p_max)

    @property
    def sensing_sinr_db(self) -> float:
        return linear_to_db(self.sensing_sinr_threshold) if self.sensing_sinr_threshold > 0 else -math.inf

    @property
    def sensing_threshold_nats(self) -> float:
        return math.log1p(self.sensing_sinr_threshold)

    @property
    def reflection_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_users, dtype=bool)
        mask[list(self.reflection_user_indices)] = True
        return mask

    def with_updates(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        """
        Build a config from a JSON-style mapping.

        Args:
            data: ScenarioConfig field names; ``p_max_dbm``, ``sensing_sinr_db``
                  and ``rician_factor_db`` are accepted in place of the linear fields

        Returns:
            ScenarioConfig: Validated configuration

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        if not isinstance(data, dict):
            raise ConfigError(f"Scenario configuration must be an object, got {type(data).__name__}")
        data = dict(data)

        conversions = {
            "p_max_dbm": ("p_max", dbm_to_watts),
            "sensing_sinr_db": ("sensing_sinr_threshold", db_to_linear),
            "rician_factor_db": ("rician_factor", db_to_linear),
        }
        for key, (target, convert) in conversions.items():
            if key in data:
                if target in data:
                    raise ConfigError(f"Give either {key} or {target}, not both")
                try:
                    data[target] = convert(float(data.pop(key)))
                except (TypeError, ValueError) as e:
                    raise ConfigError(f"{key} must be a number: {e}") from e

        if "path_loss_exponents" in data:
            exponents = data["path_loss_exponents"]
            if isinstance(exponents, dict):
                try:
                    data["path_loss_exponents"] = PathLossExponents(**exponents)
                except TypeError as e:
                    raise ConfigError(f"Invalid path_loss_exponents: {e}") from e

        for key in ("bs_position", "ris_position", "reflection_center", "transmission_center"):
            if key in data:
                value = tuple(float(v) for v in data[key])
                if len(value) != 3:
                    raise ConfigError(f"{key} must have 3 coordinates, got {len(value)}")
                data[key] = value
        for key in ("reflection_user_indices", "target_azimuths_deg"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])

        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown scenario configuration keys: {unknown}")

        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data


def load_scenario_config(path: Union[str, Path]) -> ScenarioConfig:
    """
    Read a scenario configuration JSON file.

    The document is either a flat ScenarioConfig mapping or an object with a
    ``"scenario"`` section; a ``"solver"`` section is ignored here.
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"Could not read configuration {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration {path} is not valid JSON: {e}") from e

    if isinstance(document, dict) and "scenario" in document:
        section = document["scenario"]
    elif isinstance(document, dict):
        section = {k: v for k, v in document.items() if k != "solver"}
    else:
        raise ConfigError(f"Configuration {path} must contain a JSON object")

    config = ScenarioConfig.from_dict(section)
    logger.debug(f"Loaded scenario configuration from {path}")
    return config


@dataclass(frozen=True)
class ScenarioGeometry:
    bs_position: np.ndarray
    ris_position: np.ndarray
    user_positions: np.ndarray
    target_distances: np.ndarray
    target_azimuths: np.ndarray


@dataclass(frozen=True)
class ChannelSet:
    """
    One noise-normalized channel realization.

    Shapes: h_bs (N_S, N_T), h_bk (K, N_U, N_T), h_sk (K, N_U, N_S),
    v_t (L, N_T), v_r (L, N_R), g_si (N_R, N_T). Arrays are read-only.
    """

    h_bs: ComplexMatrix
    h_bk: ComplexMatrix
    h_sk: ComplexMatrix
    v_t: ComplexMatrix
    v_r: ComplexMatrix
    g_si: ComplexMatrix
    reflection_users: Tuple[int, ...]

    def __post_init__(self):
        for name in _DUMP_FIELDS:
            array = np.array(getattr(self, name), dtype=complex)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        object.__setattr__(self, "reflection_users", tuple(int(k) for k in self.reflection_users))

    @property
    def n_tx(self) -> int:
        return self.h_bk.shape[2]

    @property
    def n_rx(self) -> int:
        return self.v_r.shape[1]

    @property
    def n_user_antennas(self) -> int:
        return self.h_bk.shape[1]

    @property
    def n_ris(self) -> int:
        return self.h_bs.shape[0]

    @property
    def n_users(self) -> int:
        return self.h_bk.shape[0]

    @property
    def n_targets(self) -> int:
        return self.v_t.shape[0]

    @property
    def reflection_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_users, dtype=bool)
        mask[list(self.reflection_users)] = True
        return mask

    @property
    def v_r_mats(self) -> np.ndarray:
        """Rank-1 echo matrices V_Rl = v_R(phi_l) v_T(phi_l), shape (L, N_R, N_T)."""
        return self.v_r[:, :, None] * self.v_t[:, None, :]

    def without_ris(self) -> "ChannelSet":
        return replace(self, h_bs=np.zeros_like(self.h_bs), h_sk=np.zeros_like(self.h_sk))

    def is_finite(self) -> bool:
        return ValidationUtils.is_finite(*(getattr(self, name) for name in _DUMP_FIELDS))


def path_loss_db(distance_m: float, exponent: float) -> float:
    """Path loss -30 - 10*exponent*log10(d) in dB."""
    distance = np.asarray(distance_m, dtype=float)
    if np.any(distance <= 0) or not np.all(np.isfinite(distance)):
        raise DomainError(f"Distance must be positive and finite, got {distance_m!r}")
    loss = -30.0 - 10.0 * exponent * np.log10(distance)
    return float(loss) if loss.ndim == 0 else loss


def steering_vector(azimuth: float, n: int) -> np.ndarray:
    """Half-wavelength ULA response: element m is exp(j*pi*m*sin(azimuth))."""
    if n < 0:
        raise DomainError(f"Array size must be non-negative, got {n}")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(azimuth))


def _stream(seed: int, name: str) -> np.random.Generator:
    children = np.random.SeedSequence(int(seed)).spawn(len(_STREAMS))
    return np.random.default_rng(children[_STREAMS.index(name)])


def _complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _bearing(origin: np.ndarray, peer: np.ndarray) -> float:
    """Azimuth of ``peer`` seen from ``origin`` in the horizontal plane."""
    delta = np.asarray(peer, dtype=float) - np.asarray(origin, dtype=float)
    return math.atan2(delta[1], delta[0])


def _rician(rng: np.random.Generator, los: np.ndarray, gain: float, kappa: float) -> np.ndarray:
    nlos = _complex_gaussian(rng, los.shape)
    return math.sqrt(gain) * (math.sqrt(kappa / (1.0 + kappa)) * los
                              + math.sqrt(1.0 / (1.0 + kappa)) * nlos)


def build_geometry(config: ScenarioConfig, seed: int) -> ScenarioGeometry:
    """
    Place users uniformly over their region disks and targets on fixed bearings.

    Users in the reflection set sit around ``reflection_center``, the others
    around ``transmission_center``; z stays at the center height.
    """
    rng = _stream(seed, "positions")
    mask = config.reflection_mask

    centers = np.where(mask[:, None],
                       np.asarray(config.reflection_center, dtype=float),
                       np.asarray(config.transmission_center, dtype=float))
    radius = config.user_radius * np.sqrt(rng.uniform(size=config.n_users))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=config.n_users)
    offsets = np.stack([radius * np.cos(angle), radius * np.sin(angle),
                        np.zeros(config.n_users)], axis=1)

    index = np.arange(1, config.n_targets + 1)
    if config.target_azimuths_deg is not None:
        azimuths = np.deg2rad(np.asarray(config.target_azimuths_deg, dtype=float))
    else:
        azimuths = np.deg2rad(20.0 * index)

    return ScenarioGeometry(
        bs_position=np.asarray(config.bs_position, dtype=float),
        ris_position=np.asarray(config.ris_position, dtype=float),
        user_positions=centers + offsets,
        target_distances=10.0 + 5.0 * index,
        target_azimuths=azimuths,
    )


def generate_channels(config: ScenarioConfig, geometry: Optional[ScenarioGeometry] = None,
                      seed: Optional[int] = None) -> ChannelSet:
    """
    Draw one channel realization.

    Args:
        config: Scenario parameters
        geometry: Node placement; built from ``seed`` when omitted
        seed: Realization seed, defaults to ``config.rng_seed``

    Returns:
        ChannelSet: Noise-normalized channels; H_BS and H_Sk are zero for NoRIS
    """
    seed = config.rng_seed if seed is None else seed
    geometry = build_geometry(config, seed) if geometry is None else geometry

    sigma2 = config.noise_power
    sigma = math.sqrt(sigma2)
    kappa = config.rician_factor
    exponents = config.path_loss_exponents
    n_t, n_r, n_u, n_s = config.n_tx, config.n_rx, config.n_user_antennas, config.n_ris_elements
    bs, ris = geometry.bs_position, geometry.ris_position

    # BS -> users, Rayleigh
    bs_user_dist = np.linalg.norm(geometry.user_positions - bs, axis=1)
    direct_gain = db_to_linear(np.asarray(path_loss_db(bs_user_dist, exponents.direct)))
    h_bk = (np.sqrt(direct_gain)[:, None, None]
            * _complex_gaussian(_stream(seed, "h_bk"), (config.n_users, n_u, n_t)))

    # BS -> RIS, Rician with ULA line-of-sight
    bs_ris_gain = db_to_linear(path_loss_db(np.linalg.norm(ris - bs), exponents.bs_ris))
    los_bs = np.outer(steering_vector(_bearing(ris, bs), n_s),
                      steering_vector(_bearing(bs, ris), n_t).conj())
    h_bs = _rician(_stream(seed, "h_bs"), los_bs, bs_ris_gain, kappa)

    # RIS -> users, Rician
    rng_sk = _stream(seed, "h_sk")
    h_sk = np.empty((config.n_users, n_u, n_s), dtype=complex)
    for k, position in enumerate(geometry.user_positions):
        gain = db_to_linear(path_loss_db(np.linalg.norm(position - ris), exponents.ris_user))
        los = np.outer(steering_vector(_bearing(position, ris), n_u),
                       steering_vector(_bearing(ris, position), n_s).conj())
        h_sk[k] = _rician(rng_sk, los, gain, kappa)

    # BS -> targets, line-of-sight steering rows
    target_gain = db_to_linear(np.asarray(path_loss_db(geometry.target_distances, exponents.bs_target)))
    v_t = np.stack([math.sqrt(g) * steering_vector(az, n_t)
                    for g, az in zip(target_gain, geometry.target_azimuths)])
    v_r = np.stack([steering_vector(az, n_r) for az in geometry.target_azimuths])

    g_si = _complex_gaussian(_stream(seed, "g_si"), (n_r, n_t), variance=sigma2)

    if config.system_variant == "NoRIS":
        h_bs = np.zeros_like(h_bs)
        h_sk = np.zeros_like(h_sk)

    channels = ChannelSet(
        h_bs=h_bs / sigma,
        h_bk=h_bk / sigma,
        h_sk=h_sk,
        v_t=v_t / sigma,
        v_r=v_r,
        g_si=g_si / sigma,
        reflection_users=config.reflection_user_indices,
    )
    logger.debug(f"Generated {config.system_variant} channels: N_T={n_t}, N_R={n_r}, "
                 f"N_U={n_u}, N_S={n_s}, K={config.n_users}, L={config.n_targets}",
                 extra={"seed": seed})
    return channels


def dump_channels(channels: ChannelSet, path: Union[str, Path]) -> Path:
    """Write the channels as row-major little-endian complex64 in a fixed field order."""
    path = Path(path)
    payload = b"".join(
        np.ascontiguousarray(getattr(channels, name), dtype="<c8").tobytes()
        for name in _DUMP_FIELDS
    )
    try:
        path.write_bytes(payload)
    except OSError as e:
        raise OSError(f"Could not write channel dump {path}: {e}") from e
    return path


def load_channels(path: Union[str, Path], config: ScenarioConfig) -> ChannelSet:
    """Read a channel dump written by ``dump_channels``; shapes come from ``config``."""
    path = Path(path)
    shapes = {
        "h_bs": (config.n_ris_elements, config.n_tx),
        "h_bk": (config.n_users, config.n_user_antennas, config.n_tx),
        "h_sk": (config.n_users, config.n_user_antennas, config.n_ris_elements),
        "v_t": (config.n_targets, config.n_tx),
        "v_r": (config.n_targets, config.n_rx),
        "g_si": (config.n_rx, config.n_tx),
    }
    data = np.frombuffer(path.read_bytes(), dtype="<c8")
    expected = sum(int(np.prod(shape)) for shape in shapes.values())
    if data.size != expected:
        raise ConfigError(f"Channel dump {path} holds {data.size} values, config implies {expected}")

    arrays, offset = {}, 0
    for name in _DUMP_FIELDS:
        count = int(np.prod(shapes[name]))
        arrays[name] = data[offset:offset + count].astype(complex).reshape(shapes[name])
        offset += count
    return ChannelSet(reflection_users=config.reflection_user_indices, **arrays)
