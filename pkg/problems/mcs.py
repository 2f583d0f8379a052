"""UAV-aided sensing data collection: transmit-power allocation with an energy/delay trade-off.

Ground sensors upload to a UAV hovering over the field centre on orthogonal channels.
Sensor i transmitting at power p_i achieves the Shannon rate

    r_i = B * log2(1 + p_i * gain_i / noise)

so its upload takes S_i / r_i seconds and costs p_i * S_i / r_i joules. Delay falls and
energy rises with p_i, which is where the two objectives pull apart.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from config import McsSettings
from errors import InvalidArgumentError, InvalidConfigError
from evo_core import Bounds, nondominated_mask
from problems import Problem
from utils import array_hash, make_rng

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (np.sqrt(5.0) - 1.0) / 2.0
GOLDEN_TOL_W = 1e-9


class ObjectiveVector(NamedTuple):
    delay_s: float
    energy_j: float


@dataclass(frozen=True, eq=False)
class McsInstance:
    n: int
    gain: np.ndarray
    data_bits: np.ndarray
    bandwidth_hz: float
    noise_w: float
    p_lo: float
    p_hi: float
    positions: Optional[np.ndarray] = None
    delay_mode: str = "sum"

    def __post_init__(self) -> None:
        if self.gain.shape != (self.n,) or self.data_bits.shape != (self.n,):
            raise InvalidConfigError("gain and data_bits must have one entry per sensor")
        if np.any(self.gain <= 0) or np.any(self.data_bits <= 0):
            raise InvalidConfigError("channel gains and payloads must be positive")
        if self.bandwidth_hz <= 0 or self.noise_w <= 0:
            raise InvalidConfigError("bandwidth and noise power must be positive")
        if not 0 < self.p_lo < self.p_hi:
            raise InvalidConfigError("power bounds must satisfy 0 < p_lo < p_hi", field="mcs.p_lo")
        if self.delay_mode not in ("sum", "max"):
            raise InvalidConfigError(f"unknown delay mode {self.delay_mode!r}", field="mcs.delay_mode")

    @property
    def snr_per_watt(self) -> np.ndarray:
        return self.gain / self.noise_w

    def key(self) -> str:
        digest = array_hash(
            self.gain,
            self.data_bits,
            np.array([self.bandwidth_hz, self.noise_w, self.p_lo, self.p_hi]),
        )
        return f"mcs-n{self.n}-{self.delay_mode}-{digest[:16]}"


def mcs_instance(settings: McsSettings, n: int, rng: np.random.Generator) -> McsInstance:
    """Place n sensors uniformly in the square field under a UAV hovering at its centre."""
    if n < 1:
        raise InvalidConfigError("sensor count must be positive", field="n")
    for name in ("field_m", "altitude_m", "g0", "alpha", "bandwidth_hz", "noise_w", "data_bits", "p_lo", "p_hi"):
        if getattr(settings, name) <= 0:
            raise InvalidConfigError(f"mcs.{name} must be positive", field=f"mcs.{name}")
    positions = rng.uniform(0.0, settings.field_m, size=(n, 2))
    centre = settings.field_m / 2.0
    horizontal = np.hypot(positions[:, 0] - centre, positions[:, 1] - centre)
    dist = np.sqrt(horizontal ** 2 + settings.altitude_m ** 2)
    gain = settings.g0 / dist ** settings.alpha
    return McsInstance(
        n=n,
        gain=gain,
        data_bits=np.full(n, float(settings.data_bits)),
        bandwidth_hz=float(settings.bandwidth_hz),
        noise_w=float(settings.noise_w),
        p_lo=float(settings.p_lo),
        p_hi=float(settings.p_hi),
        positions=positions,
        delay_mode=settings.delay_mode,
    )


def sensor_delay(inst: McsInstance, p: np.ndarray) -> np.ndarray:
    """Per-sensor upload time S_i / r_i in seconds (broadcasts over leading axes of p)."""
    rate = inst.bandwidth_hz * np.log2(1.0 + p * inst.snr_per_watt)
    return inst.data_bits / rate


def sensor_energy(inst: McsInstance, p: np.ndarray) -> np.ndarray:
    return p * sensor_delay(inst, p)


def mcs_evaluate(inst: McsInstance, p: np.ndarray) -> ObjectiveVector:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (inst.n,):
        raise InvalidArgumentError(f"power vector must have length {inst.n}, got shape {p.shape}")
    if np.any(p < inst.p_lo) or np.any(p > inst.p_hi):
        raise InvalidArgumentError("transmit power outside [p_lo, p_hi]")
    delays = sensor_delay(inst, p)
    delay = float(np.max(delays)) if inst.delay_mode == "max" else float(np.sum(delays))
    return ObjectiveVector(delay_s=delay, energy_j=float(np.sum(p * delays)))


# =============================================================================
# Reference front (scalarization oracle)
# =============================================================================

def _golden_section(objective, lo: np.ndarray, hi: np.ndarray, tol: float) -> np.ndarray:
    """Elementwise golden-section minimisation of a unimodal function over [lo, hi]."""
    a = lo.copy()
    b = hi.copy()
    c = b - GOLDEN_RATIO * (b - a)
    d = a + GOLDEN_RATIO * (b - a)
    fc = objective(c)
    fd = objective(d)
    while np.max(b - a) > tol:
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = b - GOLDEN_RATIO * (b - a)
        d_new = a + GOLDEN_RATIO * (b - a)
        c, d = c_new, d_new
        fc = objective(c)
        fd = objective(d)
    return (a + b) / 2.0


def scalarization_powers(inst: McsInstance, weights: int) -> np.ndarray:
    """Per-weight optimal power allocations, shape (weights, n).

    Weight w minimises w * energy/energy_range + (1 - w) * delay/delay_range. The sum
    objective separates per sensor, so every sensor is a 1-D problem.
    """
    if weights < 2:
        raise InvalidConfigError("reference front needs at least 2 weights", field="reference_points")
    lo = np.full(inst.n, inst.p_lo)
    hi = np.full(inst.n, inst.p_hi)
    energy_range = float(np.sum(sensor_energy(inst, hi)) - np.sum(sensor_energy(inst, lo)))
    delay_range = float(np.sum(sensor_delay(inst, lo)) - np.sum(sensor_delay(inst, hi)))
    w = np.linspace(0.0, 1.0, weights)[:, None]

    def phi(p: np.ndarray) -> np.ndarray:
        return w * sensor_energy(inst, p) / energy_range + (1.0 - w) * sensor_delay(inst, p) / delay_range

    shape = (weights, inst.n)
    best = _golden_section(phi, np.broadcast_to(lo, shape).copy(), np.broadcast_to(hi, shape).copy(), GOLDEN_TOL_W)
    # Endpoints beat the bracket midpoint whenever the optimum sits on a bound.
    candidates = np.stack([best, np.broadcast_to(lo, shape), np.broadcast_to(hi, shape)])
    values = np.stack([phi(cand) for cand in candidates])
    choice = np.argmin(values, axis=0)
    return np.take_along_axis(candidates, choice[None, ...], axis=0)[0]


def _max_delay_powers(inst: McsInstance, targets: int) -> np.ndarray:
    """Least power per sensor that meets each delay target; energy-minimal for that target."""
    t_min = float(np.max(sensor_delay(inst, np.full(inst.n, inst.p_hi))))
    t_max = float(np.max(sensor_delay(inst, np.full(inst.n, inst.p_lo))))
    T = np.linspace(t_min, t_max, targets)[:, None]
    needed = (np.exp2(inst.data_bits / (inst.bandwidth_hz * T)) - 1.0) / inst.snr_per_watt
    return np.clip(needed, inst.p_lo, inst.p_hi)


def mcs_reference_front(inst: McsInstance, weights: int) -> np.ndarray:
    """Non-dominated oracle front as an (m, 2) array of (delay_s, energy_j) rows."""
    if weights < 2:
        raise InvalidConfigError("reference front needs at least 2 weights", field="reference_points")
    if inst.delay_mode == "max":
        powers = _max_delay_powers(inst, weights)
    else:
        powers = scalarization_powers(inst, weights)
    points = np.array([tuple(mcs_evaluate(inst, p)) for p in powers])
    points = np.unique(points, axis=0)
    front = points[nondominated_mask(points)]
    logger.debug("Reference front for %s: %s of %s points non-dominated", inst.key(), front.shape[0], points.shape[0])
    return front


class McsProblem(Problem):
    name = "mcs"

    def __init__(self, instance: McsInstance):
        self.instance = instance
        self.n = instance.n
        self.bounds = Bounds.box(instance.n, instance.p_lo, instance.p_hi)

    @classmethod
    def from_settings(cls, settings: McsSettings, n: int) -> "McsProblem":
        return cls(mcs_instance(settings, n, make_rng(settings.instance_seed)))

    @property
    def objective_names(self) -> tuple:
        return ("delay_s", "energy_j")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.array(mcs_evaluate(self.instance, x))

    def reference_front(self, points: int) -> np.ndarray:
        return mcs_reference_front(self.instance, points)

    def instance_key(self) -> str:
        return self.instance.key()
