"""Guidance math for score-distillation training loops.

Implements the control/guidance scale schedules, square-root timestep
annealing, a DDPM noise schedule with w(t) = sigma_t^2 weighting, the SDS
gradient and RGB reconstruction loss, classifier-free guidance mixing, and
a desk-scale optimization demo over a direct pixel-grid asset (render,
encoder, and decoder are all the identity), driven by pluggable analytic
denoiser oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

import numpy as np

DDPM_STEPS = 1000
BETA_START = 1e-4
BETA_END = 0.02


class GuidanceError(Exception):
    pass


class StepOutOfRangeError(GuidanceError):
    pass


class ShapeMismatchError(GuidanceError):
    pass


class DivergenceError(GuidanceError):
    pass


@dataclass(frozen=True)
class ScheduleConfig:
    control_max: float = 1.0
    control_min: float = 0.2
    guidance_max: float = 100.0
    guidance_min: float = 50.0
    max_step: int = 10_000
    t_max: float = 0.98
    t_min: float = 0.4

    def __post_init__(self):
        if self.control_max < self.control_min:
            raise GuidanceError("control_max must be >= control_min")
        if self.guidance_max < self.guidance_min:
            raise GuidanceError("guidance_max must be >= guidance_min")
        if self.t_max < self.t_min:
            raise GuidanceError("t_max must be >= t_min")
        if not 0.0 < self.t_min <= 1.0 or not 0.0 < self.t_max <= 1.0:
            raise GuidanceError("timestep fractions must lie in (0, 1]")
        if self.max_step < 1:
            raise GuidanceError("max_step must be a positive integer")

    def to_dict(self) -> dict:
        return {
            "control_max": self.control_max,
            "control_min": self.control_min,
            "guidance_max": self.guidance_max,
            "guidance_min": self.guidance_min,
            "max_step": self.max_step,
            "t_max": self.t_max,
            "t_min": self.t_min,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ScheduleConfig":
        known = {f: doc[f] for f in cls.__dataclass_fields__ if f in doc}
        return cls(**known)


def _check_step(step: int, max_step: int) -> None:
    if not 0 <= step <= max_step:
        raise StepOutOfRangeError(f"step {step} outside [0, {max_step}]")


def control_scale(step: int, cfg: ScheduleConfig) -> float:
    """Cosine decay from control_max at step 0 to control_min at max_step."""
    _check_step(step, cfg.max_step)
    if step == cfg.max_step:
        return cfg.control_min  # cos(pi/2) is 0 analytically but not in floats
    return (
        math.cos(math.pi / 2.0 * step / cfg.max_step)
        * (cfg.control_max - cfg.control_min)
        + cfg.control_min
    )


def guidance_scale(step: int, cfg: ScheduleConfig) -> float:
    """Linear ramp from guidance_min at step 0 to guidance_max at max_step."""
    _check_step(step, cfg.max_step)
    return step / cfg.max_step * (cfg.guidance_max - cfg.guidance_min) + cfg.guidance_min


def anneal_timestep(iteration: int, cfg: ScheduleConfig) -> float:
    """Square-root annealing from t_max down to t_min."""
    _check_step(iteration, cfg.max_step)
    return cfg.t_max - (cfg.t_max - cfg.t_min) * math.sqrt(iteration / cfg.max_step)


@dataclass(frozen=True)
class NoiseSchedule:
    """Discrete DDPM schedule: cumulative signal alpha_bar and sigma per step."""

    alpha_bar: np.ndarray
    sigma: np.ndarray

    @classmethod
    def ddpm_linear(
        cls, steps: int = DDPM_STEPS, beta_start: float = BETA_START, beta_end: float = BETA_END
    ) -> "NoiseSchedule":
        beta = np.linspace(beta_start, beta_end, steps, dtype=np.float64)
        alpha_bar = np.cumprod(1.0 - beta)
        return cls(alpha_bar=alpha_bar, sigma=np.sqrt(1.0 - alpha_bar))

    @property
    def steps(self) -> int:
        return len(self.alpha_bar)

    def index_of(self, t: float) -> int:
        """Nearest discrete step for a timestep fraction t in (0, 1]."""
        if not 0.0 < t <= 1.0:
            raise StepOutOfRangeError(f"timestep fraction {t} outside (0, 1]")
        return int(round(t * (self.steps - 1)))

    def at(self, t: float) -> tuple[float, float]:
        """(alpha_bar, sigma) at the step nearest to fraction t."""
        i = self.index_of(t)
        return float(self.alpha_bar[i]), float(self.sigma[i])

    def weight(self, t: float) -> float:
        """w(t) = sigma_t^2."""
        return self.at(t)[1] ** 2


class DenoiserOracle(Protocol):
    """Noise-prediction contract: shape-preserving and deterministic."""

    def predict(
        self,
        z_t: np.ndarray,
        t: float,
        text: str,
        control: np.ndarray | None,
        control_scale: float,
        guidance_scale: float,
    ) -> np.ndarray: ...


@dataclass(frozen=True)
class ToyAsset:
    """Trainable pixel grid; rendering and latent encoding are the identity."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", np.asarray(self.pixels, dtype=np.float64))
        if not np.isfinite(self.pixels).all():
            raise GuidanceError("asset pixels must be finite")

    def render(self) -> np.ndarray:
        return self.pixels


def _require_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{what}: {a.shape} vs {b.shape}")


def noisy_latent(z: np.ndarray, noise: np.ndarray, t: float, sched: NoiseSchedule) -> np.ndarray:
    """Forward diffusion sample z_t = sqrt(alpha_bar) z + sigma * noise."""
    _require_same_shape(z, noise, "latent vs noise")
    alpha_bar, sigma = sched.at(t)
    return math.sqrt(alpha_bar) * z + sigma * noise


def denoised_estimate(
    z_t: np.ndarray, eps_hat: np.ndarray, t: float, sched: NoiseSchedule
) -> np.ndarray:
    """One-step estimate of the clean latent from a noise prediction."""
    _require_same_shape(z_t, eps_hat, "latent vs prediction")
    alpha_bar, sigma = sched.at(t)
    return (z_t - sigma * eps_hat) / math.sqrt(alpha_bar)


def sds_gradient(
    asset: ToyAsset,
    oracle: DenoiserOracle,
    noise: np.ndarray,
    t: float,
    sched: NoiseSchedule,
    prompt: str = "",
    control: np.ndarray | None = None,
    control_scale: float = 1.0,
    guidance_scale: float = 1.0,
) -> np.ndarray:
    """w(t) (eps_theta(z_t) - eps) with dz/d(pixels) = identity in the toy path."""
    z = asset.render()
    _require_same_shape(z, noise, "asset vs noise")
    z_t = noisy_latent(z, noise, t, sched)
    eps_hat = oracle.predict(z_t, t, prompt, control, control_scale, guidance_scale)
    _require_same_shape(eps_hat, noise, "prediction vs noise")
    return sched.weight(t) * (eps_hat - noise)


def rgb_loss(
    asset: ToyAsset,
    denoised_image: np.ndarray,
    t: float,
    sched: NoiseSchedule,
    lambda_rgb: float = 0.01,
) -> tuple[float, np.ndarray]:
    """lambda * w(t) * ||render - denoised||^2 with its analytic gradient."""
    if lambda_rgb < 0:
        raise GuidanceError("lambda_rgb must be >= 0")
    rendered = asset.render()
    _require_same_shape(rendered, denoised_image, "render vs denoised image")
    w = sched.weight(t)
    diff = rendered - denoised_image
    loss = lambda_rgb * w * float(np.sum(diff * diff))
    grad = 2.0 * lambda_rgb * w * diff
    return loss, grad


def cfg_combine(eps_cond: np.ndarray, eps_uncond: np.ndarray, scale: float) -> np.ndarray:
    """Classifier-free guidance extrapolation of the conditional prediction."""
    _require_same_shape(eps_cond, eps_uncond, "conditional vs unconditional")
    return eps_uncond + scale * (eps_cond - eps_uncond)


# --- analytic oracles --------------------------------------------------------


@dataclass(frozen=True)
class PerfectOracle:
    """Returns exactly the noise that was mixed in: zero SDS residual."""

    noise: np.ndarray

    def predict(self, z_t, t, text, control, control_scale, guidance_scale):
        return self.noise


@dataclass(frozen=True)
class ConstantOracle:
    """Ignores the latent entirely; useful for isolating schedule effects."""

    value: np.ndarray

    def predict(self, z_t, t, text, control, control_scale, guidance_scale):
        return np.broadcast_to(self.value, z_t.shape).copy()


@dataclass(frozen=True)
class LinearOracle:
    """eps_theta(z_t) = gain * z_t + bias, elementwise."""

    gain: np.ndarray
    bias: np.ndarray

    def predict(self, z_t, t, text, control, control_scale, guidance_scale):
        return self.gain * z_t + self.bias


@dataclass(frozen=True)
class TargetOracle:
    """Predicts the noise consistent with the clean latent being ``target``.

    The resulting one-step denoised estimate is exactly the target image,
    so SDS pulls the asset toward it.
    """

    target: np.ndarray
    sched: NoiseSchedule

    def predict(self, z_t, t, text, control, control_scale, guidance_scale):
        alpha_bar, sigma = self.sched.at(t)
        return (z_t - math.sqrt(alpha_bar) * self.target) / sigma


# --- toy optimization demo ---------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    t: float
    control_scale: float
    guidance_scale: float
    sds_norm: float
    rgb_loss: float

    def to_dict(self) -> dict:
        return {
            "iter": self.iteration,
            "t": self.t,
            "control_scale": self.control_scale,
            "guidance_scale": self.guidance_scale,
            "sds_norm": self.sds_norm,
            "rgb_loss": self.rgb_loss,
        }


@dataclass(frozen=True)
class ToyRunResult:
    asset: ToyAsset
    trace: tuple[TraceRow, ...]


DIVERGENCE_LIMIT = 1e6


def optimize_toy(
    oracle: DenoiserOracle,
    cfg: ScheduleConfig,
    iters: int,
    step_size: float = 0.5,
    seed: int = 0,
    shape: tuple[int, ...] = (16, 16),
    lambda_rgb: float = 0.01,
    prompt: str = "",
    control: np.ndarray | None = None,
    sched: NoiseSchedule | None = None,
    init: np.ndarray | None = None,
    use_adam: bool = False,
) -> ToyRunResult:
    """Run the single-sample SDS + RGB loop on a pixel grid.

    Each iteration anneals t, evaluates both schedules on the run's own
    horizon, draws one noise sample, and descends the combined gradient.
    Fully deterministic for a fixed seed.
    """
    if iters < 1:
        raise GuidanceError("iters must be >= 1")
    sched = sched or NoiseSchedule.ddpm_linear()
    run_cfg = replace(cfg, max_step=iters)
    rng = np.random.default_rng(seed)
    pixels = np.zeros(shape, dtype=np.float64) if init is None else np.asarray(init, dtype=np.float64).copy()

    adam_m = np.zeros_like(pixels)
    adam_v = np.zeros_like(pixels)
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    trace: list[TraceRow] = []
    for i in range(iters):
        if not np.isfinite(pixels).all():
            raise DivergenceError(f"diverged at iteration {i}: non-finite parameters")
        asset = ToyAsset(pixels)
        t = anneal_timestep(i, run_cfg)
        c_scale = control_scale(i, run_cfg)
        g_scale = guidance_scale(i, run_cfg)
        noise = rng.standard_normal(pixels.shape)

        g_sds = sds_gradient(
            asset, oracle, noise, t, sched, prompt, control, c_scale, g_scale
        )
        z_t = noisy_latent(pixels, noise, t, sched)
        eps_hat = oracle.predict(z_t, t, prompt, control, c_scale, g_scale)
        denoised = denoised_estimate(z_t, eps_hat, t, sched)
        loss_rgb, g_rgb = rgb_loss(asset, denoised, t, sched, lambda_rgb)
        if loss_rgb > DIVERGENCE_LIMIT:
            raise DivergenceError(f"diverged at iteration {i}: rgb loss {loss_rgb:.3e}")

        grad = g_sds + g_rgb
        if use_adam:
            adam_m = beta1 * adam_m + (1.0 - beta1) * grad
            adam_v = beta2 * adam_v + (1.0 - beta2) * grad * grad
            m_hat = adam_m / (1.0 - beta1 ** (i + 1))
            v_hat = adam_v / (1.0 - beta2 ** (i + 1))
            pixels = pixels - step_size * m_hat / (np.sqrt(v_hat) + eps)
        else:
            pixels = pixels - step_size * grad

        trace.append(
            TraceRow(i, t, c_scale, g_scale, float(np.linalg.norm(g_sds)), loss_rgb)
        )

    return ToyRunResult(ToyAsset(pixels), tuple(trace))
