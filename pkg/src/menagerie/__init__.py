"""Tetrapod skeleton toolkit: pose library, LLM pose adaptation, balloon
meshes, camera-conditioned rendering, and diffusion-guidance scheduling."""

__version__ = "0.1.0"
