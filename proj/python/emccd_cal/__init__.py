"""EMCCD absolute calibration: detector model, simulator and frame files."""

from ._core import (
    EmccdError,
    EmccdParams,
    click_prob,
    em_gain_pdf,
    eta_of_threshold,
    noise_click_prob,
    noise_pdf,
    predicted_efficiency,
    predicted_noise_click_rate,
    read_noise_pdf,
    read_stack,
    render_dark_stack,
    single_photon_response_pdf,
    single_photon_tail,
    theoretical_nrf,
    write_stack,
)

__all__ = [
    "EmccdError",
    "EmccdParams",
    "click_prob",
    "em_gain_pdf",
    "eta_of_threshold",
    "noise_click_prob",
    "noise_pdf",
    "predicted_efficiency",
    "predicted_noise_click_rate",
    "read_noise_pdf",
    "read_stack",
    "render_dark_stack",
    "single_photon_response_pdf",
    "single_photon_tail",
    "theoretical_nrf",
    "write_stack",
]
