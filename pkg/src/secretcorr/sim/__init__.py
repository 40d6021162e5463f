"""Seeded simulation of the distillation and formation protocols."""

from .protocol import (SimConfig, SimReport, acceptance_probability, block_acceptance_probability,
                       repeated_code_block, run_distillation, run_formation, sample_outcomes)

__all__ = ["SimConfig", "SimReport", "acceptance_probability", "block_acceptance_probability",
           "repeated_code_block", "run_distillation", "run_formation", "sample_outcomes"]
