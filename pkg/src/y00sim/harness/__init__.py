"""Experiment configuration, end-to-end pipelines, reports and the command line."""

from .config import ExperimentConfig, KeygenConfig, OutputConfig
from .pipeline import attack_report, run_keygen, run_transcript
from .report import Report, Row
from .reproduce import reproduce_paper
from .transcript_io import read_transcript, write_transcript

__all__ = [
    "ExperimentConfig", "KeygenConfig", "OutputConfig", "Report", "Row", "attack_report",
    "read_transcript", "reproduce_paper", "run_keygen", "run_transcript", "write_transcript",
]
