"""hemigrasp: hemisphere-constrained shared-control grasp planning engine."""

__version__ = "0.1.0"
