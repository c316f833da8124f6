"""Build It Break It: adversarial shared-task evaluation harness."""

__version__ = "0.1.0"
