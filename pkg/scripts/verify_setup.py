#!/usr/bin/env python3
"""Verify a morphoneat development setup."""

import importlib
import shutil
import sys

REQUIRED = ("fastapi", "pydantic", "pydantic_settings", "httpx", "structlog", "click", "numpy", "scipy", "pandas")


def check(condition, message):
    """Print check result."""
    status = "ok " if condition else "FAIL"
    print(f"[{status}] {message}")
    return condition


def _importable(name):
    try:
        importlib.import_module(name)
    except ImportError:
        return False
    return True


def main():
    """Run setup verification."""
    print("Verifying morphoneat setup...\n")

    all_good = check(
        sys.version_info >= (3, 10),
        f"Python {sys.version_info.major}.{sys.version_info.minor} (requires 3.10+)",
    )
    for name in REQUIRED:
        all_good &= check(_importable(name), f"{name} importable")
    all_good &= check(_importable("src.cli"), "morphoneat package importable from the repo root")
    check(shutil.which("docker") is not None, "Docker available (optional, for evaluation servers)")

    if all_good:
        print("\nAll checks passed. Try: morphoneat scenarios --dims 2x2x1")
        return 0
    print("\nSetup incomplete. Run: pip install -e '.[dev]'")
    return 1


if __name__ == "__main__":
    sys.exit(main())
