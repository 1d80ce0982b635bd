"""Entry point for running tresse as a module."""

from tresse.cli.main import run

if __name__ == "__main__":
    run()
