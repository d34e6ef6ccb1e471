"""Entry point for running spinwigner as a module.

Usage: python -m spinwigner
"""

from spinwigner.cli import app

if __name__ == "__main__":
    app()
