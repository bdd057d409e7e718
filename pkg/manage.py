#!/usr/bin/env python
"""Command-line entry point for the lode pipeline.

Pipeline subcommands: estimate, synth, eval, overlay, synth_suite.
"""
import os
import sys


def main():
    """Dispatch to the Django management command named in argv."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'lode.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the requirements "
            "(pip install -r requirements.txt) into the active environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
