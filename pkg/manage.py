#!/usr/bin/env python
import os
import sys

if __name__ == "__main__":
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "horolab.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django, which horolab uses for settings and its "
            "management command. Is it installed in the active environment?"
        ) from exc
    execute_from_command_line(sys.argv)
