import os
import sys


def main(argv=None):
    """
    Console entry point: `horolab <kind> --config <path>` runs the horolab management
    command under the packaged settings unless DJANGO_SETTINGS_MODULE says otherwise.
    """
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "horolab.settings")
    from django.core.management import execute_from_command_line

    argv = sys.argv[1:] if argv is None else list(argv)
    execute_from_command_line(["horolab", "horolab", *argv])


if __name__ == "__main__":
    main()
